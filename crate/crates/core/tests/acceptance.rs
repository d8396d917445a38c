//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Desk-scale checks compare against a separate mod-7 2x2 matrix
//! implementation, so a bug shared by the library's arithmetic and its
//! attacks cannot cancel out.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftbreak::attack::{monomial_closure, ClosureMode};
use shiftbreak::kex::orbit_element_u64;
use shiftbreak::{
    commutant_solution, orbit_element, orbit_prefix_basis, run_attack, run_session,
    sample_instance, CommutantBudget, EndoDescriptor, Field, Method, Platform, PlatformChoice,
    PlatformElement, Scenario, SpanBasis, Variant,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v.get(v.len() / 2).copied().unwrap_or_default()
}

fn ms(d: Duration) -> String {
    format!("{:.1} ms", d.as_secs_f64() * 1e3)
}

// ---- independent mod-7 2x2 oracle ----

type M7 = [[u64; 2]; 2];

fn m7_mul(a: M7, b: M7) -> M7 {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]) % 7;
        }
    }
    c
}

fn m7_inv(a: M7) -> M7 {
    let det = (a[0][0] * a[1][1] + 49 - a[0][1] * a[1][0]) % 7;
    assert_ne!(det, 0);
    let d = (1..7).find(|x| x * det % 7 == 1).unwrap();
    [
        [a[1][1] * d % 7, (7 - a[0][1]) * d % 7],
        [(7 - a[1][0]) * d % 7, a[0][0] * d % 7],
    ]
}

fn m7_of(x: &PlatformElement) -> M7 {
    let e = |i, j| x.entry(i, j).raw() as u64;
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// `a_1..=a_len` by `a_(k+1) = H^-1 a_k H g`.
fn m7_orbit(h: M7, g: M7, len: usize) -> Vec<M7> {
    let h_inv = m7_inv(h);
    let mut out = vec![g];
    while out.len() < len {
        let prev = *out.last().unwrap();
        out.push(m7_mul(m7_mul(m7_mul(h_inv, prev), h), g));
    }
    out
}

fn gf7_2x2() -> Platform {
    Platform::matrices(Field::prime(7).unwrap(), 2).unwrap()
}

// ---- criteria ----

fn kls_unmasked_conjugation() -> Outcome {
    let mut exact = 0;
    let mut times = Vec::new();
    let mut max_dim = 0;
    for seed in 0..100 {
        let (t, s) = Scenario::new(PlatformChoice::Kls2x2)
            .seed(seed)
            .run()
            .unwrap();
        let (r, _) = run_attack(Method::Conjugation, &t).unwrap();
        exact += usize::from(r.recovered_key.as_ref() == Some(&s.true_key));
        max_dim = max_dim.max(r.basis_dimension);
        times.push(r.elapsed);
    }
    let med = median(times);
    outcome(
        exact == 100 && med < Duration::from_secs(1) && max_dim <= 4,
        format!(
            "{exact}/100 exact, median {}, max basis dim {max_dim}",
            ms(med)
        ),
    )
}

fn kls_masked() -> Outcome {
    let mut exact = 0;
    let mut times = Vec::new();
    for seed in 0..100 {
        let (t, s) = Scenario::new(PlatformChoice::Kls2x2)
            .masked(true)
            .seed(seed)
            .run()
            .unwrap();
        let masks_ok = s.r.as_ref().is_some_and(|r| !r.is_zero())
            && s.s.as_ref().is_some_and(|s| !s.is_zero())
            && t.phi
                .inner_pair()
                .is_some_and(|(h, _)| (h * &t.g).inverse().is_err());
        let (r, _) = run_attack(Method::Masked, &t).unwrap();
        exact += usize::from(masks_ok && r.recovered_key.as_ref() == Some(&s.true_key));
        times.push(r.elapsed);
    }
    let med = median(times);
    outcome(
        exact == 100 && med < Duration::from_secs(1),
        format!("{exact}/100 exact, median {}", ms(med)),
    )
}

fn kls_composite() -> Outcome {
    let mut exact = 0;
    let mut worst = Duration::ZERO;
    let mut max_dim = 0;
    let mut flat_ok = true;
    for seed in 0..50 {
        let (t, s) = Scenario::new(PlatformChoice::Kls2x2Power4)
            .seed(seed)
            .run()
            .unwrap();
        let scalar = t.phi.scalar_field();
        flat_ok &=
            scalar.order() == BigUint::from(2u32) && t.platform().flat_dim(&scalar).unwrap() == 508;
        let start = Instant::now();
        let (r, _) = run_attack(Method::General, &t).unwrap();
        worst = worst.max(start.elapsed());
        max_dim = max_dim.max(r.basis_dimension);
        exact += usize::from(r.recovered_key.as_ref() == Some(&s.true_key));
    }
    outcome(
        exact == 50 && flat_ok && worst < Duration::from_secs(30),
        format!("{exact}/50 exact over GF(2), flat dim 508: {flat_ok}, max orbit basis {max_dim}, slowest {}", ms(worst)),
    )
}

fn hkks_general() -> Outcome {
    let mut exact = 0;
    let mut worst = Duration::ZERO;
    let mut flat_ok = true;
    for seed in 0..5 {
        let (t, s) = Scenario::new(PlatformChoice::Hkks3x3)
            .exp_bound(1000u32.into())
            .seed(seed)
            .run()
            .unwrap();
        flat_ok &= t.platform().flat_dim(&t.phi.scalar_field()).unwrap() == 540;
        let start = Instant::now();
        let (r, _) = run_attack(Method::General, &t).unwrap();
        worst = worst.max(start.elapsed());
        exact += usize::from(r.recovered_key.as_ref() == Some(&s.true_key));
    }
    outcome(
        exact == 5 && flat_ok && worst < Duration::from_secs(600),
        format!(
            "{exact}/5 exact over GF(7), flat dim 540: {flat_ok}, slowest {}",
            ms(worst)
        ),
    )
}

fn oracle_grid() -> Outcome {
    let p = gf7_2x2();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6964);
    let mut checked = 0;
    let mut mismatches = 0;
    let mut commutant_failures = 0;
    let variants = [Variant::Inner, Variant::Composite, Variant::Masked];
    for variant in variants {
        for _ in 0..5 {
            let inst = sample_instance(&p, variant, &mut rng).unwrap();
            let oracle = m7_orbit(m7_of(&inst.h), m7_of(&inst.m), 40);
            let (phi, methods, masked) = match variant {
                Variant::Inner => (
                    EndoDescriptor::inner(inst.h.clone(), inst.h_inv.clone()).unwrap(),
                    &[Method::General, Method::Conjugation, Method::Commutant][..],
                    false,
                ),
                // x -> x^7 fixes GF(7), so this is conjugation routed through the composite code path
                Variant::Composite => (
                    EndoDescriptor::compose(7u32.into(), inst.h.clone(), inst.h_inv.clone())
                        .unwrap(),
                    &[Method::General][..],
                    false,
                ),
                Variant::Masked => (
                    EndoDescriptor::inner(inst.h.clone(), inst.h_inv.clone()).unwrap(),
                    &[Method::Masked][..],
                    true,
                ),
            };
            for m in 1..=20u64 {
                for n in 1..=20u64 {
                    let (t, _) =
                        run_session(&phi, &inst.m, &m.into(), &n.into(), masked, &mut rng).unwrap();
                    let want = oracle[(m + n - 1) as usize];
                    for &method in methods {
                        let (r, _) = run_attack(method, &t).unwrap();
                        checked += 1;
                        match (&r.recovered_key, method) {
                            (Some(k), _) if m7_of(k) == want => {}
                            (None, Method::Commutant) => commutant_failures += 1,
                            _ => mismatches += 1,
                        }
                    }
                }
            }
        }
    }
    outcome(
        mismatches == 0,
        format!(
            "{checked} attack runs on M_2(GF(7)), {mismatches} mismatches \
             (commutant returned no key in {commutant_failures} runs)"
        ),
    )
}

fn commutant_baseline() -> Outcome {
    let budget = CommutantBudget::default();
    let toy = PlatformChoice::Toy { p: 7, d: 1, n: 2 };
    let mut eligible = 0;
    let mut exact = 0;
    let mut skipped = 0;
    let mut seed = 0;
    while eligible < 100 {
        let (t, s) = Scenario::new(toy)
            .exp_bound(1000u32.into())
            .seed(seed)
            .run()
            .unwrap();
        seed += 1;
        if commutant_solution(&t, budget).unwrap().is_none() {
            skipped += 1;
            continue;
        }
        eligible += 1;
        let (r, _) = run_attack(Method::Commutant, &t).unwrap();
        exact += usize::from(r.recovered_key.as_ref() == Some(&s.true_key));
    }
    let mut refused = 0;
    for seed in 0..100 {
        let (t, _) = Scenario::new(PlatformChoice::Kls2x2)
            .masked(true)
            .seed(seed)
            .run()
            .unwrap();
        let (r, _) = run_attack(Method::Commutant, &t).unwrap();
        refused += usize::from(!r.success());
    }
    outcome(
        exact >= 90 && refused == 100,
        format!(
            "unmasked toy: {exact}/100 exact ({skipped} instances without invertible Y' skipped); \
             masked KLS: {refused}/100 failure reports"
        ),
    )
}

fn protocol_consistency() -> Outcome {
    let configs = [
        Scenario::new(PlatformChoice::Kls2x2),
        Scenario::new(PlatformChoice::Kls2x2).masked(true),
        Scenario::new(PlatformChoice::Kls2x2Power4),
        Scenario::new(PlatformChoice::Hkks3x3),
        Scenario::new(PlatformChoice::Toy { p: 7, d: 1, n: 2 }),
        Scenario::new(PlatformChoice::Toy { p: 7, d: 1, n: 2 }).masked(true),
        Scenario::new(PlatformChoice::Toy { p: 2, d: 3, n: 3 }),
        Scenario::new(PlatformChoice::Toy { p: 3, d: 2, n: 3 }).masked(true),
    ];
    let mut violations = 0;
    for i in 0..1000u64 {
        let (t, s) = configs[i as usize % configs.len()]
            .clone()
            .seed(i)
            .run()
            .unwrap();
        let a_m = orbit_element(&t.g, &t.phi, &s.m).unwrap();
        let a_n = orbit_element(&t.g, &t.phi, &s.n).unwrap();
        let k_alice = &t.phi.power(&s.m).unwrap().apply(&t.bob).unwrap() * &a_m;
        let k_bob = &t.phi.power(&s.n).unwrap().apply(&t.alice).unwrap() * &a_n;
        let truth = orbit_element(&t.g, &t.phi, &(&s.m + &s.n)).unwrap();
        let mut ok = k_alice == truth && k_bob == truth && s.true_key == truth;
        if t.masked {
            let hm = t.phi.inner_pair().unwrap().0 * &t.g;
            ok &= (&(&t.alice - &a_m) * &hm).is_zero() && (&(&t.bob - &a_n) * &hm).is_zero();
            ok &= t.alice != a_m && t.bob != a_n;
        } else {
            ok &= t.alice == a_m && t.bob == a_n;
        }
        violations += usize::from(!ok);
    }

    let p = gf7_2x2();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut closed_form_bad = 0;
    for _ in 0..20 {
        let inst = sample_instance(&p, Variant::Inner, &mut rng).unwrap();
        let phi = EndoDescriptor::inner(inst.h.clone(), inst.h_inv.clone()).unwrap();
        let oracle = m7_orbit(m7_of(&inst.h), m7_of(&inst.m), 50);
        let hm = &inst.h * &inst.m;
        for k in 1..=50u64 {
            let closed = &inst.h_inv.pow_u64(k) * &hm.pow_u64(k);
            let fast = orbit_element_u64(&inst.m, &phi, k).unwrap();
            let want = oracle[k as usize - 1];
            closed_form_bad += usize::from(m7_of(&closed) != want || m7_of(&fast) != want);
        }
    }
    outcome(
        violations == 0 && closed_form_bad == 0,
        format!(
            "1000 sessions over {} configurations: {violations} violations; \
             closed form for k <= 50 on 20 inner toys: {closed_form_bad} mismatches",
            configs.len()
        ),
    )
}

fn field_axioms(f: &Field, rng: &mut ChaCha8Rng) -> usize {
    let mut bad = 0;
    let order_minus_one = f.order() - 1u32;
    let p = f.characteristic();
    for _ in 0..10_000 {
        let (a, b, c) = (f.random(rng), f.random(rng), f.random(rng));
        bad += usize::from(f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c)));
        bad += usize::from(f.add(f.add(a, b), c) != f.add(a, f.add(b, c)));
        bad += usize::from(f.mul(a, b) != f.mul(b, a) || f.add(a, b) != f.add(b, a));
        bad += usize::from(f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)));
        bad += usize::from(f.add(a, f.neg(a)) != f.zero() || f.mul(a, f.one()) != a);
        if !a.is_zero() {
            bad += usize::from(f.mul(a, f.inv(a).unwrap()) != f.one());
        }
    }
    for _ in 0..500 {
        let (a, b) = (f.random_nonzero(rng), f.random(rng));
        bad += usize::from(f.pow(a, &order_minus_one) != f.one());
        bad += usize::from(f.pow_u64(f.add(a, b), p) != f.add(f.pow_u64(a, p), f.pow_u64(b, p)));
    }
    if f.order() <= BigUint::from(1u32 << 10) {
        let q = u64::try_from(f.order()).unwrap();
        for i in 1..q {
            let a = f.from_coeffs(&base_digits(i, p, f.degree())).unwrap();
            bad += usize::from(f.mul(a, f.inv(a).unwrap()) != f.one());
        }
    }
    bad
}

fn base_digits(mut v: u64, p: u64, d: usize) -> Vec<u64> {
    (0..d)
        .map(|_| {
            let c = v % p;
            v /= p;
            c
        })
        .collect()
}

fn endo_laws(phi: &EndoDescriptor, rng: &mut ChaCha8Rng, trials: usize) -> usize {
    let platform = phi.platform().clone();
    let scalar = phi.scalar_field();
    let field = platform.field().clone();
    let mut bad = 0;
    for _ in 0..trials {
        let x = PlatformElement::random(&platform, rng);
        let y = PlatformElement::random(&platform, rng);
        let f = |z: &PlatformElement| phi.apply(z).unwrap();
        bad += usize::from(f(&(&x * &y)) != &f(&x) * &f(&y));
        bad += usize::from(f(&(&x + &y)) != &f(&x) + &f(&y));
        // scalars of the scalar field, embedded in the base field
        let lambda = field.from_int(rng.gen_range(0..scalar.characteristic()));
        let lambda = if scalar == field {
            field.random(rng)
        } else {
            lambda
        };
        bad += usize::from(f(&x.scale(lambda)) != f(&x).scale(lambda));
        if let shiftbreak::EndoKind::EntryPower { e } = phi.kind() {
            let mu = field.random(rng);
            bad += usize::from(f(&x.scale(mu)) != f(&x).scale(field.pow(mu, e)));
        }
        let (a, b) = (rng.gen_range(0..6u64), rng.gen_range(0..6u64));
        let whole = phi.power_u64(a + b).unwrap().apply(&x).unwrap();
        let split = phi
            .power_u64(b)
            .unwrap()
            .apply(&phi.power_u64(a).unwrap().apply(&x).unwrap())
            .unwrap();
        bad += usize::from(whole != split);
    }
    bad
}

fn prefix_lemma(rng: &mut ChaCha8Rng) -> usize {
    let gf4 = Platform::matrices(Field::new(2, 2).unwrap(), 2).unwrap();
    let mut bad = 0;
    for i in 0..200 {
        let (platform, phi, g) = if i % 2 == 0 {
            let p = gf7_2x2();
            let inst = sample_instance(&p, Variant::Inner, rng).unwrap();
            (
                p,
                EndoDescriptor::inner(inst.h, inst.h_inv).unwrap(),
                inst.m,
            )
        } else {
            // flat dimension 8 over GF(2)
            let inst = sample_instance(&gf4, Variant::Composite, rng).unwrap();
            let phi = EndoDescriptor::compose(2u32.into(), inst.h, inst.h_inv).unwrap();
            (gf4.clone(), phi, inst.m)
        };
        let scalar = phi.scalar_field();
        assert!(platform.flat_dim(&scalar).unwrap() <= 8);
        let basis = orbit_prefix_basis(&g, &phi, 8).unwrap();
        let k = basis.len() as u64;
        for j in 1..=20 {
            let a = orbit_element_u64(&g, &phi, k + j).unwrap();
            bad += usize::from(!basis.basis.contains(&a.flatten(&scalar).unwrap()).unwrap());
        }
    }
    bad
}

fn closure_membership(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let p = gf7_2x2();
    let mut bad = 0;
    let mut max_t = 0;
    for _ in 0..50 {
        let inst = sample_instance(&p, Variant::Inner, rng).unwrap();
        let hm = &inst.h * &inst.m;
        let span = monomial_closure(&inst.h_inv, &hm, p.field(), ClosureMode::Full).unwrap();
        max_t = max_t.max(span.basis.len());
        for k in 0..=10 {
            for l in 0..=10 {
                let x = &inst.h_inv.pow_u64(k) * &hm.pow_u64(l);
                bad += usize::from(!span.basis.contains(x.coords()).unwrap());
            }
        }
    }
    (bad, max_t)
}

fn annihilators(rng: &mut ChaCha8Rng) -> usize {
    let platforms = [
        gf7_2x2(),
        Platform::matrices(Field::prime(7).unwrap(), 3).unwrap(),
        Platform::matrices(Field::gf2_127().unwrap(), 2).unwrap(),
    ];
    let mut bad = 0;
    for platform in &platforms {
        let n = platform.n();
        for trial in 0..100 {
            // force a range of ranks by zeroing rows
            let mut a = PlatformElement::random(platform, rng);
            let zero_rows = trial % (n + 1);
            let mut coords = a.coords().to_vec();
            coords[..zero_rows * n].fill(platform.field().zero());
            a = PlatformElement::from_coords(platform, coords).unwrap();
            let basis = a.left_annihilator().unwrap();
            let rank = a.rank().unwrap();
            bad += usize::from(basis.len() != n * (n - rank));
            bad += basis.iter().filter(|b| !(*b * &a).is_zero()).count();
            let mut span = SpanBasis::new(platform.field().clone(), platform.coord_len());
            for b in &basis {
                bad += usize::from(!span.insert(b.coords().to_vec(), ()).unwrap().added());
            }
        }
    }
    bad
}

fn invariant_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fields = [
        Field::gf2_127().unwrap(),
        Field::prime(7).unwrap(),
        Field::new(2, 2).unwrap(),
        Field::new(3, 2).unwrap(),
    ];
    let field_bad: usize = fields.iter().map(|f| field_axioms(f, &mut rng)).sum();

    let kls = Platform::matrices(Field::gf2_127().unwrap(), 2).unwrap();
    let inst = sample_instance(&kls, Variant::Composite, &mut rng).unwrap();
    let (t, _) = Scenario::new(PlatformChoice::Hkks3x3)
        .exp_bound(10u32.into())
        .run()
        .unwrap();
    let phis = [
        EndoDescriptor::identity(&kls),
        EndoDescriptor::inner(inst.h.clone(), inst.h_inv.clone()).unwrap(),
        EndoDescriptor::entry_power(&kls, 4u32.into()).unwrap(),
        EndoDescriptor::compose(4u32.into(), inst.h, inst.h_inv).unwrap(),
        t.phi,
    ];
    let endo_bad: usize = phis.iter().map(|phi| endo_laws(phi, &mut rng, 100)).sum();
    let prefix_bad = prefix_lemma(&mut rng);
    let (closure_bad, max_t) = closure_membership(&mut rng);
    let ann_bad = annihilators(&mut rng);
    let total = field_bad + endo_bad + prefix_bad + closure_bad + ann_bad + usize::from(max_t > 4);
    outcome(
        total == 0,
        format!(
            "field {field_bad}, endomorphism {endo_bad}, prefix lemma {prefix_bad}, \
             closure membership {closure_bad} (max t {max_t}), annihilator {ann_bad} failures"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("KLS unmasked, conjugation attack", kls_unmasked_conjugation),
        ("KLS masked, masked attack", kls_masked),
        ("KLS composite endomorphism, general attack", kls_composite),
        ("HKKS M_3(F_7[A_5]), general attack", hkks_general),
        ("oracle equivalence on M_2(GF(7)) grid", oracle_grid),
        ("commutant baseline", commutant_baseline),
        ("protocol self-consistency", protocol_consistency),
        ("invariant suites", invariant_suites),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {}: {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
