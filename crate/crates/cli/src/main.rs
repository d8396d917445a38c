use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use shiftbreak::codec::{self, Verdict};
use shiftbreak::{run_attack, Method, PlatformChoice, Scenario};

/// Simulate the semidirect-product key exchange and break it from transcripts.
#[derive(Parser)]
#[command(name = "shiftbreak", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one honest session and write its transcript and secrets
    Simulate {
        #[command(flatten)]
        session: SessionArgs,
        /// Transcript output path
        #[arg(long)]
        out: PathBuf,
        /// Secrets output path (m, n and the shared key)
        #[arg(long)]
        secrets: PathBuf,
    },
    /// Recover the shared key from a transcript
    Attack {
        transcript: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Report output path; printed to stdout when omitted
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare a report's key with the secrets of the session
    Check {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        secrets: PathBuf,
    },
    /// Time simulation and attack phases over several seeded sessions
    Bench {
        #[command(flatten)]
        session: SessionArgs,
        /// Defaults to the natural attack for the platform
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        #[arg(long, default_value_t = 10)]
        trials: u64,
    },
    /// Simulate, attack and check every platform with its applicable methods
    Selftest {
        #[arg(long, default_value_t = 3)]
        seeds: u64,
    },
}

#[derive(Args)]
struct SessionArgs {
    /// kls2x2, kls2x2-power4, hkks3x3 or toy:p,d,n
    #[arg(long, value_parser = parse_platform)]
    platform: PlatformChoice,
    #[arg(long)]
    masked: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Private exponents are drawn from [2, bound]; decimal or 2^k
    #[arg(long, value_parser = parse_bound, default_value = "2^64")]
    exp_bound: BigUint,
}

impl SessionArgs {
    fn scenario(&self) -> Scenario {
        Scenario::new(self.platform)
            .masked(self.masked)
            .exp_bound(self.exp_bound.clone())
            .seed(self.seed)
    }
}

fn parse_platform(s: &str) -> Result<PlatformChoice, String> {
    s.parse().map_err(|e: shiftbreak::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: shiftbreak::Error| e.to_string())
}

fn parse_bound(s: &str) -> Result<BigUint, String> {
    let bound = match s.split_once('^') {
        Some((base, exp)) => {
            let base: BigUint = base.parse().map_err(|_| format!("bad base in {s:?}"))?;
            let exp: u32 = exp.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            if exp > 4096 {
                return Err("exponent bound too large".into());
            }
            base.pow(exp)
        }
        None => s.parse().map_err(|_| format!("bad integer {s:?}"))?,
    };
    if bound == BigUint::default() {
        return Err("exponent bound must be positive".into());
    }
    Ok(bound)
}

/// Usage or format problem: exit code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fatal> {
    fs::write(path, text).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn simulate(session: &SessionArgs, out: &Path, secrets: &Path) -> Result<ExitCode, Fatal> {
    let (t, s) = session.scenario().run()?;
    write(out, &codec::encode_transcript(&t))?;
    write(secrets, &codec::encode_secrets(&s))?;
    Ok(ExitCode::SUCCESS)
}

fn attack(transcript: &Path, method: Method, report: Option<&Path>) -> Result<ExitCode, Fatal> {
    let t = codec::decode_transcript(&read(transcript)?)?;
    let (r, _) = run_attack(method, &t)?;
    let text = codec::encode_report(&r);
    match report {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(why) = &r.failure {
        eprintln!("{method} attack failed: {why}");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn check(report: &Path, secrets: &Path) -> Result<ExitCode, Fatal> {
    Ok(
        match codec::check_report(&read(report)?, &read(secrets)?)? {
            Verdict::Match => ExitCode::SUCCESS,
            Verdict::Mismatch => {
                eprintln!("recovered key differs from the shared key");
                ExitCode::from(1)
            }
            Verdict::NoKey => {
                eprintln!("report contains no key");
                ExitCode::from(1)
            }
        },
    )
}

fn default_method(choice: PlatformChoice, masked: bool) -> Method {
    match (choice, masked) {
        (_, true) => Method::Masked,
        (PlatformChoice::Kls2x2 | PlatformChoice::Toy { .. }, false) => Method::Conjugation,
        _ => Method::General,
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn bench(session: &SessionArgs, method: Option<Method>, trials: u64) -> Result<ExitCode, Fatal> {
    let method = method.unwrap_or(default_method(session.platform, session.masked));
    let mut ok = 0;
    let mut online = Vec::new();
    for trial in 0..trials {
        let seed = session.seed.wrapping_add(trial);
        let start = Instant::now();
        let (t, s) = session.scenario().seed(seed).run()?;
        let session_time = start.elapsed();
        let (r, times) = run_attack(method, &t)?;
        let exact = r.recovered_key.as_ref() == Some(&s.true_key);
        ok += u64::from(exact);
        online.push(times.express + times.assemble);
        println!(
            "trial={trial:<4} seed={seed:<20} session_ms={:>10.3} offline_basis_ms={:>10.3} \
             online_express_ms={:>10.3} online_assemble_ms={:>10.3} basis_dim={:<4} key_ok={exact}",
            ms(session_time),
            ms(times.offline),
            ms(times.express),
            ms(times.assemble),
            r.basis_dimension,
        );
    }
    online.sort();
    let median = online.get(online.len() / 2).copied().unwrap_or_default();
    println!(
        "summary platform={} masked={} method={method} trials={trials} key_ok={ok} median_online_ms={:.3}",
        session.platform,
        session.masked,
        ms(median),
    );
    Ok(ExitCode::SUCCESS)
}

/// The (platform, masked, method) combinations the attacks are expected to break.
fn selftest_matrix() -> Vec<(PlatformChoice, bool, Method)> {
    let toy = PlatformChoice::Toy { p: 7, d: 1, n: 2 };
    vec![
        (PlatformChoice::Kls2x2, false, Method::General),
        (PlatformChoice::Kls2x2, false, Method::Conjugation),
        (PlatformChoice::Kls2x2, false, Method::Commutant),
        (PlatformChoice::Kls2x2, true, Method::Masked),
        (PlatformChoice::Kls2x2Power4, false, Method::General),
        (PlatformChoice::Hkks3x3, false, Method::General),
        (PlatformChoice::Hkks3x3, false, Method::Conjugation),
        (toy, false, Method::General),
        (toy, false, Method::Conjugation),
        (toy, true, Method::Masked),
    ]
}

fn selftest(seeds: u64) -> Result<ExitCode, Fatal> {
    let mut failures = 0;
    for (choice, masked, method) in selftest_matrix() {
        let mut ok = 0;
        for seed in 0..seeds {
            let mut scenario = Scenario::new(choice).masked(masked).seed(seed);
            if choice == PlatformChoice::Hkks3x3 {
                scenario = scenario.exp_bound(1000u32.into());
            }
            let (t, s) = scenario.run()?;
            // go through the text formats, as the separate commands would
            let t = codec::decode_transcript(&codec::encode_transcript(&t))?;
            let (r, _) = run_attack(method, &t)?;
            let verdict =
                codec::check_report(&codec::encode_report(&r), &codec::encode_secrets(&s))?;
            ok += u64::from(verdict == Verdict::Match);
        }
        let pass = ok == seeds;
        failures += u64::from(!pass);
        println!(
            "{} {choice}{} / {method}: {ok}/{seeds}",
            if pass { "ok  " } else { "FAIL" },
            if masked { " (masked)" } else { "" },
        );
    }
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            session,
            out,
            secrets,
        } => simulate(session, out, secrets),
        Command::Attack {
            transcript,
            method,
            report,
        } => attack(transcript, *method, report.as_deref()),
        Command::Check { report, secrets } => check(report, secrets),
        Command::Bench {
            session,
            method,
            trials,
        } => bench(session, *method, *trials),
        Command::Selftest { seeds } => selftest(*seeds),
    };
    result.unwrap_or_else(|Fatal(msg)| {
        eprintln!("error: {msg}");
        ExitCode::from(2)
    })
}
