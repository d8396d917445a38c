//! Text formats for platforms, matrices, descriptors, transcripts, secrets
//! and attack reports. Every document is a single JSON object with a fixed
//! key order, written on one line and terminated by a newline.
//!
//! Field elements use the field's own text encoding: a hex string in
//! characteristic 2, a coefficient array otherwise. Group-algebra entries are
//! sparse lists of `[element-index, coefficient]` pairs.

use std::sync::Arc;
use std::time::Duration;

use num_bigint::BigUint;
use serde_json::{json, Map, Number, Value};

use crate::attack::{AttackReport, Method};
use crate::endo::{EndoDescriptor, EndoKind};
use crate::error::{format_err, Error, Result};
use crate::field::{Fe, Field};
use crate::group::GroupTable;
use crate::kex::{SessionSecrets, Transcript};
use crate::platform::{Platform, PlatformElement};
use crate::poly::Poly;

fn finish(v: Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

fn parse(text: &str) -> Result<Map<String, Value>> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| format_err("document must end with a newline"))?;
    match serde_json::from_str(body).map_err(|e| format_err(e.to_string()))? {
        Value::Object(map) => Ok(map),
        _ => Err(format_err("expected a JSON object")),
    }
}

/// Checks that `map` has exactly `keys`, in that order.
fn expect_keys(map: &Map<String, Value>, keys: &[&str]) -> Result<()> {
    if !map.keys().map(String::as_str).eq(keys.iter().copied()) {
        return Err(format_err(format!(
            "expected keys {keys:?}, got {:?}",
            map.keys().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn big_number(n: &BigUint) -> Value {
    Value::Number(serde_json::from_str::<Number>(&n.to_string()).expect("decimal integer"))
}

fn big_from(v: &Value, what: &str) -> Result<BigUint> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        _ => return Err(format_err(format!("{what} must be an integer"))),
    };
    if text.is_empty()
        || !text.bytes().all(|b| b.is_ascii_digit())
        || (text.len() > 1 && text.starts_with('0'))
    {
        return Err(format_err(format!("{what} must be a nonnegative integer")));
    }
    text.parse()
        .map_err(|_| format_err(format!("bad integer for {what}")))
}

fn usize_from(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| format_err(format!("{what} must be a small nonnegative integer")))
}

fn field_value(field: &Field, a: Fe) -> Value {
    let text = field.encode(a);
    if field.characteristic() == 2 {
        Value::String(text)
    } else {
        serde_json::from_str(&text).expect("coefficient list is valid JSON")
    }
}

fn field_from(field: &Field, v: &Value) -> Result<Fe> {
    match (field.characteristic() == 2, v) {
        (true, Value::String(s)) => field.decode(s),
        (false, Value::Array(_)) => field.decode(&v.to_string()),
        _ => Err(format_err("field element has the wrong shape")),
    }
}

pub fn platform_to_value(p: &Platform) -> Value {
    let f = p.field();
    json!({
        "p": f.characteristic(),
        "d": f.degree(),
        "modulus": f.modulus().coeffs(),
        "group": p.group().map(|g| g.name().to_string()),
        "n": p.n(),
    })
}

pub fn platform_from_value(v: &Value) -> Result<Platform> {
    let map = v
        .as_object()
        .ok_or_else(|| format_err("platform must be an object"))?;
    expect_keys(map, &["p", "d", "modulus", "group", "n"])?;
    let p = map["p"]
        .as_u64()
        .ok_or_else(|| format_err("p must be an integer"))?;
    let d = usize_from(&map["d"], "d")?;
    let coeffs = map["modulus"]
        .as_array()
        .ok_or_else(|| format_err("modulus must be an array"))?
        .iter()
        .map(|c| {
            c.as_u64()
                .filter(|&c| c < p)
                .ok_or_else(|| format_err("bad modulus coefficient"))
        })
        .collect::<Result<Vec<_>>>()?;
    let modulus = Poly::new(p, coeffs.clone());
    if modulus.coeffs() != coeffs.as_slice() {
        return Err(format_err("modulus has trailing zero coefficients"));
    }
    let field = Field::with_modulus(p, modulus).map_err(|e| format_err(e.to_string()))?;
    if field.degree() != d {
        return Err(format_err("d does not match the modulus degree"));
    }
    let n = usize_from(&map["n"], "n")?;
    let platform = match &map["group"] {
        Value::Null => Platform::matrices(field, n),
        Value::String(name) => {
            Platform::group_algebra_matrices(field, Arc::new(GroupTable::by_name(name)?), n)
        }
        _ => return Err(format_err("group must be a name or null")),
    };
    platform.map_err(|e| format_err(e.to_string()))
}

pub fn matrix_to_value(x: &PlatformElement) -> Value {
    let p = x.platform();
    let f = p.field();
    let r = p.entry_dim();
    let n = p.n();
    let entry = |cell: &[Fe]| match p.group() {
        None => field_value(f, cell[0]),
        Some(_) => Value::Array(
            cell.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, &c)| json!([i, field_value(f, c)]))
                .collect(),
        ),
    };
    Value::Array(
        x.coords()
            .chunks(n * r)
            .map(|row| Value::Array(row.chunks(r).map(entry).collect()))
            .collect(),
    )
}

pub fn matrix_from_value(p: &Platform, v: &Value) -> Result<PlatformElement> {
    let f = p.field();
    let n = p.n();
    let r = p.entry_dim();
    let rows = v
        .as_array()
        .filter(|rows| rows.len() == n)
        .ok_or_else(|| format_err(format!("matrix must have {n} rows")))?;
    let mut data = Vec::with_capacity(p.coord_len());
    for row in rows {
        let cells = row
            .as_array()
            .filter(|c| c.len() == n)
            .ok_or_else(|| format_err(format!("matrix rows must have {n} entries")))?;
        for cell in cells {
            if p.group().is_none() {
                data.push(field_from(f, cell)?);
                continue;
            }
            let mut coeffs = vec![Fe::ZERO; r];
            let mut last = None;
            for pair in cell
                .as_array()
                .ok_or_else(|| format_err("group-algebra entry must be a list"))?
            {
                let pair = pair
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| format_err("expected [index, coefficient]"))?;
                let i = usize_from(&pair[0], "group element index")?;
                // strictly increasing indices and nonzero coefficients keep the encoding canonical
                if i >= r || last.is_some_and(|l| i <= l) {
                    return Err(format_err(
                        "group element indices must increase and be in range",
                    ));
                }
                let c = field_from(f, &pair[1])?;
                if c.is_zero() {
                    return Err(format_err("sparse entries must be nonzero"));
                }
                coeffs[i] = c;
                last = Some(i);
            }
            data.extend(coeffs);
        }
    }
    PlatformElement::from_coords(p, data)
}

pub fn descriptor_to_value(phi: &EndoDescriptor) -> Value {
    match phi.kind() {
        EndoKind::Identity => json!({"type": "identity"}),
        EndoKind::Inner { h, .. } => json!({"type": "inner", "H": matrix_to_value(h)}),
        EndoKind::EntryPower { e } => json!({"type": "entry_power", "e": big_number(e)}),
        EndoKind::Compose { e, h, .. } => {
            json!({"type": "compose", "e": big_number(e), "H": matrix_to_value(h)})
        }
    }
}

pub fn descriptor_from_value(p: &Platform, v: &Value) -> Result<EndoDescriptor> {
    let map = v
        .as_object()
        .ok_or_else(|| format_err("descriptor must be an object"))?;
    let kind = map.get("type").and_then(Value::as_str).unwrap_or_default();
    let out = match kind {
        "identity" => {
            expect_keys(map, &["type"])?;
            Ok(EndoDescriptor::identity(p))
        }
        "inner" => {
            expect_keys(map, &["type", "H"])?;
            EndoDescriptor::inner_from(matrix_from_value(p, &map["H"])?)
        }
        "entry_power" => {
            expect_keys(map, &["type", "e"])?;
            EndoDescriptor::entry_power(p, big_from(&map["e"], "e")?)
        }
        "compose" => {
            expect_keys(map, &["type", "e", "H"])?;
            EndoDescriptor::compose_from(
                big_from(&map["e"], "e")?,
                matrix_from_value(p, &map["H"])?,
            )
        }
        _ => return Err(format_err(format!("unknown descriptor type {kind:?}"))),
    };
    out.map_err(|e| match e {
        Error::Format(_) => e,
        other => format_err(format!("invalid descriptor: {other}")),
    })
}

pub fn encode_transcript(t: &Transcript) -> String {
    finish(json!({
        "platform": platform_to_value(t.platform()),
        "phi": descriptor_to_value(&t.phi),
        "g": matrix_to_value(&t.g),
        "alice": matrix_to_value(&t.alice),
        "bob": matrix_to_value(&t.bob),
        "masked": t.masked,
    }))
}

pub fn decode_transcript(text: &str) -> Result<Transcript> {
    let map = parse(text)?;
    expect_keys(&map, &["platform", "phi", "g", "alice", "bob", "masked"])?;
    let p = platform_from_value(&map["platform"])?;
    Ok(Transcript {
        phi: descriptor_from_value(&p, &map["phi"])?,
        g: matrix_from_value(&p, &map["g"])?,
        alice: matrix_from_value(&p, &map["alice"])?,
        bob: matrix_from_value(&p, &map["bob"])?,
        masked: map["masked"]
            .as_bool()
            .ok_or_else(|| format_err("masked must be a boolean"))?,
    })
}

/// The masks `R`, `S` follow the listed keys, and only in masked sessions.
pub fn encode_secrets(s: &SessionSecrets) -> String {
    let mut map = Map::new();
    map.insert("m".into(), big_number(&s.m));
    map.insert("n".into(), big_number(&s.n));
    map.insert("true_key".into(), matrix_to_value(&s.true_key));
    if let (Some(r), Some(s)) = (&s.r, &s.s) {
        map.insert("R".into(), matrix_to_value(r));
        map.insert("S".into(), matrix_to_value(s));
    }
    finish(Value::Object(map))
}

pub fn decode_secrets(p: &Platform, text: &str) -> Result<SessionSecrets> {
    let map = parse(text)?;
    let masked = map.len() == 5;
    if masked {
        expect_keys(&map, &["m", "n", "true_key", "R", "S"])?;
    } else {
        expect_keys(&map, &["m", "n", "true_key"])?;
    }
    let mask = |key: &str| masked.then(|| matrix_from_value(p, &map[key])).transpose();
    Ok(SessionSecrets {
        m: big_from(&map["m"], "m")?,
        n: big_from(&map["n"], "n")?,
        r: mask("R")?,
        s: mask("S")?,
        true_key: matrix_from_value(p, &map["true_key"])?,
    })
}

fn elapsed_ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn encode_report(r: &AttackReport) -> String {
    finish(json!({
        "method": r.method.name(),
        "success": r.success(),
        "key": r.recovered_key.as_ref().map(matrix_to_value),
        "basis_dim": r.basis_dimension,
        "elapsed_ms": elapsed_ms(r.elapsed),
    }))
}

/// Decodes a report against the platform of the transcript it came from.
/// The failure reason is not part of the format and comes back as a generic marker.
pub fn decode_report(p: &Platform, text: &str) -> Result<AttackReport> {
    let map = parse(text)?;
    expect_keys(
        &map,
        &["method", "success", "key", "basis_dim", "elapsed_ms"],
    )?;
    let method: Method = map["method"]
        .as_str()
        .ok_or_else(|| format_err("method must be a string"))?
        .parse()
        .map_err(|e: Error| format_err(e.to_string()))?;
    let success = map["success"]
        .as_bool()
        .ok_or_else(|| format_err("success must be a boolean"))?;
    let key = match &map["key"] {
        Value::Null => None,
        v => Some(matrix_from_value(p, v)?),
    };
    if success != key.is_some() {
        return Err(format_err("success must agree with the presence of a key"));
    }
    let ms = map["elapsed_ms"]
        .as_f64()
        .filter(|x| x.is_finite() && *x >= 0.0)
        .ok_or_else(|| format_err("elapsed_ms must be a nonnegative number"))?;
    Ok(AttackReport {
        method,
        failure: (!success).then(|| "reported failure".to_string()),
        recovered_key: key,
        basis_dimension: usize_from(&map["basis_dim"], "basis_dim")?,
        elapsed: Duration::from_secs_f64(ms / 1e3),
    })
}

/// Outcome of comparing a report against secrets, without knowing the platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch,
    NoKey,
}

/// Compares the report's key with the secrets' `true_key` in their encoded form.
pub fn check_report(report: &str, secrets: &str) -> Result<Verdict> {
    let r = parse(report)?;
    expect_keys(&r, &["method", "success", "key", "basis_dim", "elapsed_ms"])?;
    let s = parse(secrets)?;
    let truth = s
        .get("true_key")
        .ok_or_else(|| format_err("secrets lack true_key"))?;
    Ok(match &r["key"] {
        Value::Null => Verdict::NoKey,
        key if key == truth => Verdict::Match,
        _ => Verdict::Mismatch,
    })
}
