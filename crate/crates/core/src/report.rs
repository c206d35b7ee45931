//! JSON report leaves and a deterministic writer.
//!
//! Every number under `results` sits in an object carrying a `formulaId` that keys
//! into the `formulas` table of the same report. Floats are written as `{:.16e}`
//! (17 significant digits), integers plainly, non-finite values as `null`.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

use crate::certificates::LogNum;
use crate::oracles::Estimate;
use crate::transfer::C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// (formulaId, formula) pairs.
pub const FORMULAS: &[(&str, &str)] = &[
    ("boundary.alphaE", "alpha_E = gamma_tau"),
    ("boundary.cE", "c_E = c_tau / (4 N C_K max_i(1 + ecc(A_i)^(2 theta)))"),
    ("boundary.cK", "C_K = 2 N_theta (1 + (2 + ecc^(2 theta))^(N_theta - 1))"),
    ("boundary.fit", "log gap ~ gamma log p_min; gamma = max(1, slope); c = min gap / p_min^gamma"),
    ("boundary.gapProxy", "1 - tau*^(1/N_theta) (Monte Carlo) or 1 - rho_2 (measured)"),
    ("boundary.lowerBound", "c_E p_min^alpha_E"),
    ("boundary.path", "p(t) = p0 - t e_j + t/(N-1) sum_{i != j} e_i"),
    ("cauchy.bound", "alpha! M* / r^|alpha|"),
    ("chain.gap", "rho_P = 1 - |second eigenvalue of P|"),
    ("chain.kChain", "K_P = 4 / (1 - tau_P^(1/N_theta))"),
    ("chain.lA", "L_A = K_mat(rho_A)"),
    ("chain.lP", "L_P = N max_i(1 + ecc(A_i)^(2 theta))"),
    ("chain.rA", "r_A = 1 / (8 L_A K_P)"),
    ("chain.rP", "r_P = 1 / (8 L_P K_P)"),
    ("chain.tau", "tau_P = max(1 - rho_P, tau0)^c"),
    ("collision.distance", "min |t| with a leading-eigenvalue collision along p0 + t u"),
    ("extension.chain", "sum_{i,k} l_(i,k) sum_j P_ij phi(A_j, v_k)"),
    ("extension.value", "lambda~(z) = sum_i z_i sum_j l_j phi(A_i, v_j), l the leading left eigenvector"),
    ("geometry.ecc", "ecc = max_i sigma_1(A_i) / sigma_d(A_i)"),
    ("grassmann.c", "C_k = 4 binom(d,k) ecc^(2k) / (1 - rho_k)"),
    ("grassmann.rH", "r_H = min(r_persist, r_Kato)"),
    ("grassmann.rIndividual", "min(r_H^(k), r_H^(k-1))"),
    ("grassmann.rKato", "(1 - rho_k) / (8 C_k binom(d,k) ecc^k)"),
    ("grassmann.rPersist", "(1 - rho_k) / (8 k binom(d,k) ecc^(2k-1) C_k)"),
    ("grassmann.rho", "rho_k = exp(-theta Lambda_k / 2)"),
    ("joint.kMat", "K_mat = max_i (1 + 2 theta ecc(A_i+)^(2 theta)) C_geom(A_i, rho_A)"),
    ("joint.lA", "L_A = max_i p_i K_mat"),
    ("joint.lP", "L_P = max_i(1 + ecc(A_i)^(2 theta)) + rho_A"),
    ("joint.rA", "r_A = 1 / (8 L_A K)"),
    ("joint.rP", "r_P = 1 / (8 N L_P K)"),
    ("ladder.c2", "C_2 = ecc^2"),
    ("ladder.n0", "n0 = ceil(2 ln 2 / (theta Lambda))"),
    ("ladder.nTheta", "N_theta = n0 max(1, ceil(3 ln C_2 / ln(1/tau0)))"),
    ("ladder.rhoStar", "rho* = (1 - tau*^(1/N_theta)) / 2"),
    ("ladder.tau0Optimistic", "tau0 = exp(-n0 theta Lambda / 2)"),
    ("ladder.tau0Pessimistic", "tau0 = 1 - ln 2 / (4 ln(2 ecc))"),
    ("ladder.tauStar", "tau* = tau0^(N_theta / (3 n0))"),
    ("mc.gap", "Lambda^ = lambda^_1 - lambda^_2"),
    ("mc.partialSum", "Lambda^_k = top exponent of the k-th exterior power cocycle"),
    ("mc.spectrum", "lambda^_k from the QR recurrence, averaged over trials"),
    ("mc.top", "lambda^_1 = (1/n) log |A_(w_n) ... A_(w_1) v|, averaged over trials"),
    ("operator.leading", "leading eigenvalue of the discretized transfer operator"),
    ("operator.logDerivative", "(log mu(h) - log mu(-h)) / (2h)"),
    ("operator.secondModulus", "|second eigenvalue| of the discretized transfer operator"),
    ("radius.rExtension", "r*/2"),
    ("radius.rStar", "r* = 1 / (4 N K max_i(1 + ecc(A_i)^(2 theta)))"),
    ("reference.holder", "Hoelder-regime comparison constants (external, not recomputed)"),
    ("resolvent.k", "K = K* if rigorous else K*_sp"),
    ("resolvent.kStar", "K* = 1/rho* + N_theta |R|^(N_theta-1) / ((1 - rho*)^N_theta - tau*)"),
    ("resolvent.kStarSp", "K*_sp = 4 / (1 - tau*^(1/N_theta))"),
    ("resolvent.rNorm", "|R| = max(2, 2 + max_i ecc(A_i)^(2 theta))"),
    ("sup.mStar", "M* = 2 K rho* max_i[log |A_i| + ecc(A_i) + 1]"),
    ("taylor.coefficient", "c_j = (1/Q) sum_q f(r e^(i 2 pi q/Q)) e^(-i 2 pi j q/Q) / r^j"),
    ("taylor.derivative", "|d^j/dt^j lambda~(p0 + t u)| = j! |c_j|"),
    ("taylor.sharpRadius", "1 / max_{j >= J/2} |c_j|^(1/j)"),
    ("verify.check", "verification record; see measurement relation and tolerance"),
];

pub fn formula_text(id: &str) -> Option<&'static str> {
    FORMULAS.iter().find(|(k, _)| *k == id).map(|(_, v)| *v)
}

fn num(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn base(id: &str, inputs: &[&str]) -> Map<String, Value> {
    debug_assert!(formula_text(id).is_some(), "unknown formulaId {id}");
    let mut m = Map::new();
    m.insert("formulaId".into(), id.into());
    m.insert("inputs".into(), Value::Array(inputs.iter().map(|s| Value::from(*s)).collect()));
    m
}

/// {value, formulaId, inputs}
pub fn value(id: &str, x: f64, inputs: &[&str]) -> Value {
    let mut m = base(id, inputs);
    m.insert("value".into(), num(x));
    Value::Object(m)
}

pub fn integer(id: &str, n: u64, inputs: &[&str]) -> Value {
    let mut m = base(id, inputs);
    m.insert("value".into(), n.into());
    Value::Object(m)
}

/// {value (null outside the double range), logValue, formulaId, inputs}
pub fn log_value(id: &str, x: LogNum, inputs: &[&str]) -> Value {
    let mut m = base(id, inputs);
    m.insert("value".into(), x.linear().map(num).unwrap_or(Value::Null));
    m.insert("logValue".into(), num(x.ln));
    Value::Object(m)
}

pub fn estimate(id: &str, e: &Estimate, inputs: &[&str]) -> Value {
    let mut m = base(id, inputs);
    m.insert("value".into(), num(e.value));
    m.insert("stderr".into(), num(e.stderr));
    m.insert("steps".into(), e.steps.into());
    m.insert("trials".into(), e.trials.into());
    m.insert("seed".into(), e.seed.into());
    Value::Object(m)
}

pub fn complex(id: &str, z: C64, inputs: &[&str]) -> Value {
    let mut m = base(id, inputs);
    m.insert("value".into(), num(z.re));
    m.insert("imag".into(), num(z.im));
    Value::Object(m)
}

/// A vector of reals under one formulaId.
pub fn vector(id: &str, xs: &[f64], inputs: &[&str]) -> Value {
    let mut m = base(id, inputs);
    m.insert("value".into(), Value::Array(xs.iter().map(|x| num(*x)).collect()));
    Value::Object(m)
}

/// Adds extra fields to a leaf.
pub fn with(mut leaf: Value, fields: &[(&str, Value)]) -> Value {
    if let Value::Object(m) = &mut leaf {
        for (k, v) in fields {
            m.insert((*k).into(), v.clone());
        }
    }
    leaf
}

/// Object built from ordered pairs.
pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

pub fn float(x: f64) -> Value {
    num(x)
}

fn collect_ids(v: &Value, out: &mut std::collections::BTreeSet<String>) {
    match v {
        Value::Object(m) => {
            if let Some(Value::String(id)) = m.get("formulaId") {
                out.insert(id.clone());
            }
            m.values().for_each(|x| collect_ids(x, out));
        }
        Value::Array(a) => a.iter().for_each(|x| collect_ids(x, out)),
        _ => {}
    }
}

/// {command, version, input, results, formulas}; `formulas` lists each id used in `results`.
pub fn assemble(command: &str, input: Value, results: Value) -> Value {
    let mut ids = std::collections::BTreeSet::new();
    collect_ids(&results, &mut ids);
    let formulas: Map<String, Value> = ids
        .into_iter()
        .map(|id| {
            let text = formula_text(&id).unwrap_or("").to_string();
            (id, Value::String(text))
        })
        .collect();
    object(vec![
        ("command", command.into()),
        ("version", VERSION.into()),
        ("input", input),
        ("results", results),
        ("formulas", Value::Object(formulas)),
    ])
}

/// Paths of numeric values under `v` whose enclosing object has no `formulaId`.
pub fn untagged_numbers(v: &Value) -> Vec<String> {
    fn walk(v: &Value, path: &str, tagged: bool, out: &mut Vec<String>) {
        match v {
            Value::Number(_) if !tagged => out.push(path.to_string()),
            Value::Object(m) => {
                let t = m.contains_key("formulaId");
                for (k, x) in m {
                    walk(x, &format!("{path}.{k}"), t, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    let inner_tagged = tagged && !x.is_object();
                    walk(x, &format!("{path}[{i}]"), inner_tagged, out);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(v, "", false, &mut out);
    out
}

fn write_number(n: &Number, out: &mut String) {
    if let Some(u) = n.as_u64() {
        let _ = write!(out, "{u}");
    } else if let Some(i) = n.as_i64() {
        let _ = write!(out, "{i}");
    } else {
        let x = n.as_f64().unwrap_or(f64::NAN);
        if x.is_finite() {
            let _ = write!(out, "{x:.16e}");
        } else {
            out.push_str("null");
        }
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(n, out),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(x, indent, out);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(indent + 2, out);
                write_value(x, indent + 2, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                pad(indent + 2, out);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(x, indent + 2, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

/// Serialize with 2-space indentation, insertion key order and `{:.16e}` floats.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_ids_are_unique_and_sorted() {
        for w in FORMULAS.windows(2) {
            assert!(w[0].0 < w[1].0, "{} / {}", w[0].0, w[1].0);
        }
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let r = render(&float(0.1));
        assert_eq!(r.trim(), "1.0000000000000001e-1");
        assert_eq!(r.trim().parse::<f64>().unwrap(), 0.1);
        assert_eq!(render(&float(f64::NAN)).trim(), "null");
        assert_eq!(render(&Value::from(11u64)).trim(), "11");
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let results = object(vec![
            ("n0", integer("ladder.n0", 11, &["theta", "gap"])),
            ("rStar", log_value("radius.rStar", LogNum::from_value(1.6458e-5), &[])),
            ("huge", log_value("resolvent.kStar", LogNum::from_ln(1898.9), &[])),
            ("z", complex("extension.value", C64::new(0.47, -1e-3), &[])),
            ("v", vector("boundary.path", &[0.25, 0.75], &[])),
        ]);
        let rep = assemble("certify", object(vec![("theta", float(0.5))]), results);
        let text = render(&rep);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(render(&back), text);
        assert!(back["results"]["huge"]["value"].is_null());
        assert_eq!(back["formulas"].as_object().unwrap().len(), 5);
        assert!(untagged_numbers(&back["results"]).is_empty());
    }

    #[test]
    fn untagged_numbers_are_found() {
        let v = object(vec![("a", float(1.0)), ("b", value("ladder.c2", 16.0, &[]))]);
        assert_eq!(untagged_numbers(&v), vec![".a".to_string()]);
    }
}
