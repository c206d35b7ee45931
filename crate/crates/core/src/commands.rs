//! Report builders behind each CLI subcommand.

use std::str::FromStr;

use serde_json::Value;

use crate::certificates::{chain_radii, grassmann_levels, joint_radii, Certificate, GapLadder, RadiusConvention, TauVariant};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::oracles::{estimate_gaps, estimate_spectrum, estimate_top_exponent, lyapunov_gap, CocycleSpec, Estimate};
use crate::report::{self as r, object};
use crate::transfer::contour::{estimate_sharp_radius, taylor_coefficients};
use crate::transfer::{
    analytic_extension_value, assemble_operator, chain_extension_value, complex_matrix, extension_values,
    lyapunov_via_log_deriv, real_weights, spectral_gap_measured, ProjectiveGrid, C64,
};
use crate::verification::boundary::{boundary_scan, GapProxy};
use crate::verification::{reproduce_worked_example, run_all, CheckRecord, VerificationReport, VerifyOptions};

/// What a command produced: the JSON report, an optional CSV table, a human-readable
/// summary and whether every check it ran passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub table: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(report: Value, table: String) -> Self {
        Self { report, csv: None, table, passed: true }
    }
}

fn input(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// Λ from the override when present, else the Monte Carlo gap.
fn gap_source(cfg: &RunConfig, spec: &CocycleSpec) -> Result<(f64, Value)> {
    match cfg.gap_override {
        Some(g) => Ok((g, r::value("mc.gap", g, &["gapOverride"]))),
        None => {
            let e = lyapunov_gap(spec, &cfg.mc)?;
            Ok((e.value, r::estimate("mc.gap", &e, &["matrices", "weights|transition", "mc.seed"])))
        }
    }
}

fn ladder_json(l: &GapLadder) -> Value {
    let tau0_id = match l.tau0_variant {
        TauVariant::Optimistic => "ladder.tau0Optimistic",
        TauVariant::Pessimistic => "ladder.tau0Pessimistic",
    };
    object(vec![
        ("ecc", r::value("geometry.ecc", l.ecc, &["matrices"])),
        ("n0", r::integer("ladder.n0", l.n0, &["theta", "gap"])),
        ("tau0", r::with(r::value(tau0_id, l.tau0, &["n0", "theta", "gap", "ecc"]), &[("variant", variant_name(l.tau0_variant).into())])),
        ("tau0Optimistic", r::value("ladder.tau0Optimistic", l.tau0_rates.optimistic, &["n0", "theta", "gap"])),
        ("tau0Pessimistic", r::value("ladder.tau0Pessimistic", l.tau0_rates.pessimistic, &["ecc"])),
        ("c2", r::value("ladder.c2", l.c2, &["ecc"])),
        ("nTheta", r::integer("ladder.nTheta", l.n_theta, &["n0", "c2", "tau0"])),
        ("tauStar", r::value("ladder.tauStar", l.tau_star, &["tau0", "nTheta", "n0"])),
        ("rhoStar", r::value("ladder.rhoStar", l.rho_star, &["tauStar", "nTheta"])),
    ])
}

fn variant_name(v: TauVariant) -> &'static str {
    match v {
        TauVariant::Optimistic => "optimistic",
        TauVariant::Pessimistic => "pessimistic",
    }
}

fn convention_name(c: RadiusConvention) -> &'static str {
    match c {
        RadiusConvention::Example => "example",
        RadiusConvention::HalfRadius => "half-radius",
    }
}

fn cauchy_json(c: &Certificate, orders: &[u32]) -> Value {
    let rows = orders
        .iter()
        .map(|&j| {
            let alpha = [j];
            object(vec![
                ("order", r::integer("cauchy.bound", j as u64, &[])),
                ("example", r::log_value("cauchy.bound", c.cauchy(&alpha, RadiusConvention::Example), &["mStar", "rStar"])),
                ("halfRadius", r::log_value("cauchy.bound", c.cauchy(&alpha, RadiusConvention::HalfRadius), &["mStar", "rExtension"])),
            ])
        })
        .collect();
    Value::Array(rows)
}

fn certificate_json(c: &Certificate) -> Value {
    let k_inputs: &[&str] = if c.rigorous { &["kStar"] } else { &["kStarSp"] };
    object(vec![
        ("ladder", ladder_json(&c.ladder)),
        ("kStar", r::log_value("resolvent.kStar", c.resolvent.k_star, &["rhoStar", "nTheta", "rNorm", "tauStar"])),
        ("kStarSp", r::value("resolvent.kStarSp", c.resolvent.k_star_sp, &["tauStar", "nTheta"])),
        ("rNorm", r::value("resolvent.rNorm", c.resolvent.r_norm, &["theta", "matrices"])),
        ("rigorousK", c.rigorous.into()),
        ("k", r::log_value("resolvent.k", c.k_used, k_inputs)),
        ("rStar", r::log_value("radius.rStar", c.r_star, &["k", "theta", "matrices"])),
        ("rExtension", r::log_value("radius.rExtension", c.r_extension, &["rStar"])),
        ("mStar", r::log_value("sup.mStar", c.m_star, &["k", "rhoStar", "matrices"])),
    ])
}

fn weights(cfg: &RunConfig) -> Result<Vec<f64>> {
    cfg.weights.clone().ok_or_else(|| Error::Validation("weights: this command needs i.i.d. weights".into()))
}

fn table(rows: &[(&str, String)]) -> String {
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn sci_log(x: crate::certificates::LogNum) -> String {
    match x.linear() {
        Some(v) => format!("{v:.6e}"),
        None => format!("exp({:.4})", x.ln),
    }
}

pub fn estimate(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.spec()?;
    let inputs = ["matrices", "weights|transition", "mc.seed"];
    let top = estimate_top_exponent(&spec, &cfg.mc)?;
    let spectrum = estimate_spectrum(&spec, &cfg.mc)?;
    let gap = lyapunov_gap(&spec, &cfg.mc)?;
    let gaps = estimate_gaps(&spec, &cfg.mc)?;
    let spec_rows: Vec<Value> = spectrum
        .exponents
        .iter()
        .zip(&spectrum.standard_errors)
        .map(|(v, s)| {
            let e = Estimate { value: *v, stderr: *s, steps: spectrum.steps, trials: spectrum.trials, seed: spectrum.seed };
            r::estimate("mc.spectrum", &e, &inputs)
        })
        .collect();
    let results = object(vec![
        ("markov", spec.is_markov().into()),
        ("topExponent", r::estimate("mc.top", &top, &inputs)),
        ("spectrum", Value::Array(spec_rows)),
        ("gap", r::estimate("mc.gap", &gap, &inputs)),
        ("consecutiveGaps", Value::Array(gaps.iter().map(|g| r::estimate("mc.gap", g, &inputs)).collect())),
    ]);
    let t = table(&[
        ("lambda_1", format!("{} ± {}", sci(top.value), sci(top.stderr))),
        ("Lambda", format!("{} ± {}", sci(gap.value), sci(gap.stderr))),
        ("spectrum", format!("{:?}", spectrum.exponents)),
    ]);
    Ok(Outcome::ok(r::assemble("estimate", input(cfg), results), t))
}

pub fn certify(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.spec()?;
    let tuple = cfg.tuple()?;
    let (gap, gap_json) = gap_source(cfg, &spec)?;
    let c = Certificate::new(&tuple, cfg.theta, gap, cfg.flags.tau_variant, cfg.flags.rigorous_k)?;
    let mut pairs = vec![
        ("gap", gap_json),
        ("certificate", certificate_json(&c)),
        ("radiusConvention", convention_name(cfg.flags.radius_convention).into()),
        ("cauchyBounds", cauchy_json(&c, &[1, 2])),
    ];
    if cfg.flags.rho_a > 0.0 {
        let p = spec.occupation().to_vec();
        let j = joint_radii(&tuple, cfg.theta, c.k_used, cfg.flags.rho_a, &p)?;
        pairs.push((
            "joint",
            object(vec![
                ("rhoA", r::value("joint.kMat", j.rho_a, &["flags.rhoA"])),
                ("kMat", r::value("joint.kMat", j.k_mat, &["matrices", "theta", "flags.rhoA"])),
                ("lP", r::value("joint.lP", j.l_p, &["matrices", "theta", "flags.rhoA"])),
                ("lA", r::value("joint.lA", j.l_a, &["kMat", "weights"])),
                ("rP", r::log_value("joint.rP", j.r_p, &["lP", "k"])),
                ("rA", r::log_value("joint.rA", j.r_a, &["lA", "k"])),
            ]),
        ));
    }
    let t = table(&[
        ("Lambda", sci(gap)),
        ("n0", c.ladder.n0.to_string()),
        ("N_theta", c.ladder.n_theta.to_string()),
        ("tau*", sci(c.ladder.tau_star)),
        ("K", sci_log(c.k_used)),
        ("r*", sci_log(c.r_star)),
        ("M*", sci_log(c.m_star)),
    ]);
    Ok(Outcome::ok(r::assemble("certify", input(cfg), object(pairs)), t))
}

/// Parses "a+bi,c-di,…" into a weight vector.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            C64::from_str(t).map_err(|e| Error::Validation(format!("--z: cannot parse '{t}': {e}")))
        })
        .collect()
}

pub fn extend(cfg: &RunConfig, extra: &[Vec<C64>]) -> Result<Outcome> {
    let tuple = cfg.tuple()?;
    let grid = ProjectiveGrid::new(cfg.grid.m)?;
    let mut zs: Vec<Vec<C64>> = cfg.extend_points.iter().map(|z| z.iter().map(|[a, b]| C64::new(*a, *b)).collect()).collect();
    zs.extend(extra.iter().cloned());
    if zs.is_empty() {
        let p = weights(cfg)?;
        zs.push(real_weights(&p));
    }
    for z in &zs {
        if z.len() != tuple.len() {
            return Err(Error::Validation(format!("--z: expected {} entries, got {}", tuple.len(), z.len())));
        }
    }
    let vals = extension_values(&tuple, &zs, &grid).into_iter().collect::<Result<Vec<_>>>()?;
    let mut lines = vec![];
    let rows: Vec<Value> = zs
        .iter()
        .zip(&vals)
        .map(|(z, v)| {
            let zs: Vec<String> = z.iter().map(|w| format!("{}{:+}i", w.re, w.im)).collect();
            lines.push(format!("({}) -> {:.12e}{:+.12e}i", zs.join(", "), v.re, v.im));
            object(vec![
                ("z", Value::Array(z.iter().map(|w| r::complex("extension.value", *w, &["extendPoints|--z"])).collect())),
                ("lambda", r::complex("extension.value", *v, &["matrices", "z", "grid.m"])),
            ])
        })
        .collect();
    Ok(Outcome::ok(r::assemble("extend", input(cfg), object(vec![("points", Value::Array(rows))])), lines.join("\n") + "\n"))
}

fn direction(cfg: &RunConfig) -> Vec<f64> {
    cfg.contour.direction.clone().unwrap_or_else(|| {
        let n = cfg.matrices.len();
        let mut u = vec![0.0; n];
        u[0] = 1.0;
        u[n - 1] = -1.0;
        u
    })
}

pub fn taylor(cfg: &RunConfig) -> Result<Outcome> {
    let tuple = cfg.tuple()?;
    let spec = cfg.spec()?;
    let p = weights(cfg)?;
    let grid = ProjectiveGrid::new(cfg.grid.m)?;
    let (gap, gap_json) = gap_source(cfg, &spec)?;
    let c = Certificate::new(&tuple, cfg.theta, gap, cfg.flags.tau_variant, cfg.flags.rigorous_k)?;
    let (radius, radius_inputs): (f64, &[&str]) = match cfg.contour.radius {
        Some(rc) => (rc, &["contour.radius"]),
        None => (c.r_extension.value(), &["rExtension"]),
    };
    let u = direction(cfg);
    let tc = taylor_coefficients(&tuple, &p, &u, cfg.contour.order, radius, cfg.contour.nodes, &grid)?;
    let sharp = estimate_sharp_radius(&tc.complex())?;
    let mags = tc.derivative_magnitudes();
    let inputs = ["matrices", "weights", "contour", "grid.m"];
    let coeffs: Vec<Value> = tc
        .coefficients
        .iter()
        .zip(&mags)
        .enumerate()
        .map(|(j, ((re, im), d))| {
            let bound = c.cauchy(&[j as u32], cfg.flags.radius_convention);
            object(vec![
                ("order", r::integer("taylor.coefficient", j as u64, &[])),
                ("coefficient", r::complex("taylor.coefficient", C64::new(*re, *im), &inputs)),
                ("derivative", r::value("taylor.derivative", *d, &["coefficient"])),
                ("cauchyBound", r::log_value("cauchy.bound", bound, &["mStar", "rStar", "radiusConvention"])),
                ("dominated", (d.ln() <= bound.ln || *d == 0.0).into()),
            ])
        })
        .collect();
    let sharp_json = r::with(
        match sharp.radius {
            Some(x) => r::value("taylor.sharpRadius", x, &["coefficients"]),
            None => r::value("taylor.sharpRadius", f64::NAN, &["coefficients"]),
        },
        &[("indeterminate", sharp.indeterminate.into()), ("tailStart", (sharp.tail_start as u64).into())],
    );
    let results = object(vec![
        ("gap", gap_json),
        ("direction", r::vector("taylor.coefficient", &u, &["contour.direction"])),
        ("contourRadius", r::value("taylor.coefficient", radius, radius_inputs)),
        ("rStar", r::log_value("radius.rStar", c.r_star, &["k", "theta", "matrices"])),
        ("mStar", r::log_value("sup.mStar", c.m_star, &["k", "rhoStar", "matrices"])),
        ("coefficients", Value::Array(coeffs)),
        ("sharpRadius", sharp_json),
    ]);
    let mut rows: Vec<(String, String)> = mags.iter().enumerate().map(|(j, d)| (format!("|D^{j}|"), sci(*d))).collect();
    rows.push(("sharp radius".into(), sharp.radius.map(sci).unwrap_or_else(|| "indeterminate".into())));
    let t = rows.iter().map(|(k, v)| format!("{k:<14}{v}\n")).collect();
    Ok(Outcome::ok(r::assemble("taylor", input(cfg), results), t))
}

pub fn scan_boundary(cfg: &RunConfig, proxy: GapProxy) -> Result<Outcome> {
    let tuple = cfg.tuple()?;
    let p = weights(cfg)?;
    let scan = boundary_scan(&tuple, &p, cfg.theta, cfg.boundary.index, cfg.boundary.steps, &cfg.mc, proxy, cfg.grid.m)?;
    // Hypothesis constants from the config replace the fitted ones when given.
    let c_tau = cfg.boundary.c_tau.unwrap_or(scan.fit.c);
    let gamma_tau = cfg.boundary.gamma_tau.unwrap_or(scan.fit.gamma);
    let n_max = scan.rows.iter().map(|r| r.n_theta).max().unwrap_or(1);
    let constants = crate::certificates::boundary_constants(&tuple, cfg.theta, n_max, c_tau, gamma_tau)?;
    let mut holds = true;
    let rows: Vec<Value> = scan
        .rows
        .iter()
        .map(|row| {
            let lb = constants.c_e.mul(crate::certificates::LogNum::from_ln(constants.alpha_e * row.p_min.ln()));
            holds &= row.r_star.ln >= lb.ln;
            let mut pairs = vec![
                ("t", r::value("boundary.path", row.t, &["boundary.index", "boundary.steps"])),
                ("p", r::vector("boundary.path", &row.p, &["weights", "t"])),
                ("pMin", r::value("boundary.path", row.p_min, &["p"])),
                ("gap", r::estimate("mc.gap", &row.lambda_gap, &["p", "mc.seed"])),
                ("nTheta", r::integer("ladder.nTheta", row.n_theta, &["gap", "theta"])),
                ("tauStar", r::value("ladder.tauStar", row.tau_star, &["gap", "theta"])),
                ("gapProxy", r::value("boundary.gapProxy", row.gap_proxy, &["tauStar|rho2"])),
                ("rStar", r::log_value("radius.rStar", row.r_star, &["gap", "theta"])),
                ("lowerBound", r::log_value("boundary.lowerBound", lb, &["cE", "alphaE", "pMin"])),
            ];
            if let Some(r2) = row.rho2 {
                pairs.push(("rho2", r::value("operator.secondModulus", r2, &["p", "grid.m"])));
            }
            object(pairs)
        })
        .collect();
    let fit_inputs: &[&str] = &["rows.gapProxy", "rows.pMin"];
    let results = object(vec![
        ("proxy", (if proxy == GapProxy::Measured { "measured" } else { "monteCarlo" }).into()),
        ("rows", Value::Array(rows)),
        (
            "fit",
            object(vec![
                ("formulaId", "boundary.fit".into()),
                ("inputs", Value::Array(fit_inputs.iter().map(|s| Value::from(*s)).collect())),
                ("gammaRaw", r::float(scan.fit.gamma_raw)),
                ("gamma", r::float(scan.fit.gamma)),
                ("c", r::float(scan.fit.c)),
                ("degenerate", scan.fit.degenerate.into()),
            ]),
        ),
        ("cTau", r::value("boundary.fit", c_tau, if cfg.boundary.c_tau.is_some() { &["boundary.cTau"] } else { fit_inputs })),
        ("gammaTau", r::value("boundary.fit", gamma_tau, if cfg.boundary.gamma_tau.is_some() { &["boundary.gammaTau"] } else { fit_inputs })),
        ("cK", r::log_value("boundary.cK", constants.c_k, &["nTheta", "theta", "matrices"])),
        ("cE", r::log_value("boundary.cE", constants.c_e, &["cTau", "cK", "matrices"])),
        ("alphaE", r::value("boundary.alphaE", constants.alpha_e, &["gammaTau"])),
        ("positive", scan.positive.into()),
        ("nonIncreasing", scan.non_increasing.into()),
        ("inequalityHolds", holds.into()),
    ]);
    let mut csv_buf = Vec::new();
    let mut scan_out = scan.clone();
    for (row, lb) in scan_out.rows.iter_mut().zip(results["rows"].as_array().into_iter().flatten()) {
        row.lower_bound = lb["lowerBound"]["logValue"].as_f64().map(crate::certificates::LogNum::from_ln);
    }
    scan_out.write_csv(&mut csv_buf)?;
    let t = format!(
        "gamma_raw {:.4}  gamma {:.4}  c {}  degenerate {}\npositive {}  non-increasing {}  inequality {}\n",
        scan.fit.gamma_raw,
        scan.fit.gamma,
        sci(scan.fit.c),
        scan.fit.degenerate,
        scan.positive,
        scan.non_increasing,
        holds
    );
    Ok(Outcome {
        report: r::assemble("scan-boundary", input(cfg), results),
        csv: Some(String::from_utf8(csv_buf).expect("csv is utf-8")),
        table: t,
        passed: scan.positive && scan.non_increasing && holds,
    })
}

pub fn chain(cfg: &RunConfig) -> Result<Outcome> {
    let tuple = cfg.tuple()?;
    let spec = cfg.spec()?;
    let p = cfg
        .transition_matrix()
        .ok_or_else(|| Error::Validation("transition: the chain command needs a transition matrix".into()))?;
    let (gap, gap_json) = gap_source(cfg, &spec)?;
    let ladder = GapLadder::new(&tuple, cfg.theta, gap, cfg.flags.tau_variant)?;
    let cr = chain_radii(&tuple, &p, &ladder, cfg.flags.chain_exponent, cfg.flags.rho_a)?;
    let top = estimate_top_exponent(&spec, &cfg.mc)?;
    let mut pairs = vec![
        ("gap", gap_json),
        ("ladder", ladder_json(&ladder)),
        ("chainGap", r::value("chain.gap", cr.chain_gap, &["transition"])),
        ("tauChain", r::value("chain.tau", cr.tau_chain, &["chainGap", "tau0", "flags.chainExponent"])),
        ("kChain", r::value("chain.kChain", cr.k_chain, &["tauChain", "nTheta"])),
        ("lP", r::value("chain.lP", cr.l_p, &["matrices", "theta"])),
        ("lA", r::value("chain.lA", cr.l_a, &["matrices", "theta", "flags.rhoA"])),
        ("rP", r::value("chain.rP", cr.r_p, &["lP", "kChain"])),
        ("rA", r::value("chain.rA", cr.r_a, &["lA", "kChain"])),
        ("topExponentMc", r::estimate("mc.top", &top, &["matrices", "transition", "mc.seed"])),
    ];
    if tuple.dim() == 2 {
        let grid = ProjectiveGrid::new(cfg.grid.m)?;
        let v = chain_extension_value(&complex_matrix(&p), &tuple, &grid)?;
        pairs.push(("topExponentOperator", r::complex("extension.chain", v, &["matrices", "transition", "grid.m"])));
    }
    let t = table(&[
        ("rho_P", sci(cr.chain_gap)),
        ("tau_P", sci(cr.tau_chain)),
        ("K_P", sci(cr.k_chain)),
        ("r_P", sci(cr.r_p)),
        ("r_A", sci(cr.r_a)),
        ("lambda_1 (MC)", format!("{} ± {}", sci(top.value), sci(top.stderr))),
    ]);
    Ok(Outcome::ok(r::assemble("chain", input(cfg), object(pairs)), t))
}

pub fn grassmann(cfg: &RunConfig) -> Result<Outcome> {
    let tuple = cfg.tuple()?;
    let spec = cfg.spec()?;
    let d = tuple.dim();
    let ks: Vec<usize> = if cfg.grassmann.k.is_empty() { (1..d).collect() } else { cfg.grassmann.k.clone() };
    let need_mc = ks.iter().any(|k| !cfg.grassmann.gap_overrides.contains_key(k));
    let mc_gaps = if need_mc { Some(estimate_gaps(&spec, &cfg.mc)?) } else { None };
    let mut gap_json = vec![];
    let mut gaps = vec![];
    for &k in &ks {
        match cfg.grassmann.gap_overrides.get(&k) {
            Some(g) => {
                gaps.push((k, *g));
                gap_json.push(r::value("mc.gap", *g, &["grassmann.gapOverrides"]));
            }
            None => {
                let e = &mc_gaps.as_ref().expect("computed")[k - 1];
                gaps.push((k, e.value));
                gap_json.push(r::estimate("mc.gap", e, &["matrices", "weights|transition", "mc.seed"]));
            }
        }
    }
    let levels = grassmann_levels(&tuple, cfg.theta, &gaps)?;
    let mut lines = vec![];
    let rows: Vec<Value> = levels
        .iter()
        .zip(gap_json)
        .map(|(l, gj)| {
            lines.push(format!("k={}  gap {}  r_H {}  r_ind {}", l.k, sci(l.gap), sci(l.r_h), l.r_individual.map(sci).unwrap_or("-".into())));
            let mut pairs = vec![
                ("k", r::integer("grassmann.rho", l.k as u64, &["grassmann.k"])),
                ("gap", gj),
                ("rho", r::value("grassmann.rho", l.rho, &["theta", "gap"])),
                ("c", r::value("grassmann.c", l.c, &["rho", "matrices"])),
                ("rPersist", r::value("grassmann.rPersist", l.r_persist, &["c", "rho", "matrices"])),
                ("rKato", r::value("grassmann.rKato", l.r_kato, &["c", "rho", "matrices"])),
                ("rH", r::value("grassmann.rH", l.r_h, &["rPersist", "rKato"])),
            ];
            if let Some(x) = l.r_individual {
                pairs.push(("rIndividual", r::value("grassmann.rIndividual", x, &["rH"])));
            }
            object(pairs)
        })
        .collect();
    Ok(Outcome::ok(
        r::assemble("grassmann", input(cfg), object(vec![("levels", Value::Array(rows))])),
        lines.join("\n") + "\n",
    ))
}

fn measurement_json(m: &crate::verification::Measurement) -> Value {
    object(vec![
        ("name", m.name.clone().into()),
        ("formulaId", "verify.check".into()),
        ("inputs", Value::Array(vec![])),
        ("measured", r::float(m.measured)),
        ("target", r::float(m.target)),
        ("relation", serde_json::to_value(m.relation).expect("relation serializes")),
        ("tolerance", r::float(m.tolerance)),
        ("pass", m.pass.into()),
    ])
}

/// Check records without runtimes, so reports are byte-identical across runs.
pub fn check_json(c: &CheckRecord) -> Value {
    object(vec![
        ("name", c.name.clone().into()),
        ("formulaId", "verify.check".into()),
        ("inputs", Value::Array(vec![])),
        ("status", serde_json::to_value(c.status).expect("status serializes")),
        ("seeds", Value::Array(c.seeds.iter().map(|s| Value::from(*s)).collect())),
        ("measurements", Value::Array(c.measurements.iter().map(measurement_json).collect())),
        ("notes", Value::Array(c.notes.iter().map(|s| Value::from(s.as_str())).collect())),
    ])
}

pub fn verification_json(rep: &VerificationReport) -> Value {
    object(vec![
        ("passed", rep.passed().into()),
        ("checks", Value::Array(rep.checks.iter().map(check_json).collect())),
    ])
}

pub fn verify(opts: &VerifyOptions) -> Outcome {
    let rep = run_all(opts);
    let input = serde_json::to_value(opts).expect("options serialize");
    Outcome {
        report: r::assemble("verify", input, verification_json(&rep)),
        csv: None,
        table: rep.table(),
        passed: rep.passed(),
    }
}

/// Reference constants for the Hölder-regime comparison, shown as an annotation.
const HOLDER_BETA: f64 = 0.010;
const HOLDER_C: f64 = 110.0;

pub fn example(grid_m: usize) -> Result<Outcome> {
    let cfg = RunConfig::worked_example();
    let tuple = cfg.tuple()?;
    let c = Certificate::new(&tuple, cfg.theta, crate::example::WORKED_GAP, TauVariant::Pessimistic, false)?;
    let check = reproduce_worked_example()?;
    let grid = ProjectiveGrid::new(grid_m)?;
    let p0 = crate::example::WORKED_P0;
    let lam = analytic_extension_value(&tuple, &real_weights(&p0), &grid)?;
    let log_deriv = lyapunov_via_log_deriv(&tuple, &p0, &grid, 1e-4)?;
    let rho2 = spectral_gap_measured(&assemble_operator(&tuple, &real_weights(&p0), &grid, 0.0)?)?;
    let r_star = c.r_star.value();
    let holder = object(vec![
        ("formulaId", "reference.holder".into()),
        ("inputs", Value::Array(vec!["external".into()])),
        ("note", "constants taken from an external Hoelder-regime analysis; displayed, not recomputed or certified".into()),
        ("beta", r::float(HOLDER_BETA)),
        ("c", r::float(HOLDER_C)),
        ("cTimesRStarPowBeta", r::float(HOLDER_C * r_star.powf(HOLDER_BETA))),
        ("analyticLinearBound", r::float(2.0 * c.m_star.value())),
    ]);
    let results = object(vec![
        ("gap", r::value("mc.gap", crate::example::WORKED_GAP, &["gapOverride"])),
        ("certificate", certificate_json(&c)),
        ("cauchyBounds", cauchy_json(&c, &[1, 2])),
        ("lambdaOperator", r::complex("extension.value", lam, &["matrices", "weights", "grid.m"])),
        ("lambdaLogDerivative", r::value("operator.logDerivative", log_deriv, &["matrices", "weights", "grid.m"])),
        ("secondModulus", r::value("operator.secondModulus", rho2.second_modulus, &["matrices", "weights", "grid.m"])),
        ("check", check_json(&check)),
        ("holderComparison", holder),
    ]);
    let mut input = input(&cfg);
    input["grid"]["m"] = grid_m.into();
    let mut t = VerificationReport { checks: vec![check.clone()] }.table();
    t.push_str(&table(&[
        ("n0", c.ladder.n0.to_string()),
        ("N_theta", c.ladder.n_theta.to_string()),
        ("tau*", sci(c.ladder.tau_star)),
        ("K*_sp", sci(c.resolvent.k_star_sp)),
        ("r*", sci_log(c.r_star)),
        ("M*", sci_log(c.m_star)),
        ("lambda~(p0)", sci(lam.re)),
    ]));
    Ok(Outcome { report: r::assemble("example", input, results), csv: None, table: t, passed: check.passed() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_list_parses() {
        let z = parse_complex_list("0.5+0.1i, 0.5-0.1i").unwrap();
        assert_eq!(z, vec![C64::new(0.5, 0.1), C64::new(0.5, -0.1)]);
        assert!(parse_complex_list("0.5+,x").is_err());
    }

    #[test]
    fn certify_override_reproduces_r_star() {
        let out = certify(&RunConfig::worked_example()).unwrap();
        let r = out.report["results"]["certificate"]["rStar"]["value"].as_f64().unwrap();
        assert!((r / 1.63e-5 - 1.0).abs() < 0.03, "{r}");
        assert!(r::untagged_numbers(&out.report["results"]).is_empty());
    }

    #[test]
    fn grassmann_with_overrides_skips_sampling() {
        let mut cfg = RunConfig::worked_example();
        cfg.grassmann.gap_overrides.insert(1, 0.26);
        let out = grassmann(&cfg).unwrap();
        let l = &out.report["results"]["levels"][0];
        assert_eq!(l["gap"]["inputs"][0], "grassmann.gapOverrides");
        assert!(l["rIndividual"]["value"].as_f64().unwrap() > 0.0);
    }
}
