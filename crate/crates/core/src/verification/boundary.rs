//! Sweep of the weight vector toward a face of the simplex, with a power-law fit of
//! the gap proxy and the pointwise check r*(p(t)) ≥ c_E·p_min^{α_E}.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::certificates::{boundary_constants, BoundaryConstants, Certificate, LogNum, TauVariant};
use crate::error::{Error, Result};
use crate::geometry::MatrixTuple;
use crate::oracles::{lyapunov_gap, CocycleSpec, Estimate, McConfig};
use crate::transfer::{assemble_operator, real_weights, spectral_gap_measured, ProjectiveGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub enum GapProxy {
    /// 1 − τ*^{1/N_θ} from the ladder fed with the Monte Carlo Λ̂.
    #[default]
    MonteCarlo,
    /// 1 − ρ₂ of the discretized operator.
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundaryRow {
    pub t: f64,
    pub p: Vec<f64>,
    pub p_min: f64,
    pub lambda_gap: Estimate,
    pub n_theta: u64,
    pub tau_star: f64,
    pub rho2: Option<f64>,
    pub gap_proxy: f64,
    pub r_star: LogNum,
    pub lower_bound: Option<LogNum>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GapFit {
    /// Least-squares slope of log gap against log p_min.
    pub gamma_raw: f64,
    /// max(1, gamma_raw).
    pub gamma: f64,
    /// Largest c with gap ≥ c·p_min^γ at every row.
    pub c: f64,
    /// Gap proxy constant along the sweep; the slope carries no information.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundaryScan {
    pub index: usize,
    pub theta: f64,
    pub proxy: GapProxy,
    pub rows: Vec<BoundaryRow>,
    pub fit: GapFit,
    pub constants: BoundaryConstants,
    pub positive: bool,
    pub non_increasing: bool,
    pub inequality_holds: bool,
}

impl BoundaryScan {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Validation(format!("csv: {e}"));
        out.write_record(["t", "p_min", "gap", "r_star", "lower_bound"]).map_err(io)?;
        for r in &self.rows {
            let lb = r.lower_bound.map(|l| format!("{:e}", l.value())).unwrap_or_default();
            out.write_record([
                format!("{}", r.t),
                format!("{}", r.p_min),
                format!("{:e}", r.gap_proxy),
                format!("{:e}", r.r_star.value()),
                lb,
            ])
            .map_err(io)?;
        }
        out.flush().map_err(|e| Error::Validation(format!("csv: {e}")))
    }
}

/// p(t) = p⁰ − t·e_j + t/(N−1)·Σ_{i≠j} e_i.
pub fn boundary_path(p0: &[f64], j: usize, t: f64) -> Vec<f64> {
    let n = p0.len();
    p0.iter()
        .enumerate()
        .map(|(i, p)| if i == j { p - t } else { p + t / (n - 1) as f64 })
        .collect()
}

/// Sweep t from 0.2·p⁰_j to 0.9·p⁰_j in `steps` equal increments.
pub fn boundary_times(p0j: f64, steps: usize) -> Vec<f64> {
    let (a, b) = (0.2 * p0j, 0.9 * p0j);
    (0..steps).map(|k| a + (b - a) * k as f64 / (steps - 1) as f64).collect()
}

pub fn fit_gap_decay(p_min: &[f64], gap: &[f64]) -> Result<GapFit> {
    if p_min.len() < 2 || p_min.len() != gap.len() {
        return Err(Error::InvalidInput("gap fit needs at least two rows".into()));
    }
    if gap.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidInput("gap proxy must be positive along the sweep".into()));
    }
    let x: Vec<f64> = p_min.iter().map(|p| p.ln()).collect();
    let y: Vec<f64> = gap.iter().map(|g| g.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let gmax = gap.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gmin = gap.iter().copied().fold(f64::INFINITY, f64::min);
    let degenerate = gmax / gmin - 1.0 < 1e-9;
    let gamma_raw = if sxx > 0.0 && !degenerate { sxy / sxx } else { 0.0 };
    let gamma = gamma_raw.max(1.0);
    let c = p_min
        .iter()
        .zip(gap)
        .map(|(p, g)| g / p.powf(gamma))
        .fold(f64::INFINITY, f64::min);
    Ok(GapFit { gamma_raw, gamma, c, degenerate })
}

#[allow(clippy::too_many_arguments)]
pub fn boundary_scan(
    tuple: &MatrixTuple,
    p0: &[f64],
    theta: f64,
    j: usize,
    steps: usize,
    mc: &McConfig,
    proxy: GapProxy,
    grid_m: usize,
) -> Result<BoundaryScan> {
    crate::oracles::validate_weights(p0, tuple.len())?;
    if tuple.len() < 2 {
        return Err(Error::InvalidInput("boundary scan needs at least two matrices".into()));
    }
    if j >= tuple.len() {
        return Err(Error::InvalidInput(format!("boundary index {j} out of range")));
    }
    if steps < 2 {
        return Err(Error::InvalidInput("boundary scan needs at least two steps".into()));
    }
    let grid = match proxy {
        GapProxy::Measured => Some(ProjectiveGrid::new(grid_m)?),
        GapProxy::MonteCarlo => None,
    };
    let mut rows = Vec::with_capacity(steps);
    for t in boundary_times(p0[j], steps) {
        let p = boundary_path(p0, j, t);
        let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
        let spec = CocycleSpec::iid(tuple.clone(), p.clone())?;
        let lambda_gap = lyapunov_gap(&spec, mc)?;
        let cert = Certificate::new(tuple, theta, lambda_gap.value, TauVariant::Pessimistic, false)?;
        let rho2 = match &grid {
            Some(g) => Some(spectral_gap_measured(&assemble_operator(tuple, &real_weights(&p), g, 0.0)?)?.second_modulus),
            None => None,
        };
        let gap_proxy = match rho2 {
            Some(r) => 1.0 - r,
            None => cert.ladder.spectral_margin(),
        };
        rows.push(BoundaryRow {
            t,
            p,
            p_min,
            lambda_gap,
            n_theta: cert.ladder.n_theta,
            tau_star: cert.ladder.tau_star,
            rho2,
            gap_proxy,
            r_star: cert.r_star,
            lower_bound: None,
        });
    }
    let pm: Vec<f64> = rows.iter().map(|r| r.p_min).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap_proxy).collect();
    let fit = fit_gap_decay(&pm, &gaps)?;
    let n_max = rows.iter().map(|r| r.n_theta).max().unwrap_or(1);
    let constants = boundary_constants(tuple, theta, n_max, fit.c, fit.gamma)?;
    let mut inequality_holds = true;
    for r in rows.iter_mut() {
        let lb = constants.c_e.mul(LogNum::from_ln(constants.alpha_e * r.p_min.ln()));
        inequality_holds &= r.r_star.ln >= lb.ln;
        r.lower_bound = Some(lb);
    }
    let positive = rows.iter().all(|r| r.r_star.ln.is_finite());
    let non_increasing = rows.windows(2).all(|w| w[1].r_star.ln <= w[0].r_star.ln + 1e-12);
    Ok(BoundaryScan { index: j, theta, proxy, rows, fit, constants, positive, non_increasing, inequality_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_and_times() {
        let p = boundary_path(&[0.5, 0.3, 0.2], 0, 0.2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[0] - 0.3).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15);
        let t = boundary_times(0.5, 8);
        assert!((t[0] - 0.1).abs() < 1e-15 && (t[7] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn fit_recovers_power_law() {
        let p: Vec<f64> = vec![0.4, 0.3, 0.2, 0.1, 0.05];
        let g: Vec<f64> = p.iter().map(|x| 0.7 * x * x).collect();
        let f = fit_gap_decay(&p, &g).unwrap();
        assert!((f.gamma_raw - 2.0).abs() < 1e-12 && (f.c - 0.7).abs() < 1e-12 && !f.degenerate);
        let f = fit_gap_decay(&p, &[0.3; 5]).unwrap();
        assert!(f.degenerate && f.gamma == 1.0);
        assert!((f.c - 0.3 / 0.4).abs() < 1e-12);
    }

    #[test]
    fn fit_floors_gamma_at_one() {
        let p = [0.4, 0.2, 0.1];
        let g: Vec<f64> = p.iter().map(|x: &f64| x.sqrt()).collect();
        let f = fit_gap_decay(&p, &g).unwrap();
        assert!((f.gamma_raw - 0.5).abs() < 1e-12);
        assert_eq!(f.gamma, 1.0);
        assert!(p.iter().zip(&g).all(|(x, y)| *y >= f.c * x - 1e-15));
    }
}
