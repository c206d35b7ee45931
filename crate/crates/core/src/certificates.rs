//! Closed-form certificate constants: the spectral-gap ladder, resolvent
//! bounds, polydisc radii, sup and Cauchy bounds, joint / chain / Grassmannian
//! radii and boundary-decay constants.
//!
//! Quantities that can overflow (‖R‖^{N_θ−1}, the full resolvent bound, the
//! boundary constant C_K) are carried as natural logarithms in [`LogNum`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{binomial, MatrixTuple};
use crate::oracles::{chain_gap, validate_stochastic};

/// A positive number stored by its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNum {
    pub ln: f64,
}

/// Linear renderings are suppressed beyond this magnitude.
pub const LINEAR_LIMIT: f64 = 1e300;

impl LogNum {
    pub fn from_ln(ln: f64) -> Self {
        Self { ln }
    }

    pub fn from_value(x: f64) -> Self {
        debug_assert!(x > 0.0, "LogNum needs a positive value, got {x}");
        Self { ln: x.ln() }
    }

    /// exp(ln); may be 0 or ∞ outside the double range.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    /// The linear value when it lies in [1e-300, 1e300].
    pub fn linear(self) -> Option<f64> {
        (self.ln.abs() <= LINEAR_LIMIT.ln()).then(|| self.value())
    }

    pub fn mul(self, o: Self) -> Self {
        Self::from_ln(self.ln + o.ln)
    }

    pub fn div(self, o: Self) -> Self {
        Self::from_ln(self.ln - o.ln)
    }

    pub fn scale(self, c: f64) -> Self {
        Self::from_ln(self.ln + c.ln())
    }

    pub fn add(self, o: Self) -> Self {
        let (hi, lo) = if self.ln >= o.ln { (self.ln, o.ln) } else { (o.ln, self.ln) };
        Self::from_ln(hi + (lo - hi).exp().ln_1p())
    }

    pub fn recip(self) -> Self {
        Self::from_ln(-self.ln)
    }
}

/// ⌈x⌉, treating values within 1e-9 (relative) of an integer as that integer.
pub fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidInput(format!("theta = {theta} outside (0, 1]")));
    }
    Ok(())
}

/// n₀ = ⌈2 log 2/(θΛ)⌉.
pub fn simplicity_threshold(theta: f64, gap: f64) -> Result<u64> {
    check_theta(theta)?;
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::GapNotSimple(format!("Lyapunov gap {gap} is not positive")));
    }
    Ok(ceil_tol(2.0 * std::f64::consts::LN_2 / (theta * gap)).max(1.0) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub enum TauVariant {
    Optimistic,
    #[default]
    Pessimistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationRates {
    /// exp(−n₀θΛ/2)
    pub optimistic: f64,
    /// 1 − log 2/(4 log(2·ecc))
    pub pessimistic: f64,
}

impl OscillationRates {
    pub fn get(&self, v: TauVariant) -> f64 {
        match v {
            TauVariant::Optimistic => self.optimistic,
            TauVariant::Pessimistic => self.pessimistic,
        }
    }
}

pub fn oscillation_rate(n0: u64, theta: f64, gap: f64, ecc: f64) -> Result<OscillationRates> {
    if !(ecc >= 1.0) {
        return Err(Error::InvalidInput(format!("eccentricity {ecc} < 1")));
    }
    Ok(OscillationRates {
        optimistic: (-(n0 as f64) * theta * gap / 2.0).exp(),
        pessimistic: 1.0 - std::f64::consts::LN_2 / (4.0 * (2.0 * ecc).ln()),
    })
}

/// (C₂, N_θ) with C₂ = ecc² and N_θ = n₀·⌈3 log C₂/log(1/τ₀)⌉ (at least n₀).
pub fn holder_iteration(n0: u64, ecc: f64, tau0: f64) -> Result<(f64, u64)> {
    if !(tau0 > 0.0 && tau0 < 1.0) {
        return Err(Error::InvalidInput(format!("tau0 = {tau0} outside (0, 1); the ladder is vacuous")));
    }
    let c2 = ecc * ecc;
    let factor = ceil_tol(3.0 * c2.ln() / (1.0 / tau0).ln()).max(1.0) as u64;
    Ok((c2, n0 * factor))
}

/// (τ*, ρ*) with τ* = τ₀^{N_θ/(3n₀)}, ρ* = (1 − τ*^{1/N_θ})/2.
pub fn composite_gap(tau0: f64, n_theta: u64, n0: u64) -> (f64, f64) {
    let ln_tau_star = (n_theta as f64 / (3.0 * n0 as f64)) * tau0.ln();
    let rho = -(ln_tau_star / n_theta as f64).exp_m1() / 2.0;
    (ln_tau_star.exp(), rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GapLadder {
    pub theta: f64,
    pub gap: f64,
    pub n0: u64,
    pub tau0: f64,
    pub tau0_variant: TauVariant,
    pub tau0_rates: OscillationRates,
    pub c2: f64,
    pub n_theta: u64,
    pub tau_star: f64,
    pub rho_star: f64,
    /// 2 + max_i ecc(A_i)^{2θ}
    pub r_norm_bound: f64,
    pub ecc: f64,
}

impl GapLadder {
    pub fn new(tuple: &MatrixTuple, theta: f64, gap: f64, variant: TauVariant) -> Result<Self> {
        Self::from_ecc(tuple.ecc(), theta, gap, variant)
    }

    pub fn from_ecc(ecc: f64, theta: f64, gap: f64, variant: TauVariant) -> Result<Self> {
        let n0 = simplicity_threshold(theta, gap)?;
        let tau0_rates = oscillation_rate(n0, theta, gap, ecc)?;
        let tau0 = tau0_rates.get(variant);
        let (c2, n_theta) = holder_iteration(n0, ecc, tau0)?;
        let (tau_star, rho_star) = composite_gap(tau0, n_theta, n0);
        Ok(Self {
            theta,
            gap,
            n0,
            tau0,
            tau0_variant: variant,
            tau0_rates,
            c2,
            n_theta,
            tau_star,
            rho_star,
            r_norm_bound: 2.0 + ecc.powf(2.0 * theta),
            ecc,
        })
    }

    /// 1 − τ*^{1/N_θ} = 2ρ*.
    pub fn spectral_margin(&self) -> f64 {
        2.0 * self.rho_star
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolventBound {
    /// 1/ρ* + N_θ‖R‖^{N_θ−1}/((1−ρ*)^{N_θ} − τ*), in log space.
    pub k_star: LogNum,
    /// 4/(1 − τ*^{1/N_θ}).
    pub k_star_sp: f64,
    /// ‖R‖ = max(R_normBound, 2).
    pub r_norm: f64,
}

pub fn resolvent_bound(l: &GapLadder) -> Result<ResolventBound> {
    let n = l.n_theta as f64;
    let lhs = (n * (-l.rho_star).ln_1p()).exp();
    let den = lhs - l.tau_star;
    if !(den > 0.0) {
        return Err(Error::IsolatingCircleFailure { lhs, tau: l.tau_star });
    }
    let r_norm = l.r_norm_bound.max(2.0);
    let tail = LogNum::from_ln(n.ln() + (n - 1.0) * r_norm.ln() - den.ln());
    let k_star = LogNum::from_value(1.0 / l.rho_star).add(tail);
    Ok(ResolventBound { k_star, k_star_sp: 4.0 / l.spectral_margin(), r_norm })
}

/// (r*, r*/2) with r* = 1/(4·N·K·max_i(1 + ecc(A_i)^{2θ})).
pub fn polydisc_radius(theta: f64, k: LogNum, tuple: &MatrixTuple) -> (LogNum, LogNum) {
    let r = LogNum::from_value(4.0 * tuple.len() as f64 * tuple.holder_factor(theta)).mul(k).recip();
    (r, r.scale(0.5))
}

/// max_i [log‖A_i‖ + ecc(A_i) + 1].
pub fn sup_bracket(tuple: &MatrixTuple) -> f64 {
    tuple
        .info()
        .iter()
        .map(|m| m.operator_norm.ln() + m.eccentricity + 1.0)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// M* = 2·K·ρ*·max_i[log‖A_i‖ + ecc(A_i) + 1].
pub fn sup_bound(l: &GapLadder, k: LogNum, tuple: &MatrixTuple) -> Result<LogNum> {
    let b = sup_bracket(tuple);
    if !(b > 0.0) {
        return Err(Error::InvalidInput(format!("sup-bound bracket {b} is not positive")));
    }
    Ok(k.scale(2.0 * l.rho_star * b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RadiusConvention {
    /// r = r*
    #[default]
    #[serde(rename = "example")]
    Example,
    /// r = r*/2
    #[serde(rename = "half-radius")]
    HalfRadius,
}

impl RadiusConvention {
    pub fn radius(self, r_star: LogNum) -> LogNum {
        match self {
            RadiusConvention::Example => r_star,
            RadiusConvention::HalfRadius => r_star.scale(0.5),
        }
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// α!·M/r^{|α|}.
pub fn cauchy_bound(m: LogNum, r_star: LogNum, alpha: &[u32], conv: RadiusConvention) -> LogNum {
    let order: u32 = alpha.iter().sum();
    let lnfact: f64 = alpha.iter().map(|a| ln_factorial(*a)).sum();
    LogNum::from_ln(lnfact + m.ln - order as f64 * conv.radius(r_star).ln)
}

/// C_geom(g, ρ) = 2(‖g‖+ρ)(‖g⁻¹‖/(1−ρ‖g⁻¹‖))², a Lipschitz constant of g ↦ g[v]
/// on the ρ-ball around g.
pub fn c_geom(norm: f64, inv_norm: f64, rho: f64) -> f64 {
    let q = inv_norm / (1.0 - rho * inv_norm);
    2.0 * (norm + rho) * q * q
}

fn check_rho_a(tuple: &MatrixTuple, rho: f64) -> Result<()> {
    let max_inv = tuple.info().iter().map(|m| m.inverse_norm).fold(0.0, f64::max);
    if !(rho >= 0.0) || rho * max_inv >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "matrix perturbation radius {rho} must lie in [0, 1/max‖A_i⁻¹‖ = {})",
            1.0 / max_inv
        )));
    }
    Ok(())
}

/// K_mat = max_i (1 + 2θ·ecc(A_i⁺)^{2θ})·C_geom(A_i, ρ), where ecc(A_i⁺) is the worst
/// eccentricity over the ρ-ball: (‖A_i‖+ρ)·‖A_i⁻¹‖/(1−ρ‖A_i⁻¹‖).
pub fn k_mat(tuple: &MatrixTuple, rho: f64, theta: f64) -> Result<f64> {
    check_rho_a(tuple, rho)?;
    Ok(tuple
        .info()
        .iter()
        .map(|m| {
            let ecc_plus = (m.operator_norm + rho) * m.inverse_norm / (1.0 - rho * m.inverse_norm);
            (1.0 + 2.0 * theta * ecc_plus.powf(2.0 * theta)) * c_geom(m.operator_norm, m.inverse_norm, rho)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JointRadii {
    pub rho_a: f64,
    pub l_p: f64,
    pub k_mat: f64,
    pub l_a: f64,
    pub r_a: LogNum,
    pub r_p: LogNum,
}

pub fn joint_radii(tuple: &MatrixTuple, theta: f64, k: LogNum, rho_a: f64, p: &[f64]) -> Result<JointRadii> {
    check_theta(theta)?;
    if p.len() != tuple.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} matrices", p.len(), tuple.len())));
    }
    let km = k_mat(tuple, rho_a, theta)?;
    let l_p = tuple.holder_factor(theta) + rho_a;
    let pmax = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let l_a = pmax * km;
    Ok(JointRadii {
        rho_a,
        l_p,
        k_mat: km,
        l_a,
        r_a: k.scale(8.0 * l_a).recip(),
        r_p: k.scale(8.0 * l_p * tuple.len() as f64).recip(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainRadii {
    pub chain_gap: f64,
    pub exponent: f64,
    pub tau_chain: f64,
    pub k_chain: f64,
    pub l_p: f64,
    pub l_a: f64,
    pub r_p: f64,
    pub r_a: f64,
}

/// Radii for a Markov-driven cocycle; `ladder` supplies τ₀ and N_θ.
pub fn chain_radii(
    tuple: &MatrixTuple,
    transition: &DMatrix<f64>,
    ladder: &GapLadder,
    exponent: f64,
    rho_a: f64,
) -> Result<ChainRadii> {
    validate_stochastic(transition)?;
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::InvalidInput(format!("chain exponent c = {exponent} outside (0, 1]")));
    }
    let rho_p = chain_gap(transition);
    if !(rho_p > 0.0) {
        return Err(Error::GapNotSimple("transition matrix has no spectral gap".into()));
    }
    let tau_chain = (1.0 - rho_p).max(ladder.tau0).powf(exponent);
    let k_chain = 4.0 / -(tau_chain.ln() / ladder.n_theta as f64).exp_m1();
    let l_p = tuple.len() as f64 * tuple.holder_factor(ladder.theta);
    let l_a = k_mat(tuple, rho_a, ladder.theta)?;
    Ok(ChainRadii {
        chain_gap: rho_p,
        exponent,
        tau_chain,
        k_chain,
        l_p,
        l_a,
        r_p: 1.0 / (8.0 * l_p * k_chain),
        r_a: 1.0 / (8.0 * l_a * k_chain),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundaryConstants {
    pub c_tau: f64,
    pub gamma_tau: f64,
    pub n_theta: u64,
    /// C_K = 2N_θ(1 + (2 + max ecc^{2θ})^{N_θ−1})
    pub c_k: LogNum,
    /// c_E = c_τ/(4N·C_K·max(1 + ecc^{2θ}))
    pub c_e: LogNum,
    pub alpha_e: f64,
}

pub fn boundary_constants(tuple: &MatrixTuple, theta: f64, n_theta: u64, c_tau: f64, gamma_tau: f64) -> Result<BoundaryConstants> {
    check_theta(theta)?;
    if !(c_tau > 0.0 && c_tau.is_finite()) {
        return Err(Error::InvalidHypothesis(format!("c_tau = {c_tau} must be > 0")));
    }
    if !(gamma_tau >= 1.0 && gamma_tau.is_finite()) {
        return Err(Error::InvalidHypothesis(format!("gamma_tau = {gamma_tau} must be >= 1")));
    }
    if n_theta == 0 {
        return Err(Error::InvalidInput("N_theta must be >= 1".into()));
    }
    let base = 2.0 + tuple.ecc().powf(2.0 * theta);
    let pow = LogNum::from_ln((n_theta as f64 - 1.0) * base.ln());
    let c_k = LogNum::from_value(1.0).add(pow).scale(2.0 * n_theta as f64);
    let c_e = LogNum::from_value(c_tau).div(c_k.scale(4.0 * tuple.len() as f64 * tuple.holder_factor(theta)));
    Ok(BoundaryConstants { c_tau, gamma_tau, n_theta, c_k, c_e, alpha_e: gamma_tau })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GrassmannLevel {
    pub k: usize,
    pub d: usize,
    pub gap: f64,
    pub binomial: usize,
    pub rho: f64,
    pub c: f64,
    pub r_persist: f64,
    pub r_kato: f64,
    pub r_h: f64,
    /// min(r_H⁽ᵏ⁾, r_H⁽ᵏ⁻¹⁾) for k ≥ 2; r_H⁽¹⁾ for k = 1. None when level k−1 is unavailable.
    pub r_individual: Option<f64>,
}

pub fn grassmann_certificate(tuple: &MatrixTuple, theta: f64, k: usize, gap_k: f64) -> Result<GrassmannLevel> {
    check_theta(theta)?;
    let d = tuple.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidInput(format!("Grassmann level k = {k} outside 1..={}", d - 1)));
    }
    if !(gap_k > 0.0) {
        return Err(Error::GapNotSimple(format!("level-{k} gap {gap_k} is not positive")));
    }
    let b = binomial(d, k) as f64;
    let ecc = tuple.ecc();
    let kf = k as f64;
    let rho = (-theta * gap_k / 2.0).exp();
    let one_minus = -(-theta * gap_k / 2.0).exp_m1();
    let c = 4.0 * b * ecc.powf(2.0 * kf) / one_minus;
    let r_persist = one_minus / (8.0 * kf * b * ecc.powf(2.0 * kf - 1.0) * c);
    let r_kato = one_minus / (8.0 * c * b * ecc.powf(kf));
    let r_h = r_persist.min(r_kato);
    Ok(GrassmannLevel {
        k,
        d,
        gap: gap_k,
        binomial: b as usize,
        rho,
        c,
        r_persist,
        r_kato,
        r_h,
        r_individual: (k == 1).then_some(r_h),
    })
}

/// Level records for every supplied (k, gap_k), with r_individual filled where level k−1 is present.
pub fn grassmann_levels(tuple: &MatrixTuple, theta: f64, gaps: &[(usize, f64)]) -> Result<Vec<GrassmannLevel>> {
    let mut out: Vec<GrassmannLevel> = gaps
        .iter()
        .map(|(k, g)| grassmann_certificate(tuple, theta, *k, *g))
        .collect::<Result<_>>()?;
    for i in 0..out.len() {
        let k = out[i].k;
        if k >= 2 {
            if let Some(prev) = out.iter().find(|l| l.k == k - 1).map(|l| l.r_h) {
                out[i].r_individual = Some(out[i].r_h.min(prev));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ThetaRow {
    pub theta: f64,
    pub n0: u64,
    pub n_theta: u64,
    pub k: LogNum,
    pub r_star: LogNum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ThetaScan {
    pub best_theta: f64,
    pub best_r_star: LogNum,
    pub table: Vec<ThetaRow>,
}

/// Resolvent bound selected by the `rigorous` flag.
pub fn select_k(rb: &ResolventBound, rigorous: bool) -> LogNum {
    if rigorous {
        rb.k_star
    } else {
        LogNum::from_value(rb.k_star_sp)
    }
}

/// Evaluates the ladder and r* on every θ in `grid`; ties go to the smaller θ.
pub fn optimize_theta(tuple: &MatrixTuple, gap: f64, grid: &[f64], variant: TauVariant, rigorous: bool) -> Result<ThetaScan> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("theta grid is empty".into()));
    }
    let mut table = Vec::with_capacity(grid.len());
    for &theta in grid {
        let l = GapLadder::new(tuple, theta, gap, variant)?;
        let k = select_k(&resolvent_bound(&l)?, rigorous);
        let (r, _) = polydisc_radius(theta, k, tuple);
        table.push(ThetaRow { theta, n0: l.n0, n_theta: l.n_theta, k, r_star: r });
    }
    let mut best = 0;
    for i in 1..table.len() {
        let (a, b) = (&table[i], &table[best]);
        if a.r_star.ln > b.r_star.ln || (a.r_star.ln == b.r_star.ln && a.theta < b.theta) {
            best = i;
        }
    }
    Ok(ThetaScan { best_theta: table[best].theta, best_r_star: table[best].r_star, table })
}

/// Ladder, resolvent bound, r*, r*/2 and M* for one (tuple, θ, Λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub ladder: GapLadder,
    pub resolvent: ResolventBound,
    pub rigorous: bool,
    pub k_used: LogNum,
    pub r_star: LogNum,
    pub r_extension: LogNum,
    pub m_star: LogNum,
}

impl Certificate {
    pub fn new(tuple: &MatrixTuple, theta: f64, gap: f64, variant: TauVariant, rigorous: bool) -> Result<Self> {
        let ladder = GapLadder::new(tuple, theta, gap, variant)?;
        let resolvent = resolvent_bound(&ladder)?;
        let k_used = select_k(&resolvent, rigorous);
        let (r_star, r_extension) = polydisc_radius(theta, k_used, tuple);
        let m_star = sup_bound(&ladder, k_used, tuple)?;
        Ok(Self { ladder, resolvent, rigorous, k_used, r_star, r_extension, m_star })
    }

    pub fn cauchy(&self, alpha: &[u32], conv: RadiusConvention) -> LogNum {
        cauchy_bound(self.m_star, self.r_star, alpha, conv)
    }
}
