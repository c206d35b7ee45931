//! Monte Carlo estimators for Lyapunov exponents of i.i.d. and Markov-driven
//! cocycles.
//!
//! Trials run in parallel, each on its own ChaCha stream (`seed`, stream =
//! trial index), and are pooled in trial order so results do not depend on the
//! thread count.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sampling, MatrixTuple};

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct McConfig {
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_burnin")]
    pub burnin: usize,
    #[serde(default = "default_renorm")]
    pub renorm_interval: usize,
}

fn default_burnin() -> usize {
    1000
}

fn default_renorm() -> usize {
    16
}

impl Default for McConfig {
    fn default() -> Self {
        Self { steps: 100_000, trials: 16, seed: 0, burnin: default_burnin(), renorm_interval: default_renorm() }
    }
}

impl McConfig {
    pub fn new(steps: usize, trials: usize, seed: u64) -> Self {
        Self { steps, trials, seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.trials == 0 || self.renorm_interval == 0 {
            return Err(Error::InvalidInput("steps, trials and renormInterval must be >= 1".into()));
        }
        Ok(())
    }
}

/// The driving law of the cocycle.
#[derive(Debug, Clone)]
pub enum Driver {
    Iid { weights: Vec<f64> },
    Markov { transition: DMatrix<f64>, stationary: Vec<f64>, chain_gap: f64 },
}

#[derive(Debug, Clone)]
pub struct CocycleSpec {
    pub tuple: MatrixTuple,
    pub driver: Driver,
}

/// Checks that `p` is a strictly positive probability vector of length `n`.
pub fn validate_weights(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::DimensionMismatch(format!("{} weights for {n} matrices", p.len())));
    }
    if p.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidInput("weights must be finite and > 0".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidInput(format!("weights sum to {s}, expected 1")));
    }
    Ok(())
}

/// Checks that `p` is a square, strictly positive, row-stochastic matrix.
pub fn validate_stochastic(p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != p.ncols() || p.nrows() == 0 {
        return Err(Error::InvalidInput(format!("transition matrix is {}x{}", p.nrows(), p.ncols())));
    }
    if p.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidInput("transition entries must be finite and > 0".into()));
    }
    for (i, row) in p.row_iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!("transition row {i} sums to {s}")));
        }
    }
    Ok(())
}

/// Stationary distribution π with πP = π, Σπ = 1.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    validate_stochastic(p)?;
    let n = p.nrows();
    // Replace the last balance equation by the normalization.
    let mut a = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.clone().lu();
    let mut pi = lu
        .solve(&b)
        .ok_or_else(|| Error::SolverFailure("stationary distribution system is singular".into()))?;
    // One step of iterative refinement.
    let r = &b - &a * &pi;
    if let Some(dx) = lu.solve(&r) {
        pi += dx;
    }
    let s: f64 = pi.iter().sum();
    let pi: Vec<f64> = pi.iter().map(|x| x / s).collect();
    if pi.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::SolverFailure("stationary distribution has non-positive entries".into()));
    }
    Ok(pi)
}

/// ρ_P = 1 − |second largest eigenvalue of P|; 1 for a single state.
pub fn chain_gap(p: &DMatrix<f64>) -> f64 {
    if p.nrows() < 2 {
        return 1.0;
    }
    let mut mods: Vec<f64> = p.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    (1.0 - mods[1]).clamp(0.0, 1.0)
}

impl CocycleSpec {
    pub fn iid(tuple: MatrixTuple, weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, tuple.len())?;
        Ok(Self { tuple, driver: Driver::Iid { weights } })
    }

    pub fn markov(tuple: MatrixTuple, transition: DMatrix<f64>) -> Result<Self> {
        if transition.nrows() != tuple.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} transition matrix for {} matrices",
                transition.nrows(),
                transition.ncols(),
                tuple.len()
            )));
        }
        let stationary = stationary_distribution(&transition)?;
        let chain_gap = chain_gap(&transition);
        Ok(Self { tuple, driver: Driver::Markov { transition, stationary, chain_gap } })
    }

    pub fn is_markov(&self) -> bool {
        matches!(self.driver, Driver::Markov { .. })
    }

    /// Stationary occupation of each matrix index (p for iid, π(P) for chains).
    pub fn occupation(&self) -> &[f64] {
        match &self.driver {
            Driver::Iid { weights } => weights,
            Driver::Markov { stationary, .. } => stationary,
        }
    }

    /// Σ_i p_i log|det A_i| (iid) or Σ_j π_j log|det A_j| (Markov), the sum of all exponents.
    pub fn log_det_mean(&self) -> f64 {
        self.occupation()
            .iter()
            .zip(self.tuple.info())
            .map(|(w, m)| w * m.determinant.abs().ln())
            .sum()
    }

    fn with_tuple(&self, tuple: MatrixTuple) -> Self {
        Self { tuple, driver: self.driver.clone() }
    }
}

/// Draws matrix indices according to the driver.
struct IndexStream {
    cumulative: Vec<Vec<f64>>,
    markov: bool,
    state: usize,
}

fn cumulative(row: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = row
        .map(|x| {
            acc += x;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

fn draw(cum: &[f64], u: f64) -> usize {
    cum.iter().position(|c| u < *c).unwrap_or(cum.len() - 1)
}

impl IndexStream {
    fn new<R: Rng>(spec: &CocycleSpec, rng: &mut R) -> Self {
        match &spec.driver {
            Driver::Iid { weights } => Self {
                cumulative: vec![cumulative(weights.iter().copied())],
                markov: false,
                state: 0,
            },
            Driver::Markov { transition, stationary, .. } => {
                let start = draw(&cumulative(stationary.iter().copied()), rng.random());
                Self {
                    cumulative: transition.row_iter().map(|r| cumulative(r.iter().copied())).collect(),
                    markov: true,
                    state: start,
                    }
            }
        }
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        if self.markov {
            self.state = draw(&self.cumulative[self.state], u);
            self.state
        } else {
            draw(&self.cumulative[0], u)
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Runs `f` on every trial in parallel and returns per-trial results in trial order.
fn run_trials<F>(mc: &McConfig, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&mut ChaCha12Rng) -> Result<Vec<f64>> + Sync,
{
    mc.validate()?;
    (0..mc.trials)
        .into_par_iter()
        .map(|t| f(&mut trial_rng(mc.seed, t)))
        .collect()
}

/// Mean and standard error (sample sd / √trials) per component, pooled in trial order.
fn pool(per_trial: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = per_trial.len() as f64;
    let k = per_trial[0].len();
    let mut mean = vec![0.0; k];
    for row in per_trial {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut se = vec![0.0; k];
    if per_trial.len() > 1 {
        for row in per_trial {
            for ((s, x), m) in se.iter_mut().zip(row).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        se.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt() / n.sqrt());
    }
    (mean, se)
}

/// A pooled scalar estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Estimate {
    pub value: f64,
    /// Trial-wise sample sd / √trials; reported as 0 for a single trial.
    pub stderr: f64,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumEstimate {
    pub exponents: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
}

fn overflow(what: &str) -> Error {
    Error::NumericOverflow(format!("{what}: non-finite or vanishing accumulation"))
}

/// One trial of the top-exponent recurrence: mean of log‖A v‖ with periodic renormalization.
fn top_exponent_trial(spec: &CocycleSpec, mc: &McConfig, rng: &mut ChaCha12Rng) -> Result<f64> {
    let d = spec.tuple.dim();
    let mut v = sampling::unit_vector(rng, d);
    let mut w = DVector::zeros(d);
    let mut stream = IndexStream::new(spec, rng);
    let mats = spec.tuple.matrices();
    for n in 1..=mc.burnin {
        w.gemv(1.0, &mats[stream.next(rng)], &v, 0.0);
        std::mem::swap(&mut v, &mut w);
        if n % mc.renorm_interval == 0 {
            let s = v.norm();
            if !(s.is_finite() && s > 0.0) {
                return Err(overflow("burn-in"));
            }
            v /= s;
        }
    }
    v.normalize_mut();
    let mut acc = 0.0;
    for n in 1..=mc.steps {
        w.gemv(1.0, &mats[stream.next(rng)], &v, 0.0);
        std::mem::swap(&mut v, &mut w);
        if n % mc.renorm_interval == 0 || n == mc.steps {
            let s = v.norm();
            if !(s.is_finite() && s > 0.0) {
                return Err(overflow("top exponent"));
            }
            acc += s.ln();
            v /= s;
        }
    }
    Ok(acc / mc.steps as f64)
}

/// One trial of the orthonormal-frame recurrence; returns d exponents.
fn spectrum_trial(spec: &CocycleSpec, mc: &McConfig, rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
    let d = spec.tuple.dim();
    let mut q = sampling::orthogonal(rng, d);
    let mut w = DMatrix::zeros(d, d);
    let mut stream = IndexStream::new(spec, rng);
    let mats = spec.tuple.matrices();
    let mut acc = vec![0.0; d];
    let total = mc.burnin + mc.steps;
    for n in 1..=total {
        w.gemm(1.0, &mats[stream.next(rng)], &q, 0.0);
        std::mem::swap(&mut q, &mut w);
        if n % mc.renorm_interval == 0 || n == mc.burnin || n == total {
            let (qq, r) = q.clone().qr().unpack();
            for i in 0..d {
                let rii = r[(i, i)].abs();
                if !(rii.is_finite() && rii > 1e-300) {
                    return Err(overflow("frame"));
                }
                if n > mc.burnin {
                    acc[i] += rii.ln();
                }
            }
            q = qq;
        }
    }
    Ok(acc.into_iter().map(|a| a / mc.steps as f64).collect())
}

fn estimate_from(per_trial: &[Vec<f64>], mc: &McConfig) -> Estimate {
    let (m, s) = pool(per_trial);
    Estimate { value: m[0], stderr: s[0], steps: mc.steps, trials: mc.trials, seed: mc.seed }
}

/// λ̂₁ with standard error.
pub fn estimate_top_exponent(spec: &CocycleSpec, mc: &McConfig) -> Result<Estimate> {
    let per = run_trials(mc, |rng| Ok(vec![top_exponent_trial(spec, mc, rng)?]))?;
    Ok(estimate_from(&per, mc))
}

/// λ̂₁ ≥ … ≥ λ̂_d from the QR recurrence.
pub fn estimate_spectrum(spec: &CocycleSpec, mc: &McConfig) -> Result<SpectrumEstimate> {
    let per = run_trials(mc, |rng| spectrum_trial(spec, mc, rng))?;
    let (exponents, standard_errors) = pool(&per);
    Ok(SpectrumEstimate { exponents, standard_errors, steps: mc.steps, trials: mc.trials, seed: mc.seed })
}

/// Λ̂_k = λ̂₁ + … + λ̂_k as the top exponent of the cocycle Λ^k A.
/// For k = d this is Σ p_i log|det A_i| exactly (zero standard error).
pub fn estimate_partial_sum(spec: &CocycleSpec, k: usize, mc: &McConfig) -> Result<Estimate> {
    let d = spec.tuple.dim();
    if k == 0 || k > d {
        return Err(Error::InvalidInput(format!("partial sum level k = {k} outside 1..={d}")));
    }
    if k == d {
        mc.validate()?;
        return Ok(Estimate { value: spec.log_det_mean(), stderr: 0.0, steps: mc.steps, trials: mc.trials, seed: mc.seed });
    }
    let lifted = spec.with_tuple(spec.tuple.exterior_power(k)?);
    estimate_top_exponent(&lifted, mc)
}

/// Top exponent of a Markov-driven cocycle, chain started from π(P).
pub fn estimate_markov_exponent(spec: &CocycleSpec, mc: &McConfig) -> Result<Estimate> {
    if !spec.is_markov() {
        return Err(Error::InvalidInput("estimate_markov_exponent needs a Markov cocycle".into()));
    }
    estimate_top_exponent(spec, mc)
}

/// Λ̂ = λ̂₁ − λ̂₂. For d = 2 uses λ₁ + λ₂ = E log|det| exactly, so Λ̂ = 2λ̂₁ − E log|det|.
pub fn lyapunov_gap(spec: &CocycleSpec, mc: &McConfig) -> Result<Estimate> {
    if spec.tuple.dim() == 2 {
        let ld = spec.log_det_mean();
        let per = run_trials(mc, |rng| Ok(vec![2.0 * top_exponent_trial(spec, mc, rng)? - ld]))?;
        Ok(estimate_from(&per, mc))
    } else {
        let per = run_trials(mc, |rng| {
            let s = spectrum_trial(spec, mc, rng)?;
            Ok(vec![s[0] - s[1]])
        })?;
        Ok(estimate_from(&per, mc))
    }
}

/// Consecutive gaps λ̂_k − λ̂_{k+1}, k = 1..d−1, with per-trial standard errors.
pub fn estimate_gaps(spec: &CocycleSpec, mc: &McConfig) -> Result<Vec<Estimate>> {
    let per = run_trials(mc, |rng| {
        let s = spectrum_trial(spec, mc, rng)?;
        Ok(s.windows(2).map(|w| w[0] - w[1]).collect())
    })?;
    let (m, s) = pool(&per);
    Ok(m.into_iter()
        .zip(s)
        .map(|(value, stderr)| Estimate { value, stderr, steps: mc.steps, trials: mc.trials, seed: mc.seed })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn diag2(a: f64, b: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b])
    }

    fn rot(a: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
    }

    fn small_mc() -> McConfig {
        McConfig::new(4000, 8, 7)
    }

    #[test]
    fn single_diagonal_matrix() {
        let spec = CocycleSpec::iid(MatrixTuple::new(vec![diag2(2.0, 0.5)]).unwrap(), vec![1.0]).unwrap();
        let e = estimate_top_exponent(&spec, &small_mc()).unwrap();
        assert!((e.value - LN_2).abs() < 1e-9, "{e:?}");
        let s = estimate_spectrum(&spec, &small_mc()).unwrap();
        assert!((s.exponents[0] - LN_2).abs() < 1e-9);
        assert!((s.exponents[1] + LN_2).abs() < 1e-9);
        let g = lyapunov_gap(&spec, &small_mc()).unwrap();
        assert!((g.value - 2.0 * LN_2).abs() < 1e-9);
    }

    #[test]
    fn rotations_have_zero_exponent() {
        let t = MatrixTuple::new(vec![rot(0.4), rot(1.3)]).unwrap();
        let spec = CocycleSpec::iid(t, vec![0.3, 0.7]).unwrap();
        let e = estimate_top_exponent(&spec, &small_mc()).unwrap();
        assert!(e.value.abs() < 1e-12);
        let s = estimate_spectrum(&spec, &small_mc()).unwrap();
        assert!(s.exponents.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn determinism_and_trial_partition() {
        let spec = crate::example::worked_example_spec();
        let mc = small_mc();
        let a = estimate_top_exponent(&spec, &mc).unwrap();
        let b = estimate_top_exponent(&spec, &mc).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool1.install(|| estimate_top_exponent(&spec, &mc)).unwrap();
        assert_eq!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn stationary_distribution_examples() {
        let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
        let pi = stationary_distribution(&p).unwrap();
        assert_relative_eq!(pi[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(pi[1], 1.0 / 3.0, epsilon = 1e-14);

        let ds = DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.3, 0.3, 0.2, 0.5, 0.5, 0.3, 0.2]);
        for x in stationary_distribution(&ds).unwrap() {
            assert_relative_eq!(x, 1.0 / 3.0, epsilon = 1e-14);
        }

        let rows = DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.5, 0.3]);
        let pi = stationary_distribution(&rows).unwrap();
        for (a, b) in pi.iter().zip([0.2, 0.5, 0.3]) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        assert!(stationary_distribution(&DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.2, 0.8])).is_err());
        assert!(stationary_distribution(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.2, 0.8])).is_err());
    }

    #[test]
    fn chain_gap_examples() {
        let rows = DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.3, 0.7]);
        assert_relative_eq!(chain_gap(&rows), 1.0, epsilon = 1e-12);
        let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
        assert_relative_eq!(chain_gap(&p), 0.3, epsilon = 1e-12);
        assert_eq!(chain_gap(&DMatrix::from_element(1, 1, 1.0)), 1.0);
    }

    #[test]
    fn partial_sum_top_level_is_exact() {
        let t = MatrixTuple::new(vec![
            DMatrix::from_row_slice(3, 3, &[2.0, 0.1, 0.0, 0.0, 1.0, 0.3, 0.2, 0.0, 0.5]),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.4, 0.3, 1.5, 0.0, 0.0, 0.2, 0.8]),
        ])
        .unwrap();
        let spec = CocycleSpec::iid(t.clone(), vec![0.4, 0.6]).unwrap();
        let e = estimate_partial_sum(&spec, 3, &small_mc()).unwrap();
        let direct = 0.4 * t.info()[0].determinant.abs().ln() + 0.6 * t.info()[1].determinant.abs().ln();
        assert_eq!(e.value, direct);
        assert_eq!(e.stderr, 0.0);
        assert!(estimate_partial_sum(&spec, 0, &small_mc()).is_err());
    }

    #[test]
    fn markov_with_equal_matrices_ignores_chain() {
        let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.1, 0.7]);
        let t = MatrixTuple::new(vec![a.clone(), a]).unwrap();
        let mc = McConfig::new(20_000, 8, 3);
        let p1 = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
        let p2 = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.6, 0.4]);
        let e1 = estimate_markov_exponent(&CocycleSpec::markov(t.clone(), p1).unwrap(), &mc).unwrap();
        let e2 = estimate_markov_exponent(&CocycleSpec::markov(t, p2).unwrap(), &mc).unwrap();
        let tol = 3.0 * (e1.stderr.powi(2) + e2.stderr.powi(2)).sqrt() + 1e-12;
        assert!((e1.value - e2.value).abs() <= tol);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = MatrixTuple::new(vec![diag2(2.0, 0.5), rot(0.2)]).unwrap();
        assert!(CocycleSpec::iid(t.clone(), vec![0.5, 0.6]).is_err());
        assert!(CocycleSpec::iid(t.clone(), vec![1.0]).is_err());
        assert!(CocycleSpec::iid(t.clone(), vec![1.0, 0.0]).is_err());
        let spec = CocycleSpec::iid(t, vec![0.5, 0.5]).unwrap();
        assert!(estimate_top_exponent(&spec, &McConfig::new(0, 1, 0)).is_err());
        assert!(estimate_markov_exponent(&spec, &small_mc()).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let t = MatrixTuple::new(vec![diag2(1e30, 1e30)]).unwrap();
        let spec = CocycleSpec::iid(t, vec![1.0]).unwrap();
        let mc = McConfig { renorm_interval: 16, ..McConfig::new(100, 1, 0) };
        assert!(matches!(estimate_top_exponent(&spec, &mc), Err(Error::NumericOverflow(_))));
    }
}
