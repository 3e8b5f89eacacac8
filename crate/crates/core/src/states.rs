//! Constructors for the states the spoofing analysis uses: two-mode squeezed
//! vacuum, thermal and number states, coherent states, and the classically
//! correlated comparison state.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::fock::{FockCutoff, SingleModeOperator, TwoModeDensityOperator};
use crate::{Error, Result};

/// Per-mode parameters of a pulse: mean photon number `N` of each excited
/// mode and the time-bandwidth product `M` acting as a repetition count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePairParams {
    pub n_mean: f64,
    pub m_modes: u64,
}

impl ModePairParams {
    pub fn new(n_mean: f64, m_modes: u64) -> Result<Self> {
        if !n_mean.is_finite() || n_mean < 0.0 {
            return Err(Error::InvalidParam(format!(
                "mean photon number must be finite and >= 0, got {n_mean}"
            )));
        }
        if m_modes < 1 {
            return Err(Error::InvalidParam("m_modes must be >= 1".into()));
        }
        Ok(Self { n_mean, m_modes })
    }
}

/// Schmidt coefficients of the TMSV: `c_n = sqrt(N^n / (1+N)^(1+n))`.
pub fn tmsv_amplitudes(n_mean: f64, cutoff: FockCutoff) -> Array1<f64> {
    let d = cutoff.dim();
    let mut c = Array1::zeros(d);
    if n_mean <= 0.0 {
        c[0] = 1.0;
        return c;
    }
    let ratio = (n_mean / (1.0 + n_mean)).sqrt();
    let mut amp = 1.0 / (1.0 + n_mean).sqrt();
    for n in 0..d {
        c[n] = amp;
        amp *= ratio;
    }
    c
}

/// Two-mode squeezed vacuum with per-mode mean photon number `n_mean`,
/// as a pure density operator on (idler, received).
///
/// The truncated tail shows up as a trace deficit equal to
/// `(N/(1+N))^d`; it is reported by the operator, never renormalized.
pub fn tmsv(n_mean: f64, cutoff: FockCutoff) -> Result<TwoModeDensityOperator> {
    if !n_mean.is_finite() || n_mean < 0.0 {
        return Err(Error::InvalidParam(format!(
            "mean photon number must be finite and >= 0, got {n_mean}"
        )));
    }
    let d = cutoff.dim();
    let c = tmsv_amplitudes(n_mean, cutoff);
    let dim = d * d;
    let mut entries = Array2::<C64>::zeros((dim, dim));
    for n in 0..d {
        for m in 0..d {
            entries[(n * d + n, m * d + m)] = C64::new(c[n] * c[m], 0.0);
        }
    }
    TwoModeDensityOperator::new(cutoff, entries)
}

/// Thermal photon-number probabilities `P(n) = N^n / (1+N)^(n+1)` for
/// `n = 0..d-1`.
pub fn thermal_weights(n_mean: f64, d: usize) -> Vec<f64> {
    if n_mean <= 0.0 {
        let mut w = vec![0.0; d];
        w[0] = 1.0;
        return w;
    }
    let ratio = n_mean / (1.0 + n_mean);
    let mut w = Vec::with_capacity(d);
    let mut p = 1.0 / (1.0 + n_mean);
    for _ in 0..d {
        w.push(p);
        p *= ratio;
    }
    w
}

/// Single-mode thermal state with mean photon number `n_mean`.
pub fn thermal(n_mean: f64, cutoff: FockCutoff) -> Result<SingleModeOperator> {
    if !n_mean.is_finite() || n_mean < 0.0 {
        return Err(Error::InvalidParam(format!(
            "mean photon number must be finite and >= 0, got {n_mean}"
        )));
    }
    let w = thermal_weights(n_mean, cutoff.dim());
    let diag = Array1::from_iter(w.into_iter().map(|p| C64::new(p, 0.0)));
    SingleModeOperator::new(cutoff, Array2::from_diag(&diag))
}

/// Number-state projector `|n><n|`.
pub fn number_state(n: usize, cutoff: FockCutoff) -> Result<SingleModeOperator> {
    if n >= cutoff.dim() {
        return Err(Error::InvalidParam(format!(
            "number state {n} does not fit in cutoff {}",
            cutoff.dim()
        )));
    }
    let mut entries = Array2::<C64>::zeros((cutoff.dim(), cutoff.dim()));
    entries[(n, n)] = C64::new(1.0, 0.0);
    SingleModeOperator::new(cutoff, entries)
}

/// Number-basis amplitudes of the coherent state `|alpha>`.
///
/// Built by the stable recurrence `amp_n = amp_(n-1) * alpha / sqrt(n)`,
/// which keeps every factorial and power in bounded territory.
pub fn coherent_amplitudes(alpha: C64, cutoff: FockCutoff) -> Array1<C64> {
    let d = cutoff.dim();
    let mut amps = Array1::zeros(d);
    let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..d {
        amps[n] = amp;
        amp *= alpha / C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    amps
}

/// Coherent state `|alpha><alpha|` in the truncated basis.
pub fn coherent(alpha: C64, cutoff: FockCutoff) -> Result<SingleModeOperator> {
    let amps = coherent_amplitudes(alpha, cutoff);
    let d = cutoff.dim();
    let mut entries = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            entries[(i, j)] = amps[i] * amps[j].conj();
        }
    }
    SingleModeOperator::new(cutoff, entries)
}

/// Classically correlated mixture `sum_n P(n) |n><n| (x) |n><n|`.
///
/// `weights` must be a probability distribution: nonnegative, summing to 1
/// within 1e-12 (so pass a distribution whose truncated tail is negligible).
pub fn classically_correlated(
    weights: &[f64],
    cutoff: FockCutoff,
) -> Result<TwoModeDensityOperator> {
    let d = cutoff.dim();
    if weights.len() > d {
        return Err(Error::InvalidParam(format!(
            "{} weights do not fit in cutoff {d}",
            weights.len()
        )));
    }
    if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
        return Err(Error::InvalidParam(format!("negative weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParam(format!(
            "weights sum to {total}, expected 1 within 1e-12"
        )));
    }
    let dim = d * d;
    let mut entries = Array2::<C64>::zeros((dim, dim));
    for (n, &w) in weights.iter().enumerate() {
        entries[(n * d + n, n * d + n)] = C64::new(w, 0.0);
    }
    TwoModeDensityOperator::new(cutoff, entries)
}
