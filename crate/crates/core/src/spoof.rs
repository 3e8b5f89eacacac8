//! Hypothesis pairs for the spoofing strategies.
//!
//! Under the null hypothesis the radar receives a true echo of the signal
//! mode it transmitted; under the alternate hypothesis a spoofer intercepts
//! the signal, measures it mode by mode, and transmits a freshly prepared
//! state. The spoofer never touches the retained idler, so every spoof
//! state is separable across the idler/received split while the true return
//! keeps (some of) its entanglement.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::channel::{apply_closed_form, compose_half_trips, NoiseLossParams};
use crate::fock::{
    number_dephase, partial_trace, trace_norm, FockCutoff, Mode, TwoModeDensityOperator,
    TRUST_DEFICIT,
};
use crate::gaussian::{CovMatrix, CovParams};
use crate::quad::{gauss_hermite, gauss_laguerre};
use crate::states::{coherent_amplitudes, thermal_weights, tmsv, ModePairParams};
use crate::{Error, Result};

/// Largest acceptable quadrature weight residual.
pub const QUAD_RESIDUAL_LIMIT: f64 = 1e-8;

/// Default Gauss-Hermite order per axis for the heterodyne mixture.
pub const DEFAULT_QUAD_ORDER: usize = 40;

/// Which measure-and-prepare strategy the spoofer runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Mode-wise photon counting, number-state preparation.
    DirectNumber,
    /// Mode-wise heterodyne detection, coherent-state preparation.
    HeterodyneCoherent,
    /// Single-mode coherent pulse with a random amplitude as the transmitted
    /// signal (the non-entangled comparison case).
    CoherentBaseline,
}

/// Numerical health of a constructed pair.
#[derive(Debug, Clone, Copy)]
pub struct TrustReport {
    pub trace_deficit_h0: f64,
    pub trace_deficit_h1: f64,
    pub quad_residual: Option<f64>,
}

impl TrustReport {
    pub fn trusted(&self) -> bool {
        self.trace_deficit_h0 < TRUST_DEFICIT
            && self.trace_deficit_h1 < TRUST_DEFICIT
            && self.quad_residual.is_none_or(|r| r < QUAD_RESIDUAL_LIMIT)
    }
}

/// The two density operators the radar operator must discriminate.
#[derive(Debug, Clone)]
pub struct HypothesisPair {
    pub rho_h0: TwoModeDensityOperator,
    pub rho_h1: TwoModeDensityOperator,
    pub params: ModePairParams,
    pub channel: Option<NoiseLossParams>,
    pub strategy: Strategy,
    pub trust: TrustReport,
}

impl HypothesisPair {
    /// Single-mode Uhlmann fidelity of the pair.
    pub fn fidelity(&self) -> Result<f64> {
        crate::fock::uhlmann_fidelity(&self.rho_h0, &self.rho_h1)
    }

    fn assemble(
        rho_h0: TwoModeDensityOperator,
        rho_h1: TwoModeDensityOperator,
        n_mean: f64,
        channel: Option<NoiseLossParams>,
        strategy: Strategy,
        quad_residual: Option<f64>,
    ) -> Result<Self> {
        let trust = TrustReport {
            trace_deficit_h0: rho_h0.trace_deficit(),
            trace_deficit_h1: rho_h1.trace_deficit(),
            quad_residual,
        };
        Ok(Self {
            rho_h0,
            rho_h1,
            params: ModePairParams::new(n_mean, 1)?,
            channel,
            strategy,
            trust,
        })
    }
}

/// Noise-free pair for direct detection and number-state preparation.
///
/// The spoofer's photon count on one half of a TMSV is thermal, and the
/// prepared state reproduces the count, so the spoof is the number-diagonal
/// mixture with perfectly correlated photon numbers; equivalently, the TMSV
/// with its cross-number coherences removed.
pub fn build_direct_noise_free(n_mean: f64, cutoff: FockCutoff) -> Result<HypothesisPair> {
    let rho_h0 = tmsv(n_mean, cutoff)?;
    let rho_h1 = number_dephase(&rho_h0, Mode::Received);
    HypothesisPair::assemble(rho_h0, rho_h1, n_mean, None, Strategy::DirectNumber, None)
}

/// Noise-free pair for heterodyne detection and coherent-state preparation.
///
/// The heterodyne outcome density on one half of a TMSV is a circular
/// Gaussian with per-component variance `(N+1)/2`; conditioned on outcome
/// `alpha` the idler collapses to the coherent state `kappa alpha*` with
/// `kappa = sqrt(N/(N+1))`. The spoof is the outcome-averaged product
/// state, evaluated by tensor-product Gauss-Hermite quadrature of order
/// `quad_order` per axis.
pub fn build_heterodyne_noise_free(
    n_mean: f64,
    cutoff: FockCutoff,
    quad_order: usize,
) -> Result<HypothesisPair> {
    if quad_order < 20 {
        return Err(Error::InvalidParam(format!(
            "quadrature order must be >= 20, got {quad_order}"
        )));
    }
    let rho_h0 = tmsv(n_mean, cutoff)?;
    let rule = gauss_hermite(quad_order)?;
    let kappa = (n_mean / (n_mean + 1.0)).sqrt();
    let alpha_scale = (n_mean + 1.0).sqrt();

    let d = cutoff.dim();
    let dim = cutoff.dim_two_mode();
    let n_nodes = quad_order * quad_order;
    let inv_pi = 1.0 / std::f64::consts::PI;

    // Columns of B are sqrt(weight) * |kappa alpha*> (x) |alpha>; the
    // mixture is then B B^dagger in one product.
    let mut b = Array2::<C64>::zeros((dim, n_nodes));
    let mut weight_sum = 0.0;
    for (a, (&u, &wu)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        for (bidx, (&v, &wv)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let alpha = C64::new(u, v) * alpha_scale;
            let weight = wu * wv * inv_pi;
            weight_sum += weight;
            let received = coherent_amplitudes(alpha, cutoff);
            let idler = coherent_amplitudes(alpha.conj() * kappa, cutoff);
            let root_w = C64::new(weight.sqrt(), 0.0);
            let col = a * quad_order + bidx;
            for i in 0..d {
                let zi = idler[i] * root_w;
                for j in 0..d {
                    b[(i * d + j, col)] = zi * received[j];
                }
            }
        }
    }
    let residual = (1.0 - weight_sum).abs();
    if residual > QUAD_RESIDUAL_LIMIT {
        return Err(Error::QuadratureResidual {
            residual,
            limit: QUAD_RESIDUAL_LIMIT,
        });
    }
    let bh = b.t().mapv(|z| z.conj());
    let rho_h1 = TwoModeDensityOperator::new(cutoff, b.dot(&bh))?;
    HypothesisPair::assemble(
        rho_h0,
        rho_h1,
        n_mean,
        None,
        Strategy::HeterodyneCoherent,
        Some(residual),
    )
}

/// Pair for direct detection and number-state preparation through a
/// round-trip noise-loss channel.
///
/// The true return passes once through the full channel. The spoof path is
/// outbound half trip, photon-number measurement with number-state
/// re-preparation (the number-basis dephasing of the received factor, with
/// the conditional idler correlations kept intact), then the return half
/// trip.
pub fn build_direct_noisy(
    n_mean: f64,
    cutoff: FockCutoff,
    channel: &NoiseLossParams,
) -> Result<HypothesisPair> {
    let probe = tmsv(n_mean, cutoff)?;
    let rho_h0 = apply_closed_form(&probe, channel)?;
    let (outbound, inbound) = compose_half_trips(channel);
    let at_spoofer = apply_closed_form(&probe, &outbound)?;
    let re_prepared = number_dephase(&at_spoofer, Mode::Received);
    let rho_h1 = apply_closed_form(&re_prepared, &inbound)?;
    HypothesisPair::assemble(
        rho_h0,
        rho_h1,
        n_mean,
        Some(*channel),
        Strategy::DirectNumber,
        None,
    )
}

/// Covariance matrices of the two hypotheses for heterodyne spoofing under
/// a round-trip channel.
pub fn build_heterodyne_noisy_covariance(
    n_mean: f64,
    channel: &NoiseLossParams,
) -> (CovMatrix, CovMatrix) {
    let p = CovParams::heterodyne_spoof(n_mean, channel);
    (p.v_h0(), p.v_h1())
}

/// Optimal success probability of spoof detection when the transmitted
/// pulse is a single-mode coherent state with Gaussian-random amplitude
/// (per-component variance `N/2`) known to the operator, and the spoofer
/// heterodynes and re-prepares.
///
/// Given the true amplitude `alpha`, the spoof is a displaced thermal state
/// around `alpha` carrying the spoofer's photon of measurement noise, and
/// `P_opt(alpha) = 1/2 + (1/4) || rho_spoof - |alpha><alpha| ||_1`. The
/// amplitude average is a radial Gauss-Laguerre quadrature (the trace norm
/// only depends on `|alpha|`), and each spoof state is itself built by
/// Gauss-Hermite quadrature over the heterodyne outcome.
pub fn build_coherent_baseline(n_mean: f64, cutoff: FockCutoff) -> Result<f64> {
    build_coherent_baseline_with(n_mean, cutoff, 24, 24)
}

/// [`build_coherent_baseline`] with explicit quadrature orders.
pub fn build_coherent_baseline_with(
    n_mean: f64,
    cutoff: FockCutoff,
    radial_order: usize,
    outcome_order: usize,
) -> Result<f64> {
    if n_mean <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "baseline needs n_mean > 0, got {n_mean}"
        )));
    }
    let radial = gauss_laguerre(radial_order)?;
    let outcome = gauss_hermite(outcome_order)?;
    let radial_residual = (1.0 - radial.weights.iter().sum::<f64>()).abs();
    if radial_residual > QUAD_RESIDUAL_LIMIT {
        return Err(Error::QuadratureResidual {
            residual: radial_residual,
            limit: QUAD_RESIDUAL_LIMIT,
        });
    }

    let d = cutoff.dim();
    let inv_pi = 1.0 / std::f64::consts::PI;
    let mut p_opt = 0.0;
    for (&t, &wt) in radial.nodes.iter().zip(&radial.weights) {
        // |alpha|^2 is exponential with mean N under the circular Gaussian.
        let r = (n_mean * t).sqrt();
        let alpha = C64::new(r, 0.0);

        // Spoof state: heterodyne outcome beta = alpha + unit-total noise,
        // coherent state prepared at beta.
        let n_nodes = outcome_order * outcome_order;
        let mut b = Array2::<C64>::zeros((d, n_nodes));
        for (a, (&u, &wu)) in outcome.nodes.iter().zip(&outcome.weights).enumerate() {
            for (bidx, (&v, &wv)) in outcome.nodes.iter().zip(&outcome.weights).enumerate() {
                let beta = alpha + C64::new(u, v);
                let weight = wu * wv * inv_pi;
                let amps = coherent_amplitudes(beta, cutoff);
                let root_w = C64::new(weight.sqrt(), 0.0);
                let col = a * outcome_order + bidx;
                for i in 0..d {
                    b[(i, col)] = amps[i] * root_w;
                }
            }
        }
        let bh = b.t().mapv(|z| z.conj());
        let spoof = b.dot(&bh);

        let true_amps = coherent_amplitudes(alpha, cutoff);
        let mut diff = spoof;
        for i in 0..d {
            for j in 0..d {
                diff[(i, j)] -= true_amps[i] * true_amps[j].conj();
            }
        }
        let tn = trace_norm(&diff)?;
        p_opt += wt * (0.5 + 0.25 * tn);
    }
    Ok(p_opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_operator, uhlmann_fidelity};
    use crate::states::classically_correlated;
    use approx::assert_abs_diff_eq;

    #[test]
    fn direct_noise_free_fidelity_matches_closed_form() {
        for &n_mean in &[0.0, 0.01, 0.1, 1.0] {
            let cutoff = FockCutoff::for_tmsv_tail(n_mean, 1e-10);
            let pair = build_direct_noise_free(n_mean, cutoff).unwrap();
            let f = pair.fidelity().unwrap();
            let expected = 1.0 / (2.0 * n_mean + 1.0).sqrt();
            assert!(
                (f - expected).abs() < 1e-6,
                "N={n_mean}: F={f} expected {expected}"
            );
        }
    }

    #[test]
    fn direct_noise_free_small_signal_value() {
        let cutoff = FockCutoff::new(12).unwrap();
        let pair = build_direct_noise_free(0.01, cutoff).unwrap();
        let f = pair.fidelity().unwrap();
        assert_abs_diff_eq!(f, 1.0 / 1.02f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(f, 0.990148, epsilon = 1e-6);
    }

    #[test]
    fn direct_h1_commutes_with_joint_number_operator() {
        let cutoff = FockCutoff::new(10).unwrap();
        let pair = build_direct_noise_free(0.4, cutoff).unwrap();
        let d = cutoff.dim();
        // N_I (x) N_R is diagonal with entry n_I * n_R; the commutator
        // vanishes iff rho_h1 has no coherences between products with
        // different diagonal values.
        let rho = pair.rho_h1.entries();
        for i in 0..d * d {
            for j in 0..d * d {
                let ni = (i / d) as f64 * (i % d) as f64;
                let nj = (j / d) as f64 * (j % d) as f64;
                let comm = rho[(i, j)] * (ni - nj);
                assert!(comm.norm() < 1e-14, "commutator entry ({i},{j}) = {comm}");
            }
        }
    }

    #[test]
    fn direct_h1_photon_correlation_matches_tmsv() {
        let n_mean = 0.6;
        let cutoff = FockCutoff::for_tmsv_tail(n_mean, 1e-12);
        let pair = build_direct_noise_free(n_mean, cutoff).unwrap();
        let num = number_operator(cutoff);
        let corr0 = pair.rho_h0.expect_product(&num, &num).re;
        let corr1 = pair.rho_h1.expect_product(&num, &num).re;
        let expected = n_mean + 2.0 * n_mean * n_mean;
        assert_abs_diff_eq!(corr0, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(corr1, expected, epsilon = 1e-9);
    }

    #[test]
    fn idler_marginal_blind_to_spoofing() {
        let n_mean = 0.3;
        let cutoff = FockCutoff::for_tmsv_tail(n_mean, 1e-12);
        let direct = build_direct_noise_free(n_mean, cutoff).unwrap();
        let het = build_heterodyne_noise_free(n_mean, cutoff, 48).unwrap();
        for pair in [&direct, &het] {
            let m0 = partial_trace(&pair.rho_h0, Mode::Received);
            let m1 = partial_trace(&pair.rho_h1, Mode::Received);
            let dev = m0
                .entries()
                .iter()
                .zip(m1.entries().iter())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(
                dev < 1e-8,
                "{:?}: idler marginals differ by {dev:.3e}",
                pair.strategy
            );
        }
    }

    #[test]
    fn heterodyne_noise_free_fidelity_matches_closed_form() {
        for &n_mean in &[0.01, 0.1, 1.0] {
            let cutoff = FockCutoff::for_tmsv_tail(n_mean, 1e-10);
            let pair = build_heterodyne_noise_free(n_mean, cutoff, 40).unwrap();
            let f = pair.fidelity().unwrap();
            let expected = 1.0 / (2.0 * n_mean + 2.0).sqrt();
            assert!(
                (f - expected).abs() < 1e-5,
                "N={n_mean}: F={f} expected {expected}"
            );
        }
    }

    #[test]
    fn heterodyne_vacuum_limit() {
        let cutoff = FockCutoff::new(30).unwrap();
        let pair = build_heterodyne_noise_free(0.0, cutoff, 40).unwrap();
        let f = pair.fidelity().unwrap();
        assert!((f - 0.5f64.sqrt()).abs() < 1e-6, "F={f}");
        assert!(pair.trust.trusted(), "{:?}", pair.trust);
    }

    #[test]
    fn heterodyne_received_marginal_gains_one_photon() {
        // Gaussian moment oracle: received variance per quadrature is
        // (N + 1/2) + 1, i.e. mean photon N + 1.
        let n_mean = 0.5;
        let cutoff = FockCutoff::new(35).unwrap();
        let pair = build_heterodyne_noise_free(n_mean, cutoff, 40).unwrap();
        let received = partial_trace(&pair.rho_h1, Mode::Idler);
        assert!(
            (received.mean_photon() - (n_mean + 1.0)).abs() < 1e-6,
            "mean photon {}",
            received.mean_photon()
        );
    }

    #[test]
    fn heterodyne_rejects_low_order() {
        let cutoff = FockCutoff::new(8).unwrap();
        assert!(build_heterodyne_noise_free(0.1, cutoff, 10).is_err());
    }

    #[test]
    fn classically_correlated_signal_is_perfectly_spoofable() {
        // With a classically correlated source the direct spoof reproduces
        // the transmitted state exactly: F = 1.
        let n_mean = 0.5;
        let cutoff = FockCutoff::new(35).unwrap();
        let weights = thermal_weights(n_mean, cutoff.dim());
        let correlated = classically_correlated(&weights, cutoff).unwrap();
        let spoofed = number_dephase(&correlated, Mode::Received);
        let f = uhlmann_fidelity(&correlated, &spoofed).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "F = {f}");
    }

    #[test]
    fn noisy_direct_with_identity_channel_reduces_to_noise_free() {
        let n_mean = 0.2;
        let cutoff = FockCutoff::new(20).unwrap();
        let noisy = build_direct_noisy(n_mean, cutoff, &NoiseLossParams::identity()).unwrap();
        let free = build_direct_noise_free(n_mean, cutoff).unwrap();
        for (a, b) in [(&noisy.rho_h0, &free.rho_h0), (&noisy.rho_h1, &free.rho_h1)] {
            let dev = a
                .entries()
                .iter()
                .zip(b.entries().iter())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-9, "identity-channel pair deviates by {dev:.3e}");
        }
    }

    #[test]
    fn skipping_the_spoofer_reproduces_h0() {
        // A spoofer who just reflects is invisible: outbound then inbound
        // half channels equal the full round trip.
        let n_mean = 0.15;
        let cutoff = FockCutoff::new(24).unwrap();
        let channel = NoiseLossParams::from_output_noise(0.36, 0.05).unwrap();
        let probe = tmsv(n_mean, cutoff).unwrap();
        let (outbound, inbound) = compose_half_trips(&channel);
        let reflected =
            apply_closed_form(&apply_closed_form(&probe, &outbound).unwrap(), &inbound).unwrap();
        let h0 = apply_closed_form(&probe, &channel).unwrap();
        let dev = reflected
            .entries()
            .iter()
            .zip(h0.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "reflected state deviates from H0 by {dev:.3e}");
    }

    #[test]
    fn noisy_covariance_pair_shape() {
        let channel = NoiseLossParams::from_output_noise(1e-6, 1.0).unwrap();
        let (v0, v1) = build_heterodyne_noisy_covariance(0.01, &channel);
        assert_abs_diff_eq!(v0.entries()[(0, 0)], 1.500_000_01, epsilon = 1e-12);
        assert_abs_diff_eq!(v0.entries()[(2, 2)], 0.51, epsilon = 1e-15);
        let extra = v1.entries()[(0, 0)] - v0.entries()[(0, 0)];
        assert_abs_diff_eq!(extra, 1e-3, epsilon = 1e-12);
    }

    #[test]
    fn baseline_rejects_nonpositive_signal() {
        let cutoff = FockCutoff::new(20).unwrap();
        assert!(build_coherent_baseline(0.0, cutoff).is_err());
    }

    #[test]
    fn baseline_success_probability() {
        // The spoof given the key is a displaced thermal state with one
        // photon of noise, so the conditional trace norm is 1 independent
        // of the amplitude and P_opt = 3/4 for every N.
        let cutoff = FockCutoff::new(35).unwrap();
        for &n_mean in &[0.1, 0.5, 1.0] {
            let p = build_coherent_baseline(n_mean, cutoff).unwrap();
            assert!((p - 0.75).abs() < 1e-6, "N={n_mean}: P_opt={p} expected 0.75");
        }
    }

    #[test]
    fn baseline_monotone_over_sweep() {
        let cutoff = FockCutoff::new(30).unwrap();
        let mut prev = 0.0;
        for &n_mean in &[0.05, 0.2, 0.5, 0.9] {
            let p = build_coherent_baseline(n_mean, cutoff).unwrap();
            assert!(p >= prev - 1e-6, "baseline decreased at N={n_mean}");
            prev = p;
        }
    }
}
