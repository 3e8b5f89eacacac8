//! Zero-mean two-mode Gaussian state calculus.
//!
//! Covariance matrices are real symmetric 4x4 in the quadrature ordering
//! `(x_R, p_R, x_I, p_I)` with vacuum variance 1/2 per quadrature, so a
//! physical state satisfies `V + (i/2) Omega >= 0` and its symplectic
//! eigenvalues sit at or above 1/2.
//!
//! Two fidelity routes are provided and cross-checked:
//!
//! * [`gaussian_fidelity`] evaluates the closed-form expression for the
//!   specific covariance pair produced by the heterodyne spoofing chain,
//!   written directly in the parameters `(omega, nu, c, sqrt_tau)`;
//! * [`gaussian_fidelity_oracle`] evaluates the general two-mode Gaussian
//!   fidelity from symplectic invariants (determinants built from the
//!   covariance matrices themselves), with no reference to that
//!   parametrization.

use ndarray::{array, Array2};
use ndarray_linalg::{Determinant, Eig};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::channel::{compose_half_trips, NoiseLossParams};
use crate::{Error, Result};

/// Covariance matrix of a zero-mean two-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    m: Array2<f64>,
}

impl CovMatrix {
    pub fn new(m: Array2<f64>) -> Result<Self> {
        if m.dim() != (4, 4) {
            return Err(Error::InvalidParam(format!(
                "covariance matrix must be 4x4, got {:?}",
                m.dim()
            )));
        }
        let mut dev: f64 = 0.0;
        for i in 0..4 {
            for j in i..4 {
                dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if dev > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "covariance matrix asymmetric by {dev:.3e}"
            )));
        }
        Ok(Self { m })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.m
    }

    /// Symplectic eigenvalues, ascending.
    pub fn symplectic_eigenvalues(&self) -> Result<[f64; 2]> {
        symplectic_eigenvalues_of(&self.m)
    }

    /// Symplectic eigenvalues of the partial transpose on the idler mode
    /// (momentum sign flip). Both at or above 1/2 means the state is
    /// separable across the received/idler split by the PPT criterion.
    pub fn ppt_symplectic_eigenvalues(&self) -> Result<[f64; 2]> {
        let mut pt = self.m.clone();
        for k in 0..4 {
            pt[(3, k)] = -pt[(3, k)];
            pt[(k, 3)] = -pt[(k, 3)];
        }
        symplectic_eigenvalues_of(&pt)
    }

    /// Checks the uncertainty bound: symplectic eigenvalues >= 1/2 - tol.
    pub fn check_uncertainty(&self, tol: f64) -> Result<()> {
        let nu = self.symplectic_eigenvalues()?;
        if nu[0] < 0.5 - tol {
            return Err(Error::InvalidParam(format!(
                "covariance violates the uncertainty bound: nu_min = {}",
                nu[0]
            )));
        }
        Ok(())
    }
}

fn symplectic_eigenvalues_of(m: &Array2<f64>) -> Result<[f64; 2]> {
    let om = symplectic_form();
    let prod = om.dot(m);
    let (vals, _) = prod.eig()?;
    let mut nus: Vec<f64> = vals.iter().map(|z| z.im.abs()).collect();
    nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Eigenvalues of Omega V come in +-(i nu) pairs.
    Ok([nus[1], nus[3]])
}

/// The symplectic form for the `(x_R, p_R, x_I, p_I)` ordering.
pub fn symplectic_form() -> Array2<f64> {
    array![
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
}

/// Parameters of the covariance pair produced by the heterodyne spoofing
/// chain under a round-trip channel: `nu = N + 1/2` (idler),
/// `omega = tau N + N_o + 1/2` (received), `c = sqrt(tau N (N+1))`
/// (cross correlation), plus the loss-rescaled measurement noise `sqrt_tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovParams {
    pub omega: f64,
    pub nu: f64,
    pub c: f64,
    pub sqrt_tau: f64,
}

impl CovParams {
    pub fn heterodyne_spoof(n_mean: f64, channel: &NoiseLossParams) -> Self {
        let tau = channel.tau();
        Self {
            omega: tau * n_mean + channel.n_out() + 0.5,
            nu: n_mean + 0.5,
            c: (tau * n_mean * (n_mean + 1.0)).sqrt(),
            sqrt_tau: tau.sqrt(),
        }
    }

    /// Covariance of the true return (null hypothesis).
    pub fn v_h0(&self) -> CovMatrix {
        let (w, n, c) = (self.omega, self.nu, self.c);
        CovMatrix::new(array![
            [w, 0.0, c, 0.0],
            [0.0, w, 0.0, -c],
            [c, 0.0, n, 0.0],
            [0.0, -c, 0.0, n],
        ])
        .expect("symmetric by construction")
    }

    /// Covariance of the heterodyne spoof (alternate hypothesis): the
    /// received quadratures gain the spoofer's photon of
    /// measure-and-prepare noise, rescaled by the return-trip loss.
    pub fn v_h1(&self) -> CovMatrix {
        let mut m = self.v_h0().m;
        m[(0, 0)] += self.sqrt_tau;
        m[(1, 1)] += self.sqrt_tau;
        CovMatrix::new(m).expect("symmetric by construction")
    }
}

/// Fidelity of the two hypothesis states from the closed-form expression in
/// the `(omega, nu, c, sqrt_tau)` parametrization.
///
/// `v0`/`v1` must be the matrices generated by `params`; they are checked
/// for consistency so the two fidelity routes always talk about the same
/// pair of states.
pub fn gaussian_fidelity(v0: &CovMatrix, v1: &CovMatrix, params: &CovParams) -> Result<f64> {
    for (given, built) in [(v0, params.v_h0()), (v1, params.v_h1())] {
        let dev = given
            .m
            .iter()
            .zip(built.m.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(Error::InvalidParam(format!(
                "covariance matrix deviates from its parametrization by {dev:.3e}"
            )));
        }
    }
    let (w, n, c, st) = (params.omega, params.nu, params.c, params.sqrt_tau);
    let c2 = c * c;

    let delta = {
        let x = 2.0 * n * (2.0 * w + st) - 4.0 * c2;
        x * x
    };
    let gamma = {
        let x = (w * n - c2) * ((w + st) * n - c2)
            + 0.25 * (w * (w + st) + n * n - 2.0 * c2)
            + 1.0 / 16.0;
        16.0 * x * x
    };
    let lambda = {
        let first = (w * n - c2) * (w * n - c2) - 0.25 * (w * w + n * n - 2.0 * c2) + 1.0 / 16.0;
        let wp = w + st;
        let second =
            (wp * n - c2) * (wp * n - c2) - 0.25 * (wp * wp + n * n - 2.0 * c2) + 1.0 / 16.0;
        16.0 * first * second
    };
    fidelity_from_invariants(delta, gamma, lambda)
}

/// General fidelity of two zero-mean two-mode Gaussian states from
/// symplectic invariants of their covariance matrices.
pub fn gaussian_fidelity_oracle(v0: &CovMatrix, v1: &CovMatrix) -> Result<f64> {
    let om = symplectic_form();
    let delta = (&v0.m + &v1.m).det()?;
    let gamma = {
        let prod = om.dot(&v0.m).dot(&om).dot(&v1.m);
        let shifted = &prod - &(Array2::<f64>::eye(4) * 0.25);
        16.0 * shifted.det()?
    };
    let lambda = {
        let d0 = det_v_plus_half_iomega(&v0.m)?;
        let d1 = det_v_plus_half_iomega(&v1.m)?;
        16.0 * d0 * d1
    };
    fidelity_from_invariants(delta, gamma, lambda)
}

fn det_v_plus_half_iomega(v: &Array2<f64>) -> Result<f64> {
    let om = symplectic_form();
    let mut m = Array2::<C64>::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = C64::new(v[(i, j)], 0.5 * om[(i, j)]);
        }
    }
    let det = m.det()?;
    // Real for symmetric V: the matrix transposes into its conjugate.
    Ok(det.re)
}

fn fidelity_from_invariants(delta: f64, gamma: f64, lambda: f64) -> Result<f64> {
    let scale = delta.abs().max(gamma.abs()).max(1.0);
    let gamma = clamp_nonneg(gamma, scale, "Gamma")?;
    // Lambda vanishes when either state is pure; round-off may push it
    // slightly negative.
    let lambda = clamp_nonneg(lambda, scale, "Lambda")?;
    let root_sum = gamma.sqrt() + lambda.sqrt();
    let radicand = clamp_nonneg(
        root_sum * root_sum - delta,
        scale,
        "(sqrt(Gamma)+sqrt(Lambda))^2 - Delta",
    )?;
    let denom = root_sum - radicand.sqrt();
    if denom <= 0.0 {
        return Err(Error::NegativeRadicand {
            name: "fidelity denominator",
            value: denom,
        });
    }
    let f = 1.0 / denom.sqrt();
    if f > 1.0 + 1e-9 {
        return Err(Error::FidelityOutOfRange(f));
    }
    Ok(f)
}

fn clamp_nonneg(x: f64, scale: f64, name: &'static str) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else if x > -1e-10 * scale {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand { name, value: x })
    }
}

/// Monte-Carlo estimate of the heterodyne-spoof covariance: samples the
/// whole chain (TMSV quadratures, half-trip loss and noise, heterodyne
/// outcome with its unit of added noise, coherent re-preparation, second
/// half trip) and returns the sample second moments.
///
/// Sampling is blocked, with one counter-derived RNG stream per block, so
/// the result is deterministic for a given seed regardless of thread
/// scheduling.
pub fn mc_covariance_oracle(
    n_mean: f64,
    channel: &NoiseLossParams,
    samples: u64,
    seed: u64,
) -> Result<CovMatrix> {
    if samples == 0 {
        return Err(Error::InvalidParam("need at least one sample".into()));
    }
    let (half, _) = compose_half_trips(channel);
    let tau_h = half.tau();
    let nu = n_mean + 0.5;
    let c0 = (n_mean * (n_mean + 1.0)).sqrt();
    // 2x2 Cholesky factors of the (x_S, x_I) block; the momentum block is
    // the same with the correlation sign flipped.
    let l11 = nu.sqrt();
    let l21 = c0 / l11;
    let l22 = (nu - c0 * c0 / nu).max(0.0).sqrt();
    let scale = tau_h.sqrt();
    let sd_channel = ((1.0 - tau_h) * (half.n_in() + 0.5)).max(0.0).sqrt();

    const BLOCK: u64 = 1 << 13;
    let blocks = samples.div_ceil(BLOCK);
    let partials: Vec<[f64; 16]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                seed ^ (b + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let unit = Normal::new(0.0, 1.0).unwrap();
            let half_noise = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
            let chan_noise = Normal::new(0.0, sd_channel.max(f64::MIN_POSITIVE)).unwrap();
            let count = BLOCK.min(samples - b * BLOCK);
            let mut acc = [0.0f64; 16];
            for _ in 0..count {
                let g1 = unit.sample(&mut rng);
                let g2 = unit.sample(&mut rng);
                let g3 = unit.sample(&mut rng);
                let g4 = unit.sample(&mut rng);
                let x_s = l11 * g1;
                let x_i = l21 * g1 + l22 * g2;
                let p_s = l11 * g3;
                let p_i = -l21 * g3 + l22 * g4;

                // Outbound half trip.
                let x1 = scale * x_s + pick(&chan_noise, sd_channel, &mut rng);
                let p1 = scale * p_s + pick(&chan_noise, sd_channel, &mut rng);
                // Heterodyne outcome plus coherent re-preparation: one
                // photon of added noise, half from the measurement and half
                // from the fresh state's vacuum.
                let x2 = x1 + half_noise.sample(&mut rng) + half_noise.sample(&mut rng);
                let p2 = p1 + half_noise.sample(&mut rng) + half_noise.sample(&mut rng);
                // Return half trip.
                let x_r = scale * x2 + pick(&chan_noise, sd_channel, &mut rng);
                let p_r = scale * p2 + pick(&chan_noise, sd_channel, &mut rng);

                let v = [x_r, p_r, x_i, p_i];
                for i in 0..4 {
                    for j in 0..4 {
                        acc[i * 4 + j] += v[i] * v[j];
                    }
                }
            }
            acc
        })
        .collect();

    let mut m = Array2::<f64>::zeros((4, 4));
    for acc in partials {
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += acc[i * 4 + j];
            }
        }
    }
    m /= samples as f64;
    // Symmetrize away accumulation round-off.
    let sym = (&m + &m.t()) * 0.5;
    CovMatrix::new(sym)
}

fn pick(dist: &Normal<f64>, sd: f64, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    if sd > 0.0 {
        dist.sample(rng)
    } else {
        0.0
    }
}

/// Standard error of each entry of a Gaussian sample covariance with the
/// given true covariance and sample count.
pub fn mc_standard_error(truth: &CovMatrix, samples: u64) -> Array2<f64> {
    let v = &truth.m;
    let mut se = Array2::<f64>::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            se[(i, j)] = ((v[(i, i)] * v[(j, j)] + v[(i, j)] * v[(i, j)]) / samples as f64).sqrt();
        }
    }
    se
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(n_mean: f64, tau: f64, n_out: f64) -> CovParams {
        let ch = NoiseLossParams::from_output_noise(tau, n_out).unwrap();
        CovParams::heterodyne_spoof(n_mean, &ch)
    }

    #[test]
    fn example_parameter_values() {
        let p = params(0.01, 1e-6, 1.0);
        assert_abs_diff_eq!(p.omega, 1.500_000_01, epsilon = 1e-12);
        assert_abs_diff_eq!(p.nu, 0.51, epsilon = 1e-15);
        assert_abs_diff_eq!(p.c, 1.004_987_562e-4, epsilon = 1e-12);
    }

    #[test]
    fn h1_minus_h0_trace_is_twice_sqrt_tau() {
        let p = params(0.3, 0.36, 0.2);
        let d = p.v_h1().m - p.v_h0().m;
        let tr: f64 = d.diag().sum();
        assert_abs_diff_eq!(tr, 2.0 * 0.36f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn identical_states_have_unit_fidelity() {
        // sqrt_tau = 0 makes both hypotheses identical.
        let p = CovParams {
            omega: 0.73,
            nu: 0.51,
            c: 0.09,
            sqrt_tau: 0.0,
        };
        let f = gaussian_fidelity(&p.v_h0(), &p.v_h1(), &p).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
        let g = gaussian_fidelity_oracle(&p.v_h0(), &p.v_h0()).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noise_free_limit_reproduces_heterodyne_fidelity() {
        // tau = 1, N_o = 0: the Gaussian pair reduces to the noise-free
        // heterodyne pair, with fidelity 1/sqrt(2N+2) per mode.
        for n_mean in [0.0, 0.01, 0.1, 1.0] {
            let p = params(n_mean, 1.0, 0.0);
            let f = gaussian_fidelity(&p.v_h0(), &p.v_h1(), &p).unwrap();
            assert_abs_diff_eq!(f, 1.0 / (2.0 * n_mean + 2.0).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_oracle_on_grid() {
        for &n_mean in &[0.01, 0.1, 1.0] {
            for &tau in &[1e-6, 0.25, 0.81] {
                for &n_out in &[0.01, 0.1, 1.0] {
                    let p = params(n_mean, tau, n_out);
                    let f = gaussian_fidelity(&p.v_h0(), &p.v_h1(), &p).unwrap();
                    let g = gaussian_fidelity_oracle(&p.v_h0(), &p.v_h1()).unwrap();
                    assert!(
                        (f - g).abs() < 1e-9,
                        "N={n_mean} tau={tau} N_o={n_out}: closed {f} vs oracle {g}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_is_symmetric() {
        let p = params(0.4, 0.5, 0.3);
        let a = gaussian_fidelity_oracle(&p.v_h0(), &p.v_h1()).unwrap();
        let b = gaussian_fidelity_oracle(&p.v_h1(), &p.v_h0()).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn pure_h0_has_vacuum_symplectic_spectrum() {
        let p = params(0.2, 1.0, 0.0);
        let nus = p.v_h0().symplectic_eigenvalues().unwrap();
        assert_abs_diff_eq!(nus[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(nus[1], 0.5, epsilon = 1e-12);
        // And the TMSV is entangled: partial transpose dips below 1/2.
        let ppt = p.v_h0().ppt_symplectic_eigenvalues().unwrap();
        assert!(ppt[0] < 0.5 - 1e-6);
    }

    #[test]
    fn spoof_covariance_is_ppt_separable() {
        // The spoofer's added photon breaks the entanglement: the partial
        // transpose of V_H1 is a physical covariance again.
        for &(n_mean, tau, n_out) in &[(0.01, 1e-6, 0.1), (0.5, 0.9, 0.0), (1.0, 0.5, 0.3)] {
            let p = params(n_mean, tau, n_out);
            let ppt = p.v_h1().ppt_symplectic_eigenvalues().unwrap();
            assert!(
                ppt[0] >= 0.5 - 1e-10,
                "PPT symplectic eigenvalue {} below 1/2",
                ppt[0]
            );
            p.v_h1().check_uncertainty(1e-10).unwrap();
        }
    }

    #[test]
    fn mc_oracle_matches_formula_within_three_sigma() {
        let n_mean = 0.5;
        let ch = NoiseLossParams::from_output_noise(0.25, 0.1).unwrap();
        let p = CovParams::heterodyne_spoof(n_mean, &ch);
        let truth = p.v_h1();
        let samples = 100_000;
        let est = mc_covariance_oracle(n_mean, &ch, samples, 7).unwrap();
        let se = mc_standard_error(&truth, samples);
        for i in 0..4 {
            for j in 0..4 {
                let dev = (est.entries()[(i, j)] - truth.entries()[(i, j)]).abs();
                assert!(
                    dev <= 3.0 * se[(i, j)],
                    "entry ({i},{j}): |{} - {}| > 3 sigma = {}",
                    est.entries()[(i, j)],
                    truth.entries()[(i, j)],
                    3.0 * se[(i, j)]
                );
            }
        }
        // The cross correlation lands on c = sqrt(tau N (N+1)).
        assert!((est.entries()[(0, 2)] - p.c).abs() <= 3.0 * se[(0, 2)]);
    }

    #[test]
    fn mc_oracle_is_deterministic() {
        let ch = NoiseLossParams::from_output_noise(0.5, 0.2).unwrap();
        let a = mc_covariance_oracle(0.3, &ch, 20_000, 42).unwrap();
        let b = mc_covariance_oracle(0.3, &ch, 20_000, 42).unwrap();
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn zero_signal_has_no_cross_covariance() {
        let ch = NoiseLossParams::from_output_noise(0.4, 0.2).unwrap();
        let est = mc_covariance_oracle(0.0, &ch, 50_000, 3).unwrap();
        let se = mc_standard_error(&CovParams::heterodyne_spoof(0.0, &ch).v_h1(), 50_000);
        for i in 0..2 {
            for j in 2..4 {
                assert!(est.entries()[(i, j)].abs() <= 3.0 * se[(i, j)]);
            }
        }
    }
}
