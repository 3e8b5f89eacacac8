//! The noise-loss channel acting on the received mode of a two-mode state.
//!
//! The channel mixes the received mode with a thermal environment of mean
//! photon number `N_i` on a beam splitter of transmissivity `tau` and traces
//! the environment out. Two independent implementations are provided:
//!
//! * [`apply_closed_form`] evaluates the number-basis expansion of the
//!   channel directly from its combinatorial coefficients;
//! * [`apply_dilation_oracle`] builds the beam-splitter unitary numerically
//!   (per total-photon sector) on an explicit environment mode and traces it
//!   out.
//!
//! Both use the same truncation semantics (output photon numbers above the
//!   cutoff are dropped), so they agree elementwise and double-check each
//! other. Photon-number conservation makes every environment transition
//! `n -> e` act as a single shifted diagonal on the received index, which is
//! what the implementation exploits.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::fock::TwoModeDensityOperator;
use crate::linalg::eig_hermitian;
use crate::{Error, Result};

/// Thermal weights below this value terminate the environment sum.
pub const ENV_WEIGHT_CUTOFF: f64 = 1e-12;

/// Guard on the dilation oracle problem size (`d^2 * env_cutoff`).
pub const DILATION_SIZE_LIMIT: usize = 10_000_000;

/// Noise-loss channel parameters.
///
/// `n_in` is the mean photon number of the injected thermal state and
/// `n_out = n_in (1 - tau)` the output noise photon number. Holding `n_out`
/// fixed while varying `tau` keeps the delivered noise power constant, which
/// is the convention used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLossParams {
    tau: f64,
    n_out: f64,
    n_in: f64,
}

impl NoiseLossParams {
    /// Channel specified by transmissivity and output noise photons.
    pub fn from_output_noise(tau: f64, n_out: f64) -> Result<Self> {
        check_tau(tau)?;
        if !n_out.is_finite() || n_out < 0.0 {
            return Err(Error::InvalidParam(format!("n_out must be >= 0, got {n_out}")));
        }
        if tau == 1.0 {
            if n_out != 0.0 {
                return Err(Error::InvalidParam(
                    "tau = 1 admits no injected noise; n_out must be 0".into(),
                ));
            }
            return Ok(Self { tau, n_out: 0.0, n_in: 0.0 });
        }
        Ok(Self {
            tau,
            n_out,
            n_in: n_out / (1.0 - tau),
        })
    }

    /// Channel specified by transmissivity and injected thermal photons.
    pub fn from_injected_noise(tau: f64, n_in: f64) -> Result<Self> {
        check_tau(tau)?;
        if !n_in.is_finite() || n_in < 0.0 {
            return Err(Error::InvalidParam(format!("n_in must be >= 0, got {n_in}")));
        }
        Ok(Self {
            tau,
            n_out: n_in * (1.0 - tau),
            n_in,
        })
    }

    /// The identity channel (`tau = 1`, no noise).
    pub fn identity() -> Self {
        Self { tau: 1.0, n_out: 0.0, n_in: 0.0 }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_out(&self) -> f64 {
        self.n_out
    }

    pub fn n_in(&self) -> f64 {
        self.n_in
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParam(format!(
            "transmissivity must lie in [0, 1], got {tau}"
        )));
    }
    Ok(())
}

/// Splits a round-trip channel into the two half trips the spoofer path
/// sees: each has transmissivity `sqrt(tau)` and reuses the full channel's
/// injected noise `n_in`. This is the unique split for which applying the
/// half channel twice reproduces the full channel exactly.
pub fn compose_half_trips(full: &NoiseLossParams) -> (NoiseLossParams, NoiseLossParams) {
    let tau_half = full.tau.sqrt();
    let half = NoiseLossParams {
        tau: tau_half,
        n_out: full.n_in * (1.0 - tau_half),
        n_in: full.n_in,
    };
    (half, half)
}

/// Thermal environment weights `w_n = N_i^n / (1+N_i)^(n+1)` down to `cut`.
fn env_weights(n_in: f64, cut: f64) -> Vec<f64> {
    if n_in <= 0.0 {
        return vec![1.0];
    }
    let ratio = n_in / (1.0 + n_in);
    let mut w = vec![1.0 / (1.0 + n_in)];
    let mut p = w[0] * ratio;
    while p >= cut {
        w.push(p);
        p *= ratio;
    }
    w
}

/// A single photon-conserving transition of the environment, `n` photons in
/// and `e` photons out, acting on the received index as the diagonal band
/// `out = in + (n - e)` with real amplitudes `band[j] = K[(j + shift), j]`.
struct BandOperator {
    shift: isize,
    /// Amplitude indexed by the input photon number `j`; entries outside the
    /// valid range are zero.
    band: Vec<f64>,
}

/// Accumulated quadratic action of all bands with a common shift:
/// `G[j, l] = sum_(n,e) w_n K[j+s, j] K[l+s, l]`.
struct ShiftKernels {
    d: usize,
    /// Indexed by `shift + d - 1`.
    kernels: Vec<Option<Array2<f64>>>,
}

impl ShiftKernels {
    fn accumulate(d: usize, weighted_bands: impl Iterator<Item = (f64, BandOperator)>) -> Self {
        let mut kernels: Vec<Option<Array2<f64>>> = Vec::new();
        kernels.resize_with(2 * d - 1, || None);
        for (w, op) in weighted_bands {
            if op.shift <= -(d as isize) || op.shift >= d as isize {
                continue;
            }
            let slot = (op.shift + d as isize - 1) as usize;
            let g = kernels[slot].get_or_insert_with(|| Array2::zeros((d, d)));
            let lo = (-op.shift).max(0) as usize;
            let hi = (d as isize - op.shift.max(0)) as usize;
            for j in lo..hi {
                let kj = w * op.band[j];
                if kj == 0.0 {
                    continue;
                }
                for l in lo..hi {
                    g[(j, l)] += kj * op.band[l];
                }
            }
        }
        Self { d, kernels }
    }

    /// Applies `rho' = sum_s sum_(j,l) G_s[j,l] shift_s(rho)` on the received
    /// factor of a two-mode state.
    fn apply(&self, rho: &TwoModeDensityOperator) -> Result<TwoModeDensityOperator> {
        let d = self.d;
        let dim = d * d;
        let input = rho.entries();
        let in_slice = input.as_slice().expect("contiguous");
        let mut out = vec![C64::new(0.0, 0.0); dim * dim];
        for (slot, kernel) in self.kernels.iter().enumerate() {
            let Some(g) = kernel else { continue };
            let shift = slot as isize - (d as isize - 1);
            let lo = (-shift).max(0) as usize;
            let hi = (d as isize - shift.max(0)) as usize;
            for i in 0..d {
                for j in lo..hi {
                    let oj = (j as isize + shift) as usize;
                    let out_row = (i * d + oj) * dim;
                    let in_row = (i * d + j) * dim;
                    for k in 0..d {
                        let out_base = out_row + k * d;
                        let in_base = in_row + k * d;
                        for l in lo..hi {
                            let glj = g[(j, l)];
                            if glj == 0.0 {
                                continue;
                            }
                            out[out_base + (l as isize + shift) as usize] +=
                                in_slice[in_base + l] * glj;
                        }
                    }
                }
            }
        }
        let entries = Array2::from_shape_vec((dim, dim), out).expect("shape");
        TwoModeDensityOperator::new(rho.cutoff(), entries)
    }
}

/// Applies the channel through its number-basis expansion with the default
/// environment truncation.
pub fn apply_closed_form(
    rho: &TwoModeDensityOperator,
    p: &NoiseLossParams,
) -> Result<TwoModeDensityOperator> {
    apply_closed_form_with(rho, p, ENV_WEIGHT_CUTOFF)
}

/// Same as [`apply_closed_form`], with an explicit termination threshold for
/// the environment photon sum.
pub fn apply_closed_form_with(
    rho: &TwoModeDensityOperator,
    p: &NoiseLossParams,
    env_weight_cutoff: f64,
) -> Result<TwoModeDensityOperator> {
    let d = rho.cutoff().dim();
    let weights = env_weights(p.n_in, env_weight_cutoff);
    let tab = FactorialTable::up_to(d + weights.len() + 2);
    let mut bands = Vec::new();
    for (n, &w) in weights.iter().enumerate() {
        // Output photon number o = j + n - e stays within [0, d-1].
        for e in 0..=(n + d - 1) {
            let band = closed_form_band(d, n, e, p.tau, &tab);
            if let Some(band) = band {
                bands.push((w, band));
            }
        }
    }
    ShiftKernels::accumulate(d, bands.into_iter()).apply(rho)
}

/// Amplitudes `K_(n,e)[j + n - e, j]` of the channel expansion: the photon
/// exchange with the environment taking `n` photons in and `e` out,
///
/// ```text
/// K[o, j] = sum_(r+s=o) C(j,r) C(n,s) (-1)^(n-s)
///           tau^((n-s+r)/2) (1-tau)^((j-r+s)/2)
///           sqrt(e! o! / (n! j!))
/// ```
///
/// with `r` photons of the input and `s` of the environment transmitted.
fn closed_form_band(
    d: usize,
    n: usize,
    e: usize,
    tau: f64,
    tab: &FactorialTable,
) -> Option<BandOperator> {
    let shift = n as isize - e as isize;
    if shift <= -(d as isize) || shift >= d as isize {
        return None;
    }
    let mut band = vec![0.0f64; d];
    let mut any = false;
    let j_lo = (-shift).max(0) as usize;
    let j_hi = (d as isize - shift.max(0)) as usize;
    for j in j_lo..j_hi {
        let o = (j as isize + shift) as usize;
        // e = j - r + n - s must hold; with s = o - r both constraints
        // collapse onto the admissible r range.
        let r_lo = o.saturating_sub(n);
        let r_hi = o.min(j);
        let mut acc = 0.0f64;
        for r in r_lo..=r_hi {
            let s = o - r;
            let pow_tau = (n - s + r) as f64 / 2.0;
            let pow_loss = (j - r + s) as f64 / 2.0;
            let magnitude_ln = tab.ln_choose(j, r)
                + tab.ln_choose(n, s)
                + ln_pow(tau, pow_tau)
                + ln_pow(1.0 - tau, pow_loss)
                + 0.5 * (tab.ln_fact(e) + tab.ln_fact(o) - tab.ln_fact(n) - tab.ln_fact(j));
            if magnitude_ln == f64::NEG_INFINITY {
                continue;
            }
            let sign = if (n - s) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * magnitude_ln.exp();
        }
        if acc != 0.0 {
            any = true;
        }
        band[j] = acc;
    }
    any.then_some(BandOperator { shift, band })
}

fn ln_pow(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        0.0
    } else if base <= 0.0 {
        f64::NEG_INFINITY
    } else {
        exponent * base.ln()
    }
}

struct FactorialTable {
    ln_fact: Vec<f64>,
}

impl FactorialTable {
    fn up_to(n: usize) -> Self {
        let mut ln_fact = vec![0.0; n.max(2) + 1];
        for k in 2..ln_fact.len() {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        Self { ln_fact }
    }

    fn ln_fact(&self, k: usize) -> f64 {
        self.ln_fact[k]
    }

    fn ln_choose(&self, n: usize, k: usize) -> f64 {
        self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k]
    }
}

/// Applies the channel through its physical dilation: a beam splitter of
/// transmissivity `tau` combining the received mode with a thermal mode of
/// `env_cutoff` levels, built by exponentiating the exchange generator per
/// total-photon sector, followed by a trace over the environment.
///
/// This path never sees the combinatorial coefficients of
/// [`apply_closed_form`] and serves as its independent check.
pub fn apply_dilation_oracle(
    rho: &TwoModeDensityOperator,
    p: &NoiseLossParams,
    env_cutoff: usize,
) -> Result<TwoModeDensityOperator> {
    let d = rho.cutoff().dim();
    if env_cutoff == 0 {
        return Err(Error::InvalidParam("env_cutoff must be >= 1".into()));
    }
    let required = d * d * env_cutoff;
    if required > DILATION_SIZE_LIMIT {
        return Err(Error::DimensionLimit {
            required,
            limit: DILATION_SIZE_LIMIT,
        });
    }
    let weights = crate::states::thermal_weights(p.n_in, env_cutoff);
    let theta = p.tau.sqrt().clamp(0.0, 1.0).acos();
    let t_max = d - 1 + env_cutoff - 1;
    let sectors = beam_splitter_sectors(theta, t_max)?;
    let mut bands = Vec::new();
    for (n, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for e in 0..=(n + d - 1) {
            let shift = n as isize - e as isize;
            if shift <= -(d as isize) || shift >= d as isize {
                continue;
            }
            let mut band = vec![0.0f64; d];
            let mut any = false;
            let j_lo = (-shift).max(0) as usize;
            let j_hi = (d as isize - shift.max(0)) as usize;
            for j in j_lo..j_hi {
                let t = j + n;
                let o = (j as isize + shift) as usize;
                let amp = sectors[t][(o, j)];
                band[j] = amp;
                if amp != 0.0 {
                    any = true;
                }
            }
            if any {
                bands.push((w, BandOperator { shift, band }));
            }
        }
    }
    ShiftKernels::accumulate(d, bands.into_iter()).apply(rho)
}

/// Matrix elements `<o, t-o| B |j, t-j>` of the beam-splitter unitary on
/// each total-photon sector `t = 0..=t_max`, indexed by the photon number of
/// the kept (received) leg.
fn beam_splitter_sectors(theta: f64, t_max: usize) -> Result<Vec<Array2<f64>>> {
    let mut sectors = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let n = t + 1;
        // Exchange generator i(a†b - a b†) restricted to the sector, which
        // is Hermitian with real spectrum; B = exp(-i theta H).
        let mut h = Array2::<C64>::zeros((n, n));
        for j in 0..t {
            // a†b |j, t-j> = sqrt((j+1)(t-j)) |j+1, t-j-1>
            let x = (((j + 1) * (t - j)) as f64).sqrt();
            h[(j + 1, j)] = C64::new(0.0, 1.0) * x;
            h[(j, j + 1)] = C64::new(0.0, -1.0) * x;
        }
        let (w, v) = eig_hermitian(&h)?;
        let mut b = Array2::<f64>::zeros((n, n));
        for row in 0..n {
            for col in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    let phase = C64::from_polar(1.0, -theta * w[k]);
                    acc += v[(row, k)] * phase * v[(col, k)].conj();
                }
                b[(row, col)] = acc.re;
            }
        }
        sectors.push(b);
    }
    Ok(sectors)
}
