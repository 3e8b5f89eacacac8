//! Truncated Fock-space linear algebra.
//!
//! Operators live in the number basis with an explicit photon-number cutoff:
//! a [`FockCutoff`] of dimension `d` retains photon numbers `0..=d-1`.
//! Two-mode operators use the fixed basis order (idler, received), with the
//! flat index `idler * d + received`. Truncation is never hidden: every
//! density operator reports its trace deficit and nothing is renormalized.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::linalg::{eig_hermitian, eigvals_hermitian};
use crate::{Error, Result};

/// Default single-mode dimension, retaining photon numbers up to 34.
pub const DEFAULT_CUTOFF: usize = 35;

/// A density operator with trace deficit at or above this value is untrusted.
pub const TRUST_DEFICIT: f64 = 1e-6;

/// Allowed Hermiticity deviation for density operators.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues in `[PSD_CLIP, 0)` are treated as round-off and clipped to
/// zero; anything below is genuine truncation damage and an error.
pub const PSD_CLIP: f64 = -1e-10;

/// Single-mode dimension of the truncated number basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockCutoff {
    d: usize,
}

impl FockCutoff {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidCutoff(d));
        }
        Ok(Self { d })
    }

    /// Smallest cutoff for which the truncated tail of a TMSV (equivalently,
    /// thermal) photon distribution with mean `n_mean` is below `tail`.
    pub fn for_tmsv_tail(n_mean: f64, tail: f64) -> Self {
        if n_mean <= 0.0 {
            return Self { d: 2 };
        }
        // Tail mass above cutoff d is (N/(1+N))^d.
        let ratio = n_mean / (1.0 + n_mean);
        let d = (tail.ln() / ratio.ln()).ceil() as usize;
        Self { d: d.max(2) }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn dim_two_mode(&self) -> usize {
        self.d * self.d
    }
}

/// Mode selector for two-mode operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Idler,
    Received,
}

/// Dense operator on a single truncated mode.
#[derive(Debug, Clone)]
pub struct SingleModeOperator {
    cutoff: FockCutoff,
    entries: Array2<C64>,
}

impl SingleModeOperator {
    pub fn new(cutoff: FockCutoff, entries: Array2<C64>) -> Result<Self> {
        if entries.nrows() != cutoff.dim() || entries.ncols() != cutoff.dim() {
            return Err(Error::InvalidParam(format!(
                "single-mode operator shape {:?} does not match cutoff {}",
                entries.dim(),
                cutoff.dim()
            )));
        }
        Ok(Self { cutoff, entries })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    /// `1 - tr(rho)`; the mass lost to truncation for a density operator.
    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.trace().re
    }

    pub fn mean_photon(&self) -> f64 {
        self.entries
            .diag()
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.re)
            .sum()
    }

    /// Checks the density-operator contract: Hermitian, PSD up to round-off,
    /// trace deficit in [0, limit).
    pub fn validate_density(&self, deficit_limit: f64) -> Result<()> {
        validate_density_matrix(&self.entries, deficit_limit)
    }
}

/// Dense operator on the (idler, received) pair of truncated modes.
#[derive(Debug, Clone)]
pub struct TwoModeDensityOperator {
    cutoff: FockCutoff,
    entries: Array2<C64>,
}

impl TwoModeDensityOperator {
    pub fn new(cutoff: FockCutoff, entries: Array2<C64>) -> Result<Self> {
        let dim = cutoff.dim_two_mode();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::InvalidParam(format!(
                "two-mode operator shape {:?} does not match cutoff {} (dim {})",
                entries.dim(),
                cutoff.dim(),
                dim
            )));
        }
        Ok(Self { cutoff, entries })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.trace().re
    }

    pub fn is_trusted(&self) -> bool {
        self.trace_deficit() < TRUST_DEFICIT
    }

    /// Errors when the trace deficit is at or above the trust threshold.
    pub fn ensure_trusted(&self) -> Result<()> {
        let deficit = self.trace_deficit();
        if deficit >= TRUST_DEFICIT {
            return Err(Error::Truncation {
                deficit,
                limit: TRUST_DEFICIT,
            });
        }
        Ok(())
    }

    pub fn validate_density(&self, deficit_limit: f64) -> Result<()> {
        validate_density_matrix(&self.entries, deficit_limit)
    }

    /// Expectation value `tr(rho (A (x) B))` without forming the product
    /// operator, with `A` on the idler factor and `B` on the received one.
    pub fn expect_product(&self, a: &Array2<C64>, b: &Array2<C64>) -> C64 {
        let d = self.cutoff.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let aki = a[(k, i)];
                    if aki == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for l in 0..d {
                        acc += self.entries[(i * d + j, k * d + l)] * aki * b[(l, j)];
                    }
                }
            }
        }
        acc
    }
}

fn validate_density_matrix(m: &Array2<C64>, deficit_limit: f64) -> Result<()> {
    let dev = hermiticity_deviation(m);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    let trace: C64 = m.diag().sum();
    let deficit = 1.0 - trace.re;
    if !(-HERMITICITY_TOL..deficit_limit).contains(&deficit) {
        return Err(Error::Truncation {
            deficit,
            limit: deficit_limit,
        });
    }
    let eigs = eigvals_hermitian(m)?;
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < PSD_CLIP {
        return Err(Error::NegativeEigenvalue { min });
    }
    Ok(())
}

pub(crate) fn hermiticity_deviation(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Annihilation operator in the truncated number basis: `a[n-1, n] = sqrt(n)`.
pub fn annihilation(cutoff: FockCutoff) -> Array2<C64> {
    let d = cutoff.dim();
    let mut a = Array2::<C64>::zeros((d, d));
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Photon-number operator in the truncated number basis.
pub fn number_operator(cutoff: FockCutoff) -> Array2<C64> {
    let d = cutoff.dim();
    Array2::from_diag(&Array1::from_iter((0..d).map(|n| C64::new(n as f64, 0.0))))
}

/// Tensor product with the idler factor first: the result indexes as
/// `entries[(i*d + j, k*d + l)] = a[i, k] * b[j, l]`.
pub fn tensor(a: &SingleModeOperator, b: &SingleModeOperator) -> Result<TwoModeDensityOperator> {
    if a.cutoff() != b.cutoff() {
        return Err(Error::CutoffMismatch {
            left: a.cutoff().dim(),
            right: b.cutoff().dim(),
        });
    }
    let d = a.cutoff().dim();
    let dim = d * d;
    let mut entries = Array2::<C64>::zeros((dim, dim));
    for i in 0..d {
        for k in 0..d {
            let aik = a.entries[(i, k)];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                for l in 0..d {
                    entries[(i * d + j, k * d + l)] = aik * b.entries[(j, l)];
                }
            }
        }
    }
    TwoModeDensityOperator::new(a.cutoff(), entries)
}

/// Traces out the selected mode.
pub fn partial_trace(rho: &TwoModeDensityOperator, traced: Mode) -> SingleModeOperator {
    let d = rho.cutoff.dim();
    let mut out = Array2::<C64>::zeros((d, d));
    match traced {
        Mode::Idler => {
            for j in 0..d {
                for l in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..d {
                        acc += rho.entries[(i * d + j, i * d + l)];
                    }
                    out[(j, l)] = acc;
                }
            }
        }
        Mode::Received => {
            for i in 0..d {
                for k in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..d {
                        acc += rho.entries[(i * d + j, k * d + j)];
                    }
                    out[(i, k)] = acc;
                }
            }
        }
    }
    SingleModeOperator {
        cutoff: rho.cutoff,
        entries: out,
    }
}

/// Projects onto the number basis of the selected mode, i.e. applies
/// `sum_n (P_n) rho (P_n)` with `P_n = |n><n|` on that mode. This is the
/// state after an unrecorded photon-number measurement.
pub fn number_dephase(rho: &TwoModeDensityOperator, mode: Mode) -> TwoModeDensityOperator {
    let d = rho.cutoff.dim();
    let mut entries = Array2::<C64>::zeros(rho.entries.raw_dim());
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let keep = match mode {
                        Mode::Received => j == l,
                        Mode::Idler => i == k,
                    };
                    if keep {
                        entries[(i * d + j, k * d + l)] = rho.entries[(i * d + j, k * d + l)];
                    }
                }
            }
        }
    }
    TwoModeDensityOperator {
        cutoff: rho.cutoff,
        entries,
    }
}

/// Hermitian square root by eigendecomposition. Eigenvalues in
/// `[PSD_CLIP, 0)` are clipped to zero; lower ones are an error.
pub fn herm_sqrt(op: &Array2<C64>) -> Result<Array2<C64>> {
    let dev = hermiticity_deviation(op);
    if dev > 1e-10 {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    let (w, v) = eig_hermitian(op)?;
    let mut min = f64::INFINITY;
    let sqrt_w: Vec<f64> = w
        .iter()
        .map(|&lambda| {
            min = min.min(lambda);
            lambda.max(0.0).sqrt()
        })
        .collect();
    if min < PSD_CLIP {
        return Err(Error::NegativeEigenvalue { min });
    }
    // v * diag(sqrt_w) * v^H
    let mut scaled = v.clone();
    for (k, mut col) in scaled.columns_mut().into_iter().enumerate() {
        let s = C64::new(sqrt_w[k], 0.0);
        col.map_inplace(|z| *z *= s);
    }
    let vh = v.t().mapv(|z| z.conj());
    Ok(scaled.dot(&vh))
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian operator.
pub fn trace_norm(op: &Array2<C64>) -> Result<f64> {
    let dev = hermiticity_deviation(op);
    if dev > 1e-10 {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    let w = eigvals_hermitian(op)?;
    Ok(w.iter().map(|x| x.abs()).sum())
}

/// Uhlmann fidelity `tr sqrt(sqrt(r0) r1 sqrt(r0))`.
///
/// When either operator is pure the fidelity reduces to
/// `sqrt(<psi| rho |psi>) = sqrt(tr(r0 r1))`, which skips both
/// eigendecompositions; the general and fast paths agree to 1e-9.
pub fn uhlmann_fidelity(r0: &TwoModeDensityOperator, r1: &TwoModeDensityOperator) -> Result<f64> {
    if r0.cutoff != r1.cutoff {
        return Err(Error::CutoffMismatch {
            left: r0.cutoff.dim(),
            right: r1.cutoff.dim(),
        });
    }
    let fidelity = if is_rank_one(&r0.entries) || is_rank_one(&r1.entries) {
        hs_inner(&r0.entries, &r1.entries).max(0.0).sqrt()
    } else {
        let s = herm_sqrt(&r0.entries)?;
        let m = s.dot(&r1.entries).dot(&s);
        let w = eigvals_hermitian(&m)?;
        let mut min = f64::INFINITY;
        let f: f64 = w
            .iter()
            .map(|&lambda| {
                min = min.min(lambda);
                lambda.max(0.0).sqrt()
            })
            .sum();
        if min < PSD_CLIP {
            return Err(Error::NegativeEigenvalue { min });
        }
        f
    };
    if fidelity > 1.0 + 1e-6 {
        return Err(Error::FidelityOutOfRange(fidelity));
    }
    Ok(fidelity)
}

/// Purity test `tr(rho^2) ~ tr(rho)^2` at working precision.
fn is_rank_one(m: &Array2<C64>) -> bool {
    let tr: C64 = m.diag().sum();
    let frob2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    (tr.re * tr.re - frob2).abs() < 1e-12
}

/// Hilbert-Schmidt inner product `tr(a b)` of two Hermitian matrices.
fn hs_inner(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}
