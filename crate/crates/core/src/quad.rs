//! Gauss quadrature rules built from the Golub-Welsch eigenproblem.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::linalg::eig_hermitian;
use crate::{Error, Result};

/// Nodes and weights of a one-dimensional quadrature rule.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Applies the rule to `f`, i.e. sums w_i f(x_i).
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Rule for integrals of the form `int f(x) exp(-x^2) dx` over the real line.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    // Jacobi matrix: zero diagonal, off-diagonal sqrt(k/2).
    let offdiag = |k: usize| (k as f64 / 2.0).sqrt();
    let diag = |_k: usize| 0.0;
    golub_welsch(order, diag, offdiag, std::f64::consts::PI.sqrt())
}

/// Rule for integrals of the form `int_0^inf f(x) exp(-x) dx`.
pub fn gauss_laguerre(order: usize) -> Result<QuadratureRule> {
    let offdiag = |k: usize| k as f64;
    let diag = |k: usize| 2.0 * k as f64 + 1.0;
    golub_welsch(order, diag, offdiag, 1.0)
}

fn golub_welsch(
    order: usize,
    diag: impl Fn(usize) -> f64,
    offdiag: impl Fn(usize) -> f64,
    mu0: f64,
) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidParam("quadrature order must be >= 1".into()));
    }
    let mut jacobi = Array2::<C64>::zeros((order, order));
    for k in 0..order {
        jacobi[(k, k)] = C64::new(diag(k), 0.0);
        if k + 1 < order {
            let b = offdiag(k + 1);
            jacobi[(k, k + 1)] = C64::new(b, 0.0);
            jacobi[(k + 1, k)] = C64::new(b, 0.0);
        }
    }
    let (nodes, vectors) = eig_hermitian(&jacobi)?;
    let weights: Vec<f64> = (0..order).map(|k| mu0 * vectors[(0, k)].norm_sqr()).collect();
    Ok(QuadratureRule {
        nodes: nodes.to_vec(),
        weights,
    })
}
