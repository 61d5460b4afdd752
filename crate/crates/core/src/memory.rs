//! Memory-bearing coarse-graining operators.
//!
//! Eliminating the fine components from the error evolution `e <- T e`
//! leaves a coarse evolution that depends on the full history. This module
//! builds the lag-dependent objects of that reduction:
//!
//! * interpolation weights `W^(l+1) = (Q^d T Q)^l Q^d T P`,
//! * generalized prolongations `P^(0) = P`, `P^(l) = Q W^(l)`,
//! * effective coarse propagators `T^(l) = P^d T P^(l)`,
//! * coarse operators `A_sigma^(l) = R Ahat P^(l)`,
//! * the noise term `eta^(k) = -R Ahat Q (Q^d T Q)^k e_phi^(0)` collecting
//!   contributions of the unresolved initial fine error,
//!
//! together with compatible-relaxation diagnostics for `Q^d T Q`.

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, Vector};
use crate::relaxation::RelaxationSetup;
use crate::splitting::TransferBasis;

/// Lag-indexed operator family for a fixed memory depth `k`.
#[derive(Clone, Debug)]
pub struct MemoryOperators {
    pub k: usize,
    /// `W^(1..=k)`; `w[l]` holds `W^(l+1)`.
    pub w: Vec<DenseMatrix>,
    /// `P^(0..=k)`.
    pub p_gen: Vec<DenseMatrix>,
    /// `T^(0..=k)`. With `R = P^d`, the coarse error obeys the recursion
    /// `e_sigma^(k+1) = sum_{l=0}^{k} T^(l) e_sigma^(k-l)` up to a tail in
    /// the initial fine error.
    pub t_coarse: Vec<DenseMatrix>,
    /// `A_sigma^(0..=k)`.
    pub a_sigma: Vec<DenseMatrix>,
    /// Compatible-relaxation propagator `Q^d T Q`.
    pub tqq: DenseMatrix,
}

/// Coarse-equation contribution of the unresolved initial fine error.
#[derive(Clone, Debug)]
pub struct NoiseTerm {
    pub eta: Vector,
    pub k: usize,
}

/// Compatible-relaxation quality of a split/basis pair.
#[derive(Clone, Copy, Debug)]
pub struct CrDiagnostics {
    /// Spectral radius of `Q^d T Q`.
    pub rho: f64,
    /// Spectral norm of `(Q^d T Q)^k`.
    pub decay: f64,
    pub k: usize,
}

/// Build every memory operator up to lag `k`.
///
/// `W^(l+1)` telescopes as `Tqq * W^(l)` with `W^(1) = Q^d T P`, so powers of
/// the compatible-relaxation propagator are formed by repeated multiplication
/// and stay in the same arithmetic as the identity checks downstream.
pub fn build_memory(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    k: usize,
) -> Result<MemoryOperators> {
    if k == 0 {
        return Err(Error::InvalidProblem {
            reason: "memory depth k must be at least 1".into(),
        });
    }
    let tqq = basis.q_dual.matmul(&setup.t)?.matmul(&basis.q)?;
    let qtp = basis.q_dual.matmul(&setup.t)?.matmul(&basis.p)?;
    let mut w = Vec::with_capacity(k);
    w.push(qtp);
    for l in 1..k {
        let next = tqq.matmul(&w[l - 1])?;
        w.push(next);
    }
    let mut p_gen = Vec::with_capacity(k + 1);
    p_gen.push(basis.p.clone());
    for wl in &w {
        p_gen.push(basis.q.matmul(wl)?);
    }
    let r_ahat = r.matmul(&setup.a_hat)?;
    let a_sigma = p_gen
        .iter()
        .map(|pl| r_ahat.matmul(pl))
        .collect::<Result<Vec<_>>>()?;
    let pd_t = basis.p_dual.matmul(&setup.t)?;
    let t_coarse = p_gen
        .iter()
        .map(|pl| pd_t.matmul(pl))
        .collect::<Result<Vec<_>>>()?;
    Ok(MemoryOperators {
        k,
        w,
        p_gen,
        t_coarse,
        a_sigma,
        tqq,
    })
}

impl MemoryOperators {
    /// `sum of P^(l)` over all lags; a Petrov-Galerkin operator built from it
    /// keeps every memory term of the coarse equation.
    pub fn effective_prolongation(&self) -> Result<DenseMatrix> {
        let mut acc = self.p_gen[0].clone();
        for pl in &self.p_gen[1..] {
            acc = acc.add(pl)?;
        }
        Ok(acc)
    }

    /// `sum of A_sigma^(l)` over all lags.
    pub fn total_coarse_operator(&self) -> Result<DenseMatrix> {
        let mut acc = self.a_sigma[0].clone();
        for al in &self.a_sigma[1..] {
            acc = acc.add(al)?;
        }
        Ok(acc)
    }
}

/// Replay the fine error at step `k` from the coarse history and the initial
/// fine error. This is an identity for any sequence generated by `e <- T e`:
///
/// `e_phi^(k) = sum_{l=0}^{k-1} W^(l+1) e_sigma^(k-l-1) + (Q^d T Q)^k e_phi^(0)`.
///
/// `e_sigma_series[i]` supplies `e_sigma^(i)` for `i = 0..k-1`.
pub fn reconstruct_fine_error(
    mem: &MemoryOperators,
    e_sigma_series: &[Vector],
    e_phi_0: &Vector,
) -> Result<Vector> {
    if e_sigma_series.len() != mem.k {
        return Err(Error::SeriesLength {
            expected: mem.k,
            got: e_sigma_series.len(),
        });
    }
    let mut acc = interpolate_memory(mem, e_sigma_series)?;
    let mut tail = e_phi_0.clone();
    for _ in 0..mem.k {
        tail = mem.tqq.mul_vec(&tail)?;
    }
    acc = acc.add(&tail)?;
    Ok(acc)
}

/// Memory interpolation law: the fine error estimate from coarse history
/// alone, `sum_{l=0}^{k-1} W^(l+1) eps_sigma^(k-l-1)`. Equals
/// [`reconstruct_fine_error`] minus its `(Q^d T Q)^k e_phi^(0)` tail.
///
/// `eps_sigma_series[i]` supplies `eps_sigma^(i)` for `i = 0..k-1`.
pub fn interpolate_memory(mem: &MemoryOperators, eps_sigma_series: &[Vector]) -> Result<Vector> {
    if eps_sigma_series.len() != mem.k {
        return Err(Error::SeriesLength {
            expected: mem.k,
            got: eps_sigma_series.len(),
        });
    }
    let nf = mem.tqq.rows();
    let mut acc = Vector::zeros(nf);
    for l in 0..mem.k {
        let term = mem.w[l].mul_vec(&eps_sigma_series[mem.k - l - 1])?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Noise term `eta^(k) = -R Ahat Q (Q^d T Q)^k e_phi^(0)`. With it, the
/// coarse residual equation balances exactly:
/// `sum_l A_sigma^(l) e_sigma^(k-l) = rhat_sigma^(k) + eta^(k)`.
pub fn noise(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    e_phi_0: &Vector,
    k: usize,
) -> Result<NoiseTerm> {
    let tqq = basis.q_dual.matmul(&setup.t)?.matmul(&basis.q)?;
    let mut v = e_phi_0.clone();
    for _ in 0..k {
        v = tqq.mul_vec(&v)?;
    }
    let eta = r
        .matmul(&setup.a_hat)?
        .matmul(&basis.q)?
        .mul_vec(&v)?
        .scale(linalg::real(-1.0));
    Ok(NoiseTerm { eta, k })
}

/// Spectral radius of `Q^d T Q` and the spectral norm of its k-th power.
/// Fast decay is what makes coarse information sufficient: it bounds the
/// error paths that never touch a coarse point.
pub fn cr_diagnostics(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    k: usize,
) -> Result<CrDiagnostics> {
    let tqq = basis.q_dual.matmul(&setup.t)?.matmul(&basis.q)?;
    let rho = linalg::spectral_radius(&tqq)?;
    let decay = linalg::spectral_norm(&tqq.pow(k)?)?;
    Ok(CrDiagnostics { rho, decay, k })
}
