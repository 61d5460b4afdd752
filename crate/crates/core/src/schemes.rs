//! Idealized two-level solvers, classified by how much relaxation history
//! they keep.
//!
//! A cycle is `k` relaxation sweeps followed by one coarse correction and no
//! post-smoothing. Each scheme is exposed both as "apply one cycle" and as an
//! explicitly assembled two-grid propagator `E_TG` mapping the pre-cycle
//! error to the post-cycle error:
//!
//! * markovian: drop all memory; Petrov-Galerkin solve with `R Ahat P`.
//! * semi-markovian: requires `R Ahat Q = 0`; Markovian coarse solve, then
//!   interpolation with every memory term. Convergence is governed entirely
//!   by the compatible-relaxation propagator: `E_TG = Q (Q^d T Q)^k Q^d`.
//! * non-markovian: generalized coarse operator `sum_l A_sigma^(l)` with the
//!   history-dependent correction `s_sigma`, memory interpolation.
//! * exact: resolves the unresolved fine term through coarse data; a direct
//!   method that converges in one cycle for any basis and restriction.

use crate::error::{Error, Result};
use crate::linalg::{real, DenseMatrix, Vector};
use crate::memory::{self, MemoryOperators};
use crate::relaxation::{RelaxationHistory, RelaxationSetup};
use crate::splitting::TransferBasis;

/// Tolerance on `|R Ahat Q|` below which the semi-Markovian premise holds.
pub const SEMI_MARKOVIAN_RAQ_TOL: f64 = 1e-10;

/// Tolerance separating eigenvalues of `(Q^d T Q)^k` from 1 in the exact
/// scheme's memory-horizon inversion.
pub const EXACT_HORIZON_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Markovian,
    SemiMarkovian,
    NonMarkovian,
    Exact,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Markovian => "markovian",
            SchemeKind::SemiMarkovian => "semi_markovian",
            SchemeKind::NonMarkovian => "non_markovian",
            SchemeKind::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TwoLevelConfig {
    pub scheme: SchemeKind,
    /// Pre-relaxation sweeps per cycle; also the memory depth.
    pub k: usize,
}

impl TwoLevelConfig {
    pub fn new(scheme: SchemeKind, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidProblem {
                reason: "two-level cycles need k >= 1 relaxation sweeps".into(),
            });
        }
        Ok(TwoLevelConfig { scheme, k })
    }
}

#[derive(Clone, Debug, Default)]
pub struct CycleDiagnostics {
    /// `|R Ahat Q|` for the restriction actually used.
    pub raq_norm: f64,
    /// Norm of the memory correction to the coarse right-hand side, when the
    /// scheme forms one.
    pub s_sigma_norm: Option<f64>,
    /// Norm of the noise term, when the scheme can determine it internally.
    pub noise_norm: Option<f64>,
}

/// Outcome of one two-level cycle.
#[derive(Clone, Debug)]
pub struct CycleResult {
    pub x_new: Vector,
    /// Coarse solution of the scheme's coarse equation.
    pub eps_sigma: Vector,
    /// Assembled two-grid error propagator.
    pub e_tg: DenseMatrix,
    pub diagnostics: CycleDiagnostics,
}

/// Dispatch on the configured scheme.
pub fn run_cycle(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    config: &TwoLevelConfig,
    b: &Vector,
    x0: &Vector,
) -> Result<CycleResult> {
    match config.scheme {
        SchemeKind::Markovian => markovian_cycle(setup, basis, r, b, x0, config.k),
        SchemeKind::SemiMarkovian => semi_markovian_cycle(setup, basis, r, b, x0, config.k),
        SchemeKind::NonMarkovian => non_markovian_cycle(setup, basis, r, b, x0, config.k),
        SchemeKind::Exact => exact_cycle(setup, basis, r, b, x0, config.k),
    }
}

/// Relaxation data shared by every scheme. Runs one lookahead sweep so the
/// preconditioned residual `rhat^(k) = x^(k+1) - x^(k)` is available as an
/// iterate difference.
struct CyclePrep {
    history: RelaxationHistory,
    rhat_sigma: Vector,
    /// `P^d x^(l)` for `l = 0..=k`.
    x_sigma: Vec<Vector>,
}

impl CyclePrep {
    fn run(
        setup: &RelaxationSetup,
        basis: &TransferBasis,
        r: &DenseMatrix,
        b: &Vector,
        x0: &Vector,
        k: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidProblem {
                reason: "two-level cycles need k >= 1 relaxation sweeps".into(),
            });
        }
        let history = setup.relax(b, x0, k + 1)?;
        let rhat = history.iterate(k + 1)?.sub(history.iterate(k)?)?;
        let rhat_sigma = r.mul_vec(&rhat)?;
        let x_sigma = (0..=k)
            .map(|l| basis.p_dual.mul_vec(history.iterate(l)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(CyclePrep {
            history,
            rhat_sigma,
            x_sigma,
        })
    }

    fn x_k(&self, k: usize) -> &Vector {
        &self.history.iterates[k]
    }
}

fn raq_norm(setup: &RelaxationSetup, basis: &TransferBasis, r: &DenseMatrix) -> Result<f64> {
    crate::splitting::check_orthogonality_raq(r, setup, basis)
}

/// Memory-free Petrov-Galerkin correction: solve `R Ahat P eps = rhat_sigma`
/// and prolongate with `P` alone.
pub fn markovian_cycle(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    b: &Vector,
    x0: &Vector,
    k: usize,
) -> Result<CycleResult> {
    let prep = CyclePrep::run(setup, basis, r, b, x0, k)?;
    let rap = r.matmul(&setup.a_hat)?.matmul(&basis.p)?;
    let eps_sigma = rap.solve_vec(&prep.rhat_sigma)?;
    let x_new = prep.x_k(k).add(&basis.p.mul_vec(&eps_sigma)?)?;
    Ok(CycleResult {
        x_new,
        eps_sigma,
        e_tg: markovian_propagator(setup, basis, r, k)?,
        diagnostics: CycleDiagnostics {
            raq_norm: raq_norm(setup, basis, r)?,
            s_sigma_norm: None,
            noise_norm: None,
        },
    })
}

/// `E_TG = (I - P (R Ahat P)^-1 R Ahat) T^k`.
pub fn markovian_propagator(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    k: usize,
) -> Result<DenseMatrix> {
    let n = setup.n();
    let r_ahat = r.matmul(&setup.a_hat)?;
    let rap = r_ahat.matmul(&basis.p)?;
    let x = rap.solve(&r_ahat)?;
    let projector = DenseMatrix::identity(n).sub(&basis.p.matmul(&x)?)?;
    projector.matmul(&setup.t.pow(k)?)
}

/// Markovian coarse solve under the premise `R Ahat Q = 0`, followed by
/// interpolation that keeps every memory term. The shift relation rebuilds
/// the coarse error history from the single coarse solution.
pub fn semi_markovian_cycle(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    b: &Vector,
    x0: &Vector,
    k: usize,
) -> Result<CycleResult> {
    let raq = raq_norm(setup, basis, r)?;
    if raq > SEMI_MARKOVIAN_RAQ_TOL {
        return Err(Error::RestrictionNotOrthogonal {
            norm: raq,
            tol: SEMI_MARKOVIAN_RAQ_TOL,
        });
    }
    let prep = CyclePrep::run(setup, basis, r, b, x0, k)?;
    let mem = memory::build_memory(setup, basis, r, k)?;
    let rap = r.matmul(&setup.a_hat)?.matmul(&basis.p)?;
    let eps_sigma = rap.solve_vec(&prep.rhat_sigma)?;
    let x_new = prep
        .x_k(k)
        .add(&interpolate_with_shifts(&mem, &eps_sigma, &prep.x_sigma)?)?;
    Ok(CycleResult {
        x_new,
        eps_sigma,
        e_tg: semi_markovian_propagator(setup, basis, k)?,
        diagnostics: CycleDiagnostics {
            raq_norm: raq,
            s_sigma_norm: None,
            noise_norm: None,
        },
    })
}

/// `E_TG = Q (Q^d T Q)^k Q^d`.
pub fn semi_markovian_propagator(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    k: usize,
) -> Result<DenseMatrix> {
    let tqq = basis.q_dual.matmul(&setup.t)?.matmul(&basis.q)?;
    basis.q.matmul(&tqq.pow(k)?)?.matmul(&basis.q_dual)
}

/// Full-memory coarse solve without the orthogonality premise: the coarse
/// operator sums every lag and the right-hand side carries the history
/// correction `s_sigma^(k) = -sum_l A_sigma^(k-l) (x_sigma^(k) - x_sigma^(l))`.
pub fn non_markovian_cycle(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    b: &Vector,
    x0: &Vector,
    k: usize,
) -> Result<CycleResult> {
    let prep = CyclePrep::run(setup, basis, r, b, x0, k)?;
    let mem = memory::build_memory(setup, basis, r, k)?;
    let a_total = mem.total_coarse_operator()?;
    let s_sigma = history_correction(&mem.a_sigma, &prep.x_sigma, k)?;
    let rhs = prep.rhat_sigma.add(&s_sigma)?;
    let eps_sigma = a_total.solve_vec(&rhs)?;
    let x_new = prep
        .x_k(k)
        .add(&interpolate_with_shifts(&mem, &eps_sigma, &prep.x_sigma)?)?;
    Ok(CycleResult {
        x_new,
        eps_sigma,
        e_tg: non_markovian_propagator(setup, basis, r, k)?,
        diagnostics: CycleDiagnostics {
            raq_norm: raq_norm(setup, basis, r)?,
            s_sigma_norm: Some(s_sigma.norm()),
            noise_norm: None,
        },
    })
}

/// `E_TG = [I - P' (R Ahat P')^-1 R Ahat] Q (Q^d T Q)^k Q^d` with the
/// effective prolongation `P' = sum_l P^(l)`.
pub fn non_markovian_propagator(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    k: usize,
) -> Result<DenseMatrix> {
    let mem = memory::build_memory(setup, basis, r, k)?;
    let p_eff = mem.effective_prolongation()?;
    let r_ahat = r.matmul(&setup.a_hat)?;
    let rap_eff = r_ahat.matmul(&p_eff)?;
    let x = rap_eff.solve(&r_ahat)?;
    let projector = DenseMatrix::identity(setup.n()).sub(&p_eff.matmul(&x)?)?;
    projector.matmul(&semi_markovian_propagator(setup, basis, k)?)
}

/// Direct two-level solve: the unresolved fine-path term is expressed through
/// coarse data by inverting `I - (Q^d T Q)^k`, making both the coarse equation
/// and the interpolation law exact. Converges in one cycle for any transfer
/// operators; the global inversions make it a reference method, not an
/// algorithm.
pub fn exact_cycle(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    b: &Vector,
    x0: &Vector,
    k: usize,
) -> Result<CycleResult> {
    let prep = CyclePrep::run(setup, basis, r, b, x0, k)?;
    let mem = memory::build_memory(setup, basis, r, k)?;
    let nf = basis.n_fine();

    // guard the memory-horizon inversion through the spectrum of Tqq
    let eigs = crate::linalg::eigenvalues(&mem.tqq)?;
    for lambda in &eigs {
        if (real(1.0) - lambda.powu(k as u32)).norm() <= EXACT_HORIZON_TOL {
            return Err(Error::MemoryHorizonSingular {
                tol: EXACT_HORIZON_TOL,
            });
        }
    }
    let tqq_k = mem.tqq.pow(k)?;
    let horizon = DenseMatrix::identity(nf).sub(&tqq_k)?;
    let resolvent = horizon.inverse()?;

    let w_tilde: Vec<DenseMatrix> = mem
        .w
        .iter()
        .map(|wl| resolvent.matmul(wl))
        .collect::<Result<Vec<_>>>()?;
    let x_phi: Vec<Vector> = (0..=k)
        .map(|l| basis.q_dual.mul_vec(prep.history.iterate(l)?))
        .collect::<Result<Vec<_>>>()?;
    let xi_phi = resolvent.mul_vec(&tqq_k.mul_vec(&x_phi[k].sub(&x_phi[0])?)?)?;

    let r_ahat = r.matmul(&setup.a_hat)?;
    let r_ahat_q = r_ahat.matmul(&basis.q)?;
    let mut a_tilde = Vec::with_capacity(k + 1);
    a_tilde.push(r_ahat.matmul(&basis.p)?);
    for wl in &w_tilde {
        a_tilde.push(r_ahat_q.matmul(wl)?);
    }
    let mut a_total = a_tilde[0].clone();
    for al in &a_tilde[1..] {
        a_total = a_total.add(al)?;
    }
    verify_petrov_galerkin_reduction(setup, basis, r, &a_total)?;

    let mut s_tilde = history_correction(&a_tilde, &prep.x_sigma, k)?;
    s_tilde = s_tilde.sub(&r_ahat_q.mul_vec(&xi_phi)?)?;

    let e_sigma_k = a_total.solve_vec(&prep.rhat_sigma.add(&s_tilde)?)?;
    let mut e_phi_k = xi_phi.clone();
    for l in 0..k {
        let shifted = e_sigma_k
            .add(&prep.x_sigma[k].sub(&prep.x_sigma[k - l - 1])?)?;
        e_phi_k = e_phi_k.add(&w_tilde[l].mul_vec(&shifted)?)?;
    }
    let correction = basis
        .p
        .mul_vec(&e_sigma_k)?
        .add(&basis.q.mul_vec(&e_phi_k)?)?;
    let x_new = prep.x_k(k).add(&correction)?;

    // the reconstructed initial fine error pins down the true noise term
    let e_phi_0 = e_phi_k.add(&x_phi[k].sub(&x_phi[0])?)?;
    let eta = r_ahat_q.mul_vec(&tqq_k.mul_vec(&e_phi_0)?)?.scale(real(-1.0));

    Ok(CycleResult {
        x_new,
        eps_sigma: e_sigma_k,
        e_tg: DenseMatrix::zeros(setup.n(), setup.n()),
        diagnostics: CycleDiagnostics {
            raq_norm: raq_norm(setup, basis, r)?,
            s_sigma_norm: Some(s_tilde.norm()),
            noise_norm: Some(eta.norm()),
        },
    })
}

/// The exact scheme's summed coarse operator collapses to Petrov-Galerkin
/// form with fine couplings eliminated on either side:
/// `A_total = R Ahat P_tilde = R_tilde Ahat P` with
/// `P_tilde = (I - Q (Q^d Ahat Q)^-1 Q^d Ahat) P`.
fn verify_petrov_galerkin_reduction(
    setup: &RelaxationSetup,
    basis: &TransferBasis,
    r: &DenseMatrix,
    a_total: &DenseMatrix,
) -> Result<()> {
    let n = setup.n();
    let aqq = basis.q_dual.matmul(&setup.a_hat)?.matmul(&basis.q)?;
    let x = aqq.solve(&basis.q_dual.matmul(&setup.a_hat)?)?;
    let eliminator = DenseMatrix::identity(n).sub(&basis.q.matmul(&x)?)?;
    let p_tilde = eliminator.matmul(&basis.p)?;
    let lhs = r.matmul(&setup.a_hat)?.matmul(&p_tilde)?;
    let scale = a_total.frobenius_norm().max(1.0);
    let via_p = lhs.sub(a_total)?.frobenius_norm();

    let y = aqq.solve(&basis.q_dual)?;
    let r_tilde = r.matmul(
        &DenseMatrix::identity(n).sub(&setup.a_hat.matmul(&basis.q)?.matmul(&y)?)?,
    )?;
    let via_r = r_tilde
        .matmul(&setup.a_hat)?
        .matmul(&basis.p)?
        .sub(a_total)?
        .frobenius_norm();
    if via_p > 1e-11 * scale || via_r > 1e-11 * scale {
        return Err(Error::Defective {
            reason: format!(
                "coarse operator failed the Petrov-Galerkin reduction check: {via_p:.3e} / {via_r:.3e} vs scale {scale:.3e}"
            ),
        });
    }
    Ok(())
}

/// `-sum_{l=0}^{k} A^(k-l) (x_sigma^(k) - x_sigma^(l))` for any lag-indexed
/// operator family.
fn history_correction(
    a_lags: &[DenseMatrix],
    x_sigma: &[Vector],
    k: usize,
) -> Result<Vector> {
    let nc = x_sigma[0].len();
    let mut acc = Vector::zeros(nc);
    for l in 0..=k {
        let shift = x_sigma[k].sub(&x_sigma[l])?;
        acc = acc.add(&a_lags[k - l].mul_vec(&shift)?)?;
    }
    Ok(acc.scale(real(-1.0)))
}

/// Interpolation of the full history from a single coarse solution:
/// `sum_{l=0}^{k} P^(l) (eps_sigma + x_sigma^(k) - x_sigma^(k-l))`.
fn interpolate_with_shifts(
    mem: &MemoryOperators,
    eps_sigma: &Vector,
    x_sigma: &[Vector],
) -> Result<Vector> {
    let k = mem.k;
    let n = mem.p_gen[0].rows();
    let mut acc = Vector::zeros(n);
    for l in 0..=k {
        let shifted = eps_sigma.add(&x_sigma[k].sub(&x_sigma[k - l])?)?;
        acc = acc.add(&mem.p_gen[l].mul_vec(&shifted)?)?;
    }
    Ok(acc)
}

/// Restriction acting on the original operator in standard Petrov-Galerkin
/// form: `R Ahat P = (R M) A P`, so the standard-form restriction is `R M`.
pub fn standard_restriction(r: &DenseMatrix, setup: &RelaxationSetup) -> Result<DenseMatrix> {
    r.matmul(&setup.m)
}
