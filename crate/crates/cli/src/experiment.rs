//! Builds the operator pipeline described by a config and runs two-level
//! cycles on a seeded homogeneous problem.
//!
//! Runs use `b = 0`, so the exact solution is zero and the iterate IS the
//! error: norms stay cancellation-free at any magnitude, which keeps
//! measured reduction factors meaningful even deep below 1e-10.

use crate::config::{BasisKind, ExperimentConfig, RestrictionKind, SplitStrategy};
use relaxmg::error::Result;
use relaxmg::linalg::{DenseMatrix, Vector};
use relaxmg::memory;
use relaxmg::problems::{self, ProblemKind};
use relaxmg::relaxation::{build_setup, RelaxationSetup};
use relaxmg::schemes::{self, TwoLevelConfig};
use relaxmg::splitting::{check_orthogonality_raq, CFSplit, TransferBasis};
use relaxmg::transfer;
use relaxmg::util::SplitMix64;
use relaxmg::Error;
use serde::Serialize;

pub struct Experiment {
    pub setup: RelaxationSetup,
    pub split: CFSplit,
    pub basis: TransferBasis,
    pub restriction: DenseMatrix,
    pub two_level: TwoLevelConfig,
    pub cycles: usize,
    pub seed: u64,
}

pub fn build(cfg: &ExperimentConfig) -> Result<Experiment> {
    let a = problems::generate(&cfg.problem)?.to_dense();
    let n = a.rows();
    let setup = build_setup(&a, cfg.smoother.clone())?;

    let split = match (&cfg.split, &cfg.problem) {
        (SplitStrategy::EveryOther, _) => CFSplit::every_other(n)?,
        (SplitStrategy::RedBlack, ProblemKind::Poisson2d { nx, ny }) => {
            CFSplit::red_black(*nx, *ny)?
        }
        (SplitStrategy::RedBlack, _) => {
            return Err(Error::InvalidSplit {
                reason: "red_black requires a poisson2d problem".into(),
            })
        }
        (SplitStrategy::Explicit(coarse), _) => CFSplit::new(n, coarse.clone())?,
    };

    let basis = match &cfg.basis {
        BasisKind::Canonical => TransferBasis::canonical(&split),
        BasisKind::Ideal => {
            let w = transfer::ideal_weights_limit(&setup, &split)?;
            transfer::ideal_basis(&setup, &split, &w)?
        }
        BasisKind::Flow { max_tau, tol } => {
            let canon = TransferBasis::canonical(&split);
            let state =
                transfer::flow_run(&canon.p, &canon.p_dual, &setup, cfg.k, *max_tau, *tol)?;
            TransferBasis {
                p: state.p,
                p_dual: state.p_dual,
                q: state.q,
                q_dual: state.q_dual,
            }
        }
        BasisKind::Optimal => transfer::optimal_transfers(&setup, split.n_coarse())?.basis,
    };

    let restriction = match cfg.restriction {
        RestrictionKind::PDual => basis.p_dual.clone(),
        RestrictionKind::Ideal => transfer::ideal_restriction(&setup, &split)?,
        RestrictionKind::Spectral => {
            transfer::optimal_transfers(&setup, split.n_coarse())?.restriction
        }
    };

    Ok(Experiment {
        setup,
        split,
        basis,
        restriction,
        two_level: TwoLevelConfig::new(cfg.scheme, cfg.k)?,
        cycles: cfg.cycles,
        seed: cfg.seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleRow {
    pub cycle: usize,
    pub error_norm: f64,
    pub residual_norm: f64,
    /// `error_norm / previous error_norm`; absent on the initial row.
    pub factor: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub scheme: &'static str,
    pub n: usize,
    pub n_coarse: usize,
    pub k: usize,
    pub cycles: usize,
    pub seed: u64,
    pub raq_norm: f64,
    pub cr_rho: f64,
    pub cr_decay: f64,
    pub rows: Vec<CycleRow>,
    pub noise_norms: Vec<f64>,
    pub s_sigma_norms: Vec<Option<f64>>,
    pub final_error_norm: f64,
    pub last_factor: Option<f64>,
}

/// Seeded initial iterate with components uniform in [-1, 1).
pub fn initial_iterate(n: usize, seed: u64) -> Vector {
    SplitMix64::new(seed).vector(n)
}

pub fn run_solve(exp: &Experiment) -> Result<SolveReport> {
    let n = exp.setup.n();
    let b = Vector::zeros(n);
    let mut x = initial_iterate(n, exp.seed);
    let cr = memory::cr_diagnostics(&exp.setup, &exp.basis, exp.two_level.k)?;
    let raq = check_orthogonality_raq(&exp.restriction, &exp.setup, &exp.basis)?;

    let mut rows = Vec::with_capacity(exp.cycles + 1);
    let mut noise_norms = Vec::new();
    let mut s_sigma_norms = Vec::new();
    rows.push(CycleRow {
        cycle: 0,
        error_norm: x.norm(),
        residual_norm: exp.setup.a.mul_vec(&x)?.norm(),
        factor: None,
    });
    for cycle in 1..=exp.cycles {
        let res = schemes::run_cycle(
            &exp.setup,
            &exp.basis,
            &exp.restriction,
            &exp.two_level,
            &b,
            &x,
        )?;
        // exact solution is zero: the initial fine error of this cycle is
        // -Q^d x, which prices the noise term exactly
        let e_phi_0 = exp.basis.q_dual.mul_vec(&x)?.scale(relaxmg::linalg::real(-1.0));
        let eta = memory::noise(
            &exp.setup,
            &exp.basis,
            &exp.restriction,
            &e_phi_0,
            exp.two_level.k,
        )?;
        noise_norms.push(eta.eta.norm());
        s_sigma_norms.push(res.diagnostics.s_sigma_norm);
        x = res.x_new;
        let error_norm = x.norm();
        let prev = rows[cycle - 1].error_norm;
        rows.push(CycleRow {
            cycle,
            error_norm,
            residual_norm: exp.setup.a.mul_vec(&x)?.norm(),
            factor: (prev > 0.0).then_some(error_norm / prev),
        });
    }
    Ok(SolveReport {
        scheme: scheme_name(&exp.two_level),
        n,
        n_coarse: exp.split.n_coarse(),
        k: exp.two_level.k,
        cycles: exp.cycles,
        seed: exp.seed,
        raq_norm: raq,
        cr_rho: cr.rho,
        cr_decay: cr.decay,
        final_error_norm: rows.last().map(|r| r.error_norm).unwrap_or(0.0),
        last_factor: rows.last().and_then(|r| r.factor),
        rows,
        noise_norms,
        s_sigma_norms,
    })
}

fn scheme_name(cfg: &TwoLevelConfig) -> &'static str {
    cfg.scheme.name()
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnoseReport {
    pub n: usize,
    pub n_coarse: usize,
    pub k: usize,
    pub cr_rho: f64,
    pub cr_decay: f64,
    pub raq_norm: f64,
    pub basis_residual: f64,
}

pub fn run_diagnose(exp: &Experiment) -> Result<DiagnoseReport> {
    let cr = memory::cr_diagnostics(&exp.setup, &exp.basis, exp.two_level.k)?;
    let raq = check_orthogonality_raq(&exp.restriction, &exp.setup, &exp.basis)?;
    Ok(DiagnoseReport {
        n: exp.setup.n(),
        n_coarse: exp.split.n_coarse(),
        k: exp.two_level.k,
        cr_rho: cr.rho,
        cr_decay: cr.decay,
        raq_norm: raq,
        basis_residual: exp.basis.residuals()?.max(),
    })
}

/// Flow trace: the canonical start improved until the fixed-point residual
/// reaches `tol`.
pub struct FlowTrace {
    pub state: transfer::FlowState,
}

pub fn run_flow(exp: &Experiment, max_tau: usize, tol: f64) -> Result<FlowTrace> {
    let canon = TransferBasis::canonical(&exp.split);
    let state = transfer::flow_run(
        &canon.p,
        &canon.p_dual,
        &exp.setup,
        exp.two_level.k,
        max_tau,
        tol,
    )?;
    Ok(FlowTrace { state })
}
