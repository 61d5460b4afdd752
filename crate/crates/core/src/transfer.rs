//! Transfer-operator construction from relaxation dynamics: ideal
//! interpolation and restriction, the prolongation-improvement flow, and
//! spectral (optimal) transfers from the eigendecomposition of `T`.

use crate::error::{Error, Result};
use crate::linalg::{self, real, DenseMatrix, Scalar};
use crate::relaxation::RelaxationSetup;
use crate::splitting::{CFSplit, TransferBasis};

/// Truncated ideal interpolation on a canonical split:
/// `P = P0 + Q0 W(k)` with `W(k) = sum_{l=0}^{k-1} T_ff^l T_fc`.
///
/// With convergent compatible relaxation, `W(k)` approaches the ideal weights
/// `-Ahat_ff^-1 Ahat_fc` monotonically in the difference norm.
pub fn ideal_prolongation(
    setup: &RelaxationSetup,
    split: &CFSplit,
    k: usize,
) -> Result<DenseMatrix> {
    if k == 0 {
        return Err(Error::InvalidProblem {
            reason: "ideal interpolation needs k >= 1".into(),
        });
    }
    let w = ideal_weights(setup, split, k)?;
    assemble_prolongation(split, &w)
}

/// `W(k) = sum_{l=0}^{k-1} T_ff^l T_fc` in the canonical split blocks.
pub fn ideal_weights(setup: &RelaxationSetup, split: &CFSplit, k: usize) -> Result<DenseMatrix> {
    let t_ff = setup.t.select_rows(split.fine()).select_columns(split.fine());
    let t_fc = setup.t.select_rows(split.fine()).select_columns(split.coarse());
    let mut w = t_fc.clone();
    let mut power = t_fc;
    for _ in 1..k {
        power = t_ff.matmul(&power)?;
        w = w.add(&power)?;
    }
    Ok(w)
}

/// Limit weights `-Ahat_ff^-1 Ahat_fc`: exact elimination of the fine
/// couplings.
pub fn ideal_weights_limit(setup: &RelaxationSetup, split: &CFSplit) -> Result<DenseMatrix> {
    let a_ff = setup
        .a_hat
        .select_rows(split.fine())
        .select_columns(split.fine());
    let a_fc = setup
        .a_hat
        .select_rows(split.fine())
        .select_columns(split.coarse());
    Ok(a_ff.solve(&a_fc)?.neg())
}

/// Prolongation in the original index ordering whose coarse rows are the
/// identity and whose fine rows carry `w`.
pub fn assemble_prolongation(split: &CFSplit, w: &DenseMatrix) -> Result<DenseMatrix> {
    if w.rows() != split.n_fine() || w.cols() != split.n_coarse() {
        return Err(Error::DimensionMismatch {
            op: "assemble_prolongation",
            left_rows: split.n_fine(),
            left_cols: split.n_coarse(),
            right_rows: w.rows(),
            right_cols: w.cols(),
        });
    }
    let mut p = DenseMatrix::zeros(split.n(), split.n_coarse());
    for (c, &row) in split.coarse().iter().enumerate() {
        p[(row, c)] = real(1.0);
    }
    for (f, &row) in split.fine().iter().enumerate() {
        for c in 0..split.n_coarse() {
            p[(row, c)] = w[(f, c)];
        }
    }
    Ok(p)
}

/// Full basis for an ideal interpolation on a canonical split with the
/// stationary dual `P^d = P0^T`: `Q = Q0` and `Q^d = [-W, I]`.
pub fn ideal_basis(setup: &RelaxationSetup, split: &CFSplit, w: &DenseMatrix) -> Result<TransferBasis> {
    let _ = setup;
    let canon = TransferBasis::canonical(split);
    let p = assemble_prolongation(split, w)?;
    // Q^d rows: -w at coarse columns, identity at fine columns
    let mut q_dual = DenseMatrix::zeros(split.n_fine(), split.n());
    for (f, &col) in split.fine().iter().enumerate() {
        q_dual[(f, col)] = real(1.0);
    }
    for (c, &col) in split.coarse().iter().enumerate() {
        for f in 0..split.n_fine() {
            q_dual[(f, col)] = -w[(f, c)];
        }
    }
    Ok(TransferBasis {
        p,
        q: canon.q,
        p_dual: canon.p_dual,
        q_dual,
    })
}

/// Restriction `[I, -Ahat_cf Ahat_ff^-1]` in the original index ordering; its
/// rows are relaxation-orthogonal to the canonical fine injection.
pub fn ideal_restriction(setup: &RelaxationSetup, split: &CFSplit) -> Result<DenseMatrix> {
    let a_cf = setup
        .a_hat
        .select_rows(split.coarse())
        .select_columns(split.fine());
    let a_ff = setup
        .a_hat
        .select_rows(split.fine())
        .select_columns(split.fine());
    // -A_cf A_ff^-1 as the solution of A_ff^T X^T = -A_cf^T
    let coupling = a_ff
        .transpose()
        .solve(&a_cf.transpose().neg())?
        .transpose();
    let mut r = DenseMatrix::zeros(split.n_coarse(), split.n());
    for (c, &col) in split.coarse().iter().enumerate() {
        r[(c, col)] = real(1.0);
    }
    for (f, &col) in split.fine().iter().enumerate() {
        for c in 0..split.n_coarse() {
            r[(c, col)] = coupling[(c, f)];
        }
    }
    Ok(r)
}

/// One state of the prolongation-improvement flow. The dual stays pinned to
/// its initial value; every update is orthogonal to it, so `P^d P_tau = I` is
/// preserved along the flow.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub tau: usize,
    pub p: DenseMatrix,
    pub p_dual: DenseMatrix,
    pub q: DenseMatrix,
    pub q_dual: DenseMatrix,
    /// Per-column relaxation energies `Re(p_i^H Ahat p_i)`, one row per tau.
    pub energies: Vec<Vec<f64>>,
    /// `|Q^d T P|` per tau.
    pub residuals: Vec<f64>,
}

impl FlowState {
    pub fn new(p0: &DenseMatrix, p0_dual: &DenseMatrix, setup: &RelaxationSetup) -> Result<Self> {
        let completed = TransferBasis::from_columns(p0, p0_dual)?;
        let mut state = FlowState {
            tau: 0,
            p: completed.p,
            p_dual: completed.p_dual,
            q: completed.q,
            q_dual: completed.q_dual,
            energies: Vec::new(),
            residuals: Vec::new(),
        };
        state.record(setup)?;
        Ok(state)
    }

    fn record(&mut self, setup: &RelaxationSetup) -> Result<()> {
        self.energies.push(column_energies(&self.p, &setup.a_hat)?);
        self.residuals.push(self.fixed_point_residual(setup)?);
        Ok(())
    }

    /// `|Q_tau^d T P_tau|`, zero exactly at a flow fixed point.
    pub fn fixed_point_residual(&self, setup: &RelaxationSetup) -> Result<f64> {
        Ok(self
            .q_dual
            .matmul(&setup.t)?
            .matmul(&self.p)?
            .frobenius_norm())
    }
}

/// Relaxation energy of each column under `Ahat`.
pub fn column_energies(p: &DenseMatrix, a_hat: &DenseMatrix) -> Result<Vec<f64>> {
    let ap = a_hat.matmul(p)?;
    Ok((0..p.cols())
        .map(|j| {
            let col = p.column(j);
            let acol = ap.column(j);
            col.iter()
                .zip(acol.iter())
                .map(|(x, y)| (x.conj() * y).re)
                .sum()
        })
        .collect())
}

/// One flow update: `P <- sum_{l=0}^{k} (Qproj T)^l P` with the oblique
/// projector `Qproj = I - P P0^d`, evaluated in Horner form. Re-completes the
/// fine pair for the new state.
pub fn flow_step(state: &FlowState, setup: &RelaxationSetup, k: usize) -> Result<FlowState> {
    let n = setup.n();
    let qproj = DenseMatrix::identity(n).sub(&state.p.matmul(&state.p_dual)?)?;
    let qt = qproj.matmul(&setup.t)?;
    let mut acc = state.p.clone();
    for _ in 0..k {
        acc = state.p.add(&qt.matmul(&acc)?)?;
    }
    advance(state, setup, acc)
}

/// Large-sweep limit of the flow update:
/// `P <- P - Q (Q^d Ahat Q)^-1 Q^d Ahat P`, the projection of `P` onto the
/// relaxation-orthogonal complement of the fine subspace.
pub fn infinite_k_flow_step(state: &FlowState, setup: &RelaxationSetup) -> Result<FlowState> {
    let aq = state.q_dual.matmul(&setup.a_hat)?;
    let aqq = aq.matmul(&state.q)?;
    let x = aqq.solve(&aq.matmul(&state.p)?)?;
    let p_next = state.p.sub(&state.q.matmul(&x)?)?;
    advance(state, setup, p_next)
}

fn advance(state: &FlowState, setup: &RelaxationSetup, p_next: DenseMatrix) -> Result<FlowState> {
    let completed = TransferBasis::from_columns(&p_next, &state.p_dual)?;
    let mut next = FlowState {
        tau: state.tau + 1,
        p: completed.p,
        p_dual: completed.p_dual,
        q: completed.q,
        q_dual: completed.q_dual,
        energies: state.energies.clone(),
        residuals: state.residuals.clone(),
    };
    next.record(setup)?;
    Ok(next)
}

/// Iterate [`flow_step`] until `|Q^d T P| <= tol` or `max_tau` steps.
/// A residual growing past ten times its initial value aborts with the
/// recorded history.
pub fn flow_run(
    p0: &DenseMatrix,
    p0_dual: &DenseMatrix,
    setup: &RelaxationSetup,
    k: usize,
    max_tau: usize,
    tol: f64,
) -> Result<FlowState> {
    let mut state = FlowState::new(p0, p0_dual, setup)?;
    let initial = state.residuals[0];
    loop {
        let current = *state.residuals.last().expect("recorded on construction");
        if current <= tol || state.tau >= max_tau {
            return Ok(state);
        }
        if current > 10.0 * initial.max(f64::MIN_POSITIVE) {
            return Err(Error::FlowDiverged {
                initial,
                last: current,
                steps: state.tau,
                history: state.residuals,
            });
        }
        state = flow_step(&state, setup, k)?;
    }
}

/// Transfer operators assembled from the dominant eigenpairs of `T`.
#[derive(Clone, Debug)]
pub struct SpectralTransfer {
    /// Retained (slow) eigenvalues, decreasing magnitude.
    pub lambda_coarse: Vec<Scalar>,
    /// Eliminated (fast) eigenvalues.
    pub lambda_fine: Vec<Scalar>,
    /// `P = V_R` coarse block, `P^d = V_L` coarse block, `Q`/`Q^d` the fine
    /// blocks; biorthogonal by the eigensolver's normalization.
    pub basis: TransferBasis,
    /// Spectral restriction, the coarse block of `V_L`.
    pub restriction: DenseMatrix,
}

impl SpectralTransfer {
    /// Predicted two-grid propagator `V_R^f Lambda_f^k V_L^f`.
    pub fn predicted_propagator(&self, k: usize) -> Result<DenseMatrix> {
        let nf = self.lambda_fine.len();
        let mut lam = DenseMatrix::zeros(nf, nf);
        for (i, v) in self.lambda_fine.iter().enumerate() {
            lam[(i, i)] = v.powu(k as u32);
        }
        self.basis.q.matmul(&lam)?.matmul(&self.basis.q_dual)
    }

    /// Magnitude of the dominant eliminated eigenvalue; governs the
    /// asymptotic per-cycle factor `|lambda_fine[0]|^k`.
    pub fn asymptotic_factor(&self, k: usize) -> f64 {
        self.lambda_fine
            .first()
            .map_or(0.0, |v| v.norm().powi(k as i32))
    }
}

/// Split the spectrum of `T` at the `n_c` largest-magnitude eigenvalues and
/// build transfers from the corresponding eigenvector blocks. Refuses a tie
/// across the cut rather than perturbing it.
pub fn optimal_transfers(setup: &RelaxationSetup, n_c: usize) -> Result<SpectralTransfer> {
    let n = setup.n();
    if n_c == 0 || n_c >= n {
        return Err(Error::InvalidSplit {
            reason: format!("spectral cut {n_c} must lie strictly between 0 and {n}"),
        });
    }
    let eigen = linalg::eig(&setup.t)?;
    let above = eigen.values[n_c - 1].norm();
    let below = eigen.values[n_c].norm();
    if above <= below + 1e-10 {
        return Err(Error::SpectralTie {
            cut: n_c,
            cut_next: n_c + 1,
            above,
            below,
        });
    }
    let coarse_cols: Vec<usize> = (0..n_c).collect();
    let fine_cols: Vec<usize> = (n_c..n).collect();
    let basis = TransferBasis {
        p: eigen.right.select_columns(&coarse_cols),
        q: eigen.right.select_columns(&fine_cols),
        p_dual: eigen.left.select_rows(&coarse_cols),
        q_dual: eigen.left.select_rows(&fine_cols),
    };
    let resid = basis.residuals()?;
    if resid.max() > 1e-8 {
        return Err(Error::Defective {
            reason: format!(
                "eigenvector blocks violate biorthogonality by {:.3e}",
                resid.max()
            ),
        });
    }
    Ok(SpectralTransfer {
        lambda_coarse: eigen.values[..n_c].to_vec(),
        lambda_fine: eigen.values[n_c..].to_vec(),
        restriction: basis.p_dual.clone(),
        basis,
    })
}
