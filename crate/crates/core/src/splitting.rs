//! Coarse/fine index partitions and transfer bases with duals.
//!
//! A `TransferBasis` packages the prolongations `P` (coarse) and `Q` (fine)
//! with dual operators satisfying the normalization `P^d P = I`, `Q^d Q = I`,
//! the orthogonality `Q^d P = 0`, `P^d Q = 0`, and the completeness
//! `P P^d + Q Q^d = I`, so `P P^d` and `Q Q^d` are oblique projections onto
//! the coarse and fine subspaces.

use crate::error::{Error, Result};
use crate::linalg::{real, DenseMatrix, Scalar};
use crate::relaxation::RelaxationSetup;
use crate::util::SplitMix64;

/// Partition of `0..n` into ordered coarse and fine index sets.
#[derive(Clone, Debug, PartialEq)]
pub struct CFSplit {
    n: usize,
    coarse: Vec<usize>,
    fine: Vec<usize>,
}

impl CFSplit {
    pub fn new(n: usize, coarse: Vec<usize>) -> Result<Self> {
        let mut sorted = coarse;
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&max) = sorted.last() {
            if max >= n {
                return Err(Error::InvalidSplit {
                    reason: format!("coarse index {max} outside 0..{n}"),
                });
            }
        }
        if sorted.is_empty() {
            return Err(Error::InvalidSplit {
                reason: "coarse set is empty".into(),
            });
        }
        if sorted.len() == n {
            return Err(Error::InvalidSplit {
                reason: "fine set is empty".into(),
            });
        }
        let fine: Vec<usize> = (0..n).filter(|i| sorted.binary_search(i).is_err()).collect();
        Ok(CFSplit {
            n,
            coarse: sorted,
            fine,
        })
    }

    /// Every other point coarse, starting at index 0.
    pub fn every_other(n: usize) -> Result<Self> {
        Self::new(n, (0..n).step_by(2).collect())
    }

    /// Red-black coloring of an `nx`-by-`ny` grid; red points are coarse.
    pub fn red_black(nx: usize, ny: usize) -> Result<Self> {
        let coarse = (0..ny)
            .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
            .filter(|(ix, iy)| (ix + iy) % 2 == 0)
            .map(|(ix, iy)| iy * nx + ix)
            .collect();
        Self::new(nx * ny, coarse)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_coarse(&self) -> usize {
        self.coarse.len()
    }

    pub fn n_fine(&self) -> usize {
        self.fine.len()
    }

    pub fn coarse(&self) -> &[usize] {
        &self.coarse
    }

    pub fn fine(&self) -> &[usize] {
        &self.fine
    }
}

/// Prolongations and duals for a two-level hierarchy.
#[derive(Clone, Debug)]
pub struct TransferBasis {
    pub p: DenseMatrix,
    pub q: DenseMatrix,
    pub p_dual: DenseMatrix,
    pub q_dual: DenseMatrix,
}

/// Residuals of the duality relations, each in the Frobenius norm.
#[derive(Clone, Copy, Debug)]
pub struct BasisResiduals {
    pub p_normalization: f64,
    pub q_normalization: f64,
    pub orthogonality_qp: f64,
    pub orthogonality_pq: f64,
    pub completeness: f64,
}

impl BasisResiduals {
    pub fn max(&self) -> f64 {
        self.p_normalization
            .max(self.q_normalization)
            .max(self.orthogonality_qp)
            .max(self.orthogonality_pq)
            .max(self.completeness)
    }
}

impl TransferBasis {
    /// Canonical injection basis: `P` and `Q` select identity columns at the
    /// coarse and fine indices; duals are transposes. All invariants hold
    /// exactly.
    pub fn canonical(split: &CFSplit) -> TransferBasis {
        let eye = DenseMatrix::identity(split.n());
        let p = eye.select_columns(split.coarse());
        let q = eye.select_columns(split.fine());
        TransferBasis {
            p_dual: p.transpose(),
            q_dual: q.transpose(),
            p,
            q,
        }
    }

    /// Complete a coarse pair `(P, P^d)` with a fine pair.
    ///
    /// `Q` gets orthonormal columns spanning the range of `I - P P^d`, and
    /// `Q^d = Q^H (I - P P^d)`, which satisfies every duality relation by
    /// the projection identities.
    pub fn from_columns(p: &DenseMatrix, p_dual: &DenseMatrix) -> Result<TransferBasis> {
        let n = p.rows();
        let nc = p.cols();
        if p_dual.rows() != nc || p_dual.cols() != n {
            return Err(Error::DimensionMismatch {
                op: "basis completion",
                left_rows: n,
                left_cols: nc,
                right_rows: p_dual.rows(),
                right_cols: p_dual.cols(),
            });
        }
        if nc == 0 || nc >= n {
            return Err(Error::InvalidSplit {
                reason: format!("coarse dimension {nc} must lie strictly between 0 and {n}"),
            });
        }
        let norm_resid = p_dual
            .matmul(p)?
            .sub(&DenseMatrix::identity(nc))?
            .frobenius_norm();
        if norm_resid > 1e-10 {
            return Err(Error::BasisCompletion {
                reason: format!("P_dual * P deviates from identity by {norm_resid:.3e}"),
            });
        }
        let complement = DenseMatrix::identity(n).sub(&p.matmul(p_dual)?)?;
        let q = orthonormal_range_basis(&complement, n - nc)?;
        let q_dual = q.conj_transpose().matmul(&complement)?;
        Ok(TransferBasis {
            p: p.clone(),
            q,
            p_dual: p_dual.clone(),
            q_dual,
        })
    }

    /// Deterministic random basis with dual `P^d = (P^H P)^-1 P^H`, retrying
    /// seeds until the Gram matrix condition number is at most `1e6`.
    pub fn random_well_conditioned(n: usize, nc: usize, seed: u64) -> Result<TransferBasis> {
        let mut rng = SplitMix64::new(seed);
        for _ in 0..64 {
            let p = rng.matrix(n, nc);
            let gram = p.conj_transpose().matmul(&p)?;
            let eigs = crate::linalg::eigenvalues(&gram)?;
            let hi = eigs.first().map_or(0.0, |v| v.norm());
            let lo = eigs.last().map_or(0.0, |v| v.norm());
            if lo <= 0.0 || hi / lo > 1e6 {
                continue;
            }
            let p_dual = gram.solve(&p.conj_transpose())?;
            return Self::from_columns(&p, &p_dual);
        }
        Err(Error::BasisCompletion {
            reason: "no well-conditioned random basis found".into(),
        })
    }

    pub fn n(&self) -> usize {
        self.p.rows()
    }

    pub fn n_coarse(&self) -> usize {
        self.p.cols()
    }

    pub fn n_fine(&self) -> usize {
        self.q.cols()
    }

    pub fn residuals(&self) -> Result<BasisResiduals> {
        let nc = self.n_coarse();
        let nf = self.n_fine();
        let n = self.n();
        Ok(BasisResiduals {
            p_normalization: self
                .p_dual
                .matmul(&self.p)?
                .sub(&DenseMatrix::identity(nc))?
                .frobenius_norm(),
            q_normalization: self
                .q_dual
                .matmul(&self.q)?
                .sub(&DenseMatrix::identity(nf))?
                .frobenius_norm(),
            orthogonality_qp: self.q_dual.matmul(&self.p)?.frobenius_norm(),
            orthogonality_pq: self.p_dual.matmul(&self.q)?.frobenius_norm(),
            completeness: self
                .p
                .matmul(&self.p_dual)?
                .add(&self.q.matmul(&self.q_dual)?)?
                .sub(&DenseMatrix::identity(n))?
                .frobenius_norm(),
        })
    }

    /// Coarse projector `P P^d`.
    pub fn coarse_projector(&self) -> Result<DenseMatrix> {
        self.p.matmul(&self.p_dual)
    }

    /// Fine projector `Q Q^d`.
    pub fn fine_projector(&self) -> Result<DenseMatrix> {
        self.q.matmul(&self.q_dual)
    }
}

/// Orthonormal basis for the range of `m`, expected to have the given rank.
/// Modified Gram-Schmidt with column pivoting and a re-orthogonalization
/// pass; errors if the numerical rank falls short.
fn orthonormal_range_basis(m: &DenseMatrix, rank: usize) -> Result<DenseMatrix> {
    let n = m.rows();
    let mut work: Vec<Vec<Scalar>> = (0..m.cols())
        .map(|j| (0..n).map(|i| m[(i, j)]).collect())
        .collect();
    let scale0 = work
        .iter()
        .map(|c| col_norm(c))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale0;
    let mut basis: Vec<Vec<Scalar>> = Vec::with_capacity(rank);
    for _ in 0..rank {
        let (best, best_norm) = work
            .iter()
            .enumerate()
            .map(|(j, c)| (j, col_norm(c)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or_else(|| Error::BasisCompletion {
                reason: "complement has no columns".into(),
            })?;
        if best_norm <= tol {
            return Err(Error::BasisCompletion {
                reason: format!(
                    "complement rank {} falls short of required {rank}",
                    basis.len()
                ),
            });
        }
        let mut u = work.swap_remove(best);
        // re-orthogonalize against the collected basis before normalizing
        for prev in &basis {
            let d = dot_conj(prev, &u);
            for (ui, pi) in u.iter_mut().zip(prev) {
                *ui -= d * pi;
            }
        }
        let norm = col_norm(&u);
        if norm <= tol {
            return Err(Error::BasisCompletion {
                reason: format!(
                    "complement rank {} falls short of required {rank}",
                    basis.len()
                ),
            });
        }
        let inv = real(1.0 / norm);
        for ui in u.iter_mut() {
            *ui *= inv;
        }
        for c in work.iter_mut() {
            let d = dot_conj(&u, c);
            for (ci, ui) in c.iter_mut().zip(&u) {
                *ci -= d * ui;
            }
        }
        basis.push(u);
    }
    Ok(DenseMatrix::from_fn(n, rank, |i, j| basis[j][i]))
}

fn col_norm(c: &[Scalar]) -> f64 {
    c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn dot_conj(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Frobenius norm of `R Ahat Q`; zero certifies that the restriction rows
/// are relaxation-orthogonal to the fine subspace.
pub fn check_orthogonality_raq(
    r: &DenseMatrix,
    setup: &RelaxationSetup,
    basis: &TransferBasis,
) -> Result<f64> {
    Ok(r.matmul(&setup.a_hat)?.matmul(&basis.q)?.frobenius_norm())
}
