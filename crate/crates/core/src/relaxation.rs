//! Stationary relaxation: preconditioners, the relaxation operator
//! `Ahat = M A`, the error propagator `T = I - Ahat`, and iterate histories.

use crate::error::{Error, Result};
use crate::linalg::{real, DenseMatrix, Vector};

/// Smoother selection. The preconditioner `M` is materialized densely even
/// when it could be applied implicitly, because restriction constructions
/// need `M` and `M^-1` as explicit operators.
#[derive(Clone, Debug, PartialEq)]
pub enum Smoother {
    Richardson { omega: f64 },
    Jacobi { omega: f64 },
    GaussSeidelForward,
    Custom,
}

/// A system matrix together with its relaxation operators.
///
/// `t + a_hat == I` holds by construction: `t` is formed entrywise from
/// `a_hat`, never recomputed from `M` and `A` separately.
#[derive(Clone, Debug)]
pub struct RelaxationSetup {
    pub a: DenseMatrix,
    pub m: DenseMatrix,
    pub a_hat: DenseMatrix,
    pub t: DenseMatrix,
    pub smoother: Smoother,
    /// Whether `M` inverted cleanly; restriction reductions to standard
    /// Petrov-Galerkin form require it.
    pub m_invertible: bool,
}

pub fn build_setup(a: &DenseMatrix, smoother: Smoother) -> Result<RelaxationSetup> {
    let n = require_square(a)?;
    let m = match &smoother {
        Smoother::Richardson { omega } => DenseMatrix::identity(n).scale(real(*omega)),
        Smoother::Jacobi { omega } => {
            let mut m = DenseMatrix::zeros(n, n);
            for i in 0..n {
                let d = a[(i, i)];
                if d.norm() == 0.0 {
                    return Err(Error::ZeroDiagonal { index: i });
                }
                m[(i, i)] = real(*omega) / d;
            }
            m
        }
        Smoother::GaussSeidelForward => {
            let mut lower = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    lower[(i, j)] = a[(i, j)];
                }
            }
            lower.inverse()?
        }
        Smoother::Custom => {
            return Err(Error::InvalidProblem {
                reason: "custom smoother requires an explicit M; use build_setup_custom".into(),
            })
        }
    };
    finish_setup(a.clone(), m, smoother)
}

/// Setup from an explicitly supplied preconditioner.
pub fn build_setup_custom(a: &DenseMatrix, m: &DenseMatrix) -> Result<RelaxationSetup> {
    let n = require_square(a)?;
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "build_setup_custom",
            left_rows: n,
            left_cols: n,
            right_rows: m.rows(),
            right_cols: m.cols(),
        });
    }
    finish_setup(a.clone(), m.clone(), Smoother::Custom)
}

fn finish_setup(a: DenseMatrix, m: DenseMatrix, smoother: Smoother) -> Result<RelaxationSetup> {
    let n = a.rows();
    let a_hat = m.matmul(&a)?;
    let mut t = a_hat.neg();
    for i in 0..n {
        t[(i, i)] += real(1.0);
    }
    let m_invertible = m.inverse().is_ok();
    Ok(RelaxationSetup {
        a,
        m,
        a_hat,
        t,
        smoother,
        m_invertible,
    })
}

fn require_square(a: &DenseMatrix) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "build_setup",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: a.rows(),
            right_cols: a.rows(),
        });
    }
    Ok(a.rows())
}

impl RelaxationSetup {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Run `k` relaxation sweeps `x <- x + M (b - A x)` and record every
    /// iterate. The history holds `k + 1` vectors.
    pub fn relax(&self, b: &Vector, x0: &Vector, k: usize) -> Result<RelaxationHistory> {
        if b.len() != self.n() || x0.len() != self.n() {
            return Err(Error::DimensionMismatch {
                op: "relax",
                left_rows: self.n(),
                left_cols: self.n(),
                right_rows: b.len(),
                right_cols: x0.len(),
            });
        }
        let mut iterates = Vec::with_capacity(k + 1);
        iterates.push(x0.clone());
        let mut x = x0.clone();
        for _ in 0..k {
            let residual = b.sub(&self.a.mul_vec(&x)?)?;
            x = x.add(&self.m.mul_vec(&residual)?)?;
            iterates.push(x.clone());
        }
        Ok(RelaxationHistory {
            b: b.clone(),
            iterates,
        })
    }

    /// Preconditioned residual `M (b - A x)`; equals the next update step.
    pub fn preconditioned_residual(&self, b: &Vector, x: &Vector) -> Result<Vector> {
        self.m.mul_vec(&b.sub(&self.a.mul_vec(x)?)?)
    }
}

/// Which components an iterate-difference query returns.
#[derive(Clone, Copy, Debug)]
pub enum ComponentSelector<'a> {
    All,
    Indices(&'a [usize]),
}

/// Recorded relaxation run: right-hand side plus iterates `x^(0..=k)`.
#[derive(Clone, Debug)]
pub struct RelaxationHistory {
    pub b: Vector,
    pub iterates: Vec<Vector>,
}

impl RelaxationHistory {
    /// Number of applied sweeps.
    pub fn k(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn iterate(&self, l: usize) -> Result<&Vector> {
        self.iterates.get(l).ok_or(Error::IndexOutOfRange {
            what: "iterate",
            got: l,
            limit: self.k(),
        })
    }

    /// `x^(k) - x^(l)` restricted to the selected components, so that the
    /// error shift `e^(l) = e^(k) + (returned value)` holds exactly.
    pub fn error_shift(&self, selector: ComponentSelector, l: usize, k: usize) -> Result<Vector> {
        if l > k {
            return Err(Error::IndexOutOfRange {
                what: "shift start",
                got: l,
                limit: k,
            });
        }
        let xk = self.iterate(k)?;
        let xl = self.iterate(l)?;
        let diff = xk.sub(xl)?;
        Ok(match selector {
            ComponentSelector::All => diff,
            ComponentSelector::Indices(idx) => diff.select(idx),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;
    use crate::util::SplitMix64;

    fn poisson_dense(n: usize) -> DenseMatrix {
        problems::poisson1d(n).unwrap().to_dense()
    }

    #[test]
    fn identity_with_richardson_kills_the_propagator() {
        let setup = build_setup(&DenseMatrix::identity(4), Smoother::Richardson { omega: 1.0 }).unwrap();
        assert!(setup.t.max_abs() == 0.0);
    }

    #[test]
    fn jacobi_2x2_hand_case() {
        let a = DenseMatrix::from_real_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let setup = build_setup(&a, Smoother::Jacobi { omega: 1.0 }).unwrap();
        let ahat = DenseMatrix::from_real_rows(&[&[1.0, -0.5], &[-0.5, 1.0]]);
        let t = DenseMatrix::from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]);
        assert!(setup.a_hat.sub(&ahat).unwrap().max_abs() < 1e-15);
        assert!(setup.t.sub(&t).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn jacobi_tridiag_3_hand_case() {
        let setup = build_setup(&poisson_dense(3), Smoother::Jacobi { omega: 1.0 }).unwrap();
        let t = DenseMatrix::from_real_rows(&[&[0.0, 0.5, 0.0], &[0.5, 0.0, 0.5], &[0.0, 0.5, 0.0]]);
        assert!(setup.t.sub(&t).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn propagator_complements_relaxation_operator() {
        let setup = build_setup(&poisson_dense(9), Smoother::Jacobi { omega: 0.7 }).unwrap();
        let sum = setup.t.add(&setup.a_hat).unwrap();
        let resid = sum.sub(&DenseMatrix::identity(9)).unwrap().max_abs();
        assert!(resid < 1e-15, "T + Ahat deviates from I by {resid:.3e}");
    }

    #[test]
    fn zero_diagonal_rejected_for_jacobi() {
        let a = DenseMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 2.0]]);
        match build_setup(&a, Smoother::Jacobi { omega: 1.0 }) {
            Err(Error::ZeroDiagonal { index }) => assert_eq!(index, 0),
            other => panic!("expected zero-diagonal error, got {other:?}"),
        }
    }

    #[test]
    fn homogeneous_relaxation_follows_propagator_powers() {
        let setup = build_setup(&poisson_dense(6), Smoother::Jacobi { omega: 1.0 }).unwrap();
        let mut rng = SplitMix64::new(11);
        let v = rng.vector(6);
        let hist = setup.relax(&Vector::zeros(6), &v, 4).unwrap();
        for l in 0..=4 {
            let expect = setup.t.pow(l).unwrap().mul_vec(&v).unwrap();
            let got = hist.iterate(l).unwrap();
            assert!(got.sub(&expect).unwrap().norm() < 1e-13);
        }
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let a = poisson_dense(5);
        let setup = build_setup(&a, Smoother::Jacobi { omega: 0.9 }).unwrap();
        let mut rng = SplitMix64::new(3);
        let b = rng.vector(5);
        let x_exact = a.solve_vec(&b).unwrap();
        let hist = setup.relax(&b, &x_exact, 3).unwrap();
        for l in 0..=3 {
            let drift = hist.iterate(l).unwrap().sub(&x_exact).unwrap().norm();
            assert!(drift < 1e-13);
        }
    }

    #[test]
    fn error_propagates_through_t_powers() {
        let a = poisson_dense(8);
        let setup = build_setup(&a, Smoother::Jacobi { omega: 1.0 }).unwrap();
        let mut rng = SplitMix64::new(21);
        let b = rng.vector(8);
        let x0 = rng.vector(8);
        let x_exact = a.solve_vec(&b).unwrap();
        let hist = setup.relax(&b, &x0, 5).unwrap();
        let e0 = x_exact.sub(&x0).unwrap();
        let e5 = x_exact.sub(hist.iterate(5).unwrap()).unwrap();
        let predicted = setup.t.pow(5).unwrap().mul_vec(&e0).unwrap();
        assert!(e5.sub(&predicted).unwrap().norm() < 1e-12 * e0.norm().max(1.0));
    }

    #[test]
    fn stepwise_error_identity_holds() {
        // e^(l+1) = T e^(l) within 1e-12 relative, across sizes and sweeps
        for &n in &[8usize, 32, 64] {
            let a = poisson_dense(n);
            let setup = build_setup(&a, Smoother::Jacobi { omega: 2.0 / 3.0 }).unwrap();
            let mut rng = SplitMix64::new(n as u64);
            let b = rng.vector(n);
            let x0 = rng.vector(n);
            let x_exact = a.solve_vec(&b).unwrap();
            let hist = setup.relax(&b, &x0, 20).unwrap();
            for l in 0..20 {
                let el = x_exact.sub(hist.iterate(l).unwrap()).unwrap();
                let el1 = x_exact.sub(hist.iterate(l + 1).unwrap()).unwrap();
                let resid = el1.sub(&setup.t.mul_vec(&el).unwrap()).unwrap().norm();
                assert!(
                    resid <= 1e-12 * el.norm().max(f64::MIN_POSITIVE),
                    "n={n} l={l} resid={resid:.3e}"
                );
            }
        }
    }

    #[test]
    fn update_step_equals_preconditioned_residual_and_relaxed_error() {
        let a = poisson_dense(7);
        let setup = build_setup(&a, Smoother::Jacobi { omega: 0.8 }).unwrap();
        let mut rng = SplitMix64::new(5);
        let b = rng.vector(7);
        let x0 = rng.vector(7);
        let x_exact = a.solve_vec(&b).unwrap();
        let hist = setup.relax(&b, &x0, 4).unwrap();
        for l in 0..4 {
            let rhat = hist.iterate(l + 1).unwrap().sub(hist.iterate(l).unwrap()).unwrap();
            let mr = setup.preconditioned_residual(&b, hist.iterate(l).unwrap()).unwrap();
            assert!(rhat.sub(&mr).unwrap().norm() <= 1e-12 * rhat.norm().max(1e-300));
            let el = x_exact.sub(hist.iterate(l).unwrap()).unwrap();
            let ahat_e = setup.a_hat.mul_vec(&el).unwrap();
            assert!(rhat.sub(&ahat_e).unwrap().norm() <= 1e-12 * rhat.norm().max(1e-300));
        }
    }

    #[test]
    fn gauss_seidel_dense_m_matches_implicit_sweep() {
        let a = poisson_dense(6);
        let setup = build_setup(&a, Smoother::GaussSeidelForward).unwrap();
        let mut rng = SplitMix64::new(9);
        let r = rng.vector(6);
        // implicit forward substitution with (L + D)
        let mut implicit = Vector::zeros(6);
        for i in 0..6 {
            let mut acc = r[i];
            for j in 0..i {
                acc -= a[(i, j)] * implicit[j];
            }
            implicit[i] = acc / a[(i, i)];
        }
        let explicit = setup.m.mul_vec(&r).unwrap();
        let resid = explicit.sub(&implicit).unwrap().norm();
        assert!(resid <= 1e-12 * implicit.norm(), "resid {resid:.3e}");
    }

    #[test]
    fn error_shift_trivial_cases() {
        let a = poisson_dense(4);
        let setup = build_setup(&a, Smoother::Jacobi { omega: 1.0 }).unwrap();
        let mut rng = SplitMix64::new(13);
        let b = rng.vector(4);
        let x0 = rng.vector(4);
        let hist = setup.relax(&b, &x0, 3).unwrap();
        let zero = hist.error_shift(ComponentSelector::All, 2, 2).unwrap();
        assert!(zero.norm() == 0.0);

        // stationary history: start from the solution
        let x_exact = a.solve_vec(&b).unwrap();
        let fixed = setup.relax(&b, &x_exact, 3).unwrap();
        for l in 0..=3 {
            let s = fixed.error_shift(ComponentSelector::All, l, 3).unwrap();
            assert!(s.norm() < 1e-13);
        }
    }

    #[test]
    fn error_shift_reconstructs_earlier_error() {
        let a = poisson_dense(4);
        let setup = build_setup(&a, Smoother::Jacobi { omega: 1.0 }).unwrap();
        let mut rng = SplitMix64::new(17);
        let b = rng.vector(4);
        let x0 = rng.vector(4);
        let x_exact = a.solve_vec(&b).unwrap();
        let hist = setup.relax(&b, &x0, 3).unwrap();
        let e1 = x_exact.sub(hist.iterate(1).unwrap()).unwrap();
        let e3 = x_exact.sub(hist.iterate(3).unwrap()).unwrap();
        let shift = hist.error_shift(ComponentSelector::All, 1, 3).unwrap();
        let resid = e1.sub(&e3.add(&shift).unwrap()).unwrap().norm();
        assert!(resid <= 1e-13, "resid {resid:.3e}");

        let idx = [0usize, 2];
        let partial = hist.error_shift(ComponentSelector::Indices(&idx), 1, 3).unwrap();
        assert_eq!(partial.len(), 2);
        assert!((partial[0] - shift[0]).norm() == 0.0);
        assert!((partial[1] - shift[2]).norm() == 0.0);
    }

    #[test]
    fn error_shift_rejects_bad_indices() {
        let a = poisson_dense(3);
        let setup = build_setup(&a, Smoother::Jacobi { omega: 1.0 }).unwrap();
        let hist = setup.relax(&Vector::zeros(3), &Vector::zeros(3), 2).unwrap();
        assert!(hist.error_shift(ComponentSelector::All, 2, 1).is_err());
        assert!(hist.error_shift(ComponentSelector::All, 0, 5).is_err());
    }
}
