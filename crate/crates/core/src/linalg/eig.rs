//! Dense complex eigendecomposition with left and right eigenvectors.
//!
//! Householder reduction to Hessenberg form followed by an explicit
//! shifted QR iteration (Wilkinson shift, Givens rotations) yields a Schur
//! form `A = Z S Z^H`. Right eigenvectors come from back-substitution on the
//! triangular factor; left eigenvectors are the inverse of the right basis,
//! so `V_L V_R = I` holds by construction and `A = V_R diag(lambda) V_L`
//! for diagonalizable input. Eigenvalues are sorted by decreasing magnitude.

use super::{DenseMatrix, Scalar, Vector, ONE, ZERO};
use crate::error::{Error, Result};

/// Residual tolerance for accepting a decomposition, relative to the input
/// scale. Inputs that cannot meet it are reported defective.
const EIG_RTOL: f64 = 1e-8;

pub struct Eigen {
    /// Eigenvalues, sorted by decreasing magnitude (stable order on ties).
    pub values: Vec<Scalar>,
    /// Right eigenvectors as columns, unit norm, phase-normalized.
    pub right: DenseMatrix,
    /// Left eigenvectors as rows, normalized so that `left * right = I`.
    pub left: DenseMatrix,
}

/// Full eigendecomposition of a square, diagonalizable-to-tolerance matrix.
pub fn eig(a: &DenseMatrix) -> Result<Eigen> {
    let n = require_square(a)?;
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            right: DenseMatrix::zeros(0, 0),
            left: DenseMatrix::zeros(0, 0),
        });
    }
    let (s, z) = schur(a)?;
    let values: Vec<Scalar> = (0..n).map(|i| s[(i, i)]).collect();
    let mut right = DenseMatrix::zeros(n, n);
    let s_scale = s.max_abs().max(1.0);
    for j in 0..n {
        let y = triangular_eigenvector(&s, j, s_scale);
        let v = z.mul_vec(&y)?;
        right.set_column(j, &normalize_phase(&v));
    }

    // sort columns by decreasing eigenvalue magnitude, stable
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .norm()
            .partial_cmp(&values[i].norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<Scalar> = order.iter().map(|&i| values[i]).collect();
    let right = right.select_columns(&order);

    let left = right.inverse().map_err(|_| Error::Defective {
        reason: "right eigenvector basis is singular; biorthogonal normalization impossible".into(),
    })?;

    let eigen = Eigen {
        values,
        right,
        left,
    };
    validate(a, &eigen)?;
    Ok(eigen)
}

/// Eigenvalues only (Schur diagonal), sorted by decreasing magnitude.
/// Available even for defective matrices.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Scalar>> {
    let n = require_square(a)?;
    if n == 0 {
        return Ok(vec![]);
    }
    let (s, _) = schur(a)?;
    let mut values: Vec<Scalar> = (0..n).map(|i| s[(i, i)]).collect();
    values.sort_by(|x, y| {
        y.norm()
            .partial_cmp(&x.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(values)
}

pub fn spectral_radius(a: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?.first().map_or(0.0, |v| v.norm()))
}

/// Largest singular value via the spectrum of `A^H A`.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let gram = a.conj_transpose().matmul(a)?;
    Ok(spectral_radius(&gram)?.max(0.0).sqrt())
}

fn require_square(a: &DenseMatrix) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "eig",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: a.rows(),
            right_cols: a.rows(),
        });
    }
    Ok(a.rows())
}

fn validate(a: &DenseMatrix, e: &Eigen) -> Result<()> {
    let n = a.rows();
    let scale = a.frobenius_norm().max(1.0);
    let mut lambda = DenseMatrix::zeros(n, n);
    for i in 0..n {
        lambda[(i, i)] = e.values[i];
    }
    let resid = a
        .matmul(&e.right)?
        .sub(&e.right.matmul(&lambda)?)?
        .frobenius_norm();
    if resid > EIG_RTOL * scale {
        return Err(Error::Defective {
            reason: format!("eigenpair residual {resid:.3e} exceeds {EIG_RTOL:.1e} * scale"),
        });
    }
    let biorth = e
        .left
        .matmul(&e.right)?
        .sub(&DenseMatrix::identity(n))?
        .frobenius_norm();
    if biorth > EIG_RTOL {
        return Err(Error::Defective {
            reason: format!("biorthogonality residual {biorth:.3e} exceeds {EIG_RTOL:.1e}"),
        });
    }
    Ok(())
}

/// Unitary similarity to Schur form: `A = Z S Z^H`, S upper triangular.
fn schur(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = a.rows();
    let (mut h, mut z) = hessenberg(a)?;
    if n == 1 {
        return Ok((h, z));
    }
    let eps = f64::EPSILON;
    let fallback = h.max_abs().max(f64::MIN_POSITIVE);
    let max_iters = 80 * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut m = n - 1;
    loop {
        // deflate every negligible subdiagonal in the active range
        for i in 1..=m {
            let tol = eps * (h[(i - 1, i - 1)].norm() + h[(i, i)].norm()).max(eps * fallback);
            if h[(i, i - 1)].norm() <= tol {
                h[(i, i - 1)] = ZERO;
            }
        }
        while m > 0 && h[(m, m - 1)] == ZERO {
            m -= 1;
            since_deflation = 0;
        }
        if m == 0 {
            break;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iters {
            return Err(Error::EigNoConvergence { iterations: total });
        }
        let mu = if since_deflation % 16 == 0 {
            // exceptional shift to break rare symmetric stalls
            h[(m, m)] + Scalar::new(1.5 * h[(m, m - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(&h, m)
        };
        // start of the active unreduced block containing row m
        let mut l = m;
        while l > 0 && h[(l, l - 1)] != ZERO {
            l -= 1;
        }
        qr_step(&mut h, &mut z, l, m, mu);
    }
    // clean the strictly lower triangle so callers see an exact triangle
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok((h, z))
}

/// Explicit single-shift QR sweep on the window `l..=m`, accumulated into `z`.
fn qr_step(h: &mut DenseMatrix, z: &mut DenseMatrix, l: usize, m: usize, mu: Scalar) {
    let n = h.rows();
    for i in l..=m {
        h[(i, i)] -= mu;
    }
    let mut rotations: Vec<(f64, Scalar)> = Vec::with_capacity(m - l);
    for k in l..m {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        // rows k, k+1 across the remaining columns
        for j in k..n {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = a * c + b * s;
            h[(k + 1, j)] = -a * s.conj() + b * c;
        }
        rotations.push((c, s));
    }
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let k = l + idx;
        // columns k, k+1; rows above the subdiagonal participate
        let top = (k + 2).min(n);
        for i in 0..top {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = a * c + b * s.conj();
            h[(i, k + 1)] = -a * s + b * c;
        }
        for i in 0..n {
            let a = z[(i, k)];
            let b = z[(i, k + 1)];
            z[(i, k)] = a * c + b * s.conj();
            z[(i, k + 1)] = -a * s + b * c;
        }
    }
    for i in l..=m {
        h[(i, i)] += mu;
    }
}

/// Complex Givens rotation: returns real `c >= 0` and complex `s` with
/// `c^2 + |s|^2 = 1` such that `[c s; -conj(s) c] [x; y] = [r; 0]`.
fn givens(x: Scalar, y: Scalar) -> (f64, Scalar) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let h = ax.hypot(ay);
    let phase = x / ax;
    (ax / h, y.conj() * phase / h)
}

/// Eigenvalue of the trailing 2x2 block closest to the bottom-right entry.
fn wilkinson_shift(h: &DenseMatrix, m: usize) -> Scalar {
    let a = h[(m - 1, m - 1)];
    let b = h[(m - 1, m)];
    let c = h[(m, m - 1)];
    let d = h[(m, m)];
    let half = (a - d) * Scalar::new(0.5, 0.0);
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * Scalar::new(0.5, 0.0);
    let r1 = mid + disc;
    let r2 = mid - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Householder reduction to upper Hessenberg form: `A = Z H Z^H`.
fn hessenberg(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = a.rows();
    let mut h = a.clone();
    let mut z = DenseMatrix::identity(n);
    if n < 3 {
        return Ok((h, z));
    }
    for k in 0..n - 2 {
        // reflector annihilating h[k+2.., k]
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += h[(i, k)].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v = Vector::zeros(n - k - 1);
        for i in 0..v.len() {
            v[i] = h[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vhv: f64 = v.iter().map(|w| w.norm_sqr()).sum();
        if vhv == 0.0 {
            continue;
        }
        let beta = 2.0 / vhv;
        // left: rows k+1..n, columns k..n
        for j in k..n {
            let mut dot = ZERO;
            for i in 0..v.len() {
                dot += v[i].conj() * h[(k + 1 + i, j)];
            }
            let f = dot * beta;
            for i in 0..v.len() {
                let sub = v[i] * f;
                h[(k + 1 + i, j)] -= sub;
            }
        }
        // right: columns k+1..n, all rows
        for i in 0..n {
            let mut dot = ZERO;
            for jj in 0..v.len() {
                dot += h[(i, k + 1 + jj)] * v[jj];
            }
            let f = dot * beta;
            for jj in 0..v.len() {
                let sub = f * v[jj].conj();
                h[(i, k + 1 + jj)] -= sub;
            }
        }
        // accumulate: Z <- Z * reflector
        for i in 0..n {
            let mut dot = ZERO;
            for jj in 0..v.len() {
                dot += z[(i, k + 1 + jj)] * v[jj];
            }
            let f = dot * beta;
            for jj in 0..v.len() {
                let sub = f * v[jj].conj();
                z[(i, k + 1 + jj)] -= sub;
            }
        }
        // below the subdiagonal of column k is now zero by construction
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
        h[(k + 1, k)] = alpha;
    }
    Ok((h, z))
}

/// Right eigenvector of the upper triangular `s` for the eigenvalue at
/// diagonal position `j`, by back-substitution with guarded denominators.
fn triangular_eigenvector(s: &DenseMatrix, j: usize, scale: f64) -> Vector {
    let n = s.rows();
    let lambda = s[(j, j)];
    let tiny = f64::EPSILON * scale;
    let mut y = Vector::zeros(n);
    y[j] = ONE;
    for i in (0..j).rev() {
        let mut acc = ZERO;
        for k in i + 1..=j {
            acc += s[(i, k)] * y[k];
        }
        let mut denom = s[(i, i)] - lambda;
        if denom.norm() < tiny {
            denom = Scalar::new(tiny, 0.0);
        }
        y[i] = -acc / denom;
    }
    let norm = y.norm();
    if norm > 0.0 {
        y.scale(Scalar::new(1.0 / norm, 0.0))
    } else {
        y
    }
}

/// Unit norm with the largest-magnitude component rotated to the positive
/// real axis, so real-symmetric inputs get real eigenvectors.
fn normalize_phase(v: &Vector) -> Vector {
    let norm = v.norm();
    if norm == 0.0 {
        return v.clone();
    }
    let mut best = ZERO;
    let mut best_abs = -1.0;
    for w in v.iter() {
        if w.norm() > best_abs {
            best_abs = w.norm();
            best = *w;
        }
    }
    let phase = if best == ZERO { ONE } else { best / best.norm() };
    v.scale(phase.conj() / norm)
}
