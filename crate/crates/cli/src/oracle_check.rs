//! Duality suite behind `oracle-check`: enumerated path weights against the
//! matrix-form memory operators on small chains and rings.

use relaxmg::linalg::{real, DenseMatrix, Scalar};
use relaxmg::memory;
use relaxmg::paths::{self, PropagationGraph};
use relaxmg::problems;
use relaxmg::relaxation::{build_setup, Smoother};
use relaxmg::splitting::{CFSplit, TransferBasis};
use relaxmg::util::SplitMix64;
use relaxmg::Result;

pub struct DualityCase {
    pub label: String,
    pub worst: f64,
    pub tol: f64,
}

impl DualityCase {
    pub fn passed(&self) -> bool {
        self.worst <= self.tol
    }
}

fn ring_matrix(n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = real(2.0);
        a[(i, (i + 1) % n)] = real(-1.0);
        a[(i, (i + n - 1) % n)] = real(-1.0);
    }
    a
}

pub fn run_all() -> Result<Vec<DualityCase>> {
    let mut cases = Vec::new();
    for &(n, k) in &[(6usize, 3usize), (8, 4), (8, 2)] {
        let a = problems::poisson1d(n)?.to_dense();
        cases.push(duality_case(format!("chain n={n} k={k}"), &a, n, k)?);
    }
    for &(n, k) in &[(6usize, 4usize), (8, 3)] {
        let a = ring_matrix(n);
        cases.push(duality_case(format!("ring n={n} k={k}"), &a, n, k)?);
    }
    Ok(cases)
}

fn duality_case(label: String, a: &DenseMatrix, n: usize, k: usize) -> Result<DualityCase> {
    let setup = build_setup(a, Smoother::Jacobi { omega: 2.0 / 3.0 })?;
    let split = CFSplit::every_other(n)?;
    let basis = TransferBasis::canonical(&split);
    let graph = PropagationGraph::new(&setup.t, &split)?;
    let mem = memory::build_memory(&setup, &basis, &basis.p_dual, k)?;
    let mut worst: f64 = 0.0;

    // weight-by-weight duality, including the depth-k fine block
    for (fi, &node) in split.fine().iter().enumerate() {
        let w = paths::enumerate_fine_paths(&graph, node, k)?;
        for lag in 0..k {
            for (ci, &origin) in split.coarse().iter().enumerate() {
                let expected = mem.w[lag][(fi, ci)];
                let got = w
                    .coarse
                    .get(&(origin, lag))
                    .copied()
                    .unwrap_or(Scalar::new(0.0, 0.0));
                worst = worst.max((got - expected).norm());
            }
        }
        let deep = mem.tqq.pow(k)?;
        for (fj, &origin) in split.fine().iter().enumerate() {
            let expected = deep[(fi, fj)];
            let got = w
                .fine_at_depth
                .get(&origin)
                .copied()
                .unwrap_or(Scalar::new(0.0, 0.0));
            worst = worst.max((got - expected).norm());
        }
    }

    // component-wise interpolation against the matrix form
    let mut rng = SplitMix64::new(n as u64 * 31 + k as u64);
    let history: Vec<relaxmg::Vector> = (0..k).map(|_| rng.vector(split.n_coarse())).collect();
    let matrix_form = memory::interpolate_memory(&mem, &history)?;
    let path_form = paths::componentwise_interpolation(&graph, &history, k)?;
    worst = worst.max(matrix_form.sub(&path_form)?.max_abs());

    Ok(DualityCase {
        label,
        worst,
        tol: 1e-12,
    })
}
