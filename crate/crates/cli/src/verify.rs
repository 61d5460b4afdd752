//! Invariant suites behind the `verify` subcommand: each module's standing
//! identities re-checked end to end, one pass/fail line per suite.

use relaxmg::linalg::{self, real, DenseMatrix, Vector};
use relaxmg::memory;
use relaxmg::paths::{self, PropagationGraph};
use relaxmg::problems;
use relaxmg::relaxation::{build_setup, RelaxationSetup, Smoother};
use relaxmg::schemes;
use relaxmg::splitting::{CFSplit, TransferBasis};
use relaxmg::transfer;
use relaxmg::util::SplitMix64;

pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
    pub detail: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.tol
    }
}

pub fn run_all() -> Vec<Check> {
    let mut checks = Vec::new();
    let push = |checks: &mut Vec<Check>, name, result: Result<f64, relaxmg::Error>, tol| {
        match result {
            Ok(worst) => checks.push(Check {
                name,
                worst,
                tol,
                detail: None,
            }),
            Err(e) => checks.push(Check {
                name,
                worst: f64::INFINITY,
                tol,
                detail: Some(e.to_string()),
            }),
        }
    };
    push(&mut checks, "linalg: solve/matmul round trip", linalg_round_trip(), 1e-9);
    push(&mut checks, "linalg: eigen reconstruction", eig_reconstruction(), 1e-8);
    push(&mut checks, "relaxation: error propagation identity", error_propagation(), 1e-12);
    push(&mut checks, "relaxation: update equals preconditioned residual", rhat_identity(), 1e-12);
    push(&mut checks, "relaxation: gauss-seidel dense vs implicit", gauss_seidel_forms(), 1e-12);
    push(&mut checks, "splitting: oblique projector idempotency", projector_idempotency(), 1e-12);
    push(&mut checks, "splitting: error decomposition completeness", decomposition(), 1e-13);
    push(&mut checks, "memory: coarse-grained recursion", coarse_recursion(), 1e-11);
    push(&mut checks, "memory: geometric series identity", geometric_identity(), 1e-10);
    push(&mut checks, "memory: hierarchy invariance", hierarchy_invariance(), 1e-12);
    push(&mut checks, "schemes: error ordering across schemes", scheme_ordering(), 1e-12);
    push(&mut checks, "schemes: propagators match measurements", propagator_consistency(), 1e-10);
    push(&mut checks, "schemes: standard Petrov-Galerkin reduction", standard_form(), 1e-11);
    push(&mut checks, "transfer: flow step equals effective prolongation", flow_memory_consistency(), 1e-12);
    push(&mut checks, "transfer: spectral transfers kill memory terms", optimal_no_memory(), 1e-8);
    push(&mut checks, "transfer: energy non-increase under premises", energy_monotonic(), 1e-12);
    push(&mut checks, "paths: enumeration matches matrix weights", path_duality(), 1e-12);
    push(&mut checks, "problems: generated smoothing contracts", spd_contraction(), 1.0 - 1e-9);
    push(&mut checks, "cli: identical seeds give identical reports", determinism(), 0.0);
    checks
}

type R = Result<f64, relaxmg::Error>;

fn poisson_setup(n: usize, omega: f64) -> Result<RelaxationSetup, relaxmg::Error> {
    build_setup(&problems::poisson1d(n)?.to_dense(), Smoother::Jacobi { omega })
}

fn linalg_round_trip() -> R {
    let mut worst: f64 = 0.0;
    let mut rng = SplitMix64::new(1);
    for &n in &[4usize, 16, 64] {
        let mut a = rng.matrix(n, n);
        for i in 0..n {
            a[(i, i)] += real(4.0);
        }
        let inv = a.solve(&DenseMatrix::identity(n))?;
        let eye = a.matmul(&inv)?;
        worst = worst.max(eye.sub(&DenseMatrix::identity(n))?.frobenius_norm());
    }
    Ok(worst)
}

fn eig_reconstruction() -> R {
    let mut worst: f64 = 0.0;
    for (a, _) in [
        (problems::poisson1d(24)?.to_dense(), "poisson"),
        (problems::advdiff1d(16, 2.0)?.to_dense(), "advdiff"),
    ] {
        let setup = build_setup(&a, Smoother::Jacobi { omega: 2.0 / 3.0 })?;
        let e = linalg::eig(&setup.t)?;
        let n = a.rows();
        let mut lam = DenseMatrix::zeros(n, n);
        for i in 0..n {
            lam[(i, i)] = e.values[i];
        }
        let rebuilt = e.right.matmul(&lam)?.matmul(&e.left)?;
        worst = worst
            .max(rebuilt.sub(&setup.t)?.frobenius_norm() / setup.t.frobenius_norm().max(1.0));
    }
    Ok(worst)
}

fn error_propagation() -> R {
    let mut worst: f64 = 0.0;
    for &n in &[8usize, 32, 64] {
        let a = problems::poisson1d(n)?.to_dense();
        let setup = build_setup(&a, Smoother::Jacobi { omega: 2.0 / 3.0 })?;
        let mut rng = SplitMix64::new(n as u64 + 2);
        let b = rng.vector(n);
        let x0 = rng.vector(n);
        let x_exact = a.solve_vec(&b)?;
        let hist = setup.relax(&b, &x0, 20)?;
        for l in 0..20 {
            let el = x_exact.sub(hist.iterate(l)?)?;
            let el1 = x_exact.sub(hist.iterate(l + 1)?)?;
            let resid = el1.sub(&setup.t.mul_vec(&el)?)?.norm();
            worst = worst.max(resid / el.norm().max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

fn rhat_identity() -> R {
    let n = 16;
    let setup = poisson_setup(n, 0.8)?;
    let mut rng = SplitMix64::new(3);
    let b = rng.vector(n);
    let x0 = rng.vector(n);
    let x_exact = setup.a.solve_vec(&b)?;
    let hist = setup.relax(&b, &x0, 6)?;
    let mut worst: f64 = 0.0;
    for l in 0..6 {
        let rhat = hist.iterate(l + 1)?.sub(hist.iterate(l)?)?;
        let scale = rhat.norm().max(f64::MIN_POSITIVE);
        let mr = setup.preconditioned_residual(&b, hist.iterate(l)?)?;
        worst = worst.max(rhat.sub(&mr)?.norm() / scale);
        let el = x_exact.sub(hist.iterate(l)?)?;
        worst = worst.max(rhat.sub(&setup.a_hat.mul_vec(&el)?)?.norm() / scale);
    }
    Ok(worst)
}

fn gauss_seidel_forms() -> R {
    let n = 12;
    let a = problems::poisson1d(n)?.to_dense();
    let setup = build_setup(&a, Smoother::GaussSeidelForward)?;
    let mut rng = SplitMix64::new(4);
    let r = rng.vector(n);
    let mut implicit = Vector::zeros(n);
    for i in 0..n {
        let mut acc = r[i];
        for j in 0..i {
            acc -= a[(i, j)] * implicit[j];
        }
        implicit[i] = acc / a[(i, i)];
    }
    let explicit = setup.m.mul_vec(&r)?;
    Ok(explicit.sub(&implicit)?.norm() / implicit.norm())
}

fn projector_idempotency() -> R {
    let basis = TransferBasis::random_well_conditioned(12, 5, 5)?;
    let mut worst: f64 = 0.0;
    for proj in [basis.coarse_projector()?, basis.fine_projector()?] {
        worst = worst.max(proj.matmul(&proj)?.sub(&proj)?.frobenius_norm());
    }
    Ok(worst)
}

fn decomposition() -> R {
    let basis = TransferBasis::random_well_conditioned(12, 5, 6)?;
    let mut rng = SplitMix64::new(7);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let e = rng.vector(12);
        let coarse = basis.p.mul_vec(&basis.p_dual.mul_vec(&e)?)?;
        let fine = basis.q.mul_vec(&basis.q_dual.mul_vec(&e)?)?;
        worst = worst.max(e.sub(&coarse.add(&fine)?)?.norm() / e.norm());
    }
    Ok(worst)
}

fn coarse_recursion() -> R {
    let n = 12;
    let k = 4;
    let setup = poisson_setup(n, 2.0 / 3.0)?;
    let split = CFSplit::every_other(n)?;
    let basis = TransferBasis::canonical(&split);
    let mem = memory::build_memory(&setup, &basis, &basis.p_dual, k)?;
    let mut rng = SplitMix64::new(8);
    let b = rng.vector(n);
    let x_exact = setup.a.solve_vec(&b)?;
    let y = rng.vector(split.n_coarse());
    let x0 = x_exact.sub(&basis.p.mul_vec(&y)?)?;
    let hist = setup.relax(&b, &x0, k + 1)?;
    let e_sigma: Vec<Vector> = (0..=k + 1)
        .map(|l| Ok(basis.p_dual.mul_vec(&x_exact.sub(hist.iterate(l)?)?)?))
        .collect::<Result<_, relaxmg::Error>>()?;
    let mut rhs = Vector::zeros(split.n_coarse());
    for l in 0..=k {
        rhs = rhs.add(&mem.t_coarse[l].mul_vec(&e_sigma[k - l])?)?;
    }
    Ok(rhs.sub(&e_sigma[k + 1])?.norm() / e_sigma[k + 1].norm())
}

fn geometric_identity() -> R {
    let n = 16;
    let k = 3;
    let setup = poisson_setup(n, 2.0 / 3.0)?;
    let split = CFSplit::every_other(n)?;
    let basis = TransferBasis::canonical(&split);
    let mem = memory::build_memory(&setup, &basis, &basis.p_dual, k)?;
    let nf = split.n_fine();
    let horizon = DenseMatrix::identity(nf).sub(&mem.tqq.pow(k)?)?;
    let mut series = DenseMatrix::zeros(nf, nf);
    for l in 0..k {
        series = series.add(&mem.tqq.pow(l)?)?;
    }
    let lhs = horizon.solve(&series)?;
    let aqq = basis.q_dual.matmul(&setup.a_hat)?.matmul(&basis.q)?;
    let rhs = aqq.inverse()?;
    Ok(lhs.sub(&rhs)?.frobenius_norm() / rhs.frobenius_norm())
}

fn hierarchy_invariance() -> R {
    let n = 12;
    let k = 3;
    let setup = poisson_setup(n, 2.0 / 3.0)?;
    let mut rng = SplitMix64::new(9);
    let perturbation = rng.matrix(n, n).scale(real(0.25 / (n as f64).sqrt()));
    let big_n = DenseMatrix::identity(n).add(&perturbation)?;
    let a2 = big_n.matmul(&setup.a)?;
    let m2 = setup.m.matmul(&big_n.inverse()?)?;
    let setup2 = relaxmg::relaxation::build_setup_custom(&a2, &m2)?;
    let split = CFSplit::every_other(n)?;
    let basis = TransferBasis::canonical(&split);
    let r = basis.p_dual.clone();
    let mem1 = memory::build_memory(&setup, &basis, &r, k)?;
    let mem2 = memory::build_memory(&setup2, &basis, &r, k)?;
    let mut worst = setup2.t.sub(&setup.t)?.frobenius_norm();
    for (x, y) in mem1.w.iter().zip(&mem2.w) {
        worst = worst.max(x.sub(y)?.frobenius_norm());
    }
    for (x, y) in mem1.a_sigma.iter().zip(&mem2.a_sigma) {
        worst = worst.max(x.sub(y)?.frobenius_norm());
    }
    Ok(worst)
}

fn scheme_ordering() -> R {
    let n = 32;
    let k = 3;
    let setup = poisson_setup(n, 2.0 / 3.0)?;
    let split = CFSplit::every_other(n)?;
    let basis = TransferBasis::canonical(&split);
    let r = transfer::ideal_restriction(&setup, &split)?;
    let mut rng = SplitMix64::new(10);
    let b = rng.vector(n);
    let x0 = rng.vector(n);
    let x_exact = setup.a.solve_vec(&b)?;
    let e_mark = schemes::markovian_cycle(&setup, &basis, &r, &b, &x0, k)?
        .x_new
        .sub(&x_exact)?
        .norm();
    let e_semi = schemes::semi_markovian_cycle(&setup, &basis, &r, &b, &x0, k)?
        .x_new
        .sub(&x_exact)?
        .norm();
    let e_exact = schemes::exact_cycle(&setup, &basis, &r, &b, &x0, k)?
        .x_new
        .sub(&x_exact)?
        .norm();
    Ok((e_exact - e_semi).max(e_semi - e_mark).max(0.0))
}

fn propagator_consistency() -> R {
    let n = 16;
    let k = 3;
    let setup = poisson_setup(n, 2.0 / 3.0)?;
    let split = CFSplit::every_other(n)?;
    let basis = TransferBasis::canonical(&split);
    let ideal_r = transfer::ideal_restriction(&setup, &split)?;
    let mut rng = SplitMix64::new(11);
    let b = rng.vector(n);
    let x0 = rng.vector(n);
    let x_exact = setup.a.solve_vec(&b)?;
    let e0 = x_exact.sub(&x0)?;
    let mut worst: f64 = 0.0;
    let runs: Vec<relaxmg::schemes::CycleResult> = vec![
        schemes::markovian_cycle(&setup, &basis, &basis.p_dual, &b, &x0, k)?,
        schemes::semi_markovian_cycle(&setup, &basis, &ideal_r, &b, &x0, k)?,
        schemes::non_markovian_cycle(&setup, &basis, &basis.p_dual, &b, &x0, k)?,
        schemes::exact_cycle(&setup, &basis, &basis.p_dual, &b, &x0, k)?,
    ];
    for res in &runs {
        let measured = x_exact.sub(&res.x_new)?;
        let predicted = res.e_tg.mul_vec(&e0)?;
        worst = worst.max(measured.sub(&predicted)?.norm() / e0.norm());
    }
    Ok(worst)
}

fn standard_form() -> R {
    let n = 16;
    let setup = poisson_setup(n, 2.0 / 3.0)?;
    let split = CFSplit::every_other(n)?;
    let basis = TransferBasis::canonical(&split);
    let r = basis.p_dual.clone();
    let rap = r.matmul(&setup.a_hat)?.matmul(&basis.p)?;
    let standard = schemes::standard_restriction(&r, &setup)?
        .matmul(&setup.a)?
        .matmul(&basis.p)?;
    Ok(rap.sub(&standard)?.frobenius_norm() / rap.frobenius_norm())
}

fn flow_memory_consistency() -> R {
    let n = 16;
    let k = 4;
    let setup = poisson_setup(n, 2.0 / 3.0)?;
    let split = CFSplit::every_other(n)?;
    let canon = TransferBasis::canonical(&split);
    let mem = memory::build_memory(&setup, &canon, &canon.p_dual, k)?;
    let p_eff = mem.effective_prolongation()?;
    let state = transfer::FlowState::new(&canon.p, &canon.p_dual, &setup)?;
    let next = transfer::flow_step(&state, &setup, k)?;
    Ok(next.p.sub(&p_eff)?.frobenius_norm())
}

fn optimal_no_memory() -> R {
    let setup = poisson_setup(16, 2.0 / 3.0)?;
    let st = transfer::optimal_transfers(&setup, 8)?;
    let qap = st.basis.q_dual.matmul(&setup.a_hat)?.matmul(&st.basis.p)?;
    let mut worst = qap.frobenius_norm();
    let mem = memory::build_memory(&setup, &st.basis, &st.restriction, 4)?;
    for wl in &mem.w {
        worst = worst.max(wl.frobenius_norm());
    }
    Ok(worst)
}

fn energy_monotonic() -> R {
    let setup = poisson_setup(16, 2.0 / 3.0)?;
    let mut rng = SplitMix64::new(12);
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let raw = rng.matrix(16, 9);
        let gram = raw.conj_transpose().matmul(&raw)?;
        let dual = gram.solve(&raw.conj_transpose())?;
        let ortho = TransferBasis::from_columns(&raw, &dual)?;
        let q = ortho.q;
        let qh = q.conj_transpose();
        let aqq = qh.matmul(&setup.a_hat)?.matmul(&q)?;
        let x = aqq.solve(&qh.matmul(&setup.a_hat)?)?;
        let projector = DenseMatrix::identity(16).sub(&q.matmul(&x)?)?;
        let p = rng.matrix(16, 5);
        let before = transfer::column_energies(&p, &setup.a_hat)?;
        let after = transfer::column_energies(&projector.matmul(&p)?, &setup.a_hat)?;
        for (b, a) in before.iter().zip(&after) {
            worst = worst.max(a - b);
        }
    }
    Ok(worst.max(0.0))
}

fn path_duality() -> R {
    let n = 8;
    let k = 3;
    let setup = poisson_setup(n, 2.0 / 3.0)?;
    let split = CFSplit::every_other(n)?;
    let basis = TransferBasis::canonical(&split);
    let graph = PropagationGraph::new(&setup.t, &split)?;
    let mem = memory::build_memory(&setup, &basis, &basis.p_dual, k)?;
    let mut worst: f64 = 0.0;
    for (fi, &node) in split.fine().iter().enumerate() {
        let w = paths::enumerate_fine_paths(&graph, node, k)?;
        for lag in 0..k {
            for (ci, &origin) in split.coarse().iter().enumerate() {
                let expected = mem.w[lag][(fi, ci)];
                let got = w
                    .coarse
                    .get(&(origin, lag))
                    .copied()
                    .unwrap_or(relaxmg::Scalar::new(0.0, 0.0));
                worst = worst.max((got - expected).norm());
            }
        }
    }
    Ok(worst)
}

fn spd_contraction() -> R {
    let mut worst: f64 = 0.0;
    for a in [
        problems::poisson1d(24)?.to_dense(),
        problems::poisson2d(4, 4)?.to_dense(),
    ] {
        for omega in [1.0, 2.0 / 3.0] {
            let setup = build_setup(&a, Smoother::Jacobi { omega })?;
            worst = worst.max(linalg::spectral_radius(&setup.t)?);
        }
    }
    Ok(worst)
}

fn determinism() -> R {
    let cfg = crate::config::parse(
        "problem.kind = poisson1d\nproblem.n = 16\nsmoother.kind = jacobi\nsmoother.omega = 0.6666666666666666\nsplit.strategy = every_other\nbasis.kind = canonical\nrestriction.kind = ideal\nscheme.kind = semi_markovian\nscheme.k = 3\ncycles = 6\nseed = 7\n",
        "builtin",
    )
    .map_err(|e| relaxmg::Error::InvalidProblem {
        reason: e.to_string(),
    })?;
    let exp1 = crate::experiment::build(&cfg)?;
    let exp2 = crate::experiment::build(&cfg)?;
    let r1 = crate::report::solve_csv(&crate::experiment::run_solve(&exp1)?);
    let r2 = crate::report::solve_csv(&crate::experiment::run_solve(&exp2)?);
    Ok(if r1 == r2 { 0.0 } else { 1.0 })
}
