//! Experiment configuration: a flat key-value file with dotted sections.
//!
//! Unknown keys are hard errors so a typo cannot silently change an
//! experiment. Example:
//!
//! ```text
//! problem.kind = poisson1d
//! problem.n = 32
//! smoother.kind = jacobi
//! smoother.omega = 0.6666666666666666
//! split.strategy = every_other
//! basis.kind = canonical
//! restriction.kind = ideal
//! scheme.kind = markovian
//! scheme.k = 3
//! cycles = 10
//! seed = 42
//! ```

use relaxmg::problems::ProblemKind;
use relaxmg::relaxation::Smoother;
use relaxmg::schemes::SchemeKind;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}: {}", self.path, self.line, self.msg)
        } else {
            write!(f, "{}: {}", self.path, self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub enum SplitStrategy {
    EveryOther,
    RedBlack,
    Explicit(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisKind {
    Canonical,
    Ideal,
    Flow { max_tau: usize, tol: f64 },
    Optimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictionKind {
    PDual,
    Ideal,
    Spectral,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub smoother: Smoother,
    pub split: SplitStrategy,
    pub basis: BasisKind,
    pub restriction: RestrictionKind,
    pub scheme: SchemeKind,
    pub k: usize,
    pub cycles: usize,
    pub seed: u64,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: name.clone(),
        line: 0,
        msg: e.to_string(),
    })?;
    parse(&text, &name)
}

pub fn parse(text: &str, name: &str) -> Result<ExperimentConfig, ConfigError> {
    let err = |line: usize, msg: String| ConfigError {
        path: name.to_string(),
        line,
        msg,
    };
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(no, format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if entries.insert(key.clone(), (no, value)).is_some() {
            return Err(err(no, format!("duplicate key `{key}`")));
        }
    }

    let mut take = |key: &str| entries.remove(key);
    let required = |entry: Option<(usize, String)>, key: &str| {
        entry.ok_or_else(|| err(0, format!("missing required key `{key}`")))
    };

    let (kind_line, kind) = required(take("problem.kind"), "problem.kind")?;
    let problem = match kind.as_str() {
        "poisson1d" => {
            let (l, v) = required(take("problem.n"), "problem.n")?;
            ProblemKind::Poisson1d {
                n: parse_num(&v, l, name)?,
            }
        }
        "poisson2d" => {
            let (lx, vx) = required(take("problem.nx"), "problem.nx")?;
            let (ly, vy) = required(take("problem.ny"), "problem.ny")?;
            ProblemKind::Poisson2d {
                nx: parse_num(&vx, lx, name)?,
                ny: parse_num(&vy, ly, name)?,
            }
        }
        "advdiff1d" => {
            let (l, v) = required(take("problem.n"), "problem.n")?;
            let (lp, vp) = required(take("problem.peclet"), "problem.peclet")?;
            ProblemKind::AdvDiff1d {
                n: parse_num(&v, l, name)?,
                peclet: parse_float(&vp, lp, name)?,
            }
        }
        "file" => {
            let (_, v) = required(take("problem.path"), "problem.path")?;
            ProblemKind::CustomFile {
                path: PathBuf::from(v),
            }
        }
        other => return Err(err(kind_line, format!("unknown problem.kind `{other}`"))),
    };

    let (sm_line, sm) = required(take("smoother.kind"), "smoother.kind")?;
    let smoother = match sm.as_str() {
        "richardson" => {
            let (l, v) = required(take("smoother.omega"), "smoother.omega")?;
            Smoother::Richardson {
                omega: parse_float(&v, l, name)?,
            }
        }
        "jacobi" => {
            let (l, v) = required(take("smoother.omega"), "smoother.omega")?;
            Smoother::Jacobi {
                omega: parse_float(&v, l, name)?,
            }
        }
        "gauss_seidel" => Smoother::GaussSeidelForward,
        other => return Err(err(sm_line, format!("unknown smoother.kind `{other}`"))),
    };

    let (sp_line, sp) = required(take("split.strategy"), "split.strategy")?;
    let split = match sp.as_str() {
        "every_other" => SplitStrategy::EveryOther,
        "red_black" => SplitStrategy::RedBlack,
        "explicit" => {
            let (l, v) = required(take("split.coarse"), "split.coarse")?;
            let coarse = v
                .split(',')
                .map(|tok| parse_num(tok.trim(), l, name))
                .collect::<Result<Vec<usize>, _>>()?;
            SplitStrategy::Explicit(coarse)
        }
        other => return Err(err(sp_line, format!("unknown split.strategy `{other}`"))),
    };

    let (b_line, b) = required(take("basis.kind"), "basis.kind")?;
    let basis = match b.as_str() {
        "canonical" => BasisKind::Canonical,
        "ideal" => BasisKind::Ideal,
        "optimal" => BasisKind::Optimal,
        "flow" => {
            let max_tau = match take("basis.flow_max_tau") {
                Some((l, v)) => parse_num(&v, l, name)?,
                None => 500,
            };
            let tol = match take("basis.flow_tol") {
                Some((l, v)) => parse_float(&v, l, name)?,
                None => 1e-10,
            };
            BasisKind::Flow { max_tau, tol }
        }
        other => return Err(err(b_line, format!("unknown basis.kind `{other}`"))),
    };

    let (r_line, r) = required(take("restriction.kind"), "restriction.kind")?;
    let restriction = match r.as_str() {
        "p_dual" => RestrictionKind::PDual,
        "ideal" => RestrictionKind::Ideal,
        "spectral" => RestrictionKind::Spectral,
        other => {
            return Err(err(
                r_line,
                format!("unknown restriction.kind `{other}`"),
            ))
        }
    };

    let (sc_line, sc) = required(take("scheme.kind"), "scheme.kind")?;
    let scheme = match sc.as_str() {
        "markovian" => SchemeKind::Markovian,
        "semi_markovian" => SchemeKind::SemiMarkovian,
        "non_markovian" => SchemeKind::NonMarkovian,
        "exact" => SchemeKind::Exact,
        other => return Err(err(sc_line, format!("unknown scheme.kind `{other}`"))),
    };

    let (kl, kv) = required(take("scheme.k"), "scheme.k")?;
    let k: usize = parse_num(&kv, kl, name)?;
    if k == 0 {
        return Err(err(kl, "scheme.k must be at least 1".into()));
    }
    let (cl, cv) = required(take("cycles"), "cycles")?;
    let cycles: usize = parse_num(&cv, cl, name)?;
    let seed: u64 = match take("seed") {
        Some((l, v)) => parse_num(&v, l, name)?,
        None => 0,
    };

    if let Some((line, _)) = entries.values().next() {
        let key = entries.keys().next().unwrap().clone();
        return Err(err(*line, format!("unknown key `{key}`")));
    }

    Ok(ExperimentConfig {
        problem,
        smoother,
        split,
        basis,
        restriction,
        scheme,
        k,
        cycles,
        seed,
    })
}

fn parse_num<T: std::str::FromStr>(v: &str, line: usize, name: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError {
        path: name.to_string(),
        line,
        msg: format!("expected integer, found `{v}`"),
    })
}

fn parse_float(v: &str, line: usize, name: &str) -> Result<f64, ConfigError> {
    v.parse().map_err(|_| ConfigError {
        path: name.to_string(),
        line,
        msg: format!("expected number, found `{v}`"),
    })
}
