//! Ergodic means of additive costs, their exact limits, the speedup and
//! sub-additive ratios.
//!
//! For an AST `V` with iterates `V_n`, the ergodic mean of an additive cost
//! `φ` is `⟨φ, V_n⟩ / |V_n|`. For exhaustive ASTs it converges to
//! `Σ_γ π(γ)⟨φ,γ⟩ / Σ_γ π(γ)|γ|` whatever the AST, where `π` is the invariant
//! law of the chain of cliques. Estimates are averaged over independent
//! trajectories and the standard error is the across-trajectory one.

use std::sync::Arc;

use rayon::prelude::*;

use crate::chain::CliqueChain;
use crate::error::{Error, Result};
use crate::sampler::HeapStream;
use crate::stopping::{apply_ast, Ast, AstOutcome};
use crate::trace::{Clique, Heap, HeapBuilder, IndependencePair, Piece};

/// A cost `φ: Σ → ℝ` extended additively to heaps.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    values: Vec<f64>,
}

impl CostFunction {
    /// One value per piece, in declaration order.
    pub fn new(ip: &IndependencePair, values: Vec<f64>) -> Result<Self> {
        if values.len() != ip.len() {
            return Err(Error::InvalidArgument(format!(
                "cost has {} values for {} pieces",
                values.len(),
                ip.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("cost value {v} is not finite")));
        }
        Ok(CostFunction { values })
    }

    /// The length function `⟨1, x⟩ = |x|`.
    pub fn ones(ip: &IndependencePair) -> Self {
        CostFunction {
            values: vec![1.0; ip.len()],
        }
    }

    /// `1_{a}`, counting occurrences of `a`.
    pub fn indicator(ip: &IndependencePair, a: Piece) -> Self {
        let mut values = vec![0.0; ip.len()];
        values[a.index()] = 1.0;
        CostFunction { values }
    }

    /// Parses `c=1,a=0.5`. Pieces not mentioned cost 0.
    pub fn parse(ip: &IndependencePair, text: &str) -> Result<Self> {
        let mut values = vec![0.0; ip.len()];
        let mut seen = vec![false; ip.len()];
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected <piece>=<real>, got {item:?}")))?;
            let piece = ip.piece(name.trim())?;
            if seen[piece.index()] {
                return Err(Error::InvalidArgument(format!("piece {} given twice", name.trim())));
            }
            seen[piece.index()] = true;
            values[piece.index()] = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad cost value {:?}", value.trim())))?;
        }
        if !seen.iter().any(|&s| s) {
            return Err(Error::InvalidArgument("empty cost function".into()));
        }
        CostFunction::new(ip, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, a: Piece) -> f64 {
        self.values[a.index()]
    }

    pub fn on_clique(&self, c: Clique) -> f64 {
        c.pieces().map(|a| self.value(a)).sum()
    }

    /// `⟨φ, x⟩ = Σ_a φ(a)|x|_a`.
    pub fn eval(&self, x: &Heap) -> f64 {
        x.layers().iter().map(|&c| self.on_clique(c)).sum()
    }

    fn on_counts(&self, counts: &[usize]) -> f64 {
        self.values.iter().zip(counts).map(|(v, &n)| v * n as f64).sum()
    }

    /// `a=1,c=0.5` style label listing non-zero values.
    pub fn label(&self, ip: &IndependencePair) -> String {
        let parts: Vec<String> = ip
            .pieces()
            .filter(|&a| self.value(a) != 0.0)
            .map(|a| format!("{}={}", ip.name(a), self.value(a)))
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(",")
        }
    }
}

/// Monte-Carlo estimate of an ergodic quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicReport {
    /// What was estimated, e.g. `mean[c=1]` or `height/length`.
    pub quantity: String,
    pub ast: String,
    pub n_iterations: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    /// Mean over trajectories of the value at the final iterate.
    pub estimate: f64,
    pub stderr: f64,
    /// Same estimate at iterate `n/2`, to eyeball stabilisation.
    pub midpoint_estimate: f64,
    pub exact: Option<f64>,
    /// Trajectories that reached all `n` iterations.
    pub completed_trajectories: usize,
    pub warnings: Vec<String>,
}

impl ErgodicReport {
    /// `|estimate − exact| / stderr`, if the exact value is known.
    pub fn z(&self) -> Option<f64> {
        let exact = self.exact?;
        let diff = self.estimate - exact;
        Some(if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        })
    }

    /// Whether the exact value lies within `sigma` standard errors.
    pub fn within(&self, sigma: f64) -> Option<bool> {
        self.z().map(|z| z.abs() <= sigma)
    }
}

/// Running totals of `V_n` while a trajectory is iterated.
#[derive(Debug, Clone)]
struct Snapshot {
    counts: Vec<usize>,
    length: usize,
    height: usize,
}

#[derive(Debug)]
struct Trajectory {
    mid: Option<Snapshot>,
    last: Option<Snapshot>,
    iterations: usize,
    heap: Option<Heap>,
    increments: Vec<Heap>,
}

/// Iterates the AST up to `n` times, recording `V_{n/2}` and the last finite
/// iterate. `keep` retains the final heap and the first increments.
fn run_trajectory(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    n: usize,
    seed: u64,
    t: u64,
    keep: bool,
) -> Result<Trajectory> {
    let ip = chain.independence();
    let mut stream = HeapStream::seeded(chain.clone(), seed, t);
    let mut total = HeapBuilder::new(ip);
    let mut counts = vec![0usize; ip.len()];
    let mut out = Trajectory {
        mid: None,
        last: None,
        iterations: 0,
        heap: None,
        increments: Vec::new(),
    };
    let snapshot = |counts: &[usize], total: &HeapBuilder| Snapshot {
        counts: counts.to_vec(),
        length: total.len(),
        height: total.height(),
    };
    for i in 1..=n {
        let cut = match apply_ast(ast, &mut stream)? {
            AstOutcome::Finite(cut) => cut.heap,
            AstOutcome::Infinite { .. } => break,
        };
        stream.shift(&cut)?;
        for &c in cut.layers() {
            for a in c.pieces() {
                counts[a.index()] += 1;
            }
        }
        total.push_heap(&cut);
        if keep && out.increments.len() < SPOT_CHECK_PAIRS {
            out.increments.push(cut);
        }
        out.iterations = i;
        if i == n.div_ceil(2) {
            out.mid = Some(snapshot(&counts, &total));
        }
    }
    if out.iterations > 0 {
        out.last = Some(snapshot(&counts, &total));
    }
    if keep {
        out.heap = Some(total.finish());
    }
    Ok(out)
}

fn run_all(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    n: usize,
    trajectories: usize,
    seed: u64,
    keep: bool,
) -> Result<Vec<Trajectory>> {
    if n == 0 || trajectories == 0 {
        return Err(Error::InvalidArgument(
            "iterations and trajectories must be at least 1".into(),
        ));
    }
    (0..trajectories as u64)
        .into_par_iter()
        .map(|t| run_trajectory(chain, ast, n, seed, t, keep))
        .collect()
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn report_from(
    quantity: String,
    ast: &Ast,
    ip: &IndependencePair,
    n: usize,
    seed: u64,
    runs: &[Trajectory],
    value: impl Fn(&Snapshot) -> f64,
) -> ErgodicReport {
    let finals: Vec<f64> = runs.iter().filter_map(|r| r.last.as_ref()).map(&value).collect();
    let (estimate, stderr) = mean_and_stderr(&finals);
    let completed = runs.iter().filter(|r| r.iterations == n).count();
    let mut warnings = Vec::new();
    if !ast.is_exhaustive() {
        warnings.push(format!(
            "{} is not exhaustive; the estimate need not converge to the ergodic limit",
            ast.label(ip)
        ));
    }
    if completed < runs.len() {
        warnings.push(format!(
            "{} of {} trajectories stopped early on an infinite cut",
            runs.len() - completed,
            runs.len()
        ));
    }
    if finals.len() < runs.len() {
        warnings.push(format!(
            "{} trajectories produced no finite cut and were left out",
            runs.len() - finals.len()
        ));
    }
    ErgodicReport {
        quantity,
        ast: ast.label(ip),
        n_iterations: n,
        n_trajectories: runs.len(),
        seed,
        estimate,
        stderr,
        midpoint_estimate: mean(runs.iter().filter_map(|r| r.mid.as_ref()).map(&value)),
        exact: None,
        completed_trajectories: completed,
        warnings,
    }
}

/// Estimates `M_{V,n}φ = ⟨φ, V_n⟩ / |V_n|` over independent trajectories.
/// The exact limit is attached when the AST is exhaustive.
pub fn ergodic_mean(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    phi: &CostFunction,
    n: usize,
    trajectories: usize,
    seed: u64,
) -> Result<ErgodicReport> {
    let ip = chain.independence();
    let runs = run_all(chain, ast, n, trajectories, seed, false)?;
    let mut report = report_from(
        format!("mean[{}]", phi.label(ip)),
        ast,
        ip,
        n,
        seed,
        &runs,
        |s| phi.on_counts(&s.counts) / s.length as f64,
    );
    if ast.is_exhaustive() {
        report.exact = Some(exact_limit(chain, phi));
    }
    Ok(report)
}

/// `Σ_γ π(γ)⟨φ,γ⟩ / Σ_γ π(γ)|γ|`.
pub fn exact_limit(chain: &CliqueChain, phi: &CostFunction) -> f64 {
    let num: f64 = chain
        .states()
        .iter()
        .zip(chain.stationary())
        .map(|(&c, p)| p * phi.on_clique(c))
        .sum();
    num / speedup(chain)
}

/// The speedup `ρ = Σ_γ π(γ)|γ|`, the asymptotic length per layer.
pub fn speedup(chain: &CliqueChain) -> f64 {
    chain
        .states()
        .iter()
        .zip(chain.stationary())
        .map(|(&c, p)| p * c.len() as f64)
        .sum()
}

/// Asymptotic density of each piece, in declaration order; sums to 1.
pub fn density_vector(chain: &CliqueChain) -> Vec<f64> {
    let ip = chain.independence();
    ip.pieces()
        .map(|a| exact_limit(chain, &CostFunction::indicator(ip, a)))
        .collect()
}

/// Estimates `τ(V_n) / |V_n|`, the height per piece, whose limit is `1/ρ`.
/// Supported for first-hit and max-clique cuts.
pub fn subadditive_ratio(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    n: usize,
    trajectories: usize,
    seed: u64,
) -> Result<ErgodicReport> {
    if !ast.is_exhaustive() {
        return Err(Error::Unsupported(format!(
            "sub-additive ratios need an exhaustive cut, got {}",
            ast.label(chain.independence())
        )));
    }
    let ip = chain.independence();
    let runs = run_all(chain, ast, n, trajectories, seed, false)?;
    let mut report = report_from("height/length".into(), ast, ip, n, seed, &runs, |s| {
        s.height as f64 / s.length as f64
    });
    report.exact = Some(1.0 / speedup(chain));
    Ok(report)
}

const SPOT_CHECK_PAIRS: usize = 20;
const SPOT_CHECK_TRAJECTORIES: usize = 10;

/// Like [`subadditive_ratio`] for a user function `φ`, estimating
/// `φ(V_n) / |V_n|`. Sub-additivity `φ(x·y) ≤ φ(x) + φ(y)` is spot-checked on
/// pairs of sampled cuts; violations are reported as warnings. No exact
/// value is attached.
pub fn subadditive_ratio_with<F>(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    name: &str,
    phi: F,
    n: usize,
    trajectories: usize,
    seed: u64,
) -> Result<ErgodicReport>
where
    F: Fn(&IndependencePair, &Heap) -> f64 + Sync,
{
    if !ast.is_exhaustive() {
        return Err(Error::Unsupported(format!(
            "sub-additive ratios need an exhaustive cut, got {}",
            ast.label(chain.independence())
        )));
    }
    let ip = chain.independence();
    let runs = run_all(chain, ast, n, trajectories, seed, true)?;
    let finals: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.heap.as_ref().filter(|h| !h.is_empty()))
        .map(|h| phi(ip, h) / h.len() as f64)
        .collect();
    let (estimate, stderr) = mean_and_stderr(&finals);

    let mut violations = 0;
    let mut checked = 0;
    for run in runs.iter().take(SPOT_CHECK_TRAJECTORIES) {
        let incs = &run.increments;
        for (i, x) in incs.iter().enumerate() {
            let y = &incs[(i + 1) % incs.len()];
            let xy = ip.concat(x, y);
            checked += 1;
            if phi(ip, &xy) > phi(ip, x) + phi(ip, y) + 1e-9 {
                violations += 1;
            }
        }
    }
    let mut warnings = Vec::new();
    if violations > 0 {
        warnings.push(format!(
            "{name} failed sub-additivity on {violations} of {checked} sampled pairs"
        ));
    }
    Ok(ErgodicReport {
        quantity: format!("{name}/length"),
        ast: ast.label(ip),
        n_iterations: n,
        n_trajectories: runs.len(),
        seed,
        estimate,
        stderr,
        midpoint_estimate: f64::NAN,
        exact: None,
        completed_trajectories: runs.iter().filter(|r| r.iterations == n).count(),
        warnings,
    })
}
