//! Asynchronous stopping times on random heaps.
//!
//! An asynchronous stopping time (AST) selects a prefix `ξ_V ≤ ξ` of an
//! infinite heap in a way that only depends on what lies below the cut. They
//! are realised here as consumers of a [`HeapStream`]: the cut is computed
//! from the stable layers of the stream, and the stream is then shifted to
//! `ξ − ξ_V` so that the next cut can be taken.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::chain::CliqueChain;
use crate::error::{Error, Result};
use crate::sampler::HeapStream;
use crate::trace::{Clique, Heap, HeapBuilder, IndependencePair, Piece};

/// The built-in stopping times.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ast {
    /// Smallest prefix containing an occurrence of the piece.
    FirstHit(Piece),
    /// Cut after the first layer that is a maximal clique.
    MaxClique,
    /// `x` when `x ≤ ξ`, otherwise the whole (infinite) heap.
    FixedPrefix(Heap),
}

impl Ast {
    /// Parses `first-hit:<piece>`, `max-clique` or `prefix:<word>`.
    pub fn parse(ip: &IndependencePair, text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "max-clique" {
            return Ok(Ast::MaxClique);
        }
        if let Some(piece) = text.strip_prefix("first-hit:") {
            return Ok(Ast::FirstHit(ip.piece(piece.trim())?));
        }
        if let Some(word) = text.strip_prefix("prefix:") {
            return Ok(Ast::FixedPrefix(ip.parse_heap(word)?));
        }
        Err(Error::InvalidAst(text.to_string()))
    }

    /// Selector syntax, inverse of [`parse`](Self::parse).
    pub fn label(&self, ip: &IndependencePair) -> String {
        match self {
            Ast::FirstHit(a) => format!("first-hit:{}", ip.name(*a)),
            Ast::MaxClique => "max-clique".to_string(),
            Ast::FixedPrefix(x) => {
                let word: String = x.word().iter().map(|&p| ip.name(p)).collect::<Vec<_>>().join(".");
                format!("prefix:{word}")
            }
        }
    }

    /// Whether the AST is finite and exhaustive for every Bernoulli measure.
    pub fn is_exhaustive(&self) -> bool {
        !matches!(self, Ast::FixedPrefix(x) if !x.is_empty())
    }
}

/// A finite cut value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub heap: Heap,
    /// Stable layers of the current heap inspected to decide the cut.
    pub layers_consumed: usize,
    /// Underlying cliques drawn while deciding.
    pub pulled: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstOutcome {
    Finite(Cut),
    /// The AST returns the whole infinite heap (only `FixedPrefix`).
    Infinite { layers_consumed: usize, pulled: u64 },
}

impl AstOutcome {
    pub fn finite(self) -> Option<Cut> {
        match self {
            AstOutcome::Finite(cut) => Some(cut),
            AstOutcome::Infinite { .. } => None,
        }
    }
}

/// Downward closure of the lowest occurrence of `a` inside a layered heap,
/// i.e. the smallest sub-heap containing an `a`. `None` if `a` does not
/// occur.
pub fn first_hit_cut(ip: &IndependencePair, layers: &[Clique], a: Piece) -> Option<Heap> {
    let k = layers.iter().position(|c| c.contains(a))?;
    let mut closure = vec![Clique::EMPTY; k + 1];
    closure[k] = Clique::singleton(a);
    // dependent occurrences in distinct layers are always ordered
    let mut above = Clique::singleton(a);
    for j in (0..k).rev() {
        let kept = layers[j]
            .pieces()
            .filter(|&b| !ip.dependents(b).intersection(above).is_empty())
            .fold(Clique::EMPTY, Clique::with);
        closure[j] = kept;
        above = above.union(kept);
    }
    let mut b = HeapBuilder::new(ip);
    for c in closure {
        b.push_clique(c);
    }
    Some(b.finish())
}

/// Prefix through the first layer that is a maximal clique.
pub fn max_clique_cut(ip: &IndependencePair, layers: &[Clique]) -> Option<Heap> {
    let k = layers.iter().position(|&c| ip.is_maximal_clique(c))?;
    Some(ip.heap_from_layers(layers[..=k].to_vec()).expect("stable layers are admissible"))
}

/// Applies a stopping time to the current heap of the stream. The stream is
/// advanced (layers are materialised) but not shifted.
pub fn apply_ast(ast: &Ast, stream: &mut HeapStream) -> Result<AstOutcome> {
    let start = stream.pulled();
    let cap = stream.pull_cap();
    let ip = stream.independence().clone();
    let check_cap = |s: &HeapStream| {
        if s.pulled() - start > cap {
            Err(Error::PullCapExceeded(cap))
        } else {
            Ok(())
        }
    };
    let finite = |heap: Heap, layers_consumed: usize, s: &HeapStream| {
        AstOutcome::Finite(Cut {
            heap,
            layers_consumed,
            pulled: s.pulled() - start,
        })
    };
    match ast {
        Ast::FirstHit(a) => {
            let mut k = 0;
            while !stream.layer(k)?.contains(*a) {
                k += 1;
                check_cap(stream)?;
            }
            let heap = first_hit_cut(&ip, &stream.emitted()[..=k], *a).expect("piece occurs");
            Ok(finite(heap, k + 1, stream))
        }
        Ast::MaxClique => {
            let mut k = 0;
            while !ip.is_maximal_clique(stream.layer(k)?) {
                k += 1;
                check_cap(stream)?;
            }
            let heap = ip.heap_from_layers(stream.emitted()[..=k].to_vec())?;
            Ok(finite(heap, k + 1, stream))
        }
        Ast::FixedPrefix(x) => {
            let h = x.height();
            let prefix = stream.prefix(h)?;
            if ip.leq(x, &prefix) {
                Ok(finite(x.clone(), h, stream))
            } else {
                Ok(AstOutcome::Infinite {
                    layers_consumed: h,
                    pulled: stream.pulled() - start,
                })
            }
        }
    }
}

/// Increments `Δ_n` of the iterated stopping times. The cumulative cuts
/// `V_k = Δ_1 ··· Δ_k` are rebuilt on demand; only the last one is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSequence {
    pub increments: Vec<Heap>,
    /// `V_n` for the last finite iterate.
    pub total: Heap,
    /// Set when an infinite outcome stopped the iteration early.
    pub halted: bool,
}

impl IncrementSequence {
    /// `V_k`, with `V_0 = 0`.
    pub fn value(&self, ip: &IndependencePair, k: usize) -> Heap {
        if k == self.increments.len() {
            return self.total.clone();
        }
        let mut b = HeapBuilder::new(ip);
        for x in &self.increments[..k] {
            b.push_heap(x);
        }
        b.finish()
    }

    /// `|V_1|, ..., |V_n|`.
    pub fn cumulative_lengths(&self) -> Vec<usize> {
        self.increments
            .iter()
            .scan(0, |acc, x| {
                *acc += x.len();
                Some(*acc)
            })
            .collect()
    }
}

/// Applies the AST and shifts the stream by the cut, `n` times.
pub fn iterate_ast(ast: &Ast, stream: &mut HeapStream, n: usize) -> Result<IncrementSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    let ip = stream.independence().clone();
    let mut total = HeapBuilder::new(&ip);
    let mut increments = Vec::with_capacity(n);
    let mut halted = false;
    for _ in 0..n {
        match apply_ast(ast, stream)? {
            AstOutcome::Finite(cut) => {
                stream.shift(&cut.heap)?;
                total.push_heap(&cut.heap);
                increments.push(cut.heap);
            }
            AstOutcome::Infinite { .. } => {
                halted = true;
                break;
            }
        }
    }
    Ok(IncrementSequence {
        increments,
        total: total.finish(),
        halted,
    })
}

/// Draws `per_trajectory` successive increments on each of `trajectories`
/// independent streams. Trajectories that hit an infinite outcome contribute
/// what they produced before it.
pub fn sample_increments(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    trajectories: usize,
    per_trajectory: usize,
    seed: u64,
) -> Result<Vec<Vec<Heap>>> {
    use rayon::prelude::*;
    (0..trajectories as u64)
        .into_par_iter()
        .map(|t| {
            let mut stream = HeapStream::seeded(chain.clone(), seed, t);
            Ok(iterate_ast(ast, &mut stream, per_trajectory)?.increments)
        })
        .collect()
}

/// One conditional-probability comparison of the strong Bernoulli check.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeCell {
    /// Conditioning cut value, `None` for the unconditional estimate.
    pub condition: Option<Heap>,
    pub probe: Heap,
    pub samples: usize,
    pub hits: usize,
    pub expected: f64,
}

impl ProbeCell {
    pub fn estimate(&self) -> f64 {
        self.hits as f64 / self.samples as f64
    }

    /// Standard error under the null hypothesis `P = expected`.
    pub fn stderr(&self) -> f64 {
        (self.expected * (1.0 - self.expected) / self.samples as f64).sqrt()
    }

    /// Deviation in standard errors; exact-valued cells must match exactly.
    pub fn z(&self) -> f64 {
        let diff = self.estimate() - self.expected;
        let se = self.stderr();
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongBernoulliReport {
    pub trials: usize,
    pub sigma: f64,
    pub cells: Vec<ProbeCell>,
    /// Conditioning values dropped for lack of samples.
    pub skipped: Vec<(Heap, usize)>,
}

impl StrongBernoulliReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.z().abs() <= self.sigma)
    }
}

/// Minimum samples for a conditioning cell of the strong Bernoulli check.
pub const MIN_CELL_SAMPLES: usize = 100;

/// Estimates `P(y ≤ θ_V(ξ) | ξ_V = x)` for each probe `y`, unconditionally
/// and for the three most frequent cut values `x`, and compares each to
/// `f(y)` at `sigma` standard errors.
pub fn strong_bernoulli_check(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    probes: &[Heap],
    trials: usize,
    seed: u64,
    sigma: f64,
) -> Result<StrongBernoulliReport> {
    use rayon::prelude::*;
    let ip = chain.independence();
    let rows: Vec<(Heap, Vec<bool>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut stream = HeapStream::seeded(chain.clone(), seed, t);
            let cut = apply_ast(ast, &mut stream)?
                .finite()
                .ok_or_else(|| Error::Unsupported("strong Bernoulli check needs a finite AST".into()))?;
            stream.shift(&cut.heap)?;
            let hits = probes
                .iter()
                .map(|y| Ok(ip.leq(y, &stream.prefix(y.height())?)))
                .collect::<Result<Vec<bool>>>()?;
            Ok((cut.heap, hits))
        })
        .collect::<Result<_>>()?;

    let mut counts: HashMap<&Heap, usize> = HashMap::new();
    for (cut, _) in &rows {
        *counts.entry(cut).or_default() += 1;
    }
    let mut by_freq: Vec<(&Heap, usize)> = counts.into_iter().collect();
    by_freq.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.word().cmp(&b.0.word())));

    let spec = chain.spec();
    let cell = |condition: Option<&Heap>, (i, y): (usize, &Heap)| {
        let (samples, hits) = rows
            .iter()
            .filter(|(cut, _)| condition.is_none_or(|x| x == cut))
            .fold((0, 0), |(n, h), (_, hits)| (n + 1, h + hits[i] as usize));
        ProbeCell {
            condition: condition.cloned(),
            probe: y.clone(),
            samples,
            hits,
            expected: spec.valuation(y),
        }
    };
    let mut cells: Vec<ProbeCell> = probes.iter().enumerate().map(|p| cell(None, p)).collect();
    let mut skipped = Vec::new();
    for &(x, n) in by_freq.iter().take(3) {
        if n < MIN_CELL_SAMPLES {
            skipped.push((x.clone(), n));
            continue;
        }
        cells.extend(probes.iter().enumerate().map(|p| cell(Some(x), p)));
    }
    Ok(StrongBernoulliReport {
        trials,
        sigma,
        cells,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustivenessReport {
    pub trajectories: usize,
    pub depth: usize,
    pub max_iterations: usize,
    /// Iterations needed per covered trajectory.
    pub iterations_needed: Vec<usize>,
    pub failures: usize,
}

impl ExhaustivenessReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn mean_iterations(&self) -> f64 {
        self.iterations_needed.iter().sum::<usize>() as f64 / self.iterations_needed.len().max(1) as f64
    }

    pub fn max_needed(&self) -> usize {
        self.iterations_needed.iter().copied().max().unwrap_or(0)
    }
}

/// Checks on sampled trajectories that the height-`depth` prefix of the heap
/// is covered by some iterated cut `V_n`, `n ≤ max_iterations`. An infinite
/// outcome or an exhausted budget counts as a failure.
pub fn exhaustiveness_check(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    depth: usize,
    trajectories: usize,
    max_iterations: usize,
    seed: u64,
) -> Result<ExhaustivenessReport> {
    use rayon::prelude::*;
    let ip = chain.independence();
    let needed: Vec<Option<usize>> = (0..trajectories as u64)
        .into_par_iter()
        .map(|t| {
            let target = HeapStream::seeded(chain.clone(), seed, t).prefix(depth)?;
            let mut stream = HeapStream::seeded(chain.clone(), seed, t);
            let mut total = HeapBuilder::new(ip);
            for n in 1..=max_iterations {
                let Some(cut) = apply_ast(ast, &mut stream)?.finite() else {
                    return Ok(None);
                };
                stream.shift(&cut.heap)?;
                total.push_heap(&cut.heap);
                if total.len() >= target.len() && ip.leq(&target, &total.to_heap()) {
                    return Ok(Some(n));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    Ok(ExhaustivenessReport {
        trajectories,
        depth,
        max_iterations,
        failures: needed.iter().filter(|n| n.is_none()).count(),
        iterations_needed: needed.into_iter().flatten().collect(),
    })
}

/// Two-sample comparison of the laws of `|Δ_i|` and `|Δ_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawComparison {
    pub first: usize,
    pub second: usize,
    pub trajectories: usize,
    pub sigma: f64,
    /// `(length, count at first, count at second, z)` for every mass point
    /// with expected count at least 5.
    pub points: Vec<(usize, usize, usize, f64)>,
}

impl LawComparison {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.3.abs() <= self.sigma)
    }
}

/// Compares the empirical laws of the lengths of the `first`-th and
/// `second`-th increments (1-based) across independent trajectories.
pub fn compare_increment_laws(
    chain: &Arc<CliqueChain>,
    ast: &Ast,
    first: usize,
    second: usize,
    trajectories: usize,
    seed: u64,
    sigma: f64,
) -> Result<LawComparison> {
    if first == 0 || second == 0 {
        return Err(Error::InvalidArgument("increments are numbered from 1".into()));
    }
    let runs = sample_increments(chain, ast, trajectories, first.max(second), seed)?;
    let mut hist: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut n = 0usize;
    for inc in runs.iter().filter(|inc| inc.len() >= first.max(second)) {
        hist.entry(inc[first - 1].len()).or_default().0 += 1;
        hist.entry(inc[second - 1].len()).or_default().1 += 1;
        n += 1;
    }
    let mut points: Vec<(usize, usize, usize, f64)> = hist
        .into_iter()
        .filter(|&(_, (c1, c2))| (c1 + c2) as f64 / 2.0 >= 5.0)
        .map(|(len, (c1, c2))| {
            let p1 = c1 as f64 / n as f64;
            let p2 = c2 as f64 / n as f64;
            let pooled = (p1 + p2) / 2.0;
            let se = (pooled * (1.0 - pooled) * 2.0 / n as f64).sqrt();
            let z = if se > 0.0 { (p1 - p2) / se } else { 0.0 };
            (len, c1, c2, z)
        })
        .collect();
    points.sort_by_key(|p| p.0);
    Ok(LawComparison {
        first,
        second,
        trajectories: n,
        sigma,
        points,
    })
}

impl fmt::Display for StrongBernoulliReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cells {
            writeln!(
                f,
                "n={} hits={} est={:.6} expected={:.6} z={:.3}",
                c.samples,
                c.hits,
                c.estimate(),
                c.expected,
                c.z()
            )?;
        }
        Ok(())
    }
}
