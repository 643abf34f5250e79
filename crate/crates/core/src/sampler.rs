//! Seeded random infinite heaps.
//!
//! A random heap under a Bernoulli measure is generated layer by layer by
//! running the chain of cliques ([`CliqueProcess`]). [`HeapStream`] wraps the
//! process and exposes the Cartier-Foata layers of the heap it currently
//! represents; after [`HeapStream::shift`] that heap is a residual `ξ − x`,
//! whose layers are no longer the raw clique draws and must be re-stabilised.
//!
//! # Seeding
//!
//! Generator: ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded through
//! `seed_from_u64`. Trajectory `t` of a run with master seed `s` uses
//! `s ^ splitmix64(t)`, so trajectories never share a stream and a run is
//! fully determined by `(model, command, s)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::CliqueChain;
use crate::error::{Error, Result};
use crate::trace::{Clique, Heap, HeapBuilder, IndependencePair};

/// Default cap on underlying cliques pulled per stabilisation or cut.
pub const DEFAULT_PULL_CAP: u64 = 1_000_000;

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `t` under master seed `seed`.
pub fn trajectory_seed(seed: u64, trajectory: u64) -> u64 {
    seed ^ splitmix64(trajectory)
}

pub fn trajectory_rng(seed: u64, trajectory: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trajectory_seed(seed, trajectory))
}

/// The chain of cliques `C_1, C_2, ...`, sampled by inverse CDF.
#[derive(Debug, Clone)]
pub struct CliqueProcess {
    chain: Arc<CliqueChain>,
    rng: ChaCha8Rng,
    state: Option<usize>,
    drawn: u64,
}

impl CliqueProcess {
    pub fn new(chain: Arc<CliqueChain>, rng: ChaCha8Rng) -> Self {
        CliqueProcess {
            chain,
            rng,
            state: None,
            drawn: 0,
        }
    }

    pub fn seeded(chain: Arc<CliqueChain>, seed: u64, trajectory: u64) -> Self {
        Self::new(chain, trajectory_rng(seed, trajectory))
    }

    pub fn chain(&self) -> &Arc<CliqueChain> {
        &self.chain
    }

    /// Next clique of the decomposition; never the empty clique.
    pub fn next_clique(&mut self) -> Clique {
        let u: f64 = self.rng.random();
        let next = match self.state {
            None => self.chain.sample_initial(u),
            Some(s) => self.chain.sample_next(s, u),
        };
        self.state = Some(next);
        self.drawn += 1;
        self.chain.states()[next]
    }

    /// Last drawn clique, `None` before the first draw.
    pub fn current(&self) -> Option<Clique> {
        self.state.map(|s| self.chain.states()[s])
    }

    /// Number of cliques drawn so far.
    pub fn drawn(&self) -> u64 {
        self.drawn
    }
}

/// A lazily generated infinite heap.
///
/// `emitted` holds the stable layers of the current heap produced so far and
/// `buffer` the normalised pieces pulled from the process that are not yet
/// known to be final. Their product is the materialised prefix, a left
/// divisor of the heap the stream represents.
#[derive(Debug, Clone)]
pub struct HeapStream {
    process: CliqueProcess,
    emitted: Vec<Clique>,
    buffer: HeapBuilder,
    pull_cap: u64,
}

impl HeapStream {
    pub fn new(process: CliqueProcess) -> Self {
        let buffer = HeapBuilder::new(process.chain.independence());
        HeapStream {
            process,
            emitted: Vec::new(),
            buffer,
            pull_cap: DEFAULT_PULL_CAP,
        }
    }

    pub fn seeded(chain: Arc<CliqueChain>, seed: u64, trajectory: u64) -> Self {
        Self::new(CliqueProcess::seeded(chain, seed, trajectory))
    }

    pub fn with_pull_cap(mut self, cap: u64) -> Self {
        self.pull_cap = cap;
        self
    }

    pub fn pull_cap(&self) -> u64 {
        self.pull_cap
    }

    pub fn chain(&self) -> &Arc<CliqueChain> {
        &self.process.chain
    }

    pub fn independence(&self) -> &IndependencePair {
        self.process.chain.independence()
    }

    /// Underlying cliques pulled since creation.
    pub fn pulled(&self) -> u64 {
        self.process.drawn()
    }

    /// Stable layers produced so far since the last shift.
    pub fn emitted(&self) -> &[Clique] {
        &self.emitted
    }

    /// Pulls underlying cliques until the first buffered layer is final, then
    /// moves it to the emitted layers and returns it.
    pub fn stabilized_layer(&mut self) -> Result<Clique> {
        let mut pulls = 0u64;
        while !self.buffer.first_layer_is_final() {
            if pulls >= self.pull_cap {
                return Err(Error::PullCapExceeded(self.pull_cap));
            }
            let c = self.process.next_clique();
            self.buffer.push_clique(c);
            pulls += 1;
        }
        let layer = self
            .buffer
            .pop_first_layer()
            .expect("final layer exists");
        self.emitted.push(layer);
        Ok(layer)
    }

    /// The `i`-th (0-based) layer of the current heap.
    pub fn layer(&mut self, i: usize) -> Result<Clique> {
        while self.emitted.len() <= i {
            self.stabilized_layer()?;
        }
        Ok(self.emitted[i])
    }

    /// The sub-heap formed by the first `k` layers.
    pub fn prefix(&mut self, k: usize) -> Result<Heap> {
        if k > 0 {
            self.layer(k - 1)?;
        }
        let ip = self.process.chain.independence();
        ip.heap_from_layers(self.emitted[..k].to_vec())
    }

    /// Everything pulled so far that belongs to the current heap.
    pub fn materialized_prefix(&self) -> Heap {
        let ip = self.process.chain.independence();
        let mut b = HeapBuilder::new(ip);
        for &c in &self.emitted {
            b.push_clique(c);
        }
        for &c in self.buffer.layers() {
            b.push_clique(c);
        }
        b.finish()
    }

    /// Replaces the current heap `ξ` by `ξ − cut`. The cut must divide the
    /// materialised prefix.
    pub fn shift(&mut self, cut: &Heap) -> Result<()> {
        if cut.is_empty() {
            return Ok(());
        }
        let ip = self.process.chain.independence();
        let rest = ip.residual(cut, &self.materialized_prefix())?;
        self.buffer = HeapBuilder::from_heap(ip, &rest);
        self.emitted.clear();
        Ok(())
    }

    /// Owned variant of [`shift`](Self::shift).
    pub fn shifted(mut self, cut: &Heap) -> Result<Self> {
        self.shift(cut)?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::BernoulliSpec;

    fn uniform_chain() -> Arc<CliqueChain> {
        let spec = BernoulliSpec::uniform(&IndependencePair::three_pieces()).unwrap();
        Arc::new(CliqueChain::build(&spec).unwrap())
    }

    #[test]
    fn replay_is_deterministic() {
        let chain = uniform_chain();
        let mut p1 = CliqueProcess::seeded(chain.clone(), 7, 3);
        let mut p2 = CliqueProcess::seeded(chain.clone(), 7, 3);
        let mut p3 = CliqueProcess::seeded(chain, 7, 4);
        let a: Vec<Clique> = (0..64).map(|_| p1.next_clique()).collect();
        let b: Vec<Clique> = (0..64).map(|_| p2.next_clique()).collect();
        let c: Vec<Clique> = (0..64).map(|_| p3.next_clique()).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn unshifted_stream_emits_raw_draws() {
        let chain = uniform_chain();
        let mut process = CliqueProcess::seeded(chain.clone(), 11, 0);
        let raw: Vec<Clique> = (0..200).map(|_| process.next_clique()).collect();
        let mut stream = HeapStream::seeded(chain, 11, 0);
        let layers: Vec<Clique> = (0..150).map(|_| stream.stabilized_layer().unwrap()).collect();
        assert_eq!(&raw[..150], &layers[..]);
    }

    #[test]
    fn prefix_has_requested_height() {
        let chain = uniform_chain();
        let mut stream = HeapStream::seeded(chain, 1, 0);
        assert!(stream.prefix(0).unwrap().is_empty());
        for k in [1, 5, 17] {
            assert_eq!(stream.prefix(k).unwrap().height(), k);
        }
    }

    #[test]
    fn shift_by_empty_is_identity() {
        let chain = uniform_chain();
        let mut a = HeapStream::seeded(chain.clone(), 5, 2);
        let mut b = HeapStream::seeded(chain, 5, 2);
        a.prefix(3).unwrap();
        a.shift(&Heap::empty()).unwrap();
        assert_eq!(a.prefix(20).unwrap(), b.prefix(20).unwrap());
    }

    #[test]
    fn shift_rejects_non_divisor() {
        let chain = uniform_chain();
        let ip = chain.independence().clone();
        let mut s = HeapStream::seeded(chain, 5, 2);
        s.prefix(2).unwrap();
        let huge = ip.parse_heap("cccccccccccccccccccc").unwrap();
        assert_eq!(s.shift(&huge), Err(Error::NotADivisor));
    }

    #[test]
    fn stabilization_merges_shifted_pieces() {
        // buffer [b] is not final since an a could still land beside it;
        // pulling [a] merges into layer 1, which then blocks every piece.
        let chain = uniform_chain();
        let ip = chain.independence().clone();
        let mut b = HeapBuilder::from_heap(&ip, &ip.parse_heap("b").unwrap());
        assert!(!b.first_layer_is_final());
        b.push_clique(ip.parse_heap("a").unwrap().first_layer());
        assert_eq!(ip.format_layers(&b.to_heap()), "[a·b]");
        assert!(b.first_layer_is_final());
        assert_eq!(b.pop_first_layer(), Some(ip.parse_heap("ab").unwrap().first_layer()));
    }

    #[test]
    fn pull_cap_is_enforced() {
        let chain = uniform_chain();
        let mut s = HeapStream::seeded(chain, 3, 0).with_pull_cap(0);
        assert_eq!(s.stabilized_layer(), Err(Error::PullCapExceeded(0)));
    }
}
