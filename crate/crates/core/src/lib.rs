//! Heap monoids (trace monoids) with Bernoulli measures on their boundary.
//!
//! The crate is organised bottom-up:
//!
//! * [`trace`]: pieces, independence pairs, cliques and finite heaps in
//!   Cartier-Foata normal form, with the divisibility order and its lattice
//!   operations.
//! * [`mobius`]: valuations, Möbius transforms, validity of Bernoulli
//!   measures, the Möbius polynomial and the uniform measure.
//! * [`chain`]: the Markov chain of cliques induced by a Bernoulli measure.
//! * [`sampler`]: seeded random infinite heaps as lazy streams of layers.
//! * [`stopping`]: asynchronous stopping times, shifts and iteration.
//! * [`ergodic`]: ergodic means, their exact limits, sub-additive ratios and
//!   the speedup.
//! * [`protocol`]: the two-device round protocol, used as an independent
//!   generator and closed-form oracle.

pub mod chain;
pub mod ergodic;
mod error;
pub mod mobius;
pub mod protocol;
pub mod sampler;
pub mod stopping;
pub mod trace;

pub use chain::CliqueChain;
pub use error::{Error, Result};
pub use ergodic::{CostFunction, ErgodicReport};
pub use mobius::{BernoulliSpec, MobiusPolynomial};
pub use protocol::ProtocolParams;
pub use sampler::{CliqueProcess, HeapStream};
pub use stopping::{Ast, AstOutcome, Cut, IncrementSequence};
pub use trace::{Clique, Heap, IndependencePair, Piece};
