//! Two devices sharing a synchronisation action.
//!
//! Device A performs local actions `a`, device B local actions `b`, and both
//! take part in the joint action `c`. Each round, A performs `N_a` actions
//! and B performs `N_b`, with `P(N_a = k) = λ(1−λ)^k` and
//! `P(N_b = k) = λ'(1−λ')^k`, and the round ends with a `c`. The resulting
//! infinite heap over `⟨a, b, c | ab = ba⟩` is Bernoulli with
//! `f(a) = 1−λ`, `f(b) = 1−λ'`, `f(c) = λλ'`; this module provides the
//! direct simulation and closed forms to check that against.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mobius::BernoulliSpec;
use crate::sampler::trajectory_rng;
use crate::trace::{Heap, IndependencePair, Piece};

pub const A: Piece = Piece(0);
pub const B: Piece = Piece(1);
pub const C: Piece = Piece(2);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    lambda: f64,
    lambda_prime: f64,
}

impl ProtocolParams {
    /// Both parameters must lie strictly inside `(0, 1)`.
    pub fn new(lambda: f64, lambda_prime: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("lambda'", lambda_prime)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} is not in (0, 1)")));
            }
        }
        Ok(ProtocolParams {
            lambda,
            lambda_prime,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_prime(&self) -> f64 {
        self.lambda_prime
    }

    /// Expected number of actions per round, `1 + E N_a + E N_b`.
    pub fn mean_round_length(&self) -> f64 {
        1.0 + (1.0 - self.lambda) / self.lambda + (1.0 - self.lambda_prime) / self.lambda_prime
    }
}

/// The monoid `⟨a, b, c | ab = ba⟩`.
pub fn protocol_monoid() -> IndependencePair {
    IndependencePair::three_pieces()
}

/// The word `a^{na} b^{nb} c` of one round.
pub fn round_word(na: usize, nb: usize) -> Vec<Piece> {
    let mut w = Vec::with_capacity(na + nb + 1);
    w.extend(std::iter::repeat_n(A, na));
    w.extend(std::iter::repeat_n(B, nb));
    w.push(C);
    w
}

/// Geometric draw on `{0, 1, ...}` with `P(N = k) = p(1−p)^k`.
pub fn geometric<R: Rng + ?Sized>(rng: &mut R, p: f64) -> usize {
    // 1 − U lies in (0, 1], so the logarithm is finite
    let u = 1.0 - rng.random::<f64>();
    (u.ln() / (1.0 - p).ln()).floor() as usize
}

/// The word of `rounds` consecutive rounds.
pub fn simulate_word<R: Rng + ?Sized>(params: &ProtocolParams, rounds: usize, rng: &mut R) -> Vec<Piece> {
    let mut word = Vec::new();
    for _ in 0..rounds {
        let na = geometric(rng, params.lambda);
        let nb = geometric(rng, params.lambda_prime);
        word.extend(round_word(na, nb));
    }
    word
}

/// The heap of `rounds` consecutive rounds, reproducible from `seed`.
pub fn simulate_rounds(params: &ProtocolParams, rounds: usize, seed: u64) -> Result<Heap> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be at least 1".into()));
    }
    let mut rng = trajectory_rng(seed, 0);
    let word = simulate_word(params, rounds, &mut rng);
    Ok(protocol_monoid().normalize(&word))
}

/// The Bernoulli measure generated by the protocol.
pub fn protocol_spec(params: &ProtocolParams) -> BernoulliSpec {
    let (l, lp) = (params.lambda, params.lambda_prime);
    BernoulliSpec::evaluate(&protocol_monoid(), &[1.0 - l, 1.0 - lp, l * lp])
        .expect("protocol weights lie in (0, 1)")
}

/// Asymptotic densities `(γ_a, γ_b, γ_c)` of the three actions.
pub fn round_density_gamma(params: &ProtocolParams) -> [f64; 3] {
    let (l, lp) = (params.lambda, params.lambda_prime);
    let d = l + lp - l * lp;
    [lp * (1.0 - l) / d, l * (1.0 - lp) / d, l * lp / d]
}

/// `(E|V'|_b, E|V'|_c, E|V'|)` for the first hitting time `V'` of `a`.
pub fn first_hit_a_expectations(params: &ProtocolParams) -> (f64, f64, f64) {
    let (l, lp) = (params.lambda, params.lambda_prime);
    let eb = l * (1.0 - lp) / (lp * (1.0 - l));
    let ec = l / (1.0 - l);
    let e = (l + lp - l * lp) / (lp * (1.0 - l));
    (eb, ec, e)
}

/// `P(V' = b^{l_1}·c·…·b^{l_k}·c·a)` for the first hitting time of `a`.
pub fn first_hit_a_probability(params: &ProtocolParams, runs: &[usize]) -> f64 {
    let (l, lp) = (params.lambda, params.lambda_prime);
    let k = runs.len() as i32;
    let total: usize = runs.iter().sum();
    l.powi(k) * (1.0 - l) * lp.powi(k) * (1.0 - lp).powi(total as i32)
}

/// The heap `b^{l_1}·c·…·b^{l_k}·c·a`.
pub fn first_hit_a_heap(runs: &[usize]) -> Heap {
    let mut word = Vec::new();
    for &l in runs {
        word.extend(std::iter::repeat_n(B, l));
        word.push(C);
    }
    word.push(A);
    protocol_monoid().normalize(&word)
}
