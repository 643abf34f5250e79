#![allow(dead_code)]

use std::sync::Arc;

use heaps_core::{BernoulliSpec, CliqueChain, IndependencePair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn t() -> IndependencePair {
    IndependencePair::three_pieces()
}

pub fn chain(spec: &BernoulliSpec) -> Arc<CliqueChain> {
    Arc::new(CliqueChain::build(spec).unwrap())
}

pub fn uniform_t() -> Arc<CliqueChain> {
    chain(&BernoulliSpec::uniform(&t()).unwrap())
}

/// Random independence pair on `n` pieces with connected dependence graph.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> IndependencePair {
    let names: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    loop {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.5) {
                    pairs.push((names[i].clone(), names[j].clone()));
                }
            }
        }
        if let Ok(ip) = IndependencePair::new(&names, &pairs) {
            return ip;
        }
    }
}

/// Scales the direction `w` to the first `t` where `h(0)` vanishes.
pub fn valid_on_ray(ip: &IndependencePair, w: &[f64]) -> BernoulliSpec {
    let h0 = |t: f64| {
        let scaled: Vec<f64> = w.iter().map(|x| x * t).collect();
        BernoulliSpec::evaluate(ip, &scaled).unwrap().h(heaps_core::Clique::EMPTY)
    };
    let max = 1.0 / w.iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, max * (1.0 - 1e-12));
    let steps = 4096;
    for k in 1..=steps {
        let t = hi * k as f64 / steps as f64;
        if h0(t) <= 0.0 {
            lo = hi * (k - 1) as f64 / steps as f64;
            hi = t;
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scaled: Vec<f64> = w.iter().map(|x| x * hi).collect();
    BernoulliSpec::evaluate(ip, &scaled).unwrap()
}

/// A random valid spec on a random monoid with `n` pieces.
pub fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> BernoulliSpec {
    let ip = random_pair(rng, n);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    valid_on_ray(&ip, &w)
}

/// `|estimate − expected|` in binomial standard errors.
pub fn binomial_z(hits: usize, n: usize, p: f64) -> f64 {
    let est = hits as f64 / n as f64;
    (est - p) / (p * (1.0 - p) / n as f64).sqrt()
}
