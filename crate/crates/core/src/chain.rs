//! The Markov chain of cliques.
//!
//! Under a Bernoulli measure the Cartier-Foata layers `C_1, C_2, ...` of a
//! random infinite heap form a homogeneous Markov chain on non-empty cliques:
//! `C_1` has law `h` restricted to non-empty cliques, and
//! `P(γ, γ′) = h(γ′) / g(γ)` whenever `γ → γ′`, with
//! `g(γ) = Σ_{γ → γ′} h(γ′)`.

use crate::error::{Error, Result};
use crate::mobius::BernoulliSpec;
use crate::trace::{Clique, IndependencePair};

const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITER: usize = 1_000_000;
const PIVOT_EPS: f64 = 1e-14;
const IDENTITY_TOL: f64 = 1e-10;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `v·M` for a row vector `v`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o += vi * m;
            }
        }
        out
    }

    /// `M·v` for a column vector `v`.
    pub fn right_mul(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(m, x)| m * x).sum())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CliqueChain {
    spec: BernoulliSpec,
    states: Vec<Clique>,
    initial: Vec<f64>,
    g: Vec<f64>,
    transition: Matrix,
    stationary: Vec<f64>,
    initial_cdf: Vec<f64>,
    row_cdf: Vec<Vec<f64>>,
}

impl CliqueChain {
    /// Builds the chain of a valid Bernoulli spec.
    pub fn build(spec: &BernoulliSpec) -> Result<Self> {
        if !spec.is_valid() {
            return Err(Error::InvalidMeasure(
                spec.violations().iter().map(|v| v.to_string()).collect(),
            ));
        }
        let ip = spec.independence();
        let (states, initial): (Vec<Clique>, Vec<f64>) = spec
            .cliques()
            .iter()
            .zip(spec.mobius())
            .filter(|(c, _)| !c.is_empty())
            .map(|(&c, &h)| (c, h))
            .unzip();
        let n = states.len();
        let g: Vec<f64> = states
            .iter()
            .map(|&from| {
                states
                    .iter()
                    .zip(&initial)
                    .filter(|(&to, _)| ip.supports(from, to))
                    .map(|(_, &h)| h)
                    .sum()
            })
            .collect();
        let mut transition = Matrix::zeros(n);
        for (i, &from) in states.iter().enumerate() {
            for (j, &to) in states.iter().enumerate() {
                if ip.supports(from, to) {
                    transition.set(i, j, initial[j] / g[i]);
                }
            }
        }
        let stationary = match stationary_direct(&transition) {
            Some(pi) if pi.iter().all(|&x| x > 0.0) => pi,
            _ => stationary_power(&transition)?,
        };
        let initial_cdf = cumulative(&initial);
        let row_cdf = (0..n).map(|i| cumulative(transition.row(i))).collect();
        Ok(CliqueChain {
            spec: spec.clone(),
            states,
            initial,
            g,
            transition,
            stationary,
            initial_cdf,
            row_cdf,
        })
    }

    pub fn spec(&self) -> &BernoulliSpec {
        &self.spec
    }

    pub fn independence(&self) -> &IndependencePair {
        self.spec.independence()
    }

    /// Non-empty cliques in canonical order.
    pub fn states(&self) -> &[Clique] {
        &self.states
    }

    pub fn state_index(&self, c: Clique) -> Option<usize> {
        self.states.iter().position(|&s| s == c)
    }

    /// Law of the first layer, `h` restricted to non-empty cliques.
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn normalization(&self) -> &[f64] {
        &self.g
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    /// Stationary probability vector `π`.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Inverse-CDF draw of the first state from `u ∈ [0,1)`.
    pub fn sample_initial(&self, u: f64) -> usize {
        inverse_cdf(&self.initial_cdf, u)
    }

    /// Inverse-CDF draw of the successor of `state`.
    pub fn sample_next(&self, state: usize, u: f64) -> usize {
        inverse_cdf(&self.row_cdf[state], u)
    }

    /// Checks `h(γ) = f(γ)·g(γ)` on every non-empty clique.
    pub fn identity_check(&self) -> IdentityReport {
        let ip = self.independence();
        let rows = self
            .states
            .iter()
            .zip(self.initial.iter().zip(&self.g))
            .map(|(&c, (&h, &g))| {
                let fg = self.spec.clique_weight(c) * g;
                IdentityRow {
                    clique: c,
                    label: ip.format_clique(c),
                    h,
                    fg,
                    holds: (h - fg).abs() <= IDENTITY_TOL,
                }
            })
            .collect();
        IdentityReport { rows }
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect()
}

fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("non-empty state space");
    let target = u * total;
    match cdf.iter().position(|&c| target < c) {
        Some(i) => i,
        // rounding: fall back to the last state with positive mass
        None => (0..cdf.len())
            .rev()
            .find(|&i| i == 0 || cdf[i] > cdf[i - 1])
            .unwrap_or(0),
    }
}

/// One line of the `h = f·g` check.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub clique: Clique,
    pub label: String,
    pub h: f64,
    pub fg: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &IdentityRow> {
        self.rows.iter().filter(|r| !r.holds)
    }
}

/// Solves `π(P − I) = 0, Σπ = 1` by Gaussian elimination with partial
/// pivoting. Returns `None` if the system is numerically singular.
pub fn stationary_direct(p: &Matrix) -> Option<Vec<f64>> {
    let n = p.size();
    // Rows of the augmented system are equations: (Pᵀ − I) with the last
    // equation replaced by the normalisation.
    let mut a = vec![vec![0.0; n + 1]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().take(n).enumerate() {
            *x = p.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < PIVOT_EPS {
            return None;
        }
        a.swap(col, pivot);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                let (top, bottom) = a.split_at_mut(r);
                for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= factor * p;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    Some(x)
}

/// Stationary vector by iterating `π ← π·P` from the uniform vector.
pub fn stationary_power(p: &Matrix) -> Result<Vec<f64>> {
    let n = p.size();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..POWER_MAX_ITER {
        let mut next = p.left_mul(&pi);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pi = next;
        if delta < POWER_TOL {
            return Ok(pi);
        }
    }
    Err(Error::NoConvergence(POWER_MAX_ITER))
}

/// `B(γ, γ′) = f(γ′)` when `γ → γ′`, 0 otherwise, over non-empty cliques.
pub fn b_matrix(spec: &BernoulliSpec) -> (Vec<Clique>, Matrix) {
    let ip = spec.independence();
    let states: Vec<Clique> = spec
        .cliques()
        .iter()
        .copied()
        .filter(|c| !c.is_empty())
        .collect();
    let mut b = Matrix::zeros(states.len());
    for (i, &from) in states.iter().enumerate() {
        for (j, &to) in states.iter().enumerate() {
            if ip.supports(from, to) {
                b.set(i, j, spec.clique_weight(to));
            }
        }
    }
    (states, b)
}

/// Spectral radius of `B` by power iteration. `B` is non-negative and
/// primitive (every clique supports itself), so the Perron root is reached
/// from any positive start vector. Works on invalid specs too, where the
/// radius differs from 1.
pub fn b_matrix_spectral_radius(spec: &BernoulliSpec) -> Result<f64> {
    let (_, b) = b_matrix(spec);
    let n = b.size();
    let mut v = vec![1.0 / n as f64; n];
    let mut radius = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w = b.right_mul(&v);
        let norm: f64 = w.iter().sum();
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // v sums to 1, so ‖Bv‖₁ is the Rayleigh-type estimate
        let converged = delta < POWER_TOL && (norm - radius).abs() < POWER_TOL;
        radius = norm;
        v = next;
        if converged {
            return Ok(radius);
        }
    }
    Err(Error::NoConvergence(POWER_MAX_ITER))
}
