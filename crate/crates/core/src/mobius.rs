//! Valuations, Möbius transforms and Bernoulli-measure validity.
//!
//! A Bernoulli measure is determined by one characteristic number `p_a` per
//! piece; the valuation `f(x) = Π p_a^{|x|_a}` is the probability of the
//! cylinder of `x`. The weights define a measure iff the Möbius transform
//! `h(γ) = Σ_{γ′ ⊇ γ} (−1)^{|γ′|−|γ|} f(γ′)` vanishes on the empty clique
//! and is positive on every other clique.

use std::fmt;

use crate::error::{Error, Result};
use crate::trace::{Clique, Heap, IndependencePair};

/// Tolerance for `h(0) = 0` and for strict positivity of `h`.
pub const TOL_H: f64 = 1e-9;

const BISECTION_MAX_ITER: usize = 200;
const ROOT_TOL: f64 = 1e-12;
const ROOT_SCAN_STEPS: usize = 4096;

/// A failed validity condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub clique: Clique,
    pub label: String,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clique.is_empty() {
            write!(f, "h(0) = {} is not zero", self.value)
        } else {
            write!(f, "h({}) = {} is not positive", self.label, self.value)
        }
    }
}

/// Characteristic numbers of a candidate Bernoulli measure, with their
/// Möbius transform over all cliques.
#[derive(Debug, Clone)]
pub struct BernoulliSpec {
    ip: IndependencePair,
    weights: Vec<f64>,
    cliques: Vec<Clique>,
    mobius: Vec<f64>,
    violations: Vec<Violation>,
}

impl BernoulliSpec {
    /// Evaluates the weights without requiring validity. Only missing or
    /// out-of-range weights are errors; failed conditions are recorded in
    /// [`violations`](Self::violations).
    pub fn evaluate(ip: &IndependencePair, weights: &[f64]) -> Result<Self> {
        check_weights(ip, weights)?;
        let transform = mobius_transform(ip, weights);
        let violations = transform
            .iter()
            .filter(|&&(c, h)| {
                if c.is_empty() {
                    h.abs() > TOL_H
                } else {
                    h <= TOL_H
                }
            })
            .map(|&(c, h)| Violation {
                clique: c,
                label: ip.format_clique(c),
                value: h,
            })
            .collect();
        let (cliques, mobius) = transform.into_iter().unzip();
        Ok(BernoulliSpec {
            ip: ip.clone(),
            weights: weights.to_vec(),
            cliques,
            mobius,
            violations,
        })
    }

    /// The uniform measure: every weight equal to the smallest root of the
    /// Möbius polynomial.
    pub fn uniform(ip: &IndependencePair) -> Result<Self> {
        let p = uniform_root(ip)?;
        validate(ip, &vec![p; ip.len()])
    }

    pub fn independence(&self) -> &IndependencePair {
        &self.ip
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// All cliques in canonical order, the empty one first.
    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    /// `h` aligned with [`cliques`](Self::cliques).
    pub fn mobius(&self) -> &[f64] {
        &self.mobius
    }

    pub fn h(&self, c: Clique) -> f64 {
        self.cliques
            .iter()
            .position(|&x| x == c)
            .map(|i| self.mobius[i])
            .unwrap_or(0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// `f(x) = Π_a p_a^{|x|_a}`.
    pub fn valuation(&self, x: &Heap) -> f64 {
        x.layers().iter().map(|&c| self.clique_weight(c)).product()
    }

    /// `f(γ)` for a clique.
    pub fn clique_weight(&self, c: Clique) -> f64 {
        c.pieces().map(|p| self.weights[p.index()]).product()
    }
}

fn check_weights(ip: &IndependencePair, weights: &[f64]) -> Result<()> {
    if weights.len() < ip.len() {
        return Err(Error::MissingWeight(ip.names()[weights.len()].clone()));
    }
    if weights.len() > ip.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} pieces",
            weights.len(),
            ip.len()
        )));
    }
    for (name, &w) in ip.names().iter().zip(weights) {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::WeightOutOfRange {
                piece: name.clone(),
                value: w,
            });
        }
    }
    Ok(())
}

/// Builds the spec and rejects it unless it defines a Bernoulli measure.
pub fn validate(ip: &IndependencePair, weights: &[f64]) -> Result<BernoulliSpec> {
    let spec = BernoulliSpec::evaluate(ip, weights)?;
    if spec.is_valid() {
        Ok(spec)
    } else {
        Err(Error::InvalidMeasure(
            spec.violations.iter().map(|v| v.to_string()).collect(),
        ))
    }
}

/// Möbius transform of the valuation with the given weights, over all cliques
/// in canonical order.
pub fn mobius_transform(ip: &IndependencePair, weights: &[f64]) -> Vec<(Clique, f64)> {
    let cliques = ip.cliques();
    let f = |c: Clique| -> f64 { c.pieces().map(|p| weights[p.index()]).product() };
    cliques
        .iter()
        .map(|&c| {
            let h = cliques
                .iter()
                .filter(|&&sup| c.is_subset(sup))
                .map(|&sup| {
                    let sign = if (sup.len() - c.len()) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * f(sup)
                })
                .sum();
            (c, h)
        })
        .collect()
}

/// `μ(X) = Σ_c (−1)^{|c|} X^{|c|}` over all cliques.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobiusPolynomial {
    coeffs: Vec<i64>,
}

impl MobiusPolynomial {
    pub fn of(ip: &IndependencePair) -> Self {
        let cliques = ip.cliques();
        let degree = cliques.iter().map(|c| c.len()).max().unwrap_or(0);
        let mut coeffs = vec![0i64; degree + 1];
        for c in cliques {
            coeffs[c.len()] += if c.len() % 2 == 0 { 1 } else { -1 };
        }
        MobiusPolynomial { coeffs }
    }

    /// Coefficients, constant term first.
    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c as f64)
    }
}

impl fmt::Display for MobiusPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.unsigned_abs();
            match (k, mag) {
                (0, m) => write!(f, "{m}")?,
                (1, 1) => f.write_str("X")?,
                (1, m) => write!(f, "{m}X")?,
                (k, 1) => write!(f, "X^{k}")?,
                (k, m) => write!(f, "{m}X^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

pub fn mobius_polynomial(ip: &IndependencePair) -> MobiusPolynomial {
    MobiusPolynomial::of(ip)
}

/// The root of smallest modulus of the Möbius polynomial, which lies in
/// `(0,1)`. A grid scan locates the first sign change after `μ(0) = 1`, then
/// bisection refines it to `|μ(p)| ≤ 1e−12`.
pub fn uniform_root(ip: &IndependencePair) -> Result<f64> {
    let mu = MobiusPolynomial::of(ip);
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..ROOT_SCAN_STEPS {
        let x = i as f64 / ROOT_SCAN_STEPS as f64;
        let v = mu.eval(x);
        if v == 0.0 {
            return Ok(x);
        }
        if v < 0.0 {
            hi = Some(x);
            break;
        }
        lo = x;
    }
    let mut hi = hi.ok_or(Error::NoRootInUnitInterval)?;
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mu.eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    if mu.eval(root).abs() <= ROOT_TOL {
        Ok(root)
    } else {
        Err(Error::NoConvergence(BISECTION_MAX_ITER))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn t() -> IndependencePair {
        IndependencePair::three_pieces()
    }

    #[test]
    fn transform_on_three_pieces_equal_weights() {
        let ip = t();
        let p = 0.3;
        let spec = BernoulliSpec::evaluate(&ip, &[p, p, p]).unwrap();
        let h = |s: &str| spec.h(ip.parse_heap(s).unwrap().first_layer());
        assert_abs_diff_eq!(h("a"), p * (1.0 - p), epsilon = 1e-15);
        assert_abs_diff_eq!(h("b"), p * (1.0 - p), epsilon = 1e-15);
        assert_abs_diff_eq!(h("c"), p, epsilon = 1e-15);
        assert_abs_diff_eq!(h("ab"), p * p, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.h(Clique::EMPTY), 1.0 - 3.0 * p + p * p, epsilon = 1e-15);
    }

    #[test]
    fn transform_on_free_monoid() {
        let ip = IndependencePair::new::<_, &str>(&["a", "b"], &[]).unwrap();
        let spec = BernoulliSpec::evaluate(&ip, &[0.2, 0.7]).unwrap();
        assert_abs_diff_eq!(spec.mobius()[0], 1.0 - 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.mobius()[1], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.mobius()[2], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn protocol_weights_are_valid() {
        let ip = t();
        for &(l, lp) in &[(0.5, 0.5), (0.3, 0.6), (0.9, 0.05)] {
            let w = [1.0 - l, 1.0 - lp, l * lp];
            let spec = validate(&ip, &w).unwrap();
            assert!(spec.h(Clique::EMPTY).abs() < 1e-15);
        }
    }

    #[test]
    fn half_weights_are_invalid() {
        let ip = t();
        let spec = BernoulliSpec::evaluate(&ip, &[0.5, 0.5, 0.5]).unwrap();
        assert!(!spec.is_valid());
        assert_abs_diff_eq!(spec.h(Clique::EMPTY), -0.25, epsilon = 1e-15);
        assert_eq!(spec.violations().len(), 1);
        assert!(matches!(validate(&ip, &[0.5, 0.5, 0.5]), Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn weight_errors() {
        let ip = t();
        assert!(matches!(
            BernoulliSpec::evaluate(&ip, &[0.5, 0.5]),
            Err(Error::MissingWeight(_))
        ));
        assert!(matches!(
            BernoulliSpec::evaluate(&ip, &[0.5, 0.0, 0.5]),
            Err(Error::WeightOutOfRange { .. })
        ));
        assert!(matches!(
            BernoulliSpec::evaluate(&ip, &[0.5, 1.0, 0.5]),
            Err(Error::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn polynomials() {
        assert_eq!(mobius_polynomial(&t()).coefficients(), &[1, -3, 1]);
        assert_eq!(mobius_polynomial(&t()).to_string(), "1 - 3X + X^2");
        let free = IndependencePair::free(5).unwrap();
        assert_eq!(mobius_polynomial(&free).coefficients(), &[1, -5]);
        let square = IndependencePair::new(&["a", "b", "c", "d"], &[("a", "c"), ("b", "d")]).unwrap();
        assert_eq!(mobius_polynomial(&square).coefficients(), &[1, -4, 2]);
    }

    #[test]
    fn uniform_roots() {
        let golden = (3.0 - 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(uniform_root(&t()).unwrap(), golden, epsilon = 1e-9);
        for n in 2..6 {
            let free = IndependencePair::free(n).unwrap();
            assert_abs_diff_eq!(uniform_root(&free).unwrap(), 1.0 / n as f64, epsilon = 1e-12);
        }
        let square = IndependencePair::new(&["a", "b", "c", "d"], &[("a", "c"), ("b", "d")]).unwrap();
        // roots of 1 − 4X + 2X² are 1 ± √2/2
        assert_abs_diff_eq!(uniform_root(&square).unwrap(), 1.0 - 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn uniform_spec_is_valid() {
        let spec = BernoulliSpec::uniform(&t()).unwrap();
        assert!(spec.is_valid());
        assert!(spec.h(Clique::EMPTY).abs() <= 1e-9);
    }

    #[test]
    fn valuation_examples() {
        let ip = t();
        let spec = validate(&ip, &[0.5, 0.5, 0.25]).unwrap();
        assert_eq!(spec.valuation(&Heap::empty()), 1.0);
        assert_eq!(spec.valuation(&ip.parse_heap("c").unwrap()), 0.25);
        let x = ip.parse_heap("acab").unwrap();
        assert_abs_diff_eq!(spec.valuation(&x), 0.5 * 0.5 * 0.5 * 0.25, epsilon = 1e-15);
    }
}
