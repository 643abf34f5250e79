//! Möbius transforms, validity and the chain of cliques on random and worked
//! examples.

mod common;

use approx::assert_abs_diff_eq;
use common::*;
use heaps_core::chain::{b_matrix_spectral_radius, stationary_power};
use heaps_core::mobius::{mobius_polynomial, mobius_transform, uniform_root, validate};
use heaps_core::protocol::{protocol_spec, round_density_gamma};
use heaps_core::{BernoulliSpec, Clique, IndependencePair, ProtocolParams};
use rand::Rng;

/// Subsets of the alphabet that are pairwise independent, from bitmasks.
fn brute_cliques(ip: &IndependencePair) -> Vec<Clique> {
    let n = ip.len();
    (0u32..1 << n)
        .map(Clique::from_bits)
        .filter(|c| {
            let ps: Vec<_> = c.pieces().collect();
            ps.iter()
                .enumerate()
                .all(|(i, &a)| ps[i + 1..].iter().all(|&b| ip.is_independent(a, b)))
        })
        .collect()
}

fn brute_h(ip: &IndependencePair, w: &[f64], c: Clique) -> f64 {
    brute_cliques(ip)
        .into_iter()
        .filter(|d| c.is_subset(*d))
        .map(|d| {
            let sign = if (d.len() - c.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * d.pieces().map(|a| w[a.index()]).product::<f64>()
        })
        .sum()
}

#[test]
fn mobius_transform_matches_brute_force() {
    let mut r = rng(1);
    for n in 2..=4 {
        for _ in 0..20 {
            let ip = random_pair(&mut r, n);
            let w: Vec<f64> = (0..n).map(|_| r.random_range(0.01..0.99)).collect();
            let h = mobius_transform(&ip, &w);
            let mut cliques: Vec<Clique> = h.iter().map(|(c, _)| *c).collect();
            let mut brute = brute_cliques(&ip);
            cliques.sort_by_key(|c| c.bits());
            brute.sort_by_key(|c| c.bits());
            assert_eq!(cliques, brute);
            for (c, v) in h {
                assert_abs_diff_eq!(v, brute_h(&ip, &w, c), epsilon = 1e-12);
            }
            let poly = mobius_polynomial(&ip);
            for k in 0..=poly.degree() {
                let count = brute.iter().filter(|c| c.len() == k).count() as i64;
                let sign = if k % 2 == 0 { 1 } else { -1 };
                assert_eq!(poly.coefficients()[k], sign * count);
            }
        }
    }
}

#[test]
fn uniform_measure_is_valid_on_random_monoids() {
    let mut r = rng(2);
    for n in [2, 3, 4, 5, 5] {
        let ip = random_pair(&mut r, n);
        let p = uniform_root(&ip).unwrap();
        assert!(mobius_polynomial(&ip).eval(p).abs() <= 1e-12);
        let spec = validate(&ip, &vec![p; n]).unwrap();
        assert!(spec.is_valid());
        // smallest root: the polynomial stays positive below it
        for k in 0..100 {
            assert!(mobius_polynomial(&ip).eval(p * k as f64 / 100.0) > 0.0);
        }
    }
}

#[test]
fn uniform_three_pieces_root_is_golden() {
    let p = uniform_root(&t()).unwrap();
    assert_abs_diff_eq!(p, (3.0 - 5f64.sqrt()) / 2.0, epsilon = 1e-12);
    assert_eq!(mobius_polynomial(&t()).coefficients(), &[1, -3, 1]);
}

#[test]
fn protocol_spec_is_always_valid() {
    let mut r = rng(3);
    for _ in 0..50 {
        let p = ProtocolParams::new(r.random_range(0.01..0.99), r.random_range(0.01..0.99)).unwrap();
        let spec = protocol_spec(&p);
        assert!(spec.is_valid(), "{:?}", spec.violations());
        assert!(spec.h(Clique::EMPTY).abs() < 1e-15);
    }
}

#[test]
fn random_valid_specs_give_consistent_chains() {
    let mut r = rng(4);
    for n in 2..=5 {
        for _ in 0..10 {
            let spec = random_spec(&mut r, n);
            assert!(spec.is_valid(), "{:?}", spec.violations());
            let c = chain(&spec);
            let ip = spec.independence();
            let pmat = c.transition();
            assert_abs_diff_eq!(c.initial().iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            for (i, &from) in c.states().iter().enumerate() {
                assert_abs_diff_eq!(pmat.row(i).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                for (j, &to) in c.states().iter().enumerate() {
                    assert_eq!(pmat.get(i, j) > 0.0, ip.supports(from, to));
                }
            }
            let pi = c.stationary();
            assert_abs_diff_eq!(pi.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            for (a, b) in pmat.left_mul(pi).iter().zip(pi) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
            for (a, b) in stationary_power(pmat).unwrap().iter().zip(pi) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
            assert!(c.identity_check().holds());
            assert_abs_diff_eq!(b_matrix_spectral_radius(&spec).unwrap(), 1.0, epsilon = 1e-8);
        }
    }
}

#[test]
fn protocol_chain_matches_closed_forms() {
    let mut r = rng(5);
    for _ in 0..10 {
        let (l, lp) = (r.random_range(0.01..0.99), r.random_range(0.01..0.99));
        let c = chain(&protocol_spec(&ProtocolParams::new(l, lp).unwrap()));
        let ip = c.independence();
        let names: Vec<String> = c.states().iter().map(|&s| ip.format_clique(s)).collect();
        assert_eq!(names, ["a", "b", "c", "a·b"]);
        let last = [lp * (1.0 - l), l * (1.0 - lp), l * lp, (1.0 - l) * (1.0 - lp)];
        let expected = [
            [1.0 - l, 0.0, l, 0.0],
            [0.0, 1.0 - lp, lp, 0.0],
            last,
            last,
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert_abs_diff_eq!(c.transition().get(i, j), e, epsilon = 1e-12);
            }
        }
        let d = l * l + lp * lp - l * lp * (l + lp - 1.0);
        let pi = [
            (1.0 - l) * lp * lp / d,
            (1.0 - lp) * l * l / d,
            l * lp * (l + lp - l * lp) / d,
            l * lp * (1.0 - l) * (1.0 - lp) / d,
        ];
        for (a, b) in c.stationary().iter().zip(pi) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
        let gamma = round_density_gamma(&ProtocolParams::new(l, lp).unwrap());
        for (a, b) in heaps_core::ergodic::density_vector(&c).iter().zip(gamma) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
    }
}

#[test]
fn uniform_chain_matches_closed_form() {
    let c = uniform_t();
    let p = (3.0 - 5f64.sqrt()) / 2.0;
    let expected = [p, p, 2.0 - 3.0 * p, 3.0 * p - 1.0].map(|x| x / (2.0 * p + 1.0));
    for (a, b) in c.stationary().iter().zip(expected) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
    }
}

#[test]
fn invalid_specs_are_rejected_with_reasons() {
    let ip = t();
    let spec = BernoulliSpec::evaluate(&ip, &[0.5, 0.5, 0.5]).unwrap();
    assert!(!spec.is_valid());
    assert!(heaps_core::CliqueChain::build(&spec).is_err());
    let radius = b_matrix_spectral_radius(&spec).unwrap();
    assert!(radius > 1.0 + 1e-6);
    let msg = validate(&ip, &[0.5, 0.5, 0.5]).unwrap_err().to_string();
    assert!(msg.contains("h(0)"), "{msg}");
}
