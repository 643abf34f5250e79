use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use heaps_core::chain::b_matrix_spectral_radius;
use heaps_core::ergodic::{density_vector, ergodic_mean, speedup, subadditive_ratio};
use heaps_core::mobius::{mobius_polynomial, uniform_root};
use heaps_core::protocol::{
    first_hit_a_expectations, geometric, protocol_monoid, protocol_spec, round_density_gamma, simulate_word, A, B, C,
};
use heaps_core::sampler::trajectory_rng;
use heaps_core::stopping::sample_increments;
use heaps_core::{Ast, CliqueChain, CostFunction, ErgodicReport, Heap, ProtocolParams};
use thiserror::Error;

use crate::model::{load_model, load_model_unchecked, ModelError};
use crate::output::{g12, opt, Table};

#[derive(Debug, Parser)]
#[command(name = "heaps", version, about = "Bernoulli measures on heap monoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Möbius transform of the weights and the validity conditions
    Validate { model: PathBuf },
    /// Cliques of the independence relation in canonical order
    Cliques { model: PathBuf },
    /// Möbius polynomial coefficients and its smallest root
    Mobius { model: PathBuf },
    /// Initial law, normalisation, transition matrix and invariant law of the
    /// chain of cliques
    Chain { model: PathBuf },
    /// Asymptotic density of each piece
    Densities { model: PathBuf },
    /// Speedup, optionally with a Monte-Carlo estimate of its inverse
    Speedup {
        model: PathBuf,
        #[arg(long)]
        simulate: bool,
        /// Stopping time used for the estimate [default: first-hit of the first piece]
        #[arg(long)]
        ast: Option<String>,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 1000)]
        trajectories: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Ergodic mean of an additive cost along iterated stopping times
    Simulate {
        model: PathBuf,
        /// first-hit:<piece>, max-clique or prefix:<word>
        #[arg(long)]
        ast: String,
        /// Comma-separated <piece>=<real> values; other pieces cost 0
        #[arg(long)]
        cost: String,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 1000)]
        trajectories: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Two-device protocol: closed forms and Monte-Carlo cross-checks
    Protocol {
        #[arg(long)]
        lambda: f64,
        #[arg(long = "lambda-prime")]
        lambda_prime: f64,
        /// Sample size of the Monte-Carlo checks; needs --seed
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Runtime(heaps_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

/// Errors from a run: bad arguments are usage errors, the rest runtime.
fn runtime(e: heaps_core::Error) -> CliError {
    use heaps_core::Error::*;
    match e {
        InvalidArgument(_) | InvalidAst(_) | UnknownPiece(_) | Unsupported(_) => usage(e),
        e => CliError::Runtime(e),
    }
}

/// What a command prints.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub csv: String,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl Output {
    fn ok(table: Table) -> Self {
        Output {
            csv: table.to_csv(),
            warnings: Vec::new(),
            exit_code: 0,
        }
    }
}

pub const REPORT_HEADER: [&str; 8] = ["quantity", "ast", "estimate", "stderr", "exact", "n", "trajectories", "seed"];

fn exact_row(table: &mut Table, quantity: &str, exact: f64) {
    table.push([quantity, "", "", "", &g12(exact), "", "", ""].map(String::from));
}

fn report_row(table: &mut Table, r: &ErgodicReport) {
    table.push([
        r.quantity.clone(),
        r.ast.clone(),
        g12(r.estimate),
        g12(r.stderr),
        opt(r.exact),
        r.n_iterations.to_string(),
        r.n_trajectories.to_string(),
        r.seed.to_string(),
    ]);
}

fn chain_of(model: &Path) -> Result<Arc<CliqueChain>, CliError> {
    let m = load_model(model)?;
    Ok(Arc::new(CliqueChain::build(&m.spec).map_err(ModelError::from)?))
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Validate { model } => validate(&model),
        Command::Cliques { model } => {
            let m = load_model_unchecked(&model)?;
            let ip = &m.independence;
            let mut t = Table::new(&["index", "clique", "size", "maximal"]);
            for (i, &c) in ip.cliques().iter().enumerate() {
                t.push([
                    i.to_string(),
                    ip.format_clique(c),
                    c.len().to_string(),
                    ip.is_maximal_clique(c).to_string(),
                ]);
            }
            Ok(Output::ok(t))
        }
        Command::Mobius { model } => {
            let m = load_model_unchecked(&model)?;
            let poly = mobius_polynomial(&m.independence);
            let mut t = Table::new(&["term", "value"]);
            for (k, c) in poly.coefficients().iter().enumerate() {
                t.push([format!("X^{k}"), c.to_string()]);
            }
            let root = uniform_root(&m.independence).map_err(runtime)?;
            t.push(["root".to_string(), g12(root)]);
            Ok(Output::ok(t))
        }
        Command::Chain { model } => chain(&model),
        Command::Densities { model } => {
            let c = chain_of(&model)?;
            let ip = c.independence();
            let mut t = Table::new(&["piece", "density"]);
            for (a, d) in ip.pieces().zip(density_vector(&c)) {
                t.push([ip.name(a).to_string(), g12(d)]);
            }
            Ok(Output::ok(t))
        }
        Command::Speedup {
            model,
            simulate,
            ast,
            iterations,
            trajectories,
            seed,
        } => {
            let c = chain_of(&model)?;
            let ip = c.independence();
            let mut t = Table::new(&REPORT_HEADER);
            exact_row(&mut t, "speedup", speedup(&c));
            let mut warnings = Vec::new();
            if simulate {
                let seed = seed.ok_or_else(|| usage("--simulate needs an explicit --seed"))?;
                let ast = match ast {
                    Some(s) => Ast::parse(ip, &s).map_err(usage)?,
                    None => Ast::FirstHit(ip.pieces().next().expect("at least two pieces")),
                };
                let r = subadditive_ratio(&c, &ast, iterations, trajectories, seed).map_err(runtime)?;
                report_row(&mut t, &r);
                warnings = r.warnings;
            } else if ast.is_some() || seed.is_some() {
                return Err(usage("--ast and --seed only apply with --simulate"));
            }
            Ok(Output {
                csv: t.to_csv(),
                warnings,
                exit_code: 0,
            })
        }
        Command::Simulate {
            model,
            ast,
            cost,
            iterations,
            trajectories,
            seed,
        } => {
            let c = chain_of(&model)?;
            let ip = c.independence();
            let ast = Ast::parse(ip, &ast).map_err(usage)?;
            let phi = CostFunction::parse(ip, &cost).map_err(usage)?;
            let r = ergodic_mean(&c, &ast, &phi, iterations, trajectories, seed).map_err(runtime)?;
            let mut t = Table::new(&REPORT_HEADER);
            report_row(&mut t, &r);
            Ok(Output {
                csv: t.to_csv(),
                warnings: r.warnings,
                exit_code: 0,
            })
        }
        Command::Protocol {
            lambda,
            lambda_prime,
            rounds,
            seed,
        } => {
            let params = ProtocolParams::new(lambda, lambda_prime).map_err(usage)?;
            let sample = match (rounds, seed) {
                (Some(n), Some(s)) => Some((n, s)),
                (None, None) => None,
                (Some(_), None) => return Err(usage("--rounds needs an explicit --seed")),
                (None, Some(_)) => return Err(usage("--seed only applies with --rounds")),
            };
            protocol(&params, sample)
        }
    }
}

fn validate(model: &Path) -> Result<Output, CliError> {
    let m = load_model_unchecked(model)?;
    let ip = &m.independence;
    let spec = &m.spec;
    let mut t = Table::new(&["clique", "size", "weight", "h", "condition", "holds"]);
    for (&c, &h) in spec.cliques().iter().zip(spec.mobius()) {
        let (condition, holds) = if c.is_empty() {
            ("h=0", h.abs() <= heaps_core::mobius::TOL_H)
        } else {
            ("h>0", h > heaps_core::mobius::TOL_H)
        };
        t.push([
            ip.format_clique(c),
            c.len().to_string(),
            g12(spec.clique_weight(c)),
            g12(h),
            condition.to_string(),
            holds.to_string(),
        ]);
    }
    let valid = spec.is_valid();
    Ok(Output {
        csv: t.to_csv(),
        warnings: spec.violations().iter().map(|v| v.to_string()).collect(),
        exit_code: if valid { 0 } else { 2 },
    })
}

fn chain(model: &Path) -> Result<Output, CliError> {
    let c = chain_of(model)?;
    let ip = c.independence();
    let name = |i: usize| ip.format_clique(c.states()[i]);
    let n = c.states().len();
    let mut t = Table::new(&["quantity", "from", "to", "value"]);
    for i in 0..n {
        t.push(["initial".into(), String::new(), name(i), g12(c.initial()[i])]);
    }
    for i in 0..n {
        t.push(["g".into(), name(i), String::new(), g12(c.normalization()[i])]);
    }
    for i in 0..n {
        for j in 0..n {
            t.push(["P".into(), name(i), name(j), g12(c.transition().get(i, j))]);
        }
    }
    for i in 0..n {
        t.push(["pi".into(), String::new(), name(i), g12(c.stationary()[i])]);
    }
    let identity = c.identity_check();
    for row in &identity.rows {
        t.push(["h-fg".into(), row.label.clone(), String::new(), g12(row.h - row.fg)]);
    }
    let radius = b_matrix_spectral_radius(c.spec()).map_err(runtime)?;
    t.push(["b_spectral_radius".into(), String::new(), String::new(), g12(radius)]);
    let mut warnings = Vec::new();
    if !identity.holds() {
        warnings.push("h = f·g fails on some cliques".to_string());
    }
    Ok(Output {
        csv: t.to_csv(),
        warnings,
        exit_code: 0,
    })
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Trajectory indices of the cylinder runs, kept apart from the others.
const CYLINDER_OFFSET: u64 = 1 << 32;

pub const PROTOCOL_CYLINDERS: [&str; 5] = ["a", "b", "c", "ab", "ca"];

fn protocol(params: &ProtocolParams, sample: Option<(usize, u64)>) -> Result<Output, CliError> {
    let ip = protocol_monoid();
    let gamma = round_density_gamma(params);
    let (eb, ec, e) = first_hit_a_expectations(params);
    let spec = protocol_spec(params);
    let mut t = Table::new(&REPORT_HEADER);
    let Some((n, seed)) = sample else {
        for (a, g) in ip.pieces().zip(gamma) {
            exact_row(&mut t, &format!("density[{}]", ip.name(a)), g);
        }
        exact_row(&mut t, "first_hit_a_mean[b]", eb);
        exact_row(&mut t, "first_hit_a_mean[c]", ec);
        exact_row(&mut t, "first_hit_a_mean_length", e);
        return Ok(Output::ok(t));
    };
    if n < 2 {
        return Err(usage("--rounds must be at least 2"));
    }
    let row = |t: &mut Table, q: &str, ast: &str, est: f64, se: f64, exact: f64, traj: usize| {
        t.push([
            q.to_string(),
            ast.to_string(),
            g12(est),
            g12(se),
            g12(exact),
            n.to_string(),
            traj.to_string(),
            seed.to_string(),
        ]);
    };

    // densities along one run of n rounds, ratio estimator over rounds
    let mut rng = trajectory_rng(seed, 0);
    let counts: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            let na = geometric(&mut rng, params.lambda()) as f64;
            let nb = geometric(&mut rng, params.lambda_prime()) as f64;
            [na, nb, 1.0]
        })
        .collect();
    let lengths: Vec<f64> = counts.iter().map(|c| c.iter().sum()).collect();
    let mean_len = lengths.iter().sum::<f64>() / n as f64;
    for (k, a) in ip.pieces().enumerate() {
        let ratio = counts.iter().map(|c| c[k]).sum::<f64>() / lengths.iter().sum::<f64>();
        let resid: Vec<f64> = counts.iter().zip(&lengths).map(|(c, l)| c[k] - ratio * l).collect();
        let var = resid.iter().map(|r| r * r).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt() / mean_len;
        row(&mut t, &format!("density[{}]", ip.name(a)), "", ratio, se, gamma[k], 1);
    }

    // first hitting time of a under the Bernoulli sampler, n trajectories
    let c = Arc::new(CliqueChain::build(&spec).map_err(runtime)?);
    let ast = Ast::FirstHit(A);
    let label = ast.label(&ip);
    let cuts: Vec<Heap> = sample_increments(&c, &ast, n, 1, seed)
        .map_err(runtime)?
        .into_iter()
        .map(|mut v| v.remove(0))
        .collect();
    type Stat = fn(&Heap) -> f64;
    let stats: [(&str, f64, Stat); 3] = [
        ("first_hit_a_mean[b]", eb, |x| x.occurrences(B) as f64),
        ("first_hit_a_mean[c]", ec, |x| x.occurrences(C) as f64),
        ("first_hit_a_mean_length", e, |x| x.len() as f64),
    ];
    for (q, exact, f) in stats {
        let xs: Vec<f64> = cuts.iter().map(f).collect();
        let (m, se) = mean_stderr(&xs);
        row(&mut t, q, &label, m, se, exact, n);
    }

    // cylinder frequencies over n independent simulations
    let probes: Vec<Heap> = PROTOCOL_CYLINDERS.iter().map(|s| ip.parse_heap(s).expect("valid word")).collect();
    let rounds = 1 + probes.iter().map(|y| y.occurrences(C)).max().unwrap_or(0);
    let mut hits = vec![0usize; probes.len()];
    for i in 0..n as u64 {
        let mut rng = trajectory_rng(seed, CYLINDER_OFFSET + i);
        let x = ip.normalize(&simulate_word(params, rounds, &mut rng));
        for (y, h) in probes.iter().zip(hits.iter_mut()) {
            *h += ip.leq(y, &x) as usize;
        }
    }
    for ((y, name), h) in probes.iter().zip(PROTOCOL_CYLINDERS).zip(hits) {
        let p = h as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        row(&mut t, &format!("cylinder[{name}]"), "", p, se, spec.valuation(y), n);
    }
    Ok(Output::ok(t))
}
