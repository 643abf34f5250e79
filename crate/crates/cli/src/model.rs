//! Model files.
//!
//! ```text
//! # three pieces, a and b commute
//! pieces a b c
//! independent a b
//! uniform
//! ```
//!
//! One directive per line, `#` starts a comment. Either `uniform` or one
//! `weight <piece> <real>` line per piece.

use std::fmt;
use std::path::Path;

use heaps_core::mobius::uniform_root;
use heaps_core::{BernoulliSpec, IndependencePair};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Semantic(#[from] heaps_core::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    Uniform,
    Explicit(Vec<(String, f64)>),
}

/// A parsed model; the measure may still be invalid.
#[derive(Debug, Clone)]
pub struct Model {
    pub independence: IndependencePair,
    pub spec: BernoulliSpec,
    pub uniform: bool,
}

impl Model {
    /// Fails with the list of violated conditions if the weights do not
    /// define a Bernoulli measure.
    pub fn require_valid(self) -> Result<Self, ModelError> {
        if self.spec.is_valid() {
            Ok(self)
        } else {
            Err(heaps_core::Error::InvalidMeasure(
                self.spec.violations().iter().map(|v| v.to_string()).collect(),
            )
            .into())
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ip = &self.independence;
        writeln!(f, "pieces {}", ip.names().join(" "))?;
        for a in ip.pieces() {
            for b in ip.pieces().filter(|b| b.index() > a.index()) {
                if ip.is_independent(a, b) {
                    writeln!(f, "independent {} {}", ip.name(a), ip.name(b))?;
                }
            }
        }
        if self.uniform {
            writeln!(f, "uniform")
        } else {
            for (a, w) in ip.pieces().zip(self.spec.weights()) {
                writeln!(f, "weight {} {w}", ip.name(a))?;
            }
            Ok(())
        }
    }
}

/// Parses a model without checking that the measure is valid.
pub fn parse_model_unchecked(text: &str) -> Result<Model, ModelError> {
    let mut pieces: Option<(usize, Vec<String>)> = None;
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut weights: Option<(usize, Weights)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut words = content.split_whitespace();
        let Some(keyword) = words.next() else { continue };
        let args: Vec<&str> = words.collect();
        match keyword {
            "pieces" => {
                if pieces.is_some() {
                    return Err(syntax(line, "pieces declared twice"));
                }
                if args.is_empty() {
                    return Err(syntax(line, "pieces needs at least one name"));
                }
                pieces = Some((line, args.iter().map(|s| s.to_string()).collect()));
            }
            "independent" => {
                let [a, b] = args[..] else {
                    return Err(syntax(line, "expected `independent <piece> <piece>`"));
                };
                pairs.push((a.to_string(), b.to_string()));
            }
            "uniform" => {
                if !args.is_empty() {
                    return Err(syntax(line, "uniform takes no arguments"));
                }
                match weights {
                    None => weights = Some((line, Weights::Uniform)),
                    Some((_, Weights::Uniform)) => return Err(syntax(line, "uniform given twice")),
                    Some(_) => return Err(syntax(line, "uniform and weight lines are mutually exclusive")),
                }
            }
            "weight" => {
                let [name, value] = args[..] else {
                    return Err(syntax(line, "expected `weight <piece> <real>`"));
                };
                let value: f64 = value
                    .parse()
                    .map_err(|_| syntax(line, format!("`{value}` is not a number")))?;
                match &mut weights {
                    None => weights = Some((line, Weights::Explicit(vec![(name.to_string(), value)]))),
                    Some((_, Weights::Explicit(ws))) => {
                        if ws.iter().any(|(n, _)| n == name) {
                            return Err(syntax(line, format!("weight for {name} given twice")));
                        }
                        ws.push((name.to_string(), value));
                    }
                    Some((_, Weights::Uniform)) => {
                        return Err(syntax(line, "uniform and weight lines are mutually exclusive"))
                    }
                }
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    let end = text.lines().count().max(1);
    let (_, names) = pieces.ok_or_else(|| syntax(end, "missing `pieces` line"))?;
    let ip = IndependencePair::new(&names, &pairs)?;
    let (_, weights) = weights.ok_or_else(|| syntax(end, "missing `uniform` or `weight` lines"))?;
    match weights {
        Weights::Uniform => {
            let p = uniform_root(&ip)?;
            Ok(Model {
                spec: BernoulliSpec::evaluate(&ip, &vec![p; ip.len()])?,
                independence: ip,
                uniform: true,
            })
        }
        Weights::Explicit(ws) => {
            let mut values = vec![f64::NAN; ip.len()];
            for (name, w) in ws {
                values[ip.piece(&name)?.index()] = w;
            }
            if let Some(a) = ip.pieces().find(|a| values[a.index()].is_nan()) {
                return Err(heaps_core::Error::MissingWeight(ip.name(a).to_string()).into());
            }
            Ok(Model {
                spec: BernoulliSpec::evaluate(&ip, &values)?,
                independence: ip,
                uniform: false,
            })
        }
    }
}

/// Parses a model and requires a valid measure.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    parse_model_unchecked(text)?.require_valid()
}

pub fn load_model_unchecked(path: &Path) -> Result<Model, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model_unchecked(&text)
}

pub fn load_model(path: &Path) -> Result<Model, ModelError> {
    load_model_unchecked(path)?.require_valid()
}

#[cfg(test)]
mod tests {
    use super::*;

    const T_UNIFORM: &str = "# the usual example\npieces a b c\nindependent a b\nuniform\n";

    #[test]
    fn uniform_model() {
        let m = parse_model(T_UNIFORM).unwrap();
        let p = (3.0 - 5f64.sqrt()) / 2.0;
        assert!(m.spec.weights().iter().all(|w| (w - p).abs() < 1e-12));
        assert!(m.uniform);
        let again = parse_model(&m.to_string()).unwrap();
        assert_eq!(again.spec.weights(), m.spec.weights());
    }

    #[test]
    fn weighted_model() {
        let text = "pieces a b c\nindependent a b   # commuting\nweight a 0.5\nweight b 0.5\nweight c 0.25\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.spec.weights(), &[0.5, 0.5, 0.25]);
    }

    fn syntax_line(text: &str) -> usize {
        match parse_model(text).unwrap_err() {
            ModelError::Syntax { line, .. } => line,
            e => panic!("expected a syntax error, got {e}"),
        }
    }

    #[test]
    fn syntax_errors_carry_lines() {
        assert_eq!(syntax_line("pieces a b\nfoo\n"), 2);
        assert_eq!(syntax_line("pieces a b\nindependent a\n"), 2);
        assert_eq!(syntax_line("pieces a b\nweight a x\n"), 2);
        assert_eq!(syntax_line("pieces a b\nuniform\nweight a 0.5\n"), 3);
        assert_eq!(syntax_line("pieces a b\nweight a 0.5\nuniform\n"), 3);
        assert_eq!(syntax_line("pieces a b\nweight a 0.5\nweight a 0.5\n"), 3);
        assert_eq!(syntax_line("pieces a b\npieces c\n"), 2);
        assert_eq!(syntax_line("pieces a b\n"), 1);
        assert_eq!(syntax_line("uniform\n"), 1);
    }

    #[test]
    fn semantic_errors() {
        let err = |t: &str| parse_model(t).unwrap_err().to_string();
        assert!(err("pieces a a\nuniform\n").contains("duplicate"));
        assert!(err("pieces a b c\nindependent a b\nindependent b c\nuniform\n").contains("not reachable"));
        assert!(err("pieces a b c\nindependent a d\nuniform\n").contains("unknown piece"));
        assert!(err("pieces a b\nweight a 0.5\n").contains("missing weight"));
        assert!(err("pieces a b\nweight a 0.5\nweight b 1.5\n").contains("b"));
        let msg = err("pieces a b c\nindependent a b\nweight a 0.5\nweight b 0.5\nweight c 0.5\n");
        assert!(msg.contains("h(0)"), "{msg}");
    }

    #[test]
    fn unchecked_keeps_invalid_measures() {
        let m = parse_model_unchecked("pieces a b\nweight a 0.3\nweight b 0.3\n").unwrap();
        assert!(!m.spec.is_valid());
    }
}
