//! Inline field syntax used on the command line.
//!
//! ```text
//! trig:[k=(1,0),a=1,b=0;k=(0,1),b=0.3]   sum of a cos(2 pi k.x) + b sin(2 pi k.x)
//! trig:[k=1,b=1]                          scalar k means dimension 1
//! sph:[l=1,m=0,c=1;l=0,m=0,c=2]           real spherical harmonics
//! random:[dim=2,max_freq=3,seed=42,scale=1]
//! poly:[e=(1,0),c=1;e=(0,0),c=-0.5]       monomials on boxes
//! ```
//!
//! Missing `a`, `b` default to 0, a missing `c` to 1 and a missing `scale`
//! to 1. A spec starting with `{` is parsed as the JSON serialization.

use std::collections::BTreeMap;

use super::{FieldSpec, HarmonicTerm, Monomial, Polynomial, RandomTrig, SphericalHarmonicSum};
use super::{TrigPolynomial, TrigTerm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(f64),
    Tuple(Vec<f64>),
}

impl Value {
    fn as_vec(&self) -> Vec<f64> {
        match self {
            Value::Scalar(x) => vec![*x],
            Value::Tuple(v) => v.clone(),
        }
    }
}

fn err(msg: impl Into<String>) -> Error {
    Error::Config(format!("field syntax: {}", msg.into()))
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| err(format!("'{}' is not a number", s.trim())))
}

/// Splits on `sep` outside parentheses.
fn split_top_level(s: &str, sep: char) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(err("unbalanced ')'"));
                }
            }
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(err("unbalanced '('"));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

fn parse_term(term: &str) -> Result<BTreeMap<String, Value>> {
    let mut out = BTreeMap::new();
    for item in split_top_level(term, ',')? {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got '{item}'")))?;
        let value = value.trim();
        let parsed = if let Some(inner) = value.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| err(format!("unterminated tuple '{value}'")))?;
            Value::Tuple(
                inner
                    .split(',')
                    .map(parse_number)
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            Value::Scalar(parse_number(value)?)
        };
        if out.insert(key.trim().to_string(), parsed).is_some() {
            return Err(err(format!("duplicate key '{}'", key.trim())));
        }
    }
    Ok(out)
}

struct Term {
    map: BTreeMap<String, Value>,
    allowed: &'static [&'static str],
}

impl Term {
    fn new(text: &str, allowed: &'static [&'static str]) -> Result<Self> {
        let map = parse_term(text)?;
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(err(format!("unknown key '{k}' (allowed: {})", allowed.join(", "))));
        }
        Ok(Self { map, allowed })
    }

    fn scalar(&self, key: &str, default: Option<f64>) -> Result<f64> {
        debug_assert!(self.allowed.contains(&key));
        match self.map.get(key) {
            Some(Value::Scalar(x)) => Ok(*x),
            Some(Value::Tuple(_)) => Err(err(format!("'{key}' must be a scalar"))),
            None => default.ok_or_else(|| err(format!("missing key '{key}'"))),
        }
    }

    fn integer(&self, key: &str, default: Option<f64>) -> Result<i64> {
        let x = self.scalar(key, default)?;
        if x.fract() != 0.0 {
            return Err(err(format!("'{key}' must be an integer, got {x}")));
        }
        Ok(x as i64)
    }

    fn vector(&self, key: &str) -> Result<Vec<f64>> {
        self.map
            .get(key)
            .map(Value::as_vec)
            .ok_or_else(|| err(format!("missing key '{key}'")))
    }
}

pub fn parse_field(text: &str) -> Result<FieldSpec> {
    let text = text.trim();
    if text.starts_with('{') {
        return FieldSpec::from_json(text);
    }
    let (kind, body) = text
        .split_once(':')
        .ok_or_else(|| err(format!("expected '<type>:[...]', got '{text}'")))?;
    let body = body
        .trim()
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| err("term list must be enclosed in [ ]"))?;
    let terms: Vec<&str> = split_top_level(body, ';')?
        .into_iter()
        .filter(|t| !t.trim().is_empty())
        .collect();
    if terms.is_empty() {
        return Err(err("empty term list"));
    }
    match kind.trim() {
        "trig" => {
            let mut dim = None;
            let mut out = Vec::new();
            for t in terms {
                let t = Term::new(t, &["k", "a", "b"])?;
                let k = t.vector("k")?;
                if *dim.get_or_insert(k.len()) != k.len() {
                    return Err(err("all frequencies must have the same length"));
                }
                out.push(TrigTerm {
                    k,
                    a: t.scalar("a", Some(0.0))?,
                    b: t.scalar("b", Some(0.0))?,
                });
            }
            Ok(FieldSpec::Trig(TrigPolynomial {
                dim: dim.unwrap_or(1),
                terms: out,
            }))
        }
        "sph" => {
            let out = terms
                .into_iter()
                .map(|t| {
                    let t = Term::new(t, &["l", "m", "c"])?;
                    let l = t.integer("l", None)?;
                    if l < 0 {
                        return Err(err("degree l must be >= 0"));
                    }
                    Ok(HarmonicTerm {
                        l: l as u32,
                        m: t.integer("m", Some(0.0))? as i32,
                        c: t.scalar("c", Some(1.0))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FieldSpec::Sph(SphericalHarmonicSum { terms: out }))
        }
        "random" => {
            if terms.len() != 1 {
                return Err(err("random takes exactly one parameter group"));
            }
            let t = Term::new(terms[0], &["dim", "max_freq", "seed", "scale"])?;
            let dim = t.integer("dim", None)?;
            let max_freq = t.integer("max_freq", None)?;
            let seed = t.integer("seed", Some(0.0))?;
            if dim < 1 || max_freq < 1 || seed < 0 {
                return Err(err("random needs dim >= 1, max_freq >= 1, seed >= 0"));
            }
            Ok(FieldSpec::Random(RandomTrig {
                dim: dim as usize,
                max_freq: max_freq as u32,
                seed: seed as u64,
                scale: t.scalar("scale", Some(1.0))?,
            }))
        }
        "poly" => {
            let mut dim = None;
            let mut out = Vec::new();
            for t in terms {
                let t = Term::new(t, &["e", "c"])?;
                let e = t.vector("e")?;
                if e.iter().any(|x| *x < 0.0 || x.fract() != 0.0) {
                    return Err(err("exponents must be non-negative integers"));
                }
                if *dim.get_or_insert(e.len()) != e.len() {
                    return Err(err("all exponent tuples must have the same length"));
                }
                out.push(Monomial {
                    e: e.iter().map(|x| *x as u32).collect(),
                    c: t.scalar("c", Some(1.0))?,
                });
            }
            Ok(FieldSpec::Poly(Polynomial {
                dim: dim.unwrap_or(1),
                terms: out,
            }))
        }
        other => Err(err(format!(
            "unknown field type '{other}' (expected trig, sph, random or poly)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalar_trig() {
        let f = parse_field("trig:[k=1,a=0,b=1]").unwrap();
        assert_eq!(
            f,
            FieldSpec::Trig(TrigPolynomial {
                dim: 1,
                terms: vec![TrigTerm {
                    k: vec![1.0],
                    a: 0.0,
                    b: 1.0
                }]
            })
        );
    }

    #[test]
    fn parses_multi_term_trig() {
        let f = parse_field("trig:[k=(1,0),a=1,b=0; k=(0,1), b=0.3]").unwrap();
        match f {
            FieldSpec::Trig(p) => {
                assert_eq!(p.dim, 2);
                assert_eq!(p.terms.len(), 2);
                assert_eq!(p.terms[1].k, vec![0.0, 1.0]);
                assert_eq!(p.terms[1].a, 0.0);
                assert_eq!(p.terms[1].b, 0.3);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn parses_other_families() {
        assert!(matches!(parse_field("sph:[l=1,m=0,c=1]").unwrap(), FieldSpec::Sph(_)));
        assert_eq!(
            parse_field("random:[dim=2,max_freq=3,seed=42,scale=1]").unwrap(),
            FieldSpec::Random(RandomTrig {
                dim: 2,
                max_freq: 3,
                seed: 42,
                scale: 1.0
            })
        );
        assert!(matches!(parse_field("poly:[e=1,c=1;e=0,c=-0.5]").unwrap(), FieldSpec::Poly(_)));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "trig",
            "trig:k=1",
            "trig:[]",
            "trig:[k=(1,0),a=1;k=1]",
            "trig:[k=(1,0]",
            "trig:[q=1]",
            "trig:[k=x]",
            "sph:[l=1.5]",
            "wave:[k=1]",
            "random:[dim=2]",
            "poly:[e=(-1),c=1]",
        ] {
            assert!(matches!(parse_field(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn json_and_inline_agree() {
        let inline = parse_field("trig:[k=(1,2),a=0.5,b=-1]").unwrap();
        let json = inline.to_json();
        assert_eq!(parse_field(&json).unwrap(), inline);
    }
}
