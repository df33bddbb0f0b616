//! Parsing of merging-function identifiers.
//!
//! Grammar: `product`, `mean`, `ustat:<n>`, `block:<K1>,<K2>,...`,
//! `symmetric2`, `decomposed:<config.toml>`, `generalized:<config.toml>`,
//! `counterexampleG:c=<c>` (the `c=` is optional). Parse errors carry the
//! byte offset of the offending fragment.

use std::path::PathBuf;

use evalues::catalog::{merge_block_product, merge_mean, merge_product, merge_u_statistic};
use evalues::reorder::{
    merge_generalized, merge_symmetric_example, CounterexampleG, MixtureComponent,
    TwoDecomposition,
};
use evalues::EVector;

use crate::config;

#[derive(Debug, Clone)]
pub enum FunctionId {
    Product,
    Mean,
    UStat(usize),
    Block(Vec<usize>),
    Symmetric2,
    Decomposed(PathBuf),
    Generalized(PathBuf),
    CounterexampleG(f64),
}

fn parse_error(id: &str, offset: usize, message: &str) -> String {
    format!("function id '{id}' at offset {offset}: {message}")
}

impl FunctionId {
    pub fn parse(id: &str) -> Result<Self, String> {
        let (head, tail) = match id.split_once(':') {
            Some((head, tail)) => (head, Some(tail)),
            None => (id, None),
        };
        let tail_offset = head.len() + 1;
        match (head, tail) {
            ("product", None) => Ok(FunctionId::Product),
            ("mean", None) => Ok(FunctionId::Mean),
            ("symmetric2", None) => Ok(FunctionId::Symmetric2),
            ("ustat", Some(t)) => t
                .parse::<usize>()
                .map(FunctionId::UStat)
                .map_err(|_| parse_error(id, tail_offset, "expected a subset size, e.g. ustat:2")),
            ("ustat", None) => Err(parse_error(id, head.len(), "ustat needs ':<n>'")),
            ("block", Some(t)) => {
                let mut breaks = Vec::new();
                let mut offset = tail_offset;
                for piece in t.split(',') {
                    let value = piece.parse::<usize>().map_err(|_| {
                        parse_error(id, offset, &format!("'{piece}' is not a break index"))
                    })?;
                    breaks.push(value);
                    offset += piece.len() + 1;
                }
                Ok(FunctionId::Block(breaks))
            }
            ("block", None) => Ok(FunctionId::Block(Vec::new())),
            ("decomposed", Some(path)) => Ok(FunctionId::Decomposed(PathBuf::from(path))),
            ("decomposed", None) => Err(parse_error(
                id,
                head.len(),
                "decomposed needs ':<config.toml>'",
            )),
            ("generalized", Some(path)) => Ok(FunctionId::Generalized(PathBuf::from(path))),
            ("generalized", None) => Err(parse_error(
                id,
                head.len(),
                "generalized needs ':<config.toml>'",
            )),
            ("counterexampleG", Some(t)) => {
                let raw = t.strip_prefix("c=").unwrap_or(t);
                let c = raw.parse::<f64>().map_err(|_| {
                    parse_error(id, tail_offset, &format!("'{raw}' is not a number"))
                })?;
                if c <= 1.0 {
                    return Err(parse_error(id, tail_offset, "c must be > 1"));
                }
                Ok(FunctionId::CounterexampleG(c))
            }
            ("counterexampleG", None) => Err(parse_error(
                id,
                head.len(),
                "counterexampleG needs ':c=<c>'",
            )),
            _ => Err(parse_error(
                id,
                0,
                "unknown function (expected product, mean, ustat:n, block:K1,..., symmetric2, \
                 decomposed:file, generalized:file, counterexampleG:c=...)",
            )),
        }
    }

    /// Arity the function insists on, if any.
    pub fn forced_arity(&self) -> Option<usize> {
        match self {
            FunctionId::Symmetric2
            | FunctionId::Decomposed(_)
            | FunctionId::CounterexampleG(_) => Some(2),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            FunctionId::Product => "product".into(),
            FunctionId::Mean => "mean".into(),
            FunctionId::UStat(n) => format!("ustat:{n}"),
            FunctionId::Block(breaks) => {
                let parts: Vec<String> = breaks.iter().map(|b| b.to_string()).collect();
                format!("block:{}", parts.join(","))
            }
            FunctionId::Symmetric2 => "symmetric2".into(),
            FunctionId::Decomposed(p) => format!("decomposed:{}", p.display()),
            FunctionId::Generalized(p) => format!("generalized:{}", p.display()),
            FunctionId::CounterexampleG(c) => format!("counterexampleG:c={c}"),
        }
    }
}

/// A merging function pinned to a concrete arity, ready for the oracles.
pub struct BoundFunction {
    pub label: String,
    pub arity: usize,
    eval: Box<dyn Fn(&[f64]) -> f64 + Sync + Send>,
}

impl BoundFunction {
    pub fn eval(&self, e: &[f64]) -> f64 {
        (self.eval)(e)
    }

    pub fn as_fn(&self) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        move |e: &[f64]| (self.eval)(e)
    }
}

/// Resolves an id against a requested arity, loading config files where
/// needed. `arity` is the `--k` flag; functions with a forced or
/// config-implied arity reject a conflicting request.
pub fn bind(id: &FunctionId, arity: Option<usize>) -> Result<BoundFunction, String> {
    let label = id.label();
    if let (Some(forced), Some(requested)) = (id.forced_arity(), arity) {
        if forced != requested {
            return Err(format!("{label} takes exactly {forced} e-values"));
        }
    }
    let k = arity.or(id.forced_arity()).unwrap_or(2);
    match id {
        FunctionId::Product => Ok(BoundFunction {
            label,
            arity: k,
            eval: Box::new(|e: &[f64]| merge_product(e)),
        }),
        FunctionId::Mean => Ok(BoundFunction {
            label,
            arity: k,
            eval: Box::new(|e: &[f64]| merge_mean(e)),
        }),
        FunctionId::UStat(n) => {
            let n = *n;
            if n > k {
                return Err(format!("ustat:{n} needs at least {n} e-values, got {k}"));
            }
            Ok(BoundFunction {
                label,
                arity: k,
                eval: Box::new(move |e: &[f64]| merge_u_statistic(n, e).expect("n <= k checked")),
            })
        }
        FunctionId::Block(breaks) => {
            let breaks = breaks.clone();
            merge_block_product(&breaks, &vec![1.0; k]).map_err(|e| e.to_string())?;
            Ok(BoundFunction {
                label,
                arity: k,
                eval: Box::new(move |e: &[f64]| {
                    merge_block_product(&breaks, e).expect("breaks checked")
                }),
            })
        }
        FunctionId::Symmetric2 => Ok(BoundFunction {
            label,
            arity: 2,
            eval: Box::new(|e: &[f64]| merge_symmetric_example(e[0], e[1])),
        }),
        FunctionId::Decomposed(path) => {
            let decomposition: TwoDecomposition =
                config::load_decomposition(path).map_err(|e| e.to_string())?;
            Ok(BoundFunction {
                label,
                arity: 2,
                eval: Box::new(move |e: &[f64]| decomposition.eval(e[0], e[1])),
            })
        }
        FunctionId::Generalized(path) => {
            let (mixture, implied): (Vec<MixtureComponent>, usize) =
                config::load_mixture(path).map_err(|e| e.to_string())?;
            if let Some(requested) = arity {
                if requested != implied {
                    return Err(format!(
                        "{label} is defined on {implied} e-values, not {requested}"
                    ));
                }
            }
            Ok(BoundFunction {
                label,
                arity: implied,
                eval: Box::new(move |e: &[f64]| {
                    merge_generalized(&mixture, &EVector::from_slice(e).expect("validated input"))
                        .expect("weights validated at load")
                }),
            })
        }
        FunctionId::CounterexampleG(c) => {
            let g = CounterexampleG::new(*c).map_err(|e| e.to_string())?;
            Ok(BoundFunction {
                label,
                arity: 2,
                eval: Box::new(move |e: &[f64]| g.eval(e[0], e[1])),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_catalog() {
        assert!(matches!(FunctionId::parse("product"), Ok(FunctionId::Product)));
        assert!(matches!(FunctionId::parse("mean"), Ok(FunctionId::Mean)));
        assert!(matches!(FunctionId::parse("ustat:2"), Ok(FunctionId::UStat(2))));
        assert!(matches!(
            FunctionId::parse("block:2,4"),
            Ok(FunctionId::Block(ref b)) if b == &vec![2, 4]
        ));
        assert!(matches!(
            FunctionId::parse("symmetric2"),
            Ok(FunctionId::Symmetric2)
        ));
        assert!(matches!(
            FunctionId::parse("counterexampleG:c=2"),
            Ok(FunctionId::CounterexampleG(c)) if c == 2.0
        ));
        assert!(matches!(
            FunctionId::parse("counterexampleG:2.5"),
            Ok(FunctionId::CounterexampleG(c)) if c == 2.5
        ));
    }

    #[test]
    fn errors_carry_offsets() {
        let err = FunctionId::parse("ustat:x").unwrap_err();
        assert!(err.contains("offset 6"), "{err}");
        let err = FunctionId::parse("block:2,a").unwrap_err();
        assert!(err.contains("offset 8"), "{err}");
        let err = FunctionId::parse("nonsense").unwrap_err();
        assert!(err.contains("unknown function"), "{err}");
        let err = FunctionId::parse("counterexampleG:c=1").unwrap_err();
        assert!(err.contains("c must be > 1"), "{err}");
    }

    #[test]
    fn binding_enforces_arity() {
        let id = FunctionId::parse("symmetric2").unwrap();
        assert!(bind(&id, Some(3)).is_err());
        assert!(bind(&id, Some(2)).is_ok());
        let id = FunctionId::parse("ustat:3").unwrap();
        assert!(bind(&id, Some(2)).is_err());
        let bound = bind(&id, Some(4)).unwrap();
        assert_eq!(bound.arity, 4);
        assert_eq!(bound.eval(&[1.0, 1.0, 1.0, 1.0]), 1.0);
    }
}
