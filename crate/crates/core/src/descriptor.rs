//! Text descriptors for sets.
//!
//! Grammar:
//!
//! ```text
//! spec       := "p=" (modulus | "rational") ";" "elems=" descriptor
//! descriptor := list | "gp(" g "," n ")" | "ap(" a "," d "," n ")"
//!             | "subgroup(" g "," n ")" | "coset(" h "," n ")"
//! list       := element ("," element)*
//! ```
//!
//! `gp(g,n)` is `{g, g^2, ..., g^n}`, `ap(a,d,n)` is `{a, a+d, ..., a+(n-1)d}`,
//! `subgroup(g,n)` is `{1, g, ..., g^{n-1}}` (the subgroup generated by `g`,
//! truncated to `n` elements) and `coset(h,n)` is `h·H` for the unique
//! subgroup `H ≤ F_p^*` of order `n`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::search::{generate_family, Family};
use crate::setops::FSet;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SetDescriptor {
    List(Vec<String>),
    Geometric { ratio: String, len: usize },
    Arithmetic { start: String, step: String, len: usize },
    Subgroup { generator: String, len: usize },
    Coset { shift: String, order: usize },
}

impl SetDescriptor {
    pub fn realize(&self, ctx: FieldCtx) -> Result<FSet> {
        let family = match self {
            SetDescriptor::List(items) => {
                let elems = items.iter().map(|s| ctx.parse(s)).collect::<Result<Vec<_>>>()?;
                return FSet::new(ctx, elems);
            }
            SetDescriptor::Geometric { ratio, len } => Family::Geometric {
                ratio: ctx.parse(ratio)?,
                len: *len,
            },
            SetDescriptor::Arithmetic { start, step, len } => Family::Arithmetic {
                start: ctx.parse(start)?,
                step: ctx.parse(step)?,
                len: *len,
            },
            SetDescriptor::Subgroup { generator, len } => Family::Subgroup {
                generator: ctx.parse(generator)?,
                len: *len,
            },
            SetDescriptor::Coset { shift, order } => Family::SubgroupCoset {
                shift: ctx.parse(shift)?,
                order: *order,
            },
        };
        generate_family(ctx, &family)
    }

    /// Descriptor listing the elements of `set` explicitly.
    pub fn of_set(set: &FSet) -> Self {
        SetDescriptor::List(set.iter().map(|e| e.to_string()).collect())
    }
}

fn call_args<'a>(s: &'a str, name: &str, arity: usize) -> Option<Result<Vec<&'a str>>> {
    let rest = s.strip_prefix(name)?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    let args: Vec<&str> = inner.split(',').map(str::trim).collect();
    if args.len() != arity || args.iter().any(|a| a.is_empty()) {
        return Some(Err(Error::Parse(format!(
            "{name}(...) takes {arity} arguments, got {s:?}"
        ))));
    }
    Some(Ok(args))
}

fn parse_len(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse(format!("expected a size, got {s:?}")))
}

impl FromStr for SetDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(args) = call_args(s, "gp", 2) {
            let a = args?;
            return Ok(SetDescriptor::Geometric {
                ratio: a[0].to_string(),
                len: parse_len(a[1])?,
            });
        }
        if let Some(args) = call_args(s, "ap", 3) {
            let a = args?;
            return Ok(SetDescriptor::Arithmetic {
                start: a[0].to_string(),
                step: a[1].to_string(),
                len: parse_len(a[2])?,
            });
        }
        if let Some(args) = call_args(s, "subgroup", 2) {
            let a = args?;
            return Ok(SetDescriptor::Subgroup {
                generator: a[0].to_string(),
                len: parse_len(a[1])?,
            });
        }
        if let Some(args) = call_args(s, "coset", 2) {
            let a = args?;
            return Ok(SetDescriptor::Coset {
                shift: a[0].to_string(),
                order: parse_len(a[1])?,
            });
        }
        let inner = s.strip_prefix('{').and_then(|t| t.strip_suffix('}')).unwrap_or(s);
        let items: Vec<String> = inner
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect();
        if items.iter().any(|t| t.contains('(') || t.contains(')')) {
            return Err(Error::Parse(format!("unrecognised set descriptor {s:?}")));
        }
        Ok(SetDescriptor::List(items))
    }
}

impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescriptor::List(items) => f.write_str(&items.join(",")),
            SetDescriptor::Geometric { ratio, len } => write!(f, "gp({ratio},{len})"),
            SetDescriptor::Arithmetic { start, step, len } => write!(f, "ap({start},{step},{len})"),
            SetDescriptor::Subgroup { generator, len } => write!(f, "subgroup({generator},{len})"),
            SetDescriptor::Coset { shift, order } => write!(f, "coset({shift},{order})"),
        }
    }
}

impl Serialize for SetDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A field together with a set descriptor: `p=101; elems=1,2,3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSpec {
    pub ctx: FieldCtx,
    pub set: SetDescriptor,
}

impl SetSpec {
    pub fn realize(&self) -> Result<FSet> {
        self.set.realize(self.ctx)
    }
}

impl FromStr for SetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (field, elems) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("expected `p=...; elems=...`, got {s:?}")))?;
        let field = field
            .trim()
            .strip_prefix("p=")
            .ok_or_else(|| Error::Parse(format!("missing `p=` in {s:?}")))?;
        let elems = elems
            .trim()
            .strip_prefix("elems=")
            .ok_or_else(|| Error::Parse(format!("missing `elems=` in {s:?}")))?;
        Ok(SetSpec {
            ctx: field.parse()?,
            set: elems.parse()?,
        })
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}; elems={}", self.ctx, self.set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_generators() {
        let d: SetDescriptor = "1, 2, 1/2".parse().unwrap();
        assert_eq!(d, SetDescriptor::List(vec!["1".into(), "2".into(), "1/2".into()]));
        let g: SetDescriptor = "gp(2,5)".parse().unwrap();
        assert_eq!(g.to_string(), "gp(2,5)");
        assert!("ap(1,1)".parse::<SetDescriptor>().is_err());
        assert!("foo(1,2)".parse::<SetDescriptor>().is_err());
    }

    #[test]
    fn full_spec_round_trip() {
        let spec: SetSpec = "p=101; elems=subgroup(65,10)".parse().unwrap();
        assert_eq!(spec.ctx, FieldCtx::prime(101).unwrap());
        assert_eq!(spec.to_string(), "p=101; elems=subgroup(65,10)");
        let set = spec.realize().unwrap();
        assert_eq!(set.len(), 10);
        let q: SetSpec = "p=rational; elems=1,2,4".parse().unwrap();
        assert_eq!(q.realize().unwrap(), FSet::from_ints(FieldCtx::rational(), [1, 2, 4]));
        assert!("p=100; elems=1".parse::<SetSpec>().is_err());
    }

    #[test]
    fn empty_list_is_empty_set() {
        let d: SetDescriptor = "".parse().unwrap();
        assert!(d.realize(FieldCtx::rational()).unwrap().is_empty());
    }
}
