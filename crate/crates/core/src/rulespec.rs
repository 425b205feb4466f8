//! Text spelling of rules, shared by the command line and the Python bindings.
//!
//! | spelling                     | rule                                            |
//! |------------------------------|-------------------------------------------------|
//! | `e<number>`                  | elementary rule, `0..=255`                      |
//! | `r<radius>:<number>`         | contiguous rule of the given radius             |
//! | `gkl[:o1,o2,0,o4,o5]`        | GKL rule, default offsets `-3,-1,0,1,3`         |
//! | `maj:<offsets>`              | majority over an odd list of offsets            |
//! | `t2d:<vn5\|moore9>:<code>`   | 2D totalistic code                              |
//! | `maj2d:<dy>,<dx>;...`        | 2D majority over an odd list of offsets         |
//! | `gkl2d`                      | plus-shaped 2D GKL analog                       |
//! | `shell:<R>[:w0,w1,...]`      | graph shell majority, weights may be `a/b`      |
//! | `sort`                       | block rule `10 -> 01`                           |
//! | `block:<ab>,<ab>,<ab>,<ab>`  | block rule, images of `00,01,10,11`             |

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::ca2d::{make_gkl2d, make_sampled_majority2d, make_totalistic2d, Neighborhood, Rule2D};
use crate::error::{Error, Result};
use crate::graph::ShellRule;
use crate::rule::{make_elementary_rule, make_gkl_rule, make_radius_rule, make_sampled_majority, Rule1D, GKL_OFFSETS};
use crate::stochastic::BlockRule;

#[derive(Clone, Debug, PartialEq)]
pub enum RuleSpec {
    OneD(Rule1D),
    TwoD(Rule2D),
    Shell(ShellRule),
    Block(BlockRule),
}

fn parse_int<T: FromStr>(s: &str, what: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| Error::Parse(format!("{what} {s:?}: {e}")))
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    s.split(',').map(|t| parse_int(t, what)).collect()
}

fn parse_ratio(s: &str) -> Result<Ratio<u64>> {
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (parse_int(a, "weight")?, parse_int(b, "weight")?);
            if b == 0 {
                return Err(Error::Parse(format!("weight {s:?} has a zero denominator")));
            }
            Ok(Ratio::new(a, b))
        }
        None => Ok(Ratio::from_integer(parse_int(s, "weight")?)),
    }
}

fn parse_bits2(s: &str) -> Result<(u8, u8)> {
    match s.trim().as_bytes() {
        [a @ (b'0' | b'1'), b @ (b'0' | b'1')] => Ok((a - b'0', b - b'0')),
        _ => Err(Error::Parse(format!("block image {s:?} must be two binary digits"))),
    }
}

impl FromStr for RuleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match (head, rest) {
            ("gkl", None) => Ok(RuleSpec::OneD(make_gkl_rule(GKL_OFFSETS)?)),
            ("gkl", Some(r)) => {
                let o: Vec<i32> = parse_list(r, "offset")?;
                let arr: [i32; 5] = o
                    .try_into()
                    .map_err(|o: Vec<i32>| Error::Parse(format!("gkl needs 5 offsets, got {}", o.len())))?;
                Ok(RuleSpec::OneD(make_gkl_rule(arr)?))
            }
            ("maj", Some(r)) => Ok(RuleSpec::OneD(make_sampled_majority(&parse_list::<i32>(r, "offset")?)?)),
            ("gkl2d", None) => Ok(RuleSpec::TwoD(make_gkl2d())),
            ("t2d", Some(r)) => {
                let (nb, code) = r
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected t2d:<neighborhood>:<code>, got {s:?}")))?;
                let nb = match nb {
                    "vn5" | "vonneumann5" | "vn" => Neighborhood::VonNeumann5,
                    "moore9" | "moore" => Neighborhood::Moore9,
                    other => return Err(Error::Parse(format!("unknown neighborhood {other:?} (use vn5 or moore9)"))),
                };
                Ok(RuleSpec::TwoD(make_totalistic2d(nb, parse_int(code, "code")?)?))
            }
            ("maj2d", Some(r)) => {
                let offsets = r
                    .split(';')
                    .map(|pair| {
                        let v: Vec<i32> = parse_list(pair, "offset")?;
                        match v[..] {
                            [dy, dx] => Ok((dy, dx)),
                            _ => Err(Error::Parse(format!("2D offset {pair:?} must be dy,dx"))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(RuleSpec::TwoD(make_sampled_majority2d(&offsets)?))
            }
            ("shell", Some(r)) => {
                let (radius, weights) = match r.split_once(':') {
                    Some((rad, w)) => (rad, Some(w)),
                    None => (r, None),
                };
                let radius: usize = parse_int(radius, "radius")?;
                let rule = match weights {
                    None => ShellRule::majority(radius)?,
                    Some(w) => ShellRule::weighted(radius, w.split(',').map(parse_ratio).collect::<Result<_>>()?)?,
                };
                Ok(RuleSpec::Shell(rule))
            }
            ("sort", None) => Ok(RuleSpec::Block(BlockRule::sort())),
            ("block", Some(r)) => {
                let images: Vec<(u8, u8)> = r.split(',').map(parse_bits2).collect::<Result<_>>()?;
                let map: [(u8, u8); 4] = images
                    .try_into()
                    .map_err(|_| Error::Parse("block rule needs 4 images".into()))?;
                Ok(RuleSpec::Block(BlockRule::new(map)?))
            }
            (h, Some(r)) if h.starts_with('r') && h.len() > 1 => {
                let radius: u32 = parse_int(&h[1..], "radius")?;
                Ok(RuleSpec::OneD(make_radius_rule(radius, parse_int(r, "rule number")?)?))
            }
            (h, None) if h.starts_with('e') && h.len() > 1 => Ok(RuleSpec::OneD(make_elementary_rule(parse_int(&h[1..], "rule number")?)?)),
            _ => Err(Error::Parse(format!("unrecognized rule {s:?}"))),
        }
    }
}

impl RuleSpec {
    pub fn label(&self) -> String {
        match self {
            RuleSpec::OneD(r) => r.label().to_string(),
            RuleSpec::TwoD(r) => r.label(),
            RuleSpec::Shell(r) => r.label(),
            RuleSpec::Block(b) if *b == BlockRule::sort() => "sort".to_string(),
            RuleSpec::Block(b) => {
                let imgs: Vec<String> = (0..4u8).map(|v| {
                    let (a, c) = b.apply(v >> 1, v & 1);
                    format!("{a}{c}")
                }).collect();
                format!("block:{}", imgs.join(","))
            }
        }
    }

    pub fn one_d(self) -> Result<Rule1D> {
        match self {
            RuleSpec::OneD(r) => Ok(r),
            other => Err(Error::invalid("rule", format!("{} is not a 1D rule", other.label()))),
        }
    }
}
