//! The five orbit classifications, same-orbit decisions, canonical
//! representatives, the swap-involution label transport, and fiber censuses.
//!
//! A label packs the preserved continuous invariants together with an exact
//! stratum tag; two points lie in the same orbit iff their labels are equal.
//! Every predicate is a sign or zero test on rationals, so classification is
//! exact, and censuses report exact distinct-label counts.

use std::collections::BTreeMap;

use serde::de::Error as DeError;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec;
use crate::groups::GroupTag;
use crate::rational::{Rational, Sign};
use crate::sampling;
use crate::seed::SeedStream;
use crate::space::{FiberSpec, Point};

/// The five classified actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupCase {
    /// The unimodular block action on (x', y').
    H1,
    /// The positive-determinant block action on (x', y').
    GlPlus,
    /// The split orthogonal action on concatenated (x', y').
    TildeH,
    /// The block action together with the global scaling torus.
    H,
    /// The split orthogonal action together with the torus.
    TildeHTorus,
}

impl GroupCase {
    pub const ALL: [GroupCase; 5] = [
        GroupCase::H1,
        GroupCase::GlPlus,
        GroupCase::TildeH,
        GroupCase::H,
        GroupCase::TildeHTorus,
    ];

    pub fn json_token(self) -> &'static str {
        match self {
            GroupCase::H1 => "H1",
            GroupCase::GlPlus => "GLplus",
            GroupCase::TildeH => "TildeH",
            GroupCase::H => "H",
            GroupCase::TildeHTorus => "TildeHTorus",
        }
    }

    pub fn from_json_token(token: &str) -> Option<GroupCase> {
        GroupCase::ALL.into_iter().find(|c| c.json_token() == token)
    }

    pub fn cli_token(self) -> &'static str {
        match self {
            GroupCase::H1 => "h1",
            GroupCase::GlPlus => "glplus",
            GroupCase::TildeH => "htilde",
            GroupCase::H => "h",
            GroupCase::TildeHTorus => "htilde-torus",
        }
    }

    pub fn from_cli_token(token: &str) -> Option<GroupCase> {
        GroupCase::ALL.into_iter().find(|c| c.cli_token() == token)
    }

    /// The group whose sampled elements realize this case's orbits.
    pub fn acting_tag(self) -> GroupTag {
        match self {
            GroupCase::H1 => GroupTag::H1,
            GroupCase::GlPlus => GroupTag::GlPlus,
            GroupCase::TildeH => GroupTag::TildeH,
            GroupCase::H => GroupTag::GlPlusTimesTorus,
            GroupCase::TildeHTorus => GroupTag::TildeHTimesTorus,
        }
    }

    /// Whether labels carry the prime-pairing level and head signs (the
    /// torus-extended cases) rather than the exact head pair.
    pub fn uses_prime_level(self) -> bool {
        matches!(self, GroupCase::H | GroupCase::TildeHTorus)
    }
}

impl Serialize for GroupCase {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.json_token())
    }
}

impl<'de> Deserialize<'de> for GroupCase {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let token = String::deserialize(d)?;
        GroupCase::from_json_token(&token)
            .ok_or_else(|| D::Error::custom(format!("unknown case {token:?}")))
    }
}

/// Exact stratum tag within a fiber of the continuous invariants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stratum {
    /// The fiber itself is a single orbit.
    Generic,
    /// Null-cone pair, both blocks nonzero (merged for n >= 3).
    Cone,
    /// Null-cone pair for n = 2 under orientation-preserving block actions:
    /// only the rotation parameter's sign survives.
    ConeSigned(Sign),
    /// Null-cone pair for n = 2 under the unimodular block action: the exact
    /// rotation parameter survives.
    ConeParam(Rational),
    /// x' = 0, y' != 0.
    XZero,
    /// x' != 0, y' = 0.
    YZero,
    /// x' = y' = 0.
    Origin,
    /// (x', y') != 0 on the null cone, for the split orthogonal cases.
    NullPair,
}

impl Stratum {
    pub fn token(&self) -> &'static str {
        match self {
            Stratum::Generic => "Generic",
            Stratum::Cone => "Cone",
            Stratum::ConeSigned(_) => "ConeSigned",
            Stratum::ConeParam(_) => "ConeParam",
            Stratum::XZero => "XZero",
            Stratum::YZero => "YZero",
            Stratum::Origin => "Origin",
            Stratum::NullPair => "NullPair",
        }
    }
}

/// The continuous invariants preserved by a case.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Continuous {
    /// The exact head pair (x1, y1), preserved by the block actions.
    FirstPair { x1: Rational, y1: Rational },
    /// The prime-pairing level plus head signs, preserved once the torus
    /// scales the heads. The y-head sign is redundant unless q = 1, but is
    /// stored so label equality stays a plain structural comparison.
    PrimeLevel {
        q: Rational,
        sgn_x1: Sign,
        sgn_y1: Sign,
    },
}

/// Full orbit identifier: case + continuous invariants + stratum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrbitLabel {
    case: GroupCase,
    continuous: Continuous,
    stratum: Stratum,
}

impl OrbitLabel {
    pub fn new(case: GroupCase, continuous: Continuous, stratum: Stratum) -> Self {
        OrbitLabel {
            case,
            continuous,
            stratum,
        }
    }

    pub fn case(&self) -> GroupCase {
        self.case
    }

    pub fn continuous(&self) -> &Continuous {
        &self.continuous
    }

    pub fn stratum(&self) -> &Stratum {
        &self.stratum
    }
}

impl Serialize for OrbitLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("case", self.case.json_token())?;
        match &self.continuous {
            Continuous::FirstPair { x1, y1 } => {
                map.serialize_entry("q", &[x1, y1])?;
            }
            Continuous::PrimeLevel { q, sgn_x1, sgn_y1 } => {
                map.serialize_entry("Q", q)?;
                map.serialize_entry("sgn_x1", sgn_x1)?;
                if q.is_one() {
                    map.serialize_entry("sgn_y1", sgn_y1)?;
                }
            }
        }
        map.serialize_entry("stratum", self.stratum.token())?;
        match &self.stratum {
            Stratum::ConeSigned(sign) => map.serialize_entry("sign", sign)?,
            Stratum::ConeParam(s_param) => map.serialize_entry("s", s_param)?,
            _ => {}
        }
        map.end()
    }
}

#[derive(Deserialize)]
struct LabelJson {
    case: GroupCase,
    q: Option<Vec<Rational>>,
    #[serde(rename = "Q")]
    big_q: Option<Rational>,
    sgn_x1: Option<Sign>,
    sgn_y1: Option<Sign>,
    stratum: String,
    sign: Option<Sign>,
    s: Option<Rational>,
}

impl<'de> Deserialize<'de> for OrbitLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = LabelJson::deserialize(d)?;
        let continuous = if raw.case.uses_prime_level() {
            let q = raw
                .big_q
                .ok_or_else(|| D::Error::custom("label needs \"Q\" for this case"))?;
            let sgn_x1 = raw
                .sgn_x1
                .ok_or_else(|| D::Error::custom("label needs \"sgn_x1\""))?;
            let sgn_y1 = match raw.sgn_y1 {
                Some(sign) => sign,
                None if q.is_one() => {
                    return Err(D::Error::custom("label needs \"sgn_y1\" when Q = 1"))
                }
                // x1·y1 = 1 - Q pins the second sign.
                None => {
                    let heads = Rational::one() - &q;
                    match Sign::of(&heads) {
                        Sign::Zero => Sign::Zero,
                        Sign::Pos => sgn_x1,
                        Sign::Neg => sgn_x1.flip(),
                    }
                }
            };
            Continuous::PrimeLevel { q, sgn_x1, sgn_y1 }
        } else {
            let pair = raw
                .q
                .ok_or_else(|| D::Error::custom("label needs \"q\" for this case"))?;
            if pair.len() != 2 {
                return Err(D::Error::custom("\"q\" must be [x1, y1]"));
            }
            let mut it = pair.into_iter();
            Continuous::FirstPair {
                x1: it.next().unwrap(),
                y1: it.next().unwrap(),
            }
        };
        let stratum = match raw.stratum.as_str() {
            "Generic" => Stratum::Generic,
            "Cone" => Stratum::Cone,
            "ConeSigned" => Stratum::ConeSigned(
                raw.sign
                    .ok_or_else(|| D::Error::custom("ConeSigned needs \"sign\""))?,
            ),
            "ConeParam" => Stratum::ConeParam(
                raw.s
                    .ok_or_else(|| D::Error::custom("ConeParam needs \"s\""))?,
            ),
            "XZero" => Stratum::XZero,
            "YZero" => Stratum::YZero,
            "Origin" => Stratum::Origin,
            "NullPair" => Stratum::NullPair,
            other => return Err(D::Error::custom(format!("unknown stratum {other:?}"))),
        };
        Ok(OrbitLabel::new(raw.case, continuous, stratum))
    }
}

/// The n = 2 rotation parameter: the unique s with y' = s·(-x'_2, x'_1).
/// Requires a null pair with both blocks nonzero; both defining equations
/// are asserted exactly.
fn cone_param(p: &Point) -> Rational {
    let (a, b) = (&p.x_prime()[0], &p.x_prime()[1]);
    let (c, d) = (&p.y_prime()[0], &p.y_prime()[1]);
    let s = if !b.is_zero() { -(c / b) } else { d / a };
    assert_eq!(c, &-(&s * b), "rotation parameter equations disagree");
    assert_eq!(d, &(&s * a), "rotation parameter equations disagree");
    s
}

/// Orientation sign of an n = 2 null pair: sgn(x'_1 y'_2 - x'_2 y'_1).
fn cone_sign(p: &Point) -> Sign {
    let det = &p.x_prime()[0] * &p.y_prime()[1] - &p.x_prime()[1] * &p.y_prime()[0];
    Sign::of(&det)
}

/// Stratum of the (x', y') pair on the null cone, refined per case.
fn null_pair_stratum(case: GroupCase, p: &Point) -> Stratum {
    let x_zero = p.x_prime().iter().all(Rational::is_zero);
    let y_zero = p.y_prime().iter().all(Rational::is_zero);
    match (x_zero, y_zero) {
        (true, true) => Stratum::Origin,
        _ if matches!(case, GroupCase::TildeH | GroupCase::TildeHTorus) => Stratum::NullPair,
        (true, false) => Stratum::XZero,
        (false, true) => Stratum::YZero,
        (false, false) => match case {
            GroupCase::H1 if p.n() == 2 => Stratum::ConeParam(cone_param(p)),
            GroupCase::GlPlus | GroupCase::H if p.n() == 2 => Stratum::ConeSigned(cone_sign(p)),
            _ => Stratum::Cone,
        },
    }
}

/// Exact orbit classification of a point under one of the five cases.
pub fn classify(case: GroupCase, p: &Point) -> OrbitLabel {
    let q = p.prime_pairing();
    let continuous = if case.uses_prime_level() {
        Continuous::PrimeLevel {
            q: q.clone(),
            sgn_x1: Sign::of(p.x1()),
            sgn_y1: Sign::of(p.y1()),
        }
    } else {
        let (x1, y1) = p.first_pair();
        Continuous::FirstPair { x1, y1 }
    };
    let stratum = if q.is_zero() {
        null_pair_stratum(case, p)
    } else {
        Stratum::Generic
    };
    OrbitLabel::new(case, continuous, stratum)
}

/// Exact same-orbit decision: label equality.
pub fn same_orbit(case: GroupCase, a: &Point, b: &Point) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    Ok(classify(case, a) == classify(case, b))
}

/// The label of the swap involution's image, for the torus-extended cases.
/// The involution fixes the heads, exchanges the vanishing-block strata, and
/// flips the n = 2 orientation sign.
pub fn swap_label_transport(label: &OrbitLabel) -> Result<OrbitLabel> {
    if !label.case().uses_prime_level() {
        return Err(Error::InvalidInput(
            "swap transport applies to the torus-extended cases".into(),
        ));
    }
    let stratum = match label.stratum() {
        Stratum::XZero => Stratum::YZero,
        Stratum::YZero => Stratum::XZero,
        Stratum::ConeSigned(sign) => Stratum::ConeSigned(sign.flip()),
        other => other.clone(),
    };
    Ok(OrbitLabel::new(
        label.case(),
        label.continuous().clone(),
        stratum,
    ))
}

fn unit_vector(n: usize, k: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[k] = Rational::one();
    v
}

/// A fixed canonical point with the given label, or an emptiness error when
/// no point of that dimension carries it.
pub fn representative(n: usize, label: &OrbitLabel) -> Result<Point> {
    let empty = || Error::EmptyOrbit { n };
    let (x1, y1) = match label.continuous() {
        Continuous::FirstPair { x1, y1 } => (x1.clone(), y1.clone()),
        Continuous::PrimeLevel { q, sgn_x1, sgn_y1 } => {
            let x1 = match sgn_x1 {
                Sign::Zero => Rational::zero(),
                Sign::Pos => Rational::one(),
                Sign::Neg => -Rational::one(),
            };
            let y1 = if x1.is_zero() {
                if !q.is_one() {
                    return Err(empty());
                }
                match sgn_y1 {
                    Sign::Zero => Rational::zero(),
                    Sign::Pos => Rational::one(),
                    Sign::Neg => -Rational::one(),
                }
            } else {
                (Rational::one() - q) / &x1
            };
            if Sign::of(&y1) != *sgn_y1 {
                return Err(empty());
            }
            (x1, y1)
        }
    };
    let target = Rational::one() - &x1 * &y1;
    let (xp, yp) = match label.stratum() {
        Stratum::Generic => {
            let mut yp = vec![Rational::zero(); n];
            yp[0] = target.clone();
            (unit_vector(n, 0), yp)
        }
        Stratum::Cone | Stratum::NullPair => {
            if !target.is_zero() {
                return Err(empty());
            }
            (unit_vector(n, 0), unit_vector(n, 1))
        }
        Stratum::ConeSigned(sign) => {
            if !target.is_zero() || n != 2 || *sign == Sign::Zero {
                return Err(empty());
            }
            let mut yp = unit_vector(n, 1);
            if *sign == Sign::Neg {
                yp[1] = -&yp[1];
            }
            (unit_vector(n, 0), yp)
        }
        Stratum::ConeParam(s_param) => {
            if !target.is_zero() || n != 2 || s_param.is_zero() {
                return Err(empty());
            }
            let mut yp = vec![Rational::zero(); n];
            yp[1] = s_param.clone();
            (unit_vector(n, 0), yp)
        }
        Stratum::XZero => {
            if !target.is_zero() {
                return Err(empty());
            }
            (vec![Rational::zero(); n], unit_vector(n, 0))
        }
        Stratum::YZero => {
            if !target.is_zero() {
                return Err(empty());
            }
            (unit_vector(n, 0), vec![Rational::zero(); n])
        }
        Stratum::Origin => {
            if !target.is_zero() {
                return Err(empty());
            }
            (vec![Rational::zero(); n], vec![Rational::zero(); n])
        }
    };
    let p = Point::new(n, x1, xp, y1, yp).map_err(|_| empty())?;
    if &classify(label.case(), &p) != label {
        return Err(empty());
    }
    Ok(p)
}

/// One line of a census: a distinct label (or a one-parameter family of
/// labels) with its sample count. Fields that the fiber pins are omitted.
#[derive(Debug, Clone, Serialize)]
pub struct CensusEntry {
    pub stratum: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sgn_x1: Option<Sign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sgn_y1: Option<Sign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y1: Option<Rational>,
    pub count: usize,
}

/// Distinct-label census of one fiber of an invariant map.
#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub case: GroupCase,
    pub n: usize,
    pub fiber: FiberSpec,
    pub labels: Vec<CensusEntry>,
    /// Number of distinct labels, counting a continuum family once.
    pub distinct: usize,
    pub continuum: bool,
}

/// Samples the fiber with forced degenerate draws, classifies every sample,
/// and aggregates distinct labels. The n = 2 unimodular cone labels form a
/// one-parameter family and are reported as one entry with the parameters
/// seen and the continuum flag set.
pub fn fiber_census(
    case: GroupCase,
    fiber: &FiberSpec,
    n: usize,
    samples: usize,
    stream: &mut SeedStream,
) -> Result<CensusReport> {
    if n < 2 {
        return Err(Error::UnsupportedDimension { n });
    }
    if samples == 0 {
        return Err(Error::InvalidInput("census needs at least one sample".into()));
    }
    let streams: Vec<SeedStream> = (0..samples).map(|_| stream.fork()).collect();
    let labels: Vec<OrbitLabel> = match fiber {
        FiberSpec::FirstPair { x1, y1 } => {
            let target = Rational::one() - x1 * y1;
            let patterns = sampling::first_pair_fiber_patterns(target.is_zero());
            exec::map_indexed(samples, |i| {
                let mut local = streams[i].clone();
                let p = sampling::point_in_first_pair_fiber(
                    n,
                    x1,
                    y1,
                    patterns[i % patterns.len()],
                    &mut local,
                );
                classify(case, &p)
            })
        }
        FiberSpec::PrimePairing { t } => {
            let draws = sampling::prime_pairing_fiber_draws(t);
            exec::map_indexed(samples, |i| {
                let mut local = streams[i].clone();
                let p = sampling::point_in_prime_pairing_fiber(
                    n,
                    t,
                    draws[i % draws.len()],
                    &mut local,
                );
                classify(case, &p)
            })
        }
    };

    let mut counts: BTreeMap<OrbitLabel, usize> = BTreeMap::new();
    for label in labels {
        *counts.entry(label).or_default() += 1;
    }

    struct Acc {
        params: Vec<Rational>,
        count: usize,
        family: bool,
    }
    let mut agg: BTreeMap<OrbitLabel, Acc> = BTreeMap::new();
    for (label, count) in counts {
        let (key, param) = match label.stratum() {
            Stratum::ConeParam(s_param) => {
                let s_param = s_param.clone();
                (
                    OrbitLabel::new(
                        label.case(),
                        label.continuous().clone(),
                        Stratum::ConeParam(Rational::zero()),
                    ),
                    Some(s_param),
                )
            }
            _ => (label, None),
        };
        let acc = agg.entry(key).or_insert(Acc {
            params: Vec::new(),
            count: 0,
            family: false,
        });
        acc.count += count;
        if let Some(s_param) = param {
            acc.params.push(s_param);
            acc.family = true;
        }
    }

    let pinned_heads = matches!(fiber, FiberSpec::FirstPair { .. });
    let mut entries = Vec::with_capacity(agg.len());
    let mut continuum = false;
    let distinct = agg.len();
    for (key, acc) in agg {
        continuum |= acc.family;
        let (sign, params) = match key.stratum() {
            Stratum::ConeSigned(sign) => (Some(*sign), None),
            Stratum::ConeParam(_) => (None, Some(acc.params)),
            _ => (None, None),
        };
        let (sgn_x1, sgn_y1, x1, y1) = match key.continuous() {
            Continuous::PrimeLevel { q, sgn_x1, sgn_y1 } => (
                Some(*sgn_x1),
                q.is_one().then_some(*sgn_y1),
                None,
                None,
            ),
            Continuous::FirstPair { x1, y1 } if !pinned_heads => {
                (None, None, Some(x1.clone()), Some(y1.clone()))
            }
            Continuous::FirstPair { .. } => (None, None, None, None),
        };
        entries.push(CensusEntry {
            stratum: key.stratum().token(),
            sign,
            params,
            sgn_x1,
            sgn_y1,
            x1,
            y1,
            count: acc.count,
        });
    }

    Ok(CensusReport {
        case,
        n,
        fiber: fiber.clone(),
        labels: entries,
        distinct,
        continuum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{sample_element, GroupElement};
    use crate::sampling::mixed_point;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn ints(vals: &[i64]) -> Vec<Rational> {
        vals.iter().map(|&v| Rational::from_int(v)).collect()
    }

    fn point(n: usize, x1: Rational, xp: &[i64], y1: Rational, yp: &[i64]) -> Point {
        Point::new(n, x1, ints(xp), y1, ints(yp)).unwrap()
    }

    #[test]
    fn classify_base_point() {
        let label = classify(GroupCase::H1, &Point::base(3).unwrap());
        assert_eq!(
            label,
            OrbitLabel::new(
                GroupCase::H1,
                Continuous::FirstPair {
                    x1: r(1, 1),
                    y1: r(1, 1)
                },
                Stratum::Origin
            )
        );
        assert_eq!(
            serde_json::to_string(&label).unwrap(),
            r#"{"case":"H1","q":["1","1"],"stratum":"Origin"}"#
        );
    }

    #[test]
    fn classify_cone_example() {
        let p = point(3, r(2, 1), &[1, 0, 0], r(1, 2), &[0, 1, 0]);
        assert_eq!(*classify(GroupCase::H1, &p).stratum(), Stratum::Cone);
    }

    #[test]
    fn classify_cone_param_example() {
        let p = point(2, r(1, 1), &[1, 0], r(1, 1), &[0, 3]);
        assert_eq!(
            *classify(GroupCase::H1, &p).stratum(),
            Stratum::ConeParam(r(3, 1))
        );
        assert_eq!(
            *classify(GroupCase::GlPlus, &p).stratum(),
            Stratum::ConeSigned(Sign::Pos)
        );
    }

    #[test]
    fn classify_head_axis_example() {
        let p = point(3, r(2, 1), &[1, 0, 0], r(0, 1), &[1, 0, 0]);
        let label = classify(GroupCase::H, &p);
        assert_eq!(
            label.continuous(),
            &Continuous::PrimeLevel {
                q: r(1, 1),
                sgn_x1: Sign::Pos,
                sgn_y1: Sign::Zero
            }
        );
        assert_eq!(*label.stratum(), Stratum::Generic);
        assert_eq!(
            serde_json::to_string(&label).unwrap(),
            r#"{"case":"H","Q":"1","sgn_x1":"+","sgn_y1":"0","stratum":"Generic"}"#
        );
    }

    #[test]
    fn classify_null_pair_example() {
        let p = point(3, r(1, 1), &[1, 0, 0], r(1, 1), &[0, 1, 0]);
        let label = classify(GroupCase::TildeHTorus, &p);
        assert_eq!(*label.stratum(), Stratum::NullPair);
        assert_eq!(
            label.continuous(),
            &Continuous::PrimeLevel {
                q: r(0, 1),
                sgn_x1: Sign::Pos,
                sgn_y1: Sign::Pos
            }
        );
    }

    #[test]
    fn label_json_roundtrip() {
        let labels = [
            classify(GroupCase::H1, &point(2, r(1, 1), &[1, 0], r(1, 1), &[0, 3])),
            classify(GroupCase::GlPlus, &point(2, r(1, 1), &[1, 0], r(1, 1), &[0, -2])),
            classify(GroupCase::H, &point(3, r(2, 1), &[1, 0, 0], r(1, 2), &[0, 1, 0])),
            classify(GroupCase::TildeHTorus, &Point::base(4).unwrap()),
            classify(GroupCase::TildeH, &Point::base(2).unwrap()),
        ];
        for label in labels {
            let text = serde_json::to_string(&label).unwrap();
            let back: OrbitLabel = serde_json::from_str(&text).unwrap();
            assert_eq!(back, label, "roundtrip failed for {text}");
        }
    }

    #[test]
    fn label_json_derives_redundant_sign() {
        // Q = 3 forces opposite head signs; the y-sign may be omitted.
        let text = r#"{"case":"H","Q":"3","sgn_x1":"+","stratum":"Generic"}"#;
        let label: OrbitLabel = serde_json::from_str(text).unwrap();
        assert_eq!(
            label.continuous(),
            &Continuous::PrimeLevel {
                q: r(3, 1),
                sgn_x1: Sign::Pos,
                sgn_y1: Sign::Neg
            }
        );
        assert!(serde_json::from_str::<OrbitLabel>(
            r#"{"case":"H","Q":"1","sgn_x1":"+","stratum":"Generic"}"#
        )
        .is_err());
    }

    #[test]
    fn classification_is_invariant_under_sampled_actions() {
        let mut stream = SeedStream::new(97);
        for case in GroupCase::ALL {
            for trial in 0..60 {
                let p = mixed_point(3, trial, &mut stream);
                let g = sample_element(case.acting_tag(), 3, &mut stream);
                let moved = g.act(&p).unwrap();
                assert_eq!(
                    classify(case, &moved),
                    classify(case, &p),
                    "case {case:?} trial {trial}"
                );
                assert!(same_orbit(case, &p, &moved).unwrap());
            }
        }
    }

    #[test]
    fn torus_scaled_points_share_their_level_orbit() {
        let p = Point::new(
            3,
            r(1, 1),
            ints(&[1, 0, 0]),
            r(1, 2),
            vec![r(1, 2), r(0, 1), r(0, 1)],
        )
        .unwrap();
        let torus = GroupElement::new(
            GroupTag::ScalingTorus,
            3,
            crate::groups::ElementData::Scalar(r(3, 1)),
        )
        .unwrap();
        let moved = torus.act(&p).unwrap();
        assert!(same_orbit(GroupCase::H, &p, &moved).unwrap());
        assert!(!same_orbit(GroupCase::H1, &p, &moved).unwrap());
    }

    #[test]
    fn distinct_cone_parameters_are_distinct_orbits() {
        let a = point(2, r(1, 1), &[1, 0], r(1, 1), &[0, 3]);
        let b = point(2, r(1, 1), &[1, 0], r(1, 1), &[0, 1]);
        assert!(!same_orbit(GroupCase::H1, &a, &b).unwrap());
        assert!(same_orbit(GroupCase::GlPlus, &a, &b).unwrap());
    }

    #[test]
    fn same_orbit_rejects_mixed_dimensions() {
        let a = Point::base(2).unwrap();
        let b = Point::base(3).unwrap();
        assert!(matches!(
            same_orbit(GroupCase::H1, &a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn swap_transport_examples() {
        let x_zero = classify(GroupCase::H, &point(3, r(1, 1), &[0, 0, 0], r(1, 1), &[1, 0, 0]));
        let transported = swap_label_transport(&x_zero).unwrap();
        assert_eq!(*transported.stratum(), Stratum::YZero);
        assert_eq!(transported.continuous(), x_zero.continuous());

        let origin = classify(GroupCase::H, &point(3, r(2, 1), &[0, 0, 0], r(1, 2), &[0, 0, 0]));
        assert_eq!(swap_label_transport(&origin).unwrap(), origin);

        let null_pair =
            classify(GroupCase::TildeHTorus, &point(3, r(1, 1), &[1, 0, 0], r(1, 1), &[0, 1, 0]));
        assert_eq!(swap_label_transport(&null_pair).unwrap(), null_pair);

        let signed = classify(GroupCase::H, &point(2, r(1, 1), &[1, 0], r(1, 1), &[0, 3]));
        assert_eq!(
            *swap_label_transport(&signed).unwrap().stratum(),
            Stratum::ConeSigned(Sign::Neg)
        );

        assert!(swap_label_transport(&classify(GroupCase::H1, &Point::base(2).unwrap())).is_err());
    }

    #[test]
    fn swap_transport_matches_classification_of_swapped_points() {
        let mut stream = SeedStream::new(101);
        for case in [GroupCase::H, GroupCase::TildeHTorus] {
            for n in [2usize, 3] {
                for trial in 0..60 {
                    let p = mixed_point(n, trial, &mut stream);
                    let lhs = classify(case, &p.swap_involution());
                    let rhs = swap_label_transport(&classify(case, &p)).unwrap();
                    assert_eq!(lhs, rhs, "case {case:?} n {n} trial {trial}");
                }
            }
        }
    }

    #[test]
    fn representative_examples() {
        let base_label = classify(GroupCase::H1, &Point::base(3).unwrap());
        assert_eq!(representative(3, &base_label).unwrap(), Point::base(3).unwrap());

        let cone_label = OrbitLabel::new(
            GroupCase::H1,
            Continuous::FirstPair {
                x1: r(2, 1),
                y1: r(1, 2),
            },
            Stratum::Cone,
        );
        assert_eq!(
            representative(3, &cone_label).unwrap(),
            point(3, r(2, 1), &[1, 0, 0], r(1, 2), &[0, 1, 0])
        );
    }

    #[test]
    fn representative_rejects_unrealizable_labels() {
        // A cone stratum needs the null fiber.
        let bad = OrbitLabel::new(
            GroupCase::H1,
            Continuous::FirstPair {
                x1: r(2, 1),
                y1: r(2, 1),
            },
            Stratum::Cone,
        );
        assert_eq!(representative(3, &bad), Err(Error::EmptyOrbit { n: 3 }));

        // The merged cone label is not an n = 2 label for the block cases.
        let merged = OrbitLabel::new(
            GroupCase::GlPlus,
            Continuous::FirstPair {
                x1: r(1, 1),
                y1: r(1, 1),
            },
            Stratum::Cone,
        );
        assert_eq!(representative(2, &merged), Err(Error::EmptyOrbit { n: 2 }));

        // Sign data inconsistent with the level.
        let clash = OrbitLabel::new(
            GroupCase::H,
            Continuous::PrimeLevel {
                q: r(0, 1),
                sgn_x1: Sign::Pos,
                sgn_y1: Sign::Neg,
            },
            Stratum::Origin,
        );
        assert_eq!(representative(3, &clash), Err(Error::EmptyOrbit { n: 3 }));
    }

    #[test]
    fn census_counts_match_the_orbit_tables() {
        let mut stream = SeedStream::new(103);
        let one = r(1, 1);
        let cases: [(GroupCase, usize, FiberSpec, usize); 8] = [
            (GroupCase::H1, 3, FiberSpec::first_pair(one.clone(), one.clone()), 4),
            (GroupCase::GlPlus, 2, FiberSpec::first_pair(one.clone(), one.clone()), 5),
            (GroupCase::TildeH, 3, FiberSpec::first_pair(one.clone(), one.clone()), 2),
            (GroupCase::H, 3, FiberSpec::prime_pairing(r(1, 1)), 5),
            (GroupCase::H, 3, FiberSpec::prime_pairing(r(0, 1)), 8),
            (GroupCase::H, 2, FiberSpec::prime_pairing(r(0, 1)), 10),
            (GroupCase::H, 3, FiberSpec::prime_pairing(r(3, 1)), 2),
            (GroupCase::TildeHTorus, 3, FiberSpec::prime_pairing(r(0, 1)), 4),
        ];
        for (case, n, fiber, expected) in cases {
            let report = fiber_census(case, &fiber, n, 240, &mut stream).unwrap();
            assert_eq!(
                report.distinct, expected,
                "census {case:?} n {n} fiber {}",
                fiber.token()
            );
            assert!(!report.continuum);
            assert_eq!(report.labels.iter().map(|e| e.count).sum::<usize>(), 240);
        }
    }

    #[test]
    fn census_reports_the_continuum_family() {
        let mut stream = SeedStream::new(107);
        let fiber = FiberSpec::first_pair(r(1, 1), r(1, 1));
        let report = fiber_census(GroupCase::H1, &fiber, 2, 240, &mut stream).unwrap();
        assert!(report.continuum);
        assert_eq!(report.distinct, 4);
        let family = report
            .labels
            .iter()
            .find(|e| e.stratum == "ConeParam")
            .unwrap();
        let params = family.params.as_ref().unwrap();
        assert!(params.len() > 10);
        assert!(params.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn census_json_shape_matches_the_wire_format() {
        let mut stream = SeedStream::new(109);
        let fiber = FiberSpec::prime_pairing(r(0, 1));
        let report = fiber_census(GroupCase::H, &fiber, 3, 120, &mut stream).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.starts_with(r#"{"case":"H","n":3,"fiber":{"Q":"0"},"labels":[{"stratum":"#));
        assert!(text.contains(r#""sgn_x1":"#));
        assert!(text.ends_with(r#""distinct":8,"continuum":false}"#));
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["labels"].as_array().unwrap().len(), 8);
    }

    #[test]
    fn census_is_deterministic_for_a_fixed_seed() {
        let fiber = FiberSpec::prime_pairing(r(0, 1));
        let a = fiber_census(GroupCase::H, &fiber, 3, 200, &mut SeedStream::new(7)).unwrap();
        let b = fiber_census(GroupCase::H, &fiber, 3, 200, &mut SeedStream::new(7)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn representatives_roundtrip_every_census_label() {
        let mut stream = SeedStream::new(113);
        let one = r(1, 1);
        let fibers: [(GroupCase, usize, FiberSpec); 5] = [
            (GroupCase::H1, 3, FiberSpec::first_pair(r(2, 1), r(1, 2))),
            (GroupCase::H1, 3, FiberSpec::first_pair(one.clone(), one.clone())),
            (GroupCase::GlPlus, 2, FiberSpec::first_pair(one.clone(), one.clone())),
            (GroupCase::H, 3, FiberSpec::prime_pairing(r(0, 1))),
            (GroupCase::TildeHTorus, 2, FiberSpec::prime_pairing(r(0, 1))),
        ];
        for (case, n, fiber) in fibers {
            let mut census_stream = stream.fork();
            let report = fiber_census(case, &fiber, n, 120, &mut census_stream).unwrap();
            for entry in &report.labels {
                let continuous = match &fiber {
                    FiberSpec::FirstPair { x1, y1 } if !case.uses_prime_level() => {
                        Continuous::FirstPair {
                            x1: x1.clone(),
                            y1: y1.clone(),
                        }
                    }
                    FiberSpec::PrimePairing { t } => Continuous::PrimeLevel {
                        q: t.clone(),
                        sgn_x1: entry.sgn_x1.unwrap(),
                        sgn_y1: match entry.sgn_y1 {
                            Some(sign) => sign,
                            None => match Sign::of(&(Rational::one() - t)) {
                                Sign::Zero => Sign::Zero,
                                Sign::Pos => entry.sgn_x1.unwrap(),
                                Sign::Neg => entry.sgn_x1.unwrap().flip(),
                            },
                        },
                    },
                    _ => unreachable!("head fibers pin block-case invariants"),
                };
                let stratum = match entry.stratum {
                    "Generic" => Stratum::Generic,
                    "Cone" => Stratum::Cone,
                    "ConeSigned" => Stratum::ConeSigned(entry.sign.unwrap()),
                    "ConeParam" => {
                        Stratum::ConeParam(entry.params.as_ref().unwrap()[0].clone())
                    }
                    "XZero" => Stratum::XZero,
                    "YZero" => Stratum::YZero,
                    "Origin" => Stratum::Origin,
                    "NullPair" => Stratum::NullPair,
                    other => panic!("unexpected stratum {other}"),
                };
                let label = OrbitLabel::new(case, continuous, stratum);
                let rep = representative(n, &label).unwrap();
                assert_eq!(classify(case, &rep), label);
            }
        }
    }
}
