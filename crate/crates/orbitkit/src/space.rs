//! The underlying space: pairs `(x, y)` of real `(n+1)`-vectors with exact
//! pairing `<x, y> = 1`. Coordinates are split as `x = (x1, x')` and
//! `y = (y1, y')` with `x', y'` of length `n`; the constraint then reads
//! `x1*y1 + <x', y'> = 1`, so the two basic invariants
//!
//! * `first_pair = (x1, y1)` and
//! * `prime_pairing = <x', y'> = 1 - x1*y1`
//!
//! are tied together. Points are immutable and validated on construction,
//! which makes every downstream classification decision safe to run without
//! re-checking the constraint.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{dot, Rational};

/// A validated point of the space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    n: usize,
    x1: Rational,
    xp: Vec<Rational>,
    y1: Rational,
    yp: Vec<Rational>,
}

impl Point {
    /// Validates dimensions and the exact pairing constraint.
    pub fn new(
        n: usize,
        x1: Rational,
        xp: Vec<Rational>,
        y1: Rational,
        yp: Vec<Rational>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedDimension { n });
        }
        if xp.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: xp.len(),
            });
        }
        if yp.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: yp.len(),
            });
        }
        let pairing = &x1 * &y1 + dot(&xp, &yp);
        if !pairing.is_one() {
            return Err(Error::ConstraintViolated { pairing });
        }
        Ok(Point { n, x1, xp, y1, yp })
    }

    /// Constructor for coordinates already known to satisfy the constraint.
    pub(crate) fn new_unchecked(
        n: usize,
        x1: Rational,
        xp: Vec<Rational>,
        y1: Rational,
        yp: Vec<Rational>,
    ) -> Self {
        debug_assert!((&x1 * &y1 + dot(&xp, &yp)).is_one());
        Point { n, x1, xp, y1, yp }
    }

    /// The base point `(e1, e1)`.
    pub fn base(n: usize) -> Result<Self> {
        let mut xp = vec![Rational::zero(); n];
        let yp = xp.clone();
        xp.truncate(n);
        Point::new(n, Rational::one(), xp, Rational::one(), yp)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x1(&self) -> &Rational {
        &self.x1
    }

    pub fn x_prime(&self) -> &[Rational] {
        &self.xp
    }

    pub fn y1(&self) -> &Rational {
        &self.y1
    }

    pub fn y_prime(&self) -> &[Rational] {
        &self.yp
    }

    /// Recomputes `<x, y>`; equals 1 for every constructed point.
    pub fn pairing(&self) -> Rational {
        &self.x1 * &self.y1 + dot(&self.xp, &self.yp)
    }

    /// The invariant pair `(x1, y1)` of the block actions.
    pub fn first_pair(&self) -> (Rational, Rational) {
        (self.x1.clone(), self.y1.clone())
    }

    /// The invariant `<x', y'> = 1 - x1*y1`. Both expressions are computed
    /// and compared; a mismatch means corrupted coordinates.
    pub fn prime_pairing(&self) -> Rational {
        let from_heads = Rational::one() - &self.x1 * &self.y1;
        let from_primes = dot(&self.xp, &self.yp);
        assert_eq!(from_heads, from_primes, "point coordinates are corrupted");
        from_heads
    }

    /// The involution `(x1, x', y1, y') -> (x1, -y', y1, -x')`. It fixes the
    /// head coordinates, preserves the pairing, and squares to the identity.
    pub fn swap_involution(&self) -> Point {
        Point::new_unchecked(
            self.n,
            self.x1.clone(),
            self.yp.iter().map(|v| -v).collect(),
            self.y1.clone(),
            self.xp.iter().map(|v| -v).collect(),
        )
    }

    /// Chart over `x1 != 0`: coordinates `(x1, x', y')` with `y1` recoverable
    /// as `(1 - <x', y'>) / x1`.
    pub fn chart_a(&self) -> Result<(Rational, Vec<Rational>, Vec<Rational>)> {
        if self.x1.is_zero() {
            return Err(Error::ChartDomain("x1 = 0"));
        }
        Ok((self.x1.clone(), self.xp.clone(), self.yp.clone()))
    }

    /// Mirror chart over `y1 != 0`: coordinates `(y1, x', y')`.
    pub fn chart_a_dual(&self) -> Result<(Rational, Vec<Rational>, Vec<Rational>)> {
        if self.y1.is_zero() {
            return Err(Error::ChartDomain("y1 = 0"));
        }
        Ok((self.y1.clone(), self.xp.clone(), self.yp.clone()))
    }

    /// Chart over `x1*y1 < 1`: the pair `(xi, eta) = (x', y' / (1 - x1*y1))`
    /// lands exactly on `<xi, eta> = 1`, together with the head pair.
    #[allow(clippy::type_complexity)]
    pub fn chart_b(&self) -> Result<((Vec<Rational>, Vec<Rational>), (Rational, Rational))> {
        let q = self.prime_pairing();
        if !q.is_positive() {
            return Err(Error::ChartDomain("x1 * y1 >= 1"));
        }
        let inv_q = q.recip();
        let eta: Vec<Rational> = self.yp.iter().map(|v| v * &inv_q).collect();
        debug_assert!(dot(&self.xp, &eta).is_one());
        Ok(((self.xp.clone(), eta), (self.x1.clone(), self.y1.clone())))
    }
}

/// Inverse of [`Point::chart_a`]: reconstructs `y1 = (1 - <x', y'>) / x1`.
pub fn chart_a_inverse(
    n: usize,
    x1: Rational,
    xp: Vec<Rational>,
    yp: Vec<Rational>,
) -> Result<Point> {
    if x1.is_zero() {
        return Err(Error::ChartDomain("x1 = 0"));
    }
    if xp.len() != n || yp.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: xp.len().max(yp.len()),
        });
    }
    let y1 = (Rational::one() - dot(&xp, &yp)) / &x1;
    Point::new(n, x1, xp, y1, yp)
}

/// Inverse of [`Point::chart_a_dual`]: reconstructs `x1 = (1 - <x', y'>) / y1`.
pub fn chart_a_dual_inverse(
    n: usize,
    y1: Rational,
    xp: Vec<Rational>,
    yp: Vec<Rational>,
) -> Result<Point> {
    if y1.is_zero() {
        return Err(Error::ChartDomain("y1 = 0"));
    }
    if xp.len() != n || yp.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: xp.len().max(yp.len()),
        });
    }
    let x1 = (Rational::one() - dot(&xp, &yp)) / &y1;
    Point::new(n, x1, xp, y1, yp)
}

/// Inverse of [`Point::chart_b`]. Requires `<xi, eta> = 1` and `x1*y1 < 1`.
pub fn chart_b_inverse(
    pair: (Vec<Rational>, Vec<Rational>),
    heads: (Rational, Rational),
) -> Result<Point> {
    let (xi, eta) = pair;
    let (x1, y1) = heads;
    if xi.len() != eta.len() {
        return Err(Error::DimensionMismatch {
            expected: xi.len(),
            got: eta.len(),
        });
    }
    let q = Rational::one() - &x1 * &y1;
    if !q.is_positive() {
        return Err(Error::ChartDomain("x1 * y1 >= 1"));
    }
    if !dot(&xi, &eta).is_one() {
        return Err(Error::ChartDomain("<xi, eta> != 1"));
    }
    let n = xi.len();
    let yp: Vec<Rational> = eta.iter().map(|v| v * &q).collect();
    Point::new(n, x1, xi, y1, yp)
}

/// A fiber of one of the two invariant maps: either a level of
/// `(x1, y1)` or a level of `<x', y'>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiberSpec {
    /// Fiber of `point -> (x1, y1)`.
    FirstPair { x1: Rational, y1: Rational },
    /// Fiber of `point -> <x', y'>`.
    PrimePairing { t: Rational },
}

impl FiberSpec {
    pub fn first_pair(x1: Rational, y1: Rational) -> Self {
        FiberSpec::FirstPair { x1, y1 }
    }

    pub fn prime_pairing(t: Rational) -> Self {
        FiberSpec::PrimePairing { t }
    }

    /// Short token used in report names, e.g. `q(1,1)` or `Q(0)`.
    pub fn token(&self) -> String {
        match self {
            FiberSpec::FirstPair { x1, y1 } => format!("q({x1},{y1})"),
            FiberSpec::PrimePairing { t } => format!("Q({t})"),
        }
    }
}

impl Serialize for FiberSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(1))?;
        match self {
            FiberSpec::FirstPair { x1, y1 } => map.serialize_entry("q", &[x1, y1])?,
            FiberSpec::PrimePairing { t } => map.serialize_entry("Q", t)?,
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FiberSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            q: Option<Vec<Rational>>,
            #[serde(rename = "Q")]
            big_q: Option<Rational>,
        }
        let raw = Raw::deserialize(d)?;
        match (raw.q, raw.big_q) {
            (Some(pair), None) if pair.len() == 2 => {
                let mut it = pair.into_iter();
                Ok(FiberSpec::FirstPair {
                    x1: it.next().unwrap(),
                    y1: it.next().unwrap(),
                })
            }
            (None, Some(t)) => Ok(FiberSpec::PrimePairing { t }),
            _ => Err(serde::de::Error::custom(
                "fiber must be {\"q\": [x1, y1]} or {\"Q\": t}",
            )),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    n: usize,
    x1: Rational,
    xp: Vec<Rational>,
    y1: Rational,
    yp: Vec<Rational>,
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointJson {
            n: self.n,
            x1: self.x1.clone(),
            xp: self.xp.clone(),
            y1: self.y1.clone(),
            yp: self.yp.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PointJson::deserialize(d)?;
        Point::new(raw.n, raw.x1, raw.xp, raw.y1, raw.yp).map_err(serde::de::Error::custom)
    }
}
