//! Infinitesimal side of the block and split orthogonal actions on the
//! (x', y') cone: generator bases, fundamental vector fields, the exact
//! rank/span comparison across strata, and floating-point invariance
//! residuals along one-parameter flows.
//!
//! The span comparison is the exact story: on a stratum the block fields and
//! the split orthogonal fields either span the same tangent space or the
//! block span degenerates. The residuals are the numeric cross-check: a
//! central difference of each preserved scalar along each flow, which sits
//! at rounding-noise level because the flows preserve the scalars exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::groups::GroupTag;
use crate::matrix::RatMatrix;
use crate::rational::{Rational, Sign};
use crate::sampling::{pair_with_product, PairPattern};
use crate::seed::SeedStream;
use crate::space::Point;

/// Central-difference step for the flow residuals.
pub const RESIDUAL_STEP: f64 = 1e-5;
/// Residuals of preserved scalars must sit below this.
pub const RESIDUAL_THRESHOLD: f64 = 1e-9;
/// Witness residuals of moving coordinates must sit above this.
pub const WITNESS_FLOOR: f64 = 1e-3;

fn unit(dim: usize, i: usize, j: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(dim, dim);
    m.set(i, j, Rational::one());
    m
}

/// Embeds a block generator A as its action on concatenated (x', y'):
/// x' moves by A, y' by the negated transpose.
fn block_generator(a: &RatMatrix) -> RatMatrix {
    let n = a.rows();
    RatMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r < n && c < n {
            a.get(r, c).clone()
        } else if r >= n && c >= n {
            -a.get(c - n, r - n)
        } else {
            Rational::zero()
        }
    })
}

/// Generator basis of one of the acting algebras, as matrices on the
/// concatenated block coordinates.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    tag: GroupTag,
    n: usize,
    generators: Vec<RatMatrix>,
}

impl AlgebraBasis {
    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[RatMatrix] {
        &self.generators
    }
}

/// The generator basis for a supported tag: the full block algebra, its
/// traceless subalgebra, the split orthogonal algebra, or the scaling line.
pub fn algebra_basis(tag: GroupTag, n: usize) -> Result<AlgebraBasis> {
    if n < 2 {
        return Err(Error::UnsupportedDimension { n });
    }
    let mut generators = Vec::new();
    match tag {
        GroupTag::GlPlus => {
            for i in 0..n {
                for j in 0..n {
                    generators.push(block_generator(&unit(n, i, j)));
                }
            }
        }
        GroupTag::H1 => {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        generators.push(block_generator(&unit(n, i, j)));
                    }
                }
            }
            for i in 0..n - 1 {
                let mut a = unit(n, i, i);
                a.set(i + 1, i + 1, -Rational::one());
                generators.push(block_generator(&a));
            }
        }
        GroupTag::TildeH => {
            for i in 0..n {
                for j in 0..n {
                    generators.push(block_generator(&unit(n, i, j)));
                }
            }
            // Off-diagonal blocks are skew: [[0, B], [0, 0]] and its mirror.
            for i in 0..n {
                for j in i + 1..n {
                    let mut upper = RatMatrix::zeros(2 * n, 2 * n);
                    upper.set(i, n + j, Rational::one());
                    upper.set(j, n + i, -Rational::one());
                    generators.push(upper);
                    let mut lower = RatMatrix::zeros(2 * n, 2 * n);
                    lower.set(n + i, j, Rational::one());
                    lower.set(n + j, i, -Rational::one());
                    generators.push(lower);
                }
            }
        }
        GroupTag::ScalingTorus => {
            let mut z = RatMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                z.set(i, i, Rational::one());
                z.set(n + i, n + i, -Rational::one());
            }
            generators.push(z);
        }
        _ => return Err(Error::UnsupportedTag),
    }
    Ok(AlgebraBasis { tag, n, generators })
}

/// Fundamental vector fields at v: one row Z·v per generator Z.
pub fn fundamental_fields_at(basis: &AlgebraBasis, v: &[Rational]) -> RatMatrix {
    assert_eq!(v.len(), 2 * basis.n, "point has the wrong block dimension");
    let rows: Vec<Vec<Rational>> = basis
        .generators
        .iter()
        .map(|z| z.mul_vec(v).expect("generator dimension matches"))
        .collect();
    RatMatrix::from_rows(rows).expect("field rows share a length")
}

/// Exact rank comparison of the block fields against the split orthogonal
/// fields at one block pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpanReport {
    pub rank_gl: usize,
    pub rank_so: usize,
    pub rank_union: usize,
    pub spans_equal: bool,
}

/// Ranks of the two field families and their union at (x', y').
pub fn span_compare(xp: &[Rational], yp: &[Rational]) -> SpanReport {
    assert_eq!(xp.len(), yp.len(), "blocks must share a dimension");
    let n = xp.len();
    let v: Vec<Rational> = xp.iter().chain(yp.iter()).cloned().collect();
    let gl = algebra_basis(GroupTag::GlPlus, n).expect("block algebra exists");
    let so = algebra_basis(GroupTag::TildeH, n).expect("split algebra exists");
    let gl_fields = fundamental_fields_at(&gl, &v);
    let so_fields = fundamental_fields_at(&so, &v);
    let rank_gl = gl_fields.rank();
    let rank_so = so_fields.rank();
    let rank_union = RatMatrix::stack(&gl_fields, &so_fields)
        .expect("field families share the block dimension")
        .rank();
    SpanReport {
        rank_gl,
        rank_so,
        rank_union,
        spans_equal: rank_gl == rank_union && rank_so == rank_union,
    }
}

/// One stratum's row of the rank table.
#[derive(Debug, Clone, Serialize)]
pub struct RankRow {
    pub name: &'static str,
    pub rank_gl: usize,
    pub rank_so: usize,
    pub rank_union: usize,
    pub equal: bool,
    pub samples: usize,
}

/// Stratum-by-stratum rank comparison of the two field families.
#[derive(Debug, Clone, Serialize)]
pub struct RankTable {
    pub n: usize,
    pub strata: Vec<RankRow>,
}

const RANK_STRATA: [&str; 5] = ["Generic", "Cone", "XZero", "YZero", "Origin"];

fn rank_stratum_pair(
    name: &str,
    n: usize,
    stream: &mut SeedStream,
) -> (Vec<Rational>, Vec<Rational>) {
    let zero = Rational::zero();
    match name {
        "Generic" => {
            let target = stream.nonzero_rational(3);
            pair_with_product(n, &target, PairPattern::Free, stream)
        }
        "Cone" => {
            let sign = if stream.coin() { Sign::Pos } else { Sign::Neg };
            pair_with_product(n, &zero, PairPattern::Cone(sign), stream)
        }
        "XZero" => pair_with_product(n, &zero, PairPattern::XZero, stream),
        "YZero" => pair_with_product(n, &zero, PairPattern::YZero, stream),
        "Origin" => pair_with_product(n, &zero, PairPattern::Origin, stream),
        other => unreachable!("unknown rank stratum {other}"),
    }
}

/// Samples every stratum, compares field spans at each draw, and requires
/// the ranks to be constant within each stratum.
pub fn rank_map(n: usize, samples: usize, stream: &mut SeedStream) -> Result<RankTable> {
    if n < 2 {
        return Err(Error::UnsupportedDimension { n });
    }
    if samples == 0 {
        return Err(Error::InvalidInput("rank map needs at least one sample".into()));
    }
    let total = RANK_STRATA.len() * samples;
    let streams: Vec<SeedStream> = (0..total).map(|_| stream.fork()).collect();
    let reports: Vec<SpanReport> = exec::map_indexed(total, |i| {
        let mut local = streams[i].clone();
        let name = RANK_STRATA[i / samples];
        let (xp, yp) = rank_stratum_pair(name, n, &mut local);
        span_compare(&xp, &yp)
    });
    let mut strata = Vec::with_capacity(RANK_STRATA.len());
    for (k, name) in RANK_STRATA.iter().enumerate() {
        let chunk = &reports[k * samples..(k + 1) * samples];
        let first = chunk[0];
        if chunk.iter().any(|r| *r != first) {
            return Err(Error::Inconsistent(format!(
                "rank profile varies within stratum {name}"
            )));
        }
        strata.push(RankRow {
            name,
            rank_gl: first.rank_gl,
            rank_so: first.rank_so,
            rank_union: first.rank_union,
            equal: first.spans_equal,
            samples,
        });
    }
    Ok(RankTable { n, strata })
}

/// Floating-point image of a point, for the finite-difference residuals.
#[derive(Debug, Clone)]
pub struct FloatPoint {
    pub x1: f64,
    pub xp: Vec<f64>,
    pub y1: f64,
    pub yp: Vec<f64>,
}

impl FloatPoint {
    pub fn n(&self) -> usize {
        self.xp.len()
    }

    pub fn prime_pairing(&self) -> f64 {
        self.xp.iter().zip(&self.yp).map(|(a, b)| a * b).sum()
    }

    pub fn heads_product(&self) -> f64 {
        self.x1 * self.y1
    }
}

impl From<&Point> for FloatPoint {
    fn from(p: &Point) -> Self {
        FloatPoint {
            x1: p.x1().to_f64(),
            xp: p.x_prime().iter().map(Rational::to_f64).collect(),
            y1: p.y1().to_f64(),
            yp: p.y_prime().iter().map(Rational::to_f64).collect(),
        }
    }
}

/// A one-parameter subgroup of one of the supported actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowCurve {
    /// Block x' += t·x'_j at slot i, with the inverse-transpose on y'.
    Transvection { i: usize, j: usize },
    /// Block coordinate i stretched by e^t on x', e^{-t} on y'.
    DiagExp { i: usize },
    /// Traceless stretch: e^t at slot i, e^{-t} at slot i + 1.
    TraceDiag { i: usize },
    /// Skew upper block: x' += t·(E_ij - E_ji)·y'.
    UpperSkew { i: usize, j: usize },
    /// Skew lower block: y' += t·(E_ij - E_ji)·x'.
    LowerSkew { i: usize, j: usize },
    /// Global scaling (e^t·x, e^{-t}·y).
    Torus,
    /// Head-only scaling, the torus factor of the split product action.
    HeadsTorus,
}

/// The point moved by the flow at parameter t.
pub fn flow_point(flow: FlowCurve, p: &FloatPoint, t: f64) -> FloatPoint {
    let mut q = p.clone();
    match flow {
        FlowCurve::Transvection { i, j } => {
            q.xp[i] += t * p.xp[j];
            q.yp[j] -= t * p.yp[i];
        }
        FlowCurve::DiagExp { i } => {
            q.xp[i] *= t.exp();
            q.yp[i] *= (-t).exp();
        }
        FlowCurve::TraceDiag { i } => {
            q.xp[i] *= t.exp();
            q.xp[i + 1] *= (-t).exp();
            q.yp[i] *= (-t).exp();
            q.yp[i + 1] *= t.exp();
        }
        FlowCurve::UpperSkew { i, j } => {
            q.xp[i] += t * p.yp[j];
            q.xp[j] -= t * p.yp[i];
        }
        FlowCurve::LowerSkew { i, j } => {
            q.yp[i] += t * p.xp[j];
            q.yp[j] -= t * p.xp[i];
        }
        FlowCurve::Torus => {
            q.x1 *= t.exp();
            q.y1 *= (-t).exp();
            for c in &mut q.xp {
                *c *= t.exp();
            }
            for c in &mut q.yp {
                *c *= (-t).exp();
            }
        }
        FlowCurve::HeadsTorus => {
            q.x1 *= t.exp();
            q.y1 *= (-t).exp();
        }
    }
    q
}

/// Generating flows of a supported action.
pub fn flows_for(tag: GroupTag, n: usize) -> Result<Vec<FlowCurve>> {
    if n < 2 {
        return Err(Error::UnsupportedDimension { n });
    }
    let transvections = || {
        let mut flows = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    flows.push(FlowCurve::Transvection { i, j });
                }
            }
        }
        flows
    };
    let mut flows = match tag {
        GroupTag::H1 => {
            let mut f = transvections();
            f.extend((0..n - 1).map(|i| FlowCurve::TraceDiag { i }));
            f
        }
        GroupTag::GlPlus | GroupTag::GlPlusTimesTorus => {
            let mut f = transvections();
            f.extend((0..n).map(|i| FlowCurve::DiagExp { i }));
            f
        }
        GroupTag::TildeH | GroupTag::TildeHTimesTorus => {
            let mut f = transvections();
            f.extend((0..n).map(|i| FlowCurve::DiagExp { i }));
            for i in 0..n {
                for j in i + 1..n {
                    f.push(FlowCurve::UpperSkew { i, j });
                    f.push(FlowCurve::LowerSkew { i, j });
                }
            }
            f
        }
        GroupTag::ScalingTorus => Vec::new(),
        _ => return Err(Error::UnsupportedTag),
    };
    match tag {
        GroupTag::ScalingTorus | GroupTag::GlPlusTimesTorus => flows.push(FlowCurve::Torus),
        GroupTag::TildeHTimesTorus => flows.push(FlowCurve::HeadsTorus),
        _ => {}
    }
    Ok(flows)
}

fn central_difference(f: impl Fn(&FloatPoint) -> f64, flow: FlowCurve, p: &FloatPoint, step: f64) -> f64 {
    let plus = f(&flow_point(flow, p, step));
    let minus = f(&flow_point(flow, p, -step));
    (plus - minus) / (2.0 * step)
}

/// Largest central-difference derivative of the action's preserved scalars
/// along one flow. The scalars are the head pair for the block actions and
/// the head product plus the block pairing once a torus is present.
pub fn invariance_residual(tag: GroupTag, flow: FlowCurve, p: &FloatPoint, step: f64) -> Result<f64> {
    let scalars: Vec<fn(&FloatPoint) -> f64> = match tag {
        GroupTag::H1 | GroupTag::GlPlus | GroupTag::TildeH => vec![
            |p| p.x1,
            |p| p.y1,
            FloatPoint::prime_pairing,
        ],
        GroupTag::ScalingTorus
        | GroupTag::GlPlusTimesTorus
        | GroupTag::TildeHTimesTorus => vec![
            FloatPoint::heads_product,
            FloatPoint::prime_pairing,
        ],
        _ => return Err(Error::UnsupportedTag),
    };
    Ok(scalars
        .into_iter()
        .map(|f| central_difference(f, flow, p, step).abs())
        .fold(0.0, f64::max))
}

/// Central-difference derivative of a deliberately non-preserved coordinate
/// along one of the action's flows, as a sanity floor for the residuals.
pub fn witness_residual(tag: GroupTag, p: &FloatPoint, step: f64) -> Result<f64> {
    let (flow, f): (FlowCurve, fn(&FloatPoint) -> f64) = match tag {
        GroupTag::H1 => (FlowCurve::TraceDiag { i: 0 }, |p| p.xp[0]),
        GroupTag::GlPlus | GroupTag::TildeH => (FlowCurve::DiagExp { i: 0 }, |p| p.xp[0]),
        GroupTag::ScalingTorus | GroupTag::GlPlusTimesTorus => (FlowCurve::Torus, |p| p.x1),
        GroupTag::TildeHTimesTorus => (FlowCurve::HeadsTorus, |p| p.x1),
        _ => return Err(Error::UnsupportedTag),
    };
    Ok(central_difference(f, flow, p, step).abs())
}
