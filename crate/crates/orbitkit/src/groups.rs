//! The acting matrix groups: tags, membership predicates, exact sampling of
//! identity-component elements, embeddings, and the actions on the space.
//!
//! Membership is a polynomial-equation check (determinant conditions, exact
//! preservation of the split bilinear form). Identity-component membership is
//! guaranteed constructively by the sampler, which only multiplies exact
//! generators of the identity component; it is not decided for arbitrary
//! input matrices.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rational::Rational;
use crate::seed::SeedStream;
use crate::space::Point;

/// The nine group tags. Product tags act componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupTag {
    /// SL(n+1) acting by (g x, g^{-T} y).
    BigG,
    /// SL(n) acting on (x', y') only.
    H1,
    /// GL+(n) acting on (x', y') only.
    GlPlus,
    /// GL+(1): global scaling (t x, t^{-1} y).
    ScalingTorus,
    /// Identity component of the split orthogonal group of <x', y'> on R^{2n}.
    TildeH,
    /// Identity component of the split orthogonal group of <x, y> on R^{2(n+1)}.
    TildeG,
    /// GL+(n) embedded as diag((det h)^{-1}, h), times the scaling torus.
    HTimesTorus,
    /// GL+(n) block action times the scaling torus.
    GlPlusTimesTorus,
    /// TildeH times a torus factor scaling (x1, y1) only.
    TildeHTimesTorus,
}

impl GroupTag {
    pub const ALL: [GroupTag; 9] = [
        GroupTag::BigG,
        GroupTag::H1,
        GroupTag::GlPlus,
        GroupTag::ScalingTorus,
        GroupTag::TildeH,
        GroupTag::TildeG,
        GroupTag::HTimesTorus,
        GroupTag::GlPlusTimesTorus,
        GroupTag::TildeHTimesTorus,
    ];

    pub fn json_token(self) -> &'static str {
        match self {
            GroupTag::BigG => "bigG",
            GroupTag::H1 => "h1",
            GroupTag::GlPlus => "glplus",
            GroupTag::ScalingTorus => "torus",
            GroupTag::TildeH => "tildeH",
            GroupTag::TildeG => "tildeG",
            GroupTag::HTimesTorus => "hTorus",
            GroupTag::GlPlusTimesTorus => "glplusTorus",
            GroupTag::TildeHTimesTorus => "tildeHTorus",
        }
    }

    pub fn from_json_token(token: &str) -> Option<GroupTag> {
        GroupTag::ALL.into_iter().find(|t| t.json_token() == token)
    }

    /// Side length of the matrix data for this tag (the matrix factor for
    /// product tags; 1 for the pure torus).
    pub fn matrix_dim(self, n: usize) -> usize {
        match self {
            GroupTag::BigG => n + 1,
            GroupTag::H1 | GroupTag::GlPlus => n,
            GroupTag::ScalingTorus => 1,
            GroupTag::TildeH => 2 * n,
            GroupTag::TildeG => 2 * (n + 1),
            GroupTag::HTimesTorus | GroupTag::GlPlusTimesTorus => n,
            GroupTag::TildeHTimesTorus => 2 * n,
        }
    }

    /// The matrix-factor tag of a product tag, if any.
    fn factor_tag(self) -> Option<GroupTag> {
        match self {
            GroupTag::HTimesTorus | GroupTag::GlPlusTimesTorus => Some(GroupTag::GlPlus),
            GroupTag::TildeHTimesTorus => Some(GroupTag::TildeH),
            _ => None,
        }
    }
}

/// Gram matrix of the split pairing on R^{2*half}: S = [[0, I], [I, 0]].
pub fn split_gram(half: usize) -> RatMatrix {
    RatMatrix::from_fn(2 * half, 2 * half, |i, j| {
        if i + half == j || j + half == i {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

/// Checks the defining polynomial equations of a plain (non-product) tag.
pub fn matrix_is_member(tag: GroupTag, n: usize, m: &RatMatrix) -> Result<bool> {
    let dim = tag.matrix_dim(n);
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.rows().max(m.cols()),
        });
    }
    match tag {
        GroupTag::BigG | GroupTag::H1 => Ok(m.det()?.is_one()),
        GroupTag::GlPlus => Ok(m.det()?.is_positive()),
        GroupTag::TildeH | GroupTag::TildeG => {
            let half = dim / 2;
            let s = split_gram(half);
            let preserved = m.transpose().mul(&s.mul(m)?)? == s;
            Ok(preserved && m.det()?.is_one())
        }
        GroupTag::ScalingTorus
        | GroupTag::HTimesTorus
        | GroupTag::GlPlusTimesTorus
        | GroupTag::TildeHTimesTorus => Err(Error::UnsupportedTag),
    }
}

/// Payload of a group element: a matrix, a torus scalar, or one of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementData {
    Matrix(RatMatrix),
    Scalar(Rational),
    Pair { m: RatMatrix, t: Rational },
}

/// A validated element of one of the tagged groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    tag: GroupTag,
    n: usize,
    data: ElementData,
}

impl GroupElement {
    pub fn new(tag: GroupTag, n: usize, data: ElementData) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedDimension { n });
        }
        match (&data, tag) {
            (ElementData::Scalar(t), GroupTag::ScalingTorus) => {
                if !t.is_positive() {
                    return Err(Error::NotAMember);
                }
            }
            (ElementData::Matrix(m), tag) if tag.factor_tag().is_none() => {
                if !matrix_is_member(tag, n, m)? {
                    return Err(Error::NotAMember);
                }
            }
            (ElementData::Pair { m, t }, tag) => {
                let factor = tag.factor_tag().ok_or(Error::UnsupportedTag)?;
                if !matrix_is_member(factor, n, m)? || !t.is_positive() {
                    return Err(Error::NotAMember);
                }
            }
            _ => return Err(Error::UnsupportedTag),
        }
        Ok(GroupElement { tag, n, data })
    }

    /// Construction without the membership check, for elements that are
    /// members by construction (sampler products, embeddings).
    pub(crate) fn new_unchecked(tag: GroupTag, n: usize, data: ElementData) -> Self {
        GroupElement { tag, n, data }
    }

    pub fn identity(tag: GroupTag, n: usize) -> Self {
        let data = match tag {
            GroupTag::ScalingTorus => ElementData::Scalar(Rational::one()),
            _ if tag.factor_tag().is_some() => ElementData::Pair {
                m: RatMatrix::identity(tag.matrix_dim(n)),
                t: Rational::one(),
            },
            _ => ElementData::Matrix(RatMatrix::identity(tag.matrix_dim(n))),
        };
        GroupElement { tag, n, data }
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &ElementData {
        &self.data
    }

    /// The matrix payload (matrix factor for product tags).
    pub fn matrix(&self) -> Option<&RatMatrix> {
        match &self.data {
            ElementData::Matrix(m) | ElementData::Pair { m, .. } => Some(m),
            ElementData::Scalar(_) => None,
        }
    }

    /// The torus payload (torus factor for product tags).
    pub fn torus(&self) -> Option<&Rational> {
        match &self.data {
            ElementData::Scalar(t) | ElementData::Pair { t, .. } => Some(t),
            ElementData::Matrix(_) => None,
        }
    }

    pub fn is_member(&self) -> bool {
        match (&self.data, self.tag) {
            (ElementData::Scalar(t), GroupTag::ScalingTorus) => t.is_positive(),
            (ElementData::Matrix(m), tag) => {
                matrix_is_member(tag, self.n, m).unwrap_or(false)
            }
            (ElementData::Pair { m, t }, tag) => match tag.factor_tag() {
                Some(factor) => {
                    t.is_positive() && matrix_is_member(factor, self.n, m).unwrap_or(false)
                }
                None => false,
            },
            _ => false,
        }
    }

    /// Componentwise group product. Exact for every tag here: the matrix and
    /// torus factors of each product tag commute as transformations.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.tag != other.tag || self.n != other.n {
            return Err(Error::InvalidInput(
                "compose requires matching tag and dimension".into(),
            ));
        }
        let data = match (&self.data, &other.data) {
            (ElementData::Matrix(a), ElementData::Matrix(b)) => ElementData::Matrix(a.mul(b)?),
            (ElementData::Scalar(a), ElementData::Scalar(b)) => ElementData::Scalar(a * b),
            (ElementData::Pair { m: a, t: s }, ElementData::Pair { m: b, t: u }) => {
                ElementData::Pair {
                    m: a.mul(b)?,
                    t: s * u,
                }
            }
            _ => return Err(Error::InvalidInput("mismatched element payloads".into())),
        };
        Ok(GroupElement {
            tag: self.tag,
            n: self.n,
            data,
        })
    }

    /// The action on the space. Every branch lands back on it exactly.
    pub fn act(&self, p: &Point) -> Result<Point> {
        if self.n != p.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.n(),
            });
        }
        match (&self.data, self.tag) {
            (ElementData::Matrix(g), GroupTag::BigG) => {
                let x = join(p.x1(), p.x_prime());
                let y = join(p.y1(), p.y_prime());
                let gx = g.mul_vec(&x)?;
                let gy = g.inverse()?.transpose().mul_vec(&y)?;
                Point::new(
                    p.n(),
                    gx[0].clone(),
                    gx[1..].to_vec(),
                    gy[0].clone(),
                    gy[1..].to_vec(),
                )
            }
            (ElementData::Matrix(h), GroupTag::H1 | GroupTag::GlPlus) => {
                block_action(h, p, &Rational::one(), &Rational::one())
            }
            (ElementData::Scalar(t), GroupTag::ScalingTorus) => Ok(scale_point(p, t, t)),
            (ElementData::Matrix(m), GroupTag::TildeH) => split_action(m, p),
            (ElementData::Matrix(m), GroupTag::TildeG) => {
                let v = [
                    join(p.x1(), p.x_prime()),
                    join(p.y1(), p.y_prime()),
                ]
                .concat();
                let w = m.mul_vec(&v)?;
                let k = p.n() + 1;
                Point::new(
                    p.n(),
                    w[0].clone(),
                    w[1..k].to_vec(),
                    w[k].clone(),
                    w[k + 1..].to_vec(),
                )
            }
            (ElementData::Pair { m: h, t }, GroupTag::HTimesTorus) => {
                let d = h.det()?;
                let moved = block_action(h, p, &d.recip(), &d)?;
                Ok(scale_point(&moved, t, t))
            }
            (ElementData::Pair { m: h, t }, GroupTag::GlPlusTimesTorus) => {
                let moved = block_action(h, p, &Rational::one(), &Rational::one())?;
                Ok(scale_point(&moved, t, t))
            }
            (ElementData::Pair { m, t }, GroupTag::TildeHTimesTorus) => {
                let moved = split_action(m, p)?;
                Ok(scale_point(&moved, t, &Rational::one()))
            }
            _ => Err(Error::UnsupportedTag),
        }
    }
}

fn join(head: &Rational, tail: &[Rational]) -> Vec<Rational> {
    let mut v = Vec::with_capacity(tail.len() + 1);
    v.push(head.clone());
    v.extend_from_slice(tail);
    v
}

/// (x1, x', y1, y') -> (hx1·x1, h x', hy1·y1, h^{-T} y').
fn block_action(h: &RatMatrix, p: &Point, hx1: &Rational, hy1: &Rational) -> Result<Point> {
    let xp = h.mul_vec(p.x_prime())?;
    let yp = h.inverse()?.transpose().mul_vec(p.y_prime())?;
    Point::new(p.n(), p.x1() * hx1, xp, p.y1() * hy1, yp)
}

/// x1 ↦ t_heads·x1, x' ↦ t_all·x', y1 ↦ t_heads^{-1}·y1, y' ↦ t_all^{-1}·y'.
/// The global torus uses t_heads = t_all; the heads-only torus factor of the
/// split-orthogonal product group uses t_all = 1.
fn scale_point(p: &Point, t_heads: &Rational, t_all: &Rational) -> Point {
    let inv_heads = t_heads.recip();
    let inv_all = t_all.recip();
    Point::new_unchecked(
        p.n(),
        p.x1() * t_heads,
        p.x_prime().iter().map(|v| v * t_all).collect(),
        p.y1() * &inv_heads,
        p.y_prime().iter().map(|v| v * &inv_all).collect(),
    )
}

/// The defining linear action on the concatenated (x', y') coordinates.
fn split_action(m: &RatMatrix, p: &Point) -> Result<Point> {
    let v = [p.x_prime().to_vec(), p.y_prime().to_vec()].concat();
    let w = m.mul_vec(&v)?;
    let n = p.n();
    Point::new(
        n,
        p.x1().clone(),
        w[..n].to_vec(),
        p.y1().clone(),
        w[n..].to_vec(),
    )
}

/// diag((det a)^{-1}, a): the block embedding into the unimodular group.
pub fn embed_block(a: &RatMatrix) -> Result<RatMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let d = a.det()?;
    if d.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = a.rows();
    Ok(RatMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => d.recip(),
        (0, _) | (_, 0) => Rational::zero(),
        (i, j) => a.get(i - 1, j - 1).clone(),
    }))
}

/// Embeds a GL+(n) matrix as a unimodular element via [`embed_block`].
pub fn embed_gl_plus(a: &RatMatrix) -> Result<GroupElement> {
    let d = a.det()?;
    if !d.is_positive() {
        return Err(Error::NonPositiveDeterminant(d));
    }
    let n = a.rows();
    Ok(GroupElement::new_unchecked(
        GroupTag::BigG,
        n,
        ElementData::Matrix(embed_block(a)?),
    ))
}

/// Raw block action of an invertible matrix on (x', y'), with no membership
/// or determinant-sign gate. The cocycle of the first intertwining chart can
/// have negative determinant (even n, y1 < 0) yet acts the same way.
pub fn gl_block_action(a: &RatMatrix, p: &Point) -> Result<Point> {
    block_action(a, p, &Rational::one(), &Rational::one())
}

/// g ↦ g · (base point): the quotient map onto the space. Column 0 of g and
/// row 0 of g^{-1}.
pub fn act_on_base(g: &GroupElement) -> Result<Point> {
    if g.tag() != GroupTag::BigG {
        return Err(Error::UnsupportedTag);
    }
    g.act(&Point::base(g.n())?)
}

/// I + c·E_{ij}.
pub(crate) fn transvection(dim: usize, i: usize, j: usize, c: &Rational) -> RatMatrix {
    let mut m = RatMatrix::identity(dim);
    m.set(i, j, m.get(i, j) + c);
    m
}

/// c·(E_{ij} − E_{ji}), i < j.
fn skew(dim: usize, i: usize, j: usize, c: &Rational) -> RatMatrix {
    let mut m = RatMatrix::zeros(dim, dim);
    m.set(i, j, c.clone());
    m.set(j, i, -c);
    m
}

const MAX_FACTORS: i64 = 12;
const COEFF_BOUND: i64 = 3;

fn sample_sl(dim: usize, stream: &mut SeedStream) -> RatMatrix {
    let len = stream.int_in(1, MAX_FACTORS);
    let mut acc = RatMatrix::identity(dim);
    for _ in 0..len {
        let i = stream.index_in(dim);
        let mut j = stream.index_in(dim - 1);
        if j >= i {
            j += 1;
        }
        let c = stream.nonzero_rational(COEFF_BOUND);
        acc = acc.mul(&transvection(dim, i, j, &c)).unwrap();
    }
    acc
}

pub(crate) fn sample_gl_plus(dim: usize, stream: &mut SeedStream) -> RatMatrix {
    let diag: Vec<Rational> = (0..dim).map(|_| stream.positive_rational(COEFF_BOUND)).collect();
    sample_sl(dim, stream).mul(&RatMatrix::diagonal(&diag)).unwrap()
}

/// One exact generator of the identity component of the split orthogonal
/// group on R^{2*half}: an upper/lower unipotent block with skew off-block,
/// or a GL-type block pair [[T, 0], [0, T^{-T}]] with T a transvection.
fn split_so_factor(half: usize, stream: &mut SeedStream) -> RatMatrix {
    let zero = RatMatrix::zeros(half, half);
    let id = RatMatrix::identity(half);
    match stream.index_in(3) {
        0 => {
            let i = stream.index_in(half);
            let mut j = stream.index_in(half - 1);
            if j >= i {
                j += 1;
            }
            let (i, j) = (i.min(j), i.max(j));
            let b = skew(half, i, j, &stream.nonzero_rational(COEFF_BOUND));
            RatMatrix::from_blocks(&id, &b, &zero, &id).unwrap()
        }
        1 => {
            let i = stream.index_in(half);
            let mut j = stream.index_in(half - 1);
            if j >= i {
                j += 1;
            }
            let (i, j) = (i.min(j), i.max(j));
            let c = skew(half, i, j, &stream.nonzero_rational(COEFF_BOUND));
            RatMatrix::from_blocks(&id, &zero, &c, &id).unwrap()
        }
        _ => {
            let i = stream.index_in(half);
            let mut j = stream.index_in(half - 1);
            if j >= i {
                j += 1;
            }
            let c = stream.nonzero_rational(COEFF_BOUND);
            let t = transvection(half, i, j, &c);
            let t_inv_t = transvection(half, j, i, &-&c);
            RatMatrix::from_blocks(&t, &zero, &zero, &t_inv_t).unwrap()
        }
    }
}

fn sample_split_so(half: usize, stream: &mut SeedStream) -> RatMatrix {
    let len = stream.int_in(1, MAX_FACTORS);
    let mut acc = RatMatrix::identity(2 * half);
    for _ in 0..len {
        acc = acc.mul(&split_so_factor(half, stream)).unwrap();
    }
    acc
}

/// Draws an exact identity-component element of the tagged group as a
/// bounded product of generators.
pub fn sample_element(tag: GroupTag, n: usize, stream: &mut SeedStream) -> GroupElement {
    assert!(n >= 2, "sampling requires n >= 2");
    let data = match tag {
        GroupTag::BigG => ElementData::Matrix(sample_sl(n + 1, stream)),
        GroupTag::H1 => ElementData::Matrix(sample_sl(n, stream)),
        GroupTag::GlPlus => ElementData::Matrix(sample_gl_plus(n, stream)),
        GroupTag::ScalingTorus => ElementData::Scalar(stream.positive_rational(COEFF_BOUND)),
        GroupTag::TildeH => ElementData::Matrix(sample_split_so(n, stream)),
        GroupTag::TildeG => ElementData::Matrix(sample_split_so(n + 1, stream)),
        GroupTag::HTimesTorus | GroupTag::GlPlusTimesTorus => ElementData::Pair {
            m: sample_gl_plus(n, stream),
            t: stream.positive_rational(COEFF_BOUND),
        },
        GroupTag::TildeHTimesTorus => ElementData::Pair {
            m: sample_split_so(n, stream),
            t: stream.positive_rational(COEFF_BOUND),
        },
    };
    GroupElement::new_unchecked(tag, n, data)
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<RatMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<Rational>,
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    tag: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<RatMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    components: Option<Vec<ComponentJson>>,
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut raw = ElementJson {
            tag: self.tag.json_token().to_string(),
            n: self.n,
            matrix: None,
            t: None,
            components: None,
        };
        match &self.data {
            ElementData::Matrix(m) => raw.matrix = Some(m.clone()),
            ElementData::Scalar(t) => raw.t = Some(t.clone()),
            ElementData::Pair { m, t } => {
                raw.components = Some(vec![
                    ComponentJson {
                        matrix: Some(m.clone()),
                        t: None,
                    },
                    ComponentJson {
                        matrix: None,
                        t: Some(t.clone()),
                    },
                ])
            }
        }
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ElementJson::deserialize(d)?;
        let tag = GroupTag::from_json_token(&raw.tag)
            .ok_or_else(|| D::Error::custom(format!("unknown group tag {:?}", raw.tag)))?;
        let data = match (raw.matrix, raw.t, raw.components) {
            (Some(m), None, None) => ElementData::Matrix(m),
            (None, Some(t), None) => ElementData::Scalar(t),
            (None, None, Some(parts)) => {
                let [a, b]: [ComponentJson; 2] = parts
                    .try_into()
                    .map_err(|_| D::Error::custom("product element needs two components"))?;
                match (a.matrix, a.t, b.matrix, b.t) {
                    (Some(m), None, None, Some(t)) => ElementData::Pair { m, t },
                    _ => {
                        return Err(D::Error::custom(
                            "components must be [{\"matrix\":…},{\"t\":…}]",
                        ))
                    }
                }
            }
            _ => {
                return Err(D::Error::custom(
                    "element needs exactly one of matrix, t, components",
                ))
            }
        };
        GroupElement::new(tag, raw.n, data).map_err(D::Error::custom)
    }
}
