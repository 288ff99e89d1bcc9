//! The transpose side of the story: matrix involutions, the two chart
//! sections that conjugate transposition into the swap involution, the
//! cocycles that close the intertwining identity, and the distributional
//! parity calculus at the base point.
//!
//! Everything here is exact. A verification runs rational trials of an
//! identity and reports trial/failure counts; a failure would come with the
//! first offending sample attached.

use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::error::{Error, Result};
use crate::groups::{
    act_on_base, embed_block, gl_block_action, sample_gl_plus, ElementData, GroupElement,
    GroupTag,
};
use crate::matrix::RatMatrix;
use crate::rational::Rational;
use crate::sampling::{pair_with_product, PairPattern};
use crate::seed::SeedStream;
use crate::space::Point;

/// g ↦ ᵗg, the anti-involution under study.
pub fn transpose_involution(m: &RatMatrix) -> RatMatrix {
    m.transpose()
}

/// g ↦ ᵗg⁻¹, the associated involutive automorphism.
pub fn inverse_transpose_involution(m: &RatMatrix) -> Result<RatMatrix> {
    Ok(m.inverse()?.transpose())
}

/// Section over {y1 != 0}: a unimodular matrix mapping the base point to p.
/// Column 0 is x; the remaining columns are chosen so every column pairs to
/// zero against y, which forces the determinant to equal <x, y> = 1.
pub fn section_chart_a(p: &Point) -> Result<RatMatrix> {
    if p.y1().is_zero() {
        return Err(Error::ChartDomain("y1 = 0"));
    }
    let n = p.n();
    let y1 = p.y1();
    let mut m = RatMatrix::identity(n + 1);
    m.set(0, 0, p.x1().clone());
    for i in 1..=n {
        m.set(i, 0, p.x_prime()[i - 1].clone());
    }
    m.set(0, 1, -&p.y_prime()[0]);
    m.set(1, 1, y1.clone());
    for j in 2..=n {
        m.set(0, j, -(&p.y_prime()[j - 1] / y1));
    }
    Ok(m)
}

/// Block cocycle of the first chart: diag(1, 1/y1, ..., 1/y1). Its
/// determinant is y1^(1-n), which is negative for even n and y1 < 0, so it
/// is applied through the raw block action rather than as a group element.
pub fn cocycle_chart_a(p: &Point) -> Result<RatMatrix> {
    if p.y1().is_zero() {
        return Err(Error::ChartDomain("y1 = 0"));
    }
    let n = p.n();
    let scale = p.y1().recip();
    Ok(RatMatrix::from_fn(n, n, |i, j| {
        if i != j {
            Rational::zero()
        } else if i == 0 {
            Rational::one()
        } else {
            scale.clone()
        }
    }))
}

/// The head-parametrized core of the second chart: unimodular, and mapping
/// the base point to ((x1, 1, 0, ...), (y1, 1 - x1 y1, 0, ...)).
pub fn core_chart_b(n: usize, x1: &Rational, y1: &Rational) -> RatMatrix {
    let mut m = RatMatrix::identity(n + 1);
    m.set(0, 0, x1.clone());
    m.set(0, 1, &(x1 * y1) - &Rational::one());
    m.set(1, 0, Rational::one());
    m.set(1, 1, y1.clone());
    m
}

/// Section of the second chart over {x1 y1 < 1}: the core conjugated by two
/// determinant-twisted block embeddings.
pub fn section_chart_b(
    x1: &Rational,
    y1: &Rational,
    a: &RatMatrix,
    b: &RatMatrix,
) -> Result<RatMatrix> {
    if !(Rational::one() - &(x1 * y1)).is_positive() {
        return Err(Error::ChartDomain("x1 * y1 >= 1"));
    }
    let (da, db) = (a.det()?, b.det()?);
    if !da.is_positive() || !db.is_positive() {
        return Err(Error::NonPositiveDeterminant(da * db));
    }
    let n = a.rows();
    let core = core_chart_b(n, x1, y1);
    embed_block(a)?.mul(&core)?.mul(&embed_block(b)?)
}

/// Block cocycle of the second chart: det(ab)^(-1) · ᵗ(ab), which lies in
/// the orientation-preserving block group.
pub fn cocycle_chart_b(a: &RatMatrix, b: &RatMatrix) -> Result<RatMatrix> {
    let ab = a.mul(b)?;
    let d = ab.det()?;
    if !d.is_positive() {
        return Err(Error::NonPositiveDeterminant(d));
    }
    Ok(ab.transpose().scale(&d.recip()))
}

/// Outcome of a trial-based exact identity check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub trials: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<serde_json::Value>,
}

impl IdentityReport {
    /// Runs `trials` checks; a check returns a JSON description on failure.
    pub fn run(
        identity: &str,
        trials: usize,
        mut check: impl FnMut(usize) -> std::result::Result<(), serde_json::Value>,
    ) -> IdentityReport {
        let mut failures = 0;
        let mut first_failure = None;
        for trial in 0..trials {
            if let Err(detail) = check(trial) {
                failures += 1;
                if first_failure.is_none() {
                    first_failure = Some(detail);
                }
            }
        }
        IdentityReport {
            identity: identity.to_string(),
            trials,
            failures,
            first_failure,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn chart_a_trial_point(n: usize, stream: &mut SeedStream) -> Point {
    // Heads of equal sign, so x1 y1 > 0.
    let positive = stream.coin();
    let mut x1 = stream.positive_rational(3);
    let mut y1 = stream.positive_rational(3);
    if !positive {
        x1 = -x1;
        y1 = -y1;
    }
    let target = Rational::one() - &x1 * &y1;
    let (xp, yp) = pair_with_product(n, &target, PairPattern::Free, stream);
    Point::new(n, x1, xp, y1, yp).expect("fiber draw must validate")
}

fn unimodular_element(n: usize, m: RatMatrix) -> std::result::Result<GroupElement, serde_json::Value> {
    GroupElement::new(GroupTag::BigG, n, ElementData::Matrix(m))
        .map_err(|e| json!({ "error": format!("section not unimodular: {e}") }))
}

/// Exact trials of the first-chart intertwining identity: transposing the
/// section and projecting equals the cocycle acting on the swapped point.
pub fn verify_intertwining_chart_a(
    n: usize,
    trials: usize,
    stream: &mut SeedStream,
) -> IdentityReport {
    IdentityReport::run("lemma3-chart-a", trials, |trial| {
        let p = chart_a_trial_point(n, stream);
        let section = section_chart_a(&p).expect("trial point has y1 != 0");
        let element = unimodular_element(n, section)?;
        let projected = act_on_base(&element).expect("projection of a unimodular element");
        if projected != p {
            return Err(json!({
                "trial": trial,
                "reason": "section does not project to the point",
                "point": p,
            }));
        }
        let lhs = act_on_base(
            &unimodular_element(n, transpose_involution(element.matrix().unwrap()))?,
        )
        .expect("projection of a unimodular element");
        let cocycle = cocycle_chart_a(&p).expect("trial point has y1 != 0");
        let rhs = gl_block_action(&cocycle, &p.swap_involution())
            .expect("cocycle has matching dimension");
        if lhs != rhs {
            return Err(json!({
                "trial": trial,
                "reason": "intertwining identity failed",
                "point": p,
            }));
        }
        Ok(())
    })
}

/// Exact trials of the second-chart intertwining identity, with the section
/// dressed by sampled orientation-preserving block factors on both sides.
pub fn verify_intertwining_chart_b(
    n: usize,
    trials: usize,
    stream: &mut SeedStream,
) -> IdentityReport {
    IdentityReport::run("lemma3-chart-b", trials, |trial| {
        let (x1, y1) = loop {
            let x1 = stream.rational(3);
            let y1 = stream.rational(3);
            if (Rational::one() - &(&x1 * &y1)).is_positive() {
                break (x1, y1);
            }
        };
        let a = sample_gl_plus(n, stream);
        let b = sample_gl_plus(n, stream);
        let section = section_chart_b(&x1, &y1, &a, &b).expect("factors are orientation-preserving");
        let element = unimodular_element(n, section)?;
        let projected = act_on_base(&element).expect("projection of a unimodular element");
        let lhs = act_on_base(
            &unimodular_element(n, transpose_involution(element.matrix().unwrap()))?,
        )
        .expect("projection of a unimodular element");
        let cocycle = cocycle_chart_b(&a, &b).expect("factors are orientation-preserving");
        let rhs = gl_block_action(&cocycle, &projected.swap_involution())
            .expect("cocycle has matching dimension");
        if lhs != rhs {
            return Err(json!({
                "trial": trial,
                "reason": "intertwining identity failed",
                "x1": x1,
                "y1": y1,
            }));
        }
        Ok(())
    })
}

/// Finite combination of partial-derivative monomials applied to the point
/// mass at the block origin. The multi-index lists the x' orders then the
/// y' orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaDistribution {
    n: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl DeltaDistribution {
    /// The point mass itself.
    pub fn delta(n: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; 2 * n], Rational::one());
        DeltaDistribution { n, terms }
    }

    pub fn zero(n: usize) -> Self {
        DeltaDistribution {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, alpha: Vec<u32>, c: Rational) {
        debug_assert_eq!(alpha.len(), 2 * self.n);
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
            Entry::Vacant(slot) => {
                if !c.is_zero() {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += &c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, rhs: &DeltaDistribution) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (alpha, c) in &rhs.terms {
            out.add_term(alpha.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &DeltaDistribution) -> Self {
        self.add(&rhs.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return DeltaDistribution::zero(self.n);
        }
        DeltaDistribution {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(alpha, v)| (alpha.clone(), v * c))
                .collect(),
        }
    }

    /// One more partial derivative along the given slot (x' slots first).
    pub fn partial(&self, slot: usize) -> Self {
        assert!(slot < 2 * self.n, "slot out of range");
        let mut out = DeltaDistribution::zero(self.n);
        for (alpha, c) in &self.terms {
            let mut bumped = alpha.clone();
            bumped[slot] += 1;
            out.add_term(bumped, c.clone());
        }
        out
    }

    /// The mixed second-order operator pairing each x' slot with its y'
    /// partner.
    pub fn mixed_laplacian(&self) -> Self {
        let mut out = DeltaDistribution::zero(self.n);
        for (alpha, c) in &self.terms {
            for i in 0..self.n {
                let mut bumped = alpha.clone();
                bumped[i] += 1;
                bumped[self.n + i] += 1;
                out.add_term(bumped, c.clone());
            }
        }
        out
    }

    /// Pushforward under (x', y') ↦ (-y', -x'): halves of the multi-index
    /// swap and each term picks up the parity of its total order.
    pub fn swap_pushforward(&self) -> Self {
        let mut out = DeltaDistribution::zero(self.n);
        for (alpha, c) in &self.terms {
            let mut swapped = alpha[self.n..].to_vec();
            swapped.extend_from_slice(&alpha[..self.n]);
            let order: u32 = alpha.iter().sum();
            let signed = if order % 2 == 0 { c.clone() } else { -c };
            out.add_term(swapped, signed);
        }
        out
    }

    /// The swap-odd component; it vanishes exactly when the distribution is
    /// swap-invariant.
    pub fn odd_part(&self) -> Self {
        self.sub(&self.swap_pushforward())
            .scale(&Rational::new(1, 2))
    }
}

impl Serialize for DeltaDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            alpha: &'a [u32],
            c: &'a Rational,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            terms: TermSeq<'a>,
        }
        struct TermSeq<'a>(&'a BTreeMap<Vec<u32>, Rational>);
        impl Serialize for TermSeq<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for (alpha, c) in self.0 {
                    seq.serialize_element(&Term { alpha, c })?;
                }
                seq.end()
            }
        }
        Repr {
            n: self.n,
            terms: TermSeq(&self.terms),
        }
        .serialize(s)
    }
}

/// Exact trials of the parity argument: every polynomial in the mixed
/// operator applied to the point mass is swap-invariant, and the generic
/// odd perturbation is not.
pub fn verify_swap_parity(
    n: usize,
    k_max: u32,
    trials: usize,
    stream: &mut SeedStream,
) -> IdentityReport {
    IdentityReport::run("delta-swap-parity", trials, |trial| {
        let mut u = DeltaDistribution::zero(n);
        let mut power = DeltaDistribution::delta(n);
        for _ in 0..=k_max {
            u = u.add(&power.scale(&stream.rational(3)));
            power = power.mixed_laplacian();
        }
        if u.swap_pushforward() != u || !u.odd_part().is_zero() {
            return Err(json!({
                "trial": trial,
                "reason": "polynomial in the mixed operator is not swap-even",
                "distribution": u,
            }));
        }
        // A first-order x'-derivative breaks the symmetry unless it cancels.
        let perturbed = u.add(&DeltaDistribution::delta(n).partial(0));
        if perturbed.swap_pushforward() == perturbed {
            return Err(json!({
                "trial": trial,
                "reason": "odd perturbation went undetected",
            }));
        }
        Ok(())
    })
}
