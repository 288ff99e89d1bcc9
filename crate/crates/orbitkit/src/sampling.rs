//! Deterministic point sampling: free draws, fiber-constrained draws, and
//! forced degenerate strata. The space constraint is always solved exactly
//! (rational free coordinates, one dependent coordinate), so every returned
//! point validates. Degenerate loci (vanishing blocks, the null cone) have
//! measure zero and are hit by explicit patterns, never left to chance.

use crate::rational::{dot, Rational, Sign};
use crate::seed::SeedStream;
use crate::space::Point;

/// Which stratum of the pair space {(x', y') : <x', y'> = target} to draw.
/// The non-free patterns require target = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairPattern {
    Free,
    /// Both blocks nonzero on the null cone; the sign picks the n = 2
    /// rotation parameter's sign and is ignored for n >= 3.
    Cone(Sign),
    XZero,
    YZero,
    Origin,
}

fn nonzero_vector(n: usize, bound: i64, stream: &mut SeedStream) -> Vec<Rational> {
    loop {
        let v: Vec<Rational> = (0..n).map(|_| stream.rational(bound)).collect();
        if v.iter().any(|c| !c.is_zero()) {
            return v;
        }
    }
}

/// Draws (x', y') with <x', y'> = target exactly, in the requested pattern.
pub fn pair_with_product(
    n: usize,
    target: &Rational,
    pattern: PairPattern,
    stream: &mut SeedStream,
) -> (Vec<Rational>, Vec<Rational>) {
    const BOUND: i64 = 3;
    match pattern {
        PairPattern::Free => {
            let xp = nonzero_vector(n, BOUND, stream);
            let k = xp.iter().position(|c| !c.is_zero()).unwrap();
            let mut yp: Vec<Rational> = (0..n).map(|_| stream.rational(BOUND)).collect();
            yp[k] = Rational::zero();
            yp[k] = (target - &dot(&xp, &yp)) / &xp[k];
            (xp, yp)
        }
        PairPattern::Cone(sign) => {
            assert!(target.is_zero(), "cone pattern requires a zero product");
            let xp = nonzero_vector(n, BOUND, stream);
            if n == 2 {
                let mut s = stream.positive_rational(BOUND);
                if sign == Sign::Neg {
                    s = -s;
                }
                let yp = vec![-(&s * &xp[1]), &s * &xp[0]];
                (xp, yp)
            } else {
                let k = xp.iter().position(|c| !c.is_zero()).unwrap();
                loop {
                    let mut yp: Vec<Rational> =
                        (0..n).map(|_| stream.rational(BOUND)).collect();
                    yp[k] = Rational::zero();
                    yp[k] = -dot(&xp, &yp) / &xp[k];
                    if yp.iter().any(|c| !c.is_zero()) {
                        return (xp, yp);
                    }
                }
            }
        }
        PairPattern::XZero => {
            assert!(target.is_zero(), "vanishing block requires a zero product");
            (vec![Rational::zero(); n], nonzero_vector(n, BOUND, stream))
        }
        PairPattern::YZero => {
            assert!(target.is_zero(), "vanishing block requires a zero product");
            (nonzero_vector(n, BOUND, stream), vec![Rational::zero(); n])
        }
        PairPattern::Origin => {
            assert!(target.is_zero(), "origin requires a zero product");
            (vec![Rational::zero(); n], vec![Rational::zero(); n])
        }
    }
}

/// A point with prescribed (x1, y1), pair pattern solved against the
/// induced product target 1 - x1·y1.
pub fn point_in_first_pair_fiber(
    n: usize,
    x1: &Rational,
    y1: &Rational,
    pattern: PairPattern,
    stream: &mut SeedStream,
) -> Point {
    let target = Rational::one() - x1 * y1;
    let (xp, yp) = pair_with_product(n, &target, pattern, stream);
    Point::new(n, x1.clone(), xp, y1.clone(), yp).expect("fiber draw must validate")
}

/// How to draw the head coordinates inside a fiber of the prime pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadsDraw {
    /// x1 = ±(positive draw), y1 = (1 - t)/x1.
    Hyperbola { sgn_x1: Sign, pattern: PairPattern },
    /// x1 = 0, y1 = ±(positive draw); only lives in the t = 1 fiber.
    XHeadZero { sgn_y1: Sign },
    /// x1 = y1 = 0; only lives in the t = 1 fiber.
    BothHeadsZero,
}

/// A point with prime pairing exactly t, heads drawn per the given pattern.
pub fn point_in_prime_pairing_fiber(
    n: usize,
    t: &Rational,
    draw: HeadsDraw,
    stream: &mut SeedStream,
) -> Point {
    const BOUND: i64 = 3;
    let (x1, y1) = match draw {
        HeadsDraw::Hyperbola { sgn_x1, .. } => {
            assert!(sgn_x1 != Sign::Zero, "hyperbola draw needs a nonzero sign");
            let mut x1 = stream.positive_rational(BOUND);
            if sgn_x1 == Sign::Neg {
                x1 = -x1;
            }
            let y1 = (Rational::one() - t) / &x1;
            (x1, y1)
        }
        HeadsDraw::XHeadZero { sgn_y1 } => {
            assert!(t.is_one(), "a zero head needs the t = 1 fiber");
            assert!(sgn_y1 != Sign::Zero);
            let mut y1 = stream.positive_rational(BOUND);
            if sgn_y1 == Sign::Neg {
                y1 = -y1;
            }
            (Rational::zero(), y1)
        }
        HeadsDraw::BothHeadsZero => {
            assert!(t.is_one(), "zero heads need the t = 1 fiber");
            (Rational::zero(), Rational::zero())
        }
    };
    let pattern = match draw {
        HeadsDraw::Hyperbola { pattern, .. } => pattern,
        _ => PairPattern::Free,
    };
    let (xp, yp) = pair_with_product(n, t, pattern, stream);
    Point::new(n, x1, xp, y1, yp).expect("fiber draw must validate")
}

/// The deterministic draw cycle covering every stratum of a first-pair fiber.
pub fn first_pair_fiber_patterns(target_is_zero: bool) -> &'static [PairPattern] {
    if target_is_zero {
        &[
            PairPattern::Free,
            PairPattern::Cone(Sign::Pos),
            PairPattern::Cone(Sign::Neg),
            PairPattern::XZero,
            PairPattern::YZero,
            PairPattern::Origin,
        ]
    } else {
        &[PairPattern::Free]
    }
}

/// The deterministic draw cycle covering every stratum of a prime-pairing
/// fiber.
pub fn prime_pairing_fiber_draws(t: &Rational) -> Vec<HeadsDraw> {
    if t.is_zero() {
        let mut draws = Vec::new();
        for sgn_x1 in [Sign::Pos, Sign::Neg] {
            for pattern in first_pair_fiber_patterns(true) {
                draws.push(HeadsDraw::Hyperbola {
                    sgn_x1,
                    pattern: *pattern,
                });
            }
        }
        draws
    } else if t.is_one() {
        vec![
            HeadsDraw::Hyperbola {
                sgn_x1: Sign::Pos,
                pattern: PairPattern::Free,
            },
            HeadsDraw::Hyperbola {
                sgn_x1: Sign::Neg,
                pattern: PairPattern::Free,
            },
            HeadsDraw::XHeadZero { sgn_y1: Sign::Pos },
            HeadsDraw::XHeadZero { sgn_y1: Sign::Neg },
            HeadsDraw::BothHeadsZero,
        ]
    } else {
        vec![
            HeadsDraw::Hyperbola {
                sgn_x1: Sign::Pos,
                pattern: PairPattern::Free,
            },
            HeadsDraw::Hyperbola {
                sgn_x1: Sign::Neg,
                pattern: PairPattern::Free,
            },
        ]
    }
}

/// A point whose head and first block coordinates sit in [1/3, 3] up to
/// sign, so directional derivatives along the standard flows stay far from
/// the flatness threshold.
pub fn bounded_point(n: usize, stream: &mut SeedStream) -> Point {
    let draw = |stream: &mut SeedStream| {
        let v = Rational::new(stream.int_in(4, 36), 12);
        if stream.coin() {
            v
        } else {
            -v
        }
    };
    let x1 = draw(stream);
    let mut xp: Vec<Rational> = (0..n).map(|_| stream.rational(2)).collect();
    xp[0] = draw(stream);
    let y1 = draw(stream);
    let mut yp: Vec<Rational> = (0..n).map(|_| stream.rational(2)).collect();
    yp[0] = Rational::zero();
    yp[0] = (Rational::one() - &x1 * &y1 - dot(&xp, &yp)) / &xp[0];
    Point::new(n, x1, xp, y1, yp).expect("solved draw must validate")
}

/// A free point of the space: all coordinates drawn, one solved.
pub fn random_point(n: usize, bound: i64, stream: &mut SeedStream) -> Point {
    loop {
        let x1 = stream.rational(bound);
        let xp: Vec<Rational> = (0..n).map(|_| stream.rational(bound)).collect();
        if x1.is_zero() && xp.iter().all(Rational::is_zero) {
            continue;
        }
        let y1 = stream.rational(bound);
        let mut yp: Vec<Rational> = (0..n).map(|_| stream.rational(bound)).collect();
        if !x1.is_zero() {
            let y1 = (Rational::one() - dot(&xp, &yp)) / &x1;
            return Point::new(n, x1, xp, y1, yp).expect("solved draw must validate");
        }
        let k = xp.iter().position(|c| !c.is_zero()).unwrap();
        yp[k] = Rational::zero();
        yp[k] = (Rational::one() - &x1 * &y1 - dot(&xp, &yp)) / &xp[k];
        return Point::new(n, x1, xp, y1, yp).expect("solved draw must validate");
    }
}

/// A ten-slot cycle of draws that forces every classification stratum with
/// positive frequency: generic points, cone points of both signs, vanishing
/// blocks, the block origin, and all head-axis cases.
pub fn mixed_point(n: usize, slot: usize, stream: &mut SeedStream) -> Point {
    const BOUND: i64 = 3;
    let one = Rational::one();
    match slot % 10 {
        0 => random_point(n, BOUND, stream),
        1 => {
            let x1 = stream.nonzero_rational(BOUND);
            let y1 = x1.recip();
            point_in_first_pair_fiber(n, &x1, &y1, PairPattern::Cone(Sign::Pos), stream)
        }
        2 => {
            let x1 = stream.nonzero_rational(BOUND);
            let y1 = x1.recip();
            point_in_first_pair_fiber(n, &x1, &y1, PairPattern::Cone(Sign::Neg), stream)
        }
        3 => {
            let x1 = stream.nonzero_rational(BOUND);
            let y1 = x1.recip();
            point_in_first_pair_fiber(n, &x1, &y1, PairPattern::XZero, stream)
        }
        4 => {
            let x1 = stream.nonzero_rational(BOUND);
            let y1 = x1.recip();
            point_in_first_pair_fiber(n, &x1, &y1, PairPattern::YZero, stream)
        }
        5 => {
            let x1 = stream.nonzero_rational(BOUND);
            let y1 = x1.recip();
            point_in_first_pair_fiber(n, &x1, &y1, PairPattern::Origin, stream)
        }
        6 => point_in_prime_pairing_fiber(
            n,
            &one,
            HeadsDraw::Hyperbola {
                sgn_x1: Sign::Pos,
                pattern: PairPattern::Free,
            },
            stream,
        ),
        7 => point_in_prime_pairing_fiber(
            n,
            &one,
            HeadsDraw::Hyperbola {
                sgn_x1: Sign::Neg,
                pattern: PairPattern::Free,
            },
            stream,
        ),
        8 => point_in_prime_pairing_fiber(
            n,
            &one,
            HeadsDraw::XHeadZero {
                sgn_y1: if slot % 20 < 10 { Sign::Pos } else { Sign::Neg },
            },
            stream,
        ),
        _ => point_in_prime_pairing_fiber(n, &one, HeadsDraw::BothHeadsZero, stream),
    }
}
