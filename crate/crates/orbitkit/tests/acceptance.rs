//! Acceptance gate: ten exact criteria, one test and one pass/fail line per
//! criterion. Expected values and tolerances are pinned here independently
//! of the library's own constants, and criterion 7 re-derives every rank
//! with a plain division-based elimination that shares no code with the
//! library's fraction-free routine.
//!
//! The criteria serialize on one mutex so that per-criterion runtime
//! budgets measure their own work even on a single-core host.

use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use orbitkit::fields::{
    algebra_basis, flows_for, fundamental_fields_at, invariance_residual, rank_map, span_compare,
    witness_residual, FloatPoint,
};
use orbitkit::groups::{act_on_base, sample_element, GroupTag};
use orbitkit::involution::{
    section_chart_b, verify_intertwining_chart_a, verify_intertwining_chart_b, DeltaDistribution,
};
use orbitkit::matrix::RatMatrix;
use orbitkit::orbits::{classify, fiber_census, swap_label_transport, GroupCase, Stratum};
use orbitkit::rational::dot;
use orbitkit::sampling::{bounded_point, mixed_point};
use orbitkit::{ElementData, FiberSpec, GroupElement, Point, Rational, SeedStream, SuiteKind};

static GATE: Mutex<()> = Mutex::new(());

fn exclusive() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn conclude(number: u32, name: &str, outcome: Result<(), String>) {
    match outcome {
        Ok(()) => println!("criterion {number} ({name}): pass"),
        Err(msg) => {
            println!("criterion {number} ({name}): fail — {msg}");
            panic!("criterion {number} ({name}) failed: {msg}");
        }
    }
}

fn within(start: Instant, budget: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    if elapsed > budget {
        return Err(format!("runtime {elapsed:?} exceeds the {budget:?} budget"));
    }
    Ok(())
}

#[test]
fn criterion_01_action_soundness() {
    let _lock = exclusive();
    let outcome = (|| {
        let start = Instant::now();
        let mut stream = SeedStream::new(101);
        for &tag in GroupTag::ALL.iter() {
            for trial in 0..500usize {
                let n = 2 + trial % 3;
                let p = mixed_point(n, trial, &mut stream);
                let g = sample_element(tag, n, &mut stream);
                let h = sample_element(tag, n, &mut stream);
                let moved = g
                    .act(&p)
                    .map_err(|e| format!("{} action failed: {e}", tag.json_token()))?;
                if moved.pairing() != Rational::one() {
                    return Err(format!(
                        "{} broke the pairing at trial {trial}",
                        tag.json_token()
                    ));
                }
                if matches!(tag, GroupTag::TildeH | GroupTag::TildeHTimesTorus)
                    && moved.prime_pairing() != p.prime_pairing()
                {
                    return Err(format!(
                        "{} broke the block form at trial {trial}",
                        tag.json_token()
                    ));
                }
                let composed = g
                    .compose(&h)
                    .and_then(|gh| gh.act(&p))
                    .map_err(|e| format!("composite action failed: {e}"))?;
                let chained = h
                    .act(&p)
                    .and_then(|q| g.act(&q))
                    .map_err(|e| format!("chained action failed: {e}"))?;
                if composed != chained {
                    return Err(format!(
                        "{} violated the composition law at trial {trial}",
                        tag.json_token()
                    ));
                }
            }
        }
        within(start, Duration::from_secs(10))
    })();
    conclude(1, "action soundness", outcome);
}

#[test]
fn criterion_02_classifier_invariance() {
    let _lock = exclusive();
    let outcome = (|| {
        let mut stream = SeedStream::new(202);
        for &case in GroupCase::ALL.iter() {
            for n in [2usize, 3, 4] {
                for trial in 0..1000usize {
                    let p = mixed_point(n, trial, &mut stream);
                    let g = sample_element(case.acting_tag(), n, &mut stream);
                    let moved = g.act(&p).map_err(|e| format!("action failed: {e}"))?;
                    if classify(case, &p) != classify(case, &moved) {
                        return Err(format!(
                            "case {} moved a label at n = {n}, trial {trial}",
                            case.json_token()
                        ));
                    }
                }
            }
        }
        Ok(())
    })();
    conclude(2, "classifier invariance", outcome);
}

#[test]
fn criterion_03_orbit_censuses() {
    let _lock = exclusive();
    let outcome = (|| {
        let start = Instant::now();
        let q11 = || FiberSpec::first_pair(Rational::one(), Rational::one());
        let level = |t: i64| FiberSpec::prime_pairing(Rational::from_int(t));
        let table: [(GroupCase, usize, FiberSpec, usize); 8] = [
            (GroupCase::H1, 3, q11(), 4),
            (GroupCase::GlPlus, 2, q11(), 5),
            (GroupCase::TildeH, 3, q11(), 2),
            (GroupCase::H, 3, level(1), 5),
            (GroupCase::H, 3, level(0), 8),
            (GroupCase::H, 2, level(0), 10),
            (GroupCase::H, 3, level(3), 2),
            (GroupCase::TildeHTorus, 3, level(0), 4),
        ];
        let mut stream = SeedStream::new(303);
        for (case, n, fiber, expected) in table {
            let report = fiber_census(case, &fiber, n, 1000, &mut stream)
                .map_err(|e| format!("census failed: {e}"))?;
            if report.distinct != expected {
                return Err(format!(
                    "case {} n = {n} fiber {} produced {} labels, expected {expected}",
                    case.json_token(),
                    fiber.token(),
                    report.distinct
                ));
            }
            if report.labels.len() != expected {
                return Err(format!(
                    "census entry list length {} disagrees with distinct = {expected}",
                    report.labels.len()
                ));
            }
            let total: usize = report.labels.iter().map(|entry| entry.count).sum();
            if total != 1000 {
                return Err(format!("census counts sum to {total}, expected 1000"));
            }
        }
        within(start, Duration::from_secs(30))
    })();
    conclude(3, "orbit censuses", outcome);
}

#[test]
fn criterion_04_swap_transport_witness() {
    let _lock = exclusive();
    let outcome = (|| {
        let mut stream = SeedStream::new(404);
        let mut observed_swap = 0usize;
        for trial in 0..500usize {
            let n = 2 + trial % 3;
            let p = mixed_point(n, trial, &mut stream);
            let label = classify(GroupCase::H, &p);
            let swapped = classify(GroupCase::H, &p.swap_involution());
            let transported =
                swap_label_transport(&label).map_err(|e| format!("transport failed: {e}"))?;
            if swapped != transported {
                return Err(format!("transport disagreed at trial {trial}"));
            }
            if *label.stratum() == Stratum::XZero && *swapped.stratum() == Stratum::YZero {
                observed_swap += 1;
            }
        }
        if observed_swap == 0 {
            return Err("no XZero to YZero swap was observed in 500 samples".into());
        }
        // Deterministic witness on the null level: the swap exchanges the
        // vanishing sides, so the label is not fixed.
        let witness = Point::new(
            3,
            Rational::from_int(2),
            vec![Rational::zero(), Rational::zero(), Rational::zero()],
            Rational::new(1, 2),
            vec![Rational::from_int(3), Rational::one(), Rational::zero()],
        )
        .map_err(|e| format!("witness point invalid: {e}"))?;
        if !witness.prime_pairing().is_zero() {
            return Err("witness point is not on the null level".into());
        }
        let before = classify(GroupCase::H, &witness);
        let after = classify(GroupCase::H, &witness.swap_involution());
        if *before.stratum() != Stratum::XZero || *after.stratum() != Stratum::YZero {
            return Err(format!(
                "witness strata were {} and {}, expected XZero and YZero",
                before.stratum().token(),
                after.stratum().token()
            ));
        }
        if swap_label_transport(&before).map_err(|e| e.to_string())? != after {
            return Err("witness transport disagreed".into());
        }
        Ok(())
    })();
    conclude(4, "swap transport witness", outcome);
}

#[test]
fn criterion_05_intertwining_identities() {
    let _lock = exclusive();
    let outcome = (|| {
        let start = Instant::now();
        let mut a_stream = SeedStream::new(505);
        let report_a = verify_intertwining_chart_a(3, 500, &mut a_stream);
        if !report_a.passed() || report_a.trials != 500 {
            return Err(format!(
                "first chart: {} failures in {} trials",
                report_a.failures, report_a.trials
            ));
        }
        let mut b_stream = SeedStream::new(515);
        let report_b = verify_intertwining_chart_b(3, 500, &mut b_stream);
        if !report_b.passed() || report_b.trials != 500 {
            return Err(format!(
                "second chart: {} failures in {} trials",
                report_b.failures, report_b.trials
            ));
        }
        // The undressed second-chart section must project back onto the
        // chart coordinates it was built from.
        let mut head_stream = SeedStream::new(525);
        let eye = RatMatrix::identity(3);
        for _ in 0..25 {
            let (x1, y1) = loop {
                let x1 = head_stream.rational(3);
                let y1 = head_stream.rational(3);
                if (Rational::one() - &(&x1 * &y1)).is_positive() {
                    break (x1, y1);
                }
            };
            let section = section_chart_b(&x1, &y1, &eye, &eye)
                .map_err(|e| format!("section rejected its own domain: {e}"))?;
            let element = GroupElement::new(GroupTag::BigG, 3, ElementData::Matrix(section))
                .map_err(|e| format!("section is not unimodular: {e}"))?;
            let projected =
                act_on_base(&element).map_err(|e| format!("projection failed: {e}"))?;
            if projected.first_pair() != (x1.clone(), y1.clone()) {
                return Err("section does not project onto its chart heads".into());
            }
        }
        within(start, Duration::from_secs(10))
    })();
    conclude(5, "intertwining identities", outcome);
}

#[test]
fn criterion_06_parity_core() {
    let _lock = exclusive();
    let outcome = (|| {
        let start = Instant::now();
        let mut stream = SeedStream::new(606);
        for n in [2usize, 3, 4] {
            let mut powers = vec![DeltaDistribution::delta(n)];
            for _ in 0..5 {
                let last = powers.last().expect("seeded with the point mass");
                powers.push(last.mixed_laplacian());
            }
            for (k, power) in powers.iter().enumerate() {
                if power.swap_pushforward() != *power {
                    return Err(format!("operator power {k} moved under the swap at n = {n}"));
                }
            }
            for trial in 0..100usize {
                let mut element = DeltaDistribution::zero(n);
                for power in &powers {
                    element = element.add(&power.scale(&stream.rational(3)));
                }
                if !element.odd_part().is_zero() {
                    return Err(format!(
                        "span element had a nonzero odd part at n = {n}, trial {trial}"
                    ));
                }
            }
            // Control: a first derivative is genuinely odd, so a vanishing
            // odd part is not an artifact of the projection.
            if DeltaDistribution::delta(n).partial(0).odd_part().is_zero() {
                return Err(format!("odd-part projection is degenerate at n = {n}"));
            }
        }
        within(start, Duration::from_secs(5))
    })();
    conclude(6, "parity core", outcome);
}

/// Plain division-based row reduction, kept deliberately naive so that it
/// shares nothing with the library's fraction-free elimination.
fn naive_rank(m: &RatMatrix) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Rational>> = (0..rows).map(|r| m.row(r).to_vec()).collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let inv = a[rank][col].recip();
        for c in col..cols {
            a[rank][c] = &a[rank][c] * &inv;
        }
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..cols {
                    a[r][c] = &a[r][c] - &(&factor * &a[rank][c]);
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn block_pair_in_stratum(name: &str, stream: &mut SeedStream) -> (Vec<Rational>, Vec<Rational>) {
    let n = 3;
    let zero = || vec![Rational::zero(); n];
    let draw = |stream: &mut SeedStream| -> Vec<Rational> {
        (0..n).map(|_| stream.rational(3)).collect()
    };
    let nonzero = |stream: &mut SeedStream| loop {
        let v = draw(stream);
        if v.iter().any(|c| !c.is_zero()) {
            return v;
        }
    };
    match name {
        "Generic" => loop {
            let xp = draw(stream);
            let yp = draw(stream);
            if !dot(&xp, &yp).is_zero() {
                return (xp, yp);
            }
        },
        "Cone" => loop {
            let xp = nonzero(stream);
            let raw = draw(stream);
            let scale = dot(&xp, &raw) / dot(&xp, &xp);
            let yp: Vec<Rational> = raw
                .iter()
                .zip(&xp)
                .map(|(r, x)| r - &(&scale * x))
                .collect();
            if yp.iter().any(|c| !c.is_zero()) {
                return (xp, yp);
            }
        },
        "XZero" => (zero(), nonzero(stream)),
        "YZero" => (nonzero(stream), zero()),
        "Origin" => (zero(), zero()),
        _ => unreachable!("unknown stratum name"),
    }
}

#[test]
fn criterion_07_rank_table() {
    let _lock = exclusive();
    let outcome = (|| {
        let oracle = [
            ("Generic", 5usize, 5usize, 5usize, true),
            ("Cone", 5, 5, 5, true),
            ("XZero", 3, 5, 5, false),
            ("YZero", 3, 5, 5, false),
            ("Origin", 0, 0, 0, true),
        ];
        let mut stream = SeedStream::new(707);
        let table = rank_map(3, 100, &mut stream).map_err(|e| format!("rank map failed: {e}"))?;
        if table.strata.len() != oracle.len() {
            return Err(format!("rank table has {} rows", table.strata.len()));
        }
        for (row, (name, gl, so, union, equal)) in table.strata.iter().zip(oracle) {
            if row.name != name
                || (row.rank_gl, row.rank_so, row.rank_union) != (gl, so, union)
                || row.equal != equal
                || row.samples != 100
            {
                return Err(format!(
                    "stratum {} reported ({}, {}, {}), expected ({gl}, {so}, {union})",
                    row.name, row.rank_gl, row.rank_so, row.rank_union
                ));
            }
        }
        // Re-derive every signature through the naive elimination.
        let gl_basis = algebra_basis(GroupTag::GlPlus, 3).map_err(|e| e.to_string())?;
        let so_basis = algebra_basis(GroupTag::TildeH, 3).map_err(|e| e.to_string())?;
        let mut oracle_stream = SeedStream::new(717);
        for (name, gl, so, union, equal) in oracle {
            for _ in 0..10 {
                let (xp, yp) = block_pair_in_stratum(name, &mut oracle_stream);
                let v: Vec<Rational> = xp.iter().chain(yp.iter()).cloned().collect();
                let gl_fields = fundamental_fields_at(&gl_basis, &v);
                let so_fields = fundamental_fields_at(&so_basis, &v);
                let union_fields =
                    RatMatrix::stack(&gl_fields, &so_fields).map_err(|e| e.to_string())?;
                let signature = (
                    naive_rank(&gl_fields),
                    naive_rank(&so_fields),
                    naive_rank(&union_fields),
                );
                if signature != (gl, so, union) {
                    return Err(format!(
                        "naive elimination found {signature:?} on {name}, expected ({gl}, {so}, {union})"
                    ));
                }
                let report = span_compare(&xp, &yp);
                if (report.rank_gl, report.rank_so, report.rank_union) != signature
                    || report.spans_equal != equal
                {
                    return Err(format!(
                        "library ranks disagree with the naive elimination on {name}"
                    ));
                }
            }
        }
        Ok(())
    })();
    conclude(7, "rank table", outcome);
}

#[test]
fn criterion_08_invariance_residuals() {
    let _lock = exclusive();
    let outcome = (|| {
        const STEP: f64 = 1e-5;
        const THRESHOLD: f64 = 1e-9;
        const FLOOR: f64 = 1e-3;
        let field_tags = [GroupTag::H1, GroupTag::TildeH, GroupTag::GlPlusTimesTorus];
        let mut stream = SeedStream::new(808);
        for trial in 0..100usize {
            let n = 2 + trial % 3;
            let p = FloatPoint::from(&bounded_point(n, &mut stream));
            for tag in field_tags {
                for flow in flows_for(tag, n).map_err(|e| e.to_string())? {
                    let residual =
                        invariance_residual(tag, flow, &p, STEP).map_err(|e| e.to_string())?;
                    if residual >= THRESHOLD {
                        return Err(format!(
                            "{} residual {residual:e} at trial {trial}",
                            tag.json_token()
                        ));
                    }
                }
            }
            let witness =
                witness_residual(GroupTag::GlPlusTimesTorus, &p, STEP).map_err(|e| e.to_string())?;
            if witness <= FLOOR {
                return Err(format!("torus witness {witness:e} is flat at trial {trial}"));
            }
        }
        Ok(())
    })();
    conclude(8, "invariance residuals", outcome);
}

#[test]
fn criterion_09_cone_parameter() {
    let _lock = exclusive();
    let outcome = (|| {
        let mut stream = SeedStream::new(909);
        for trial in 0..500usize {
            let x1 = stream.nonzero_rational(3);
            let y1 = x1.recip();
            let mut s = stream.positive_rational(3);
            if stream.coin() {
                s = -s;
            }
            let xp = vec![stream.nonzero_rational(3), stream.rational(3)];
            let yp = vec![-(&s * &xp[1]), &s * &xp[0]];
            let p = Point::new(2, x1, xp, y1, yp).map_err(|e| format!("cone draw invalid: {e}"))?;
            let label = classify(GroupCase::H1, &p);
            if *label.stratum() != Stratum::ConeParam(s.clone()) {
                return Err(format!("extraction disagreed with construction at trial {trial}"));
            }
            let g = sample_element(GroupTag::H1, 2, &mut stream);
            let moved = g.act(&p).map_err(|e| format!("action failed: {e}"))?;
            if classify(GroupCase::H1, &moved) != label {
                return Err(format!("parameter moved along the orbit at trial {trial}"));
            }
            let shifted = &s + &Rational::one();
            let other = Point::new(
                2,
                p.x1().clone(),
                p.x_prime().to_vec(),
                p.y1().clone(),
                vec![
                    -(&shifted * &p.x_prime()[1]),
                    &shifted * &p.x_prime()[0],
                ],
            )
            .map_err(|e| format!("shifted draw invalid: {e}"))?;
            if classify(GroupCase::H1, &other) == label {
                return Err(format!("distinct parameters collided at trial {trial}"));
            }
        }
        Ok(())
    })();
    conclude(9, "cone parameter", outcome);
}

#[test]
fn criterion_10_determinism() {
    let _lock = exclusive();
    let outcome = (|| {
        for &kind in SuiteKind::ALL.iter() {
            let first = orbitkit::run_suite(kind, 424_242).map_err(|e| e.to_string())?;
            let second = orbitkit::run_suite(kind, 424_242).map_err(|e| e.to_string())?;
            let first_json = serde_json::to_string(&first).map_err(|e| e.to_string())?;
            let second_json = serde_json::to_string(&second).map_err(|e| e.to_string())?;
            if first_json != second_json {
                return Err(format!("suite {} re-ran differently", kind.token()));
            }
            if !first.passed() {
                return Err(format!(
                    "suite {} failed {} checks at the acceptance seed",
                    kind.token(),
                    first.failures
                ));
            }
        }
        Ok(())
    })();
    conclude(10, "determinism", outcome);
}
