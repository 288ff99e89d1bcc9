//! Named verification suites behind the CLI `verify` command. Each suite
//! bundles exact trial-based checks into identity reports; a suite fails
//! iff any trial fails, and the first offending sample is attached.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::exec;
use crate::fields::{
    flows_for, invariance_residual, rank_map, witness_residual, RESIDUAL_STEP,
    RESIDUAL_THRESHOLD, WITNESS_FLOOR,
};
use crate::groups::{sample_element, GroupTag};
use crate::involution::{
    verify_intertwining_chart_a, verify_intertwining_chart_b, verify_swap_parity, IdentityReport,
};
use crate::orbits::{classify, fiber_census, swap_label_transport, GroupCase, Stratum};
use crate::rational::Rational;
use crate::sampling::{bounded_point, mixed_point, random_point};
use crate::seed::SeedStream;
use crate::space::{chart_a_dual_inverse, chart_a_inverse, chart_b_inverse, FiberSpec, Point};



/// The named verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Actions,
    Classifier,
    Census,
    Lemma3,
    RankMap,
    Delta,
    Charts,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 7] = [
        SuiteKind::Actions,
        SuiteKind::Classifier,
        SuiteKind::Census,
        SuiteKind::Lemma3,
        SuiteKind::RankMap,
        SuiteKind::Delta,
        SuiteKind::Charts,
    ];

    pub fn token(self) -> &'static str {
        match self {
            SuiteKind::Actions => "actions",
            SuiteKind::Classifier => "classifier",
            SuiteKind::Census => "census",
            SuiteKind::Lemma3 => "lemma3",
            SuiteKind::RankMap => "rankmap",
            SuiteKind::Delta => "delta",
            SuiteKind::Charts => "charts",
        }
    }

    pub fn from_token(token: &str) -> Option<SuiteKind> {
        SuiteKind::ALL.into_iter().find(|k| k.token() == token)
    }
}

/// One suite's outcome: the reports of its checks and the total failures.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: Vec<IdentityReport>,
    pub failures: usize,
}

impl SuiteReport {
    fn new(kind: SuiteKind, seed: u64, checks: Vec<IdentityReport>) -> Self {
        let failures = checks.iter().map(|c| c.failures).sum();
        SuiteReport {
            suite: kind.token(),
            seed,
            checks,
            failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Runs trials in parallel, each on its own forked stream.
fn parallel_check(
    identity: &str,
    trials: usize,
    stream: &mut SeedStream,
    check: impl Fn(usize, &mut SeedStream) -> std::result::Result<(), serde_json::Value>
        + Send
        + Sync,
) -> IdentityReport {
    let streams: Vec<SeedStream> = (0..trials).map(|_| stream.fork()).collect();
    let outcomes: Vec<Option<serde_json::Value>> = exec::map_indexed(trials, |i| {
        let mut local = streams[i].clone();
        check(i, &mut local).err()
    });
    let failures = outcomes.iter().filter(|o| o.is_some()).count();
    let first_failure = outcomes.into_iter().flatten().next();
    IdentityReport {
        identity: identity.to_string(),
        trials,
        failures,
        first_failure,
    }
}

fn err(value: serde_json::Value) -> std::result::Result<(), serde_json::Value> {
    Err(value)
}

/// Per-tag exact action soundness: sampled elements are members, preserve
/// the defining pairing, act compatibly with composition, and fix the
/// tag's continuous invariants.
fn check_actions(seed_stream: &mut SeedStream, trials: usize) -> Vec<IdentityReport> {
    GroupTag::ALL
        .iter()
        .map(|&tag| {
            let identity = format!("action-{}", tag.json_token());
            parallel_check(&identity, trials, seed_stream, move |trial, stream| {
                let n = 2 + trial % 3;
                let g = sample_element(tag, n, stream);
                let h = sample_element(tag, n, stream);
                let p = mixed_point(n, trial, stream);
                if !g.is_member() {
                    return err(json!({"trial": trial, "reason": "sample not a member"}));
                }
                let gp = g.act(&p).expect("action is defined");
                if !gp.pairing().is_one() {
                    return err(json!({"trial": trial, "reason": "pairing broken"}));
                }
                let composed = g.compose(&h).expect("same tag composes");
                let via_product = composed.act(&p).expect("action is defined");
                let via_steps = g.act(&h.act(&p).expect("action is defined")).expect("action is defined");
                if via_product != via_steps {
                    return err(json!({"trial": trial, "reason": "composition law broken"}));
                }
                let invariants_ok = match tag {
                    GroupTag::BigG | GroupTag::TildeG => true,
                    GroupTag::H1 | GroupTag::GlPlus | GroupTag::TildeH => {
                        p.first_pair() == gp.first_pair()
                            && p.prime_pairing() == gp.prime_pairing()
                    }
                    GroupTag::ScalingTorus
                    | GroupTag::HTimesTorus
                    | GroupTag::GlPlusTimesTorus
                    | GroupTag::TildeHTimesTorus => {
                        p.x1() * p.y1() == gp.x1() * gp.y1()
                            && p.prime_pairing() == gp.prime_pairing()
                    }
                };
                if !invariants_ok {
                    return err(json!({"trial": trial, "reason": "continuous invariant moved"}));
                }
                Ok(())
            })
        })
        .collect()
}

/// Classification is constant along sampled orbits, for every case over a
/// stratified mix of points.
fn check_classifier(seed_stream: &mut SeedStream, trials: usize) -> Vec<IdentityReport> {
    let mut checks: Vec<IdentityReport> = GroupCase::ALL
        .iter()
        .map(|&case| {
            let identity = format!("classifier-{}", case.json_token());
            parallel_check(&identity, trials, seed_stream, move |trial, stream| {
                let n = 2 + trial % 3;
                let p = mixed_point(n, trial, stream);
                let g = sample_element(case.acting_tag(), n, stream);
                let moved = g.act(&p).expect("action is defined");
                if classify(case, &p) != classify(case, &moved) {
                    return err(json!({
                        "trial": trial,
                        "reason": "label moved along an orbit",
                        "point": p,
                    }));
                }
                Ok(())
            })
        })
        .collect();
    checks.push(check_cone_parameter(seed_stream, trials));
    checks
}

/// The n = 2 unimodular cone parameter: invariant along orbits, matching
/// its construction, and separating distinct orbits.
fn check_cone_parameter(seed_stream: &mut SeedStream, trials: usize) -> IdentityReport {
    parallel_check("cone-parameter", trials, seed_stream, |trial, stream| {
        let x1 = stream.nonzero_rational(3);
        let y1 = x1.recip();
        let mut s = stream.positive_rational(3);
        if stream.coin() {
            s = -s;
        }
        let xp = vec![stream.nonzero_rational(3), stream.rational(3)];
        let yp = vec![-(&s * &xp[1]), &s * &xp[0]];
        let p = Point::new(2, x1, xp, y1, yp).expect("cone draw must validate");
        let label = classify(GroupCase::H1, &p);
        if *label.stratum() != Stratum::ConeParam(s.clone()) {
            return err(json!({
                "trial": trial,
                "reason": "extracted parameter disagrees with construction",
                "point": p,
            }));
        }
        let g = sample_element(GroupTag::H1, 2, stream);
        let moved = g.act(&p).expect("action is defined");
        if classify(GroupCase::H1, &moved) != label {
            return err(json!({
                "trial": trial,
                "reason": "parameter moved along an orbit",
                "point": p,
            }));
        }
        // A different parameter value must land in a different orbit.
        let shifted = &s + &Rational::one();
        if !shifted.is_zero() {
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
            .expect("shifted cone pair stays on the fiber");
            if classify(GroupCase::H1, &other) == label {
                return err(json!({
                    "trial": trial,
                    "reason": "distinct parameters collided",
                    "point": p,
                }));
            }
        }
        Ok(())
    })
}

const CENSUS_TABLE: [(GroupCase, usize, (i64, i64), usize); 8] = [
    (GroupCase::H1, 3, (1, 1), 4),
    (GroupCase::GlPlus, 2, (1, 1), 5),
    (GroupCase::TildeH, 3, (1, 1), 2),
    (GroupCase::H, 3, (1, 0), 5),
    (GroupCase::H, 3, (0, 0), 8),
    (GroupCase::H, 2, (0, 0), 10),
    (GroupCase::H, 3, (3, 0), 2),
    (GroupCase::TildeHTorus, 3, (0, 0), 4),
];

/// Builds the fiber of one frozen census row. Head fibers are encoded as
/// (1, 1); level fibers as (t, 0).
fn census_row_fiber(case: GroupCase, key: (i64, i64)) -> FiberSpec {
    if case.uses_prime_level() {
        FiberSpec::prime_pairing(Rational::from_int(key.0))
    } else {
        FiberSpec::first_pair(Rational::from_int(key.0), Rational::from_int(key.1))
    }
}

/// The eight frozen fiber censuses: exact distinct-label counts at a
/// thousand samples each, plus the continuum family on the unimodular
/// n = 2 cone fiber.
fn check_census(seed_stream: &mut SeedStream, samples: usize) -> Vec<IdentityReport> {
    let mut stream = seed_stream.fork();
    let table = IdentityReport::run("census-table", CENSUS_TABLE.len(), |row| {
        let (case, n, key, expected) = CENSUS_TABLE[row];
        let fiber = census_row_fiber(case, key);
        let report = fiber_census(case, &fiber, n, samples, &mut stream)
            .expect("census parameters are valid");
        if report.distinct != expected || report.continuum {
            return Err(json!({
                "row": row,
                "case": case.json_token(),
                "n": n,
                "expected": expected,
                "distinct": report.distinct,
                "continuum": report.continuum,
            }));
        }
        Ok(())
    });
    let mut continuum_stream = seed_stream.fork();
    let continuum = IdentityReport::run("census-continuum", 1, |_| {
        let fiber = FiberSpec::first_pair(Rational::one(), Rational::one());
        let report = fiber_census(GroupCase::H1, &fiber, 2, samples, &mut continuum_stream)
            .expect("census parameters are valid");
        let family = report.labels.iter().find(|e| e.stratum == "ConeParam");
        let distinct_params = family
            .and_then(|e| e.params.as_ref())
            .map(|p| p.len())
            .unwrap_or(0);
        if !report.continuum || report.distinct != 4 || distinct_params < 10 {
            return Err(json!({
                "reason": "continuum family not detected",
                "distinct": report.distinct,
                "continuum": report.continuum,
                "params": distinct_params,
            }));
        }
        Ok(())
    });
    vec![table, continuum]
}

/// The swap involution's label transport agrees with classifying swapped
/// points, for both torus-extended cases.
fn check_transport(seed_stream: &mut SeedStream, trials: usize) -> Vec<IdentityReport> {
    let sampled = parallel_check("swap-transport", trials, seed_stream, |trial, stream| {
        let case = if trial % 2 == 0 {
            GroupCase::H
        } else {
            GroupCase::TildeHTorus
        };
        let n = 2 + trial % 3;
        let p = mixed_point(n, trial / 2, stream);
        let lhs = classify(case, &p.swap_involution());
        let rhs = swap_label_transport(&classify(case, &p)).expect("case supports transport");
        if lhs != rhs {
            return err(json!({
                "trial": trial,
                "reason": "transported label disagrees",
                "point": p,
            }));
        }
        Ok(())
    });
    let witness = IdentityReport::run("swap-transport-witness", 1, |_| {
        // A vanishing x-block swaps to a vanishing y-block.
        let p = Point::new(
            3,
            Rational::one(),
            vec![Rational::zero(); 3],
            Rational::one(),
            vec![Rational::one(), Rational::zero(), Rational::zero()],
        )
        .expect("head-axis point is valid");
        let label = classify(GroupCase::H, &p);
        let transported = swap_label_transport(&label).expect("case supports transport");
        if *label.stratum() != Stratum::XZero || *transported.stratum() != Stratum::YZero {
            return Err(json!({"reason": "vanishing-block exchange failed"}));
        }
        let swapped = classify(GroupCase::H, &p.swap_involution());
        if swapped != transported {
            return Err(json!({"reason": "witness transport disagrees"}));
        }
        Ok(())
    });
    vec![sampled, witness]
}

/// The two exact intertwining identities, on their pinned chart domains.
fn check_lemma3(seed_stream: &mut SeedStream, n: usize, trials: usize) -> Vec<IdentityReport> {
    let mut a_stream = seed_stream.fork();
    let mut b_stream = seed_stream.fork();
    vec![
        verify_intertwining_chart_a(n, trials, &mut a_stream),
        verify_intertwining_chart_b(n, trials, &mut b_stream),
    ]
}

/// The frozen rank profile plus flat invariance residuals along every
/// generating flow, with a moving witness per action.
fn check_rank_and_residuals(seed_stream: &mut SeedStream, points: usize) -> Vec<IdentityReport> {
    let mut rank_stream = seed_stream.fork();
    let profile = IdentityReport::run("rank-profile", 1, |_| {
        let table = rank_map(3, 100, &mut rank_stream).map_err(|e| json!({"error": e.to_string()}))?;
        let expected = [
            ("Generic", 5, 5, 5, true),
            ("Cone", 5, 5, 5, true),
            ("XZero", 3, 5, 5, false),
            ("YZero", 3, 5, 5, false),
            ("Origin", 0, 0, 0, true),
        ];
        for (row, (name, gl, so, union, equal)) in table.strata.iter().zip(expected) {
            if row.name != name
                || (row.rank_gl, row.rank_so, row.rank_union) != (gl, so, union)
                || row.equal != equal
            {
                return Err(json!({
                    "reason": "rank profile deviates",
                    "stratum": row.name,
                    "rank_gl": row.rank_gl,
                    "rank_so": row.rank_so,
                    "rank_union": row.rank_union,
                }));
            }
        }
        Ok(())
    });
    const FLOW_TAGS: [GroupTag; 6] = [
        GroupTag::H1,
        GroupTag::GlPlus,
        GroupTag::TildeH,
        GroupTag::ScalingTorus,
        GroupTag::GlPlusTimesTorus,
        GroupTag::TildeHTimesTorus,
    ];
    let residuals = parallel_check("flow-residuals", points, seed_stream, |trial, stream| {
        let n = 2 + trial % 3;
        let p = crate::fields::FloatPoint::from(&bounded_point(n, stream));
        for tag in FLOW_TAGS {
            for flow in flows_for(tag, n).expect("tag supports flows") {
                let res = invariance_residual(tag, flow, &p, RESIDUAL_STEP)
                    .expect("tag supports residuals");
                if res >= RESIDUAL_THRESHOLD {
                    return err(json!({
                        "trial": trial,
                        "reason": "invariance residual above threshold",
                        "tag": tag.json_token(),
                        "residual": res,
                    }));
                }
            }
            let witness = witness_residual(tag, &p, RESIDUAL_STEP).expect("tag supports residuals");
            if witness <= WITNESS_FLOOR {
                return err(json!({
                    "trial": trial,
                    "reason": "witness derivative too flat",
                    "tag": tag.json_token(),
                    "residual": witness,
                }));
            }
        }
        Ok(())
    });
    vec![profile, residuals]
}

/// The distributional parity identity over a range of dimensions.
fn check_delta(seed_stream: &mut SeedStream, trials: usize) -> Vec<IdentityReport> {
    let mut reports = Vec::new();
    for n in [2usize, 3, 4] {
        let mut stream = seed_stream.fork();
        reports.push(verify_swap_parity(n, 5, trials, &mut stream));
    }
    reports
}

/// Chart round trips: every chart inverts exactly on its domain, and the
/// domain gates reject boundary points.
fn check_charts(seed_stream: &mut SeedStream, trials: usize) -> Vec<IdentityReport> {
    let roundtrips = parallel_check("chart-roundtrips", trials, seed_stream, |trial, stream| {
        let n = 2 + trial % 3;
        let p = random_point(n, 3, stream);
        if !p.x1().is_zero() {
            let (x1, xp, yp) = p.chart_a().expect("domain checked");
            let back = chart_a_inverse(n, x1, xp, yp).expect("chart data is consistent");
            if back != p {
                return err(json!({"trial": trial, "reason": "first chart failed", "point": p}));
            }
        } else if p.chart_a().is_ok() {
            return err(json!({"trial": trial, "reason": "first chart ignored its gate"}));
        }
        if !p.y1().is_zero() {
            let (y1, xp, yp) = p.chart_a_dual().expect("domain checked");
            let back = chart_a_dual_inverse(n, y1, xp, yp).expect("chart data is consistent");
            if back != p {
                return err(json!({"trial": trial, "reason": "dual chart failed", "point": p}));
            }
        }
        let q = Rational::one() - &(p.x1() * p.y1());
        if q.is_positive() {
            let (pair, heads) = p.chart_b().expect("domain checked");
            let back = chart_b_inverse(pair, heads).expect("chart data is consistent");
            if back != p {
                return err(json!({"trial": trial, "reason": "third chart failed", "point": p}));
            }
        } else if p.chart_b().is_ok() {
            return err(json!({"trial": trial, "reason": "third chart ignored its gate"}));
        }
        Ok(())
    });
    let gates = IdentityReport::run("chart-domain-gates", 1, |_| {
        let axis = Point::new(
            3,
            Rational::zero(),
            vec![Rational::one(), Rational::zero(), Rational::zero()],
            Rational::from_int(2),
            vec![Rational::one(), Rational::zero(), Rational::zero()],
        )
        .expect("axis point is valid");
        if axis.chart_a().is_ok() {
            return Err(json!({"reason": "first chart accepted x1 = 0"}));
        }
        let base = Point::base(3).expect("base point exists");
        if base.chart_b().is_ok() {
            return Err(json!({"reason": "third chart accepted the cone fiber"}));
        }
        Ok(())
    });
    vec![roundtrips, gates]
}

/// Runs one suite with a deterministic seed. Every check derives its own
/// substream, so check outcomes are independent of suite composition.
pub fn run_suite(kind: SuiteKind, seed: u64) -> Result<SuiteReport> {
    run_suite_sized(kind, seed, None, None)
}

/// Runs one suite with optional size overrides.
///
/// `trials` replaces the pinned per-check sample count. `n` picks the chart
/// dimension and is only free for the intertwining suite; every other suite
/// carries frozen dimension-specific expectations.
pub fn run_suite_sized(
    kind: SuiteKind,
    seed: u64,
    n: Option<usize>,
    trials: Option<usize>,
) -> Result<SuiteReport> {
    if let Some(dim) = n {
        if kind != SuiteKind::Lemma3 {
            return Err(Error::InvalidInput(format!(
                "suite {} runs at pinned dimensions; a dimension override only applies to lemma3",
                kind.token()
            )));
        }
        if dim < 2 {
            return Err(Error::UnsupportedDimension { n: dim });
        }
    }
    if trials == Some(0) {
        return Err(Error::InvalidInput("trial count must be at least 1".into()));
    }
    let base = SeedStream::new(seed);
    let checks = match kind {
        SuiteKind::Actions => check_actions(&mut base.derive(1_000), trials.unwrap_or(500)),
        SuiteKind::Classifier => check_classifier(&mut base.derive(2_000), trials.unwrap_or(1_000)),
        SuiteKind::Census => {
            let mut checks = check_census(&mut base.derive(3_000), trials.unwrap_or(1_000));
            checks.extend(check_transport(&mut base.derive(3_500), trials.unwrap_or(500)));
            checks
        }
        SuiteKind::Lemma3 => check_lemma3(
            &mut base.derive(4_000),
            n.unwrap_or(3),
            trials.unwrap_or(500),
        ),
        SuiteKind::RankMap => {
            check_rank_and_residuals(&mut base.derive(5_000), trials.unwrap_or(100))
        }
        SuiteKind::Delta => check_delta(&mut base.derive(6_000), trials.unwrap_or(200)),
        SuiteKind::Charts => check_charts(&mut base.derive(7_000), trials.unwrap_or(500)),
    };
    if checks.is_empty() {
        return Err(Error::Inconsistent("suite produced no checks".into()));
    }
    Ok(SuiteReport::new(kind, seed, checks))
}
