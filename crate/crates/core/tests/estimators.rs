use exswarm_core::competence::{
    compare_allocations, competence, effectiveness_from_counts, normalize_resources, sample_situations, wilson_interval,
    CompetenceReport, EpisodeSummary, GoalSpec, Interval, Metric, ResourceLedger, Sampler, Situation, SituationSpace,
    Variable, Verdict, Z_95,
};
use exswarm_core::rng::derive_seed;
use exswarm_core::scenario::{run_roster_episode, ArmSpec, StubArm, COIN_CLAIM};
use exswarm_core::swarm::SwarmConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coin_summaries(p: f64, n: u64, root: u64, limits: &ResourceLedger) -> Vec<EpisodeSummary> {
    let goal = GoalSpec::new("claimed", Metric::DiscoveredFraction, 1.0, 1.0).unwrap();
    let arm = ArmSpec {
        stub: Some(StubArm { claim_probability: p }),
        ..ArmSpec::default()
    };
    let roster = arm.roster(true);
    let cfg = SwarmConfig::default();
    (0..n)
        .map(|i| {
            let seed = derive_seed(root, &[i]);
            let t = run_roster_episode(COIN_CLAIM, &Situation::default(), &cfg, &roster, &goal, limits, seed).unwrap();
            EpisodeSummary::from_trace(&t, &goal)
        })
        .collect()
}

#[test]
fn fair_coin_stub_estimate() {
    let limits = ResourceLedger::new(5, 10.0, 10);
    let s = coin_summaries(0.5, 10_000, 17, &limits);
    let report = CompetenceReport::from_summaries(&s, &limits, "coin", "claimed", "stub").unwrap();
    assert!((0.49..=0.51).contains(&report.p_hat), "{}", report.p_hat);
    // Successes end after one step: r = 1 - 1/5.
    assert!((report.r - 0.8).abs() < 1e-12);
    assert!((report.c_hat - report.r * report.p_hat).abs() <= 1e-12);
}

#[test]
fn wilson_coverage_near_nominal() {
    // Binomial draws with known p; the 95% interval should cover p about
    // 95% of the time. 2000 batches put the estimate within ~0.01.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &p in &[0.1, 0.5, 0.85] {
        let batches = 2000;
        let n = 150u64;
        let mut covered = 0;
        for _ in 0..batches {
            let s = (0..n).filter(|_| rng.random_bool(p)).count() as u64;
            covered += usize::from(effectiveness_from_counts(s, n).unwrap().ci.contains(p));
        }
        let rate = covered as f64 / batches as f64;
        assert!((0.925..=0.975).contains(&rate), "p {p}: coverage {rate}");
    }
}

#[test]
fn uniform_sampler_mean() {
    let space = SituationSpace::new("u", vec![Variable::continuous("x", 0.0, 1.0)], Sampler::Uniform).unwrap();
    let s = sample_situations(&space, 100_000, 3).unwrap();
    let mean = s.iter().map(|s| s.number("x").unwrap()).sum::<f64>() / s.len() as f64;
    assert!((mean - 0.5).abs() <= 0.005, "{mean}");
}

fn report(successes: u64, n: u64, r: f64) -> CompetenceReport {
    let e = effectiveness_from_counts(successes, n).unwrap();
    CompetenceReport {
        space_id: "s".into(),
        goal_id: "g".into(),
        policy_id: "p".into(),
        n,
        successes,
        aborted: 0,
        p_hat: e.p_hat,
        ci: e.ci,
        r,
        c_hat: r * e.p_hat,
        c_ci: e.ci.scaled(r),
    }
}

proptest! {
    #[test]
    fn wilson_contains_estimate(n in 1u64..5000, frac in 0.0f64..=1.0) {
        let s = ((n as f64) * frac).floor() as u64;
        let ci = wilson_interval(s, n, Z_95);
        let p = s as f64 / n as f64;
        prop_assert!(ci.lo <= p + 1e-15 && p <= ci.hi + 1e-15);
        prop_assert!(0.0 <= ci.lo && ci.hi <= 1.0);
    }

    #[test]
    fn wilson_shrinks_with_more_data(n in 10u64..2000, frac in 0.0f64..=1.0) {
        let s = ((n as f64) * frac).floor() as u64;
        let a = wilson_interval(s, n, Z_95);
        let b = wilson_interval(4 * s, 4 * n, Z_95);
        prop_assert!(b.hi - b.lo <= a.hi - a.lo + 1e-12);
    }

    #[test]
    fn competence_monotone(p in 0.0f64..=1.0, r in 0.0f64..=1.0, dp in 0.0f64..=1.0, dr in 0.0f64..=1.0) {
        let c = competence(p, r).unwrap();
        prop_assert!(competence((p + dp).min(1.0), r).unwrap() >= c);
        prop_assert!(competence(p, (r + dr).min(1.0)).unwrap() >= c);
        prop_assert!((c - r * p).abs() <= 1e-12);
    }

    #[test]
    fn spending_more_never_scores_higher(
        steps in 0u64..100, dist in 0.0f64..100.0, msgs in 0u64..100,
        extra in 0u64..50, extra_d in 0.0f64..50.0,
    ) {
        let limits = ResourceLedger::new(100, 100.0, 100);
        let a = normalize_resources(&ResourceLedger::new(steps, dist, msgs), &limits).unwrap();
        let more = ResourceLedger::new((steps + extra).min(100), (dist + extra_d).min(100.0), msgs);
        prop_assert!(normalize_resources(&more, &limits).unwrap() <= a);
    }

    #[test]
    fn verdict_symmetric_in_isolated_arms(
        a in 0u64..200, b in 0u64..200, c in 0u64..200,
        ra in 0.0f64..=1.0, rb in 0.0f64..=1.0, rc in 0.0f64..=1.0,
    ) {
        let nat = report(a, 200, ra);
        let arti = report(b, 200, rb);
        let joint = report(c, 200, rc);
        let x = compare_allocations(&nat, &arti, &joint).unwrap();
        let y = compare_allocations(&arti, &nat, &joint).unwrap();
        prop_assert_eq!(x.verdict, y.verdict);
        if x.verdict == Verdict::Joint {
            prop_assert!(joint.c_ci.lo > nat.c_ci.hi.max(arti.c_ci.hi));
        }
    }
}

#[test]
fn identical_arms_are_inconclusive() {
    let r = report(200, 200, 1.0);
    assert_eq!(compare_allocations(&r, &r, &r).unwrap().verdict, Verdict::Inconclusive);
    assert_eq!(r.ci, Interval { lo: r.ci.lo, hi: 1.0 });
}
