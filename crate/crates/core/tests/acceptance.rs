//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p moving-phantoms --test acceptance -- --nocapture`
//! to see the per-criterion lines and timings.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use moving_phantoms::axioms::{
    check_incentive_compatibility, check_monotonicity, check_participation,
    check_pareto, check_reinforcement, check_symmetries, GridSpec, ViolationDetail,
};
use moving_phantoms::division::{Division, Profile};
use moving_phantoms::game::verify_unique_equilibrium_outcome;
use moving_phantoms::generate::{
    random_division, random_misreport, random_monotone_pair, random_permutation,
    random_profile, structured_strategies, MisreportStrategy, ProfileKind,
};
use moving_phantoms::market::{
    clearing_price, im_via_markets, market_median, verify_lp_certificate, MarketInstance,
};
use moving_phantoms::mechanisms::{
    fstar_phantom_system, im_phantom_system, independent_markets, parimutuel_consensus,
    uniform_phantom_m2, utilitarian, Mechanism, WelfareBand,
};
use moving_phantoms::phantoms::{aggregate, solve_t_star};
use moving_phantoms::rational::{rat, to_f64, Rational};

/// Prints the criterion verdict even when the test panics mid-way.
struct Criterion {
    name: &'static str,
    budget: Duration,
    started: Instant,
    passed: bool,
}

impl Criterion {
    fn start(name: &'static str, budget_secs: u64) -> Self {
        Criterion {
            name,
            budget: Duration::from_secs(budget_secs),
            started: Instant::now(),
            passed: false,
        }
    }

    fn pass(mut self) {
        let elapsed = self.started.elapsed();
        assert!(
            elapsed <= self.budget,
            "{} exceeded its {:?} budget ({:?})",
            self.name,
            self.budget,
            elapsed
        );
        self.passed = true;
        println!(
            "[acceptance] {}: PASS ({:.2?} of {:?} budget)",
            self.name, elapsed, self.budget
        );
    }
}

impl Drop for Criterion {
    fn drop(&mut self) {
        if !self.passed {
            println!("[acceptance] {}: FAIL", self.name);
        }
    }
}

fn div(strs: &[&str]) -> Division {
    Division::parse(strs).unwrap()
}

fn worked_profile() -> Profile {
    Profile::parse(&[
        &["0", "0.5", "0.5"] as &[&str],
        &["0.5", "0.5", "0"],
        &["0.9", "0", "0.1"],
    ])
    .unwrap()
}

fn overlap_profile() -> Profile {
    Profile::parse(&[&["0.8", "0.2", "0"] as &[&str], &["0.8", "0", "0.2"]]).unwrap()
}

/// Deterministic mix of profile shapes and kinds for the randomized
/// criteria: three lattice profiles for every single-minded one.
fn mixed_profiles(
    count: usize,
    max_n: usize,
    max_m: usize,
    seed: u64,
) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..=max_n);
            let m = rng.gen_range(2..=max_m);
            let kind = if i % 4 == 3 {
                ProfileKind::SingleMinded
            } else {
                ProfileKind::DirichletLike
            };
            random_profile(kind, n, m, 20, &mut rng)
        })
        .collect()
}

#[test]
fn criterion_1_example_reproduction() {
    let criterion = Criterion::start("criterion 1 (example reproduction)", 4);

    let profile = worked_profile();
    let outcome = independent_markets(&profile);
    assert_eq!(outcome, div(&["2/5", "2/5", "1/5"]));
    let t_star = solve_t_star(&im_phantom_system(3), &profile).unwrap();
    assert_eq!(t_star, rat(3, 5));
    let (x_star, prices) = im_via_markets(&profile).unwrap();
    assert_eq!(x_star, rat(5, 1));
    assert_eq!(prices, outcome);

    assert_eq!(
        independent_markets(&overlap_profile()),
        div(&["3/5", "1/5", "1/5"])
    );

    let single_minded = Profile::single_minded(&[6, 3, 1]).unwrap();
    assert_eq!(
        independent_markets(&single_minded),
        div(&["3/5", "3/10", "1/10"])
    );

    let spending = moving_phantoms::game::equilibrium_spending(&profile).unwrap();
    assert_eq!(
        spending.column_sums(),
        vec![rat(2, 1), rat(2, 1), rat(1, 1)]
    );
    assert_eq!(spending.row(0), &[rat(0, 1), rat(1, 1), rat(1, 1)]);
    assert_eq!(spending.row(1), &[rat(1, 1), rat(1, 1), rat(0, 1)]);
    assert_eq!(spending.row(2), &[rat(1, 1), rat(0, 1), rat(0, 1)]);

    criterion.pass();
}

#[test]
fn criterion_2_parimutuel_footnote() {
    let criterion = Criterion::start("criterion 2 (parimutuel footnote)", 30);

    let truthful_profile = Profile::parse(&[
        &["0", "0.5", "0.5"] as &[&str],
        &["0.5", "0.5", "0"],
    ])
    .unwrap();
    let truthful = parimutuel_consensus(&truthful_profile, 1e-10).unwrap();
    let gap: f64 = truthful
        .prices
        .iter()
        .map(|p| (p - 1.0 / 3.0).abs())
        .sum();
    assert!(gap < 1e-8, "truthful prices off by {gap}");

    let misreport_profile = Profile::parse(&[
        &["0", "0", "1"] as &[&str],
        &["0.5", "0.5", "0"],
    ])
    .unwrap();
    let manipulated = parimutuel_consensus(&misreport_profile, 1e-10).unwrap();
    let expected = [0.25, 0.25, 0.5];
    let gap: f64 = manipulated
        .prices
        .iter()
        .zip(expected)
        .map(|(p, e)| (p - e).abs())
        .sum();
    assert!(gap < 1e-8, "manipulated prices off by {gap}");

    // Voter 1's distance drops from 2/3 to 1/2 by lying.
    let ideal = [0.0, 0.5, 0.5];
    let honest_distance: f64 = truthful
        .prices
        .iter()
        .zip(ideal)
        .map(|(p, v)| (p - v).abs())
        .sum();
    let lying_distance: f64 = manipulated
        .prices
        .iter()
        .zip(ideal)
        .map(|(p, v)| (p - v).abs())
        .sum();
    assert!((honest_distance - 2.0 / 3.0).abs() < 1e-8);
    assert!((lying_distance - 0.5).abs() < 1e-8);
    assert!(lying_distance < honest_distance);

    criterion.pass();
}

#[test]
fn criterion_3_cross_oracle_equivalence() {
    let criterion = Criterion::start("criterion 3 (cross-oracle equivalence)", 60);

    let profiles = mixed_profiles(500, 6, 5, 303);
    assert_eq!(profiles.len(), 500);
    let mut two_alternative = 0;
    for profile in &profiles {
        let phantom_route = aggregate(&im_phantom_system(profile.n()), profile).unwrap();
        let (x_star, market_route) = im_via_markets(profile).unwrap();
        assert_eq!(phantom_route, market_route, "market route disagrees");
        // Common time scale: the search's supply matches the phantom time.
        let t_star = solve_t_star(&im_phantom_system(profile.n()), profile).unwrap();
        assert_eq!(
            x_star,
            Rational::from_integer((profile.n() as i64).into()) / t_star
        );
        verify_lp_certificate(profile, &phantom_route)
            .expect("certificate must verify the market outcome");

        let direct = utilitarian(profile);
        let staircase = aggregate(&fstar_phantom_system(profile.n()), profile).unwrap();
        assert_eq!(direct, staircase, "water filling disagrees with phantoms");

        if profile.m() == 2 {
            two_alternative += 1;
            assert_eq!(
                phantom_route,
                uniform_phantom_m2(profile).unwrap(),
                "uniform phantom disagreement on a two-alternative profile"
            );
        }
    }
    assert!(two_alternative >= 50, "too few two-alternative profiles");

    criterion.pass();
}

#[test]
fn criterion_4_market_median_lemma() {
    let criterion = Criterion::start("criterion 4 (clearing price = median)", 10);

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let supplies: Vec<Rational> = vec![
        rat(1, 4),
        rat(1, 2),
        rat(1, 1),
        rat(2, 1),
        rat(3, 1),
        rat(5, 1),
        rat(13, 2),
        rat(8, 1),
    ];
    for trial in 0..2000 {
        let n = rng.gen_range(1..=8);
        let values: Vec<Rational> =
            (0..n).map(|_| rat(rng.gen_range(0..=20), 20)).collect();
        let supply = supplies[rng.gen_range(0..supplies.len())].clone();
        let market = MarketInstance::new(supply, values).unwrap();
        assert_eq!(
            clearing_price(&market).unwrap(),
            market_median(&market).unwrap(),
            "lemma mismatch on trial {trial}"
        );
    }

    criterion.pass();
}

#[test]
fn criterion_5_incentive_compatibility() {
    let criterion = Criterion::start("criterion 5 (incentive compatibility)", 120);

    let strategies = moving_phantoms::generate::all_strategies(20);
    for mechanism in [Mechanism::IndependentMarkets, Mechanism::Utilitarian] {
        let profiles = mixed_profiles(100, 5, 4, 505);
        let mut trials = 0u64;
        for (idx, profile) in profiles.iter().enumerate() {
            let report = check_incentive_compatibility(
                &mechanism,
                profile,
                &strategies,
                55,
                505 + idx as u64,
            )
            .unwrap();
            assert!(
                report.holds(),
                "{} manipulated: {:?}",
                mechanism.id(),
                report.verdict
            );
            trials += report.trials;
        }
        assert!(trials >= 5000, "only {trials} trials for {}", mechanism.id());
    }

    // The manipulable baselines produce counterexamples from the structured
    // strategies alone.
    let mean_profile =
        Profile::parse(&[&["0.6", "0.4"] as &[&str], &["0", "1"]]).unwrap();
    let mean_report = check_incentive_compatibility(
        &Mechanism::Mean,
        &mean_profile,
        &structured_strategies(),
        300,
        5,
    )
    .unwrap();
    let ce = mean_report
        .counterexample()
        .expect("mean must be manipulable");
    assert!(ce.reverify(&Mechanism::Mean).unwrap());

    let parimutuel = Mechanism::Parimutuel { tolerance: 1e-10 };
    let parimutuel_profile = Profile::parse(&[
        &["0", "0.5", "0.5"] as &[&str],
        &["0.5", "0.5", "0"],
    ])
    .unwrap();
    let parimutuel_report = check_incentive_compatibility(
        &parimutuel,
        &parimutuel_profile,
        &structured_strategies(),
        300,
        5,
    )
    .unwrap();
    let ce = parimutuel_report
        .counterexample()
        .expect("parimutuel must be manipulable for three alternatives");
    assert!(ce.reverify(&parimutuel).unwrap());

    criterion.pass();
}

#[test]
fn criterion_6_axiom_suites() {
    let criterion = Criterion::start(
        "criterion 6 (monotonicity, participation, reinforcement, symmetry)",
        120,
    );

    for mechanism in [Mechanism::IndependentMarkets, Mechanism::Utilitarian] {
        let mut rng = ChaCha8Rng::seed_from_u64(606);

        // Monotonicity: 1000 conforming report pairs.
        let profiles = mixed_profiles(100, 5, 4, 616);
        let mut trials = 0;
        'monotonicity: for profile in &profiles {
            for _ in 0..10 {
                let voter = rng.gen_range(0..profile.n());
                let (higher, lower, _) =
                    random_monotone_pair(profile.m(), 20, &mut rng);
                let report =
                    check_monotonicity(&mechanism, profile, voter, &higher, &lower)
                        .unwrap();
                assert!(report.holds(), "{}: {:?}", mechanism.id(), report.verdict);
                trials += 1;
                if trials >= 1000 {
                    break 'monotonicity;
                }
            }
        }
        assert!(trials >= 1000);

        // Participation: 1000 (profile, voter) instances.
        let profiles = mixed_profiles(450, 5, 4, 626)
            .into_iter()
            .filter(|p| p.n() >= 2)
            .collect::<Vec<_>>();
        let mut trials = 0;
        'participation: for profile in &profiles {
            for voter in 0..profile.n() {
                let report = check_participation(&mechanism, profile, voter).unwrap();
                assert!(report.holds(), "{}: {:?}", mechanism.id(), report.verdict);
                trials += 1;
                if trials >= 1000 {
                    break 'participation;
                }
            }
        }
        assert!(trials >= 1000);

        // Reinforcement: self-duplication and permuted copies.
        let profiles = mixed_profiles(500, 5, 4, 636);
        let mut trials = 0;
        for profile in &profiles {
            let permuted = profile
                .permute_voters(&random_permutation(profile.n(), &mut rng))
                .unwrap();
            for second in [profile.clone(), permuted] {
                let report = check_reinforcement(&mechanism, profile, &second).unwrap();
                assert!(report.holds(), "{}: {:?}", mechanism.id(), report.verdict);
                trials += 1;
            }
        }
        assert!(trials >= 1000);

        // Anonymity and neutrality: at least 1000 sampled permutations each.
        let profiles = mixed_profiles(160, 5, 4, 646);
        let mut anonymity_trials = 0;
        let mut neutrality_trials = 0;
        for (idx, profile) in profiles.iter().enumerate() {
            let (anon, neut) =
                check_symmetries(&mechanism, profile, 8, 646 + idx as u64).unwrap();
            assert!(anon.holds(), "{}: {:?}", mechanism.id(), anon.verdict);
            assert!(neut.holds(), "{}: {:?}", mechanism.id(), neut.verdict);
            anonymity_trials += anon.trials;
            neutrality_trials += neut.trials;
        }
        assert!(
            anonymity_trials >= 1000,
            "only {anonymity_trials} anonymity trials"
        );
        assert!(
            neutrality_trials >= 1000,
            "only {neutrality_trials} neutrality trials"
        );
    }

    criterion.pass();
}

#[test]
fn criterion_7_welfare_optimality() {
    let criterion = Criterion::start("criterion 7 (welfare optimality)", 60);

    let profiles = mixed_profiles(200, 4, 3, 707);
    for profile in &profiles {
        let outcome = utilitarian(profile);
        let band = WelfareBand::from_profile(profile);
        assert!(band.contains(&outcome), "outcome escaped the welfare band");

        let grid = GridSpec::new(20, profile.m());
        let outcome_cost = profile.social_cost(&outcome).unwrap();
        let outcome_entropy = outcome.shannon_entropy();
        for q in grid.divisions().unwrap() {
            let cost = profile.social_cost(&q).unwrap();
            assert!(
                outcome_cost <= cost,
                "lattice division {q} beats the mechanism on cost"
            );
            if band.contains(&q) {
                assert!(
                    q.shannon_entropy() <= outcome_entropy + 1e-9,
                    "in-band division {q} has higher entropy"
                );
            }
        }

        // No Pareto improvement over the lattice.
        let report =
            check_pareto(&Mechanism::Utilitarian, profile, &outcome, &grid).unwrap();
        assert!(report.holds(), "{:?}", report.verdict);
    }

    // The grid oracle exhibits the known dominating division on the
    // overlapping two-voter profile.
    let squeezed = overlap_profile();
    let im_outcome = independent_markets(&squeezed);
    let report = check_pareto(
        &Mechanism::IndependentMarkets,
        &squeezed,
        &im_outcome,
        &GridSpec::new(20, 3),
    )
    .unwrap();
    match &report.counterexample().expect("dominated outcome").detail {
        ViolationDetail::ParetoImprovement { improvement, .. } => {
            assert_eq!(improvement, &div(&["0.8", "0.1", "0.1"]));
        }
        other => panic!("unexpected detail {other:?}"),
    }

    criterion.pass();
}

#[test]
fn criterion_8_nash_verification() {
    let criterion = Criterion::start("criterion 8 (nash verification)", 120);

    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut converged = 0usize;
    let mut non_converged = 0usize;
    for i in 0..50 {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(2..=3);
        let kind = if i % 5 == 4 {
            ProfileKind::SingleMinded
        } else {
            ProfileKind::DirichletLike
        };
        let profile = random_profile(kind, n, m, 8, &mut rng);
        let report =
            verify_unique_equilibrium_outcome(&profile, 20, 808 + i, 150).unwrap();
        assert!(
            report.unique(),
            "a run converged away from the market outcome: {:?}",
            report.mismatched
        );
        converged += report.converged;
        non_converged += report.non_converged;
    }
    println!(
        "[acceptance] nash dynamics: {converged} converged, {non_converged} reported non-convergent"
    );
    assert_eq!(converged + non_converged, 1000);
    assert!(converged > 0, "no run converged at all");

    criterion.pass();
}

/// Spot checks kept with the suite: misreport generation really produces
/// the structured families the manipulation search relies on.
#[test]
fn structured_misreports_cover_the_documented_families() {
    let truth = div(&["0.4", "0.4", "0.2"]);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut saw_unit = false;
    let mut saw_swap = false;
    let mut saw_shift = false;
    for _ in 0..200 {
        if let Some(lie) =
            random_misreport(&truth, MisreportStrategy::UnitVectors, &mut rng)
        {
            saw_unit |= lie.weights().iter().any(num_traits::One::is_one);
        }
        if let Some(lie) =
            random_misreport(&truth, MisreportStrategy::CoordinateSwaps, &mut rng)
        {
            let mut sorted_truth: Vec<_> = truth.weights().to_vec();
            let mut sorted_lie: Vec<_> = lie.weights().to_vec();
            sorted_truth.sort();
            sorted_lie.sort();
            saw_swap |= sorted_truth == sorted_lie;
        }
        if let Some(lie) =
            random_misreport(&truth, MisreportStrategy::MassShifts, &mut rng)
        {
            saw_shift |= truth.l1_distance(&lie).unwrap() <= rat(1, 1);
        }
    }
    assert!(saw_unit && saw_swap && saw_shift);
    let _ = random_division(3, 20, &mut rng);
    let _ = to_f64(&rat(1, 3));
}
