//! Axiom checkers and brute-force oracles, usable against any mechanism.
//!
//! Each checker produces an [`AxiomReport`]: either the axiom held on every
//! tested instance, or a [`Counterexample`] whose payload carries enough
//! exact rationals to re-verify the violation from scratch. Checkers compare
//! exactly for exact mechanisms; the floating-point parimutuel baseline is
//! compared up to its convergence margin so float dust never counts as a
//! violation.
//!
//! The grid oracles enumerate every lattice division at resolution `1/d`,
//! which keeps Pareto checking one-sided: it can exhibit counterexamples but
//! cannot certify optimality off the lattice. Welfare optimality, by
//! contrast, is certified exactly through the [`WelfareBand`] membership
//! test.

use num_integer::binomial;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::division::{Division, Profile};
use crate::error::Error;
use crate::generate::{
    random_misreport, random_monotone_pair, random_permutation, MisreportStrategy,
};
use crate::mechanisms::{Mechanism, MoulinPhantoms, WelfareBand};
use crate::rational::{rat, Rational};
use crate::Result;

/// Cap on grid enumeration size.
pub const DEFAULT_GRID_CAP: u128 = 200_000;

/// The axioms the suite knows how to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    IncentiveCompatibility,
    Pareto,
    Proportionality,
    Monotonicity,
    Participation,
    Reinforcement,
    RangeRespecting,
    Anonymity,
    Neutrality,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::IncentiveCompatibility => "incentive-compatibility",
            Axiom::Pareto => "pareto-optimality",
            Axiom::Proportionality => "proportionality",
            Axiom::Monotonicity => "monotonicity",
            Axiom::Participation => "participation",
            Axiom::Reinforcement => "reinforcement",
            Axiom::RangeRespecting => "range-respecting",
            Axiom::Anonymity => "anonymity",
            Axiom::Neutrality => "neutrality",
        }
    }

    pub const ALL: [Axiom; 9] = [
        Axiom::IncentiveCompatibility,
        Axiom::Pareto,
        Axiom::Proportionality,
        Axiom::Monotonicity,
        Axiom::Participation,
        Axiom::Reinforcement,
        Axiom::RangeRespecting,
        Axiom::Anonymity,
        Axiom::Neutrality,
    ];
}

/// The axioms a mechanism is on record as satisfying; a counterexample for
/// one of these is a hard failure of the suite.
pub fn claimed_axioms(mechanism: &Mechanism) -> Vec<Axiom> {
    use Axiom::*;
    match mechanism {
        Mechanism::IndependentMarkets | Mechanism::UniformPhantom => vec![
            IncentiveCompatibility,
            Proportionality,
            Monotonicity,
            Participation,
            Reinforcement,
            Anonymity,
            Neutrality,
        ],
        Mechanism::Utilitarian => vec![
            IncentiveCompatibility,
            Pareto,
            Monotonicity,
            Participation,
            Reinforcement,
            RangeRespecting,
            Anonymity,
            Neutrality,
        ],
        Mechanism::Moulin(phantoms) => {
            let mut claims = vec![IncentiveCompatibility, Monotonicity, Anonymity];
            let neutral = phantoms.as_ref().is_none_or(MoulinPhantoms::is_neutral);
            if neutral {
                claims.push(Neutrality);
            }
            if phantoms.is_none() {
                // Uniform placement scales with the population.
                claims.extend([Proportionality, Participation, Reinforcement]);
            }
            claims
        }
        Mechanism::Mean => vec![
            Proportionality,
            Monotonicity,
            Participation,
            Reinforcement,
            RangeRespecting,
            Anonymity,
            Neutrality,
        ],
        Mechanism::Parimutuel { .. } => vec![Proportionality, Anonymity, Neutrality],
    }
}

/// Verdict of one axiom check.
#[derive(Debug, Clone)]
pub enum Verdict {
    Holds,
    Violated(Box<Counterexample>),
    Skipped { reason: String },
}

/// Exact payload of a violation, sufficient to replay it.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub profile: Profile,
    pub detail: ViolationDetail,
}

#[derive(Debug, Clone)]
pub enum ViolationDetail {
    Manipulation {
        voter: usize,
        misreport: Division,
        truthful_outcome: Division,
        manipulated_outcome: Division,
        truthful_distance: Rational,
        manipulated_distance: Rational,
    },
    ParetoImprovement {
        outcome: Division,
        improvement: Division,
    },
    Disproportional {
        outcome: Division,
        expected: Division,
    },
    NonMonotone {
        voter: usize,
        alternative: usize,
        higher_report: Division,
        lower_report: Division,
        higher_outcome: Division,
        lower_outcome: Division,
    },
    ParticipationFailure {
        voter: usize,
        with_distance: Rational,
        without_distance: Rational,
    },
    ReinforcementFailure {
        second_profile: Profile,
        separate_outcome: Division,
        combined_outcome: Division,
    },
    RangeViolation {
        outcome: Division,
        alternative: usize,
        minimum: Rational,
        maximum: Rational,
    },
    Asymmetry {
        permutation: Vec<usize>,
        of_voters: bool,
        base_outcome: Division,
        permuted_outcome: Division,
    },
}

impl Counterexample {
    /// Recomputes the violation from the stored payload. Returns true when
    /// the recomputation reproduces it exactly.
    pub fn reverify(&self, mechanism: &Mechanism) -> Result<bool> {
        let margin = mechanism.comparison_margin();
        match &self.detail {
            ViolationDetail::Manipulation {
                voter,
                misreport,
                truthful_distance,
                manipulated_distance,
                ..
            } => {
                let truth = self.profile.report(*voter).clone();
                let truthful = mechanism.apply(&self.profile)?;
                let lied = mechanism
                    .apply(&self.profile.with_report(*voter, misreport.clone())?)?;
                let d_truth = truthful.l1_distance(&truth)?;
                let d_lie = lied.l1_distance(&truth)?;
                Ok(&d_truth == truthful_distance
                    && &d_lie == manipulated_distance
                    && d_lie.clone() + &margin < d_truth)
            }
            ViolationDetail::ParetoImprovement {
                outcome,
                improvement,
            } => {
                let mut some_strict = false;
                for report in self.profile.reports() {
                    let old = outcome.l1_distance(report)?;
                    let new = improvement.l1_distance(report)?;
                    if new > old {
                        return Ok(false);
                    }
                    if new < old {
                        some_strict = true;
                    }
                }
                Ok(some_strict)
            }
            ViolationDetail::Disproportional { outcome, expected } => {
                let recomputed = mechanism.apply(&self.profile)?;
                Ok(&recomputed == outcome
                    && outcome.l1_distance(expected)? > margin)
            }
            ViolationDetail::NonMonotone {
                voter,
                alternative,
                higher_report,
                lower_report,
                ..
            } => {
                let higher = mechanism
                    .apply(&self.profile.with_report(*voter, higher_report.clone())?)?;
                let lower = mechanism
                    .apply(&self.profile.with_report(*voter, lower_report.clone())?)?;
                Ok(higher.get(*alternative).clone() + &margin
                    < lower.get(*alternative).clone())
            }
            ViolationDetail::ParticipationFailure {
                voter,
                with_distance,
                without_distance,
            } => {
                let report = self.profile.report(*voter).clone();
                let with = mechanism.apply(&self.profile)?.l1_distance(&report)?;
                let without = mechanism
                    .apply(&self.profile.without_voter(*voter)?)?
                    .l1_distance(&report)?;
                Ok(&with == with_distance
                    && &without == without_distance
                    && without.clone() + &margin < with)
            }
            ViolationDetail::ReinforcementFailure {
                second_profile,
                separate_outcome,
                combined_outcome,
            } => {
                let combined = mechanism
                    .apply(&self.profile.concat(second_profile)?)?;
                Ok(&combined == combined_outcome
                    && combined.l1_distance(separate_outcome)? > margin)
            }
            ViolationDetail::RangeViolation {
                outcome,
                alternative,
                minimum,
                maximum,
            } => {
                let value = outcome.get(*alternative);
                Ok(value.clone() + &margin < minimum.clone()
                    || maximum.clone() + &margin < value.clone())
            }
            ViolationDetail::Asymmetry {
                permutation,
                of_voters,
                ..
            } => {
                let base = mechanism.apply(&self.profile)?;
                if *of_voters {
                    let permuted = mechanism
                        .apply(&self.profile.permute_voters(permutation)?)?;
                    Ok(base.l1_distance(&permuted)? > margin)
                } else {
                    let permuted = mechanism
                        .apply(&self.profile.permute_alternatives(permutation)?)?;
                    let mapped = base.permute(permutation)?;
                    Ok(mapped.l1_distance(&permuted)? > margin)
                }
            }
        }
    }
}

/// Result of checking one axiom against one mechanism.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub mechanism: String,
    pub trials: u64,
    pub seed: u64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl AxiomReport {
    fn new(axiom: Axiom, mechanism: &Mechanism, seed: u64) -> Self {
        AxiomReport {
            axiom,
            mechanism: mechanism.id().to_string(),
            trials: 0,
            seed,
            verdict: Verdict::Holds,
            notes: Vec::new(),
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds)
    }

    pub fn violated(&self) -> bool {
        matches!(self.verdict, Verdict::Violated(_))
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match &self.verdict {
            Verdict::Violated(ce) => Some(ce),
            _ => None,
        }
    }

    /// One line of the text report format.
    pub fn line(&self) -> String {
        let verdict = match &self.verdict {
            Verdict::Holds => "holds".to_string(),
            Verdict::Violated(_) => "violated".to_string(),
            Verdict::Skipped { reason } => format!("skipped({reason})"),
        };
        format!(
            "axiom={} mechanism={} trials={} seed={} verdict={}",
            self.axiom.name(),
            self.mechanism,
            self.trials,
            self.seed,
            verdict
        )
    }
}

/// Lattice divisions at resolution `1/d` over `m` alternatives: exactly the
/// compositions of `d` into `m` nonnegative parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub resolution: u32,
    pub m: usize,
    pub cap: u128,
}

impl GridSpec {
    pub fn new(resolution: u32, m: usize) -> Self {
        GridSpec {
            resolution,
            m,
            cap: DEFAULT_GRID_CAP,
        }
    }

    pub fn with_cap(resolution: u32, m: usize, cap: u128) -> Self {
        GridSpec { resolution, m, cap }
    }

    /// Number of lattice divisions, `C(d + m - 1, m - 1)`.
    pub fn count(&self) -> u128 {
        binomial(
            (self.resolution as u128) + (self.m as u128) - 1,
            (self.m as u128) - 1,
        )
    }

    /// Enumerates every lattice division, erroring if the count exceeds the
    /// cap.
    pub fn divisions(&self) -> Result<Vec<Division>> {
        let points = self.count();
        if points > self.cap {
            return Err(Error::GridTooLarge {
                points,
                cap: self.cap,
            });
        }
        let mut out = Vec::with_capacity(points as usize);
        let mut parts = vec![0u32; self.m];
        compose(self.resolution, 0, &mut parts, self.resolution, &mut out);
        Ok(out)
    }
}

fn compose(
    remaining: u32,
    index: usize,
    parts: &mut Vec<u32>,
    resolution: u32,
    out: &mut Vec<Division>,
) {
    if index + 1 == parts.len() {
        parts[index] = remaining;
        let weights = parts
            .iter()
            .map(|&k| rat(k as i64, resolution as i64))
            .collect();
        out.push(Division::new(weights).expect("lattice composition is normalized"));
        return;
    }
    for k in 0..=remaining {
        parts[index] = k;
        compose(remaining - k, index + 1, parts, resolution, out);
    }
}

/// All social-cost minimizers over the lattice, by exhaustive enumeration.
pub fn brute_force_welfare_oracle(profile: &Profile, grid: &GridSpec) -> Result<Vec<Division>> {
    let mut best: Option<Rational> = None;
    let mut minimizers = Vec::new();
    for q in grid.divisions()? {
        let cost = profile.social_cost(&q)?;
        match &best {
            Some(current) if &cost > current => {}
            Some(current) if &cost == current => minimizers.push(q),
            _ => {
                best = Some(cost);
                minimizers = vec![q];
            }
        }
    }
    Ok(minimizers)
}

/// Samples `(voter, misreport)` pairs and checks that no lie strictly
/// reduces the liar's distance to the outcome.
pub fn check_incentive_compatibility(
    mechanism: &Mechanism,
    profile: &Profile,
    strategies: &[MisreportStrategy],
    trials: u64,
    seed: u64,
) -> Result<AxiomReport> {
    let mut report = AxiomReport::new(Axiom::IncentiveCompatibility, mechanism, seed);
    let margin = mechanism.comparison_margin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truthful_outcome = mechanism.apply(profile)?;
    // Strategies can degenerate on a given report (e.g. swapping equal
    // coordinates); redraw so the trial budget counts tested misreports.
    let mut attempts = trials.saturating_mul(40);
    while report.trials < trials && attempts > 0 {
        attempts -= 1;
        let voter = rng.gen_range(0..profile.n());
        let truth = profile.report(voter).clone();
        let strategy = strategies[rng.gen_range(0..strategies.len())];
        let Some(misreport) = random_misreport(&truth, strategy, &mut rng) else {
            continue;
        };
        report.trials += 1;
        let lied_profile = profile.with_report(voter, misreport.clone())?;
        let manipulated_outcome = mechanism.apply(&lied_profile)?;
        let truthful_distance = truthful_outcome.l1_distance(&truth)?;
        let manipulated_distance = manipulated_outcome.l1_distance(&truth)?;
        if manipulated_distance.clone() + &margin < truthful_distance {
            report.verdict = Verdict::Violated(Box::new(Counterexample {
                profile: profile.clone(),
                detail: ViolationDetail::Manipulation {
                    voter,
                    misreport,
                    truthful_outcome,
                    manipulated_outcome,
                    truthful_distance,
                    manipulated_distance,
                },
            }));
            return Ok(report);
        }
    }
    Ok(report)
}

/// Brute-force Pareto check of `outcome` over a lattice: flags any division
/// that is weakly closer for every voter and strictly closer for one,
/// reporting the strongest improvement (largest total distance reduction,
/// ties broken toward higher entropy). The grid is one-sided; a clean pass
/// cannot certify optimality off-lattice, which the report notes.
pub fn check_pareto(
    mechanism: &Mechanism,
    profile: &Profile,
    outcome: &Division,
    grid: &GridSpec,
) -> Result<AxiomReport> {
    let mut report = AxiomReport::new(Axiom::Pareto, mechanism, 0);
    let margin = mechanism.comparison_margin();
    let distances: Vec<Rational> = profile
        .reports()
        .iter()
        .map(|r| outcome.l1_distance(r))
        .collect::<Result<_>>()?;
    let mut best: Option<(Division, Rational, f64)> = None;
    for q in grid.divisions()? {
        report.trials += 1;
        let mut weakly_better = true;
        let mut strictly_better = false;
        let mut gain = Rational::zero();
        for (report_div, old) in profile.reports().iter().zip(&distances) {
            let new = q.l1_distance(report_div)?;
            if new.clone() > old.clone() + &margin {
                weakly_better = false;
                break;
            }
            if new.clone() + &margin < old.clone() {
                strictly_better = true;
            }
            gain += old - new;
        }
        if weakly_better && strictly_better {
            let entropy = q.shannon_entropy();
            let stronger = match &best {
                None => true,
                Some((_, best_gain, best_entropy)) => {
                    &gain > best_gain
                        || (&gain == best_gain && entropy > best_entropy + 1e-12)
                }
            };
            if stronger {
                best = Some((q, gain, entropy));
            }
        }
    }
    if let Some((improvement, _, _)) = best {
        report.verdict = Verdict::Violated(Box::new(Counterexample {
            profile: profile.clone(),
            detail: ViolationDetail::ParetoImprovement {
                outcome: outcome.clone(),
                improvement,
            },
        }));
        return Ok(report);
    }
    report.notes.push(format!(
        "grid-only certificate at resolution 1/{}: counterexamples conclusive, absence is not",
        grid.resolution
    ));
    if matches!(mechanism, Mechanism::Utilitarian) {
        let band = WelfareBand::from_profile(profile);
        if band.contains(outcome) {
            report
                .notes
                .push("welfare optimality certified by order-statistic band".to_string());
        } else {
            report.verdict = Verdict::Violated(Box::new(Counterexample {
                profile: profile.clone(),
                detail: ViolationDetail::ParetoImprovement {
                    outcome: outcome.clone(),
                    improvement: band.water_level().1,
                },
            }));
        }
    }
    Ok(report)
}

/// Builds the single-minded profile for `counts` and checks that each
/// alternative receives exactly its supporter share.
pub fn check_proportionality(
    mechanism: &Mechanism,
    counts: &[usize],
) -> Result<AxiomReport> {
    let mut report = AxiomReport::new(Axiom::Proportionality, mechanism, 0);
    report.trials = 1;
    let profile = Profile::single_minded(counts)?;
    let n = profile.n() as i64;
    let expected = Division::new(
        counts.iter().map(|&c| rat(c as i64, n)).collect(),
    )?;
    let outcome = mechanism.apply(&profile)?;
    if outcome.l1_distance(&expected)? > mechanism.comparison_margin() {
        report.verdict = Verdict::Violated(Box::new(Counterexample {
            profile,
            detail: ViolationDetail::Disproportional { outcome, expected },
        }));
    }
    Ok(report)
}

/// Checks one monotonicity instance: `higher` exceeds `lower` on exactly
/// one alternative (and is weakly below elsewhere), so the outcome on that
/// alternative must not drop when the voter switches from `lower` to
/// `higher`.
pub fn check_monotonicity(
    mechanism: &Mechanism,
    profile: &Profile,
    voter: usize,
    higher: &Division,
    lower: &Division,
) -> Result<AxiomReport> {
    let mut report = AxiomReport::new(Axiom::Monotonicity, mechanism, 0);
    report.trials = 1;
    if higher.m() != profile.m() || lower.m() != profile.m() {
        return Err(Error::DimensionMismatch {
            left: profile.m(),
            right: higher.m(),
        });
    }
    let mut raised = None;
    for j in 0..higher.m() {
        if higher.get(j) > lower.get(j) {
            if raised.is_some() {
                return Err(Error::BadMonotonicityPair {
                    reason: "reports differ upward on more than one alternative".to_string(),
                });
            }
            raised = Some(j);
        }
    }
    let Some(alternative) = raised else {
        return Err(Error::BadMonotonicityPair {
            reason: "premise needs a strictly raised alternative".to_string(),
        });
    };
    let higher_outcome = mechanism.apply(&profile.with_report(voter, higher.clone())?)?;
    let lower_outcome = mechanism.apply(&profile.with_report(voter, lower.clone())?)?;
    let margin = mechanism.comparison_margin();
    if higher_outcome.get(alternative).clone() + &margin
        < lower_outcome.get(alternative).clone()
    {
        report.verdict = Verdict::Violated(Box::new(Counterexample {
            profile: profile.clone(),
            detail: ViolationDetail::NonMonotone {
                voter,
                alternative,
                higher_report: higher.clone(),
                lower_report: lower.clone(),
                higher_outcome,
                lower_outcome,
            },
        }));
    }
    Ok(report)
}

/// Checks that voter `i` is weakly better off participating truthfully than
/// staying home: the mechanism runs at both population sizes.
pub fn check_participation(
    mechanism: &Mechanism,
    profile: &Profile,
    voter: usize,
) -> Result<AxiomReport> {
    let mut report = AxiomReport::new(Axiom::Participation, mechanism, 0);
    report.trials = 1;
    if profile.n() < 2 {
        report.verdict = Verdict::Skipped {
            reason: "needs at least two voters".to_string(),
        };
        return Ok(report);
    }
    if matches!(mechanism, Mechanism::Moulin(Some(_))) {
        return Err(Error::UnsupportedOperation {
            id: mechanism.id().to_string(),
            operation: "participation across population sizes (fixed phantom count)"
                .to_string(),
        });
    }
    let truth = profile.report(voter).clone();
    let with_distance = mechanism.apply(profile)?.l1_distance(&truth)?;
    let without_distance = mechanism
        .apply(&profile.without_voter(voter)?)?
        .l1_distance(&truth)?;
    if without_distance.clone() + &mechanism.comparison_margin() < with_distance {
        report.verdict = Verdict::Violated(Box::new(Counterexample {
            profile: profile.clone(),
            detail: ViolationDetail::ParticipationFailure {
                voter,
                with_distance,
                without_distance,
            },
        }));
    }
    Ok(report)
}

/// Checks reinforcement on a profile pair: when both profiles aggregate to
/// the same division, their concatenation must as well. Pairs disagreeing
/// on the outcome are vacuous and reported as skipped.
pub fn check_reinforcement(
    mechanism: &Mechanism,
    first: &Profile,
    second: &Profile,
) -> Result<AxiomReport> {
    let mut report = AxiomReport::new(Axiom::Reinforcement, mechanism, 0);
    report.trials = 1;
    let margin = mechanism.comparison_margin();
    let first_outcome = mechanism.apply(first)?;
    let second_outcome = mechanism.apply(second)?;
    if first_outcome.l1_distance(&second_outcome)? > margin {
        report.verdict = Verdict::Skipped {
            reason: "profiles disagree, premise is vacuous".to_string(),
        };
        return Ok(report);
    }
    let combined_outcome = mechanism.apply(&first.concat(second)?)?;
    if combined_outcome.l1_distance(&first_outcome)? > margin {
        report.verdict = Verdict::Violated(Box::new(Counterexample {
            profile: first.clone(),
            detail: ViolationDetail::ReinforcementFailure {
                second_profile: second.clone(),
                separate_outcome: first_outcome,
                combined_outcome,
            },
        }));
    }
    Ok(report)
}

/// Checks that every outcome coordinate lies between the smallest and
/// largest report on that alternative.
pub fn check_range_respecting(
    mechanism: &Mechanism,
    profile: &Profile,
) -> Result<AxiomReport> {
    let mut report = AxiomReport::new(Axiom::RangeRespecting, mechanism, 0);
    report.trials = 1;
    let outcome = mechanism.apply(profile)?;
    let margin = mechanism.comparison_margin();
    for j in 0..profile.m() {
        let column = profile.column(j);
        let minimum = column.iter().min().expect("nonempty profile").clone();
        let maximum = column.iter().max().expect("nonempty profile").clone();
        let value = outcome.get(j);
        if value.clone() + &margin < minimum || maximum.clone() + &margin < value.clone() {
            report.verdict = Verdict::Violated(Box::new(Counterexample {
                profile: profile.clone(),
                detail: ViolationDetail::RangeViolation {
                    outcome: outcome.clone(),
                    alternative: j,
                    minimum,
                    maximum,
                },
            }));
            return Ok(report);
        }
    }
    Ok(report)
}

/// Checks anonymity (voter permutations fix the outcome) and neutrality
/// (alternative permutations permute it identically). Enumerates all
/// permutations when few, otherwise samples.
pub fn check_symmetries(
    mechanism: &Mechanism,
    profile: &Profile,
    samples: usize,
    seed: u64,
) -> Result<(AxiomReport, AxiomReport)> {
    let mut anonymity = AxiomReport::new(Axiom::Anonymity, mechanism, seed);
    let mut neutrality = AxiomReport::new(Axiom::Neutrality, mechanism, seed);
    let margin = mechanism.comparison_margin();
    let base = mechanism.apply(profile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for permutation in permutations_of(profile.n(), samples, &mut rng) {
        anonymity.trials += 1;
        let permuted = mechanism.apply(&profile.permute_voters(&permutation)?)?;
        if base.l1_distance(&permuted)? > margin {
            anonymity.verdict = Verdict::Violated(Box::new(Counterexample {
                profile: profile.clone(),
                detail: ViolationDetail::Asymmetry {
                    permutation,
                    of_voters: true,
                    base_outcome: base.clone(),
                    permuted_outcome: permuted,
                },
            }));
            break;
        }
    }
    for permutation in permutations_of(profile.m(), samples, &mut rng) {
        neutrality.trials += 1;
        let permuted = mechanism.apply(&profile.permute_alternatives(&permutation)?)?;
        let mapped = base.permute(&permutation)?;
        if mapped.l1_distance(&permuted)? > margin {
            neutrality.verdict = Verdict::Violated(Box::new(Counterexample {
                profile: profile.clone(),
                detail: ViolationDetail::Asymmetry {
                    permutation,
                    of_voters: false,
                    base_outcome: base.clone(),
                    permuted_outcome: permuted,
                },
            }));
            break;
        }
    }
    Ok((anonymity, neutrality))
}

/// All permutations of `0..len` when there are at most `4! = 24`, otherwise
/// `samples` random ones.
fn permutations_of<R: Rng>(len: usize, samples: usize, rng: &mut R) -> Vec<Vec<usize>> {
    if len <= 4 {
        let mut all = Vec::new();
        let mut current: Vec<usize> = (0..len).collect();
        heap_permutations(len, &mut current, &mut all);
        all
    } else {
        (0..samples).map(|_| random_permutation(len, rng)).collect()
    }
}

fn heap_permutations(k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(current.clone());
        return;
    }
    for i in 0..k {
        heap_permutations(k - 1, current, out);
        if k.is_multiple_of(2) {
            current.swap(i, k - 1);
        } else {
            current.swap(0, k - 1);
        }
    }
}

/// Configuration of a full suite run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub mechanism: Mechanism,
    pub trials: u64,
    pub seed: u64,
    pub grid_resolution: u32,
}

impl SuiteConfig {
    pub fn new(mechanism: Mechanism) -> Self {
        SuiteConfig {
            mechanism,
            trials: 200,
            seed: 0,
            grid_resolution: 10,
        }
    }
}

/// Result of running every checker against one mechanism.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub mechanism: String,
    pub seed: u64,
    pub reports: Vec<AxiomReport>,
    pub claimed: Vec<Axiom>,
}

impl SuiteReport {
    /// Names of claimed axioms with counterexamples: nonempty means the
    /// suite failed.
    pub fn claim_violations(&self) -> Vec<&'static str> {
        self.reports
            .iter()
            .filter(|r| r.violated() && self.claimed.contains(&r.axiom))
            .map(|r| r.axiom.name())
            .collect()
    }

    pub fn lines(&self) -> Vec<String> {
        self.reports.iter().map(AxiomReport::line).collect()
    }
}

/// Runs every axiom checker against the mechanism over the given profiles.
///
/// Randomized checkers (manipulation, monotonicity, symmetry sampling)
/// spread the trial budget over the profiles; instance checkers run once
/// per profile. Single-minded instances for proportionality are derived
/// from the profiles' shapes under the suite seed.
pub fn run_axiom_suite(config: &SuiteConfig, profiles: &[Profile]) -> Result<SuiteReport> {
    if profiles.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let mechanism = &config.mechanism;
    let mut reports: Vec<AxiomReport> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let per_profile = (config.trials / profiles.len() as u64).max(1);
    let strategies = crate::generate::all_strategies(20);

    // Incentive compatibility.
    let mut combined = AxiomReport::new(Axiom::IncentiveCompatibility, mechanism, config.seed);
    for (idx, profile) in profiles.iter().enumerate() {
        let sub = check_incentive_compatibility(
            mechanism,
            profile,
            &strategies,
            per_profile,
            config.seed.wrapping_add(idx as u64),
        )?;
        combined.trials += sub.trials;
        if sub.violated() {
            combined.verdict = sub.verdict;
            break;
        }
    }
    reports.push(combined);

    // Pareto over the lattice.
    let mut combined = AxiomReport::new(Axiom::Pareto, mechanism, config.seed);
    for profile in profiles {
        let outcome = mechanism.apply(profile)?;
        let grid = GridSpec::new(config.grid_resolution, profile.m());
        let sub = check_pareto(mechanism, profile, &outcome, &grid)?;
        combined.trials += sub.trials;
        for note in &sub.notes {
            if !combined.notes.contains(note) {
                combined.notes.push(note.clone());
            }
        }
        if sub.violated() {
            combined.verdict = sub.verdict;
            break;
        }
    }
    reports.push(combined);

    // Proportionality on derived single-minded instances.
    let mut combined = AxiomReport::new(Axiom::Proportionality, mechanism, config.seed);
    for profile in profiles {
        let counts: Vec<usize> =
            random_composition(profile.n() as u32, profile.m(), &mut rng)
                .into_iter()
                .map(|c| c as usize)
                .collect();
        let sub = check_proportionality(mechanism, &counts)?;
        combined.trials += sub.trials;
        if sub.violated() {
            combined.verdict = sub.verdict;
            break;
        }
    }
    reports.push(combined);

    // Monotonicity on random conforming pairs.
    let mut combined = AxiomReport::new(Axiom::Monotonicity, mechanism, config.seed);
    'monotone: for profile in profiles {
        for _ in 0..per_profile {
            let voter = rng.gen_range(0..profile.n());
            let (higher, lower, _) =
                random_monotone_pair(profile.m(), 20, &mut rng);
            let sub = check_monotonicity(mechanism, profile, voter, &higher, &lower)?;
            combined.trials += sub.trials;
            if sub.violated() {
                combined.verdict = sub.verdict;
                break 'monotone;
            }
        }
    }
    reports.push(combined);

    // Participation of every voter.
    let mut combined = AxiomReport::new(Axiom::Participation, mechanism, config.seed);
    if matches!(mechanism, Mechanism::Moulin(Some(_))) {
        combined.verdict = Verdict::Skipped {
            reason: "fixed phantom count pins the population size".to_string(),
        };
    } else {
        'participation: for profile in profiles {
            if profile.n() < 2 {
                continue;
            }
            for voter in 0..profile.n() {
                let sub = check_participation(mechanism, profile, voter)?;
                combined.trials += sub.trials;
                if sub.violated() {
                    combined.verdict = sub.verdict;
                    break 'participation;
                }
            }
        }
    }
    reports.push(combined);

    // Reinforcement: self-duplication and voter-permuted copies. A fixed
    // phantom count cannot follow the concatenated population.
    let mut combined = AxiomReport::new(Axiom::Reinforcement, mechanism, config.seed);
    if matches!(mechanism, Mechanism::Moulin(Some(_))) {
        combined.verdict = Verdict::Skipped {
            reason: "fixed phantom count pins the population size".to_string(),
        };
    } else {
        'reinforcement: for profile in profiles {
            let copies = [
                profile.clone(),
                profile.permute_voters(&random_permutation(profile.n(), &mut rng))?,
            ];
            for second in copies {
                let sub = check_reinforcement(mechanism, profile, &second)?;
                if matches!(sub.verdict, Verdict::Skipped { .. }) {
                    continue;
                }
                combined.trials += sub.trials;
                if sub.violated() {
                    combined.verdict = sub.verdict;
                    break 'reinforcement;
                }
            }
        }
    }
    reports.push(combined);

    // Range-respecting.
    let mut combined = AxiomReport::new(Axiom::RangeRespecting, mechanism, config.seed);
    for profile in profiles {
        let sub = check_range_respecting(mechanism, profile)?;
        combined.trials += sub.trials;
        if sub.violated() {
            combined.verdict = sub.verdict;
            break;
        }
    }
    reports.push(combined);

    // Anonymity and neutrality.
    let mut anon = AxiomReport::new(Axiom::Anonymity, mechanism, config.seed);
    let mut neut = AxiomReport::new(Axiom::Neutrality, mechanism, config.seed);
    for (idx, profile) in profiles.iter().enumerate() {
        let (a, n) = check_symmetries(
            mechanism,
            profile,
            6,
            config.seed.wrapping_add(idx as u64),
        )?;
        anon.trials += a.trials;
        neut.trials += n.trials;
        if a.violated() && !anon.violated() {
            anon.verdict = a.verdict;
        }
        if n.violated() && !neut.violated() {
            neut.verdict = n.verdict;
        }
        if anon.violated() && neut.violated() {
            break;
        }
    }
    reports.push(anon);
    reports.push(neut);

    Ok(SuiteReport {
        mechanism: mechanism.id().to_string(),
        seed: config.seed,
        reports,
        claimed: claimed_axioms(mechanism),
    })
}

use crate::generate::random_composition;
