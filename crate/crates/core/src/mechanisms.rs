//! The named budget aggregation mechanisms.
//!
//! * [`independent_markets`]: phantoms spread uniformly over `[0, t]`
//!   (`f_k(t) = t(n-k)/n`), equivalently clearing prices of per-alternative
//!   markets with a common supply. Proportional, not Pareto-optimal.
//! * [`utilitarian`]: the phantom system [`fstar_phantom_system`] whose
//!   phantoms travel to 1 one at a time; equals the social-welfare maximizer
//!   with maximum-entropy tie-breaking, computed here directly by water
//!   filling over the [`WelfareBand`]. Pareto-optimal, not proportional.
//! * [`uniform_phantom_m2`] and [`moulin_generalized_median`]: the
//!   two-alternative generalized median family with fixed phantoms.
//! * [`mean_mechanism`] and [`parimutuel_consensus`]: manipulable baselines.

use num_traits::{One, Zero};

use crate::division::{Division, Profile};
use crate::error::Error;
use crate::phantoms::{aggregate, solve_t_star, PhantomSystem, Trajectory};
use crate::rational::{clamp, from_f64_exact, median, rat, to_f64, Rational};
use crate::Result;

/// Default convergence tolerance for the parimutuel iteration.
pub const PARIMUTUEL_TOLERANCE: f64 = 1e-10;

/// Iteration cap for the parimutuel iteration.
pub const PARIMUTUEL_MAX_ITERATIONS: usize = 100_000;

/// The independent markets phantom system: `f_k(t) = t(n - k)/n`, so the
/// `n + 1` phantoms sit uniformly on `[0, t]` and the top phantom reaches 1
/// exactly at `t = 1`.
///
/// Only `f_0` ends at 1; normalization is nevertheless reached for every
/// profile, because at `t = 1` the phantoms are uniform on `[0, 1]` and the
/// generalized medians then sum to at least 1. Writing `x = n/t`, the
/// snapshot at `t` holds the market phantom values `0, 1/x, ..., n/x`.
pub fn im_phantom_system(n: usize) -> PhantomSystem {
    assert!(n >= 1, "need at least one voter");
    let trajectories = (0..=n)
        .map(|k| {
            Trajectory::linear(rat((n - k) as i64, n as i64)).expect("valid slope")
        })
        .collect();
    PhantomSystem::new_relaxed(trajectories).expect("independent markets system is ordered")
}

/// The welfare-maximizing phantom system: phantoms move from 0 to 1 one at a
/// time (`f_k(t) = t(n+1) - k` on `k/(n+1) < t < (k+1)/(n+1)`), so at every
/// `t` at most one phantom is strictly interior.
pub fn fstar_phantom_system(n: usize) -> PhantomSystem {
    assert!(n >= 1, "need at least one voter");
    let steps = (n + 1) as i64;
    let trajectories = (0..=n)
        .map(|k| {
            let k = k as i64;
            let mut points = vec![(Rational::zero(), Rational::zero())];
            if k > 0 {
                points.push((rat(k, steps), Rational::zero()));
            }
            points.push((rat(k + 1, steps), Rational::one()));
            if k + 1 < steps {
                points.push((Rational::one(), Rational::one()));
            }
            Trajectory::new(points).expect("valid staircase trajectory")
        })
        .collect();
    PhantomSystem::new(trajectories).expect("staircase system is ordered")
}

/// The independent markets mechanism: the moving phantom aggregate under
/// [`im_phantom_system`]. Exact rational output.
pub fn independent_markets(profile: &Profile) -> Division {
    aggregate(&im_phantom_system(profile.n()), profile)
        .expect("independent markets always normalizes")
}

/// Per-alternative interval `[lower_j, upper_j]` of adjacent order statistics
/// characterizing every social-welfare maximizer: `q` minimizes total l1
/// distance to the reports iff `lower_j <= q_j <= upper_j` for all `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WelfareBand {
    lower: Vec<Rational>,
    upper: Vec<Rational>,
    pivot: usize,
}

impl WelfareBand {
    /// Builds the band from the profile's order statistics. The pivotal rank
    /// `I` is the smallest index with `sum_j upper_j >= 1 >= sum_j lower_j`
    /// (ties resolved toward the smallest `I`; any valid choice produces the
    /// same intersection).
    pub fn from_profile(profile: &Profile) -> Self {
        let stats = profile.order_statistics();
        let n = profile.n();
        let one = Rational::one();
        let pivot = (0..=n)
            .find(|&i| stats.rank_sum(i + 1) <= one)
            .expect("rank n + 1 sums to 0");
        let lower: Vec<Rational> = (0..profile.m()).map(|j| stats.value(pivot + 1, j)).collect();
        let upper: Vec<Rational> = (0..profile.m()).map(|j| stats.value(pivot, j)).collect();
        debug_assert!(lower.iter().sum::<Rational>() <= one);
        debug_assert!(upper.iter().sum::<Rational>() >= one);
        WelfareBand { lower, upper, pivot }
    }

    /// The pivotal order-statistic rank `I`.
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    pub fn lower(&self) -> &[Rational] {
        &self.lower
    }

    pub fn upper(&self) -> &[Rational] {
        &self.upper
    }

    pub fn m(&self) -> usize {
        self.lower.len()
    }

    /// Whether `q` lies inside the band (and hence maximizes welfare).
    pub fn contains(&self, q: &Division) -> bool {
        q.m() == self.m()
            && (0..self.m())
                .all(|j| &self.lower[j] <= q.get(j) && q.get(j) <= &self.upper[j])
    }

    /// The unique water level `c` with `sum_j med(lower_j, upper_j, c) = 1`,
    /// together with the clamped division. When every band is saturated the
    /// output is forced and `c` is the corresponding boundary endpoint.
    pub fn water_level(&self) -> (Rational, Division) {
        let one = Rational::one();
        let fill = |c: &Rational| -> Rational {
            (0..self.m())
                .map(|j| clamp(c, &self.lower[j], &self.upper[j]))
                .sum()
        };
        let mut candidates: Vec<Rational> = Vec::with_capacity(2 * self.m() + 2);
        candidates.push(Rational::zero());
        candidates.push(Rational::one());
        candidates.extend(self.lower.iter().cloned());
        candidates.extend(self.upper.iter().cloned());
        candidates.sort();
        candidates.dedup();

        let mut level = None;
        let mut prev: Option<(Rational, Rational)> = None;
        for c in candidates {
            let total = fill(&c);
            if total >= one {
                level = Some(if total == one {
                    c
                } else {
                    match prev {
                        // Sum(lower) = 1 exactly: forced at the bottom.
                        None => c,
                        Some((pc, pt)) => &pc + (&c - &pc) * (&one - &pt) / (&total - &pt),
                    }
                });
                break;
            }
            prev = Some((c, total));
        }
        let level = level.expect("band sums straddle 1");
        let weights = (0..self.m())
            .map(|j| clamp(&level, &self.lower[j], &self.upper[j]))
            .collect();
        let division = Division::new(weights).expect("water filling sums to 1");
        (level, division)
    }
}

/// The welfare-maximizing mechanism, computed directly: build the welfare
/// band and raise a common water level until the clamped values sum to 1.
/// Equals the phantom aggregate of [`fstar_phantom_system`] exactly; the two
/// code paths are kept independent as a cross-check.
pub fn utilitarian(profile: &Profile) -> Division {
    WelfareBand::from_profile(profile).water_level().1
}

/// Two-alternative mechanism with phantoms uniformly at `1 - k/n`: the first
/// coordinate is `med(reports_1, 0, 1/n, ..., 1)`. Agrees with
/// [`independent_markets`] on every two-alternative profile.
pub fn uniform_phantom_m2(profile: &Profile) -> Result<Division> {
    moulin_generalized_median(profile, &MoulinPhantoms::uniform(profile.n()))
}

/// A fixed placement of `n + 1` phantoms for the two-alternative generalized
/// median, weakly decreasing in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoulinPhantoms {
    alphas: Vec<Rational>,
}

impl MoulinPhantoms {
    pub fn new(alphas: Vec<Rational>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidPhantomValues);
        }
        let in_range =
            |a: &Rational| a >= &Rational::zero() && a <= &Rational::one();
        if !alphas.iter().all(in_range) {
            return Err(Error::InvalidPhantomValues);
        }
        if alphas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPhantomValues);
        }
        Ok(MoulinPhantoms { alphas })
    }

    /// Uniform placement `alpha_k = 1 - k/n` for `n` voters.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1);
        let alphas = (0..=n).map(|k| rat((n - k) as i64, n as i64)).collect();
        MoulinPhantoms { alphas }
    }

    /// Phantom count (`n + 1` for an `n`-voter profile).
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alphas(&self) -> &[Rational] {
        &self.alphas
    }

    /// Neutral iff the placements are symmetric about 1/2 as a multiset.
    pub fn is_neutral(&self) -> bool {
        let mut mirrored: Vec<Rational> = self
            .alphas
            .iter()
            .map(|a| Rational::one() - a)
            .collect();
        mirrored.sort();
        let mut sorted = self.alphas.clone();
        sorted.sort();
        mirrored == sorted
    }
}

/// Generalized median for two alternatives: the first coordinate is the
/// median of the reports and the phantoms, the second of the complements.
/// With `2n + 1` entries per side the two medians always sum to exactly 1.
pub fn moulin_generalized_median(
    profile: &Profile,
    phantoms: &MoulinPhantoms,
) -> Result<Division> {
    if profile.m() != 2 {
        return Err(Error::NotTwoAlternatives { m: profile.m() });
    }
    if phantoms.len() != profile.n() + 1 {
        return Err(Error::WrongPhantomCount {
            expected: profile.n() + 1,
            got: phantoms.len(),
        });
    }
    let mut first = profile.column(0);
    first.extend(phantoms.alphas.iter().cloned());
    let mut second = profile.column(1);
    second.extend(phantoms.alphas.iter().map(|a| Rational::one() - a));
    Division::new(vec![median(&first), median(&second)])
}

/// Coordinate-wise arithmetic mean: the manipulable baseline.
pub fn mean_mechanism(profile: &Profile) -> Division {
    let n = Rational::from_integer((profile.n() as i64).into());
    let weights = (0..profile.m())
        .map(|j| profile.column(j).iter().sum::<Rational>() / &n)
        .collect();
    Division::new(weights).expect("mean of divisions is a division")
}

/// Result of the parimutuel fixed-point iteration.
#[derive(Debug, Clone)]
pub struct ParimutuelOutcome {
    /// Normalized prices, one per alternative (floating point).
    pub prices: Vec<f64>,
    /// Iterations until successive price vectors differed by less than the
    /// tolerance in l1.
    pub iterations: usize,
}

impl ParimutuelOutcome {
    /// Prices as an exact division: each float converted exactly, then the
    /// vector renormalized to sum to 1.
    pub fn to_division(&self) -> Division {
        let rationals: Vec<Rational> = self
            .prices
            .iter()
            .map(|&p| from_f64_exact(p.max(0.0)).expect("finite price"))
            .collect();
        let sum: Rational = rationals.iter().sum();
        assert!(!sum.is_zero(), "parimutuel prices sum to zero");
        Division::new(rationals.into_iter().map(|r| r / &sum).collect())
            .expect("renormalized prices form a division")
    }
}

/// The single-budget market baseline: every voter has one unit of budget to
/// spread over all alternatives, utilities are linear with coefficients
/// equal to the reports, and the supply of each good is fixed at `n` so
/// equilibrium prices sum to 1. Computed by proportional-response iteration
/// until successive price vectors differ by less than `tolerance` in l1.
///
/// `tolerance` bounds the step size, not the distance to the fixed point;
/// on slowly contracting instances the returned prices can sit several
/// orders of magnitude above it. Floating point throughout: this mechanism
/// is a comparison baseline, and it is manipulable for three or more
/// alternatives.
pub fn parimutuel_consensus(profile: &Profile, tolerance: f64) -> Result<ParimutuelOutcome> {
    let n = profile.n();
    let m = profile.m();
    let values: Vec<Vec<f64>> = profile
        .reports()
        .iter()
        .map(|r| r.weights().iter().map(to_f64).collect())
        .collect();
    // Spending proportional to one's values is the natural starting bid and
    // already satisfies the unit budgets.
    let mut bids = values.clone();
    let mut prices = vec![0.0f64; m];
    for j in 0..m {
        prices[j] = bids.iter().map(|b| b[j]).sum::<f64>() / n as f64;
    }
    for iteration in 0..PARIMUTUEL_MAX_ITERATIONS {
        let column: Vec<f64> = (0..m)
            .map(|j| bids.iter().map(|b| b[j]).sum::<f64>())
            .collect();
        let mut next = vec![vec![0.0f64; m]; n];
        for i in 0..n {
            let mut utility = 0.0;
            let mut gains = vec![0.0f64; m];
            for j in 0..m {
                if bids[i][j] > 0.0 && column[j] > 0.0 {
                    gains[j] = values[i][j] * bids[i][j] / column[j];
                    utility += gains[j];
                }
            }
            if utility > 0.0 {
                for j in 0..m {
                    next[i][j] = gains[j] / utility;
                }
            }
        }
        bids = next;
        let new_prices: Vec<f64> = (0..m)
            .map(|j| bids.iter().map(|b| b[j]).sum::<f64>() / n as f64)
            .collect();
        let shift: f64 = prices
            .iter()
            .zip(&new_prices)
            .map(|(a, b)| (a - b).abs())
            .sum();
        prices = new_prices;
        if shift < tolerance {
            return Ok(ParimutuelOutcome {
                prices,
                iterations: iteration + 1,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: PARIMUTUEL_MAX_ITERATIONS,
    })
}

/// A mechanism resolvable by string id, as used by the CLI and the axiom
/// suite.
#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    IndependentMarkets,
    Utilitarian,
    UniformPhantom,
    /// Two-alternative generalized median; `None` defaults to the uniform
    /// placement for the profile at hand.
    Moulin(Option<MoulinPhantoms>),
    Mean,
    Parimutuel {
        tolerance: f64,
    },
}

impl Mechanism {
    pub const IDS: [&'static str; 6] = [
        "independent-markets",
        "utilitarian",
        "uniform-phantom",
        "moulin",
        "mean",
        "parimutuel",
    ];

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "independent-markets" => Ok(Mechanism::IndependentMarkets),
            "utilitarian" => Ok(Mechanism::Utilitarian),
            "uniform-phantom" => Ok(Mechanism::UniformPhantom),
            "moulin" => Ok(Mechanism::Moulin(None)),
            "mean" => Ok(Mechanism::Mean),
            "parimutuel" => Ok(Mechanism::Parimutuel {
                tolerance: PARIMUTUEL_TOLERANCE,
            }),
            _ => Err(Error::UnknownMechanism { id: id.to_string() }),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Mechanism::IndependentMarkets => "independent-markets",
            Mechanism::Utilitarian => "utilitarian",
            Mechanism::UniformPhantom => "uniform-phantom",
            Mechanism::Moulin(_) => "moulin",
            Mechanism::Mean => "mean",
            Mechanism::Parimutuel { .. } => "parimutuel",
        }
    }

    /// Runs the mechanism on a profile.
    pub fn apply(&self, profile: &Profile) -> Result<Division> {
        match self {
            Mechanism::IndependentMarkets => Ok(independent_markets(profile)),
            Mechanism::Utilitarian => Ok(utilitarian(profile)),
            Mechanism::UniformPhantom => uniform_phantom_m2(profile),
            Mechanism::Moulin(Some(phantoms)) => {
                moulin_generalized_median(profile, phantoms)
            }
            Mechanism::Moulin(None) => {
                moulin_generalized_median(profile, &MoulinPhantoms::uniform(profile.n()))
            }
            Mechanism::Mean => Ok(mean_mechanism(profile)),
            Mechanism::Parimutuel { tolerance } => {
                Ok(parimutuel_consensus(profile, *tolerance)?.to_division())
            }
        }
    }

    /// Slack allowed when comparing this mechanism's outputs. Exact-rational
    /// mechanisms compare exactly. The parimutuel iteration stops on the
    /// step size, which on slowly contracting instances can leave the
    /// prices ~1e-5 from the fixed point, so its comparisons carry a 1e-4
    /// margin -- still orders of magnitude below the manipulation gaps the
    /// tests rely on.
    pub fn comparison_margin(&self) -> Rational {
        match self {
            Mechanism::Parimutuel { .. } => {
                from_f64_exact(1e-4).expect("finite margin")
            }
            _ => Rational::zero(),
        }
    }

    /// The normalization time `t*` under this mechanism's phantom system,
    /// when it has one.
    pub fn t_star(&self, profile: &Profile) -> Option<Rational> {
        let system = match self {
            Mechanism::IndependentMarkets => im_phantom_system(profile.n()),
            Mechanism::Utilitarian => fstar_phantom_system(profile.n()),
            _ => return None,
        };
        solve_t_star(&system, profile).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantoms::aggregate;

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

    #[test]
    fn im_reproduces_worked_example() {
        assert_eq!(
            independent_markets(&worked_profile()),
            div(&["0.4", "0.4", "0.2"])
        );
    }

    #[test]
    fn im_is_proportional_on_single_minded_profiles() {
        let profile = Profile::single_minded(&[6, 3, 1]).unwrap();
        assert_eq!(
            independent_markets(&profile),
            div(&["0.6", "0.3", "0.1"])
        );
    }

    #[test]
    fn im_overlapping_two_voter_profile() {
        let profile = Profile::parse(&[
            &["0.8", "0.2", "0"] as &[&str],
            &["0.8", "0", "0.2"],
        ])
        .unwrap();
        assert_eq!(
            independent_markets(&profile),
            div(&["0.6", "0.2", "0.2"])
        );
    }

    #[test]
    fn fstar_moves_one_phantom_at_a_time() {
        let system = fstar_phantom_system(5);
        // At t = 1/2 phantom 2 has just arrived at 1 and phantom 3 has not
        // yet left 0.
        let snap = system.snapshot(&rat(1, 2)).unwrap();
        assert_eq!(
            snap.positions(),
            &[
                Rational::one(),
                Rational::one(),
                Rational::one(),
                Rational::zero(),
                Rational::zero(),
                Rational::zero()
            ]
        );
        for i in 0..=20 {
            let snap = system.snapshot(&rat(i, 20)).unwrap();
            let interior = snap
                .positions()
                .iter()
                .filter(|p| !p.is_zero() && !p.is_one())
                .count();
            assert!(interior <= 1, "two interior phantoms at t = {}/20", i);
        }
        let end = system.snapshot(&Rational::one()).unwrap();
        assert!(end.positions().iter().all(|p| p.is_one()));
    }

    #[test]
    fn welfare_band_worked_example() {
        let band = WelfareBand::from_profile(&worked_profile());
        assert_eq!(band.pivot(), 2);
        assert_eq!(band.lower(), &[rat(0, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(band.upper(), &[rat(1, 2), rat(1, 2), rat(1, 10)]);
        let (level, outcome) = band.water_level();
        assert_eq!(level, rat(9, 20));
        assert_eq!(outcome, div(&["0.45", "0.45", "0.1"]));
    }

    #[test]
    fn utilitarian_matches_phantom_route() {
        let profiles = [
            worked_profile(),
            Profile::single_minded(&[6, 3, 1]).unwrap(),
            Profile::parse(&[
                &["0.8", "0.2", "0"] as &[&str],
                &["0.8", "0", "0.2"],
            ])
            .unwrap(),
        ];
        for profile in profiles {
            let direct = utilitarian(&profile);
            let via_phantoms =
                aggregate(&fstar_phantom_system(profile.n()), &profile).unwrap();
            assert_eq!(direct, via_phantoms);
        }
    }

    #[test]
    fn utilitarian_worked_example() {
        assert_eq!(
            utilitarian(&worked_profile()),
            div(&["0.45", "0.45", "0.1"])
        );
    }

    #[test]
    fn utilitarian_unanimous_profile() {
        let x = div(&["0.3", "0.45", "0.25"]);
        let profile = Profile::new(vec![x.clone(); 4]).unwrap();
        assert_eq!(utilitarian(&profile), x);
    }

    #[test]
    fn utilitarian_breaks_ties_toward_uniform() {
        let profile =
            Profile::new(vec![Division::unit(2, 0), Division::unit(2, 1)]).unwrap();
        assert_eq!(utilitarian(&profile), div(&["0.5", "0.5"]));
    }

    #[test]
    fn utilitarian_follows_the_majority() {
        let profile = Profile::single_minded(&[100, 99]).unwrap();
        assert_eq!(utilitarian(&profile), Division::unit(2, 0));
    }

    #[test]
    fn uniform_phantom_is_proportional() {
        for (n, k) in [(4usize, 1usize), (5, 2), (7, 0), (3, 3)] {
            let profile = Profile::single_minded(&[n - k, k]).unwrap();
            let outcome = uniform_phantom_m2(&profile).unwrap();
            assert_eq!(
                outcome.weights(),
                &[rat((n - k) as i64, n as i64), rat(k as i64, n as i64)]
            );
        }
    }

    #[test]
    fn uniform_phantom_worked_case() {
        let profile = Profile::parse(&[
            &["0.6", "0.4"] as &[&str],
            &["0.2", "0.8"],
        ])
        .unwrap();
        assert_eq!(
            uniform_phantom_m2(&profile).unwrap(),
            div(&["0.5", "0.5"])
        );
        let unanimous =
            Profile::new(vec![div(&["0.3", "0.7"]); 3]).unwrap();
        assert_eq!(
            uniform_phantom_m2(&unanimous).unwrap(),
            div(&["0.3", "0.7"])
        );
    }

    #[test]
    fn uniform_phantom_requires_two_alternatives() {
        assert!(matches!(
            uniform_phantom_m2(&worked_profile()),
            Err(Error::NotTwoAlternatives { m: 3 })
        ));
    }

    #[test]
    fn im_equals_uniform_phantom_for_two_alternatives() {
        let profiles = [
            Profile::parse(&[
                &["0.6", "0.4"] as &[&str],
                &["0.2", "0.8"],
                &["0.35", "0.65"],
            ])
            .unwrap(),
            Profile::single_minded(&[2, 3]).unwrap(),
        ];
        for profile in profiles {
            assert_eq!(
                independent_markets(&profile),
                uniform_phantom_m2(&profile).unwrap()
            );
        }
    }

    #[test]
    fn moulin_constant_phantoms_pin_the_outcome() {
        let phantoms =
            MoulinPhantoms::new(vec![rat(1, 2); 4]).unwrap();
        let profile = Profile::parse(&[
            &["0.9", "0.1"] as &[&str],
            &["0.8", "0.2"],
            &["0.7", "0.3"],
        ])
        .unwrap();
        let outcome = moulin_generalized_median(&profile, &phantoms).unwrap();
        assert_eq!(outcome, div(&["0.5", "0.5"]));
    }

    #[test]
    fn moulin_outer_phantoms_give_the_plain_median() {
        let phantoms = MoulinPhantoms::new(vec![
            Rational::one(),
            Rational::one(),
            Rational::zero(),
            Rational::zero(),
        ])
        .unwrap();
        let profile = Profile::parse(&[
            &["0.9", "0.1"] as &[&str],
            &["0.3", "0.7"],
            &["0.6", "0.4"],
        ])
        .unwrap();
        let outcome = moulin_generalized_median(&profile, &phantoms).unwrap();
        assert_eq!(outcome, div(&["0.6", "0.4"]));
    }

    #[test]
    fn moulin_uniform_matches_uniform_phantom() {
        let profile = Profile::parse(&[
            &["0.6", "0.4"] as &[&str],
            &["0.2", "0.8"],
        ])
        .unwrap();
        assert_eq!(
            moulin_generalized_median(&profile, &MoulinPhantoms::uniform(2)).unwrap(),
            uniform_phantom_m2(&profile).unwrap()
        );
    }

    #[test]
    fn moulin_neutrality_detection() {
        assert!(MoulinPhantoms::uniform(4).is_neutral());
        assert!(MoulinPhantoms::new(vec![rat(1, 2); 3]).unwrap().is_neutral());
        assert!(!MoulinPhantoms::new(vec![rat(3, 4), rat(3, 4), rat(3, 4)])
            .unwrap()
            .is_neutral());
    }

    #[test]
    fn moulin_rejects_bad_phantoms() {
        assert!(MoulinPhantoms::new(vec![rat(1, 4), rat(1, 2)]).is_err());
        assert!(MoulinPhantoms::new(vec![rat(3, 2), rat(1, 2)]).is_err());
        let profile = Profile::single_minded(&[1, 1]).unwrap();
        let wrong_count = MoulinPhantoms::new(vec![rat(1, 2); 2]).unwrap();
        assert!(matches!(
            moulin_generalized_median(&profile, &wrong_count),
            Err(Error::WrongPhantomCount { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn mean_fixtures() {
        let polarized =
            Profile::new(vec![Division::unit(2, 0), Division::unit(2, 1)]).unwrap();
        assert_eq!(mean_mechanism(&polarized), div(&["0.5", "0.5"]));
        let big = Profile::single_minded(&[100, 99]).unwrap();
        assert_eq!(
            mean_mechanism(&big),
            Division::new(vec![rat(100, 199), rat(99, 199)]).unwrap()
        );
        let x = div(&["0.3", "0.7"]);
        let unanimous = Profile::new(vec![x.clone(); 5]).unwrap();
        assert_eq!(mean_mechanism(&unanimous), x);
    }

    #[test]
    fn parimutuel_truthful_footnote_prices() {
        let profile = Profile::parse(&[
            &["0", "0.5", "0.5"] as &[&str],
            &["0.5", "0.5", "0"],
        ])
        .unwrap();
        let outcome = parimutuel_consensus(&profile, 1e-12).unwrap();
        for price in &outcome.prices {
            assert!((price - 1.0 / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn parimutuel_misreport_footnote_prices() {
        let profile = Profile::parse(&[
            &["0", "0", "1"] as &[&str],
            &["0.5", "0.5", "0"],
        ])
        .unwrap();
        let outcome = parimutuel_consensus(&profile, 1e-12).unwrap();
        let expected = [0.25, 0.25, 0.5];
        for (price, want) in outcome.prices.iter().zip(expected) {
            assert!((price - want).abs() < 1e-8);
        }
    }

    #[test]
    fn parimutuel_matches_im_for_two_alternatives() {
        let profile = Profile::parse(&[
            &["0.6", "0.4"] as &[&str],
            &["0.2", "0.8"],
            &["0.5", "0.5"],
        ])
        .unwrap();
        let outcome = parimutuel_consensus(&profile, 1e-12).unwrap();
        let im = independent_markets(&profile);
        for j in 0..2 {
            let gap = (outcome.prices[j] - to_f64(im.get(j))).abs();
            assert!(gap < 1e-7, "price {j} off by {gap}");
        }
    }

    #[test]
    fn registry_round_trips_ids() {
        for id in Mechanism::IDS {
            assert_eq!(Mechanism::from_id(id).unwrap().id(), id);
        }
        assert!(matches!(
            Mechanism::from_id("approval"),
            Err(Error::UnknownMechanism { .. })
        ));
    }

    #[test]
    fn registry_applies_mechanisms() {
        let profile = Profile::parse(&[
            &["0.6", "0.4"] as &[&str],
            &["0.2", "0.8"],
        ])
        .unwrap();
        let im = Mechanism::IndependentMarkets.apply(&profile).unwrap();
        let uniform = Mechanism::UniformPhantom.apply(&profile).unwrap();
        let moulin = Mechanism::Moulin(None).apply(&profile).unwrap();
        assert_eq!(im, uniform);
        assert_eq!(im, moulin);
        assert_eq!(
            Mechanism::IndependentMarkets.t_star(&worked_profile()),
            Some(rat(3, 5))
        );
    }
}
