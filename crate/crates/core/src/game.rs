//! The credit-spending voting game.
//!
//! Every voter holds one credit per alternative and chooses how much of each
//! credit to spend; the outcome is the normalized vector of column sums.
//! Voters want the outcome close to their report in l1 distance. The unique
//! outcome obtainable in Nash equilibrium is the independent markets
//! division; this module constructs an equilibrium from the market view,
//! searches for improving deviations, and runs best-response dynamics as a
//! verification oracle.

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::division::{Division, Profile};
use crate::error::Error;
use crate::market::im_via_markets;
use crate::mechanisms::independent_markets;
use crate::rational::{rat, Rational};
use crate::Result;

/// Best-response rounds before a dynamics run is reported as non-convergent.
pub const DYNAMICS_ROUND_CAP: usize = 10_000;

/// Bit-size bound on spending denominators; a run whose exact state grows
/// past this is reported as non-convergent rather than ground on.
const DENOMINATOR_BIT_LIMIT: u64 = 4096;

/// Per-voter, per-alternative credit expenditure in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpendingProfile {
    spends: Vec<Vec<Rational>>,
}

impl SpendingProfile {
    pub fn new(spends: Vec<Vec<Rational>>) -> Result<Self> {
        if spends.is_empty() || spends[0].is_empty() {
            return Err(Error::EmptyProfile);
        }
        let m = spends[0].len();
        for row in &spends {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: row.len(),
                });
            }
            for s in row {
                if s < &Rational::zero() || s > &Rational::one() {
                    return Err(Error::SpendOutOfRange { value: s.clone() });
                }
            }
        }
        Ok(SpendingProfile { spends })
    }

    pub fn n(&self) -> usize {
        self.spends.len()
    }

    pub fn m(&self) -> usize {
        self.spends[0].len()
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.spends[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.spends[i][j]
    }

    /// Credits spent on each alternative.
    pub fn column_sums(&self) -> Vec<Rational> {
        (0..self.m())
            .map(|j| self.spends.iter().map(|row| &row[j]).sum())
            .collect()
    }

    /// Total credits spent.
    pub fn total(&self) -> Rational {
        self.spends.iter().flatten().sum()
    }

    /// Copy with voter `i`'s row replaced.
    pub fn with_row(&self, i: usize, row: Vec<Rational>) -> Result<Self> {
        if i >= self.n() {
            return Err(Error::VoterOutOfRange {
                voter: i,
                n: self.n(),
            });
        }
        let mut spends = self.spends.clone();
        spends[i] = row;
        SpendingProfile::new(spends)
    }

    fn max_denominator_bits(&self) -> u64 {
        self.spends
            .iter()
            .flatten()
            .map(|s| s.denom().bits())
            .max()
            .unwrap_or(0)
    }
}

/// The game outcome: column sums normalized to a division. All-zero
/// spending leaves the outcome undefined and is rejected.
pub fn game_outcome(spending: &SpendingProfile) -> Result<Division> {
    let total = spending.total();
    if total.is_zero() {
        return Err(Error::ZeroSpending);
    }
    Division::new(
        spending
            .column_sums()
            .into_iter()
            .map(|c| c / &total)
            .collect(),
    )
}

/// An equilibrium spending profile derived from the market view at supply
/// `x*`: full spend where the report exceeds the price, nothing where it
/// falls short, and boundary voters (report equal to the price) splitting
/// the residual column spend equally so each column sums to
/// `x* * price_j` exactly. The game outcome of the result is the
/// independent markets division.
pub fn equilibrium_spending(profile: &Profile) -> Result<SpendingProfile> {
    let (x_star, prices) = im_via_markets(profile)?;
    let n = profile.n();
    let m = profile.m();
    let mut spends = vec![vec![Rational::zero(); m]; n];
    for j in 0..m {
        let price = prices.get(j);
        let mut boundary = Vec::new();
        let mut strict = 0usize;
        for i in 0..n {
            let report = profile.report(i).get(j);
            if report > price {
                spends[i][j] = Rational::one();
                strict += 1;
            } else if report == price {
                boundary.push(i);
            }
        }
        let residual = &x_star * price - Rational::from_integer((strict as i64).into());
        debug_assert!(residual >= Rational::zero());
        if !residual.is_zero() {
            debug_assert!(!boundary.is_empty(), "residual spend with no boundary voter");
            let share =
                residual / Rational::from_integer((boundary.len() as i64).into());
            for i in boundary {
                spends[i][j] = share.clone();
            }
        }
    }
    SpendingProfile::new(spends)
}

/// A strictly improving unilateral deviation for one voter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpendingDeviation {
    pub voter: usize,
    pub spending: Vec<Rational>,
    pub old_distance: Rational,
    pub new_distance: Rational,
}

/// Distance of the outcome from the voter's report after replacing their
/// row, or `None` if the replacement zeroes all spending.
fn deviation_distance(
    spending: &SpendingProfile,
    profile: &Profile,
    voter: usize,
    row: &[Rational],
) -> Option<Rational> {
    let mut column_sums = spending.column_sums();
    let mut total = Rational::zero();
    for ((sum, new), old) in column_sums
        .iter_mut()
        .zip(row)
        .zip(spending.row(voter))
    {
        *sum += new - old;
        total += &*sum;
    }
    if total.is_zero() {
        return None;
    }
    let report = profile.report(voter);
    let mut distance = Rational::zero();
    for (sum, weight) in column_sums.iter().zip(report.weights()) {
        let diff = sum / &total - weight;
        distance += if diff < Rational::zero() { -diff } else { diff };
    }
    Some(distance)
}

/// Searches for a deviation that strictly reduces voter `i`'s distance.
///
/// First the equilibrium conditions are checked: an undervalued alternative
/// (`q_j < p_hat[i][j]`) must carry full spend, an overvalued one none. A
/// violated condition yields a constructive single-coordinate move (spend up
/// to saturation or until the coordinate meets the report, halved until the
/// exact recomputation confirms strict improvement). If the conditions all
/// hold, a finite probe set is tried: corner rows, the report itself as a
/// row, and single-coordinate perturbations of 1/8, 1/4, 1/2, and 1. Returns
/// the first verified strict improvement, or `None`.
pub fn find_improving_deviation(
    spending: &SpendingProfile,
    profile: &Profile,
    voter: usize,
) -> Result<Option<SpendingDeviation>> {
    if spending.n() != profile.n() || spending.m() != profile.m() {
        return Err(Error::DimensionMismatch {
            left: spending.n(),
            right: profile.n(),
        });
    }
    if voter >= profile.n() {
        return Err(Error::VoterOutOfRange {
            voter,
            n: profile.n(),
        });
    }
    let outcome = game_outcome(spending)?;
    let report = profile.report(voter);
    let old_distance = outcome.l1_distance(report)?;
    let column_sums = spending.column_sums();
    let total = spending.total();
    let one = Rational::one();

    let accept = |row: Vec<Rational>| -> Option<SpendingDeviation> {
        let new_distance = deviation_distance(spending, profile, voter, &row)?;
        (new_distance < old_distance).then(|| SpendingDeviation {
            voter,
            spending: row,
            old_distance: old_distance.clone(),
            new_distance,
        })
    };
    // Halve the step until the exact recomputation confirms improvement;
    // the existence argument guarantees success for small enough steps.
    let try_step = |j: usize, mut delta: Rational| -> Option<SpendingDeviation> {
        for _ in 0..64 {
            if delta.is_zero() {
                return None;
            }
            let mut row = spending.row(voter).to_vec();
            row[j] += &delta;
            if row[j] >= Rational::zero() && row[j] <= one {
                if let Some(dev) = accept(row) {
                    return Some(dev);
                }
            }
            delta /= rat(2, 1);
        }
        None
    };

    // Undervalued alternatives must be at full spend.
    for j in 0..profile.m() {
        let (q, p, s) = (outcome.get(j), report.get(j), spending.get(voter, j));
        if q < p && s < &one {
            let headroom = &one - s;
            let delta = if p < &one {
                // Step that lands the coordinate exactly on the report.
                let hit = (p * &total - &column_sums[j]) / (&one - p);
                headroom.min(hit)
            } else {
                headroom
            };
            if let Some(dev) = try_step(j, delta) {
                return Ok(Some(dev));
            }
        }
    }
    // Overvalued alternatives must be at zero spend.
    for j in 0..profile.m() {
        let (q, p, s) = (outcome.get(j), report.get(j), spending.get(voter, j));
        if q > p && s > &Rational::zero() {
            let hit = (&column_sums[j] - p * &total) / (&one - p);
            let delta = s.clone().min(hit);
            if delta < total {
                if let Some(dev) = try_step(j, -delta) {
                    return Ok(Some(dev));
                }
            }
        }
    }

    // Probing: corners, the report as a spending row, and lattice nudges.
    let mut candidates: Vec<Vec<Rational>> = Vec::new();
    candidates.push(vec![one.clone(); profile.m()]);
    for j in 0..profile.m() {
        let mut corner = vec![Rational::zero(); profile.m()];
        corner[j] = one.clone();
        candidates.push(corner);
    }
    candidates.push(report.weights().to_vec());
    for j in 0..profile.m() {
        for denom in [8i64, 4, 2, 1] {
            for sign in [1i64, -1] {
                let mut row = spending.row(voter).to_vec();
                row[j] += rat(sign, denom);
                if row[j] >= Rational::zero() && row[j] <= one {
                    candidates.push(row);
                }
            }
        }
    }
    for row in candidates {
        if let Some(dev) = accept(row) {
            return Ok(Some(dev));
        }
    }
    Ok(None)
}

/// Outcome of one best-response run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DynamicsRun {
    Converged { outcome: Division, rounds: usize },
    RoundCapReached,
    StateBlowup,
}

/// Round-robin best-response dynamics from a given start: every voter in
/// turn applies an improving deviation until a full pass finds none.
pub fn best_response_dynamics(
    profile: &Profile,
    start: SpendingProfile,
    round_cap: usize,
) -> Result<DynamicsRun> {
    let mut spending = start;
    for round in 0..round_cap {
        let mut changed = false;
        for voter in 0..profile.n() {
            if let Some(dev) = find_improving_deviation(&spending, profile, voter)? {
                spending = spending.with_row(voter, dev.spending)?;
                changed = true;
            }
        }
        if !changed {
            return Ok(DynamicsRun::Converged {
                outcome: game_outcome(&spending)?,
                rounds: round + 1,
            });
        }
        if spending.max_denominator_bits() > DENOMINATOR_BIT_LIMIT {
            return Ok(DynamicsRun::StateBlowup);
        }
    }
    Ok(DynamicsRun::RoundCapReached)
}

/// Report of the equilibrium-uniqueness check: how many runs converged, and
/// any converged outcome that differs from the independent markets division.
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub expected: Division,
    pub trials: usize,
    pub converged: usize,
    pub non_converged: usize,
    pub mismatched: Vec<Division>,
    pub seed: u64,
}

impl EquilibriumReport {
    /// True when every converged run reached the expected outcome.
    pub fn unique(&self) -> bool {
        self.mismatched.is_empty()
    }
}

/// Samples random spending profiles, runs best-response dynamics on each,
/// and compares every converged outcome against the independent markets
/// division. A converged state has no improving deviation for any voter, so
/// it is an exact Nash equilibrium; non-convergent runs are counted, not
/// dropped.
pub fn verify_unique_equilibrium_outcome(
    profile: &Profile,
    trials: usize,
    seed: u64,
    round_cap: usize,
) -> Result<EquilibriumReport> {
    let expected = independent_markets(profile);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut converged = 0;
    let mut non_converged = 0;
    let mut mismatched = Vec::new();
    for _ in 0..trials {
        let start = random_spending(profile.n(), profile.m(), &mut rng);
        match best_response_dynamics(profile, start, round_cap)? {
            DynamicsRun::Converged { outcome, .. } => {
                converged += 1;
                if outcome != expected {
                    mismatched.push(outcome);
                }
            }
            DynamicsRun::RoundCapReached | DynamicsRun::StateBlowup => {
                non_converged += 1;
            }
        }
    }
    Ok(EquilibriumReport {
        expected,
        trials,
        converged,
        non_converged,
        mismatched,
        seed,
    })
}

/// Random spending on the 1/8 lattice with at least one positive entry.
pub fn random_spending<R: Rng>(n: usize, m: usize, rng: &mut R) -> SpendingProfile {
    loop {
        let spends: Vec<Vec<Rational>> = (0..n)
            .map(|_| (0..m).map(|_| rat(rng.gen_range(0..=8), 8)).collect())
            .collect();
        let profile = SpendingProfile::new(spends).expect("lattice spends are in range");
        if !profile.total().is_zero() {
            return profile;
        }
    }
}
