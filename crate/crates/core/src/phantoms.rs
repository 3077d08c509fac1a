//! The moving phantom engine.
//!
//! A phantom system is a family of `n + 1` weakly increasing trajectories
//! `f_0 >= f_1 >= ... >= f_n` on `[0, 1]`, all starting at 0. At time `t` the
//! mechanism takes, per alternative, the median of the `n` reports and the
//! `n + 1` phantom positions; `t*` is the time at which these generalized
//! medians sum to exactly 1, and the medians at `t*` are the outcome.
//!
//! Trajectories are piecewise linear with rational breakpoints, which makes
//! `t*` exactly computable: the sum of medians is itself piecewise linear in
//! `t`, with kinks only where a phantom crosses a report value or one of its
//! own breakpoints, so a breakpoint sweep plus one linear interpolation finds
//! the root with no approximation. A bisection fallback is provided for
//! phantom systems given only as evaluation callbacks.

use std::collections::BTreeSet;

use num_traits::{One, ToPrimitive, Zero};

use crate::division::{Division, Profile};
use crate::error::Error;
use crate::rational::{median, Rational};
use crate::Result;

/// One phantom trajectory: sorted `(t, value)` breakpoints with linear
/// interpolation between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    breakpoints: Vec<(Rational, Rational)>,
}

impl Trajectory {
    /// Validates breakpoints: `t` strictly increasing from 0 to 1, values
    /// weakly increasing within `[0, 1]`, starting at 0.
    pub fn new(breakpoints: Vec<(Rational, Rational)>) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidTrajectory {
            k: usize::MAX,
            reason: reason.to_string(),
        };
        if breakpoints.len() < 2 {
            return Err(invalid("needs at least two breakpoints"));
        }
        if !breakpoints[0].0.is_zero() {
            return Err(invalid("first breakpoint must be at t = 0"));
        }
        if !breakpoints.last().expect("nonempty").0.is_one() {
            return Err(invalid("last breakpoint must be at t = 1"));
        }
        if !breakpoints[0].1.is_zero() {
            return Err(invalid("trajectory must start at value 0"));
        }
        for window in breakpoints.windows(2) {
            if window[1].0 <= window[0].0 {
                return Err(invalid("breakpoint times must strictly increase"));
            }
            if window[1].1 < window[0].1 {
                return Err(invalid("values must be weakly increasing"));
            }
        }
        for (_, v) in &breakpoints {
            if v < &Rational::zero() || v > &Rational::one() {
                return Err(invalid("values must lie in [0, 1]"));
            }
        }
        Ok(Trajectory { breakpoints })
    }

    /// A trajectory holding `value` over all of `[0, 1]` scaled linearly from
    /// 0: convenience for straight lines `f(t) = slope * t`.
    pub fn linear(slope: Rational) -> Result<Self> {
        Trajectory::new(vec![
            (Rational::zero(), Rational::zero()),
            (Rational::one(), slope),
        ])
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.breakpoints
    }

    /// Exact value at `t` by linear interpolation.
    pub fn eval(&self, t: &Rational) -> Rational {
        debug_assert!(t >= &Rational::zero() && t <= &Rational::one());
        let pos = self.breakpoints.partition_point(|(bt, _)| bt <= t);
        if pos == 0 {
            return self.breakpoints[0].1.clone();
        }
        if pos == self.breakpoints.len() {
            return self.breakpoints[pos - 1].1.clone();
        }
        let (t0, v0) = &self.breakpoints[pos - 1];
        if t0 == t {
            return v0.clone();
        }
        let (t1, v1) = &self.breakpoints[pos];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Final value `f(1)`.
    fn final_value(&self) -> &Rational {
        &self.breakpoints.last().expect("nonempty").1
    }

    /// All `t` where the trajectory passes through `value` on a rising piece.
    /// Flat pieces are skipped: on those the median identity can only change
    /// at the piece's own breakpoints, which are already sweep candidates.
    fn crossing_times(&self, value: &Rational, out: &mut BTreeSet<Rational>) {
        for window in self.breakpoints.windows(2) {
            let (t0, v0) = &window[0];
            let (t1, v1) = &window[1];
            if v0 == v1 {
                continue;
            }
            if value >= v0 && value <= v1 {
                let t = t0 + (t1 - t0) * (value - v0) / (v1 - v0);
                out.insert(t);
            }
        }
    }
}

/// A family of `n + 1` ordered phantom trajectories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhantomSystem {
    trajectories: Vec<Trajectory>,
}

impl PhantomSystem {
    /// Builds a phantom system and checks the full defining conditions:
    /// every trajectory runs from 0 to 1 and `f_0(t) >= ... >= f_n(t)` at
    /// all times.
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        for (k, traj) in trajectories.iter().enumerate() {
            if !traj.final_value().is_one() {
                return Err(Error::InvalidTrajectory {
                    k,
                    reason: "trajectory must end at value 1".to_string(),
                });
            }
        }
        Self::new_relaxed(trajectories)
    }

    /// Like [`PhantomSystem::new`] but without requiring `f_k(1) = 1`.
    ///
    /// The independent markets system keeps its lower phantoms short of 1;
    /// normalization is still reached because the medians at `t = 1` sum to
    /// at least 1 for every profile. [`solve_t_star`] reports an error for
    /// relaxed systems that never normalize.
    pub fn new_relaxed(trajectories: Vec<Trajectory>) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::InvalidTrajectory {
                k: 0,
                reason: "a system needs at least one trajectory".to_string(),
            });
        }
        let system = PhantomSystem { trajectories };
        // Pairwise ordering holds everywhere iff it holds at the union of
        // breakpoint times: both sides are linear in between.
        let times = system.breakpoint_times();
        for t in &times {
            let snapshot = system.positions(t);
            for k in 0..snapshot.len() - 1 {
                if snapshot[k] < snapshot[k + 1] {
                    return Err(Error::PhantomOrdering {
                        t: t.clone(),
                        upper: k,
                        lower: k + 1,
                    });
                }
            }
        }
        Ok(system)
    }

    /// Number of voters the system is built for (`trajectories - 1`).
    pub fn n(&self) -> usize {
        self.trajectories.len() - 1
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    /// Union of all trajectory breakpoint times.
    pub fn breakpoint_times(&self) -> BTreeSet<Rational> {
        let mut times = BTreeSet::new();
        for traj in &self.trajectories {
            for (t, _) in &traj.breakpoints {
                times.insert(t.clone());
            }
        }
        times
    }

    fn positions(&self, t: &Rational) -> Vec<Rational> {
        self.trajectories.iter().map(|f| f.eval(t)).collect()
    }

    /// Exact phantom positions at time `t`.
    pub fn snapshot(&self, t: &Rational) -> Result<PhantomSnapshot> {
        if t < &Rational::zero() || t > &Rational::one() {
            return Err(Error::TimeOutOfRange { t: t.clone() });
        }
        Ok(PhantomSnapshot {
            t: t.clone(),
            positions: self.positions(t),
        })
    }
}

/// Instantaneous phantom positions `f_0(t), ..., f_n(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhantomSnapshot {
    t: Rational,
    positions: Vec<Rational>,
}

impl PhantomSnapshot {
    pub fn new(t: Rational, positions: Vec<Rational>) -> Result<Self> {
        for pair in positions.windows(2) {
            if pair[0] < pair[1] {
                return Err(Error::PhantomOrdering {
                    t: t.clone(),
                    upper: 0,
                    lower: 1,
                });
            }
        }
        Ok(PhantomSnapshot { t, positions })
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    /// Positions in phantom order `f_0(t) >= ... >= f_n(t)`.
    pub fn positions(&self) -> &[Rational] {
        &self.positions
    }

    pub fn n(&self) -> usize {
        self.positions.len() - 1
    }
}

/// Median of the `n + 1` phantom positions and the `n` reports on one
/// alternative: `2n + 1` values, so the median is always a unique element.
pub fn generalized_median(snapshot: &PhantomSnapshot, column: &[Rational]) -> Result<Rational> {
    if column.len() != snapshot.n() {
        return Err(Error::DimensionMismatch {
            left: snapshot.n(),
            right: column.len(),
        });
    }
    let mut values = Vec::with_capacity(2 * column.len() + 1);
    values.extend_from_slice(&snapshot.positions);
    values.extend_from_slice(column);
    Ok(median(&values))
}

/// Sum over alternatives of the generalized medians at time `t`.
pub fn median_sum(system: &PhantomSystem, profile: &Profile, t: &Rational) -> Result<Rational> {
    check_sizes(system, profile)?;
    let snapshot = system.snapshot(t)?;
    let mut total = Rational::zero();
    for j in 0..profile.m() {
        total += generalized_median(&snapshot, &profile.column(j))?;
    }
    Ok(total)
}

fn check_sizes(system: &PhantomSystem, profile: &Profile) -> Result<()> {
    if system.n() != profile.n() {
        return Err(Error::DimensionMismatch {
            left: system.n(),
            right: profile.n(),
        });
    }
    Ok(())
}

/// Sweep candidates: every trajectory breakpoint plus every time a phantom
/// crosses a report value. Between consecutive candidates the sorted order
/// of phantoms and reports is constant, so the median sum is linear there.
fn sweep_times(system: &PhantomSystem, profile: &Profile) -> Vec<Rational> {
    let mut times = system.breakpoint_times();
    times.insert(Rational::zero());
    times.insert(Rational::one());
    let mut values = BTreeSet::new();
    for report in profile.reports() {
        for w in report.weights() {
            values.insert(w.clone());
        }
    }
    for traj in &system.trajectories {
        for value in &values {
            traj.crossing_times(value, &mut times);
        }
    }
    times
        .into_iter()
        .filter(|t| t >= &Rational::zero() && t <= &Rational::one())
        .collect()
}

/// The left endpoint of `{ t : median_sum(t) = 1 }`, computed exactly.
///
/// The sum of medians is continuous and weakly increasing in `t`, 0 at
/// `t = 0`; any `t` in the solution set yields the same aggregate, and the
/// left endpoint makes the choice deterministic.
pub fn solve_t_star(system: &PhantomSystem, profile: &Profile) -> Result<Rational> {
    Ok(t_star_interval(system, profile)?.0)
}

/// Both endpoints of the solution interval `{ t : median_sum(t) = 1 }`.
pub fn t_star_interval(
    system: &PhantomSystem,
    profile: &Profile,
) -> Result<(Rational, Rational)> {
    check_sizes(system, profile)?;
    let one = Rational::one();
    let times = sweep_times(system, profile);
    let sums: Vec<Rational> = times
        .iter()
        .map(|t| median_sum(system, profile, t))
        .collect::<Result<_>>()?;

    let mut left = None;
    for i in 0..times.len() {
        if sums[i] == one {
            left = Some(times[i].clone());
            break;
        }
        if sums[i] > one {
            debug_assert!(i > 0, "median sum must start at 0");
            let (ta, sa) = (&times[i - 1], &sums[i - 1]);
            let (tb, sb) = (&times[i], &sums[i]);
            left = Some(ta + (tb - ta) * (&one - sa) / (sb - sa));
            break;
        }
    }
    let Some(left) = left else {
        return Err(Error::NormalizationUnreachable {
            sum: sums.last().expect("nonempty sweep").clone(),
        });
    };

    // Rightmost solution: the last candidate at which the sum is <= 1,
    // interpolated into the following interval if the sum there is still
    // short of 1.
    let idx = (0..times.len())
        .rev()
        .find(|&i| sums[i] <= one)
        .expect("sum starts at 0");
    let right = if sums[idx] == one {
        times[idx].clone()
    } else if idx + 1 < times.len() {
        let (ta, sa) = (&times[idx], &sums[idx]);
        let (tb, sb) = (&times[idx + 1], &sums[idx + 1]);
        ta + (tb - ta) * (&one - sa) / (sb - sa)
    } else {
        unreachable!("left solution exists, so the sum reaches 1")
    };
    Ok((left, right))
}

/// The moving phantom aggregate: per-alternative generalized medians at `t*`.
/// The output sums to exactly 1 by choice of `t*`.
pub fn aggregate(system: &PhantomSystem, profile: &Profile) -> Result<Division> {
    let t_star = solve_t_star(system, profile)?;
    aggregate_at(system, profile, &t_star)
}

/// The aggregate evaluated at a caller-supplied normalization time.
pub fn aggregate_at(
    system: &PhantomSystem,
    profile: &Profile,
    t_star: &Rational,
) -> Result<Division> {
    check_sizes(system, profile)?;
    let snapshot = system.snapshot(t_star)?;
    let weights = (0..profile.m())
        .map(|j| generalized_median(&snapshot, &profile.column(j)))
        .collect::<Result<Vec<_>>>()?;
    Division::new(weights)
}

/// Bisection fallback for phantom systems available only as callbacks.
///
/// `positions(t)` must return the `n + 1` phantom positions at `t`. Stops
/// when `|median_sum - 1| <= tolerance`; never used for the built-in
/// piecewise-linear systems, which are solved exactly.
pub fn solve_t_star_bisect<F>(
    positions: F,
    profile: &Profile,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Rational>
where
    F: Fn(&Rational) -> Vec<Rational>,
{
    let sum_at = |t: &Rational| -> Result<Rational> {
        let snapshot = PhantomSnapshot::new(t.clone(), positions(t))?;
        let mut total = Rational::zero();
        for j in 0..profile.m() {
            total += generalized_median(&snapshot, &profile.column(j))?;
        }
        Ok(total)
    };
    let one = Rational::one();
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    for _ in 0..max_iterations {
        let mid = (&lo + &hi) / Rational::from_integer(2.into());
        let sum = sum_at(&mid)?;
        let gap = (&sum - &one).to_f64().unwrap_or(f64::INFINITY);
        if gap.abs() <= tolerance {
            return Ok(mid);
        }
        if sum < one {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
    })
}

/// One row of a trajectory table: phantom positions, per-alternative
/// medians, and their sum at a sampled time.
#[derive(Debug, Clone)]
pub struct TrajectoryRow {
    pub t: Rational,
    pub phantoms: Vec<Rational>,
    pub medians: Vec<Rational>,
    pub median_sum: Rational,
}

/// Samples the phantom movie at `samples` uniform times plus every
/// breakpoint and `t*`, in increasing `t` order.
pub fn trajectory_rows(
    system: &PhantomSystem,
    profile: &Profile,
    samples: usize,
) -> Result<Vec<TrajectoryRow>> {
    check_sizes(system, profile)?;
    let mut times = system.breakpoint_times();
    times.insert(solve_t_star(system, profile)?);
    if samples >= 2 {
        let denom = Rational::from_integer(((samples - 1) as i64).into());
        for i in 0..samples {
            times.insert(Rational::from_integer((i as i64).into()) / &denom);
        }
    }
    times
        .into_iter()
        .map(|t| {
            let snapshot = system.snapshot(&t)?;
            let medians = (0..profile.m())
                .map(|j| generalized_median(&snapshot, &profile.column(j)))
                .collect::<Result<Vec<_>>>()?;
            let median_sum = medians.iter().sum();
            Ok(TrajectoryRow {
                t,
                phantoms: snapshot.positions.clone(),
                medians,
                median_sum,
            })
        })
        .collect()
}
