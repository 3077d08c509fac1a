//! Seeded random generation of profiles, misreports, and report pairs.
//!
//! Everything here is deterministic under its seed and produces exact
//! rationals on a `1/d` lattice, so generated fixtures can be replayed
//! byte-for-byte.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::division::{Division, Profile};
use crate::rational::{rat, Rational};
use num_traits::{One, Zero};

/// Default lattice resolution for generated reports.
pub const DEFAULT_RESOLUTION: u32 = 20;

/// Families of random profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Every voter reports a unit vector, with a uniformly random favorite.
    SingleMinded,
    /// Every report is a uniformly random lattice division (a normalized
    /// random lattice vector).
    DirichletLike,
    /// The electorate splits between the first two unit vectors, with the
    /// first alternative taking the extra voter when `n` is odd.
    Polarized,
}

impl ProfileKind {
    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "single-minded" => Some(ProfileKind::SingleMinded),
            "dirichlet-like" => Some(ProfileKind::DirichletLike),
            "polarized" => Some(ProfileKind::Polarized),
            _ => None,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            ProfileKind::SingleMinded => "single-minded",
            ProfileKind::DirichletLike => "dirichlet-like",
            ProfileKind::Polarized => "polarized",
        }
    }
}

/// A uniformly random composition of `total` into `parts` nonnegative
/// summands, by sampling bar positions.
pub fn random_composition<R: Rng>(total: u32, parts: usize, rng: &mut R) -> Vec<u32> {
    assert!(parts >= 1);
    if parts == 1 {
        return vec![total];
    }
    let slots = total as usize + parts - 1;
    let mut bars: Vec<usize> = sample(rng, slots, parts - 1).into_iter().collect();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0usize;
    for &bar in &bars {
        out.push((bar - prev) as u32);
        prev = bar + 1;
    }
    out.push((slots - prev) as u32);
    debug_assert_eq!(out.iter().sum::<u32>(), total);
    out
}

/// A uniformly random division on the `1/resolution` lattice.
pub fn random_division<R: Rng>(m: usize, resolution: u32, rng: &mut R) -> Division {
    let parts = random_composition(resolution, m, rng);
    Division::new(
        parts
            .into_iter()
            .map(|k| rat(k as i64, resolution as i64))
            .collect(),
    )
    .expect("lattice composition sums to 1")
}

/// One random profile of the given kind.
pub fn random_profile<R: Rng>(
    kind: ProfileKind,
    n: usize,
    m: usize,
    resolution: u32,
    rng: &mut R,
) -> Profile {
    assert!(n >= 1 && m >= 2);
    let reports = match kind {
        ProfileKind::SingleMinded => (0..n)
            .map(|_| Division::unit(m, rng.gen_range(0..m)))
            .collect(),
        ProfileKind::DirichletLike => (0..n)
            .map(|_| random_division(m, resolution, rng))
            .collect(),
        ProfileKind::Polarized => {
            let first = n.div_ceil(2);
            let mut reports = vec![Division::unit(m, 0); first];
            reports.extend(vec![Division::unit(m, 1); n - first]);
            reports
        }
    };
    Profile::new(reports).expect("generated reports are consistent")
}

/// A deterministic stream of profiles under one seed.
pub struct ProfileStream {
    kind: ProfileKind,
    n: usize,
    m: usize,
    resolution: u32,
    rng: ChaCha8Rng,
}

impl ProfileStream {
    pub fn new(kind: ProfileKind, n: usize, m: usize, resolution: u32, seed: u64) -> Self {
        ProfileStream {
            kind,
            n,
            m,
            resolution,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Iterator for ProfileStream {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        Some(random_profile(
            self.kind,
            self.n,
            self.m,
            self.resolution,
            &mut self.rng,
        ))
    }
}

/// Misreport families used by the manipulation search. The structured
/// strategies probe deviations with a shape; the lattice strategy samples
/// blindly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisreportStrategy {
    /// Report a unit vector.
    UnitVectors,
    /// Swap two coordinates of the truthful report.
    CoordinateSwaps,
    /// Move 1/10, 1/4, or 1/2 of mass between two coordinates, clipped to
    /// feasibility.
    MassShifts,
    /// A fresh random lattice division.
    RandomLattice { resolution: u32 },
}

/// The structured strategy set.
pub fn structured_strategies() -> Vec<MisreportStrategy> {
    vec![
        MisreportStrategy::UnitVectors,
        MisreportStrategy::CoordinateSwaps,
        MisreportStrategy::MassShifts,
    ]
}

/// Structured plus random strategies.
pub fn all_strategies(resolution: u32) -> Vec<MisreportStrategy> {
    let mut strategies = structured_strategies();
    strategies.push(MisreportStrategy::RandomLattice { resolution });
    strategies
}

/// Draws one misreport differing from `truth`, or `None` when the strategy
/// degenerates on this report (e.g. swapping equal coordinates).
pub fn random_misreport<R: Rng>(
    truth: &Division,
    strategy: MisreportStrategy,
    rng: &mut R,
) -> Option<Division> {
    let m = truth.m();
    match strategy {
        MisreportStrategy::UnitVectors => {
            let j = rng.gen_range(0..m);
            let unit = Division::unit(m, j);
            (&unit != truth).then_some(unit)
        }
        MisreportStrategy::CoordinateSwaps => {
            let a = rng.gen_range(0..m);
            let b = rng.gen_range(0..m);
            if a == b || truth.get(a) == truth.get(b) {
                return None;
            }
            let mut perm: Vec<usize> = (0..m).collect();
            perm.swap(a, b);
            truth.permute(&perm).ok()
        }
        MisreportStrategy::MassShifts => {
            let from = rng.gen_range(0..m);
            let to = rng.gen_range(0..m);
            if from == to {
                return None;
            }
            let delta = [rat(1, 10), rat(1, 4), rat(1, 2)][rng.gen_range(0..3)].clone();
            let delta = delta
                .min(truth.get(from).clone())
                .min(Rational::one() - truth.get(to));
            if delta.is_zero() {
                return None;
            }
            let mut weights = truth.weights().to_vec();
            weights[from] -= &delta;
            weights[to] += &delta;
            Division::new(weights).ok()
        }
        MisreportStrategy::RandomLattice { resolution } => {
            let division = random_division(m, resolution, rng);
            (&division != truth).then_some(division)
        }
    }
}

/// A pair `(higher, lower)` of reports satisfying the monotonicity premise:
/// `higher` strictly exceeds `lower` on the returned alternative and is
/// weakly below it everywhere else.
pub fn random_monotone_pair<R: Rng>(
    m: usize,
    resolution: u32,
    rng: &mut R,
) -> (Division, Division, usize) {
    loop {
        let lower = random_division(m, resolution, rng);
        let j = rng.gen_range(0..m);
        let headroom = Rational::one() - lower.get(j);
        if headroom.is_zero() {
            continue;
        }
        let delta = &headroom * rat(rng.gen_range(1..=8), 8);
        // Take the extra mass from the other coordinates proportionally.
        let rest = Rational::one() - lower.get(j);
        let scale = (&rest - &delta) / &rest;
        let mut weights: Vec<Rational> = lower
            .weights()
            .iter()
            .map(|w| w * &scale)
            .collect();
        weights[j] = lower.get(j) + &delta;
        let higher = Division::new(weights).expect("scaled mass shift stays normalized");
        return (higher, lower, j);
    }
}

/// A random permutation of `0..len`.
pub fn random_permutation<R: Rng>(len: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_sum_to_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let parts = random_composition(20, 4, &mut rng);
            assert_eq!(parts.iter().sum::<u32>(), 20);
            assert_eq!(parts.len(), 4);
        }
    }

    #[test]
    fn single_minded_profiles_are_unit_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let profile = random_profile(ProfileKind::SingleMinded, 10, 3, 20, &mut rng);
        for report in profile.reports() {
            assert_eq!(
                report.weights().iter().filter(|w| w.is_one()).count(),
                1
            );
        }
    }

    #[test]
    fn polarized_profile_matches_majority_story() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let profile = random_profile(ProfileKind::Polarized, 199, 2, 20, &mut rng);
        let ones = profile
            .reports()
            .iter()
            .filter(|r| r.get(0).is_one())
            .count();
        assert_eq!(ones, 100);
        assert_eq!(profile.n() - ones, 99);
    }

    #[test]
    fn streams_are_deterministic_under_seed() {
        let a: Vec<Profile> =
            ProfileStream::new(ProfileKind::DirichletLike, 4, 3, 20, 77)
                .take(5)
                .collect();
        let b: Vec<Profile> =
            ProfileStream::new(ProfileKind::DirichletLike, 4, 3, 20, 77)
                .take(5)
                .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn misreports_differ_from_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truth = Division::parse(&["0.4", "0.4", "0.2"]).unwrap();
        for strategy in all_strategies(20) {
            for _ in 0..20 {
                if let Some(lie) = random_misreport(&truth, strategy, &mut rng) {
                    assert_ne!(&lie, &truth);
                }
            }
        }
    }

    #[test]
    fn monotone_pairs_satisfy_the_premise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (higher, lower, j) = random_monotone_pair(4, 20, &mut rng);
            assert!(higher.get(j) > lower.get(j));
            for k in 0..4 {
                if k != j {
                    assert!(higher.get(k) <= lower.get(k));
                }
            }
        }
    }

    #[test]
    fn permutations_are_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let perm = random_permutation(6, &mut rng);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
    }
}
