//! Divisions, profiles, and the quantities defined on them.
//!
//! A [`Division`] is a vector of `m` exact rationals in `[0, 1]` summing to
//! exactly 1. Vectors that sum to 1 only approximately are rejected, not
//! renormalized; silent renormalization would mask caller bugs and break the
//! incentive-compatibility tests downstream.

use num_traits::{One, Zero};

use crate::error::Error;
use crate::rational::{parse_rational, to_f64, Rational};
use crate::Result;

/// A normalized nonnegative vector over `m` alternatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Division {
    weights: Vec<Rational>,
}

impl Division {
    /// Validates every weight in `[0, 1]` and an exact sum of 1.
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyDivision);
        }
        for w in &weights {
            if w < &Rational::zero() || w > &Rational::one() {
                return Err(Error::WeightOutOfRange { value: w.clone() });
            }
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Division { weights })
    }

    /// Parses weight strings ("0.4", "2/5") into an exact division.
    pub fn parse<S: AsRef<str>>(weights: &[S]) -> Result<Self> {
        let weights = weights
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Division::new(weights)
    }

    /// The unit vector putting all weight on alternative `j`.
    pub fn unit(m: usize, j: usize) -> Self {
        assert!(j < m, "unit coordinate out of range");
        let mut weights = vec![Rational::zero(); m];
        weights[j] = Rational::one();
        Division { weights }
    }

    /// The uniform division `(1/m, ..., 1/m)`.
    pub fn uniform(m: usize) -> Self {
        assert!(m > 0);
        let w = Rational::new(1.into(), (m as i64).into());
        Division {
            weights: vec![w; m],
        }
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn get(&self, j: usize) -> &Rational {
        &self.weights[j]
    }

    /// l1 distance to another division: sum over j of `|a_j - b_j|`.
    pub fn l1_distance(&self, other: &Division) -> Result<Rational> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch {
                left: self.m(),
                right: other.m(),
            });
        }
        let mut total = Rational::zero();
        for (a, b) in self.weights.iter().zip(&other.weights) {
            let diff = a - b;
            total += if diff < Rational::zero() { -diff } else { diff };
        }
        Ok(total)
    }

    /// Shannon entropy in nats, with the convention `0 * log 0 = 0`.
    ///
    /// Evaluated in floating point: entropy is only ever used to compare
    /// candidate divisions, never inside a mechanism.
    pub fn shannon_entropy(&self) -> f64 {
        self.weights
            .iter()
            .filter(|w| !w.is_zero())
            .map(|w| {
                let p = to_f64(w);
                -p * p.ln()
            })
            .sum()
    }

    /// Applies a permutation of the alternatives: entry `j` of the result is
    /// the weight this division assigns to `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.m())?;
        let weights = perm.iter().map(|&j| self.weights[j].clone()).collect();
        Division::new(weights)
    }

    /// Exact fraction strings, one per alternative.
    pub fn to_fraction_strings(&self) -> Vec<String> {
        self.weights.iter().map(|w| w.to_string()).collect()
    }
}

impl std::fmt::Display for Division {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

/// An ordered list of voter reports, all over the same `m >= 2` alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    reports: Vec<Division>,
}

impl Profile {
    pub fn new(reports: Vec<Division>) -> Result<Self> {
        let Some(first) = reports.first() else {
            return Err(Error::EmptyProfile);
        };
        let m = first.m();
        if m < 2 {
            return Err(Error::TooFewAlternatives { m });
        }
        for r in &reports {
            if r.m() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: r.m(),
                });
            }
        }
        Ok(Profile { reports })
    }

    /// Parses rows of weight strings into a profile.
    pub fn parse<S: AsRef<str>>(rows: &[&[S]]) -> Result<Self> {
        let reports = rows
            .iter()
            .map(|row| Division::parse(row))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(reports)
    }

    /// A profile in which `counts[j]` voters report the unit vector on `j`.
    pub fn single_minded(counts: &[usize]) -> Result<Self> {
        let m = counts.len();
        let mut reports = Vec::new();
        for (j, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                reports.push(Division::unit(m, j));
            }
        }
        Profile::new(reports)
    }

    pub fn n(&self) -> usize {
        self.reports.len()
    }

    pub fn m(&self) -> usize {
        self.reports[0].m()
    }

    pub fn reports(&self) -> &[Division] {
        &self.reports
    }

    pub fn report(&self, i: usize) -> &Division {
        &self.reports[i]
    }

    /// The reports' weights on alternative `j`, in voter order.
    pub fn column(&self, j: usize) -> Vec<Rational> {
        self.reports.iter().map(|r| r.get(j).clone()).collect()
    }

    /// Total l1 distance from every report to `q`. Social welfare is the
    /// negation of this quantity.
    pub fn social_cost(&self, q: &Division) -> Result<Rational> {
        let mut total = Rational::zero();
        for r in &self.reports {
            total += r.l1_distance(q)?;
        }
        Ok(total)
    }

    /// Per-alternative reports sorted in descending order.
    pub fn order_statistics(&self) -> OrderStatistics {
        let columns = (0..self.m())
            .map(|j| {
                let mut col = self.column(j);
                col.sort_by(|a, b| b.cmp(a));
                col
            })
            .collect();
        OrderStatistics {
            columns,
            n: self.n(),
        }
    }

    /// The profile without voter `i` (requires `n >= 2`).
    pub fn without_voter(&self, i: usize) -> Result<Profile> {
        if i >= self.n() {
            return Err(Error::VoterOutOfRange {
                voter: i,
                n: self.n(),
            });
        }
        let mut reports = self.reports.clone();
        reports.remove(i);
        Profile::new(reports)
    }

    /// The profile with voter `i`'s report replaced.
    pub fn with_report(&self, i: usize, report: Division) -> Result<Profile> {
        if i >= self.n() {
            return Err(Error::VoterOutOfRange {
                voter: i,
                n: self.n(),
            });
        }
        if report.m() != self.m() {
            return Err(Error::DimensionMismatch {
                left: self.m(),
                right: report.m(),
            });
        }
        let mut reports = self.reports.clone();
        reports[i] = report;
        Ok(Profile { reports })
    }

    /// Concatenation of two profiles over the same alternatives.
    pub fn concat(&self, other: &Profile) -> Result<Profile> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch {
                left: self.m(),
                right: other.m(),
            });
        }
        let mut reports = self.reports.clone();
        reports.extend(other.reports.iter().cloned());
        Ok(Profile { reports })
    }

    /// Reorders voters: voter `i` of the result is voter `perm[i]`.
    pub fn permute_voters(&self, perm: &[usize]) -> Result<Profile> {
        check_permutation(perm, self.n())?;
        let reports = perm.iter().map(|&i| self.reports[i].clone()).collect();
        Profile::new(reports)
    }

    /// Permutes the alternatives in every report.
    pub fn permute_alternatives(&self, perm: &[usize]) -> Result<Profile> {
        let reports = self
            .reports
            .iter()
            .map(|r| r.permute(perm))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(reports)
    }
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::DimensionMismatch {
            left: perm.len(),
            right: len,
        });
    }
    let mut seen = vec![false; len];
    for &i in perm {
        if i >= len || seen[i] {
            return Err(Error::VoterOutOfRange { voter: i, n: len });
        }
        seen[i] = true;
    }
    Ok(())
}

/// Per-alternative descending order statistics of a profile.
///
/// `value(i, j)` is the `i`-th largest report on alternative `j` for
/// `1 <= i <= n`, extended by the conventions `value(0, j) = 1` and
/// `value(n + 1, j) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderStatistics {
    columns: Vec<Vec<Rational>>,
    n: usize,
}

impl OrderStatistics {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.columns.len()
    }

    /// The sorted (descending) column for alternative `j`.
    pub fn column(&self, j: usize) -> &[Rational] {
        &self.columns[j]
    }

    /// The `rank`-th largest entry on alternative `j`, with the boundary
    /// conventions for ranks `0` and `n + 1`.
    pub fn value(&self, rank: usize, j: usize) -> Rational {
        if rank == 0 {
            Rational::one()
        } else if rank > self.n {
            Rational::zero()
        } else {
            self.columns[j][rank - 1].clone()
        }
    }

    /// Sum over alternatives of the `rank`-th largest entries.
    pub fn rank_sum(&self, rank: usize) -> Rational {
        (0..self.m()).map(|j| self.value(rank, j)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) fn div(strs: &[&str]) -> Division {
        Division::parse(strs).unwrap()
    }

    /// Three-voter profile used throughout: reports (0, 0.5, 0.5),
    /// (0.5, 0.5, 0), (0.9, 0, 0.1).
    pub(crate) fn worked_profile() -> Profile {
        Profile::new(vec![
            div(&["0", "0.5", "0.5"]),
            div(&["0.5", "0.5", "0"]),
            div(&["0.9", "0", "0.1"]),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_unnormalized_division() {
        let err = Division::parse(&["0.3", "0.3", "0.3"]).unwrap_err();
        match err {
            Error::NotNormalized { sum } => assert_eq!(sum, rat(9, 10)),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_weights() {
        assert!(Division::parse(&["1.5", "-0.5"]).is_err());
        assert!(Division::parse(&["-1/2", "3/2"]).is_err());
    }

    #[test]
    fn l1_distance_hand_sum() {
        let a = div(&["0.4", "0.4", "0.2"]);
        let b = div(&["0", "0.5", "0.5"]);
        assert_eq!(a.l1_distance(&b).unwrap(), rat(4, 5));
        assert_eq!(a.l1_distance(&a).unwrap(), rat(0, 1));
    }

    #[test]
    fn l1_distance_is_maximal_between_disjoint_units() {
        let a = Division::unit(2, 0);
        let b = Division::unit(2, 1);
        assert_eq!(a.l1_distance(&b).unwrap(), rat(2, 1));
    }

    #[test]
    fn l1_distance_dimension_mismatch() {
        let a = Division::uniform(2);
        let b = Division::uniform(3);
        assert!(a.l1_distance(&b).is_err());
    }

    #[test]
    fn social_cost_of_polarized_pair_is_constant() {
        let p = Profile::new(vec![Division::unit(2, 0), Division::unit(2, 1)]).unwrap();
        let two = rat(2, 1);
        assert_eq!(p.social_cost(&div(&["0.5", "0.5"])).unwrap(), two);
        assert_eq!(p.social_cost(&Division::unit(2, 0)).unwrap(), two);
        assert_eq!(p.social_cost(&div(&["0.25", "0.75"])).unwrap(), two);
    }

    #[test]
    fn social_cost_zero_for_lone_voter_at_outcome() {
        let x = div(&["0.3", "0.7"]);
        let p = Profile::new(vec![x.clone()]).unwrap();
        assert_eq!(p.social_cost(&x).unwrap(), rat(0, 1));
    }

    #[test]
    fn social_cost_adds_under_concatenation() {
        let p = worked_profile();
        let r = Profile::new(vec![div(&["0.2", "0.3", "0.5"])]).unwrap();
        let q = div(&["0.4", "0.4", "0.2"]);
        let combined = p.concat(&r).unwrap();
        assert_eq!(
            combined.social_cost(&q).unwrap(),
            p.social_cost(&q).unwrap() + r.social_cost(&q).unwrap()
        );
    }

    #[test]
    fn entropy_fixtures() {
        assert!((Division::uniform(4).shannon_entropy() - 4f64.ln()).abs() < 1e-12);
        assert_eq!(Division::unit(3, 0).shannon_entropy(), 0.0);
        // Direct evaluation of -sum(q ln q) for (0.45, 0.45, 0.1):
        // 0.9 * 0.798508 + 0.1 * 2.302585 = 0.948915 nats.
        let q = div(&["0.45", "0.45", "0.1"]);
        assert!((q.shannon_entropy() - 0.9489154358953991).abs() < 1e-12);
    }

    #[test]
    fn order_statistics_sorts_each_column_descending() {
        let p = worked_profile();
        let stats = p.order_statistics();
        let col = |j: usize| -> Vec<Rational> { stats.column(j).to_vec() };
        assert_eq!(col(0), vec![rat(9, 10), rat(1, 2), rat(0, 1)]);
        assert_eq!(col(1), vec![rat(1, 2), rat(1, 2), rat(0, 1)]);
        assert_eq!(col(2), vec![rat(1, 2), rat(1, 10), rat(0, 1)]);
    }

    #[test]
    fn order_statistics_preserves_duplicates() {
        let p = Profile::parse(&[
            &["0.5", "0.5"] as &[&str],
            &["0.5", "0.5"],
            &["0", "1"],
        ])
        .unwrap();
        let stats = p.order_statistics();
        assert_eq!(
            stats.column(0),
            &[rat(1, 2), rat(1, 2), rat(0, 1)],
        );
        // Multiset equality with the unsorted column.
        let mut raw = p.column(0);
        raw.sort();
        let mut sorted = stats.column(0).to_vec();
        sorted.sort();
        assert_eq!(raw, sorted);
    }

    #[test]
    fn order_statistics_boundary_conventions() {
        let p = worked_profile();
        let stats = p.order_statistics();
        assert_eq!(stats.value(0, 1), rat(1, 1));
        assert_eq!(stats.value(4, 2), rat(0, 1));
        assert_eq!(stats.value(1, 0), rat(9, 10));
    }

    #[test]
    fn profile_validation() {
        assert!(matches!(Profile::new(vec![]), Err(Error::EmptyProfile)));
        let one_dim = Division::new(vec![Rational::one()]).unwrap();
        assert!(matches!(
            Profile::new(vec![one_dim]),
            Err(Error::TooFewAlternatives { m: 1 })
        ));
        let mixed = Profile::new(vec![Division::uniform(2), Division::uniform(3)]);
        assert!(mixed.is_err());
    }

    #[test]
    fn permutations_act_as_expected() {
        let p = worked_profile();
        let swapped = p.permute_alternatives(&[1, 0, 2]).unwrap();
        assert_eq!(swapped.report(2), &div(&["0", "0.9", "0.1"]));
        let reordered = p.permute_voters(&[2, 0, 1]).unwrap();
        assert_eq!(reordered.report(0), p.report(2));
    }

    #[test]
    fn rejects_non_permutations() {
        let p = worked_profile();
        assert!(p.permute_voters(&[0, 0, 1]).is_err());
        assert!(p.permute_voters(&[0, 1]).is_err());
        assert!(p.permute_alternatives(&[0, 1, 3]).is_err());
    }
}
