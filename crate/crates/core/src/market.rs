//! The single-good market view of the independent markets mechanism.
//!
//! For each alternative `j` we sell an amount `x` of a divisible good; voter
//! `i` values a unit at their report `p_hat[i][j]` and has a budget of 1 in
//! each market. The clearing price equals the median of the voter values and
//! the `n + 1` phantom values `0, 1/x, ..., n/x`, so tuning the common supply
//! `x` until the clearing prices sum to 1 reproduces the independent markets
//! outcome. This module implements both price routes independently of the
//! phantom engine, plus the linear-program certificate that pins the outcome
//! down exactly.

use num_traits::{One, Zero};

use crate::division::{Division, Profile};
use crate::error::Error;
use crate::rational::{median, Rational};
use crate::Result;

/// A single-good market: `supply` units for sale, per-unit voter values,
/// and a fixed budget of 1 per voter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketInstance {
    supply: Rational,
    values: Vec<Rational>,
}

impl MarketInstance {
    pub fn new(supply: Rational, values: Vec<Rational>) -> Result<Self> {
        if supply < Rational::zero() {
            return Err(Error::NegativeValue { value: supply });
        }
        for v in &values {
            if v < &Rational::zero() {
                return Err(Error::NegativeValue { value: v.clone() });
            }
        }
        Ok(MarketInstance { supply, values })
    }

    /// The market for alternative `j` of a profile at common supply `x`.
    pub fn for_alternative(profile: &Profile, j: usize, supply: Rational) -> Result<Self> {
        MarketInstance::new(supply, profile.column(j))
    }

    pub fn supply(&self) -> &Rational {
        &self.supply
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// Demand of a single budget-1 voter, possibly infinite at price zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Demand {
    Infinite,
    Finite(Rational),
}

impl Demand {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Demand::Infinite)
    }

    /// Whether demand strictly exceeds the given finite quantity.
    pub fn exceeds(&self, quantity: &Rational) -> bool {
        match self {
            Demand::Infinite => true,
            Demand::Finite(d) => d > quantity,
        }
    }
}

/// A voter's demand at a posted price: everything the budget buys while the
/// price is below their value, nothing once it reaches it, unbounded at
/// price zero.
pub fn demand(value: &Rational, price: &Rational) -> Demand {
    if price.is_zero() {
        Demand::Infinite
    } else if price < value {
        Demand::Finite(price.recip())
    } else {
        Demand::Finite(Rational::zero())
    }
}

/// Sum of all voters' demands at a price.
pub fn total_demand(market: &MarketInstance, price: &Rational) -> Demand {
    if price.is_zero() {
        return Demand::Infinite;
    }
    let buyers = market.values.iter().filter(|v| *v > price).count();
    Demand::Finite(Rational::from_integer((buyers as i64).into()) / price)
}

/// All prices at which the demand curve can cross the supply: the voter
/// values and the phantom prices `k/x`.
fn candidate_prices(market: &MarketInstance) -> Vec<Rational> {
    let mut candidates: Vec<Rational> = market.values.clone();
    for k in 0..=market.n() {
        candidates.push(Rational::from_integer((k as i64).into()) / &market.supply);
    }
    candidates.sort();
    candidates.dedup();
    candidates
}

/// The market clearing price: the supremum of prices at which total demand
/// still exceeds supply. Demand is non-increasing in the price, so the
/// supremum is the largest candidate price `pi` whose left limit of demand,
/// `#{v_i >= pi} / pi`, is at least the supply.
///
/// When no voter has a positive value the set of over-demanded prices is
/// just `{0}` and the clearing price is 0.
pub fn clearing_price(market: &MarketInstance) -> Result<Rational> {
    if market.supply.is_zero() {
        return Err(Error::ZeroSupply);
    }
    let mut best = Rational::zero();
    for pi in candidate_prices(market) {
        if pi.is_zero() {
            continue;
        }
        let weak_buyers = market.values.iter().filter(|v| *v >= &pi).count();
        let weak_buyers = Rational::from_integer((weak_buyers as i64).into());
        if weak_buyers >= &market.supply * &pi && pi > best {
            best = pi;
        }
    }
    Ok(best)
}

/// The clearing price by its median form: the median of the `n` voter
/// values and the `n + 1` phantom values `0, 1/x, ..., n/x`. Kept as an
/// independent code path from [`clearing_price`].
pub fn market_median(market: &MarketInstance) -> Result<Rational> {
    if market.supply.is_zero() {
        return Err(Error::ZeroSupply);
    }
    let mut entries = Vec::with_capacity(2 * market.n() + 1);
    for k in 0..=market.n() {
        entries.push(Rational::from_integer((k as i64).into()) / &market.supply);
    }
    entries.extend_from_slice(&market.values);
    Ok(median(&entries))
}

/// Sum of per-alternative clearing prices at common supply `x`.
fn price_sum(profile: &Profile, x: &Rational) -> Result<Rational> {
    let mut total = Rational::zero();
    for j in 0..profile.m() {
        let market = MarketInstance::for_alternative(profile, j, x.clone())?;
        total += clearing_price(&market)?;
    }
    Ok(total)
}

/// Reconstructs the independent markets outcome from the market side: finds
/// the supply `x*` at which the clearing prices across alternatives sum to
/// exactly 1 and returns it with those prices.
///
/// The search sweeps the supply values at which some phantom price `k/x`
/// crosses a report; between consecutive candidates the price sum has the
/// form `a + b/x`, so the root is solved exactly. Ties are broken toward
/// the largest feasible supply, mirroring the phantom engine's leftmost
/// `t*` under `x = n/t`.
pub fn im_via_markets(profile: &Profile) -> Result<(Rational, Division)> {
    let n = profile.n();
    let n_rat = Rational::from_integer((n as i64).into());
    let one = Rational::one();

    let mut candidates: Vec<Rational> = vec![n_rat.clone()];
    for report in profile.reports() {
        for v in report.weights() {
            if v.is_zero() {
                continue;
            }
            for k in 1..=n {
                let x = Rational::from_integer((k as i64).into()) / v;
                if x >= n_rat {
                    candidates.push(x);
                }
            }
        }
    }
    candidates.sort();
    candidates.dedup();

    let sums: Vec<Rational> = candidates
        .iter()
        .map(|x| price_sum(profile, x))
        .collect::<Result<_>>()?;
    debug_assert!(sums[0] >= one, "prices sum to at least 1 at supply n");

    let idx = (0..candidates.len())
        .rev()
        .find(|&i| sums[i] >= one)
        .expect("supply n is always feasible");

    let x_star = if sums[idx] == one {
        candidates[idx].clone()
    } else if idx + 1 == candidates.len() {
        // Beyond the last candidate every clearing price is a phantom price
        // k/x, so the sum is b/x with b determined by the last sample.
        &sums[idx] * &candidates[idx]
    } else {
        // The sum is a + b/x on this interval; interpolate through the two
        // endpoint samples and solve a + b/x = 1.
        let (xa, sa) = (&candidates[idx], &sums[idx]);
        let (xb, sb) = (&candidates[idx + 1], &sums[idx + 1]);
        let b = (sa - sb) / (xa.recip() - xb.recip());
        let a = sa - &b / xa;
        b / (&one - a)
    };

    let prices = (0..profile.m())
        .map(|j| {
            let market = MarketInstance::for_alternative(profile, j, x_star.clone())?;
            clearing_price(&market)
        })
        .collect::<Result<Vec<_>>>()?;
    let division = Division::new(prices)?;
    Ok((x_star, division))
}

/// The certificate behind the rationality argument for the independent
/// markets outcome: demander sets, the price multiplier, and the witnessed
/// strict slack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemanderSets {
    demanders: Vec<Vec<usize>>,
    boundary_voters: Vec<Vec<usize>>,
    multiplier: Rational,
    epsilon: Option<Rational>,
    boundary: bool,
}

impl DemanderSets {
    /// `N_j`: voters whose report on `j` strictly exceeds the price.
    pub fn demanders(&self, j: usize) -> &[usize] {
        &self.demanders[j]
    }

    /// Voters whose report on `j` equals the price exactly.
    pub fn boundary_voters(&self, j: usize) -> &[usize] {
        &self.boundary_voters[j]
    }

    /// The price multiplier `z = 1/x`.
    pub fn multiplier(&self) -> &Rational {
        &self.multiplier
    }

    /// Smallest strict slack `p_hat[i][j] - p_j` over all demanders, when
    /// any demander exists.
    pub fn epsilon(&self) -> Option<&Rational> {
        self.epsilon.as_ref()
    }

    /// True when the strict program `p_j = z |N_j|` was infeasible and the
    /// certificate instead witnesses boundary voters covering the remaining
    /// spend (`|N_j| <= p_j / z <= |N_j| + |B_j|`).
    pub fn is_boundary(&self) -> bool {
        self.boundary
    }
}

/// Checks that `outcome` is the independent markets division of `profile` by
/// constructing the demander-set certificate.
///
/// For each alternative the demanders `N_j` are read off the outcome; the
/// strict program requires a single `z >= 0` with `p_j = z |N_j|` and
/// `sum p_j = 1`, with every demander's report strictly above the price. If
/// the strict system is infeasible (some coordinate needs partially spending
/// boundary voters, as on unanimous profiles), a boundary certificate is
/// attempted instead. Any remaining inconsistency proves the outcome is not
/// the independent markets division and is reported as an error.
pub fn verify_lp_certificate(profile: &Profile, outcome: &Division) -> Result<DemanderSets> {
    if profile.m() != outcome.m() {
        return Err(Error::DimensionMismatch {
            left: profile.m(),
            right: outcome.m(),
        });
    }
    let m = profile.m();
    let mut demanders: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut boundary_voters: Vec<Vec<usize>> = vec![Vec::new(); m];
    for j in 0..m {
        let price = outcome.get(j);
        for (i, report) in profile.reports().iter().enumerate() {
            if report.get(j) > price {
                demanders[j].push(i);
            } else if report.get(j) == price {
                boundary_voters[j].push(i);
            }
        }
    }

    let epsilon = demanders
        .iter()
        .enumerate()
        .flat_map(|(j, set)| {
            set.iter()
                .map(move |&i| profile.report(i).get(j) - outcome.get(j))
        })
        .min();

    // Strict program: p_j = z |N_j| for a single z, which forces
    // z = 1 / sum_j |N_j|.
    let total: usize = demanders.iter().map(Vec::len).sum();
    if total > 0 {
        let z = Rational::from_integer((total as i64).into()).recip();
        let consistent = (0..m).all(|j| {
            let count = Rational::from_integer((demanders[j].len() as i64).into());
            outcome.get(j) == &(&z * &count)
        });
        if consistent {
            return Ok(DemanderSets {
                demanders,
                boundary_voters,
                multiplier: z,
                epsilon,
                boundary: false,
            });
        }
    }

    // Boundary repair: find a supply x with
    // |N_j| <= x p_j <= |N_j| + |B_j| on every alternative.
    let mut x_low = Rational::zero();
    let mut x_high: Option<Rational> = None;
    for j in 0..m {
        let price = outcome.get(j);
        let strict = Rational::from_integer((demanders[j].len() as i64).into());
        let weak = Rational::from_integer(
            ((demanders[j].len() + boundary_voters[j].len()) as i64).into(),
        );
        if price.is_zero() {
            if !demanders[j].is_empty() {
                return Err(Error::CertificateFailed {
                    reason: format!("alternative {j} has demanders at price 0"),
                });
            }
            continue;
        }
        let low = &strict / price;
        let high = &weak / price;
        if low > x_low {
            x_low = low;
        }
        x_high = Some(match x_high {
            None => high,
            Some(current) => current.min(high),
        });
    }
    let Some(x_high) = x_high else {
        return Err(Error::CertificateFailed {
            reason: "outcome has no positive coordinate".to_string(),
        });
    };
    if x_low > x_high || x_high.is_zero() {
        return Err(Error::CertificateFailed {
            reason: format!(
                "no supply clears every market: needs x in [{x_low}, {x_high}]"
            ),
        });
    }
    Ok(DemanderSets {
        demanders,
        boundary_voters,
        multiplier: x_high.recip(),
        epsilon,
        boundary: true,
    })
}
