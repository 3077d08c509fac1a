//! Document formats for the command line: profile ingestion, mechanism run
//! results, trajectory tables, and axiom-suite reports.
//!
//! JSON is the canonical format; CSV is accepted for bare profiles and
//! emitted for plot-ready tables. Every number in a document is carried as
//! an exact fraction string, and emitted numerics additionally carry a
//! 12-significant-digit decimal rendering.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::axioms::{SuiteReport, Verdict, ViolationDetail};
use crate::division::{Division, Profile};
use crate::error::Error;
use crate::game::find_improving_deviation;
use crate::market::{im_via_markets, verify_lp_certificate, DemanderSets};
use crate::mechanisms::{parimutuel_consensus, Mechanism};
use crate::phantoms::{trajectory_rows, TrajectoryRow};
use crate::rational::{to_decimal_string, Rational};
use crate::Result;

/// Environment variable consulted for a default seed.
pub const SEED_ENV_VAR: &str = "PHANTOMS_SEED";

/// Significant digits in decimal renderings.
pub const DECIMAL_DIGITS: usize = 12;

/// Supported input formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentFormat {
    Json,
    Csv,
}

impl DocumentFormat {
    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "json" => Some(DocumentFormat::Json),
            "csv" => Some(DocumentFormat::Csv),
            _ => None,
        }
    }
}

/// A profile as it appears on disk: weights are decimal or fraction
/// strings, parsed exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternatives: Option<Vec<String>>,
    pub voters: Vec<VoterEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub report: Vec<String>,
}

impl ProfileDocument {
    pub fn from_profile(profile: &Profile) -> Self {
        ProfileDocument {
            m: profile.m(),
            alternatives: None,
            voters: profile
                .reports()
                .iter()
                .map(|r| VoterEntry {
                    id: None,
                    report: r.to_fraction_strings(),
                })
                .collect(),
        }
    }

    /// Validates and converts to an exact profile; errors name the
    /// offending voter and carry the exact row sum.
    pub fn to_profile(&self) -> Result<Profile> {
        if let Some(labels) = &self.alternatives {
            if labels.len() != self.m {
                return Err(Error::MalformedDocument {
                    reason: format!(
                        "{} alternative labels for m = {}",
                        labels.len(),
                        self.m
                    ),
                });
            }
        }
        let mut reports = Vec::with_capacity(self.voters.len());
        for (i, voter) in self.voters.iter().enumerate() {
            if voter.report.len() != self.m {
                return Err(Error::InvalidReport {
                    voter: i,
                    source: Box::new(Error::DimensionMismatch {
                        left: self.m,
                        right: voter.report.len(),
                    }),
                });
            }
            let division = Division::parse(&voter.report).map_err(|e| {
                Error::InvalidReport {
                    voter: i,
                    source: Box::new(e),
                }
            })?;
            reports.push(division);
        }
        Profile::new(reports)
    }
}

/// Parses a profile from JSON (a [`ProfileDocument`]) or CSV (one row of
/// weights per line). Row order is preserved.
pub fn parse_profile(input: &str, format: DocumentFormat) -> Result<Profile> {
    match format {
        DocumentFormat::Json => {
            let doc: ProfileDocument =
                serde_json::from_str(input).map_err(|e| Error::MalformedDocument {
                    reason: e.to_string(),
                })?;
            doc.to_profile()
        }
        DocumentFormat::Csv => {
            let mut reports = Vec::new();
            for (i, line) in input
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .enumerate()
            {
                let fields: Vec<&str> = line.split(',').map(str::trim).collect();
                let division = Division::parse(&fields).map_err(|e| {
                    Error::InvalidReport {
                        voter: i,
                        source: Box::new(e),
                    }
                })?;
                reports.push(division);
            }
            Profile::new(reports)
        }
    }
}

/// Serializes a profile to its canonical JSON document.
pub fn profile_to_json(profile: &Profile) -> String {
    serde_json::to_string_pretty(&ProfileDocument::from_profile(profile))
        .expect("profile document serializes")
}

/// Serializes a profile to bare CSV rows of exact fractions.
pub fn profile_to_csv(profile: &Profile) -> String {
    profile
        .reports()
        .iter()
        .map(|r| r.to_fraction_strings().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

/// An exact fraction paired with its decimal rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NumberField {
    pub fraction: String,
    pub decimal: String,
}

impl NumberField {
    pub fn from_rational(value: &Rational) -> Self {
        NumberField {
            fraction: value.to_string(),
            decimal: to_decimal_string(value, DECIMAL_DIGITS),
        }
    }
}

fn numbers(values: &[Rational]) -> Vec<NumberField> {
    values.iter().map(NumberField::from_rational).collect()
}

/// The result document of one mechanism run.
#[derive(Debug, Clone, Serialize)]
pub struct RunDocument {
    pub mechanism: String,
    pub outcome: Vec<NumberField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_star: Option<NumberField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_star: Option<NumberField>,
    pub voter_distances: Vec<NumberField>,
    pub social_cost: NumberField,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_certificate: Option<CertificateDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point_iterations: Option<usize>,
}

/// Serializable form of the demander-set certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateDocument {
    pub demanders: Vec<Vec<usize>>,
    pub boundary_voters: Vec<Vec<usize>>,
    pub multiplier: NumberField,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<NumberField>,
    pub boundary: bool,
}

impl CertificateDocument {
    fn from_sets(sets: &DemanderSets, m: usize) -> Self {
        CertificateDocument {
            demanders: (0..m).map(|j| sets.demanders(j).to_vec()).collect(),
            boundary_voters: (0..m).map(|j| sets.boundary_voters(j).to_vec()).collect(),
            multiplier: NumberField::from_rational(sets.multiplier()),
            epsilon: sets.epsilon().map(NumberField::from_rational),
            boundary: sets.is_boundary(),
        }
    }
}

/// Runs a mechanism and assembles the result document: exact outcome,
/// normalization parameters where the mechanism has them, per-voter
/// distances, social cost, and (for independent markets) the certificate.
pub fn run_mechanism(mechanism: &Mechanism, profile: &Profile) -> Result<RunDocument> {
    let outcome = mechanism.apply(profile)?;
    let voter_distances = profile
        .reports()
        .iter()
        .map(|r| outcome.l1_distance(r))
        .collect::<Result<Vec<_>>>()?;
    let social_cost = profile.social_cost(&outcome)?;

    let t_star = mechanism.t_star(profile);
    let mut x_star = None;
    let mut lp_certificate = None;
    if matches!(mechanism, Mechanism::IndependentMarkets) {
        let (x, prices) = im_via_markets(profile)?;
        debug_assert_eq!(prices, outcome);
        x_star = Some(x);
        lp_certificate = Some(CertificateDocument::from_sets(
            &verify_lp_certificate(profile, &outcome)?,
            profile.m(),
        ));
    }
    let fixed_point_iterations = match mechanism {
        Mechanism::Parimutuel { tolerance } => {
            Some(parimutuel_consensus(profile, *tolerance)?.iterations)
        }
        _ => None,
    };

    Ok(RunDocument {
        mechanism: mechanism.id().to_string(),
        outcome: numbers(outcome.weights()),
        t_star: t_star.as_ref().map(NumberField::from_rational),
        x_star: x_star.as_ref().map(NumberField::from_rational),
        voter_distances: numbers(&voter_distances),
        social_cost: NumberField::from_rational(&social_cost),
        lp_certificate,
        fixed_point_iterations,
    })
}

/// A sampled phantom movie, ready for CSV or JSON emission.
#[derive(Debug, Clone)]
pub struct TrajectoryTable {
    pub n: usize,
    pub m: usize,
    pub rows: Vec<TrajectoryRow>,
}

/// Builds the trajectory table for a phantom-backed mechanism: rows at the
/// uniform sample times, all trajectory breakpoints, and `t*`, in time
/// order. The median-sum column is weakly increasing down the table.
pub fn trajectory_table(
    mechanism: &Mechanism,
    profile: &Profile,
    samples: usize,
) -> Result<TrajectoryTable> {
    let system = match mechanism {
        Mechanism::IndependentMarkets => {
            crate::mechanisms::im_phantom_system(profile.n())
        }
        Mechanism::Utilitarian => crate::mechanisms::fstar_phantom_system(profile.n()),
        _ => {
            return Err(Error::UnsupportedOperation {
                id: mechanism.id().to_string(),
                operation: "trajectory export (no phantom system)".to_string(),
            })
        }
    };
    let rows = trajectory_rows(&system, profile, samples)?;
    Ok(TrajectoryTable {
        n: profile.n(),
        m: profile.m(),
        rows,
    })
}

impl TrajectoryTable {
    pub fn header(&self) -> Vec<String> {
        let mut header = vec!["t".to_string()];
        header.extend((0..=self.n).map(|k| format!("f_{k}")));
        header.extend((1..=self.m).map(|j| format!("median_{j}")));
        header.push("median_sum".to_string());
        header
    }

    /// Plot-ready CSV with decimal values.
    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        for row in &self.rows {
            out.push('\n');
            let mut fields = vec![to_decimal_string(&row.t, DECIMAL_DIGITS)];
            fields.extend(
                row.phantoms
                    .iter()
                    .map(|v| to_decimal_string(v, DECIMAL_DIGITS)),
            );
            fields.extend(
                row.medians
                    .iter()
                    .map(|v| to_decimal_string(v, DECIMAL_DIGITS)),
            );
            fields.push(to_decimal_string(&row.median_sum, DECIMAL_DIGITS));
            out.push_str(&fields.join(","));
        }
        out
    }

    /// Exact JSON rows.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                json!({
                    "t": NumberField::from_rational(&row.t),
                    "phantoms": numbers(&row.phantoms),
                    "medians": numbers(&row.medians),
                    "median_sum": NumberField::from_rational(&row.median_sum),
                })
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("trajectory rows serialize")
    }
}

fn division_strings(division: &Division) -> Value {
    json!(division.to_fraction_strings())
}

fn profile_strings(profile: &Profile) -> Value {
    json!(profile
        .reports()
        .iter()
        .map(Division::to_fraction_strings)
        .collect::<Vec<_>>())
}

fn number(value: &Rational) -> Value {
    json!(NumberField::from_rational(value))
}

fn detail_json(detail: &ViolationDetail) -> Value {
    match detail {
        ViolationDetail::Manipulation {
            voter,
            misreport,
            truthful_outcome,
            manipulated_outcome,
            truthful_distance,
            manipulated_distance,
        } => json!({
            "kind": "manipulation",
            "voter": voter,
            "misreport": division_strings(misreport),
            "truthful_outcome": division_strings(truthful_outcome),
            "manipulated_outcome": division_strings(manipulated_outcome),
            "truthful_distance": number(truthful_distance),
            "manipulated_distance": number(manipulated_distance),
        }),
        ViolationDetail::ParetoImprovement {
            outcome,
            improvement,
        } => json!({
            "kind": "pareto-improvement",
            "outcome": division_strings(outcome),
            "improvement": division_strings(improvement),
        }),
        ViolationDetail::Disproportional { outcome, expected } => json!({
            "kind": "disproportional",
            "outcome": division_strings(outcome),
            "expected": division_strings(expected),
        }),
        ViolationDetail::NonMonotone {
            voter,
            alternative,
            higher_report,
            lower_report,
            higher_outcome,
            lower_outcome,
        } => json!({
            "kind": "non-monotone",
            "voter": voter,
            "alternative": alternative,
            "higher_report": division_strings(higher_report),
            "lower_report": division_strings(lower_report),
            "higher_outcome": division_strings(higher_outcome),
            "lower_outcome": division_strings(lower_outcome),
        }),
        ViolationDetail::ParticipationFailure {
            voter,
            with_distance,
            without_distance,
        } => json!({
            "kind": "participation-failure",
            "voter": voter,
            "with_distance": number(with_distance),
            "without_distance": number(without_distance),
        }),
        ViolationDetail::ReinforcementFailure {
            second_profile,
            separate_outcome,
            combined_outcome,
        } => json!({
            "kind": "reinforcement-failure",
            "second_profile": profile_strings(second_profile),
            "separate_outcome": division_strings(separate_outcome),
            "combined_outcome": division_strings(combined_outcome),
        }),
        ViolationDetail::RangeViolation {
            outcome,
            alternative,
            minimum,
            maximum,
        } => json!({
            "kind": "range-violation",
            "outcome": division_strings(outcome),
            "alternative": alternative,
            "minimum": number(minimum),
            "maximum": number(maximum),
        }),
        ViolationDetail::Asymmetry {
            permutation,
            of_voters,
            base_outcome,
            permuted_outcome,
        } => json!({
            "kind": "asymmetry",
            "permutation": permutation,
            "of_voters": of_voters,
            "base_outcome": division_strings(base_outcome),
            "permuted_outcome": division_strings(permuted_outcome),
        }),
    }
}

/// Structured JSON for a full suite report.
pub fn suite_to_json(suite: &SuiteReport) -> String {
    let axioms: Vec<Value> = suite
        .reports
        .iter()
        .map(|report| {
            let (verdict, counterexample) = match &report.verdict {
                Verdict::Holds => (json!("holds"), Value::Null),
                Verdict::Skipped { reason } => {
                    (json!(format!("skipped({reason})")), Value::Null)
                }
                Verdict::Violated(ce) => (
                    json!("violated"),
                    json!({
                        "profile": profile_strings(&ce.profile),
                        "detail": detail_json(&ce.detail),
                    }),
                ),
            };
            json!({
                "axiom": report.axiom.name(),
                "trials": report.trials,
                "seed": report.seed,
                "verdict": verdict,
                "notes": report.notes,
                "counterexample": counterexample,
                "claimed": suite.claimed.contains(&report.axiom),
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({
        "mechanism": suite.mechanism,
        "seed": suite.seed,
        "claim_violations": suite.claim_violations(),
        "axioms": axioms,
    }))
    .expect("suite report serializes")
}

/// One verdict per line.
pub fn suite_to_lines(suite: &SuiteReport) -> String {
    suite.lines().join("\n")
}

/// A document describing one best-response verification run, exercising the
/// game surface end to end for the CLI.
pub fn nash_report_json(
    profile: &Profile,
    trials: usize,
    seed: u64,
    round_cap: usize,
) -> Result<String> {
    let report =
        crate::game::verify_unique_equilibrium_outcome(profile, trials, seed, round_cap)?;
    let equilibrium = crate::game::equilibrium_spending(profile)?;
    let deviations: Vec<bool> = (0..profile.n())
        .map(|i| {
            find_improving_deviation(&equilibrium, profile, i)
                .map(|d| d.is_some())
        })
        .collect::<Result<_>>()?;
    Ok(serde_json::to_string_pretty(&json!({
        "expected_outcome": division_strings(&report.expected),
        "trials": report.trials,
        "converged": report.converged,
        "non_converged": report.non_converged,
        "mismatched_outcomes": report
            .mismatched
            .iter()
            .map(division_strings)
            .collect::<Vec<_>>(),
        "seed": report.seed,
        "equilibrium_deviation_found": deviations,
    }))
    .expect("nash report serializes"))
}
