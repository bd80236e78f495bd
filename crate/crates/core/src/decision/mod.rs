//! Relative noncontextuality decisions.
//!
//! Preparation-side noncontextuality forces each ontic state's weight
//! `μ_P(λ)` to be a nonnegative linear functional of the quotient vector
//! `s_P = (1, Pr(k|P))_{k ∈ E_R}`; every such functional is a nonnegative
//! combination of extreme rays `r_k` of the dual cone of `cone{s_P}`.
//! Grouping ontic states by ray gives variables `G[e,k] = Σ_λ c_{λk} ξ_e(λ)`
//! and the existence question becomes the linear feasibility problem
//!
//! ```text
//! Σ_k G[e,k]·(r_k·s_P) = Pr(e|P)      e ∈ E, P ∈ S
//! 0 ≤ G[e,k] ≤ G[Ω,k],  G[∅,k] = 0
//! Σ_e w_e G[e,k] = 0                  w in K_E or a coarse-graining relation
//! ```
//!
//! A feasible `G` yields the model `Λ = {k : G[Ω,k] > 0}`,
//! `μ_P(k) = G[Ω,k]·(r_k·s_P)`, `ξ_e(k) = G[e,k]/G[Ω,k]`; conversely any
//! model folds into such a `G`, so the reduction is exact.

mod certificate;
mod program;
pub mod transposed;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cone::ConeError;
use crate::indist::{resolved_faithfulness, resolved_kernels, FaithfulnessWitness};
use crate::linalg::SubspaceBasis;
use crate::lp::{check_farkas, FeasibilityProgram, LpError};
use crate::model::{
    coarse_grainings, validate_reference, validate_scenario, validate_table, CoarseGraining,
    DataTable, EffectKey, ModelError, Reference, Scenario,
};
use crate::rational::Rational;

pub use certificate::{
    farkas_to_inequality, verify_model, InequalityWitness, OntModelCertificate, WitnessTerm,
};
pub use program::{build_program, RayProgram};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecisionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("linear program has {rows} constraints, above the configured cap {cap}")]
    TooManyRows { rows: usize, cap: usize },
    #[error("program is not infeasible")]
    NotInfeasible,
    #[error("certificate failed verification: {0}")]
    Unverifiable(String),
}

impl DecisionError {
    /// Whether the run stopped on a configured resource cap.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(
            self,
            DecisionError::TooManyRows { .. } | DecisionError::Cone(ConeError::TooManyRays { .. })
        )
    }
}

/// Resource caps and switches; exceeding a cap is an error, never a verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionConfig {
    pub max_rays: usize,
    pub max_lp_rows: usize,
    /// Return early for unfaithful references instead of running the LP.
    pub faithfulness_shortcut: bool,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        Self {
            max_rays: 5_000,
            max_lp_rows: 200_000,
            faithfulness_shortcut: true,
        }
    }
}

/// Exact multipliers proving the decision program infeasible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub program: FeasibilityProgram,
    pub multipliers: Vec<Rational>,
}

impl FarkasCertificate {
    pub fn verify(&self) -> Result<(), String> {
        check_farkas(&self.program, &self.multipliers)
    }

    pub fn to_inequality(&self) -> Result<InequalityWitness, DecisionError> {
        let outcome = crate::lp::LpOutcome::Infeasible {
            farkas: self.multipliers.clone(),
        };
        farkas_to_inequality(&outcome, &self.program)
    }

    /// `(constraint label, multiplier)` for every nonzero multiplier.
    pub fn entries(&self) -> Vec<(String, Rational)> {
        self.program
            .constraints
            .iter()
            .zip(&self.multipliers)
            .filter(|(_, y)| !num_traits::Zero::is_zero(*y))
            .map(|(c, y)| (c.label.clone(), y.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Noncontextual(OntModelCertificate),
    ContextualUnfaithful(FaithfulnessWitness),
    ContextualInfeasible(FarkasCertificate),
}

impl Verdict {
    pub fn is_noncontextual(&self) -> bool {
        matches!(self, Verdict::Noncontextual(_))
    }

    pub fn status(&self) -> &'static str {
        if self.is_noncontextual() {
            "noncontextual"
        } else {
            "contextual"
        }
    }

    pub fn reason(&self) -> Option<&'static str> {
        match self {
            Verdict::Noncontextual(_) => None,
            Verdict::ContextualUnfaithful(_) => Some("unfaithful"),
            Verdict::ContextualInfeasible(_) => Some("infeasible"),
        }
    }

    pub fn certificate(&self) -> Option<&OntModelCertificate> {
        match self {
            Verdict::Noncontextual(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub reduced_dimension: usize,
    pub rays: usize,
    pub lp_variables: usize,
    pub lp_constraints: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

/// A decision instance stripped to what the ray program needs. Built from a
/// table by [`decide_rnc`]; other front ends (such as the quantum bridge)
/// may build it from their own vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub prep_labels: Vec<String>,
    pub effect_labels: Vec<String>,
    /// Quotient vectors, one per preparation, all of the same length.
    pub generators: Vec<Vec<Rational>>,
    /// `stats[e][P]`.
    pub stats: Vec<Vec<Rational>>,
    pub coarse_grainings: Vec<CoarseGraining>,
    /// Effect-side indistinguishability kernel over the effect list.
    pub k_e: SubspaceBasis,
    pub omega: usize,
    pub null: usize,
}

/// Either a verified model or a verified infeasibility proof for a fragment.
pub fn decide_fragment(
    fragment: &Fragment,
    config: &DecisionConfig,
) -> Result<(Result<OntModelCertificate, FarkasCertificate>, Diagnostics), DecisionError> {
    let start = Instant::now();
    let rp = build_program(fragment, config)?;
    let outcome = crate::lp::solve_feasibility(&rp.program)?;
    let mut diagnostics = Diagnostics {
        reduced_dimension: rp.reduced_dimension,
        rays: rp.weights.len(),
        lp_variables: rp.program.variables.len(),
        lp_constraints: rp.program.constraints.len(),
        elapsed: Duration::ZERO,
    };
    let result = match outcome {
        crate::lp::LpOutcome::Feasible { solution } => {
            crate::lp::check_solution(&rp.program, &solution).map_err(DecisionError::Unverifiable)?;
            Ok(rp.extract(fragment, &solution))
        }
        crate::lp::LpOutcome::Infeasible { farkas } => {
            let cert = FarkasCertificate {
                program: rp.program,
                multipliers: farkas,
            };
            cert.verify().map_err(DecisionError::Unverifiable)?;
            Err(cert)
        }
    };
    diagnostics.elapsed = start.elapsed();
    Ok((result, diagnostics))
}

fn ensure_valid(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
) -> Result<(), ModelError> {
    let v = validate_table(table);
    if !v.is_empty() {
        return Err(ModelError::InvalidTable(v));
    }
    let v = validate_scenario(table, scenario);
    if !v.is_empty() {
        return Err(ModelError::InvalidScenario(v));
    }
    let v = validate_reference(table, reference);
    if !v.is_empty() {
        return Err(ModelError::InvalidReference(v));
    }
    Ok(())
}

/// The fragment of `(table, scenario)` with quotient vectors taken against
/// `reference`.
pub fn table_fragment(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
) -> Result<Fragment, ModelError> {
    let s = table.resolve_scenario(scenario)?;
    let r = table.resolve_reference(reference)?;
    let kernels = resolved_kernels(table, &s, &r);
    let fingerprint = crate::indist::prep_matrix(table, &s, &r);
    let position = |key: EffectKey| {
        s.effect_position(key)
            .ok_or_else(|| ModelError::InvalidScenario(validate_scenario(table, scenario)))
    };
    Ok(Fragment {
        prep_labels: s.preps.iter().map(|&p| table.preparations()[p].clone()).collect(),
        effect_labels: s.effects.iter().map(|&e| table.effect_label(e)).collect(),
        generators: (0..s.preps.len()).map(|j| fingerprint.column(j)).collect(),
        stats: s
            .effects
            .iter()
            .map(|&e| s.preps.iter().map(|&p| table.prob_key(e, p)).collect())
            .collect(),
        coarse_grainings: coarse_grainings(table, &s.effects),
        k_e: kernels.k_e,
        omega: position(EffectKey::Trivial)?,
        null: position(EffectKey::Null)?,
    })
}

/// Decides whether the table restricted to `scenario` admits an ontological
/// model that is noncontextual relative to `reference`.
pub fn decide_rnc(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
) -> Result<Decision, DecisionError> {
    decide_rnc_with(table, scenario, reference, &DecisionConfig::default())
}

pub fn decide_rnc_with(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
    config: &DecisionConfig,
) -> Result<Decision, DecisionError> {
    let start = Instant::now();
    ensure_valid(table, scenario, reference)?;
    if config.faithfulness_shortcut {
        let s = table.resolve_scenario(scenario)?;
        let r = table.resolve_reference(reference)?;
        let report = resolved_faithfulness(table, &s, &resolved_kernels(table, &s, &r));
        if let Some(witness) = report.witness {
            return Ok(Decision {
                verdict: Verdict::ContextualUnfaithful(witness),
                diagnostics: Diagnostics {
                    elapsed: start.elapsed(),
                    ..Diagnostics::default()
                },
            });
        }
    }
    let fragment = table_fragment(table, scenario, reference)?;
    let (result, mut diagnostics) = decide_fragment(&fragment, config)?;
    let verdict = match result {
        Ok(cert) => {
            let violations = verify_model(&cert, table, scenario, reference);
            if let Some(v) = violations.first() {
                return Err(DecisionError::Unverifiable(v.to_string()));
            }
            Verdict::Noncontextual(cert)
        }
        Err(farkas) => Verdict::ContextualInfeasible(farkas),
    };
    diagnostics.elapsed = start.elapsed();
    Ok(Decision {
        verdict,
        diagnostics,
    })
}
