use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use nclab::cache::VerdictCache;
use nclab::graph::{build_graph_with, GraphError, GraphOptions};
use nclab::indist::density_fingerprint;
use nclab::io::{self, IoError};
use nclab::quantum::{
    cross_check_with_model, parse_quantum_model, quantum_model_to_json, Pairing, QuantumError,
};
use nclab::{
    check_monotonicity, emit_dot, emit_json, enumerate_references, preorder_leq,
    validate_reference, validate_scenario, validate_table, verify_model, DecisionConfig,
    DecisionError, Density, ModelError, Reference, ReferencePolicy, ReferenceSource, Scenario,
    Verdict, Violation,
};

/// Caps, mode flags and cache location for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub max_rays: usize,
    pub max_lp_rows: usize,
    pub faithfulness_shortcut: bool,
    pub faithful_only: bool,
    pub threads: usize,
    pub cache_dir: Option<PathBuf>,
    pub use_cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = DecisionConfig::default();
        Self {
            max_rays: d.max_rays,
            max_lp_rows: d.max_lp_rows,
            faithfulness_shortcut: d.faithfulness_shortcut,
            faithful_only: false,
            threads: 0,
            cache_dir: None,
            use_cache: true,
        }
    }
}

impl RunConfig {
    fn decision(&self) -> DecisionConfig {
        DecisionConfig {
            max_rays: self.max_rays,
            max_lp_rows: self.max_lp_rows,
            faithfulness_shortcut: self.faithfulness_shortcut,
        }
    }

    /// `--cache-dir`, then `$NCLAB_CACHE`, then `.nclab-cache`.
    fn cache(&self) -> Option<VerdictCache> {
        if !self.use_cache {
            return None;
        }
        Some(match &self.cache_dir {
            Some(dir) => VerdictCache::new(dir),
            None => VerdictCache::from_env_or(".nclab-cache"),
        })
    }
}

pub struct Outcome {
    pub report: Value,
    /// Set by commands that produce a verdict.
    pub noncontextual: Option<bool>,
}

impl Outcome {
    fn plain(report: Value) -> Self {
        Self {
            report,
            noncontextual: None,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Invalid(String, Vec<Violation>),
    CapExceeded(String),
    NotOutcomeComplete(Vec<String>),
    Other(String),
}

impl CliError {
    pub fn report(&self) -> Value {
        match self {
            CliError::Io(m) => json!({"status": "io-error", "message": m}),
            CliError::Parse(m) => json!({"status": "parse-error", "message": m}),
            CliError::Invalid(m, v) => json!({"status": "invalid-input", "message": m, "violations": v}),
            CliError::CapExceeded(m) => json!({"status": "cap-exceeded", "message": m}),
            CliError::NotOutcomeComplete(missing) => json!({
                "status": "not-outcome-complete",
                "message": "scenario is not outcome-complete",
                "missing": missing,
            }),
            CliError::Other(m) => json!({"status": "error", "message": m}),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Read { .. } | IoError::Write { .. } => CliError::Io(e.to_string()),
            IoError::Parse { .. } => CliError::Parse(e.to_string()),
            IoError::InvalidTable(v) => CliError::Invalid("invalid table".into(), v),
            IoError::Model(m) => m.into(),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidTable(v) | ModelError::InvalidScenario(v) | ModelError::InvalidReference(v) => {
                CliError::Invalid(e_message(&v), v)
            }
            other => CliError::Invalid(other.to_string(), Vec::new()),
        }
    }
}

fn e_message(v: &[Violation]) -> String {
    v.first().map_or_else(|| "invalid input".into(), ToString::to_string)
}

impl From<DecisionError> for CliError {
    fn from(e: DecisionError) -> Self {
        if e.is_cap_exceeded() {
            return CliError::CapExceeded(e.to_string());
        }
        match e {
            DecisionError::Model(m) => m.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::CapExceeded { .. } => CliError::CapExceeded(e.to_string()),
            GraphError::Model(m) => m.into(),
            GraphError::Decision { ref source, .. } if source.is_cap_exceeded() => {
                CliError::CapExceeded(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::Model(m) => m.into(),
            QuantumError::NotOutcomeComplete(missing) => CliError::NotOutcomeComplete(missing),
            QuantumError::InvalidModel(v) => CliError::Invalid("invalid quantum model".into(), v),
            QuantumError::Decision(d) => d.into(),
            QuantumError::Parse(m) => CliError::Parse(m),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    Ok(io::write_text(path, text)?)
}

fn path_value(path: Option<&Path>) -> Value {
    path.map_or(Value::Null, |p| Value::String(p.display().to_string()))
}

fn status(violations: &[Violation]) -> &'static str {
    if violations.is_empty() {
        "ok"
    } else {
        "invalid"
    }
}

pub fn cmd_validate(table: &Path, scenario: Option<&Path>, reference: Option<&Path>) -> Result<Outcome, CliError> {
    let text = io::read_text(table)?;
    let t = match io::parse_table(&text) {
        Ok(t) => t,
        Err(IoError::InvalidTable(v)) => {
            return Ok(Outcome::plain(json!({"status": "invalid", "violations": v})));
        }
        Err(e) => return Err(e.into()),
    };
    let mut violations = validate_table(&t);
    if let Some(p) = scenario {
        violations.extend(validate_scenario(&t, &io::read_scenario(p)?));
    }
    if let Some(p) = reference {
        violations.extend(validate_reference(&t, &io::read_reference(p)?));
    }
    Ok(Outcome::plain(json!({"status": status(&violations), "violations": violations})))
}

fn parse_density(text: &str, prep: bool) -> Result<Density, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("cannot parse density: {e}")))?;
    Ok(if prep {
        Density::Prep(io::parse_prep_density(&value)?)
    } else {
        Density::Effect(io::parse_effect_density(&value)?)
    })
}

fn strings(v: &[nclab::Rational]) -> Vec<String> {
    v.iter().map(nclab::format_rational).collect()
}

pub fn cmd_indist(table: &Path, reference: &Path, prep: bool, d1: &str, d2: &str) -> Result<Outcome, CliError> {
    let t = io::read_table(table)?;
    let r = io::read_reference(reference)?;
    let v = validate_reference(&t, &r);
    if !v.is_empty() {
        return Err(CliError::Invalid(e_message(&v), v));
    }
    let (a, b) = (parse_density(d1, prep)?, parse_density(d2, prep)?);
    let fa = density_fingerprint(&t, &a, &r)?;
    let fb = density_fingerprint(&t, &b, &r)?;
    Ok(Outcome::plain(json!({
        "status": "ok",
        "indistinguishable": fa == fb,
        "fingerprints": [strings(&fa), strings(&fb)],
    })))
}

fn load_inputs(table: &Path, scenario: &Path) -> Result<(nclab::DataTable, Scenario), CliError> {
    Ok((io::read_table(table)?, io::read_scenario(scenario)?))
}

pub fn cmd_decide(
    table: &Path,
    scenario: &Path,
    reference: Option<&Path>,
    certificate: Option<&Path>,
    config: &RunConfig,
) -> Result<Outcome, CliError> {
    let (t, s) = load_inputs(table, scenario)?;
    let r: Reference = match reference {
        Some(p) => io::read_reference(p)?,
        None => s.as_reference(),
    };
    let decision = nclab::decide_rnc_with(&t, &s, &r, &config.decision())?;
    let verdict = &decision.verdict;

    if let Some(path) = certificate {
        let body = match verdict {
            Verdict::Noncontextual(cert) => {
                let v = verify_model(cert, &t, &s, &r);
                if !v.is_empty() {
                    return Err(CliError::Other(format!("certificate failed verification: {}", v[0])));
                }
                json!({"kind": "ontological-model", "model": cert})
            }
            Verdict::ContextualInfeasible(farkas) => {
                farkas.verify().map_err(|m| CliError::Other(format!("Farkas certificate failed verification: {m}")))?;
                let inequality = farkas.to_inequality()?;
                let multipliers: Vec<Value> = farkas
                    .entries()
                    .iter()
                    .map(|(label, y)| json!({"constraint": label, "multiplier": nclab::format_rational(y)}))
                    .collect();
                json!({"kind": "farkas", "multipliers": multipliers, "inequality": inequality})
            }
            Verdict::ContextualUnfaithful(witness) => json!({"kind": "unfaithful", "witness": witness}),
        };
        write(path, &(serde_json::to_string_pretty(&body).expect("certificate serializes") + "\n"))?;
    }

    Ok(Outcome {
        report: json!({
            "status": verdict.status(),
            "reason": verdict.reason(),
            "ontic_states": verdict.certificate().map(|c| c.ontic_states.len()),
            "certificate_path": path_value(certificate),
            "diagnostics": decision.diagnostics,
        }),
        noncontextual: Some(verdict.is_noncontextual()),
    })
}

pub fn cmd_preorder(table: &Path, scenario: &Path, a: &Path, b: &Path) -> Result<Outcome, CliError> {
    let (t, s) = load_inputs(table, scenario)?;
    let (ra, rb) = (io::read_reference(a)?, io::read_reference(b)?);
    for v in [validate_scenario(&t, &s), validate_reference(&t, &ra), validate_reference(&t, &rb)] {
        if !v.is_empty() {
            return Err(CliError::Invalid(e_message(&v), v));
        }
    }
    let ab = preorder_leq(&t, &s, &ra, &rb)?;
    let ba = preorder_leq(&t, &s, &rb, &ra)?;
    let relation = match (ab, ba) {
        (true, true) => "equivalent",
        (true, false) => "below",
        (false, true) => "above",
        (false, false) => "incomparable",
    };
    Ok(Outcome::plain(json!({"status": "ok", "a_leq_b": ab, "b_leq_a": ba, "relation": relation})))
}

pub enum Family {
    Explicit(PathBuf),
    Enumerate(PathBuf),
}

pub fn cmd_graph(
    table: &Path,
    scenario: &Path,
    family: &Family,
    dot: Option<&Path>,
    json_out: Option<&Path>,
    config: &RunConfig,
) -> Result<Outcome, CliError> {
    let (t, s) = load_inputs(table, scenario)?;
    let v = validate_scenario(&t, &s);
    if !v.is_empty() {
        return Err(CliError::Invalid(e_message(&v), v));
    }
    let mut policy = match family {
        Family::Explicit(p) => ReferencePolicy {
            source: ReferenceSource::Explicit(io::parse_reference_list(&io::read_text(p)?)?),
            faithful_only: false,
        },
        Family::Enumerate(p) => io::parse_reference_policy(&io::read_text(p)?)?,
    };
    policy.faithful_only |= config.faithful_only;
    let refs = enumerate_references(&t, &s, &policy)?;

    let cache = config.cache();
    let options = GraphOptions {
        config: config.decision(),
        threads: config.threads,
        cache: cache.as_ref(),
    };
    let (graph, stats) = build_graph_with(&t, &s, &refs, &options)?;
    eprintln!("classes decided: {}, cache hits: {}", stats.computed, stats.cache_hits);

    if let Some(p) = dot {
        write(p, &emit_dot(&graph))?;
    }
    if let Some(p) = json_out {
        write(p, &emit_json(&graph))?;
    }
    let monotonicity = check_monotonicity(&graph);
    Ok(Outcome::plain(json!({
        "status": "ok",
        "references": refs.len(),
        "nodes": graph.nodes.len(),
        "edges": graph.edges.len(),
        "reduced_edges": graph.reduced_edges.len(),
        "noncontextual_nodes": graph.nodes.iter().filter(|n| n.verdict.noncontextual).count(),
        "monotone": monotonicity.monotone,
        "offending": monotonicity.offending,
        "dot_path": path_value(dot),
        "json_path": path_value(json_out),
    })))
}

pub fn cmd_quantum(
    table: &Path,
    scenario: &Path,
    model: Option<&Path>,
    emit_model: Option<&Path>,
) -> Result<Outcome, CliError> {
    let (t, s) = load_inputs(table, scenario)?;
    let v = validate_scenario(&t, &s);
    if !v.is_empty() {
        return Err(CliError::Invalid(e_message(&v), v));
    }
    let qm = match model {
        Some(p) => parse_quantum_model(&io::read_text(p)?)?,
        None => nclab::diagonal_model(&t, &s)?,
    };
    if let Some(p) = emit_model {
        write(p, &(quantum_model_to_json(&qm) + "\n"))?;
    }
    let check = cross_check_with_model(&qm, &t, &s, &DecisionConfig::default())?;
    let verdict = |nc: bool| if nc { "noncontextual" } else { "contextual" };
    Ok(Outcome {
        report: json!({
            "status": "ok",
            "model": if model.is_some() { "file" } else { "diagonal" },
            "dim": qm.dim,
            // positivity of matrix-paired coordinates is not checked
            "positivity_attested": matches!(qm.pairing, Pairing::Matrix(_)),
            "operational": verdict(check.operational),
            "quantum": verdict(check.quantum),
            "agree": check.agree,
        }),
        noncontextual: Some(check.operational),
    })
}
