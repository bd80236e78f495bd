//! The relative noncontextuality graph over a family of references.
//!
//! Vertices are classes of references inducing the same kernel pair, so the
//! strict preorder between classes is a partial order and the graph is
//! acyclic. Each vertex carries the verdict of [`decide_rnc`] for its
//! representative; refining a reference can never turn a noncontextual
//! verdict into a contextual one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cache::{CachedVerdict, VerdictCache};
use crate::decision::{decide_rnc_with, verify_model, DecisionConfig, DecisionError};
use crate::indist::{is_faithful, kernels, kernels_leq, KernelPair};
use crate::io::ProceduresFile;
use crate::model::{DataTable, EffectRef, ModelError, Reference, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("enumeration would produce {count} references, above the cap {cap}")]
    CapExceeded { count: u128, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("decision failed for class {node} after {completed} of {total} classes: {source}")]
    Decision {
        node: String,
        completed: usize,
        total: usize,
        source: DecisionError,
    },
}

/// Where the reference family comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReferenceSource {
    Explicit(Vec<Reference>),
    /// Every subset of the pools, added to the fixed procedures, in binary
    /// counting order (bit `i` selects pool item `i`; preparations first).
    PowerSet {
        prep_pool: Vec<String>,
        effect_pool: Vec<EffectRef>,
        fixed_preps: Vec<String>,
        fixed_effects: Vec<EffectRef>,
        max_references: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferencePolicy {
    pub source: ReferenceSource,
    /// Drop references that are not faithful to the scenario.
    pub faithful_only: bool,
}

pub fn enumerate_references(
    table: &DataTable,
    scenario: &Scenario,
    policy: &ReferencePolicy,
) -> Result<Vec<Reference>, GraphError> {
    let family = match &policy.source {
        ReferenceSource::Explicit(refs) => refs.clone(),
        ReferenceSource::PowerSet {
            prep_pool,
            effect_pool,
            fixed_preps,
            fixed_effects,
            max_references,
        } => {
            let n = prep_pool.len() + effect_pool.len();
            let count: u128 = if n >= 127 { u128::MAX } else { 1u128 << n };
            if count > *max_references as u128 {
                return Err(GraphError::CapExceeded {
                    count,
                    cap: *max_references,
                });
            }
            (0..count as u64)
                .map(|mask| {
                    let mut preparations = fixed_preps.clone();
                    let mut effects = fixed_effects.clone();
                    for (i, p) in prep_pool.iter().enumerate() {
                        if mask & (1 << i) != 0 && !preparations.contains(p) {
                            preparations.push(p.clone());
                        }
                    }
                    for (i, e) in effect_pool.iter().enumerate() {
                        if mask & (1 << (i + prep_pool.len())) != 0 && !effects.contains(e) {
                            effects.push(e.clone());
                        }
                    }
                    Reference {
                        preparations,
                        effects,
                    }
                })
                .collect()
        }
    };
    if !policy.faithful_only {
        return Ok(family);
    }
    let mut out = Vec::new();
    for r in family {
        if is_faithful(table, scenario, &r)?.faithful {
            out.push(r);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeVerdict {
    pub noncontextual: bool,
    pub reason: Option<String>,
    pub ontic_states: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceClass {
    /// Hex prefix of the SHA-256 of the kernel signature.
    pub id: String,
    pub signature: KernelPair,
    pub faithful: bool,
    pub verdict: NodeVerdict,
    #[serde(serialize_with = "ser_reference")]
    pub representative: Reference,
    #[serde(serialize_with = "ser_references")]
    pub members: Vec<Reference>,
}

fn ser_reference<S: serde::Serializer>(r: &Reference, s: S) -> Result<S::Ok, S::Error> {
    ProceduresFile::from_parts(&r.preparations, &r.effects).serialize(s)
}

fn ser_references<S: serde::Serializer>(rs: &[Reference], s: S) -> Result<S::Ok, S::Error> {
    rs.iter()
        .map(|r| ProceduresFile::from_parts(&r.preparations, &r.effects))
        .collect::<Vec<_>>()
        .serialize(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NcGraph {
    pub nodes: Vec<ReferenceClass>,
    /// Every strict preorder pair `(lower, higher)` between classes.
    pub edges: Vec<(usize, usize)>,
    /// Transitive reduction of `edges`.
    pub reduced_edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphStats {
    pub cache_hits: usize,
    pub computed: usize,
}

#[derive(Default)]
pub struct GraphOptions<'a> {
    pub config: DecisionConfig,
    /// Worker threads for per-class decisions; 0 uses the rayon default.
    pub threads: usize,
    pub cache: Option<&'a VerdictCache>,
}

fn signature_id(signature: &KernelPair) -> String {
    let text = serde_json::to_string(signature).expect("signature serializes");
    hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
}

/// Order-independent sort key of a reference.
fn reference_key(r: &Reference) -> (Vec<String>, Vec<String>) {
    let mut p = r.preparations.clone();
    p.sort();
    p.dedup();
    let mut e: Vec<String> = r.effects.iter().map(EffectRef::label).collect();
    e.sort();
    e.dedup();
    (p, e)
}

pub fn build_graph(
    table: &DataTable,
    scenario: &Scenario,
    refs: &[Reference],
) -> Result<NcGraph, GraphError> {
    build_graph_with(table, scenario, refs, &GraphOptions::default()).map(|(g, _)| g)
}

pub fn build_graph_with(
    table: &DataTable,
    scenario: &Scenario,
    refs: &[Reference],
    options: &GraphOptions<'_>,
) -> Result<(NcGraph, GraphStats), GraphError> {
    let mut classes: BTreeMap<KernelPair, Vec<Reference>> = BTreeMap::new();
    for r in refs {
        classes.entry(kernels(table, scenario, r)?).or_default().push(r.clone());
    }
    let mut grouped: Vec<(String, KernelPair, Vec<Reference>)> = classes
        .into_iter()
        .map(|(sig, mut members)| {
            members.sort_by_key(reference_key);
            members.dedup_by(|a, b| reference_key(a) == reference_key(b));
            (signature_id(&sig), sig, members)
        })
        .collect();
    grouped.sort_by(|a, b| a.0.cmp(&b.0));

    let hits = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let total = grouped.len();
    let decide = |(id, sig, members): &(String, KernelPair, Vec<Reference>)| {
        let rep = &members[0];
        let faithful = is_faithful(table, scenario, rep)?.faithful;
        let key = options.cache.map(|_| VerdictCache::key(table, scenario, sig));
        if let (Some(cache), Some(key)) = (options.cache, &key) {
            if let Some(hit) = cache.load(key) {
                let valid = match &hit.certificate {
                    Some(cert) => hit.status == "noncontextual" && verify_model(cert, table, scenario, rep).is_empty(),
                    None => hit.status == "contextual",
                };
                if valid {
                    hits.fetch_add(1, Ordering::Relaxed);
                    done.fetch_add(1, Ordering::Relaxed);
                    return Ok(node_verdict(faithful, &hit));
                }
            }
        }
        let decision = decide_rnc_with(table, scenario, rep, &options.config).map_err(|source| {
            GraphError::Decision {
                node: id.clone(),
                completed: done.load(Ordering::Relaxed),
                total,
                source,
            }
        })?;
        let cached = CachedVerdict {
            status: decision.verdict.status().to_string(),
            reason: decision.verdict.reason().map(str::to_string),
            certificate: decision.verdict.certificate().cloned(),
        };
        if let (Some(cache), Some(key)) = (options.cache, &key) {
            let _ = cache.store(key, &cached);
        }
        done.fetch_add(1, Ordering::Relaxed);
        Ok(node_verdict(faithful, &cached))
    };

    let results: Vec<Result<(bool, NodeVerdict), GraphError>> = if options.threads == 1 {
        grouped.iter().map(decide).collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if options.threads > 0 {
            builder = builder.num_threads(options.threads);
        }
        match builder.build() {
            Ok(pool) => pool.install(|| grouped.par_iter().map(decide).collect()),
            Err(_) => grouped.iter().map(decide).collect(),
        }
    };

    let mut nodes = Vec::with_capacity(total);
    for ((id, signature, members), result) in grouped.into_iter().zip(results) {
        let (faithful, verdict) = result?;
        nodes.push(ReferenceClass {
            id,
            signature,
            faithful,
            verdict,
            representative: members[0].clone(),
            members,
        });
    }

    let mut edges = Vec::new();
    for a in 0..nodes.len() {
        for b in 0..nodes.len() {
            if a != b && kernels_leq(&nodes[a].signature, &nodes[b].signature) {
                edges.push((a, b));
            }
        }
    }
    let reduced_edges = transitive_reduction(&edges);
    let cache_hits = hits.into_inner();
    let stats = GraphStats {
        cache_hits,
        computed: total - cache_hits,
    };
    Ok((
        NcGraph {
            nodes,
            edges,
            reduced_edges,
        },
        stats,
    ))
}

fn node_verdict(faithful: bool, v: &CachedVerdict) -> (bool, NodeVerdict) {
    (
        faithful,
        NodeVerdict {
            noncontextual: v.status == "noncontextual",
            reason: v.reason.clone(),
            ontic_states: v.certificate.as_ref().map(|c| c.ontic_states.len()),
        },
    )
}

/// Drops `(a, b)` when some `c` has `(a, c)` and `(c, b)`; `edges` must be
/// transitively closed.
pub fn transitive_reduction(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let set: std::collections::BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    edges
        .iter()
        .copied()
        .filter(|&(a, b)| {
            !set
                .iter()
                .any(|&(x, c)| x == a && c != b && set.contains(&(c, b)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub monotone: bool,
    /// `(noncontextual node, contextual node)` ids.
    pub offending: Vec<(String, String)>,
}

/// No edge may lead from a noncontextual class to a contextual one.
pub fn check_monotonicity(g: &NcGraph) -> MonotonicityReport {
    let offending: Vec<(String, String)> = g
        .edges
        .iter()
        .filter(|&&(a, b)| g.nodes[a].verdict.noncontextual && !g.nodes[b].verdict.noncontextual)
        .map(|&(a, b)| (g.nodes[a].id.clone(), g.nodes[b].id.clone()))
        .collect();
    MonotonicityReport {
        monotone: offending.is_empty(),
        offending,
    }
}

fn describe(r: &Reference) -> String {
    let (p, e) = reference_key(r);
    format!("S_R={{{}}}\\nE_R={{{}}}", p.join(","), e.join(","))
}

/// Graphviz rendering of the transitive reduction; noncontextual classes
/// are filled green, contextual ones red, unfaithful ones dashed.
pub fn emit_dot(g: &NcGraph) -> String {
    let mut out = String::from("digraph nc {\n  rankdir=BT;\n  node [shape=box, style=filled, fontname=\"Helvetica\"];\n");
    for n in &g.nodes {
        let (tag, color) = if n.verdict.noncontextual {
            ("YES", "palegreen")
        } else {
            ("NO", "lightcoral")
        };
        let style = if n.faithful { "filled" } else { "filled,dashed" };
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{} ({} refs)\\n{}\", fillcolor=\"{}\", style=\"{}\"];",
            n.id,
            tag,
            n.members.len(),
            describe(&n.representative).replace('"', "\\\""),
            color,
            style
        );
    }
    for &(a, b) in &g.reduced_edges {
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", g.nodes[a].id, g.nodes[b].id);
    }
    out.push_str("}\n");
    out
}

pub fn emit_json(g: &NcGraph) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        nodes: &'a [ReferenceClass],
        edges: Vec<(&'a str, &'a str)>,
        reduced_edges: Vec<(&'a str, &'a str)>,
        monotone: bool,
    }
    let ids = |e: &[(usize, usize)]| -> Vec<(&str, &str)> {
        e.iter()
            .map(|&(a, b)| (g.nodes[a].id.as_str(), g.nodes[b].id.as_str()))
            .collect()
    };
    let mut text = serde_json::to_string_pretty(&Out {
        nodes: &g.nodes,
        edges: ids(&g.edges),
        reduced_edges: ids(&g.reduced_edges),
        monotone: check_monotonicity(g).monotone,
    })
    .expect("graph serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::*;

    fn toy_family_policy(faithful_only: bool) -> ReferencePolicy {
        let t = toy_bit_table();
        let mut pool = t.measurement_effects("M1").unwrap();
        pool.extend(t.measurement_effects("M2").unwrap());
        ReferencePolicy {
            source: ReferenceSource::PowerSet {
                prep_pool: vec![],
                effect_pool: pool,
                fixed_preps: t.preparations().to_vec(),
                fixed_effects: vec![],
                max_references: 64,
            },
            faithful_only,
        }
    }

    #[test]
    fn power_set_counts() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        assert_eq!(enumerate_references(&t, &s, &toy_family_policy(false)).unwrap().len(), 16);
        let faithful = enumerate_references(&t, &s, &toy_family_policy(true)).unwrap();
        assert!(faithful.iter().all(|r| !r.effects.is_empty()));
        let mut small = toy_family_policy(false);
        if let ReferenceSource::PowerSet { max_references, .. } = &mut small.source {
            *max_references = 8;
        }
        assert!(matches!(
            enumerate_references(&t, &s, &small),
            Err(GraphError::CapExceeded { count: 16, cap: 8 })
        ));
    }

    #[test]
    fn toy_family_graph() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        let refs = enumerate_references(&t, &s, &toy_family_policy(false)).unwrap();
        let g = build_graph(&t, &s, &refs).unwrap();
        assert_eq!(g.nodes.len(), 4);
        let yes: Vec<&ReferenceClass> = g.nodes.iter().filter(|n| n.verdict.noncontextual).collect();
        assert_eq!(yes.len(), 1);
        let top = g.nodes.iter().position(|n| n.verdict.noncontextual).unwrap();
        assert!(g.edges.iter().all(|&(a, _)| a != top));
        assert!(check_monotonicity(&g).monotone);
        assert_eq!(g.reduced_edges.len(), 4);
    }

    #[test]
    fn parity_family_edge() {
        let t = parity_table_with_distinguisher();
        let s = parity_scenario();
        let refs = vec![s.as_reference(), parity_distinguishing_reference()];
        let g = build_graph(&t, &s, &refs).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        let (a, b) = g.edges[0];
        assert!(!g.nodes[a].verdict.noncontextual);
        assert!(g.nodes[b].verdict.noncontextual);
    }

    #[test]
    fn forged_violation_is_caught() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        let refs = enumerate_references(&t, &s, &toy_family_policy(false)).unwrap();
        let mut g = build_graph(&t, &s, &refs).unwrap();
        let (a, b) = g.edges[0];
        g.nodes[a].verdict.noncontextual = true;
        g.nodes[b].verdict.noncontextual = false;
        let report = check_monotonicity(&g);
        assert!(!report.monotone);
        assert!(report.offending.contains(&(g.nodes[a].id.clone(), g.nodes[b].id.clone())));
    }

    #[test]
    fn empty_and_single() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        let g = build_graph(&t, &s, &[]).unwrap();
        assert!(g.nodes.is_empty());
        assert_eq!(emit_dot(&g), "digraph nc {\n  rankdir=BT;\n  node [shape=box, style=filled, fontname=\"Helvetica\"];\n}\n");
        let g = build_graph(&t, &s, &[s.as_reference()]).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
        assert!(emit_dot(&g).contains("palegreen"));
    }

    #[test]
    fn node_order_ignores_input_order() {
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        let mut refs = enumerate_references(&t, &s, &toy_family_policy(false)).unwrap();
        let a = emit_json(&build_graph(&t, &s, &refs).unwrap());
        refs.reverse();
        let b = emit_json(&build_graph(&t, &s, &refs).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = VerdictCache::new(dir.path());
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        let refs = enumerate_references(&t, &s, &toy_family_policy(false)).unwrap();
        let opts = GraphOptions {
            cache: Some(&cache),
            threads: 2,
            ..GraphOptions::default()
        };
        let (g1, s1) = build_graph_with(&t, &s, &refs, &opts).unwrap();
        let (g2, s2) = build_graph_with(&t, &s, &refs, &opts).unwrap();
        assert_eq!(s1.cache_hits, 0);
        assert_eq!(s2.cache_hits, 4);
        assert_eq!(emit_json(&g1), emit_json(&g2));
    }
}
