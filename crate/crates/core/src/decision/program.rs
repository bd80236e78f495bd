use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::{DecisionConfig, DecisionError, Fragment, OntModelCertificate};
use crate::cone::{dual_cone_rays_capped, reduce_to_span};
use crate::linalg::{dot, independent_subset};
use crate::lp::{FeasibilityProgram, Relation};
use crate::rational::{int, Rational};

/// The ray-expanded feasibility program of a fragment.
#[derive(Debug, Clone)]
pub struct RayProgram {
    pub program: FeasibilityProgram,
    /// `weights[k][P] = r_k · s_P` in reduced coordinates.
    pub weights: Vec<Vec<Rational>>,
    pub reduced_dimension: usize,
    /// `var[e][k]`, `None` for the null effect.
    var: Vec<Option<Vec<usize>>>,
}

pub fn ontic_label(k: usize) -> String {
    format!("lambda{k}")
}

pub fn build_program(fragment: &Fragment, config: &DecisionConfig) -> Result<RayProgram, DecisionError> {
    let n = fragment.generators.first().map_or(0, Vec::len);
    let reduction = reduce_to_span(n, &fragment.generators)?;
    let rays = dual_cone_rays_capped(&reduction.reduced, config.max_rays)?;
    let weights: Vec<Vec<Rational>> = rays
        .iter()
        .map(|r| reduction.reduced.iter().map(|t| dot(r, t)).collect())
        .collect();

    let mut program = FeasibilityProgram::new();
    let ne = fragment.effect_labels.len();
    let var: Vec<Option<Vec<usize>>> = (0..ne)
        .map(|e| {
            (e != fragment.null).then(|| {
                (0..rays.len())
                    .map(|k| {
                        program.add_variable(format!("G[{}, {}]", fragment.effect_labels[e], ontic_label(k)), true)
                    })
                    .collect()
            })
        })
        .collect();

    // per-ray linear relations: coarse-grainings first, then K_E
    let mut relations: Vec<(Vec<Rational>, String, &str)> = Vec::new();
    for cg in &fragment.coarse_grainings {
        let mut v = vec![Rational::zero(); ne];
        v[cg.whole] += int(1);
        for &p in &cg.parts {
            v[p] -= int(1);
        }
        let parts: Vec<&str> = cg.parts.iter().map(|&p| fragment.effect_labels[p].as_str()).collect();
        relations.push((
            v,
            format!("{} = {}", fragment.effect_labels[cg.whole], parts.join(" + ")),
            "additivity",
        ));
    }
    for (i, w) in fragment.k_e.vectors().iter().enumerate() {
        relations.push((w.clone(), format!("effect kernel vector {i}"), "noncontextuality"));
    }
    for (v, _, _) in relations.iter_mut() {
        v[fragment.null] = Rational::zero();
    }
    let vectors: Vec<Vec<Rational>> = relations.iter().map(|(v, _, _)| v.clone()).collect();
    let keep = independent_subset(ne, &vectors);

    let rows = ne * fragment.prep_labels.len()
        + rays.len() * (ne.saturating_sub(2) + keep.len());
    if rows > config.max_lp_rows {
        return Err(DecisionError::TooManyRows {
            rows,
            cap: config.max_lp_rows,
        });
    }

    for (e, vars) in var.iter().enumerate() {
        let Some(vars) = vars else { continue };
        for (p, prep) in fragment.prep_labels.iter().enumerate() {
            let coeffs = vars
                .iter()
                .zip(&weights)
                .filter(|(_, w)| !w[p].is_zero())
                .map(|(&x, w)| (x, w[p].clone()))
                .collect();
            program.add_constraint(
                format!("reproduction {}|{}", fragment.effect_labels[e], prep),
                "reproduction",
                coeffs,
                Relation::Eq,
                fragment.stats[e][p].clone(),
            );
        }
    }
    let omega = var[fragment.omega].clone().expect("trivial effect is not null");
    for (e, vars) in var.iter().enumerate() {
        let Some(vars) = vars else { continue };
        if e == fragment.omega {
            continue;
        }
        for k in 0..rays.len() {
            program.add_constraint(
                format!("range {} <= trivial at {}", fragment.effect_labels[e], ontic_label(k)),
                "range",
                vec![(vars[k], int(1)), (omega[k], int(-1))],
                Relation::Le,
                Rational::zero(),
            );
        }
    }
    for &i in &keep {
        let (v, name, group) = &relations[i];
        for k in 0..rays.len() {
            let coeffs = v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| (var[e].as_ref().expect("null coefficient dropped")[k], c.clone()))
                .collect();
            program.add_constraint(
                format!("{group}: {name} at {}", ontic_label(k)),
                group,
                coeffs,
                Relation::Eq,
                Rational::zero(),
            );
        }
    }

    Ok(RayProgram {
        program,
        weights,
        reduced_dimension: reduction.dim(),
        var,
    })
}

impl RayProgram {
    /// Reads the ontological model off a feasible solution.
    pub fn extract(&self, fragment: &Fragment, g: &[Rational]) -> OntModelCertificate {
        let omega = self.var[fragment.omega].as_ref().expect("trivial effect is not null");
        let alive: Vec<usize> = (0..self.weights.len())
            .filter(|&k| g[omega[k]].is_positive())
            .collect();
        let ontic_states: Vec<String> = alive.iter().map(|&k| ontic_label(k)).collect();

        let mut mu = BTreeMap::new();
        for (p, prep) in fragment.prep_labels.iter().enumerate() {
            let dist = alive
                .iter()
                .map(|&k| (ontic_label(k), &g[omega[k]] * &self.weights[k][p]))
                .collect();
            mu.insert(prep.clone(), dist);
        }
        let mut xi = BTreeMap::new();
        for (e, label) in fragment.effect_labels.iter().enumerate() {
            let response = alive
                .iter()
                .map(|&k| {
                    let value = match &self.var[e] {
                        None => Rational::zero(),
                        Some(vars) => &g[vars[k]] / &g[omega[k]],
                    };
                    (ontic_label(k), value)
                })
                .collect();
            xi.insert(label.clone(), response);
        }
        OntModelCertificate {
            ontic_states,
            mu,
            xi,
        }
    }
}
