//! The same decision approached from the effect side.
//!
//! Effect noncontextuality makes each response function a linear functional
//! `φ` of the effect quotient vector `q_e = (1, Pr(e|P'))_{P' ∈ S_R}`. The
//! admissible functionals form a polytope (responses in `[0, 1]`, trivial
//! effect 1, null effect 0, additive); a model exists iff every preparation
//! is a convex mixture over the polytope's vertices with preparation-side
//! kernel relations holding vertex by vertex. This route never uses the
//! dual cone of the preparation side, so it serves as a cross-check.

use num_traits::{Signed, Zero};

use super::{DecisionConfig, DecisionError};
use crate::cone::{dual_cone_rays_capped, reduce_to_span};
use crate::indist::{effect_matrix, resolved_kernels};
use crate::linalg::{dot, kernel_basis, RationalMatrix};
use crate::lp::{solve_feasibility, FeasibilityProgram, LpOutcome, Relation};
use crate::model::{coarse_grainings, DataTable, EffectKey, ModelError, Reference, Scenario};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransposedOutcome {
    pub noncontextual: bool,
    pub vertices: usize,
    pub program: FeasibilityProgram,
    pub outcome: LpOutcome,
}

/// Vertices of the admissible response polytope, in reduced coordinates,
/// together with the reduced effect vectors.
fn response_vertices(
    u: &[Vec<Rational>],
    r: usize,
    omega: usize,
    null: usize,
    relations: &[(usize, Vec<usize>)],
    cap: usize,
) -> Result<Vec<Vec<Rational>>, DecisionError> {
    // equalities over (φ, t)
    let mut eqs: Vec<Vec<Rational>> = Vec::new();
    let mut row = u[omega].clone();
    row.push(int(-1));
    eqs.push(row);
    let mut row = u[null].clone();
    row.push(int(0));
    eqs.push(row);
    for (whole, parts) in relations {
        let mut row = u[*whole].clone();
        for &p in parts {
            for (x, y) in row.iter_mut().zip(&u[p]) {
                *x -= y;
            }
        }
        row.push(int(0));
        eqs.push(row);
    }
    let kernel = kernel_basis(&RationalMatrix::from_rows(r + 1, eqs));
    let basis = kernel.vectors();
    if basis.is_empty() {
        return Ok(Vec::new());
    }

    // inequality normals in (φ, t): φ·u_e ≥ 0, t − φ·u_e ≥ 0, t ≥ 0
    let mut normals: Vec<Vec<Rational>> = Vec::new();
    for ue in u {
        let mut lo = ue.clone();
        lo.push(int(0));
        let mut hi: Vec<Rational> = ue.iter().map(|x| -x.clone()).collect();
        hi.push(int(1));
        normals.push(lo);
        normals.push(hi);
    }
    let mut t = vec![Rational::zero(); r];
    t.push(int(1));
    normals.push(t);
    let reduced: Vec<Vec<Rational>> = normals
        .iter()
        .map(|a| basis.iter().map(|n| dot(a, n)).collect())
        .collect();

    let rays = dual_cone_rays_capped(&reduced, cap)?;
    let mut vertices = Vec::new();
    for z in rays {
        let mut point = vec![Rational::zero(); r + 1];
        for (zi, n) in z.iter().zip(basis) {
            for (p, x) in point.iter_mut().zip(n) {
                *p += zi * x;
            }
        }
        let t = point.pop().expect("homogenizing coordinate");
        if t.is_positive() {
            vertices.push(point.into_iter().map(|x| x / &t).collect());
        }
    }
    Ok(vertices)
}

/// Decides relative noncontextuality through response-polytope vertices.
/// No faithfulness shortcut is taken.
pub fn decide_transposed(
    table: &DataTable,
    scenario: &Scenario,
    reference: &Reference,
    config: &DecisionConfig,
) -> Result<TransposedOutcome, DecisionError> {
    let s = table.resolve_scenario(scenario)?;
    let rr = table.resolve_reference(reference)?;
    let missing = || ModelError::InvalidScenario(crate::model::validate_scenario(table, scenario));
    let omega = s.effect_position(EffectKey::Trivial).ok_or_else(missing)?;
    let null = s.effect_position(EffectKey::Null).ok_or_else(missing)?;

    let q = effect_matrix(table, &s, &rr);
    let columns: Vec<Vec<Rational>> = (0..q.cols()).map(|j| q.column(j)).collect();
    let reduction = reduce_to_span(q.rows(), &columns)?;
    let u = &reduction.reduced;
    let relations: Vec<(usize, Vec<usize>)> = coarse_grainings(table, &s.effects)
        .into_iter()
        .map(|cg| (cg.whole, cg.parts))
        .collect();
    let vertices = response_vertices(u, reduction.dim(), omega, null, &relations, config.max_rays)?;

    let k_s = resolved_kernels(table, &s, &rr).k_s;
    let mut program = FeasibilityProgram::new();
    let h: Vec<Vec<usize>> = s
        .preps
        .iter()
        .map(|&p| {
            (0..vertices.len())
                .map(|j| program.add_variable(format!("H[{}, v{j}]", table.preparations()[p]), true))
                .collect()
        })
        .collect();
    for (i, &p) in s.preps.iter().enumerate() {
        let name = &table.preparations()[p];
        program.add_constraint(
            format!("normalization {name}"),
            "normalization",
            h[i].iter().map(|&x| (x, int(1))).collect(),
            Relation::Eq,
            int(1),
        );
        for (e, &key) in s.effects.iter().enumerate() {
            let coeffs = vertices
                .iter()
                .enumerate()
                .map(|(j, v)| (h[i][j], dot(v, &u[e])))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            program.add_constraint(
                format!("reproduction {}|{name}", table.effect_label(key)),
                "reproduction",
                coeffs,
                Relation::Eq,
                table.prob_key(key, p),
            );
        }
    }
    for (b, v) in k_s.vectors().iter().enumerate() {
        #[allow(clippy::needless_range_loop)]
        for j in 0..vertices.len() {
            let coeffs = v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (h[i][j], c.clone()))
                .collect();
            program.add_constraint(
                format!("preparation kernel vector {b} at v{j}"),
                "noncontextuality",
                coeffs,
                Relation::Eq,
                int(0),
            );
        }
    }
    let outcome = solve_feasibility(&program)?;
    Ok(TransposedOutcome {
        noncontextual: outcome.is_feasible(),
        vertices: vertices.len(),
        program,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::*;

    #[test]
    fn agrees_on_fixed_instances() {
        let cfg = DecisionConfig::default();
        let t = toy_bit_table();
        let s = toy_bit_scenario();
        assert!(decide_transposed(&t, &s, &s.as_reference(), &cfg).unwrap().noncontextual);

        let t = parity_table();
        let s = parity_scenario();
        let out = decide_transposed(&t, &s, &s.as_reference(), &cfg).unwrap();
        assert!(!out.noncontextual);
        // deterministic strategies of two binary measurements
        assert_eq!(out.vertices, 4);
    }
}
