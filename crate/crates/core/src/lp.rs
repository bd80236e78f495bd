//! Exact rational linear feasibility: phase-one simplex with Bland's rule,
//! returning either a solution or Farkas multipliers.
//!
//! A Farkas certificate `y` (one multiplier per constraint, `y_i ≥ 0` on
//! `≤` rows) proves infeasibility when `yᵀA ≥ 0` on nonnegative variables,
//! `yᵀA = 0` on free variables and `yᵀb < 0`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("constraint {label:?} references variable {index}, but only {count} exist")]
    UnknownVariable {
        label: String,
        index: usize,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub name: String,
    pub nonneg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub label: String,
    /// Provenance tag, e.g. `reproduction` or `range`.
    pub group: String,
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `A x (= | ≤) b` with per-variable sign constraints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasibilityProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl FeasibilityProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, nonneg: bool) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            nonneg,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        group: &str,
        coeffs: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) {
        self.constraints.push(Constraint {
            label: label.into(),
            group: group.to_string(),
            coeffs,
            relation,
            rhs,
        });
    }

    fn check_indices(&self) -> Result<(), LpError> {
        for c in &self.constraints {
            for (j, _) in &c.coeffs {
                if *j >= self.variables.len() {
                    return Err(LpError::UnknownVariable {
                        label: c.label.clone(),
                        index: *j,
                        count: self.variables.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible { solution: Vec<Rational> },
    Infeasible { farkas: Vec<Rational> },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible { .. })
    }
}

enum Column {
    Var { var: usize, negated: bool },
    Slack,
    Artificial,
}

/// Decides feasibility exactly. The result is deterministic in the order of
/// variables and constraints.
pub fn solve_feasibility(program: &FeasibilityProgram) -> Result<LpOutcome, LpError> {
    program.check_indices()?;
    let m = program.constraints.len();
    let nvars = program.variables.len();

    let mut columns = Vec::new();
    let mut var_cols: Vec<Vec<(usize, bool)>> = vec![Vec::new(); nvars];
    for (j, v) in program.variables.iter().enumerate() {
        var_cols[j].push((columns.len(), false));
        columns.push(Column::Var { var: j, negated: false });
        if !v.nonneg {
            var_cols[j].push((columns.len(), true));
            columns.push(Column::Var { var: j, negated: true });
        }
    }
    let mut slack_of = vec![None; m];
    for (i, c) in program.constraints.iter().enumerate() {
        if c.relation == Relation::Le {
            slack_of[i] = Some(columns.len());
            columns.push(Column::Slack);
        }
    }
    let first_art = columns.len();
    for _ in 0..m {
        columns.push(Column::Artificial);
    }
    let ncols = columns.len();

    // rows: [A' | b'] with b' ≥ 0 and an artificial basis
    let mut sigma = vec![Rational::one(); m];
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for (i, c) in program.constraints.iter().enumerate() {
        let mut row = vec![Rational::zero(); ncols + 1];
        for (j, a) in &c.coeffs {
            for &(col, negated) in &var_cols[*j] {
                if negated {
                    row[col] -= a;
                } else {
                    row[col] += a;
                }
            }
        }
        if let Some(s) = slack_of[i] {
            row[s] = Rational::one();
        }
        row[ncols] = c.rhs.clone();
        if c.rhs.is_negative() {
            sigma[i] = -Rational::one();
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[first_art + i] = Rational::one();
        tab.push(row);
    }
    let mut basis: Vec<usize> = (first_art..first_art + m).collect();

    // reduced costs of the phase-one objective Σ artificials
    let mut obj = vec![Rational::zero(); ncols + 1];
    for row in &tab {
        for (o, v) in obj.iter_mut().zip(row) {
            *o -= v;
        }
    }
    for o in obj.iter_mut().take(first_art + m).skip(first_art) {
        *o = Rational::zero();
    }

    while let Some(enter) = (0..ncols).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[ncols] / &row[enter];
            let better = match &leave {
                None => true,
                Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // phase one is bounded below by 0, so a pivot row always exists
        let (r, _) = leave.expect("phase-one objective is bounded");
        pivot(&mut tab, &mut obj, r, enter);
        basis[r] = enter;
    }

    if obj[ncols].is_negative() {
        // y_i = 1 − reduced cost of artificial i; flip into the original rows
        let farkas = (0..m)
            .map(|i| -(&sigma[i] * (Rational::one() - &obj[first_art + i])))
            .collect();
        return Ok(LpOutcome::Infeasible { farkas });
    }

    let mut values = vec![Rational::zero(); ncols];
    for (i, &b) in basis.iter().enumerate() {
        values[b] = tab[i][ncols].clone();
    }
    let mut solution = vec![Rational::zero(); nvars];
    for (col, kind) in columns.iter().enumerate() {
        if let Column::Var { var, negated } = kind {
            if *negated {
                solution[*var] -= &values[col];
            } else {
                solution[*var] += &values[col];
            }
        }
    }
    Ok(LpOutcome::Feasible { solution })
}

fn pivot(tab: &mut [Vec<Rational>], obj: &mut [Rational], r: usize, c: usize) {
    let inv = tab[r][c].recip();
    for v in tab[r].iter_mut() {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    let pivot_row = tab[r].clone();
    let nonzero: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
    let eliminate = |row: &mut [Rational]| {
        if row[c].is_zero() {
            return;
        }
        let factor = row[c].clone();
        for &j in &nonzero {
            row[j] -= &factor * &pivot_row[j];
        }
    };
    for (i, row) in tab.iter_mut().enumerate() {
        if i != r {
            eliminate(row);
        }
    }
    eliminate(obj);
}

/// Independent exact check that `x` satisfies every constraint.
pub fn check_solution(program: &FeasibilityProgram, x: &[Rational]) -> Result<(), String> {
    if x.len() != program.variables.len() {
        return Err(format!(
            "solution has {} entries for {} variables",
            x.len(),
            program.variables.len()
        ));
    }
    for (v, value) in program.variables.iter().zip(x) {
        if v.nonneg && value.is_negative() {
            return Err(format!("variable {} is negative", v.name));
        }
    }
    for c in &program.constraints {
        let mut lhs = Rational::zero();
        for (j, a) in &c.coeffs {
            let xj = x.get(*j).ok_or_else(|| format!("constraint {} out of range", c.label))?;
            lhs += a * xj;
        }
        let ok = match c.relation {
            Relation::Eq => lhs == c.rhs,
            Relation::Le => lhs <= c.rhs,
        };
        if !ok {
            return Err(format!(
                "constraint {} violated: lhs {} vs rhs {}",
                c.label,
                format_rational(&lhs),
                format_rational(&c.rhs)
            ));
        }
    }
    Ok(())
}

/// Independent exact check of a Farkas certificate.
pub fn check_farkas(program: &FeasibilityProgram, y: &[Rational]) -> Result<(), String> {
    if y.len() != program.constraints.len() {
        return Err(format!(
            "certificate has {} multipliers for {} constraints",
            y.len(),
            program.constraints.len()
        ));
    }
    let mut combined = vec![Rational::zero(); program.variables.len()];
    let mut rhs = Rational::zero();
    for (c, yi) in program.constraints.iter().zip(y) {
        if c.relation == Relation::Le && yi.is_negative() {
            return Err(format!("negative multiplier on inequality {}", c.label));
        }
        if yi.is_zero() {
            continue;
        }
        for (j, a) in &c.coeffs {
            let slot = combined
                .get_mut(*j)
                .ok_or_else(|| format!("constraint {} out of range", c.label))?;
            *slot += yi * a;
        }
        rhs += yi * &c.rhs;
    }
    for (v, coeff) in program.variables.iter().zip(&combined) {
        if v.nonneg && coeff.is_negative() {
            return Err(format!("combined coefficient of {} is negative", v.name));
        }
        if !v.nonneg && !coeff.is_zero() {
            return Err(format!("combined coefficient of free {} is nonzero", v.name));
        }
    }
    if !rhs.is_negative() {
        return Err(format!(
            "combined right-hand side {} is not negative",
            format_rational(&rhs)
        ));
    }
    Ok(())
}
