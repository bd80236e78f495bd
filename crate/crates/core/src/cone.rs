//! Extreme rays of polyhedral dual cones by the double description method.

use num_traits::{One, Signed, Zero};

use crate::linalg::{dot, independent_subset, inverse, rref, RationalMatrix};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConeError {
    #[error("cone has ambient dimension 0")]
    ZeroDimension,
    #[error("generators are all zero")]
    AllZero,
    #[error("generators span a {rank}-dimensional subspace of R^{dim}; reduce to the span first")]
    NotFullDimensional { rank: usize, dim: usize },
    #[error("generator has length {found}, expected {expected}")]
    BadLength { found: usize, expected: usize },
    #[error("ray count {count} exceeds the configured cap {cap}")]
    TooManyRays { count: usize, cap: usize },
}

/// Coordinates of the generators inside their own span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanReduction {
    /// `r × n` map taking an original vector in the span to reduced coordinates.
    pub basis_change: RationalMatrix,
    pub reduced: Vec<Vec<Rational>>,
    pub identity: bool,
}

impl SpanReduction {
    pub fn dim(&self) -> usize {
        self.basis_change.rows()
    }

    /// Pulls a reduced-space functional back to the original coordinates.
    pub fn pullback(&self, h: &[Rational]) -> Vec<Rational> {
        self.basis_change.transpose().mul_vec(h)
    }
}

/// Re-expresses generators of length `n` in coordinates of their span.
pub fn reduce_to_span(n: usize, generators: &[Vec<Rational>]) -> Result<SpanReduction, ConeError> {
    for g in generators {
        if g.len() != n {
            return Err(ConeError::BadLength {
                found: g.len(),
                expected: n,
            });
        }
    }
    let m = RationalMatrix::from_columns(n, generators);
    // rref([M | I]) = [E·M | E]
    let mut aug = RationalMatrix::zeros(n, generators.len() + n);
    for i in 0..n {
        for j in 0..generators.len() {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, generators.len() + i)] = Rational::one();
    }
    let (r, pivots) = rref(&aug);
    let rank = pivots.iter().filter(|&&p| p < generators.len()).count();
    if rank == 0 {
        return Err(ConeError::AllZero);
    }
    if rank == n {
        return Ok(SpanReduction {
            basis_change: RationalMatrix::identity(n),
            reduced: generators.to_vec(),
            identity: true,
        });
    }
    let basis_change = RationalMatrix::from_rows(
        n,
        (0..rank)
            .map(|i| (0..n).map(|j| r[(i, generators.len() + j)].clone()).collect())
            .collect(),
    );
    let reduced = (0..generators.len())
        .map(|j| (0..rank).map(|i| r[(i, j)].clone()).collect())
        .collect();
    Ok(SpanReduction {
        basis_change,
        reduced,
        identity: false,
    })
}

struct Ray {
    v: Vec<Rational>,
    /// Sorted indices of inserted generators this ray annihilates.
    tight: Vec<usize>,
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn rank_of(generators: &[Vec<Rational>], idx: &[usize], d: usize) -> usize {
    if idx.is_empty() {
        return 0;
    }
    let m = RationalMatrix::from_rows(d, idx.iter().map(|&i| generators[i].clone()).collect());
    m.rank()
}

/// Scales so the first nonzero entry has absolute value one.
pub fn normalize_ray(v: &mut [Rational]) {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        let scale = first.abs().recip();
        if !scale.is_one() {
            for x in v.iter_mut() {
                *x *= &scale;
            }
        }
    }
}

/// Extreme rays of `{h : h·g ≥ 0 for every generator g}`.
///
/// Generators must span their ambient space (so the dual is pointed).
pub fn dual_cone_rays(generators: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>, ConeError> {
    dual_cone_rays_capped(generators, usize::MAX)
}

/// As [`dual_cone_rays`], failing once any intermediate ray set exceeds `cap`.
pub fn dual_cone_rays_capped(
    generators: &[Vec<Rational>],
    cap: usize,
) -> Result<Vec<Vec<Rational>>, ConeError> {
    let d = generators.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(ConeError::ZeroDimension);
    }
    for g in generators {
        if g.len() != d {
            return Err(ConeError::BadLength {
                found: g.len(),
                expected: d,
            });
        }
    }
    let start = independent_subset(d, generators);
    if start.len() < d {
        return Err(ConeError::NotFullDimensional {
            rank: start.len(),
            dim: d,
        });
    }

    // {h : A0·h ≥ 0} is simplicial with rays the columns of A0⁻¹.
    let a0 = RationalMatrix::from_rows(d, start.iter().map(|&i| generators[i].clone()).collect());
    let inv = inverse(&a0).expect("independent rows form an invertible matrix");
    let mut rays: Vec<Ray> = (0..d)
        .map(|j| {
            let mut tight: Vec<usize> = start
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &g)| g)
                .collect();
            tight.sort_unstable();
            Ray {
                v: inv.column(j),
                tight,
            }
        })
        .collect();
    if rays.len() > cap {
        return Err(ConeError::TooManyRays {
            count: rays.len(),
            cap,
        });
    }

    let mut inserted: Vec<usize> = start.clone();
    inserted.sort_unstable();
    for (gi, g) in generators.iter().enumerate() {
        if start.contains(&gi) {
            continue;
        }
        let values: Vec<Rational> = rays.iter().map(|r| dot(&r.v, g)).collect();
        let mut next = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, value) in values.iter().enumerate() {
            if value.is_positive() {
                pos.push(i);
            } else if value.is_negative() {
                neg.push(i);
            }
        }
        for &p in &pos {
            for &n in &neg {
                let common = intersect(&rays[p].tight, &rays[n].tight);
                if common.len() + 2 < d || rank_of(generators, &common, d) != d - 2 {
                    continue;
                }
                let (vp, vn) = (&values[p], &values[n]);
                let mut v: Vec<Rational> = rays[n]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(a, b)| vp * a - vn * b)
                    .collect();
                normalize_ray(&mut v);
                let mut tight = common;
                tight.push(gi);
                tight.sort_unstable();
                next.push(Ray { v, tight });
            }
        }
        for (i, mut ray) in rays.into_iter().enumerate() {
            if values[i].is_zero() {
                ray.tight.push(gi);
                ray.tight.sort_unstable();
                next.push(ray);
            } else if values[i].is_positive() {
                next.push(ray);
            }
        }
        if next.len() > cap {
            return Err(ConeError::TooManyRays {
                count: next.len(),
                cap,
            });
        }
        rays = next;
        inserted.push(gi);
        inserted.sort_unstable();
    }

    let mut out: Vec<Vec<Rational>> = rays
        .into_iter()
        .map(|mut r| {
            normalize_ray(&mut r.v);
            r.v
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kernel_basis;
    use crate::rational::int;
    use proptest::prelude::*;

    fn v(vals: &[i64]) -> Vec<Rational> {
        vals.iter().map(|&x| int(x)).collect()
    }

    /// Every (d−1)-subset of constraints with a one-dimensional solution
    /// space gives a candidate direction; keep the feasible ones.
    fn brute_force_rays(generators: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let d = generators[0].len();
        let n = generators.len();
        let mut out = Vec::new();
        let mut subset = Vec::new();
        fn rec(
            start: usize,
            n: usize,
            k: usize,
            subset: &mut Vec<usize>,
            f: &mut dyn FnMut(&[usize]),
        ) {
            if subset.len() == k {
                f(subset);
                return;
            }
            for i in start..n {
                subset.push(i);
                rec(i + 1, n, k, subset, f);
                subset.pop();
            }
        }
        rec(0, n, d - 1, &mut subset, &mut |idx| {
            let m = RationalMatrix::from_rows(d, idx.iter().map(|&i| generators[i].clone()).collect());
            let k = kernel_basis(&m);
            if k.dim() != 1 {
                return;
            }
            for sign in [1, -1] {
                let cand: Vec<Rational> = k.vectors()[0].iter().map(|x| x * int(sign)).collect();
                if generators.iter().all(|g| !dot(g, &cand).is_negative()) {
                    let mut c = cand.clone();
                    normalize_ray(&mut c);
                    out.push(c);
                }
            }
        });
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn orthant_is_self_dual() {
        let basis = vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])];
        let mut rays = dual_cone_rays(&basis).unwrap();
        rays.sort();
        let mut expected = basis.clone();
        expected.sort();
        assert_eq!(rays, expected);
    }

    #[test]
    fn square_cone() {
        let gens = vec![v(&[1, 1, 1]), v(&[1, 1, -1]), v(&[1, -1, 1]), v(&[1, -1, -1])];
        let rays = dual_cone_rays(&gens).unwrap();
        let mut expected = vec![v(&[1, 1, 0]), v(&[1, -1, 0]), v(&[1, 0, 1]), v(&[1, 0, -1])];
        expected.sort();
        assert_eq!(rays, expected);
    }

    #[test]
    fn rank_deficient_input_is_rejected() {
        assert_eq!(
            dual_cone_rays(&[v(&[1, 0])]),
            Err(ConeError::NotFullDimensional { rank: 1, dim: 2 })
        );
        assert_eq!(dual_cone_rays(&[]), Err(ConeError::ZeroDimension));
    }

    #[test]
    fn cap_is_enforced() {
        let gens = vec![v(&[1, 1, 1]), v(&[1, 1, -1]), v(&[1, -1, 1]), v(&[1, -1, -1])];
        assert!(matches!(
            dual_cone_rays_capped(&gens, 3),
            Err(ConeError::TooManyRays { .. })
        ));
    }

    #[test]
    fn span_reduction_examples() {
        let gens = vec![v(&[1, 0]), v(&[0, 1])];
        assert!(reduce_to_span(2, &gens).unwrap().identity);

        let copies = vec![v(&[1, 2, 3]); 3];
        let red = reduce_to_span(3, &copies).unwrap();
        assert_eq!(red.dim(), 1);
        assert_eq!(red.reduced, vec![v(&[1]); 3]);
        assert_eq!(red.basis_change.mul_vec(&copies[0]), v(&[1]));

        assert_eq!(reduce_to_span(2, &[v(&[0, 0])]), Err(ConeError::AllZero));
    }

    fn cone_input() -> impl Strategy<Value = Vec<Vec<Rational>>> {
        (2usize..5, 0usize..4).prop_flat_map(|(d, extra)| {
            proptest::collection::vec(proptest::collection::vec(-3i64..4, d), d + extra)
                .prop_map(|rows| rows.into_iter().map(|r| v(&r)).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn rays_match_brute_force(gens in cone_input()) {
            let d = gens[0].len();
            prop_assume!(independent_subset(d, &gens).len() == d);
            let rays = dual_cone_rays(&gens).unwrap();
            for r in &rays {
                prop_assert!(gens.iter().all(|g| !dot(g, r).is_negative()));
                let tight: Vec<usize> = (0..gens.len()).filter(|&i| dot(&gens[i], r).is_zero()).collect();
                prop_assert_eq!(rank_of(&gens, &tight, d), d - 1);
            }
            prop_assert_eq!(rays, brute_force_rays(&gens));
        }

        #[test]
        fn reduced_generators_pair_like_the_originals(gens in cone_input()) {
            let n = gens[0].len();
            prop_assume!(gens.iter().any(|g| g.iter().any(|x| !x.is_zero())));
            let red = reduce_to_span(n, &gens).unwrap();
            prop_assert_eq!(independent_subset(red.dim(), &red.reduced).len(), red.dim());
            for (g, t) in gens.iter().zip(&red.reduced) {
                prop_assert_eq!(&red.basis_change.mul_vec(g), t);
            }
        }
    }
}
