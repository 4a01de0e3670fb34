//! Weighted transition matrices between consecutive tower levels.
//!
//! Entry `(i, j)` of `A_q` is the total `alpha`-weight of the level-`q`
//! patches of type `i` placed inside the level-`(q+1)` patch `j`; it sends
//! level-`(q+1)` chain coefficients to level-`q` ones.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{normalize, Matrix};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::geometry::enumerate_occurrences;
use crate::symbolic::{Letter, Model};

/// Class enumeration is skipped once a class count would exceed `2^this`.
const CLASS_DEPTH_LIMIT: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Weights derived from the Triangle patch occurrences.
    #[default]
    TriangleDerived,
    /// The closed-form entries printed for the substitution model.
    Printed,
}

impl Scheme {
    /// Lowest level at which the scheme is defined.
    pub fn base_level(self) -> usize {
        match self {
            Scheme::TriangleDerived => 0,
            Scheme::Printed => 1,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::TriangleDerived => "triangle",
            Scheme::Printed => "printed",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangle" | "triangle_derived" => Ok(Scheme::TriangleDerived),
            "printed" => Ok(Scheme::Printed),
            other => Err(Error::domain(format!(
                "unknown scheme {other:?} (expected triangle or printed)"
            ))),
        }
    }
}

pub type ExactMatrix = Matrix<Exact>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionMatrix {
    pub level: usize,
    pub scheme: Scheme,
    pub entries: ExactMatrix,
}

/// `A_q` under the given scheme.
pub fn transition_matrix(model: &Model, q: usize, scheme: Scheme) -> Result<TransitionMatrix> {
    let entries = match scheme {
        Scheme::TriangleDerived => triangle_matrix(model, q)?,
        Scheme::Printed => {
            if !model.is_substitution() {
                return Err(Error::domain(format!(
                    "unsupported scheme: printed matrices exist only for the substitution model, not {}",
                    model.name()
                )));
            }
            printed_matrix(q)?
        }
    };
    Ok(TransitionMatrix {
        level: q,
        scheme,
        entries,
    })
}

fn triangle_matrix(model: &Model, q: usize) -> Result<ExactMatrix> {
    let r = model.alphabet_size() as usize;
    let mut m: ExactMatrix = Matrix::zeros(r, r);
    let small = model
        .level_len_u64(q)
        .ok()
        .map(|len| {
            let mut blocks = 0u64;
            for j in 1..=r {
                if let Ok(runs) = model.block_runs(q, Letter::from_index(j - 1)) {
                    blocks = blocks.max(runs.iter().map(|b| b.blocks).sum());
                }
            }
            len.saturating_mul(blocks) <= CLASS_DEPTH_LIMIT
        })
        .unwrap_or(false);
    if small {
        // sum of count * 2^-d over the occurrence classes
        for table in enumerate_occurrences(model, q)? {
            let j = table.parent.index();
            for class in &table.classes {
                let i = class.child.index();
                let v = m.get(i, j).clone() + class.weight();
                m.set(i, j, v);
            }
        }
    } else {
        // each block contributes 2^d placements of weight 2^-d
        for j in 0..r {
            for run in model.block_runs(q, Letter::from_index(j))? {
                let i = run.child.index();
                let v = m.get(i, j).clone() + Exact::from_integer(run.blocks);
                m.set(i, j, v);
            }
        }
    }
    Ok(m)
}

/// `[[1 + 2^(-3^n+1), 1], [2^(-2*3^n+2), 2^(-3^n+1) + 2^(-2*3^n+2)]]`.
fn printed_matrix(n: usize) -> Result<ExactMatrix> {
    if n == 0 {
        return Err(Error::domain("printed matrices start at level 1"));
    }
    let three_n = 3i64
        .checked_pow(n as u32)
        .filter(|t| t.checked_mul(2).is_some())
        .ok_or_else(|| Error::Budget {
            what: "printed matrix exponent",
            needed: format!("3^{n}"),
            limit: i64::MAX as u64,
        })?;
    let a = Exact::pow2(-three_n + 1);
    let b = Exact::pow2(-2 * three_n + 2);
    Matrix::from_rows(vec![
        vec![Exact::one() + a.clone(), Exact::one()],
        vec![b.clone(), a + b],
    ])
}

/// Exact product `A_qa * ... * A_(qb-1)`; the identity for an empty range.
pub fn compose_range(model: &Model, scheme: Scheme, qa: usize, qb: usize) -> Result<ExactMatrix> {
    if qa > qb {
        return Err(Error::domain(format!("level range {qa}..{qb} is reversed")));
    }
    if qa < scheme.base_level() && qa < qb {
        return Err(Error::domain(format!(
            "scheme {scheme} starts at level {}",
            scheme.base_level()
        )));
    }
    let r = model.alphabet_size() as usize;
    (qa..qb)
        .into_par_iter()
        .map(|q| transition_matrix(model, q, scheme).map(|t| t.entries))
        .try_reduce(|| Matrix::identity(r), |a, b| a.mul(&b))
}

/// Normalized vertices of the image of the level-`m` simplex in level `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexVertices {
    pub level: usize,
    pub depth: usize,
    pub vertices: Vec<Vec<Exact>>,
}

pub fn nested_simplex(model: &Model, scheme: Scheme, n: usize, m: usize) -> Result<SimplexVertices> {
    if m <= n {
        return Err(Error::domain(format!("depth {m} must exceed base level {n}")));
    }
    let p = compose_range(model, scheme, n, m)?;
    Ok(SimplexVertices {
        level: n,
        depth: m,
        vertices: p.normalized_columns()?,
    })
}

/// Residuals `w_j^(q+1) - sum_i w_i^q A_q(i, j)` with `w^q` the level-`q` word lengths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassResidual {
    pub level: usize,
    pub scheme: Scheme,
    pub residuals: Vec<Exact>,
}

impl MassResidual {
    pub fn is_zero(&self) -> bool {
        self.residuals.iter().all(Zero::is_zero)
    }
}

pub fn mass_conservation_check(model: &Model, scheme: Scheme, q: usize) -> Result<MassResidual> {
    let a = transition_matrix(model, q, scheme)?.entries;
    let w: Exact = model.level_len(q)?.into();
    let w_next: Exact = model.level_len(q + 1)?.into();
    let residuals = a
        .column_sums()
        .into_iter()
        .map(|s| w_next.clone() - w.clone() * s)
        .collect();
    Ok(MassResidual {
        level: q,
        scheme,
        residuals,
    })
}

/// Solves `sum_k lambda_k cols[k] = v` exactly when the columns are
/// independent and the system is consistent.
fn solve_independent(cols: &[&Vec<Exact>], v: &[Exact]) -> Option<Vec<Exact>> {
    let n = v.len();
    let k = cols.len();
    // augmented n x (k+1)
    let mut a: Vec<Vec<Exact>> = (0..n)
        .map(|i| {
            let mut row: Vec<Exact> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(k);
    for c in 0..k {
        let p = (pivot_row..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(pivot_row, p);
        let inv = a[pivot_row][c].recip();
        for x in a[pivot_row].iter_mut() {
            *x = x.clone() * &inv;
        }
        let pivot = a[pivot_row].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != pivot_row && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot).take(k + 1) {
                    *x = x.clone() - p.clone() * &f;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if (pivot_row..n).any(|i| !a[i][k].is_zero()) {
        return None;
    }
    Some(pivots.iter().map(|&p| a[p][k].clone()).collect())
}

/// Exact test that `v` lies in the convex hull of `hull` (all on the simplex).
pub fn in_convex_hull(hull: &[Vec<Exact>], v: &[Exact]) -> bool {
    // Caratheodory: some independent subset represents v with nonnegative weights
    let k = hull.len();
    (1u32..(1 << k)).any(|mask| {
        let cols: Vec<&Vec<Exact>> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| &hull[i]).collect();
        solve_independent(&cols, v).is_some_and(|l| l.iter().all(|x| !x.is_negative()))
    })
}

/// Checks that the hull at depth `m2` lies inside the hull at depth `m1`.
pub fn nesting_check(model: &Model, scheme: Scheme, n: usize, m1: usize, m2: usize) -> Result<bool> {
    if !(n < m1 && m1 < m2) {
        return Err(Error::domain("nesting needs n < m1 < m2"));
    }
    let outer = nested_simplex(model, scheme, n, m1)?;
    let inner = nested_simplex(model, scheme, n, m2)?;
    Ok(inner.vertices.iter().all(|v| in_convex_hull(&outer.vertices, v)))
}

/// Letter-count chain `compose(base, q) e_rep` pushed down to letters.
pub(crate) fn chain_at(model: &Model, scheme: Scheme, q: usize, rep: usize) -> Result<Vec<Exact>> {
    let r = model.alphabet_size() as usize;
    let base = scheme.base_level();
    let mut e = vec![Exact::zero(); r];
    e[rep] = Exact::one();
    compose_range(model, scheme, base, q.max(base))?.mul_vec(&e)
}

pub(crate) fn normalized(v: &[Exact]) -> Result<Vec<Exact>> {
    normalize(v).ok_or_else(|| Error::Degenerate("zero chain vector".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(rows: &[&[i64]]) -> ExactMatrix {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Exact::from_integer(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn substitution_triangle_is_constant() {
        let m = Model::substitution();
        for q in 0..8 {
            assert_eq!(
                transition_matrix(&m, q, Scheme::TriangleDerived).unwrap().entries,
                ex(&[&[2, 1], &[1, 2]])
            );
        }
    }

    #[test]
    fn toeplitz_triangle() {
        let m = Model::toeplitz(2);
        let a = |q| transition_matrix(&m, q, Scheme::TriangleDerived).unwrap().entries;
        // words 111 and 121
        assert_eq!(a(0), ex(&[&[3, 2], &[0, 1]]));
        assert_eq!(a(1), ex(&[&[1, 0], &[2, 3]]));
        assert_eq!(a(2), ex(&[&[9, 2], &[0, 7]]));
    }

    #[test]
    fn class_and_run_paths_agree() {
        for m in [Model::toeplitz(2), Model::toeplitz(3), Model::substitution()] {
            for q in 0..4 {
                let r = m.alphabet_size() as usize;
                let mut from_runs: ExactMatrix = Matrix::zeros(r, r);
                for j in 0..r {
                    for run in m.block_runs(q, Letter::from_index(j)).unwrap() {
                        let v = from_runs.get(run.child.index(), j).clone() + Exact::from_integer(run.blocks);
                        from_runs.set(run.child.index(), j, v);
                    }
                }
                assert_eq!(
                    transition_matrix(&m, q, Scheme::TriangleDerived).unwrap().entries,
                    from_runs
                );
            }
        }
    }

    #[test]
    fn printed_matrices() {
        let m = Model::substitution();
        let a1 = transition_matrix(&m, 1, Scheme::Printed).unwrap().entries;
        assert_eq!(*a1.get(0, 0), Exact::one() + Exact::pow2(-2));
        assert_eq!(*a1.get(0, 1), Exact::one());
        assert_eq!(*a1.get(1, 0), Exact::pow2(-4));
        assert_eq!(*a1.get(1, 1), Exact::pow2(-2) + Exact::pow2(-4));
        let a10 = transition_matrix(&m, 10, Scheme::Printed).unwrap().entries;
        assert_eq!(*a10.get(1, 0), Exact::pow2(-2 * 59049 + 2));
        assert!(transition_matrix(&Model::toeplitz(2), 1, Scheme::Printed).is_err());
        assert!(transition_matrix(&m, 0, Scheme::Printed).is_err());
    }

    #[test]
    fn compositions() {
        let t = Model::toeplitz(2);
        assert_eq!(
            compose_range(&t, Scheme::TriangleDerived, 1, 3).unwrap(),
            ex(&[&[9, 2], &[18, 25]])
        );
        assert_eq!(
            compose_range(&t, Scheme::TriangleDerived, 4, 4).unwrap(),
            Matrix::identity(2)
        );
        let s = Model::substitution();
        assert_eq!(
            compose_range(&s, Scheme::TriangleDerived, 1, 4).unwrap(),
            ex(&[&[14, 13], &[13, 14]])
        );
        assert!(compose_range(&s, Scheme::TriangleDerived, 3, 1).is_err());
    }

    #[test]
    fn simplices() {
        let t = Model::toeplitz(2);
        let v = nested_simplex(&t, Scheme::TriangleDerived, 1, 3).unwrap().vertices;
        assert_eq!(v[0], vec![Exact::ratio(1, 3), Exact::ratio(2, 3)]);
        assert_eq!(v[1], vec![Exact::ratio(2, 27), Exact::ratio(25, 27)]);
        let s = Model::substitution();
        let v = nested_simplex(&s, Scheme::TriangleDerived, 1, 4).unwrap().vertices;
        assert_eq!(v[0], vec![Exact::ratio(14, 27), Exact::ratio(13, 27)]);
        // single step: column-stochastic normalization of A_n
        let a = transition_matrix(&t, 3, Scheme::TriangleDerived).unwrap().entries;
        assert_eq!(
            nested_simplex(&t, Scheme::TriangleDerived, 3, 4).unwrap().vertices,
            a.normalized_columns().unwrap()
        );
    }

    #[test]
    fn mass_conservation() {
        for m in [
            Model::toeplitz(1),
            Model::toeplitz(2),
            Model::toeplitz(3),
            Model::substitution(),
        ] {
            for q in 0..=6 {
                assert!(mass_conservation_check(&m, Scheme::TriangleDerived, q)
                    .unwrap()
                    .is_zero());
            }
        }
        let r = mass_conservation_check(&Model::substitution(), Scheme::Printed, 1).unwrap();
        assert_eq!(r.residuals, vec![Exact::ratio(81, 16), Exact::ratio(81, 16)]);
    }

    #[test]
    fn column_sums() {
        let t = Model::toeplitz(3);
        for q in 1..6 {
            let sums = transition_matrix(&t, q, Scheme::TriangleDerived)
                .unwrap()
                .entries
                .column_sums();
            assert!(sums.iter().all(|s| *s == Exact::from_integer(3i64.pow(q as u32))));
        }
    }

    #[test]
    fn nesting() {
        for m in [Model::toeplitz(2), Model::toeplitz(3), Model::substitution()] {
            assert!(nesting_check(&m, Scheme::TriangleDerived, 1, 2, 4).unwrap());
            assert!(nesting_check(&m, Scheme::TriangleDerived, 1, 3, 6).unwrap());
        }
        let outer = vec![
            vec![Exact::ratio(1, 3), Exact::ratio(2, 3)],
            vec![Exact::ratio(2, 3), Exact::ratio(1, 3)],
        ];
        assert!(in_convex_hull(&outer, &[Exact::ratio(1, 2), Exact::ratio(1, 2)]));
        assert!(!in_convex_hull(&outer, &[Exact::ratio(1, 4), Exact::ratio(3, 4)]));
    }
}
