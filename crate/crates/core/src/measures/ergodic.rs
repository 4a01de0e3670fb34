//! Finite-depth approximations of the cone of invariant measures.
//!
//! The image of the level-`m` simplex in level `n` is the hull of the
//! normalized columns of `A_n ... A_(m-1)`. Columns that converge to a
//! common point belong to the same extreme measure; the number of limit
//! points is the number of ergodic measures.

use num_traits::{One, Zero};
use serde::Serialize;

use super::hilbert::projective_distance;
use super::matrix::Matrix;
use super::transition::{chain_at, compose_range, normalized, transition_matrix, Scheme};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::symbolic::Model;

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_DEPTH: usize = 32;
/// Level whose simplex is approximated.
pub const BASE_LEVEL: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Stabilized,
    Inconclusive,
}

/// Clusters of columns (1-based letters) at one depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthSnapshot {
    /// Matrices `A_1 .. A_depth` are included.
    pub depth: usize,
    pub count: usize,
    pub clusters: Vec<Vec<u32>>,
    /// Largest Hilbert distance between a column here and at the previous depth.
    pub step_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicReport {
    pub model: String,
    pub scheme: Scheme,
    pub base_level: usize,
    pub epsilon: f64,
    pub status: Status,
    /// Cluster count at the certifying depth.
    pub ergodic_count: Option<usize>,
    /// First depth whose clusters match the previous depth within `epsilon`.
    pub certified_depth: Option<usize>,
    pub report_depth: usize,
    pub count_at_report_depth: Option<usize>,
    pub clusters: Vec<Vec<u32>>,
    /// One normalized vertex per cluster at the deepest computed depth.
    pub witnesses: Vec<Vec<Exact>>,
    pub history: Vec<DepthSnapshot>,
}

impl ErgodicReport {
    pub fn is_stabilized(&self) -> bool {
        self.status == Status::Stabilized
    }
}

fn cluster(cols: &[Vec<Exact>], eps: f64) -> Vec<Vec<usize>> {
    // single linkage via union-find
    let n = cols.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if projective_distance(&cols[i], &cols[j]) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|g| g[0] == root) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Counts ergodic measures by clustering the level-1 vertex set at
/// increasing depth until two consecutive depths agree within `epsilon`
/// (same clusters, every column moved by at most `epsilon`). Depths before
/// `report_depth` are computed but cannot certify.
pub fn ergodic_measure_count(
    model: &Model,
    scheme: Scheme,
    epsilon: f64,
    report_depth: usize,
    max_depth: usize,
) -> Result<ErgodicReport> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("epsilon must be positive"));
    }
    let n = BASE_LEVEL.max(scheme.base_level());
    if report_depth < n || max_depth < report_depth {
        return Err(Error::domain(format!(
            "need {n} <= report depth ({report_depth}) <= max depth ({max_depth})"
        )));
    }
    let r = model.alphabet_size() as usize;
    let mut product: Matrix<Exact> = Matrix::identity(r);
    let mut history = Vec::new();
    let mut prev_cols: Option<Vec<Vec<Exact>>> = None;
    let mut prev_clusters: Option<Vec<Vec<usize>>> = None;
    let mut certified = None;
    let mut last_cols = Vec::new();
    let mut last_clusters = Vec::new();
    for depth in n..=max_depth {
        product = product.mul(&transition_matrix(model, depth, scheme)?.entries)?;
        let cols: Vec<Vec<Exact>> = (0..r).map(|j| product.column(j)).collect();
        let clusters = cluster(&cols, epsilon);
        let step_distance = prev_cols.as_ref().map_or(f64::INFINITY, |p| {
            p.iter()
                .zip(&cols)
                .map(|(a, b)| projective_distance(a, b))
                .fold(0.0, f64::max)
        });
        history.push(DepthSnapshot {
            depth,
            count: clusters.len(),
            clusters: letters(&clusters),
            step_distance,
        });
        let stable = prev_clusters.as_ref() == Some(&clusters) && step_distance <= epsilon;
        last_cols = cols.clone();
        last_clusters = clusters.clone();
        if stable && depth > report_depth {
            certified = Some(depth);
            break;
        }
        prev_cols = Some(cols);
        prev_clusters = Some(clusters);
    }
    let count_at_report_depth = history.iter().find(|h| h.depth == report_depth).map(|h| h.count);
    let witnesses = last_clusters
        .iter()
        .map(|g| normalized(&last_cols[g[0]]))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErgodicReport {
        model: model.name(),
        scheme,
        base_level: n,
        epsilon,
        status: if certified.is_some() {
            Status::Stabilized
        } else {
            Status::Inconclusive
        },
        ergodic_count: certified.map(|_| last_clusters.len()),
        certified_depth: certified,
        report_depth,
        count_at_report_depth,
        clusters: letters(&last_clusters),
        witnesses,
        history,
    })
}

fn letters(groups: &[Vec<usize>]) -> Vec<Vec<u32>> {
    groups
        .iter()
        .map(|g| g.iter().map(|&i| i as u32 + 1).collect())
        .collect()
}

/// Letter frequencies of one extreme measure at a finite level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub model: String,
    pub scheme: Scheme,
    /// 1-based index of the extreme measure.
    pub measure: usize,
    /// Letter whose tower represents the measure.
    pub representative: u32,
    pub level: usize,
    /// Weighted letter counts `sum_i c_i counts(base, i)`; integers under the Triangle scheme.
    pub counts: Vec<Exact>,
    pub frequencies: Vec<Exact>,
    pub approx: Vec<f64>,
}

impl FrequencyTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["letter", "count", "frequency_num", "frequency_den", "frequency"])
            .map_err(io)?;
        for (l, ((c, f), a)) in self.counts.iter().zip(&self.frequencies).zip(&self.approx).enumerate() {
            w.write_record([
                (l + 1).to_string(),
                c.to_string(),
                f.numer().to_string(),
                f.denom().to_string(),
                format!("{a:.17}"),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Letter frequencies of extreme measure `measure` (1-based) at level `q`:
/// the chain `A_base ... A_(q-1) e_rep` pushed through the letter counts of
/// the base-level words and normalized by total length.
pub fn measure_frequencies(
    model: &Model,
    scheme: Scheme,
    report: &ErgodicReport,
    measure: usize,
    q: usize,
) -> Result<FrequencyTable> {
    if !report.is_stabilized() {
        return Err(Error::Inconclusive(format!(
            "ergodic count for {} did not stabilize by depth {}",
            report.model,
            report.history.last().map_or(0, |h| h.depth)
        )));
    }
    let cluster = report.clusters.get(measure.wrapping_sub(1)).ok_or_else(|| {
        Error::domain(format!(
            "measure index {measure} out of range 1..={}",
            report.clusters.len()
        ))
    })?;
    let rep = cluster[0] as usize - 1;
    let base = scheme.base_level();
    if q < base {
        return Err(Error::domain(format!(
            "level {q} is below the scheme's base level {base}"
        )));
    }
    let chain = chain_at(model, scheme, q, rep)?;
    let table = model.letter_count_table(base)?;
    let r = model.alphabet_size() as usize;
    let mut counts = vec![Exact::zero(); r];
    for (c, word_counts) in chain.iter().zip(&table) {
        for (acc, k) in counts.iter_mut().zip(word_counts) {
            *acc += &(c.clone() * Exact::from(k.clone()));
        }
    }
    let frequencies = normalized(&counts)?;
    let approx = frequencies.iter().map(Exact::to_f64).collect();
    Ok(FrequencyTable {
        model: model.name(),
        scheme,
        measure,
        representative: rep as u32 + 1,
        level: q,
        counts,
        frequencies,
        approx,
    })
}

/// Fraction of level-`q` blocks of each type inside the level-`depth` word
/// `rep` (0-based), Triangle weights. Blocks of one level have equal length,
/// so these are also row fractions.
pub fn block_frequencies(model: &Model, q: usize, depth: usize, rep: usize) -> Result<Vec<Exact>> {
    if depth < q {
        return Err(Error::domain("depth must be at least the block level"));
    }
    let r = model.alphabet_size() as usize;
    if rep >= r {
        return Err(Error::domain("representative letter out of range"));
    }
    let mut e = vec![Exact::zero(); r];
    e[rep] = Exact::one();
    let c = compose_range(model, Scheme::TriangleDerived, q, depth)?.mul_vec(&e)?;
    normalized(&c)
}
