//! From covers to coarse embeddings.
//!
//! The pipeline in this module turns a cover of a finite pointed metric
//! space into maps to probability measures and then into a table of
//! Euclidean coordinates:
//!
//! 1. [`measure_map`] sends each point to the barycentric mixture of the
//!    anchor points of the cover members containing it, and certifies a
//!    Lipschitz-type increment table against the cover's depth.
//! 2. [`property_c_measure_map`] builds the multi-scale weighted variant
//!    driven by a separation schedule with radii `2*n^i`, whose displacement
//!    is bounded by `12/(n-1)` independently of the space.
//! 3. [`hilbert_embedding`] composes any stack of measure stages with the
//!    square-root map into a concrete coordinate table, centered so the
//!    basepoint lands at the origin.
//! 4. [`compression_profile`] summarizes how embedded displacement grows
//!    with distance: per distance bucket, the least and greatest realized
//!    displacement.
//!
//! Every constructor re-checks its own output (support radii, norm floors,
//! displacement bounds) and reports a broken guarantee as an invariant
//! error rather than returning a silently wrong table.

use crate::cover::{
    audit_property_c, brick_colored_cover, cover_stats, property_c_decomposition, set_diameter,
    Cover, PropertyCOutcome, PropertyCSchedule, PropertyCStrategy,
};
use crate::error::{budget, invariant, validation, Result};
use crate::measure::{l1_distance, FiniteMeasure};
use crate::nerve::nerve_projection;
use crate::space::{FiniteMetricSpace, SLACK};
use rayon::prelude::*;

/// Hard cap on `points x coordinates` cells in an embedding table.
pub const EMBED_MAX_CELLS: usize = 10_000_000;

// ---------------------------------------------------------------------------
// Distance buckets shared by increment tables and compression profiles.
// ---------------------------------------------------------------------------

/// Upper edges of the default distance buckets: unit-width buckets
/// `(t-1, t]` on integer metrics, otherwise 20 quantile buckets of the
/// realized pair distances. Edges are strictly increasing and the last edge
/// reaches the largest pair distance.
pub fn distance_buckets(space: &FiniteMetricSpace) -> Vec<f64> {
    if space.integer_metric() {
        let top = space.diameter().max(1.0) as usize;
        return (1..=top).map(|t| t as f64).collect();
    }
    let n = space.n();
    let mut dists: Vec<f64> = Vec::with_capacity(n.saturating_sub(1) * n / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(space.dist(i, j));
        }
    }
    if dists.is_empty() {
        return vec![1.0];
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut edges: Vec<f64> = Vec::new();
    for q in 1..=20usize {
        let idx = (q * dists.len()).div_ceil(20) - 1;
        let e = dists[idx];
        if edges.last().is_none_or(|&last| e > last + SLACK) {
            edges.push(e);
        }
    }
    edges
}

/// Upper edges for fixed-width buckets `(0, w], (w, 2w], ...` reaching the
/// diameter.
fn width_buckets(space: &FiniteMetricSpace, width: f64) -> Result<Vec<f64>> {
    if !(width.is_finite() && width > 0.0) {
        return Err(validation("bucket width must be finite and positive"));
    }
    let top = space.diameter().max(width);
    let count = ((top / width).ceil() as usize).max(1);
    Ok((1..=count).map(|t| t as f64 * width).collect())
}

/// Per-bucket `(min, max, count)` of a symmetric pair statistic. A pair
/// lands in the first bucket whose upper edge is `>=` its distance (up to
/// slack); pairs beyond the last edge land in the last bucket. The fold
/// uses only commutative reductions, so the result does not depend on how
/// the work is split across threads.
fn pair_bucket_stats<F>(space: &FiniteMetricSpace, edges: &[f64], stat: F) -> Vec<(f64, f64, usize)>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = space.n();
    let empty = vec![(f64::INFINITY, f64::NEG_INFINITY, 0usize); edges.len()];
    (0..n)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |mut acc, i| {
                for j in (i + 1)..n {
                    let d = space.dist(i, j);
                    let b = edges
                        .partition_point(|&e| e + SLACK < d)
                        .min(edges.len() - 1);
                    let v = stat(i, j);
                    let cell = &mut acc[b];
                    cell.0 = cell.0.min(v);
                    cell.1 = cell.1.max(v);
                    cell.2 += 1;
                }
                acc
            },
        )
        .reduce(
            || empty.clone(),
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 = x.0.min(y.0);
                    x.1 = x.1.max(y.1);
                    x.2 += y.2;
                }
                a
            },
        )
}

/// One row of a pair-increment table: the largest statistic value among
/// pairs whose distance falls in `(previous edge, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementRow {
    pub upper: f64,
    pub max_increment: f64,
    pub pairs: usize,
}

fn increment_table<F>(space: &FiniteMetricSpace, edges: &[f64], stat: F) -> Vec<IncrementRow>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    pair_bucket_stats(space, edges, stat)
        .into_iter()
        .zip(edges)
        .map(|((_, mx, pairs), &upper)| IncrementRow {
            upper,
            max_increment: if pairs == 0 { 0.0 } else { mx },
            pairs,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Barycentric measure maps from a deep cover.
// ---------------------------------------------------------------------------

/// A barycentric measure map built from a cover: each point `z` is sent to
/// the probability measure placing the partition-of-unity weight of every
/// cover member containing `z` on that member's anchor (its least point).
#[derive(Debug, Clone)]
pub struct MeasureMap {
    /// One probability measure per space point.
    pub measures: Vec<FiniteMeasure>,
    /// Anchor point of each cover member.
    pub anchors: Vec<usize>,
    /// Requested depth: every point sits at least this far inside some
    /// member.
    pub scale: f64,
    /// Largest member diameter; every atom of `measures[z]` is certified to
    /// lie within this distance of `z`.
    pub support_radius: f64,
    /// Largest number of members meeting at one point.
    pub multiplicity: usize,
    /// Bucketed table of the realized l1 increments between measures.
    pub increments: Vec<IncrementRow>,
}

/// Builds the barycentric measure map of a cover whose depth is at least
/// `scale`: each point must lie at distance `>= scale` from the complement
/// of some member. The returned table certifies the support radius
/// exhaustively and records the realized l1 increments per distance
/// bucket; the displacement of points at distance `d` is bounded by
/// `4 * d * multiplicity / scale`.
pub fn measure_map(space: &FiniteMetricSpace, cover: &Cover, scale: f64) -> Result<MeasureMap> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(validation("scale must be finite and positive"));
    }
    if cover.sets.iter().any(|s| s.is_empty()) {
        return Err(validation("cover members must be nonempty"));
    }
    let stats = cover_stats(space, cover)?;

    // Depth precondition: the raw distance from each point to the
    // complement of its deepest member must reach the scale.
    let mut depth = vec![0.0f64; space.n()];
    for set in &cover.sets {
        let dc = space.dist_to_complement(set);
        for (&p, &d) in set.iter().zip(&dc) {
            if d > depth[p] {
                depth[p] = d;
            }
        }
    }
    if let Some((worst, d)) = depth
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
    {
        if *d + SLACK < scale {
            return Err(validation(format!(
                "cover is not {scale}-deep: point {} sits only {d} inside its deepest member",
                space.id(worst)
            )));
        }
    }

    let anchors: Vec<usize> = cover
        .sets
        .iter()
        .map(|s| *s.iter().min().expect("nonempty member"))
        .collect();
    let proj = nerve_projection(space, cover, stats.mesh_global)?;
    let measures: Vec<FiniteMeasure> = proj
        .weights
        .iter()
        .map(|row| {
            FiniteMeasure::new(row.iter().map(|&(si, w)| (anchors[si], w)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    for (z, m) in measures.iter().enumerate() {
        if !m.is_probability() {
            return Err(invariant(format!(
                "measure at {} is not a probability (total {})",
                space.id(z),
                m.total()
            )));
        }
    }

    let support_radius = stats.mesh_global;
    for (z, m) in measures.iter().enumerate() {
        for atom in m.atoms() {
            if space.dist(z, atom.point) > support_radius + SLACK {
                return Err(invariant(format!(
                    "atom {} of the measure at {} escapes the support radius {support_radius}",
                    space.id(atom.point),
                    space.id(z)
                )));
            }
        }
    }

    let increments = increment_table(space, &distance_buckets(space), |i, j| {
        l1_distance(&measures[i], &measures[j])
    });

    Ok(MeasureMap {
        measures,
        anchors,
        scale,
        support_radius,
        multiplicity: stats.multiplicity,
        increments,
    })
}

/// A brick cover enlarged until it is deep enough for [`measure_map`] at
/// the given scale: bricks at that scale, each replaced by its closed
/// `(ceil(scale) - 1)`-neighborhood. On integer-metric spaces every point
/// of an original brick then sits at depth `>= ceil(scale)` inside the
/// enlarged member.
pub fn lebesgue_brick_cover(space: &FiniteMetricSpace, scale: f64) -> Result<Cover> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(validation("scale must be finite and positive"));
    }
    let flat = brick_colored_cover(space, scale)?.flatten();
    let rho = scale.ceil() - 1.0;
    Ok(if rho > 0.0 {
        flat.enlarge(space, rho)
    } else {
        flat
    })
}

// ---------------------------------------------------------------------------
// Weighted measure maps from a separation schedule.
// ---------------------------------------------------------------------------

/// A multi-scale weighted measure map certified by a separation schedule
/// with radii `2*n^i` (so distinct sets of family `i` are more than
/// `2*n^i` apart). Each point receives, from every family whose unique
/// nearby set it meets within `n^i / 2`, an atom at that set's anchor with
/// weight `n^(k-i+1) * max(0, n^i/2 - d(x, set))`, normalized to a
/// probability measure.
#[derive(Debug, Clone)]
pub struct PropertyCMap {
    pub n: usize,
    pub k: usize,
    /// Separation radii handed to the scheduler: `2*n^i` for `i = 1..=k`.
    pub radii: Vec<f64>,
    pub schedule: PropertyCSchedule,
    pub measures: Vec<FiniteMeasure>,
    /// Unnormalized total mass collected at each point.
    pub raw_norms: Vec<f64>,
    /// Guaranteed lower bound `n^(k+1) / 2` for every raw norm.
    pub norm_floor: f64,
    /// `max_i (family diameter_i + 2*n^i)`, certified atom by atom.
    pub support_radius: f64,
    /// Guaranteed displacement bound `12 / (n - 1)` per unit distance.
    pub lipschitz_bound: f64,
    /// Realized `sup ||a_x - a_y||_1 / d(x, y)` over all pairs.
    pub max_ratio: f64,
}

/// Builds the weighted measure map for parameters `n >= 2`, `k >= 1` by
/// first asking the scheduler for a decomposition at radii `2*n^i`.
/// Schedule infeasibility is a validation error.
pub fn property_c_measure_map(
    space: &FiniteMetricSpace,
    n: usize,
    k: usize,
    strategy: PropertyCStrategy,
) -> Result<PropertyCMap> {
    let radii = canonical_radii(n, k)?;
    let schedule = match property_c_decomposition(space, &radii, strategy)? {
        PropertyCOutcome::Schedule(s) => s,
        PropertyCOutcome::Infeasible { uncovered, detail } => {
            return Err(validation(format!(
                "no separation schedule at radii {radii:?}: {detail} ({} points uncovered)",
                uncovered.len()
            )));
        }
    };
    property_c_map_from_schedule(space, n, k, schedule)
}

fn canonical_radii(n: usize, k: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(validation("the branching parameter n must be at least 2"));
    }
    if k < 1 {
        return Err(validation("the depth parameter k must be at least 1"));
    }
    let top = (n as f64).powi(k as i32 + 1);
    if !top.is_finite() || top > 1e12 {
        return Err(budget(format!(
            "n^(k+1) = {top} exceeds the supported weight range"
        )));
    }
    Ok((1..=k).map(|i| 2.0 * (n as f64).powi(i as i32)).collect())
}

/// Builds the weighted measure map from an explicit schedule. The schedule
/// must use exactly the canonical radii `2*n^i` and pass its own audit
/// (coverage plus separation); the construction then re-checks the norm
/// floor, the support radius, and the displacement bound on its output.
pub fn property_c_map_from_schedule(
    space: &FiniteMetricSpace,
    n: usize,
    k: usize,
    schedule: PropertyCSchedule,
) -> Result<PropertyCMap> {
    let radii = canonical_radii(n, k)?;
    if schedule.scales.len() != k
        || schedule
            .scales
            .iter()
            .zip(&radii)
            .any(|(a, b)| (a - b).abs() > SLACK)
    {
        return Err(validation(format!(
            "schedule radii {:?} do not match the canonical radii {radii:?}",
            schedule.scales
        )));
    }
    let audit = audit_property_c(space, &schedule)?;
    if !audit.passed() {
        return Err(validation(format!(
            "schedule fails its audit: {} uncovered points, {} separation violations",
            audit.uncovered.len(),
            audit.separation_violations.len()
        )));
    }

    let nf = n as f64;
    let norm_floor = nf.powi(k as i32 + 1) / 2.0;
    let anchors: Vec<Vec<usize>> = schedule
        .families
        .iter()
        .map(|fam| {
            fam.iter()
                .map(|s| s.iter().min().copied().unwrap_or(0))
                .collect()
        })
        .collect();

    // For each point, collect its atom from each family. 2R-separation
    // guarantees at most one set per family is within R/2; meeting two is
    // an audit bug upstream, reported as an invariant breach.
    let per_point: Vec<Result<(Vec<(usize, f64)>, f64)>> = (0..space.n())
        .into_par_iter()
        .map(|x| {
            let mut atoms: Vec<(usize, f64)> = Vec::with_capacity(k);
            let mut raw = 0.0f64;
            for (fi, fam) in schedule.families.iter().enumerate() {
                let r = nf.powi(fi as i32 + 1);
                let weight = nf.powi((k - 1 - fi) as i32 + 1);
                let mut hit: Option<usize> = None;
                for (j, set) in fam.iter().enumerate() {
                    if set.is_empty() {
                        continue;
                    }
                    let d = space.dist_to_set(x, set);
                    if r / 2.0 - d > 0.0 {
                        if hit.is_some() {
                            return Err(invariant(format!(
                                "point {} meets two sets of family {fi} within {}",
                                space.id(x),
                                r / 2.0
                            )));
                        }
                        hit = Some(j);
                        let mass = weight * (r / 2.0 - d);
                        atoms.push((anchors[fi][j], mass));
                        raw += mass;
                    }
                }
            }
            Ok((atoms, raw))
        })
        .collect();

    let mut measures = Vec::with_capacity(space.n());
    let mut raw_norms = Vec::with_capacity(space.n());
    for (x, entry) in per_point.into_iter().enumerate() {
        let (atoms, raw) = entry?;
        if raw < norm_floor - SLACK {
            return Err(invariant(format!(
                "norm floor violated at {}: collected {raw} < {norm_floor}",
                space.id(x)
            )));
        }
        let scaled: Vec<(usize, f64)> = atoms.into_iter().map(|(p, w)| (p, w / raw)).collect();
        let m = FiniteMeasure::new(scaled)?;
        if !m.is_probability() {
            return Err(invariant(format!(
                "normalized measure at {} is not a probability",
                space.id(x)
            )));
        }
        measures.push(m);
        raw_norms.push(raw);
    }

    // Realized support radius: the farthest anchor any point's measure
    // reaches, bounded by the largest family diameter plus its radius.
    let mut support_radius = 0.0f64;
    for (fi, fam) in schedule.families.iter().enumerate() {
        if fam.iter().all(|s| s.is_empty()) {
            continue;
        }
        let diam = fam
            .iter()
            .map(|s| set_diameter(space, s))
            .fold(0.0f64, f64::max);
        support_radius = support_radius.max(diam + 2.0 * nf.powi(fi as i32 + 1));
    }
    for (x, m) in measures.iter().enumerate() {
        for atom in m.atoms() {
            if space.dist(x, atom.point) > support_radius + SLACK {
                return Err(invariant(format!(
                    "atom {} of the measure at {} escapes the support radius {support_radius}",
                    space.id(atom.point),
                    space.id(x)
                )));
            }
        }
    }

    let lipschitz_bound = 12.0 / (nf - 1.0);
    let max_ratio = (0..space.n())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0f64;
            for j in (i + 1)..space.n() {
                let ratio = l1_distance(&measures[i], &measures[j]) / space.dist(i, j);
                if ratio > worst {
                    worst = ratio;
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    if max_ratio > lipschitz_bound + SLACK {
        return Err(invariant(format!(
            "displacement ratio {max_ratio} exceeds the guaranteed bound {lipschitz_bound}"
        )));
    }

    Ok(PropertyCMap {
        n,
        k,
        radii,
        schedule,
        measures,
        raw_norms,
        norm_floor,
        support_radius,
        lipschitz_bound,
        max_ratio,
    })
}

// ---------------------------------------------------------------------------
// Square-root realization in a Euclidean coordinate table.
// ---------------------------------------------------------------------------

/// One stage of a Hilbert realization: a label (the scale or parameter the
/// measures came from) plus one measure per space point.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingStage<'a> {
    pub label: f64,
    pub measures: &'a [FiniteMeasure],
}

/// A Euclidean coordinate table realizing the weighted square-root map
/// `E(x) = (w_1 (sqrt(a^1(x)) - sqrt(a^1(x0))), w_2 (...), ...)`: one
/// block of coordinates per stage, indexed by that stage's support
/// universe (every point carrying weight somewhere in the stage).
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    /// One coordinate row per space point.
    pub coordinates: Vec<Vec<f64>>,
    /// Stage labels, in block order.
    pub labels: Vec<f64>,
    /// Stage weights `w_s`, in block order.
    pub weights: Vec<f64>,
    /// Per stage, the support universe indexing that stage's block.
    pub universes: Vec<Vec<usize>>,
    /// Whether rows were centered so the basepoint maps to the origin.
    pub centered: bool,
    /// Total coordinate count (sum of universe sizes).
    pub dimension: usize,
}

/// Composes measure stages with the square-root map. Default weights are
/// `2^-s` for stage `s = 1, 2, ...`; when `centered` the basepoint's row
/// is subtracted so it sits exactly at the origin. The squared distance
/// between two rows equals the weighted sum over stages of
/// `sum_u (sqrt(mu(u)) - sqrt(nu(u)))^2`, which never exceeds the l1
/// distance of the measures stagewise.
pub fn hilbert_embedding(
    space: &FiniteMetricSpace,
    stages: &[EmbeddingStage],
    weights: Option<&[f64]>,
    centered: bool,
) -> Result<EmbeddingTable> {
    if stages.is_empty() {
        return Err(validation("at least one measure stage is required"));
    }
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != stages.len() {
                return Err(validation(format!(
                    "{} weights supplied for {} stages",
                    w.len(),
                    stages.len()
                )));
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(validation("stage weights must be finite and positive"));
            }
            w.to_vec()
        }
        None => (1..=stages.len())
            .map(|s| 0.5f64.powi(s as i32))
            .collect(),
    };
    for st in stages {
        if st.measures.len() != space.n() {
            return Err(validation(format!(
                "stage {} carries {} measures for {} points",
                st.label,
                st.measures.len(),
                space.n()
            )));
        }
        for m in st.measures {
            m.supported_on(space)?;
        }
    }

    let universes: Vec<Vec<usize>> = stages
        .iter()
        .map(|st| {
            let mut pts: Vec<usize> = st
                .measures
                .iter()
                .flat_map(|m| m.atoms().iter().map(|a| a.point))
                .collect();
            pts.sort_unstable();
            pts.dedup();
            pts
        })
        .collect();
    let dimension: usize = universes.iter().map(Vec::len).sum();
    if space.n().saturating_mul(dimension) > EMBED_MAX_CELLS {
        return Err(budget(format!(
            "embedding table would hold {} cells (cap {EMBED_MAX_CELLS})",
            space.n().saturating_mul(dimension)
        )));
    }

    // Dense square-root block of one measure over a sorted universe.
    let sqrt_row = |m: &FiniteMeasure, universe: &[usize]| -> Vec<f64> {
        let mut row = vec![0.0f64; universe.len()];
        let mut at = 0usize;
        for atom in m.atoms() {
            while universe[at] < atom.point {
                at += 1;
            }
            row[at] = atom.weight.sqrt();
        }
        row
    };

    let x0 = space.basepoint();
    let base_rows: Vec<Vec<f64>> = stages
        .iter()
        .zip(&universes)
        .map(|(st, u)| sqrt_row(&st.measures[x0], u))
        .collect();

    let coordinates: Vec<Vec<f64>> = (0..space.n())
        .into_par_iter()
        .map(|x| {
            let mut row = Vec::with_capacity(dimension);
            for (s, (st, u)) in stages.iter().zip(&universes).enumerate() {
                let block = sqrt_row(&st.measures[x], u);
                for (c, (v, b)) in block.iter().zip(&base_rows[s]).enumerate() {
                    let centered_v = if centered { v - b } else { *v };
                    row.push(w[s] * centered_v);
                    let _ = c;
                }
            }
            row
        })
        .collect();

    if centered && coordinates[x0].iter().any(|&c| c != 0.0) {
        return Err(invariant("the basepoint row of a centered table is not zero"));
    }

    Ok(EmbeddingTable {
        coordinates,
        labels: stages.iter().map(|s| s.label).collect(),
        weights: w,
        universes,
        centered,
        dimension,
    })
}

// ---------------------------------------------------------------------------
// Compression profiles.
// ---------------------------------------------------------------------------

/// One row of a compression profile: the least (`rho1`) and greatest
/// (`rho2`) embedded displacement among pairs at distance in
/// `(previous edge, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionRow {
    pub upper: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub pairs: usize,
}

/// Summarizes how embedded displacement grows with distance. With
/// `bucket_width` the buckets are `(0, w], (w, 2w], ...`; otherwise the
/// default buckets of [`distance_buckets`] apply. Rows always satisfy
/// `rho1 <= rho2`; empty buckets report zeros.
pub fn compression_profile(
    space: &FiniteMetricSpace,
    table: &EmbeddingTable,
    bucket_width: Option<f64>,
) -> Result<Vec<CompressionRow>> {
    if table.coordinates.len() != space.n() {
        return Err(validation(format!(
            "table holds {} rows for {} points",
            table.coordinates.len(),
            space.n()
        )));
    }
    let edges = match bucket_width {
        Some(w) => width_buckets(space, w)?,
        None => distance_buckets(space),
    };
    let rows: Vec<CompressionRow> = pair_bucket_stats(space, &edges, |i, j| {
        row_displacement(&table.coordinates[i], &table.coordinates[j])
    })
    .into_iter()
    .zip(&edges)
    .map(|((mn, mx, pairs), &upper)| CompressionRow {
        upper,
        rho1: if pairs == 0 { 0.0 } else { mn },
        rho2: if pairs == 0 { 0.0 } else { mx },
        pairs,
    })
    .collect();
    for r in &rows {
        if r.rho1 > r.rho2 + SLACK {
            return Err(invariant(format!(
                "profile row at {} orders its displacements backwards",
                r.upper
            )));
        }
    }
    Ok(rows)
}

/// Euclidean distance between two coordinate rows.
pub fn row_displacement(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Budget;

    fn grid1(side: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::grid(1, side, &Budget::default()).unwrap()
    }

    fn grid2(side: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::grid(2, side, &Budget::default()).unwrap()
    }

    /// sum over the union of supports of (sqrt(mu(u)) - sqrt(nu(u)))^2,
    /// computed by merging the sorted atom lists.
    fn sqrt_gap_sq(mu: &FiniteMeasure, nu: &FiniteMeasure) -> f64 {
        let (a, b) = (mu.atoms(), nu.atoms());
        let (mut i, mut j, mut acc) = (0usize, 0usize, 0.0f64);
        while i < a.len() || j < b.len() {
            let (wa, wb) = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.point == y.point => {
                    i += 1;
                    j += 1;
                    (x.weight, y.weight)
                }
                (Some(x), Some(y)) if x.point < y.point => {
                    i += 1;
                    (x.weight, 0.0)
                }
                (Some(_), Some(y)) => {
                    j += 1;
                    (0.0, y.weight)
                }
                (Some(x), None) => {
                    i += 1;
                    (x.weight, 0.0)
                }
                (None, Some(y)) => {
                    j += 1;
                    (0.0, y.weight)
                }
                (None, None) => unreachable!(),
            };
            let gap = wa.sqrt() - wb.sqrt();
            acc += gap * gap;
        }
        acc
    }

    #[test]
    fn unit_buckets_on_integer_metrics_and_quantiles_elsewhere() {
        let g = grid1(6);
        assert_eq!(distance_buckets(&g), vec![1.0, 2.0, 3.0, 4.0, 5.0]);

        let ids: Vec<String> = (0..4).map(|i| format!("p{i}")).collect();
        let m = vec![
            vec![0.0, 0.5, 1.3, 2.7],
            vec![0.5, 0.0, 0.9, 2.3],
            vec![1.3, 0.9, 0.0, 1.5],
            vec![2.7, 2.3, 1.5, 0.0],
        ];
        let s =
            FiniteMetricSpace::from_matrix("t", ids, "p0", m, &Budget::default()).unwrap();
        let edges = distance_buckets(&s);
        assert!(edges.len() <= 20);
        assert_eq!(*edges.last().unwrap(), 2.7);
        assert!(edges.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn whole_space_cover_collapses_everything_to_the_anchor() {
        let g = grid1(9);
        let cover = Cover::new(&g, vec![(0..9).collect()]).unwrap();
        let mm = measure_map(&g, &cover, 3.0).unwrap();
        for m in &mm.measures {
            assert_eq!(m.atoms().len(), 1);
            assert_eq!(m.atoms()[0].point, 0);
        }
        assert_eq!(mm.multiplicity, 1);
        assert_eq!(mm.support_radius, 8.0);
        assert!(mm.increments.iter().all(|r| r.max_increment == 0.0));
    }

    #[test]
    fn interior_points_follow_their_unique_member() {
        let g = grid1(12);
        let a: Vec<usize> = (0..8).collect();
        let b: Vec<usize> = (5..12).collect();
        let cover = Cover::new(&g, vec![a, b]).unwrap();
        let mm = measure_map(&g, &cover, 2.0).unwrap();
        // Points covered by a single member get that member's anchor as a
        // Dirac measure.
        assert_eq!(mm.measures[1].atoms().len(), 1);
        assert_eq!(mm.measures[1].atoms()[0].point, 0);
        assert_eq!(mm.measures[11].atoms().len(), 1);
        assert_eq!(mm.measures[11].atoms()[0].point, 5);
        // Overlap points mix the two anchors.
        let mid = &mm.measures[6];
        assert_eq!(mid.atoms().len(), 2);
        assert_eq!(mid.atoms()[0].point, 0);
        assert_eq!(mid.atoms()[1].point, 5);
        assert!(mid.is_probability());
    }

    #[test]
    fn depth_validation_rejects_thin_covers() {
        let g = grid1(12);
        let a: Vec<usize> = (0..8).collect();
        let b: Vec<usize> = (5..12).collect();
        let cover = Cover::new(&g, vec![a, b]).unwrap();
        // The worst point sits only 2 deep, so scale 5 must be rejected.
        let err = measure_map(&g, &cover, 5.0).unwrap_err();
        assert!(err.to_string().contains("deep"), "{err}");

        let singletons = Cover::new(&g, (0..12).map(|i| vec![i]).collect()).unwrap();
        assert!(measure_map(&g, &singletons, 3.0).is_err());
    }

    #[test]
    fn plane_increments_respect_the_depth_bound() {
        let g = grid2(40);
        let scale = 10.0;
        let cover = lebesgue_brick_cover(&g, scale).unwrap();
        let mm = measure_map(&g, &cover, scale).unwrap();
        // Displacement of pairs at distance <= upper stays within
        // 4 * upper * multiplicity / scale (and within the trivial cap 2).
        let mult = mm.multiplicity as f64;
        for row in &mm.increments {
            let bound = (4.0 * row.upper * mult / scale).min(2.0);
            assert!(
                row.max_increment <= bound + SLACK,
                "bucket {}: {} > {}",
                row.upper,
                row.max_increment,
                bound
            );
        }
        // The headline check at distance scale: increments up to 10 stay
        // below 4 * 10 * 2 / 10 = 8 even with the realized multiplicity.
        let near = mm
            .increments
            .iter()
            .filter(|r| r.upper <= scale)
            .map(|r| r.max_increment)
            .fold(0.0f64, f64::max);
        assert!(near <= 8.0 + SLACK, "near-range increment {near}");
    }

    #[test]
    fn finer_scales_move_measures_more_than_coarser_ones() {
        let g = grid1(120);
        let window = 6.0;
        let mut sups = Vec::new();
        for scale in [2.0, 8.0, 32.0] {
            let cover = lebesgue_brick_cover(&g, scale).unwrap();
            let mm = measure_map(&g, &cover, scale).unwrap();
            let sup = mm
                .increments
                .iter()
                .filter(|r| r.upper <= window)
                .map(|r| r.max_increment)
                .fold(0.0f64, f64::max);
            sups.push(sup);
        }
        assert!(
            sups.windows(2).all(|w| w[1] <= w[0] + SLACK),
            "window suprema must not grow with the scale: {sups:?}"
        );
        assert!(sups[0] > sups[2], "the spread must actually shrink: {sups:?}");
    }

    #[test]
    fn single_family_schedule_collapses_to_one_anchor() {
        let g = grid1(10);
        let schedule = PropertyCSchedule {
            scales: vec![6.0],
            families: vec![vec![(0..10).collect()]],
            mesh_bound: 9.0,
            scheme: "manual".into(),
        };
        let map = property_c_map_from_schedule(&g, 3, 1, schedule).unwrap();
        assert_eq!(map.norm_floor, 4.5);
        for (m, &raw) in map.measures.iter().zip(&map.raw_norms) {
            assert_eq!(m.atoms().len(), 1);
            assert_eq!(m.atoms()[0].point, 0);
            assert!((raw - 4.5).abs() <= SLACK);
        }
        assert_eq!(map.max_ratio, 0.0);
        assert_eq!(map.support_radius, 9.0 + 6.0);
    }

    #[test]
    fn schedule_radii_must_match_the_parameters() {
        let g = grid1(10);
        let schedule = PropertyCSchedule {
            scales: vec![5.0],
            families: vec![vec![(0..10).collect()]],
            mesh_bound: 9.0,
            scheme: "manual".into(),
        };
        let err = property_c_map_from_schedule(&g, 3, 1, schedule).unwrap_err();
        assert!(err.to_string().contains("canonical"), "{err}");
    }

    #[test]
    fn long_line_weighted_map_meets_its_guarantees() {
        let g = grid1(500);
        let map = property_c_measure_map(&g, 3, 2, PropertyCStrategy::Grid).unwrap();
        assert_eq!(map.radii, vec![6.0, 18.0]);
        assert_eq!(map.norm_floor, 13.5);
        assert!(map
            .raw_norms
            .iter()
            .all(|&r| r >= map.norm_floor - SLACK));
        assert_eq!(map.lipschitz_bound, 6.0);
        assert!(map.max_ratio <= 6.0 + SLACK, "ratio {}", map.max_ratio);
        assert!(map.max_ratio > 0.0);
        // Bricks at radius 18 are at most 35 wide, so supports stay local.
        assert!(map.support_radius <= 35.0 + 36.0 + SLACK);
        for m in &map.measures {
            assert!(m.is_probability());
        }
    }

    #[test]
    fn infeasible_schedules_surface_as_validation_errors() {
        // One slot cannot hold the two alternating brick families a line
        // needs, so the grid strategy must report infeasibility.
        let g = grid1(40);
        let err = property_c_measure_map(&g, 3, 1, PropertyCStrategy::Grid).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }

    #[test]
    fn dirac_stages_embed_points_sqrt2_apart() {
        let g = grid1(8);
        let diracs: Vec<FiniteMeasure> = (0..8).map(FiniteMeasure::dirac).collect();
        let stage = EmbeddingStage {
            label: 1.0,
            measures: &diracs,
        };
        let table = hilbert_embedding(&g, &[stage], Some(&[1.0]), true).unwrap();
        assert_eq!(table.dimension, 8);
        assert!(table.coordinates[g.basepoint()].iter().all(|&c| c == 0.0));
        for i in 0..8 {
            for j in (i + 1)..8 {
                let d = row_displacement(&table.coordinates[i], &table.coordinates[j]);
                assert!((d - 2.0f64.sqrt()).abs() < 1e-12, "{i},{j}: {d}");
            }
        }
    }

    #[test]
    fn multi_stage_distances_match_the_direct_summation() {
        let g = grid1(30);
        let maps: Vec<MeasureMap> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&scale| {
                let cover = lebesgue_brick_cover(&g, scale).unwrap();
                measure_map(&g, &cover, scale).unwrap()
            })
            .collect();
        let stages: Vec<EmbeddingStage> = maps
            .iter()
            .map(|m| EmbeddingStage {
                label: m.scale,
                measures: &m.measures,
            })
            .collect();
        let table = hilbert_embedding(&g, &stages, None, true).unwrap();
        assert_eq!(table.weights, vec![0.5, 0.25, 0.125]);
        assert_eq!(
            table.dimension,
            table.universes.iter().map(Vec::len).sum::<usize>()
        );
        assert!(table.coordinates[g.basepoint()].iter().all(|&c| c == 0.0));
        for i in 0..g.n() {
            for j in (i + 1)..g.n() {
                let d2 = row_displacement(&table.coordinates[i], &table.coordinates[j]).powi(2);
                let oracle: f64 = (0..3)
                    .map(|s| {
                        table.weights[s].powi(2)
                            * sqrt_gap_sq(&maps[s].measures[i], &maps[s].measures[j])
                    })
                    .sum();
                assert!((d2 - oracle).abs() < 1e-9, "{i},{j}: {d2} vs {oracle}");
            }
        }
    }

    #[test]
    fn squared_sqrt_gaps_never_exceed_l1_distance() {
        let g = grid1(30);
        let cover = lebesgue_brick_cover(&g, 4.0).unwrap();
        let mm = measure_map(&g, &cover, 4.0).unwrap();
        for i in 0..g.n() {
            for j in (i + 1)..g.n() {
                let gap = sqrt_gap_sq(&mm.measures[i], &mm.measures[j]);
                let l1 = l1_distance(&mm.measures[i], &mm.measures[j]);
                assert!(gap <= l1 + 1e-12, "{i},{j}: {gap} > {l1}");
            }
        }
    }

    #[test]
    fn hilbert_embedding_validates_weights_and_budget() {
        let g = grid1(8);
        let diracs: Vec<FiniteMeasure> = (0..8).map(FiniteMeasure::dirac).collect();
        let stage = EmbeddingStage {
            label: 1.0,
            measures: &diracs,
        };
        assert!(hilbert_embedding(&g, &[stage], Some(&[1.0, 0.5]), true).is_err());
        assert!(hilbert_embedding(&g, &[stage], Some(&[-1.0]), true).is_err());
        assert!(hilbert_embedding(&g, &[], None, true).is_err());

        let big = grid1(2000);
        let big_diracs: Vec<FiniteMeasure> = (0..2000).map(FiniteMeasure::dirac).collect();
        let stages: Vec<EmbeddingStage> = (0..5)
            .map(|s| EmbeddingStage {
                label: s as f64,
                measures: &big_diracs,
            })
            .collect();
        let err = hilbert_embedding(&big, &stages, None, true).unwrap_err();
        assert_eq!(err.exit_code(), 4, "{err}");
    }

    #[test]
    fn coordinate_lines_profile_exactly() {
        let g = grid1(40);
        let table = EmbeddingTable {
            coordinates: (0..40).map(|i| vec![i as f64]).collect(),
            labels: vec![1.0],
            weights: vec![1.0],
            universes: vec![vec![0]],
            centered: true,
            dimension: 1,
        };
        let rows = compression_profile(&g, &table, None).unwrap();
        assert_eq!(rows.len(), 39);
        for (t, row) in rows.iter().enumerate() {
            assert_eq!(row.upper, (t + 1) as f64);
            assert!(row.pairs > 0);
            assert!((row.rho1 - row.upper).abs() < 1e-12);
            assert!((row.rho2 - row.upper).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_bucket_widths_partition_all_pairs() {
        let g = grid1(30);
        let table = EmbeddingTable {
            coordinates: (0..30).map(|i| vec![i as f64]).collect(),
            labels: vec![1.0],
            weights: vec![1.0],
            universes: vec![vec![0]],
            centered: true,
            dimension: 1,
        };
        assert!(compression_profile(&g, &table, Some(0.0)).is_err());
        let rows = compression_profile(&g, &table, Some(7.0)).unwrap();
        assert_eq!(rows.last().unwrap().upper, 35.0);
        assert_eq!(
            rows.iter().map(|r| r.pairs).sum::<usize>(),
            30 * 29 / 2
        );
    }

    #[test]
    fn weighted_pipeline_profile_matches_a_direct_scan() {
        let g = grid1(500);
        let map = property_c_measure_map(&g, 3, 2, PropertyCStrategy::Grid).unwrap();
        let stage = EmbeddingStage {
            label: 3.0,
            measures: &map.measures,
        };
        let table = hilbert_embedding(&g, &[stage], Some(&[1.0]), true).unwrap();
        let width = 36.0;
        let rows = compression_profile(&g, &table, Some(width)).unwrap();

        // Direct per-pair recomputation with the same bucket rule.
        let mut oracle: Vec<(f64, f64, usize)> =
            vec![(f64::INFINITY, f64::NEG_INFINITY, 0); rows.len()];
        for i in 0..g.n() {
            for j in (i + 1)..g.n() {
                let b = (((g.dist(i, j) / width).ceil() as usize).max(1) - 1).min(rows.len() - 1);
                let v = row_displacement(&table.coordinates[i], &table.coordinates[j]);
                oracle[b].0 = oracle[b].0.min(v);
                oracle[b].1 = oracle[b].1.max(v);
                oracle[b].2 += 1;
            }
        }
        for (row, (mn, mx, pairs)) in rows.iter().zip(oracle) {
            assert_eq!(row.pairs, pairs, "bucket {}", row.upper);
            assert!((row.rho1 - mn).abs() <= 1e-12, "bucket {}", row.upper);
            assert!((row.rho2 - mx).abs() <= 1e-12, "bucket {}", row.upper);
        }

        // Past the first bucket the embedded displacement is bounded away
        // from zero and does not decay with distance.
        for row in &rows[1..] {
            assert!(row.pairs > 0);
            assert!(row.rho1 > 0.0, "bucket {}", row.upper);
        }
        for w in rows.windows(2) {
            assert!(
                w[1].rho1 >= w[0].rho1 - SLACK,
                "rho1 dips between {} and {}",
                w[0].upper,
                w[1].upper
            );
        }
    }
}
