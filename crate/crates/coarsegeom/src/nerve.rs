//! Nerves of covers, barycentric projections onto them, refinement maps
//! between covers at different scales, and towers of nerves with the
//! coarsening fix that makes refinement containment hold.

use crate::cover::{brick_colored_cover, exact_dimension_at_scale, greedy_colored_cover, Cover, GreedyOutcome, ProfileStrategy};
use crate::error::{budget, invariant, validation, Result};
use crate::space::{FiniteMetricSpace, SLACK};
use std::collections::BTreeSet;

/// Largest number of cover sets a single point may belong to before nerve
/// construction refuses (the simplex count is exponential in this order).
pub const NERVE_MAX_ORDER: usize = 20;
/// Cap on the total number of simplices in one complex.
pub const NERVE_MAX_SIMPLICES: usize = 2_000_000;

/// A finite simplicial complex over cover-set vertices, stored as all
/// simplices grouped by dimension (each simplex a sorted vertex list).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    pub vertices: Vec<String>,
    pub by_dim: Vec<Vec<Vec<usize>>>,
    /// scale tag of the cover this nerve came from
    pub mesh_size: f64,
}

impl SimplicialComplex {
    pub fn dim(&self) -> usize {
        self.by_dim.len().saturating_sub(1)
    }

    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        self.by_dim.get(k).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        let mut s = simplex.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return false;
        }
        self.simplices(s.len() - 1).binary_search(&s).is_ok()
    }

    /// Simplices that are not a face of any larger simplex.
    pub fn maximal_simplices(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for k in 0..self.by_dim.len() {
            for s in &self.by_dim[k] {
                let has_cofacet = self.simplices(k + 1).iter().any(|t| {
                    s.iter().all(|v| t.binary_search(v).is_ok())
                });
                if !has_cofacet {
                    out.push(s.clone());
                }
            }
        }
        out
    }
}

/// Nerve of a cover: one vertex per set, a simplex for every collection of
/// sets with a common point. `mesh_size` is the scale tag to record.
pub fn nerve(space: &FiniteMetricSpace, cover: &Cover, mesh_size: f64) -> Result<SimplicialComplex> {
    let n_sets = cover.sets.len();
    let mut member: Vec<Vec<usize>> = vec![Vec::new(); space.n()];
    for (si, s) in cover.sets.iter().enumerate() {
        for &p in s {
            if p >= space.n() {
                return Err(validation("cover references a point out of range"));
            }
            member[p].push(si);
        }
    }
    let supports: BTreeSet<Vec<usize>> = member.into_iter().filter(|s| !s.is_empty()).collect();
    for s in &supports {
        if s.len() > NERVE_MAX_ORDER {
            return Err(budget(format!(
                "a point lies in {} sets; nerve order is capped at {NERVE_MAX_ORDER}",
                s.len()
            )));
        }
    }
    let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
    for sup in &supports {
        // all nonempty subsets of the support
        let m = sup.len();
        for mask in 1u32..(1u32 << m) {
            let subset: Vec<usize> = (0..m)
                .filter(|&b| mask & (1 << b) != 0)
                .map(|b| sup[b])
                .collect();
            all.insert(subset);
            if all.len() > NERVE_MAX_SIMPLICES {
                return Err(budget(format!(
                    "complex exceeds {NERVE_MAX_SIMPLICES} simplices"
                )));
            }
        }
    }
    let max_card = all.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new(); max_card];
    for s in all {
        by_dim[s.len() - 1].push(s);
    }
    for level in &mut by_dim {
        level.sort();
    }
    Ok(SimplicialComplex {
        vertices: (0..n_sets).map(|i| i.to_string()).collect(),
        by_dim,
        mesh_size,
    })
}

/// Barycentric weights of every point over the cover sets:
/// w_i(x) = d(x, X \ U_i) / sum_j d(x, X \ U_j). A set equal to the whole
/// space contributes the finite sentinel diameter+1 instead of infinity.
#[derive(Debug, Clone)]
pub struct NerveProjection {
    /// per point: sorted (set index, weight) pairs with positive weight
    pub weights: Vec<Vec<(usize, f64)>>,
    pub n_sets: usize,
    pub mesh_size: f64,
}

impl NerveProjection {
    /// l1 distance between the barycentric vectors of two points.
    pub fn l1(&self, x: usize, y: usize) -> f64 {
        let (a, b) = (&self.weights[x], &self.weights[y]);
        let (mut i, mut j, mut acc) = (0usize, 0usize, 0.0f64);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(p), Some(q)) if p.0 == q.0 => {
                    acc += (p.1 - q.1).abs();
                    i += 1;
                    j += 1;
                }
                (Some(p), Some(q)) if p.0 < q.0 => {
                    acc += p.1;
                    i += 1;
                }
                (Some(_), Some(q)) => {
                    acc += q.1;
                    j += 1;
                }
                (Some(p), None) => {
                    acc += p.1;
                    i += 1;
                }
                (None, Some(q)) => {
                    acc += q.1;
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        acc
    }
}

pub fn nerve_projection(
    space: &FiniteMetricSpace,
    cover: &Cover,
    mesh_size: f64,
) -> Result<NerveProjection> {
    let missing = cover.uncovered(space);
    if !missing.is_empty() {
        return Err(validation(format!(
            "projection needs a covering family; {} points uncovered",
            missing.len()
        )));
    }
    let sentinel = space.diameter() + 1.0;
    // depth[si] is aligned with cover.sets[si]: one value per member
    let depth: Vec<Vec<f64>> = cover
        .sets
        .iter()
        .map(|s| {
            space
                .dist_to_complement(s)
                .into_iter()
                .map(|d| if d.is_infinite() { sentinel } else { d })
                .collect()
        })
        .collect();
    let mut weights = Vec::with_capacity(space.n());
    for x in 0..space.n() {
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut total = 0.0f64;
        for (si, s) in cover.sets.iter().enumerate() {
            if let Ok(pos) = s.binary_search(&x) {
                let d = depth[si][pos];
                total += d;
                row.push((si, d));
            }
        }
        if total <= 0.0 {
            return Err(invariant(format!(
                "zero projection denominator at point {}",
                space.id(x)
            )));
        }
        for e in &mut row {
            e.1 /= total;
        }
        row.retain(|e| e.1 > 0.0);
        weights.push(row);
    }
    Ok(NerveProjection { weights, n_sets: cover.sets.len(), mesh_size })
}

/// Map each fine set to the lexicographically-least coarse set containing
/// it (comparing the coarse sets as sorted point lists). Errors list the
/// fine sets contained in no coarse set.
pub fn refinement_map(coarse: &Cover, fine: &Cover) -> Result<Vec<usize>> {
    let mut map = Vec::with_capacity(fine.sets.len());
    let mut offenders = Vec::new();
    for (fi, f) in fine.sets.iter().enumerate() {
        let best = coarse
            .sets
            .iter()
            .enumerate()
            .filter(|(_, c)| f.iter().all(|p| c.binary_search(p).is_ok()))
            .min_by(|(ai, a), (bi, b)| a.cmp(b).then(ai.cmp(bi)));
        match best {
            Some((ci, _)) => map.push(ci),
            None => offenders.push(fi),
        }
    }
    if !offenders.is_empty() {
        return Err(validation(format!(
            "{} fine sets contained in no coarse set (indices {:?})",
            offenders.len(),
            &offenders[..offenders.len().min(8)]
        )));
    }
    Ok(map)
}

#[derive(Debug)]
pub struct TowerStage {
    pub scale: f64,
    pub cover: Cover,
    pub complex: SimplicialComplex,
    /// true if this stage's sets had to be enlarged to unions of the finer
    /// sets they meet, to restore refinement containment
    pub coarsened: bool,
    pub realized_mesh: f64,
}

#[derive(Debug)]
pub struct NerveTower {
    pub stages: Vec<TowerStage>,
    /// maps[i]: vertex map from stage i's nerve to stage i+1's nerve
    pub maps: Vec<Vec<usize>>,
}

impl NerveTower {
    /// Composite vertex map from stage i to stage j (i <= j).
    pub fn vertex_map(&self, i: usize, j: usize) -> Vec<usize> {
        assert!(i <= j && j < self.stages.len());
        let mut map: Vec<usize> = (0..self.stages[i].cover.sets.len()).collect();
        for step in i..j {
            map = map.iter().map(|&v| self.maps[step][v]).collect();
        }
        map
    }
}

/// Build covers at strictly increasing scales, enlarge each set by half its
/// scale so neighboring sets overlap, fix refinement containment by
/// coarsening where needed, and take nerves.
pub fn anti_cech_tower(
    space: &FiniteMetricSpace,
    scales: &[f64],
    strategy: ProfileStrategy,
) -> Result<NerveTower> {
    if scales.is_empty() {
        return Err(validation("tower needs at least one scale"));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(validation("tower scales must be strictly increasing"));
    }
    let mut stages: Vec<TowerStage> = Vec::new();
    let mut maps: Vec<Vec<usize>> = Vec::new();
    for (i, &scale) in scales.iter().enumerate() {
        let colored = match strategy {
            ProfileStrategy::Brick => brick_colored_cover(space, scale)?,
            ProfileStrategy::Greedy { max_families } => {
                match greedy_colored_cover(space, scale, max_families)? {
                    GreedyOutcome::Cover(c) => c,
                    GreedyOutcome::Infeasible { families_needed, .. } => {
                        return Err(validation(format!(
                            "greedy needs {families_needed} families at scale {scale}"
                        )))
                    }
                }
            }
            ProfileStrategy::Exact => exact_dimension_at_scale(space, scale, None)?.1,
        };
        let mut cover = colored.flatten().enlarge(space, scale / 2.0);
        let mut coarsened = false;
        if i > 0 {
            let fine = &stages[i - 1].cover;
            let contained = |c: &Cover, f: &Vec<usize>| {
                c.sets
                    .iter()
                    .any(|s| f.iter().all(|p| s.binary_search(p).is_ok()))
            };
            if fine.sets.iter().any(|f| !contained(&cover, f)) {
                // absorb into each coarse set every fine set it meets
                let new_sets: Vec<Vec<usize>> = cover
                    .sets
                    .iter()
                    .map(|s| {
                        let mut grown: BTreeSet<usize> = s.iter().copied().collect();
                        for f in &fine.sets {
                            if f.iter().any(|p| s.binary_search(p).is_ok()) {
                                grown.extend(f.iter().copied());
                            }
                        }
                        grown.into_iter().collect()
                    })
                    .collect();
                cover = Cover { sets: new_sets };
                coarsened = true;
            }
        }
        let realized_mesh = cover
            .sets
            .iter()
            .map(|s| crate::cover::set_diameter(space, s))
            .fold(0.0, f64::max);
        let complex = nerve(space, &cover, scale)?;
        if i > 0 {
            let map = refinement_map(&cover, &stages[i - 1].cover)?;
            maps.push(map);
        }
        stages.push(TowerStage { scale, cover, complex, coarsened, realized_mesh });
    }
    Ok(NerveTower { stages, maps })
}

/// Check that a vertex map sends every simplex of `src` to a simplex of
/// `dst` (after deduplication); returns the offending simplices.
pub fn simplicial_defects(
    src: &SimplicialComplex,
    dst: &SimplicialComplex,
    vertex_map: &[usize],
) -> Vec<Vec<usize>> {
    let mut bad = Vec::new();
    for level in &src.by_dim {
        for s in level {
            let image: Vec<usize> = s.iter().map(|&v| vertex_map[v]).collect();
            if !dst.contains(&image) {
                bad.push(s.clone());
            }
        }
    }
    bad
}

/// For each radius R, the diameter of every point's fiber: the set of
/// points whose barycentric vectors are within R of x's vector, measuring
/// vectors by l1 distance scaled by the mesh size (scale 1 when the mesh
/// tag is 0, so degenerate covers still separate points).
pub fn urysohn_fiber_profile(
    space: &FiniteMetricSpace,
    proj: &NerveProjection,
    r_grid: &[f64],
) -> Vec<Vec<f64>> {
    let scalefac = if proj.mesh_size > 0.0 { proj.mesh_size } else { 1.0 };
    let n = space.n();
    let mut out = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let mut per_point = Vec::with_capacity(n);
        for x in 0..n {
            let fiber: Vec<usize> = (0..n)
                .filter(|&y| scalefac * proj.l1(x, y) <= r + SLACK)
                .collect();
            per_point.push(crate::cover::set_diameter(space, &fiber));
        }
        out.push(per_point);
    }
    out
}
