//! Covers of a space by subsets, colored covers (families of mutually
//! far-apart sets), scale-dependent dimension search, and schedule-driven
//! decompositions where family i must be R_i-disjoint.

use crate::error::{budget, validation, Result};
use crate::space::{FiniteMetricSpace, SLACK};
use rayon::prelude::*;

/// Minimum distance between two point sets (infinite if either is empty).
pub fn set_distance(space: &FiniteMetricSpace, a: &[usize], b: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for &p in a {
        for &q in b {
            let d = space.dist(p, q);
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Diameter of a point set (0 if empty or a singleton).
pub fn set_diameter(space: &FiniteMetricSpace, a: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for (i, &p) in a.iter().enumerate() {
        for &q in &a[i + 1..] {
            best = best.max(space.dist(p, q));
        }
    }
    best
}

/// A plain cover: a list of point sets whose union is expected to be the
/// whole space (checked where it matters, not at construction).
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub sets: Vec<Vec<usize>>,
}

impl Cover {
    pub fn new(space: &FiniteMetricSpace, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        for s in &mut sets {
            if s.is_empty() {
                return Err(validation("cover sets must be nonempty"));
            }
            s.sort_unstable();
            s.dedup();
            if *s.last().unwrap() >= space.n() {
                return Err(validation("cover set references a point out of range"));
            }
        }
        Ok(Cover { sets })
    }

    pub fn uncovered(&self, space: &FiniteMetricSpace) -> Vec<usize> {
        let mut hit = vec![false; space.n()];
        for s in &self.sets {
            for &p in s {
                hit[p] = true;
            }
        }
        (0..space.n()).filter(|&p| !hit[p]).collect()
    }

    /// Replace every set by its closed r-neighborhood.
    pub fn enlarge(&self, space: &FiniteMetricSpace, r: f64) -> Cover {
        let sets = self
            .sets
            .iter()
            .map(|s| {
                (0..space.n())
                    .filter(|&p| set_distance(space, &[p], s) <= r + SLACK)
                    .collect()
            })
            .collect();
        Cover { sets }
    }
}

/// Per-point and global cover statistics. The per-point Lebesgue value of x
/// is the largest realized distance r such that the closed r-ball around x
/// fits inside one cover member (infinite when a member is the whole space,
/// surfaced as an "unbounded" sentinel at the serialization layer).
#[derive(Debug, Clone)]
pub struct CoverStats {
    pub n_sets: usize,
    pub multiplicity: usize,
    pub mesh_global: f64,
    pub lebesgue: f64,
    pub per_point_lebesgue: Vec<f64>,
    pub per_point_mesh: Vec<f64>,
    pub per_point_order: Vec<usize>,
}

pub fn cover_stats(space: &FiniteMetricSpace, cover: &Cover) -> Result<CoverStats> {
    let missing = cover.uncovered(space);
    if !missing.is_empty() {
        return Err(validation(format!(
            "cover misses {} points (first: {})",
            missing.len(),
            space.id(missing[0])
        )));
    }
    let n = space.n();
    let diams: Vec<f64> = cover.sets.iter().map(|s| set_diameter(space, s)).collect();
    let mut member = vec![false; n * cover.sets.len()];
    for (si, s) in cover.sets.iter().enumerate() {
        for &p in s {
            member[p * cover.sets.len() + si] = true;
        }
    }
    let mut per_point_lebesgue = vec![0.0f64; n];
    let mut per_point_mesh = vec![0.0f64; n];
    let mut per_point_order = vec![0usize; n];
    for x in 0..n {
        let mut leb = 0.0f64;
        let mut mesh = 0.0f64;
        let mut order = 0usize;
        for (si, s) in cover.sets.iter().enumerate() {
            if !member[x * cover.sets.len() + si] {
                continue;
            }
            order += 1;
            mesh = mesh.max(diams[si]);
            if s.len() == n {
                leb = f64::INFINITY;
            } else {
                // gap to the complement, then the largest realized distance
                // strictly below the gap: that closed ball sits inside s
                let mut gap = f64::INFINITY;
                for q in 0..n {
                    if !member[q * cover.sets.len() + si] {
                        gap = gap.min(space.dist(x, q));
                    }
                }
                let mut ball = 0.0f64;
                for q in 0..n {
                    let d = space.dist(x, q);
                    if d < gap && d > ball {
                        ball = d;
                    }
                }
                leb = leb.max(ball);
            }
        }
        per_point_lebesgue[x] = leb;
        per_point_mesh[x] = mesh;
        per_point_order[x] = order;
    }
    Ok(CoverStats {
        n_sets: cover.sets.len(),
        multiplicity: per_point_order.iter().copied().max().unwrap_or(0),
        mesh_global: diams.iter().copied().fold(0.0, f64::max),
        lebesgue: per_point_lebesgue.iter().copied().fold(f64::INFINITY, f64::min),
        per_point_lebesgue,
        per_point_mesh,
        per_point_order,
    })
}

/// A cover organized into families: within each family, distinct sets must
/// be more than `scale` apart, and every set diameter must stay within
/// `mesh_bound`. `scheme` records how it was built; `optimal_pattern` is
/// false for constructions known to use more families than necessary.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredCover {
    pub scale: f64,
    pub families: Vec<Vec<Vec<usize>>>,
    pub mesh_bound: f64,
    pub scheme: String,
    pub optimal_pattern: bool,
}

impl ColoredCover {
    /// Number of families (the dimension-type reading is this minus one).
    pub fn m(&self) -> usize {
        self.families.len()
    }

    pub fn flatten(&self) -> Cover {
        Cover { sets: self.families.iter().flatten().cloned().collect() }
    }
}

#[derive(Debug, Clone)]
pub struct SeparationViolation {
    pub family: usize,
    pub set_a: usize,
    pub set_b: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct CoverAudit {
    pub uncovered: Vec<usize>,
    pub separation_violations: Vec<SeparationViolation>,
    /// (family, set, diameter) for sets exceeding the recorded mesh bound.
    pub mesh_violations: Vec<(usize, usize, f64)>,
    pub realized_mesh: f64,
    /// Minimum pairwise set distance per family (infinite for families with
    /// fewer than two sets).
    pub family_separation: Vec<f64>,
}

impl CoverAudit {
    pub fn passed(&self) -> bool {
        self.uncovered.is_empty()
            && self.separation_violations.is_empty()
            && self.mesh_violations.is_empty()
    }
}

/// Independent checker for colored covers: coverage, per-family separation
/// strictly above the scale (with slack), and the recorded mesh bound.
pub fn audit_colored_cover(space: &FiniteMetricSpace, cc: &ColoredCover) -> Result<CoverAudit> {
    for fam in &cc.families {
        for s in fam {
            if s.is_empty() {
                return Err(validation("colored cover contains an empty set"));
            }
            if s.iter().any(|&p| p >= space.n()) {
                return Err(validation("colored cover references a point out of range"));
            }
        }
    }
    let uncovered = cc.flatten().uncovered(space);
    let mut separation_violations = Vec::new();
    let mut family_separation = Vec::new();
    for (fi, fam) in cc.families.iter().enumerate() {
        let pairs: Vec<(usize, usize)> = (0..fam.len())
            .flat_map(|a| ((a + 1)..fam.len()).map(move |b| (a, b)))
            .collect();
        let dists: Vec<f64> = pairs
            .par_iter()
            .map(|&(a, b)| set_distance(space, &fam[a], &fam[b]))
            .collect();
        let mut fam_min = f64::INFINITY;
        for (&(a, b), &d) in pairs.iter().zip(&dists) {
            fam_min = fam_min.min(d);
            // separation must be strictly above the scale, with slack in
            // the cover's favor to absorb float noise
            if d <= cc.scale - SLACK {
                separation_violations.push(SeparationViolation {
                    family: fi,
                    set_a: a,
                    set_b: b,
                    distance: d,
                });
            }
        }
        family_separation.push(fam_min);
    }
    let mut mesh_violations = Vec::new();
    let mut realized_mesh = 0.0f64;
    for (fi, fam) in cc.families.iter().enumerate() {
        for (si, s) in fam.iter().enumerate() {
            let d = set_diameter(space, s);
            realized_mesh = realized_mesh.max(d);
            if d > cc.mesh_bound + SLACK {
                mesh_violations.push((fi, si, d));
            }
        }
    }
    Ok(CoverAudit {
        uncovered,
        separation_violations,
        mesh_violations,
        realized_mesh,
        family_separation,
    })
}

/// Brick-pattern colored cover for grid spaces. Dimension 1 uses two
/// alternating families of intervals of length 2c (c = ceil(scale));
/// dimension 2 uses the offset brick-wall with three families; higher
/// dimensions fall back to the product of 1-D patterns with 2^dim families
/// (flagged as a non-optimal pattern). Scale 0 degenerates to one family of
/// singletons.
pub fn brick_colored_cover(space: &FiniteMetricSpace, scale: f64) -> Result<ColoredCover> {
    let Some((dim, side)) = space.grid_shape() else {
        return Err(validation("brick covers require a grid space"));
    };
    if !scale.is_finite() || scale < 0.0 {
        return Err(validation("scale must be finite and nonnegative"));
    }
    if scale == 0.0 {
        let families = vec![(0..space.n()).map(|p| vec![p]).collect()];
        return Ok(ColoredCover {
            scale,
            families,
            mesh_bound: 0.0,
            scheme: "singletons".into(),
            optimal_pattern: true,
        });
    }
    let c = scale.ceil() as i64;
    let s = side as i64;
    match dim {
        1 => {
            // blocks [2c*k, 2c*k + 2c - 1]; family = parity of k
            let mut families: Vec<Vec<Vec<usize>>> = vec![Vec::new(), Vec::new()];
            let mut k = 0i64;
            while 2 * c * k < s {
                let lo = 2 * c * k;
                let hi = (2 * c * k + 2 * c - 1).min(s - 1);
                let set: Vec<usize> = (lo..=hi).map(|x| x as usize).collect();
                families[(k % 2) as usize].push(set);
                k += 1;
            }
            families.retain(|f| !f.is_empty());
            Ok(ColoredCover {
                scale,
                families,
                mesh_bound: (2 * c - 1) as f64,
                scheme: "interval blocks".into(),
                optimal_pattern: true,
            })
        }
        2 => {
            // rows of height 2c; bricks of width 2c with row r shifted by
            // r*c; color = (brick column + 2 * row) mod 3
            let mut families: Vec<Vec<Vec<usize>>> = vec![Vec::new(), Vec::new(), Vec::new()];
            let mut r = 0i64;
            while 2 * c * r < s {
                let ylo = 2 * c * r;
                let yhi = (2 * c * r + 2 * c - 1).min(s - 1);
                let offset = r * c;
                // brick j covers x in [2c*j + offset, 2c*j + offset + 2c - 1]
                let jmin = (-offset - (2 * c - 1)).div_euclid(2 * c);
                let jmax = (s - 1 - offset).div_euclid(2 * c);
                for j in jmin..=jmax {
                    let xlo = (2 * c * j + offset).max(0);
                    let xhi = (2 * c * j + offset + 2 * c - 1).min(s - 1);
                    if xlo > xhi {
                        continue;
                    }
                    let mut set = Vec::new();
                    for x in xlo..=xhi {
                        for y in ylo..=yhi {
                            set.push((x * s + y) as usize);
                        }
                    }
                    families[((j + 2 * r).rem_euclid(3)) as usize].push(set);
                }
                r += 1;
            }
            families.retain(|f| !f.is_empty());
            Ok(ColoredCover {
                scale,
                families,
                mesh_bound: (4 * c - 2) as f64,
                scheme: "brick wall".into(),
                optimal_pattern: true,
            })
        }
        _ => {
            // product of 1-D block patterns: one family per parity vector
            let blocks_per_axis = (s + 2 * c - 1).div_euclid(2 * c);
            let n_sets_bound = (blocks_per_axis as usize).checked_pow(dim as u32);
            if n_sets_bound.is_none() {
                return Err(budget("brick product scheme too large"));
            }
            let mut families: Vec<Vec<Vec<usize>>> = vec![Vec::new(); 1 << dim];
            // enumerate block index vectors
            let mut idx = vec![0i64; dim];
            loop {
                let mut set = Vec::new();
                let mut coords = vec![0i64; dim];
                collect_block(space, &idx, c, s, dim, 0, &mut coords, &mut set);
                if !set.is_empty() {
                    let fam: usize = idx
                        .iter()
                        .enumerate()
                        .map(|(axis, &k)| (((k % 2) as usize) & 1) << axis)
                        .sum();
                    set.sort_unstable();
                    families[fam].push(set);
                }
                // advance the block-vector odometer
                let mut axis = 0;
                loop {
                    if axis == dim {
                        break;
                    }
                    idx[axis] += 1;
                    if 2 * c * idx[axis] < s {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
                if axis == dim {
                    break;
                }
            }
            families.retain(|f| !f.is_empty());
            Ok(ColoredCover {
                scale,
                families,
                mesh_bound: (dim as i64 * (2 * c - 1)) as f64,
                scheme: format!("product of 1-D blocks ({} families)", 1usize << dim),
                optimal_pattern: false,
            })
        }
    }
}

fn collect_block(
    space: &FiniteMetricSpace,
    idx: &[i64],
    c: i64,
    s: i64,
    dim: usize,
    axis: usize,
    coords: &mut [i64],
    out: &mut Vec<usize>,
) {
    if axis == dim {
        let mut flat = 0usize;
        for &v in coords.iter() {
            flat = flat * (s as usize) + v as usize;
        }
        debug_assert!(flat < space.n());
        out.push(flat);
        return;
    }
    let lo = (2 * c * idx[axis]).max(0);
    let hi = (2 * c * idx[axis] + 2 * c - 1).min(s - 1);
    for v in lo..=hi {
        coords[axis] = v;
        collect_block(space, idx, c, s, dim, axis + 1, coords, out);
    }
}

/// Outcome of the greedy strategy: either a colored cover, or a report that
/// more families would be needed than the caller allowed (a value, not an
/// error, since heuristic failure is an informative result).
#[derive(Debug)]
pub enum GreedyOutcome {
    Cover(ColoredCover),
    Infeasible { families_needed: usize, max_families: usize },
}

/// Greedy colored cover: walk the points in index order, grow a set of
/// diameter at most `scale` around each uncovered point, then first-fit
/// color the sets so that same-family sets are more than `scale` apart.
pub fn greedy_colored_cover(
    space: &FiniteMetricSpace,
    scale: f64,
    max_families: usize,
) -> Result<GreedyOutcome> {
    if !scale.is_finite() || scale < 0.0 {
        return Err(validation("scale must be finite and nonnegative"));
    }
    if max_families == 0 {
        return Err(validation("max_families must be at least 1"));
    }
    let n = space.n();
    let mut covered = vec![false; n];
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for p in 0..n {
        if covered[p] {
            continue;
        }
        let mut set = vec![p];
        covered[p] = true;
        for q in (p + 1)..n {
            if covered[q] {
                continue;
            }
            if set.iter().all(|&r| space.dist(r, q) <= scale + SLACK) {
                set.push(q);
                covered[q] = true;
            }
        }
        sets.push(set);
    }
    // first-fit coloring of the conflict graph (conflict = distance <= scale)
    let mut color = vec![usize::MAX; sets.len()];
    let mut n_colors = 0usize;
    for i in 0..sets.len() {
        let mut used = vec![false; n_colors];
        for j in 0..i {
            if set_distance(space, &sets[i], &sets[j]) <= scale + SLACK {
                used[color[j]] = true;
            }
        }
        match used.iter().position(|&u| !u) {
            Some(c) => color[i] = c,
            None => {
                color[i] = n_colors;
                n_colors += 1;
            }
        }
    }
    let n_colors = n_colors.max(1);
    if n_colors > max_families {
        return Ok(GreedyOutcome::Infeasible { families_needed: n_colors, max_families });
    }
    let mut families: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n_colors];
    for (i, set) in sets.into_iter().enumerate() {
        families[color[i]].push(set);
    }
    Ok(GreedyOutcome::Cover(ColoredCover {
        scale,
        families,
        mesh_bound: scale,
        scheme: "greedy".into(),
        optimal_pattern: false,
    }))
}

/// Minimal number of families over all decompositions of the space into
/// sets of diameter at most `mesh_cap` (default: the scale itself) that are
/// more-than-`scale` apart within each family. Exhaustive search, capped at
/// 12 points.
pub fn exact_dimension_at_scale(
    space: &FiniteMetricSpace,
    scale: f64,
    mesh_cap: Option<f64>,
) -> Result<(usize, ColoredCover)> {
    const MAX_POINTS: usize = 12;
    let n = space.n();
    if n > MAX_POINTS {
        return Err(budget(format!(
            "exact search supports at most {MAX_POINTS} points, got {n}"
        )));
    }
    if !scale.is_finite() || scale < 0.0 {
        return Err(validation("scale must be finite and nonnegative"));
    }
    let cap = mesh_cap.unwrap_or(scale);
    if !cap.is_finite() || cap < 0.0 {
        return Err(validation("mesh cap must be finite and nonnegative"));
    }

    struct Search<'a> {
        space: &'a FiniteMetricSpace,
        scale: f64,
        cap: f64,
        best: usize,
        best_partition: Vec<Vec<usize>>,
        classes: Vec<Vec<usize>>,
    }
    impl Search<'_> {
        fn chromatic(&self, classes: &[Vec<usize>]) -> usize {
            let m = classes.len();
            let mut conflict = vec![false; m * m];
            for a in 0..m {
                for b in (a + 1)..m {
                    if set_distance(self.space, &classes[a], &classes[b]) <= self.scale + SLACK {
                        conflict[a * m + b] = true;
                        conflict[b * m + a] = true;
                    }
                }
            }
            // exact chromatic number by iterative-deepening backtracking
            'k: for k in 1..=m {
                let mut assign = vec![usize::MAX; m];
                if Self::color(&conflict, m, &mut assign, 0, k) {
                    return k;
                }
                assign.fill(usize::MAX);
                if k == m {
                    break 'k;
                }
            }
            m
        }
        fn color(conflict: &[bool], m: usize, assign: &mut [usize], v: usize, k: usize) -> bool {
            if v == m {
                return true;
            }
            // symmetry break: vertex v may only open color min(v, k-1)
            let limit = k.min(v + 1);
            for c in 0..limit {
                if (0..v).all(|u| !conflict[v * m + u] || assign[u] != c) {
                    assign[v] = c;
                    if Self::color(conflict, m, assign, v + 1, k) {
                        return true;
                    }
                    assign[v] = usize::MAX;
                }
            }
            false
        }
        fn clique_lower_bound(&self) -> usize {
            // greedy clique in the conflict graph of the partial classes:
            // conflicts only appear as classes grow, so this is a valid
            // lower bound on the final chromatic number
            let m = self.classes.len();
            let mut clique: Vec<usize> = Vec::new();
            for a in 0..m {
                if clique.iter().all(|&b| {
                    set_distance(self.space, &self.classes[a], &self.classes[b])
                        <= self.scale + SLACK
                }) {
                    clique.push(a);
                }
            }
            clique.len().max(1)
        }
        fn dfs(&mut self, p: usize, n: usize) {
            if self.best == 1 {
                return;
            }
            if p == n {
                let chi = self.chromatic(&self.classes);
                if chi < self.best {
                    self.best = chi;
                    self.best_partition = self.classes.clone();
                }
                return;
            }
            if self.clique_lower_bound() >= self.best {
                return;
            }
            for ci in 0..self.classes.len() {
                if self.classes[ci]
                    .iter()
                    .all(|&q| self.space.dist(p, q) <= self.cap + SLACK)
                {
                    self.classes[ci].push(p);
                    self.dfs(p + 1, n);
                    self.classes[ci].pop();
                }
            }
            self.classes.push(vec![p]);
            self.dfs(p + 1, n);
            self.classes.pop();
        }
    }

    let mut search = Search {
        space,
        scale,
        cap,
        best: usize::MAX,
        best_partition: Vec::new(),
        classes: Vec::new(),
    };
    search.dfs(0, n);
    let m = search.best;
    // reconstruct the family assignment for the winning partition
    let classes = search.best_partition;
    let mm = classes.len();
    let mut conflict = vec![false; mm * mm];
    for a in 0..mm {
        for b in (a + 1)..mm {
            if set_distance(space, &classes[a], &classes[b]) <= scale + SLACK {
                conflict[a * mm + b] = true;
                conflict[b * mm + a] = true;
            }
        }
    }
    let mut assign = vec![usize::MAX; mm];
    let ok = Search::color(&conflict, mm, &mut assign, 0, m);
    debug_assert!(ok, "witness partition must be colorable with the optimal count");
    let mut families: Vec<Vec<Vec<usize>>> = vec![Vec::new(); m];
    for (ci, class) in classes.into_iter().enumerate() {
        families[assign[ci]].push(class);
    }
    let cover = ColoredCover {
        scale,
        families,
        mesh_bound: cap,
        scheme: "exact".into(),
        optimal_pattern: true,
    };
    Ok((m, cover))
}

/// One row of a dimension profile: at scale L the space was decomposed into
/// m families, giving the dimension-type reading d = m - 1 and the
/// slow-growth ratio d/L.
#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub scale: f64,
    pub m: usize,
    pub d: usize,
    pub ratio: f64,
    pub mesh_bound: f64,
    pub strategy: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileStrategy {
    Brick,
    Greedy { max_families: usize },
    Exact,
}

/// Audited dimension profile: one row per scale, each backed by a cover
/// that passed the independent audit. Greedy infeasibility is reported as
/// an error here since a profile row cannot be left without a certificate.
pub fn dimension_profile(
    space: &FiniteMetricSpace,
    scales: &[f64],
    strategy: ProfileStrategy,
) -> Result<(Vec<ProfileRow>, Vec<ColoredCover>)> {
    if scales.is_empty() {
        return Err(validation("profile needs at least one scale"));
    }
    let mut rows = Vec::new();
    let mut certs = Vec::new();
    for &scale in scales {
        let (cover, tag) = match strategy {
            ProfileStrategy::Brick => (brick_colored_cover(space, scale)?, "brick"),
            ProfileStrategy::Greedy { max_families } => {
                match greedy_colored_cover(space, scale, max_families)? {
                    GreedyOutcome::Cover(c) => (c, "greedy"),
                    GreedyOutcome::Infeasible { families_needed, .. } => {
                        return Err(validation(format!(
                            "greedy needs {families_needed} families at scale {scale}"
                        )))
                    }
                }
            }
            ProfileStrategy::Exact => (exact_dimension_at_scale(space, scale, None)?.1, "exact"),
        };
        let audit = audit_colored_cover(space, &cover)?;
        if !audit.passed() {
            return Err(crate::error::invariant(format!(
                "certificate cover failed its audit at scale {scale}"
            )));
        }
        let m = cover.m();
        rows.push(ProfileRow {
            scale,
            m,
            d: m - 1,
            ratio: if scale > 0.0 { (m - 1) as f64 / scale } else { f64::NAN },
            mesh_bound: cover.mesh_bound,
            strategy: tag.to_string(),
        });
        certs.push(cover);
    }
    Ok((rows, certs))
}

/// A schedule-driven decomposition: family i (possibly empty) must have its
/// distinct sets more than `scales[i]` apart, and the union must cover.
#[derive(Debug, Clone)]
pub struct PropertyCSchedule {
    pub scales: Vec<f64>,
    pub families: Vec<Vec<Vec<usize>>>,
    pub mesh_bound: f64,
    pub scheme: String,
}

#[derive(Debug)]
pub enum PropertyCOutcome {
    Schedule(PropertyCSchedule),
    Infeasible { uncovered: Vec<usize>, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyCStrategy {
    /// Brick families at the largest scale, assigned to the last slots.
    Grid,
    /// Greedy set placement, filling larger-scale slots first.
    Greedy,
}

pub fn property_c_decomposition(
    space: &FiniteMetricSpace,
    scales: &[f64],
    strategy: PropertyCStrategy,
) -> Result<PropertyCOutcome> {
    if scales.is_empty() {
        return Err(validation("schedule must be nonempty"));
    }
    if scales.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(validation("schedule scales must be finite and nonnegative"));
    }
    if scales.windows(2).any(|w| w[0] > w[1]) {
        return Err(validation("schedule scales must be nondecreasing"));
    }
    let k = scales.len();
    match strategy {
        PropertyCStrategy::Grid => {
            let top = *scales.last().unwrap();
            let bricks = brick_colored_cover(space, top)?;
            let needed = bricks.m();
            if needed > k {
                return Ok(PropertyCOutcome::Infeasible {
                    uncovered: Vec::new(),
                    detail: format!(
                        "grid pattern needs {needed} families but the schedule has {k} slots"
                    ),
                });
            }
            // brick families are all more than `top` >= every R_i apart, so
            // any slots work; fill the largest slots, leave the rest empty
            let mut families: Vec<Vec<Vec<usize>>> = vec![Vec::new(); k];
            for (offset, fam) in bricks.families.into_iter().enumerate() {
                families[k - needed + offset] = fam;
            }
            Ok(PropertyCOutcome::Schedule(PropertyCSchedule {
                scales: scales.to_vec(),
                families,
                mesh_bound: bricks.mesh_bound,
                scheme: format!("grid bricks at scale {top}"),
            }))
        }
        PropertyCStrategy::Greedy => {
            let n = space.n();
            let mut covered = vec![false; n];
            let mut families: Vec<Vec<Vec<usize>>> = vec![Vec::new(); k];
            let mut mesh = 0.0f64;
            for slot in (0..k).rev() {
                let r = scales[slot];
                for p in 0..n {
                    if covered[p] {
                        continue;
                    }
                    let mut set = vec![p];
                    for q in (p + 1)..n {
                        if covered[q] {
                            continue;
                        }
                        if set.iter().all(|&s| space.dist(s, q) <= r + SLACK) {
                            set.push(q);
                        }
                    }
                    let far = families[slot]
                        .iter()
                        .all(|other| set_distance(space, &set, other) > r + SLACK);
                    if far {
                        for &q in &set {
                            covered[q] = true;
                        }
                        mesh = mesh.max(set_diameter(space, &set));
                        families[slot].push(set);
                    }
                }
            }
            let uncovered: Vec<usize> = (0..n).filter(|&p| !covered[p]).collect();
            if uncovered.is_empty() {
                Ok(PropertyCOutcome::Schedule(PropertyCSchedule {
                    scales: scales.to_vec(),
                    families,
                    mesh_bound: mesh,
                    scheme: "greedy, largest scale first".into(),
                }))
            } else {
                Ok(PropertyCOutcome::Infeasible {
                    detail: format!("{} points left uncovered", uncovered.len()),
                    uncovered,
                })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropertyCAudit {
    pub uncovered: Vec<usize>,
    pub separation_violations: Vec<SeparationViolation>,
    pub realized_mesh: f64,
}

impl PropertyCAudit {
    pub fn passed(&self) -> bool {
        self.uncovered.is_empty() && self.separation_violations.is_empty()
    }
}

/// Independent checker for schedule decompositions: coverage plus exactly
/// R_i-disjointness for family i.
pub fn audit_property_c(
    space: &FiniteMetricSpace,
    sched: &PropertyCSchedule,
) -> Result<PropertyCAudit> {
    if sched.families.len() != sched.scales.len() {
        return Err(validation("family count must match the schedule length"));
    }
    let mut hit = vec![false; space.n()];
    let mut separation_violations = Vec::new();
    let mut realized_mesh = 0.0f64;
    for (fi, fam) in sched.families.iter().enumerate() {
        for (si, s) in fam.iter().enumerate() {
            if s.is_empty() {
                return Err(validation("schedule family contains an empty set"));
            }
            for &p in s {
                if p >= space.n() {
                    return Err(validation("schedule references a point out of range"));
                }
                hit[p] = true;
            }
            realized_mesh = realized_mesh.max(set_diameter(space, s));
            for (sj, t) in fam.iter().enumerate().take(si) {
                let d = set_distance(space, s, t);
                if d <= sched.scales[fi] - SLACK {
                    separation_violations.push(SeparationViolation {
                        family: fi,
                        set_a: sj,
                        set_b: si,
                        distance: d,
                    });
                }
            }
        }
    }
    let uncovered = (0..space.n()).filter(|&p| !hit[p]).collect();
    Ok(PropertyCAudit { uncovered, separation_violations, realized_mesh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Budget;

    fn grid(dim: usize, side: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::grid(dim, side, &Budget::default()).unwrap()
    }

    fn path(n: usize) -> FiniteMetricSpace {
        grid(1, n)
    }

    fn complete(n: usize) -> FiniteMetricSpace {
        let mut m = vec![vec![1.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        FiniteMetricSpace::from_matrix(
            "complete",
            (0..n).map(|i| format!("k{i}")).collect(),
            "k0",
            m,
            &Budget::default(),
        )
        .unwrap()
    }

    #[test]
    fn stats_of_singleton_cover() {
        let sp = grid(2, 3);
        let cover = Cover::new(&sp, (0..sp.n()).map(|p| vec![p]).collect()).unwrap();
        let st = cover_stats(&sp, &cover).unwrap();
        assert_eq!(st.multiplicity, 1);
        assert_eq!(st.mesh_global, 0.0);
        assert_eq!(st.lebesgue, 0.0);
    }

    #[test]
    fn stats_whole_space_set_is_unbounded() {
        let sp = grid(1, 5);
        let cover = Cover::new(&sp, vec![(0..5).collect()]).unwrap();
        let st = cover_stats(&sp, &cover).unwrap();
        assert!(st.lebesgue.is_infinite());
        assert_eq!(st.mesh_global, 4.0);
        assert_eq!(st.multiplicity, 1);
    }

    #[test]
    fn stats_match_ball_containment_oracle() {
        let sp = grid(2, 6);
        let cover = brick_colored_cover(&sp, 2.0).unwrap().flatten();
        let st = cover_stats(&sp, &cover).unwrap();
        // oracle: directly test containment of every realized ball
        for x in 0..sp.n() {
            let mut radii: Vec<f64> = (0..sp.n()).map(|q| sp.dist(x, q)).collect();
            radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
            radii.dedup();
            let mut best = 0.0f64;
            for &r in &radii {
                let ball: Vec<usize> =
                    (0..sp.n()).filter(|&q| sp.dist(x, q) <= r).collect();
                if cover.sets.iter().any(|s| ball.iter().all(|q| s.contains(q))) {
                    best = best.max(r);
                }
            }
            assert_eq!(st.per_point_lebesgue[x], best, "point {x}");
            let order = cover.sets.iter().filter(|s| s.contains(&x)).count();
            assert_eq!(st.per_point_order[x], order);
        }
        assert_eq!(st.multiplicity, *st.per_point_order.iter().max().unwrap());
    }

    #[test]
    fn stats_reject_non_covering_input() {
        let sp = grid(1, 4);
        let cover = Cover::new(&sp, vec![vec![0, 1]]).unwrap();
        assert_eq!(cover_stats(&sp, &cover).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn brick_1d_two_audited_families() {
        let sp = grid(1, 100);
        let cc = brick_colored_cover(&sp, 5.0).unwrap();
        assert_eq!(cc.m(), 2);
        let audit = audit_colored_cover(&sp, &cc).unwrap();
        assert!(audit.passed(), "{audit:?}");
        assert!(audit.realized_mesh <= 2.0 * 5.0f64.ceil() - 1.0);
        for &sep in &audit.family_separation {
            assert!(sep > 5.0);
        }
    }

    #[test]
    fn brick_2d_three_audited_families() {
        let sp = grid(2, 60);
        let cc = brick_colored_cover(&sp, 3.0).unwrap();
        assert_eq!(cc.m(), 3);
        assert!(cc.mesh_bound <= 6.0 * 3.0f64.ceil());
        let audit = audit_colored_cover(&sp, &cc).unwrap();
        assert!(audit.passed(), "{:?}", audit.separation_violations);
    }

    #[test]
    fn brick_scale_zero_gives_singletons() {
        let sp = grid(2, 4);
        let cc = brick_colored_cover(&sp, 0.0).unwrap();
        assert_eq!(cc.m(), 1);
        assert_eq!(cc.mesh_bound, 0.0);
        assert!(audit_colored_cover(&sp, &cc).unwrap().passed());
    }

    #[test]
    fn brick_3d_product_scheme_flagged() {
        let sp = grid(3, 9);
        let cc = brick_colored_cover(&sp, 2.0).unwrap();
        assert_eq!(cc.m(), 8);
        assert!(!cc.optimal_pattern);
        assert!(audit_colored_cover(&sp, &cc).unwrap().passed());
    }

    #[test]
    fn greedy_complete_graph_single_family() {
        let sp = complete(7);
        match greedy_colored_cover(&sp, 1.0, 4).unwrap() {
            GreedyOutcome::Cover(cc) => {
                assert_eq!(cc.m(), 1);
                assert_eq!(cc.families[0].len(), 1);
                assert_eq!(cc.families[0][0].len(), 7);
                assert!(audit_colored_cover(&sp, &cc).unwrap().passed());
            }
            GreedyOutcome::Infeasible { .. } => panic!("expected a cover"),
        }
    }

    #[test]
    fn greedy_path_ten_two_families() {
        let sp = path(10);
        match greedy_colored_cover(&sp, 2.0, 2).unwrap() {
            GreedyOutcome::Cover(cc) => {
                assert!(cc.m() <= 2);
                assert!(audit_colored_cover(&sp, &cc).unwrap().passed());
            }
            GreedyOutcome::Infeasible { .. } => panic!("expected success"),
        }
    }

    fn petersen() -> FiniteMetricSpace {
        // outer 5-cycle 0-4, inner pentagram 5-9, spokes i -(i+5)
        let mut edges = Vec::new();
        for i in 0..5usize {
            edges.push((i, (i + 1) % 5, 1.0));
            edges.push((5 + i, 5 + (i + 2) % 5, 1.0));
            edges.push((i, 5 + i, 1.0));
        }
        FiniteMetricSpace::from_graph(
            "petersen",
            (0..10).map(|i| format!("v{i}")).collect(),
            "v0",
            &edges,
            &Budget::default(),
        )
        .unwrap()
    }

    #[test]
    fn greedy_failure_is_a_value_and_exact_confirms_infeasibility() {
        let sp = petersen();
        match greedy_colored_cover(&sp, 1.0, 1).unwrap() {
            GreedyOutcome::Infeasible { families_needed, max_families } => {
                assert!(families_needed > 1);
                assert_eq!(max_families, 1);
            }
            GreedyOutcome::Cover(_) => panic!("expected infeasibility"),
        }
        // exhaustive check: no single 1-disjoint family of diameter-1 sets
        let (m, cert) = exact_dimension_at_scale(&sp, 1.0, None).unwrap();
        assert!(m > 1);
        assert!(audit_colored_cover(&sp, &cert).unwrap().passed());
    }

    #[test]
    fn exact_two_far_points_single_family() {
        let sp = FiniteMetricSpace::from_matrix(
            "pair",
            vec!["a".into(), "b".into()],
            "a",
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            &Budget::default(),
        )
        .unwrap();
        let (m, cert) = exact_dimension_at_scale(&sp, 5.0, None).unwrap();
        assert_eq!(m, 1);
        assert!(audit_colored_cover(&sp, &cert).unwrap().passed());
    }

    #[test]
    fn exact_path_six_needs_two_families() {
        let (m, cert) = exact_dimension_at_scale(&path(6), 2.0, None).unwrap();
        assert_eq!(m, 2);
        assert!(audit_colored_cover(&path(6), &cert).unwrap().passed());
    }

    #[test]
    fn exact_complete_four_whole_space() {
        let sp = complete(4);
        let (m, cert) = exact_dimension_at_scale(&sp, 2.0, None).unwrap();
        assert_eq!(m, 1);
        assert!(audit_colored_cover(&sp, &cert).unwrap().passed());
    }

    #[test]
    fn exact_rejects_large_spaces() {
        assert_eq!(
            exact_dimension_at_scale(&path(13), 1.0, None).unwrap_err().exit_code(),
            4
        );
    }

    #[test]
    fn heuristics_never_beat_exact() {
        let sp = path(12);
        for scale in [1.0, 2.0, 3.0] {
            let brick = brick_colored_cover(&sp, scale).unwrap();
            let audit = audit_colored_cover(&sp, &brick).unwrap();
            assert!(audit.passed());
            let (m_at_brick_mesh, _) =
                exact_dimension_at_scale(&sp, scale, Some(audit.realized_mesh)).unwrap();
            assert!(m_at_brick_mesh <= brick.m());
            if let GreedyOutcome::Cover(g) = greedy_colored_cover(&sp, scale, 8).unwrap() {
                let (m_exact, _) = exact_dimension_at_scale(&sp, scale, None).unwrap();
                assert!(m_exact <= g.m());
            } else {
                panic!("greedy should succeed on a path");
            }
        }
    }

    #[test]
    fn profile_rows_are_audited_and_monotone_safe() {
        let sp = grid(2, 24);
        let (rows, certs) =
            dimension_profile(&sp, &[2.0, 5.0, 10.0], ProfileStrategy::Brick).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!(row.d, 2);
            assert_eq!(row.m, 3);
        }
        for w in rows.windows(2) {
            assert!(w[0].mesh_bound <= w[1].mesh_bound);
            assert!(w[0].ratio >= w[1].ratio, "slow-growth ratio must not increase");
        }
        assert_eq!(certs.len(), 3);

        let (rows1, _) = dimension_profile(&path(50), &[1.0, 4.0], ProfileStrategy::Brick).unwrap();
        for row in &rows1 {
            assert_eq!(row.d, 1);
        }
    }

    #[test]
    fn profile_exact_matches_direct_call() {
        let sp = path(10);
        let (rows, _) = dimension_profile(&sp, &[2.0], ProfileStrategy::Exact).unwrap();
        let (m, _) = exact_dimension_at_scale(&sp, 2.0, None).unwrap();
        assert_eq!(rows[0].m, m);
    }

    #[test]
    fn property_c_grid_strategies_pass_audit() {
        let line = grid(1, 200);
        match property_c_decomposition(&line, &[4.0, 16.0], PropertyCStrategy::Grid).unwrap() {
            PropertyCOutcome::Schedule(s) => {
                let audit = audit_property_c(&line, &s).unwrap();
                assert!(audit.passed(), "{:?}", audit.separation_violations);
            }
            PropertyCOutcome::Infeasible { detail, .. } => panic!("{detail}"),
        }
        let sq = grid(2, 60);
        match property_c_decomposition(&sq, &[3.0, 9.0, 27.0], PropertyCStrategy::Grid).unwrap() {
            PropertyCOutcome::Schedule(s) => {
                assert_eq!(s.families.iter().filter(|f| !f.is_empty()).count(), 3);
                let audit = audit_property_c(&sq, &s).unwrap();
                assert!(audit.passed());
            }
            PropertyCOutcome::Infeasible { detail, .. } => panic!("{detail}"),
        }
    }

    #[test]
    fn property_c_single_slot_reduction() {
        // two far points: one slot suffices via singleton sets
        let sp = FiniteMetricSpace::from_matrix(
            "pair",
            vec!["a".into(), "b".into()],
            "a",
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            &Budget::default(),
        )
        .unwrap();
        match property_c_decomposition(&sp, &[5.0], PropertyCStrategy::Greedy).unwrap() {
            PropertyCOutcome::Schedule(s) => {
                assert!(audit_property_c(&sp, &s).unwrap().passed());
            }
            PropertyCOutcome::Infeasible { detail, .. } => panic!("{detail}"),
        }
        // a path cannot be covered by one widely-separated family
        match property_c_decomposition(&path(12), &[2.0], PropertyCStrategy::Greedy).unwrap() {
            PropertyCOutcome::Schedule(_) => panic!("expected infeasibility"),
            PropertyCOutcome::Infeasible { uncovered, .. } => assert!(!uncovered.is_empty()),
        }
    }

    #[test]
    fn property_c_rejects_decreasing_schedule() {
        let sp = path(5);
        let err =
            property_c_decomposition(&sp, &[9.0, 3.0], PropertyCStrategy::Greedy).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn enlarge_matches_brute_force_neighborhoods() {
        let sp = grid(2, 5);
        let cover = Cover::new(&sp, vec![vec![0], vec![12], vec![24]]).unwrap();
        let big = cover.enlarge(&sp, 2.0);
        for (orig, grown) in cover.sets.iter().zip(&big.sets) {
            let expect: Vec<usize> = (0..sp.n())
                .filter(|&p| orig.iter().any(|&q| sp.dist(p, q) <= 2.0))
                .collect();
            assert_eq!(*grown, expect);
        }
    }
}
