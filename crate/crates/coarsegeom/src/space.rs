//! Finite pointed metric spaces with pluggable distance storage.
//!
//! Small or irregular spaces carry a dense matrix; axis-aligned integer grids
//! use the closed-form l1 distance so grids near the point budget never
//! allocate a quadratic table.

use crate::error::{budget, validation, Result};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Absolute slack used for every in-scope inequality check.
pub const SLACK: f64 = 1e-9;
/// Tighter slack reserved for measure-weight normalization.
pub const WEIGHT_SLACK: f64 = 1e-12;

/// Size budgets. `max_points` caps any space, `max_dense` caps spaces that
/// need a dense distance matrix (grids are exempt, they use a closed form).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Budget {
    pub max_points: usize,
    pub max_dense: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_points: 20_000, max_dense: 5_000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum Generator {
    Grid { dim: usize, side: usize },
    Cayley {
        generators: Vec<String>,
        relators: Vec<String>,
        radius: usize,
        /// Distances are computed inside the ball only, so they can exceed
        /// the group distance near the boundary for presentations where
        /// geodesics leave the ball. Consumers wanting certified-exact
        /// interior distances may trim an outer shell of this width.
        boundary_distortion: bool,
        suggested_trim: usize,
    },
    Matrix,
    Graph,
    Derived(String),
}

#[derive(Debug)]
enum DistData {
    Dense(Vec<f64>),
    GridL1 { dim: usize, side: usize },
}

/// A finite metric space with a distinguished basepoint. Points are opaque
/// string ids; all operations work on indices.
#[derive(Debug)]
pub struct FiniteMetricSpace {
    name: String,
    ids: Vec<String>,
    basepoint: usize,
    dist: DistData,
    norms: Vec<f64>,
    generator: Generator,
    diameter: OnceLock<f64>,
}

impl FiniteMetricSpace {
    /// Integer grid `{0..side-1}^dim` with the l1 metric, basepoint at the
    /// origin. Point ids are coordinates joined by `_`.
    pub fn grid(dim: usize, side: usize, bud: &Budget) -> Result<Self> {
        if dim == 0 || side == 0 {
            return Err(validation("grid needs dim >= 1 and side >= 1"));
        }
        let mut n: usize = 1;
        for _ in 0..dim {
            n = n
                .checked_mul(side)
                .filter(|&m| m <= bud.max_points)
                .ok_or_else(|| budget(format!("grid size {side}^{dim} exceeds {} points", bud.max_points)))?;
        }
        let mut ids = Vec::with_capacity(n);
        let mut coords = vec![0usize; dim];
        for _ in 0..n {
            ids.push(coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("_"));
            for k in (0..dim).rev() {
                coords[k] += 1;
                if coords[k] < side {
                    break;
                }
                coords[k] = 0;
            }
        }
        let mut sp = FiniteMetricSpace {
            name: format!("grid{dim}d_{side}"),
            ids,
            basepoint: 0,
            dist: DistData::GridL1 { dim, side },
            norms: Vec::new(),
            generator: Generator::Grid { dim, side },
            diameter: OnceLock::new(),
        };
        sp.norms = (0..n).map(|i| sp.dist(i, 0)).collect();
        Ok(sp)
    }

    /// Space from an explicit distance matrix. Checks shape, symmetry,
    /// zero diagonal, positivity and finiteness; run [`verify_metric`] for
    /// the full (cubic) triangle-inequality audit.
    pub fn from_matrix(
        name: &str,
        ids: Vec<String>,
        basepoint: &str,
        matrix: Vec<Vec<f64>>,
        bud: &Budget,
    ) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(validation("a space needs at least one point"));
        }
        if n > bud.max_dense {
            return Err(budget(format!("{n} points exceeds dense budget {}", bud.max_dense)));
        }
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(validation(format!("distance matrix must be {n}x{n}")));
        }
        let mut uniq = ids.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != n {
            return Err(validation("point ids must be pairwise distinct"));
        }
        let basepoint = ids
            .iter()
            .position(|p| p == basepoint)
            .ok_or_else(|| validation(format!("basepoint {basepoint:?} is not a point")))?;
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let d = matrix[i][j];
                if !d.is_finite() {
                    return Err(validation(format!("d({i},{j}) is not finite")));
                }
                if i == j && d != 0.0 {
                    return Err(validation(format!("d({i},{i}) = {d}, diagonal must be 0")));
                }
                if i != j && d <= 0.0 {
                    return Err(validation(format!("d({i},{j}) = {d}, off-diagonal must be positive")));
                }
                if (d - matrix[j][i]).abs() > SLACK {
                    return Err(validation(format!("matrix not symmetric at ({i},{j})")));
                }
                flat.push(d);
            }
        }
        let mut sp = FiniteMetricSpace {
            name: name.to_string(),
            ids,
            basepoint,
            dist: DistData::Dense(flat),
            norms: Vec::new(),
            generator: Generator::Matrix,
            diameter: OnceLock::new(),
        };
        sp.norms = (0..n).map(|i| sp.dist(i, basepoint)).collect();
        Ok(sp)
    }

    /// Shortest-path metric of a connected weighted graph (Floyd-Warshall
    /// closure). Edge weights must be positive.
    pub fn from_graph(
        name: &str,
        ids: Vec<String>,
        basepoint: &str,
        edges: &[(usize, usize, f64)],
        bud: &Budget,
    ) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(validation("a space needs at least one point"));
        }
        if n > bud.max_dense {
            return Err(budget(format!("{n} points exceeds dense budget {}", bud.max_dense)));
        }
        let mut d = vec![f64::INFINITY; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(validation(format!("edge ({u},{v}) out of range")));
            }
            if u == v || !w.is_finite() || w <= 0.0 {
                return Err(validation(format!("edge ({u},{v}) weight {w} invalid")));
            }
            if w < d[u * n + v] {
                d[u * n + v] = w;
                d[v * n + u] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let c = dik + d[k * n + j];
                    if c < d[i * n + j] {
                        d[i * n + j] = c;
                    }
                }
            }
        }
        if d.iter().any(|x| !x.is_finite()) {
            return Err(validation("graph is not connected"));
        }
        let basepoint = ids
            .iter()
            .position(|p| p == basepoint)
            .ok_or_else(|| validation(format!("basepoint {basepoint:?} is not a point")))?;
        let mut sp = FiniteMetricSpace {
            name: name.to_string(),
            ids,
            basepoint,
            dist: DistData::Dense(d),
            norms: Vec::new(),
            generator: Generator::Graph,
            diameter: OnceLock::new(),
        };
        sp.norms = (0..n).map(|i| sp.dist(i, basepoint)).collect();
        Ok(sp)
    }

    pub(crate) fn from_dense(
        name: String,
        ids: Vec<String>,
        basepoint: usize,
        flat: Vec<f64>,
        generator: Generator,
    ) -> Self {
        let n = ids.len();
        debug_assert_eq!(flat.len(), n * n);
        let mut sp = FiniteMetricSpace {
            name,
            ids,
            basepoint,
            dist: DistData::Dense(flat),
            norms: Vec::new(),
            generator,
            diameter: OnceLock::new(),
        };
        sp.norms = (0..n).map(|i| sp.dist(i, basepoint)).collect();
        sp
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Same space under a different display name (file round-trips keep
    /// the name stored in the artifact rather than the generated one).
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Relabels the provenance of this space (for example a cached distance
    /// matrix that is known to realize a closed-form generator). Distances
    /// are left untouched, so the label must be truthful: artifact readers
    /// regenerate closed forms and reject point lists that do not match.
    pub fn with_generator(mut self, generator: Generator) -> Self {
        self.generator = generator;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|p| p == id)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.dist {
            DistData::Dense(m) => m[i * self.ids.len() + j],
            DistData::GridL1 { dim, side } => {
                let (mut a, mut b) = (i, j);
                let mut s = 0usize;
                for _ in 0..*dim {
                    let ca = a % side;
                    let cb = b % side;
                    s += ca.abs_diff(cb);
                    a /= side;
                    b /= side;
                }
                s as f64
            }
        }
    }

    /// Distance to the basepoint.
    #[inline]
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    /// Grid coordinates of point `i` for grid spaces.
    pub fn grid_coords(&self, i: usize) -> Option<Vec<usize>> {
        match &self.dist {
            DistData::GridL1 { dim, side } => {
                let mut c = vec![0usize; *dim];
                let mut a = i;
                for k in (0..*dim).rev() {
                    c[k] = a % side;
                    a /= side;
                }
                Some(c)
            }
            _ => None,
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.dist, DistData::GridL1 { .. })
    }

    /// (dimension, side) when the space is a closed-form grid.
    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        match &self.dist {
            DistData::GridL1 { dim, side } => Some((*dim, *side)),
            DistData::Dense(_) => None,
        }
    }

    /// All distances on grids are integers; matrix spaces may carry
    /// arbitrary reals. Used to pick exact integer handling where possible.
    pub fn integer_metric(&self) -> bool {
        match &self.dist {
            DistData::GridL1 { .. } => true,
            DistData::Dense(m) => m.iter().all(|d| d.fract() == 0.0),
        }
    }

    pub fn diameter(&self) -> f64 {
        *self.diameter.get_or_init(|| match &self.dist {
            DistData::GridL1 { dim, side } => (dim * (side - 1)) as f64,
            DistData::Dense(m) => m.iter().fold(0.0f64, |a, &b| a.max(b)),
        })
    }

    /// min over `set` of d(i, .); infinity for an empty set.
    pub fn dist_to_set(&self, i: usize, set: &[usize]) -> f64 {
        set.iter().fold(f64::INFINITY, |a, &j| a.min(self.dist(i, j)))
    }

    /// For every member of `set`, the distance to the complement of `set`.
    /// Returns values aligned with `set`; `f64::INFINITY` when the set is
    /// the whole space. Grids use a multi-source BFS over the grid graph
    /// (unit steps realize the l1 metric), other spaces scan pairs.
    pub fn dist_to_complement(&self, set: &[usize]) -> Vec<f64> {
        let n = self.n();
        let mut member = vec![false; n];
        for &i in set {
            member[i] = true;
        }
        let comp_size = n - set.len();
        if comp_size == 0 {
            return vec![f64::INFINITY; set.len()];
        }
        if let DistData::GridL1 { dim, side } = self.dist {
            let mut level = vec![u32::MAX; n];
            let mut frontier: Vec<usize> = (0..n).filter(|&i| !member[i]).collect();
            for &i in &frontier {
                level[i] = 0;
            }
            let mut cur = 0u32;
            let mut next = Vec::new();
            while !frontier.is_empty() {
                next.clear();
                for &i in &frontier {
                    let mut stride = 1usize;
                    let mut rest = i;
                    for _ in 0..dim {
                        let c = rest % side;
                        if c > 0 && level[i - stride] == u32::MAX {
                            level[i - stride] = cur + 1;
                            next.push(i - stride);
                        }
                        if c + 1 < side && level[i + stride] == u32::MAX {
                            level[i + stride] = cur + 1;
                            next.push(i + stride);
                        }
                        stride *= side;
                        rest /= side;
                    }
                }
                std::mem::swap(&mut frontier, &mut next);
                cur += 1;
            }
            return set.iter().map(|&i| level[i] as f64).collect();
        }
        let comp: Vec<usize> = (0..n).filter(|&i| !member[i]).collect();
        set.iter().map(|&i| self.dist_to_set(i, &comp)).collect()
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum MetricViolation {
    NonzeroDiagonal { i: usize, value: f64 },
    NonpositiveOffDiagonal { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize, gap: f64 },
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub checked_points: usize,
    pub violations: Vec<MetricViolation>,
}

impl MetricReport {
    pub fn is_metric(&self) -> bool {
        self.violations.is_empty()
    }
}

const MAX_WITNESSES: usize = 100;

/// Exhaustive metric-axiom audit with 1e-9 slack: zero diagonal, positive
/// symmetric off-diagonal entries, and every triangle. Cubic in the point
/// count; collects at most 100 witnesses.
pub fn verify_metric(sp: &FiniteMetricSpace) -> MetricReport {
    use rayon::prelude::*;
    let n = sp.n();
    let mut violations = Vec::new();
    for i in 0..n {
        let d = sp.dist(i, i);
        if d.abs() > SLACK {
            violations.push(MetricViolation::NonzeroDiagonal { i, value: d });
        }
        for j in (i + 1)..n {
            let dij = sp.dist(i, j);
            let dji = sp.dist(j, i);
            if (dij - dji).abs() > SLACK {
                violations.push(MetricViolation::Asymmetric { i, j, gap: (dij - dji).abs() });
            }
            if dij <= SLACK {
                violations.push(MetricViolation::NonpositiveOffDiagonal { i, j, value: dij });
            }
            if violations.len() >= MAX_WITNESSES {
                return MetricReport { checked_points: n, violations };
            }
        }
    }
    let mut triangle: Vec<MetricViolation> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::new();
            for j in 0..n {
                let dij = sp.dist(i, j);
                for k in 0..n {
                    let excess = dij - sp.dist(i, k) - sp.dist(k, j);
                    if excess > SLACK {
                        local.push(MetricViolation::Triangle { i, j, k, excess });
                        if local.len() >= MAX_WITNESSES {
                            return local.into_iter();
                        }
                    }
                }
            }
            local.into_iter()
        })
        .collect();
    triangle.truncate(MAX_WITNESSES.saturating_sub(violations.len()));
    violations.extend(triangle);
    MetricReport { checked_points: n, violations }
}
