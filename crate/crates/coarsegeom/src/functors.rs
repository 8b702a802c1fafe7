//! Constructions that build new pointed metric spaces out of old ones:
//! sum-metric products, norm-matched subproducts, wedges, metric quotients,
//! and the discrete cone with its flattening chart.

use crate::error::{budget, validation, Result};
use crate::space::{Budget, FiniteMetricSpace, Generator, SLACK};
use serde::Serialize;

fn dense_guard(n: usize, bud: &Budget, what: &str) -> Result<()> {
    if n == 0 {
        return Err(validation(format!("{what}: empty result not representable as a space")));
    }
    if n > bud.max_dense {
        return Err(budget(format!("{what}: {n} points exceeds dense budget {}", bud.max_dense)));
    }
    Ok(())
}

/// Product with the sum metric d((x,y),(x',y')) = d(x,x') + d(y,y').
/// Basepoint is the pair of basepoints.
pub fn product(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    bud: &Budget,
) -> Result<FiniteMetricSpace> {
    let n = x
        .n()
        .checked_mul(y.n())
        .ok_or_else(|| budget("product size overflow".to_string()))?;
    dense_guard(n, bud, "product")?;
    let mut ids = Vec::with_capacity(n);
    for i in 0..x.n() {
        for j in 0..y.n() {
            ids.push(format!("{}|{}", x.id(i), y.id(j)));
        }
    }
    let ny = y.n();
    let mut flat = vec![0.0f64; n * n];
    for a in 0..n {
        let (i, j) = (a / ny, a % ny);
        for b in 0..n {
            let (k, l) = (b / ny, b % ny);
            flat[a * n + b] = x.dist(i, k) + y.dist(j, l);
        }
    }
    let base = x.basepoint() * ny + y.basepoint();
    Ok(FiniteMetricSpace::from_dense(
        format!("{}x{}", x.name(), y.name()),
        ids,
        base,
        flat,
        Generator::Derived("product".into()),
    ))
}

/// The norm-matched part of the product: pairs whose norms differ by at most
/// `tol`, with the sum metric. The pair of basepoints always qualifies (both
/// norms are 0), so for valid inputs the result is nonempty; the `empty`
/// flag exists for the degenerate paths that filter everything out.
#[derive(Debug)]
pub struct AsymptoticProduct {
    pub space: Option<FiniteMetricSpace>,
    pub empty: bool,
    /// (source-x index, source-y index) per result point.
    pub pairs: Vec<(usize, usize)>,
}

pub fn asymptotic_product(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
    bud: &Budget,
) -> Result<AsymptoticProduct> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(validation("tol must be finite and nonnegative"));
    }
    let mut pairs = Vec::new();
    for i in 0..x.n() {
        for j in 0..y.n() {
            if (x.norm(i) - y.norm(j)).abs() <= tol + SLACK {
                pairs.push((i, j));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(AsymptoticProduct { space: None, empty: true, pairs });
    }
    let n = pairs.len();
    dense_guard(n, bud, "asymptotic product")?;
    let ids: Vec<String> = pairs
        .iter()
        .map(|&(i, j)| format!("{}|{}", x.id(i), y.id(j)))
        .collect();
    let mut flat = vec![0.0f64; n * n];
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for (b, &(k, l)) in pairs.iter().enumerate() {
            flat[a * n + b] = x.dist(i, k) + y.dist(j, l);
        }
    }
    let base = pairs
        .iter()
        .position(|&(i, j)| i == x.basepoint() && j == y.basepoint())
        .expect("basepoint pair has norm gap 0");
    let sp = FiniteMetricSpace::from_dense(
        format!("{}~x~{}", x.name(), y.name()),
        ids,
        base,
        flat,
        Generator::Derived(format!("asymptotic product tol={tol}")),
    );
    Ok(AsymptoticProduct { space: Some(sp), empty: false, pairs })
}

/// One-point union: basepoints are identified, distances within each wing are
/// kept, and cross distances are the sum of norms. Left ids are prefixed
/// `L`, right ids `R`; the junction point is the left basepoint.
pub fn wedge(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    bud: &Budget,
) -> Result<FiniteMetricSpace> {
    let n = x.n() + y.n() - 1;
    dense_guard(n, bud, "wedge")?;
    let mut ids = Vec::with_capacity(n);
    for i in 0..x.n() {
        ids.push(format!("L{}", x.id(i)));
    }
    let mut right = Vec::new();
    for j in 0..y.n() {
        if j != y.basepoint() {
            right.push(j);
            ids.push(format!("R{}", y.id(j)));
        }
    }
    let mut flat = vec![0.0f64; n * n];
    let xd = |a: usize, b: usize| x.dist(a, b);
    for a in 0..n {
        for b in 0..n {
            let d = match (a < x.n(), b < x.n()) {
                (true, true) => xd(a, b),
                (false, false) => y.dist(right[a - x.n()], right[b - x.n()]),
                (true, false) => x.norm(a) + y.norm(right[b - x.n()]),
                (false, true) => y.norm(right[a - x.n()]) + x.norm(b),
            };
            flat[a * n + b] = d;
        }
    }
    Ok(FiniteMetricSpace::from_dense(
        format!("{}v{}", x.name(), y.name()),
        ids,
        x.basepoint(),
        flat,
        Generator::Derived("wedge".into()),
    ))
}

/// Floyd-Warshall closure of a symmetric cost table, in place. The canonical
/// k-outer loop is pinned so independent runs produce bit-identical floats.
pub fn shortest_path_closure(d: &mut [f64], n: usize) {
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            for j in 0..n {
                let c = dik + d[k * n + j];
                if c < d[i * n + j] {
                    d[i * n + j] = c;
                }
            }
        }
    }
}

#[derive(Debug)]
pub struct QuotientResult {
    pub space: FiniteMetricSpace,
    /// class index of every source point; composing with the class ids gives
    /// the quotient map, which is short by construction.
    pub class_of: Vec<usize>,
    /// true if chained pseudo-distances collapsed below slack and classes
    /// had to be merged transitively (cannot happen for honest inputs).
    pub merged: bool,
}

/// Metric quotient by a partition: inter-class gaps are chained through the
/// shortest-path closure of the complete graph on classes.
pub fn quotient_metric(
    x: &FiniteMetricSpace,
    partition: &[Vec<usize>],
    bud: &Budget,
) -> Result<QuotientResult> {
    let n = x.n();
    let mut seen = vec![false; n];
    for class in partition {
        if class.is_empty() {
            return Err(validation("partition classes must be nonempty"));
        }
        for &p in class {
            if p >= n || seen[p] {
                return Err(validation(format!("point {p} missing, repeated or out of range")));
            }
            seen[p] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(validation("partition does not cover the space"));
    }

    let mut classes: Vec<Vec<usize>> = partition.to_vec();
    let mut merged = false;
    loop {
        let m = classes.len();
        dense_guard(m, bud, "quotient")?;
        let mut flat = vec![0.0f64; m * m];
        for a in 0..m {
            for b in (a + 1)..m {
                let mut gap = f64::INFINITY;
                for &p in &classes[a] {
                    for &q in &classes[b] {
                        gap = gap.min(x.dist(p, q));
                    }
                }
                flat[a * m + b] = gap;
                flat[b * m + a] = gap;
            }
        }
        shortest_path_closure(&mut flat, m);
        let mut collapse: Option<(usize, usize)> = None;
        'scan: for a in 0..m {
            for b in (a + 1)..m {
                if flat[a * m + b] <= SLACK {
                    collapse = Some((a, b));
                    break 'scan;
                }
            }
        }
        if let Some((a, b)) = collapse {
            let moved = classes.remove(b);
            classes[a].extend(moved);
            merged = true;
            continue;
        }
        let ids: Vec<String> = classes
            .iter()
            .map(|c| x.id(*c.iter().min().unwrap()).to_string())
            .collect();
        let base = classes
            .iter()
            .position(|c| c.contains(&x.basepoint()))
            .expect("partition covers the basepoint");
        let mut class_of = vec![0usize; n];
        for (ci, c) in classes.iter().enumerate() {
            for &p in c {
                class_of[p] = ci;
            }
        }
        let space = FiniteMetricSpace::from_dense(
            format!("{}/~", x.name()),
            ids,
            base,
            flat,
            Generator::Derived("quotient".into()),
        );
        return Ok(QuotientResult { space, class_of, merged });
    }
}

#[derive(Debug)]
pub struct ConeResult {
    pub space: FiniteMetricSpace,
    /// realized pre-quotient points as (source point, height level).
    pub levels: Vec<(usize, i64)>,
    /// class index per realized point (the quotient map of the top fold).
    pub class_of: Vec<usize>,
    pub apex_merges: usize,
}

/// Discrete cone: realize {(x, m*step) : |m*step| <= norm(x), m integer},
/// metrize by d_X plus height difference, then identify top-boundary points
/// of equal (grid-rounded) norm through the metric quotient.
pub fn cone(x: &FiniteMetricSpace, height_step: f64, bud: &Budget) -> Result<ConeResult> {
    cone_like(x, height_step, bud, false)
}

/// Double-ended variant that also identifies bottom-boundary points of equal
/// norm. Experimental: the metric behavior is exercised by tests but no
/// acceptance-grade guarantees are certified for it.
pub fn suspension(x: &FiniteMetricSpace, height_step: f64, bud: &Budget) -> Result<ConeResult> {
    cone_like(x, height_step, bud, true)
}

fn cone_like(
    x: &FiniteMetricSpace,
    height_step: f64,
    bud: &Budget,
    fold_bottom: bool,
) -> Result<ConeResult> {
    if !height_step.is_finite() || height_step <= 0.0 {
        return Err(validation("height step must be positive"));
    }
    let mut levels: Vec<(usize, i64)> = Vec::new();
    for i in 0..x.n() {
        let k = (x.norm(i) / height_step).round() as i64;
        for m in -k..=k {
            levels.push((i, m));
            if levels.len() > bud.max_dense {
                return Err(budget(format!(
                    "cone realization exceeds dense budget {}",
                    bud.max_dense
                )));
            }
        }
    }
    let n = levels.len();
    let ids: Vec<String> = levels
        .iter()
        .map(|&(i, m)| format!("{}@{}", x.id(i), m))
        .collect();
    let mut flat = vec![0.0f64; n * n];
    for (a, &(i, m)) in levels.iter().enumerate() {
        for (b, &(j, l)) in levels.iter().enumerate() {
            flat[a * n + b] = x.dist(i, j) + ((m - l).abs() as f64) * height_step;
        }
    }
    let base = levels
        .iter()
        .position(|&(i, m)| i == x.basepoint() && m == 0)
        .expect("basepoint sits at height 0");
    let realized = FiniteMetricSpace::from_dense(
        format!("cone_pre({})", x.name()),
        ids,
        base,
        flat,
        Generator::Derived("cone realization".into()),
    );

    // group boundary points by their height level: equal rounded norm means
    // equal top level, which is exactly the fold rule.
    use std::collections::BTreeMap;
    let mut tops: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut bottoms: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (a, &(i, m)) in levels.iter().enumerate() {
        let k = (x.norm(i) / height_step).round() as i64;
        if m == k {
            tops.entry(k).or_default().push(a);
        } else if fold_bottom && m == -k {
            bottoms.entry(k).or_default().push(a);
        }
    }
    let mut groups: Vec<Vec<usize>> = tops.into_values().collect();
    if fold_bottom {
        groups.extend(bottoms.into_values());
    }
    let mut partition: Vec<Vec<usize>> = Vec::new();
    let mut in_class = vec![false; n];
    let mut apex_merges = 0usize;
    for group in groups {
        if group.len() > 1 {
            apex_merges += group.len() - 1;
        }
        for &a in &group {
            in_class[a] = true;
        }
        partition.push(group);
    }
    for a in 0..n {
        if !in_class[a] {
            partition.push(vec![a]);
        }
    }
    let q = quotient_metric(&realized, &partition, bud)?;
    Ok(ConeResult {
        space: q.space,
        levels,
        class_of: q.class_of,
        apex_merges,
    })
}

/// Flattening chart for cones over n-dimensional Euclidean data, with its
/// inverse. Forward takes a cone point (x, t) with 0 <= t <= |x| to
/// ((|x|-t)/|x| * x, t); at x = 0 (or y = 0 for the inverse) the radial
/// factor is 0. Both directions are 3-Lipschitz for the sum metric
/// |dx| + |dt| on the sampled regime t <= |x|.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeChart {
    pub n: usize,
}

pub fn euclid(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl ConeChart {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(validation("chart dimension must be at least 1"));
        }
        Ok(ConeChart { n })
    }

    pub fn forward(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
        if x.len() != self.n {
            return Err(validation(format!("expected {} coordinates", self.n)));
        }
        let norm = euclid(x);
        if t < -SLACK || t > norm + SLACK {
            return Err(validation(format!("height {t} outside [0, |x|] = [0, {norm}]")));
        }
        let f = if norm == 0.0 { 0.0 } else { (norm - t) / norm };
        Ok((x.iter().map(|v| f * v).collect(), t))
    }

    pub fn inverse(&self, y: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
        if y.len() != self.n {
            return Err(validation(format!("expected {} coordinates", self.n)));
        }
        if t < -SLACK {
            return Err(validation("height must be nonnegative"));
        }
        let norm = euclid(y);
        let f = if norm == 0.0 { 0.0 } else { (norm + t) / norm };
        Ok((y.iter().map(|v| f * v).collect(), t))
    }
}
