//! Extension of partially defined data to the whole space.
//!
//! The half-line `[0, inf)` is an absolute extensor for asymptotically
//! Lipschitz data: values given on a subset extend to every point with the
//! same constants, one point at a time, by intersecting admissible
//! intervals ([`extend_halfline`]). Orthant-valued data reduces to the
//! scalar case through a shear chart ([`OrthantChart`]) and a basis of
//! near-axis projections ([`extend_orthant`]). On top of these sit a
//! staircase minorant for coarsely proper functions
//! ([`lipschitz_minorant`]), a blended extension below an upper envelope
//! ([`blend_extension`]), and a neighborhood extension for vector-valued
//! data ([`neighborhood_extension`]).

use crate::error::{capability, invariant, validation, Result};
use crate::functors::euclid;
use crate::space::{FiniteMetricSpace, SLACK};

/// Partial data living on a subset: one nonnegative number per point, or
/// one nonnegative tuple per point for orthant-valued problems.
#[derive(Debug, Clone, PartialEq)]
pub enum PartialValues {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

/// Growth requirement on the extension. `Plain` asks only for the
/// asymptotic Lipschitz bound; `NormGrowth` additionally forces
/// `value(x) >= c * norm(x) - b` (a lower growth certificate), which
/// requires `c <= lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthMode {
    Plain,
    NormGrowth { c: f64, b: f64 },
}

/// Values on `subset` (aligned index-for-index) obeying
/// `|f(a) - f(a')| <= lambda * d(a, a') + s`, to be extended to the whole
/// space with the same constants.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    pub subset: Vec<usize>,
    pub values: PartialValues,
    pub lambda: f64,
    pub s: f64,
    pub mode: GrowthMode,
}

/// Order in which unassigned points receive values. The default mirrors an
/// exhaustion by balls around the basepoint; `Given` fixes an explicit
/// order (it must enumerate exactly the complement of the subset).
#[derive(Debug, Clone, PartialEq)]
pub enum EnumerationOrder {
    AscendingNorm,
    Given(Vec<usize>),
}

/// Which point of the admissible interval a new value takes. `Midpoint`
/// stays numerically centered; `LowerEnd` hugs the smallest admissible
/// value, which keeps lifted data close to a boundary hyperplane (used by
/// [`neighborhood_extension`]). Unbounded intervals take their lower end
/// under both rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueRule {
    Midpoint,
    LowerEnd,
}

/// Result of a pair scan `|f(x) - f(y)| <= lambda * d(x, y) + s`:
/// the largest excess over the bound and the pair realizing it.
#[derive(Debug, Clone)]
pub struct PairAudit {
    pub max_excess: f64,
    pub worst_pair: Option<(usize, usize)>,
}

impl PairAudit {
    pub fn satisfied(&self) -> bool {
        self.max_excess <= SLACK
    }
}

/// Scan all pairs of a scalar function against the bound
/// `|f(x) - f(y)| <= lambda * d(x, y) + s`.
pub fn audit_scalar(
    space: &FiniteMetricSpace,
    values: &[f64],
    lambda: f64,
    s: f64,
) -> PairAudit {
    assert_eq!(values.len(), space.n(), "values must cover the space");
    let mut worst = PairAudit { max_excess: f64::NEG_INFINITY, worst_pair: None };
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let excess = (values[i] - values[j]).abs() - lambda * space.dist(i, j) - s;
            if excess > worst.max_excess {
                worst.max_excess = excess;
                worst.worst_pair = Some((i, j));
            }
        }
    }
    if worst.worst_pair.is_none() {
        worst.max_excess = 0.0;
    }
    worst
}

/// Scan all pairs of a tuple-valued function (Euclidean distance between
/// values) against `||f(x) - f(y)|| <= lambda * d(x, y) + s`.
pub fn audit_vector(
    space: &FiniteMetricSpace,
    values: &[Vec<f64>],
    lambda: f64,
    s: f64,
) -> PairAudit {
    assert_eq!(values.len(), space.n(), "values must cover the space");
    let mut worst = PairAudit { max_excess: f64::NEG_INFINITY, worst_pair: None };
    let mut diff = Vec::new();
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            diff.clear();
            diff.extend(values[i].iter().zip(&values[j]).map(|(a, b)| a - b));
            let excess = euclid(&diff) - lambda * space.dist(i, j) - s;
            if excess > worst.max_excess {
                worst.max_excess = excess;
                worst.worst_pair = Some((i, j));
            }
        }
    }
    if worst.worst_pair.is_none() {
        worst.max_excess = 0.0;
    }
    worst
}

fn check_subset(space: &FiniteMetricSpace, subset: &[usize]) -> Result<()> {
    let mut seen = vec![false; space.n()];
    for &i in subset {
        if i >= space.n() {
            return Err(validation(format!("subset point {i} is out of range")));
        }
        if seen[i] {
            return Err(validation(format!(
                "subset lists point {:?} twice",
                space.id(i)
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

fn check_constants(lambda: f64, s: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(validation(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if !s.is_finite() || s < 0.0 {
        return Err(validation(format!("s must be finite and >= 0, got {s}")));
    }
    Ok(())
}

/// The order in which new points get values: the complement of `subset`,
/// either by ascending norm (ties by index) or as explicitly given.
fn assignment_order(
    space: &FiniteMetricSpace,
    subset: &[usize],
    order: &EnumerationOrder,
) -> Result<Vec<usize>> {
    let mut in_subset = vec![false; space.n()];
    for &i in subset {
        in_subset[i] = true;
    }
    let mut complement: Vec<usize> = (0..space.n()).filter(|&i| !in_subset[i]).collect();
    match order {
        EnumerationOrder::AscendingNorm => {
            complement.sort_by(|&a, &b| {
                space
                    .norm(a)
                    .partial_cmp(&space.norm(b))
                    .expect("norms are finite")
                    .then(a.cmp(&b))
            });
            Ok(complement)
        }
        EnumerationOrder::Given(list) => {
            if list.len() != complement.len() {
                return Err(validation(format!(
                    "explicit order lists {} points, the complement has {}",
                    list.len(),
                    complement.len()
                )));
            }
            let mut seen = vec![false; space.n()];
            for &i in list {
                if i >= space.n() {
                    return Err(validation(format!("order entry {i} is out of range")));
                }
                if in_subset[i] {
                    return Err(validation(format!(
                        "order entry {:?} already carries a value",
                        space.id(i)
                    )));
                }
                if seen[i] {
                    return Err(validation(format!(
                        "order lists point {:?} twice",
                        space.id(i)
                    )));
                }
                seen[i] = true;
            }
            Ok(list.clone())
        }
    }
}

/// A total extension together with the constants it certifiably satisfies
/// and the order in which the new points were assigned.
#[derive(Debug, Clone)]
pub struct HalflineExtension {
    pub values: Vec<f64>,
    pub lambda: f64,
    pub s: f64,
    pub assignment_order: Vec<usize>,
}

/// Extend nonnegative scalar data to the whole space with the constants
/// preserved (`relax >= 1` multiplies `lambda` for a deliberately slackened
/// variant). Each unassigned point in turn takes a value from the
/// intersection of the intervals `[f(x) - L d - s, f(x) + L d + s]` over
/// all points `x` that already carry values, clamped to the half-line and,
/// in [`GrowthMode::NormGrowth`] mode, to `[c * norm - b, inf)`. On a line,
/// pairwise intersection of intervals already forces a common point, so
/// the step-wise feasibility assertion reduces to comparing the largest
/// lower end with the smallest upper end.
pub fn extend_halfline(
    space: &FiniteMetricSpace,
    problem: &ExtensionProblem,
    order: &EnumerationOrder,
    rule: ValueRule,
    relax: f64,
) -> Result<HalflineExtension> {
    let values = match &problem.values {
        PartialValues::Scalar(v) => v,
        PartialValues::Vector(_) => {
            return Err(validation(
                "half-line extension takes scalar values; use the orthant solver for tuples",
            ))
        }
    };
    check_subset(space, &problem.subset)?;
    check_constants(problem.lambda, problem.s)?;
    if !relax.is_finite() || relax < 1.0 {
        return Err(validation(format!("relax must be finite and >= 1, got {relax}")));
    }
    if values.len() != problem.subset.len() {
        return Err(validation(format!(
            "{} values for {} subset points",
            values.len(),
            problem.subset.len()
        )));
    }
    for (&a, &v) in problem.subset.iter().zip(values) {
        if !v.is_finite() || v < 0.0 {
            return Err(validation(format!(
                "value {v} at {:?} is outside the half-line",
                space.id(a)
            )));
        }
    }
    if let GrowthMode::NormGrowth { c, b } = problem.mode {
        if !c.is_finite() || !b.is_finite() {
            return Err(validation("growth constants must be finite"));
        }
        if c > problem.lambda {
            return Err(validation(format!(
                "growth rate c = {c} exceeds lambda = {}",
                problem.lambda
            )));
        }
        for (&a, &v) in problem.subset.iter().zip(values) {
            let floor = c * space.norm(a) - b;
            if v + SLACK < floor {
                return Err(validation(format!(
                    "value {v} at {:?} is below the growth floor {floor}",
                    space.id(a)
                )));
            }
        }
    }
    for (k, &a) in problem.subset.iter().enumerate() {
        for (l, &a2) in problem.subset.iter().enumerate().skip(k + 1) {
            let bound = problem.lambda * space.dist(a, a2) + problem.s;
            let gap = (values[k] - values[l]).abs();
            if gap > bound + SLACK {
                return Err(validation(format!(
                    "input data breaks its own bound at ({:?}, {:?}): |{} - {}| > {bound}",
                    space.id(a),
                    space.id(a2),
                    values[k],
                    values[l]
                )));
            }
        }
    }

    let lambda_eff = relax * problem.lambda;
    let order_list = assignment_order(space, &problem.subset, order)?;
    let n = space.n();
    let mut assigned = vec![0.0f64; n];
    let mut have = vec![false; n];
    for (k, &a) in problem.subset.iter().enumerate() {
        assigned[a] = values[k];
        have[a] = true;
    }
    for &x_new in &order_list {
        let floor = match problem.mode {
            GrowthMode::Plain => 0.0,
            GrowthMode::NormGrowth { c, b } => (c * space.norm(x_new) - b).max(0.0),
        };
        let mut lo = floor;
        let mut lo_at: Option<usize> = None;
        let mut hi = f64::INFINITY;
        let mut hi_at: Option<usize> = None;
        for x in 0..n {
            if !have[x] {
                continue;
            }
            let reach = lambda_eff * space.dist(x, x_new) + problem.s;
            if assigned[x] - reach > lo {
                lo = assigned[x] - reach;
                lo_at = Some(x);
            }
            if assigned[x] + reach < hi {
                hi = assigned[x] + reach;
                hi_at = Some(x);
            }
        }
        if lo > hi + SLACK {
            let lo_name = lo_at.map_or("the growth floor".to_string(), |x| {
                format!("{:?}", space.id(x))
            });
            let hi_name = hi_at.map_or("none".to_string(), |x| format!("{:?}", space.id(x)));
            return Err(invariant(format!(
                "admissible intervals at {:?} do not meet: lower end {lo} from {lo_name}, \
                 upper end {hi} from {hi_name}",
                space.id(x_new)
            )));
        }
        let value = match rule {
            ValueRule::Midpoint if hi.is_finite() => 0.5 * (lo + hi),
            _ => lo,
        };
        assigned[x_new] = value;
        have[x_new] = true;
    }

    let audit = audit_scalar(space, &assigned, lambda_eff, problem.s);
    if !audit.satisfied() {
        let (i, j) = audit.worst_pair.expect("excess implies a pair");
        return Err(invariant(format!(
            "extension misses its own bound at ({:?}, {:?}) by {}",
            space.id(i),
            space.id(j),
            audit.max_excess
        )));
    }
    if let GrowthMode::NormGrowth { c, b } = problem.mode {
        for (x, &v) in assigned.iter().enumerate() {
            if v + SLACK < c * space.norm(x) - b {
                return Err(invariant(format!(
                    "extension dips below the growth floor at {:?}",
                    space.id(x)
                )));
            }
        }
    }
    Ok(HalflineExtension {
        values: assigned,
        lambda: lambda_eff,
        s: problem.s,
        assignment_order: order_list,
    })
}

/// Shear chart between the closed positive orthant and the halfspace of
/// nonnegative coordinate sum. `forward` translates each point by
/// `mean - min` against the diagonal, so the orthant boundary lands in the
/// hyperplane of zero sum; `inverse` translates back. Both directions are
/// Lipschitz with constant at most `n + 1`, and for small `n` the forward
/// map shrinks norms by no more than the factor `1 - 1/sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrthantChart {
    pub n: usize,
}

/// Build the shear chart in dimension `n >= 1`.
pub fn orthant_chart(n: usize) -> Result<OrthantChart> {
    if n == 0 {
        return Err(validation("the chart needs dimension at least 1"));
    }
    Ok(OrthantChart { n })
}

impl OrthantChart {
    fn shift(x: &[f64]) -> f64 {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let min = x.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        mean - min
    }

    /// Orthant point to halfspace point.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "chart dimension mismatch");
        let w = Self::shift(x);
        x.iter().map(|v| v - w).collect()
    }

    /// Halfspace point back to the orthant.
    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n, "chart dimension mismatch");
        let w = Self::shift(y);
        y.iter().map(|v| v + w).collect()
    }
}

/// Near-axis basis vector `(eps, ..., 1, ..., eps)` dotted with `z`: the
/// scalar shadows that drive the orthant extension.
fn axis_projection(z: &[f64], i: usize, eps: f64) -> f64 {
    let total: f64 = z.iter().sum();
    (1.0 - eps) * z[i] + eps * total
}

/// Left inverse of the basis change on its image, extended to the whole
/// orthant: scale to the standard simplex, expand about the barycenter by
/// the factor that undoes the basis contraction -- capping the expansion at
/// the boundary exit of the simplex -- and scale back.
fn correction_map(y: &[f64], eps: f64) -> Vec<f64> {
    let n = y.len();
    if n == 1 {
        return vec![y[0].max(0.0)];
    }
    let nf = n as f64;
    let total: f64 = y.iter().sum();
    if total <= 0.0 {
        return vec![0.0; n];
    }
    let theta = (1.0 - eps) / (1.0 + (nf - 1.0) * eps);
    let center = 1.0 / nf;
    let u_min = y.iter().fold(f64::INFINITY, |a, &b| a.min(b)) / total;
    let exit = if u_min < center { 1.0 / (1.0 - nf * u_min) } else { f64::INFINITY };
    let r = (1.0 / theta).min(exit);
    let scale = total / (1.0 + (nf - 1.0) * eps);
    y.iter()
        .map(|&v| ((center + r * (v / total - center)) * scale).max(0.0))
        .collect()
}

/// Orthant-valued extension: per-point tuples, the certified constants, the
/// chart ingredients that produced them, and the per-axis scalar constants.
#[derive(Debug, Clone)]
pub struct OrthantExtension {
    pub values: Vec<Vec<f64>>,
    pub lambda: f64,
    pub s: f64,
    pub epsilon: f64,
    /// Expansion of the correction map realized on this instance, padded by
    /// ten percent; the certified constants scale with it.
    pub chart_lipschitz: f64,
    pub coordinate_constants: Vec<(f64, f64)>,
}

/// Extend tuple data with values in the closed positive orthant. Each of
/// the `n` near-axis shadows extends separately on the half-line; the
/// correction map then pulls the shadow tuple back through the basis
/// change, reproducing the given values on the subset. The certified
/// constants are `chart_lipschitz` times the Euclidean lengths of the
/// per-axis constant vectors.
pub fn extend_orthant(
    space: &FiniteMetricSpace,
    problem: &ExtensionProblem,
    epsilon: Option<f64>,
    order: &EnumerationOrder,
    rule: ValueRule,
    relax: f64,
) -> Result<OrthantExtension> {
    let rows = match &problem.values {
        PartialValues::Vector(rows) => rows,
        PartialValues::Scalar(_) => {
            return Err(validation(
                "orthant extension takes tuple values; use the half-line solver for scalars",
            ))
        }
    };
    if let GrowthMode::NormGrowth { .. } = problem.mode {
        return Err(capability(
            "norm-growth mode is only supported for scalar half-line extension",
        ));
    }
    check_subset(space, &problem.subset)?;
    check_constants(problem.lambda, problem.s)?;
    if problem.subset.is_empty() {
        return Err(validation(
            "orthant extension needs at least one value to fix the dimension",
        ));
    }
    if rows.len() != problem.subset.len() {
        return Err(validation(format!(
            "{} tuples for {} subset points",
            rows.len(),
            problem.subset.len()
        )));
    }
    let dim = rows[0].len();
    if dim == 0 {
        return Err(validation("tuples must have at least one coordinate"));
    }
    for (&a, row) in problem.subset.iter().zip(rows) {
        if row.len() != dim {
            return Err(validation(format!(
                "tuple at {:?} has {} coordinates, expected {dim}",
                space.id(a),
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(validation(format!(
                "tuple at {:?} leaves the closed orthant",
                space.id(a)
            )));
        }
    }
    let eps = epsilon.unwrap_or(1.0 / (2.0 * dim as f64));
    let eps_cap = if dim >= 2 { 1.0 / (dim as f64 - 1.0) } else { f64::INFINITY };
    if !eps.is_finite() || eps <= 0.0 || eps >= eps_cap {
        return Err(validation(format!(
            "epsilon must lie strictly between 0 and {eps_cap}, got {eps}"
        )));
    }
    for (k, &a) in problem.subset.iter().enumerate() {
        for (l, &a2) in problem.subset.iter().enumerate().skip(k + 1) {
            let diff: Vec<f64> = rows[k].iter().zip(&rows[l]).map(|(p, q)| p - q).collect();
            let bound = problem.lambda * space.dist(a, a2) + problem.s;
            if euclid(&diff) > bound + SLACK {
                return Err(validation(format!(
                    "input tuples break their own bound at ({:?}, {:?})",
                    space.id(a),
                    space.id(a2)
                )));
            }
        }
    }

    let axis_scale = (1.0 + (dim as f64 - 1.0) * eps * eps).sqrt();
    let mut shadow_values: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut coordinate_constants = Vec::with_capacity(dim);
    for i in 0..dim {
        let shadows: Vec<f64> = rows.iter().map(|row| axis_projection(row, i, eps)).collect();
        let sub = ExtensionProblem {
            subset: problem.subset.clone(),
            values: PartialValues::Scalar(shadows),
            lambda: axis_scale * problem.lambda,
            s: axis_scale * problem.s,
            mode: GrowthMode::Plain,
        };
        let ext = extend_halfline(space, &sub, order, rule, relax)?;
        coordinate_constants.push((ext.lambda, ext.s));
        shadow_values.push(ext.values);
    }

    let n = space.n();
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut shadow_points: Vec<Vec<f64>> = Vec::with_capacity(n);
    for x in 0..n {
        let shadow: Vec<f64> = (0..dim).map(|i| shadow_values[i][x]).collect();
        values.push(correction_map(&shadow, eps));
        shadow_points.push(shadow);
    }

    let mut realized: f64 = 0.0;
    let mut diff_in = Vec::new();
    let mut diff_out = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            diff_in.clear();
            diff_in.extend(shadow_points[x].iter().zip(&shadow_points[y]).map(|(a, b)| a - b));
            let din = euclid(&diff_in);
            if din <= 1e-12 {
                continue;
            }
            diff_out.clear();
            diff_out.extend(values[x].iter().zip(&values[y]).map(|(a, b)| a - b));
            realized = realized.max(euclid(&diff_out) / din);
        }
    }
    let chart_lipschitz = (realized * 1.1).max(1.0);
    let lambda_vec: Vec<f64> = coordinate_constants.iter().map(|c| c.0).collect();
    let s_vec: Vec<f64> = coordinate_constants.iter().map(|c| c.1).collect();
    let lambda_out = chart_lipschitz * euclid(&lambda_vec);
    let s_out = chart_lipschitz * euclid(&s_vec);

    let value_scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |a, &b| a.max(b.abs()));
    for (k, &a) in problem.subset.iter().enumerate() {
        let diff: Vec<f64> = values[a].iter().zip(&rows[k]).map(|(p, q)| p - q).collect();
        if euclid(&diff) > 1e-9 * value_scale {
            return Err(invariant(format!(
                "extension fails to reproduce the given tuple at {:?}",
                space.id(a)
            )));
        }
    }
    let audit = audit_vector(space, &values, lambda_out, s_out);
    if !audit.satisfied() {
        let (i, j) = audit.worst_pair.expect("excess implies a pair");
        return Err(invariant(format!(
            "orthant extension misses its certified bound at ({:?}, {:?}) by {}",
            space.id(i),
            space.id(j),
            audit.max_excess
        )));
    }
    Ok(OrthantExtension {
        values,
        lambda: lambda_out,
        s: s_out,
        epsilon: eps,
        chart_lipschitz,
        coordinate_constants,
    })
}

/// A staircase minorant: values, the first occupied level, and the ball
/// radii carrying the staircase.
#[derive(Debug, Clone)]
pub struct Minorant {
    pub values: Vec<f64>,
    pub base_level: i64,
    pub radii: Vec<f64>,
}

/// Build a function `q <= f` satisfying `|q(x) - q(y)| <= d(x, y) + 3` from
/// any nonnegative `f`. Integral radii `m_k` grow so the ball of radius
/// `m_k` around the basepoint contains the sublevel set `{f <= k}`; `q`
/// is zero on the innermost ball and climbs by one per shell, linearly in
/// the distance to the basepoint. A constant `f` yields `q` identically
/// zero because its first occupied sublevel already swallows the space.
pub fn lipschitz_minorant(space: &FiniteMetricSpace, f: &[f64]) -> Result<Minorant> {
    if f.len() != space.n() {
        return Err(validation(format!(
            "{} values for {} points",
            f.len(),
            space.n()
        )));
    }
    if let Some(x) = f.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(validation(format!(
            "value {} at {:?} is outside the half-line",
            f[x],
            space.id(x)
        )));
    }
    let fmin = f.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let fmax = f.iter().fold(0.0f64, |a, &b| a.max(b));
    let base_level = (fmin.ceil() as i64).max(1);
    let top_level = (fmax.ceil() as i64).max(base_level);
    let mut radii: Vec<f64> = Vec::with_capacity((top_level - base_level + 1) as usize);
    let mut prev = -1.0f64;
    for k in base_level..=top_level {
        let rad = (0..space.n())
            .filter(|&x| f[x] <= k as f64 + SLACK)
            .fold(0.0f64, |a, x| a.max(space.norm(x)));
        let m = rad.ceil().max(prev + 1.0);
        radii.push(m);
        prev = m;
    }
    let values: Vec<f64> = (0..space.n())
        .map(|x| {
            let d = space.norm(x);
            let j = radii
                .iter()
                .position(|&m| d <= m + SLACK)
                .expect("the top radius contains the space");
            if j == 0 {
                0.0
            } else {
                let frac = (d - radii[j - 1]) / (radii[j] - radii[j - 1]);
                (j - 1) as f64 + frac.clamp(0.0, 1.0)
            }
        })
        .collect();
    for (x, (&q, &fv)) in values.iter().zip(f).enumerate() {
        if q > fv + SLACK {
            return Err(invariant(format!(
                "minorant exceeds the function at {:?}: {q} > {fv}",
                space.id(x)
            )));
        }
    }
    let audit = audit_scalar(space, &values, 1.0, 3.0);
    if !audit.satisfied() {
        return Err(invariant(format!(
            "minorant misses the (1, 3) bound by {}",
            audit.max_excess
        )));
    }
    Ok(Minorant { values, base_level, radii })
}

/// Data for a blended extension: values `g` on a neighborhood `W` of `A`,
/// an upper envelope `f` on the whole space, the Lipschitz constants of
/// `g`, and the growth constants `lambda_w, s_w` certifying
/// `g(a) <= lambda_w * d(a, X - W) + s_w` on `A`.
#[derive(Debug, Clone)]
pub struct BlendProblem {
    pub subset_a: Vec<usize>,
    pub subset_w: Vec<usize>,
    pub g_values: Vec<f64>,
    pub f_values: Vec<f64>,
    pub lambda_g: f64,
    pub s_g: f64,
    pub lambda_w: f64,
    pub s_w: f64,
}

/// A blended extension: the values, certified constants, the blend weights
/// `phi`, the minorant it interpolates toward, and the largest ratio
/// `g'(y) / (d(y, A) + d(y, X - W))` entering the certified slope.
#[derive(Debug, Clone)]
pub struct BlendResult {
    pub values: Vec<f64>,
    pub lambda: f64,
    pub s: f64,
    pub blend_weights: Vec<f64>,
    pub minorant: Vec<f64>,
    pub growth_ratio: f64,
}

/// Extend `g` from `W` to the whole space without ever exceeding the
/// envelope `f`, reproducing `g` on `A` exactly. The result interpolates
/// `gbar = q + phi * (g' - q)` between the staircase minorant `q` of
/// `min(f, g')` and the plain extension `g'` of `g`, weighted by
/// `phi(x) = d(x, X - W) / (d(x, A) + d(x, X - W))` (identically one when
/// `W` is the whole space). The certified slope is
/// `lambda_g + 2 + growth_ratio` with offset `s_g + 6`, the finite-space
/// evaluation of the blend's composite constants.
pub fn blend_extension(space: &FiniteMetricSpace, problem: &BlendProblem) -> Result<BlendResult> {
    check_subset(space, &problem.subset_a)?;
    check_subset(space, &problem.subset_w)?;
    check_constants(problem.lambda_g, problem.s_g)?;
    check_constants(problem.lambda_w, problem.s_w)?;
    if problem.subset_a.is_empty() {
        return Err(validation("the subset A must be nonempty"));
    }
    let n = space.n();
    let mut in_w = vec![false; n];
    let mut pos_w = vec![usize::MAX; n];
    for (k, &w) in problem.subset_w.iter().enumerate() {
        in_w[w] = true;
        pos_w[w] = k;
    }
    for &a in &problem.subset_a {
        if !in_w[a] {
            return Err(validation(format!(
                "A is not contained in W: {:?} is missing",
                space.id(a)
            )));
        }
    }
    if problem.g_values.len() != problem.subset_w.len() {
        return Err(validation(format!(
            "{} values of g for {} points of W",
            problem.g_values.len(),
            problem.subset_w.len()
        )));
    }
    if problem.f_values.len() != n {
        return Err(validation(format!(
            "the envelope needs {} values, got {}",
            n,
            problem.f_values.len()
        )));
    }
    if problem
        .g_values
        .iter()
        .chain(&problem.f_values)
        .any(|v| !v.is_finite() || *v < 0.0)
    {
        return Err(validation("g and f must be finite and nonnegative"));
    }
    for (k, &w) in problem.subset_w.iter().enumerate() {
        if problem.g_values[k] > problem.f_values[w] + SLACK {
            return Err(validation(format!(
                "g exceeds the envelope f at {:?}",
                space.id(w)
            )));
        }
    }
    for (k, &w) in problem.subset_w.iter().enumerate() {
        for (l, &w2) in problem.subset_w.iter().enumerate().skip(k + 1) {
            let bound = problem.lambda_g * space.dist(w, w2) + problem.s_g;
            if (problem.g_values[k] - problem.g_values[l]).abs() > bound + SLACK {
                return Err(validation(format!(
                    "g breaks its own bound at ({:?}, {:?})",
                    space.id(w),
                    space.id(w2)
                )));
            }
        }
    }
    let complement_w: Vec<usize> = (0..n).filter(|&x| !in_w[x]).collect();
    let d_wc: Vec<f64> = (0..n).map(|x| space.dist_to_set(x, &complement_w)).collect();
    for &a in &problem.subset_a {
        let reach = d_wc[a];
        if reach.is_finite() && problem.g_values[pos_w[a]] > problem.lambda_w * reach + problem.s_w + SLACK
        {
            return Err(validation(format!(
                "growth certificate fails at {:?}: g = {} but the reach bound is {}",
                space.id(a),
                problem.g_values[pos_w[a]],
                problem.lambda_w * reach + problem.s_w
            )));
        }
    }

    let g_ext = extend_halfline(
        space,
        &ExtensionProblem {
            subset: problem.subset_w.clone(),
            values: PartialValues::Scalar(problem.g_values.clone()),
            lambda: problem.lambda_g,
            s: problem.s_g,
            mode: GrowthMode::Plain,
        },
        &EnumerationOrder::AscendingNorm,
        ValueRule::Midpoint,
        1.0,
    )?;
    let capped: Vec<f64> = g_ext
        .values
        .iter()
        .zip(&problem.f_values)
        .map(|(&g, &f)| g.min(f))
        .collect();
    let minorant = lipschitz_minorant(space, &capped)?;
    let d_a: Vec<f64> = (0..n).map(|x| space.dist_to_set(x, &problem.subset_a)).collect();

    let mut blend_weights = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut growth_ratio = 0.0f64;
    for x in 0..n {
        let phi = if d_wc[x].is_infinite() {
            1.0
        } else if d_wc[x] == 0.0 {
            0.0
        } else {
            d_wc[x] / (d_a[x] + d_wc[x])
        };
        blend_weights.push(phi);
        let q = minorant.values[x];
        let g = g_ext.values[x];
        values.push(if phi == 1.0 {
            g
        } else if phi == 0.0 {
            q
        } else {
            q + phi * (g - q)
        });
        if d_wc[x].is_finite() {
            growth_ratio = growth_ratio.max(g / (d_a[x] + d_wc[x]));
        }
    }
    let lambda_out = problem.lambda_g + 2.0 + growth_ratio;
    let s_out = problem.s_g + 6.0;

    for (x, &v) in values.iter().enumerate() {
        if v > problem.f_values[x] + SLACK {
            return Err(invariant(format!(
                "blend exceeds the envelope at {:?}",
                space.id(x)
            )));
        }
    }
    for &a in &problem.subset_a {
        if values[a] != problem.g_values[pos_w[a]] {
            return Err(invariant(format!(
                "blend fails to reproduce g at {:?}",
                space.id(a)
            )));
        }
    }
    let audit = audit_scalar(space, &values, lambda_out, s_out);
    if !audit.satisfied() {
        return Err(invariant(format!(
            "blend misses its certified bound by {}",
            audit.max_excess
        )));
    }
    Ok(BlendResult {
        values,
        lambda: lambda_out,
        s: s_out,
        blend_weights,
        minorant: minorant.values,
        growth_ratio,
    })
}

/// A vector-valued extension on a neighborhood: the members of `W`, the
/// extended tuples aligned with them, certified constants, the transverse
/// height of the lift at every point of the space, and the slack of the
/// reach certificate on `A` (infinite when `W` is the whole space).
#[derive(Debug, Clone)]
pub struct NeighborhoodExtension {
    pub w_set: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    pub lambda: f64,
    pub s: f64,
    pub transverse: Vec<f64>,
    pub certificate_margin: f64,
}

fn householder_to_diagonal(z: &[f64]) -> Vec<f64> {
    let n = z.len() as f64;
    let u = 1.0 / n.sqrt();
    // Reflection swapping the last coordinate axis with the unit diagonal.
    let mut v: Vec<f64> = z.iter().map(|_| -u).collect();
    let last = v.len() - 1;
    v[last] += 1.0;
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let vz: f64 = v.iter().zip(z).map(|(a, b)| a * b).sum();
    let t = 2.0 * vz / vv;
    z.iter().zip(&v).map(|(a, b)| a - t * b).collect()
}

/// Extend vector-valued data (arbitrary sign) from `A` to a neighborhood
/// `W`. The data lifts isometrically onto the boundary hyperplane of a
/// halfspace one dimension up, extends there through the shear chart and
/// the orthant solver (lower-end value rule, so untouched data stays on
/// the boundary), and projects back. `W` keeps the points whose lift stays
/// under the graph of the norm; on `A` the certified constants satisfy
/// `||g(a)|| <= lambda * d(a, X - W) + s`.
pub fn neighborhood_extension(
    space: &FiniteMetricSpace,
    subset_a: &[usize],
    g: &[Vec<f64>],
    lambda: f64,
    s: f64,
) -> Result<NeighborhoodExtension> {
    check_subset(space, subset_a)?;
    check_constants(lambda, s)?;
    if subset_a.is_empty() {
        return Err(validation("the subset A must be nonempty"));
    }
    if g.len() != subset_a.len() {
        return Err(validation(format!(
            "{} tuples for {} subset points",
            g.len(),
            subset_a.len()
        )));
    }
    let dim = g[0].len();
    if dim == 0 {
        return Err(validation("tuples must have at least one coordinate"));
    }
    for (&a, row) in subset_a.iter().zip(g) {
        if row.len() != dim {
            return Err(validation(format!(
                "tuple at {:?} has {} coordinates, expected {dim}",
                space.id(a),
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(validation(format!("tuple at {:?} is not finite", space.id(a))));
        }
    }
    for (k, &a) in subset_a.iter().enumerate() {
        for (l, &a2) in subset_a.iter().enumerate().skip(k + 1) {
            let diff: Vec<f64> = g[k].iter().zip(&g[l]).map(|(p, q)| p - q).collect();
            let bound = lambda * space.dist(a, a2) + s;
            if euclid(&diff) > bound + SLACK {
                return Err(validation(format!(
                    "input tuples break their own bound at ({:?}, {:?})",
                    space.id(a),
                    space.id(a2)
                )));
            }
        }
    }

    let lifted_dim = dim + 1;
    let chart = orthant_chart(lifted_dim)?;
    let mut lifted_rows: Vec<Vec<f64>> = Vec::with_capacity(g.len());
    for (k, row) in g.iter().enumerate() {
        let mut flat = row.clone();
        flat.push(0.0);
        let model = householder_to_diagonal(&flat);
        let mut orthant = chart.inverse(&model);
        for v in &mut orthant {
            if *v < 0.0 {
                if *v < -SLACK {
                    return Err(invariant(format!(
                        "lifted tuple at {:?} left the orthant by {}",
                        space.id(subset_a[k]),
                        -*v
                    )));
                }
                *v = 0.0;
            }
        }
        lifted_rows.push(orthant);
    }
    let chart_bound = lifted_dim as f64 + 1.0;
    let lifted = extend_orthant(
        space,
        &ExtensionProblem {
            subset: subset_a.to_vec(),
            values: PartialValues::Vector(lifted_rows),
            lambda: chart_bound * lambda,
            s: chart_bound * s,
            mode: GrowthMode::Plain,
        },
        None,
        &EnumerationOrder::AscendingNorm,
        ValueRule::LowerEnd,
        1.0,
    )?;

    let n = space.n();
    let mut projected: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut transverse: Vec<f64> = Vec::with_capacity(n);
    for x in 0..n {
        let model = chart.forward(&lifted.values[x]);
        let mut flat = householder_to_diagonal(&model);
        let t = flat.pop().expect("lift has dim + 1 coordinates");
        projected.push(flat);
        transverse.push(t);
    }
    let w_set: Vec<usize> = (0..n)
        .filter(|&x| transverse[x] <= euclid(&projected[x]) + SLACK)
        .collect();
    let mut in_w = vec![false; n];
    for &x in &w_set {
        in_w[x] = true;
    }
    for &a in subset_a {
        if !in_w[a] {
            return Err(invariant(format!(
                "{:?} carries data but fell outside the neighborhood",
                space.id(a)
            )));
        }
    }
    let value_scale = g
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |a, &b| a.max(b.abs()));
    for (k, &a) in subset_a.iter().enumerate() {
        let diff: Vec<f64> = projected[a].iter().zip(&g[k]).map(|(p, q)| p - q).collect();
        if euclid(&diff) > 1e-9 * value_scale {
            return Err(invariant(format!(
                "projection fails to reproduce the given tuple at {:?}",
                space.id(a)
            )));
        }
    }

    let chart_back = lifted_dim as f64 + 1.0;
    let lambda_lift = chart_back * lifted.lambda;
    let s_lift = chart_back * lifted.s;
    let lambda_out = std::f64::consts::SQRT_2 * lambda_lift;
    let s_out = std::f64::consts::SQRT_2 * s_lift;

    let complement: Vec<usize> = (0..n).filter(|&x| !in_w[x]).collect();
    let mut margin = f64::INFINITY;
    for (k, &a) in subset_a.iter().enumerate() {
        let reach = space.dist_to_set(a, &complement);
        if reach.is_infinite() {
            continue;
        }
        let slack = lambda_out * reach + s_out - euclid(&g[k]);
        margin = margin.min(slack);
        if slack < -SLACK {
            return Err(invariant(format!(
                "reach certificate fails at {:?} by {}",
                space.id(a),
                -slack
            )));
        }
    }
    let values: Vec<Vec<f64>> = w_set.iter().map(|&x| projected[x].clone()).collect();
    Ok(NeighborhoodExtension {
        w_set,
        values,
        lambda: lambda_out,
        s: s_out,
        transverse,
        certificate_margin: margin,
    })
}
