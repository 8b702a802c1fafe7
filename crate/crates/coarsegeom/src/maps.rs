//! Point maps between finite metric spaces and their large-scale profiles.

use crate::error::{validation, Result};
use crate::space::{FiniteMetricSpace, SLACK};
use serde::Serialize;

/// A total map on point indices together with the additive-defect profile
/// s(lambda) = max over pairs of (d(f x, f y) - lambda d(x, y)).
///
/// f is asymptotically Lipschitz with constants (lambda, s) exactly when
/// s(lambda) <= s, and short when s(1) <= 0.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzProfile {
    pub lambda_grid: Vec<f64>,
    pub s_of: Vec<f64>,
    /// Least lambda with s(lambda) <= 0, located by bisection to 1e-9.
    pub min_lambda_zero_s: f64,
    pub short: bool,
}

fn s_at(
    src: &FiniteMetricSpace,
    dst: &FiniteMetricSpace,
    f: &[usize],
    lambda: f64,
) -> f64 {
    let n = src.n();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dst.dist(f[i], f[j]) - lambda * src.dist(i, j);
            if v > worst {
                worst = v;
            }
        }
    }
    if worst.is_finite() {
        worst
    } else {
        0.0
    }
}

fn check_assignment(src: &FiniteMetricSpace, dst: &FiniteMetricSpace, f: &[usize]) -> Result<()> {
    if f.len() != src.n() {
        return Err(validation(format!(
            "map assigns {} points, source has {}",
            f.len(),
            src.n()
        )));
    }
    if let Some(&bad) = f.iter().find(|&&y| y >= dst.n()) {
        return Err(validation(format!("target index {bad} out of range")));
    }
    Ok(())
}

/// Evaluate the defect profile on a lambda grid and bisect for the least
/// lambda at which the defect vanishes.
pub fn analyze_map(
    src: &FiniteMetricSpace,
    dst: &FiniteMetricSpace,
    f: &[usize],
    lambda_grid: &[f64],
) -> Result<LipschitzProfile> {
    check_assignment(src, dst, f)?;
    if lambda_grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(validation("lambda grid must be finite and nonnegative"));
    }
    let s_of: Vec<f64> = lambda_grid.iter().map(|&l| s_at(src, dst, f, l)).collect();

    // s is nonincreasing in lambda, so a sign change is bracketed by
    // [0, max pair ratio].
    let mut hi = 1.0f64;
    for i in 0..src.n() {
        for j in (i + 1)..src.n() {
            let r = dst.dist(f[i], f[j]) / src.dist(i, j);
            if r.is_finite() && r > hi {
                hi = r;
            }
        }
    }
    let mut lo = 0.0f64;
    if s_at(src, dst, f, lo) <= 0.0 {
        hi = 0.0;
    } else {
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if s_at(src, dst, f, mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let short = s_at(src, dst, f, 1.0) <= SLACK;
    Ok(LipschitzProfile {
        lambda_grid: lambda_grid.to_vec(),
        s_of,
        min_lambda_zero_s: hi,
        short,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropernessRow {
    pub radius: f64,
    /// sup over target points of diam f^{-1}(ball_r(y)); 0 for empty fibers.
    pub max_fiber_diameter: f64,
}

/// Coarse-properness table: how wide can a preimage of an r-ball get.
/// Rows are nondecreasing in r.
pub fn coarse_properness_table(
    src: &FiniteMetricSpace,
    dst: &FiniteMetricSpace,
    f: &[usize],
    radius_grid: &[f64],
) -> Result<Vec<PropernessRow>> {
    use rayon::prelude::*;
    check_assignment(src, dst, f)?;
    let mut radii = radius_grid.to_vec();
    if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(validation("radius grid must be finite and nonnegative"));
    }
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(radii
        .iter()
        .map(|&r| {
            let worst = (0..dst.n())
                .into_par_iter()
                .map(|y| {
                    let fiber: Vec<usize> =
                        (0..src.n()).filter(|&x| dst.dist(f[x], y) <= r + SLACK).collect();
                    let mut diam = 0.0f64;
                    for (a, &x) in fiber.iter().enumerate() {
                        for &z in &fiber[a + 1..] {
                            diam = diam.max(src.dist(x, z));
                        }
                    }
                    diam
                })
                .reduce(|| 0.0, f64::max);
            PropernessRow { radius: r, max_fiber_diameter: worst }
        })
        .collect())
}
