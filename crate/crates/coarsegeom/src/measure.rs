//! Finitely supported nonnegative measures on a space, the total-variation
//! style l1 distance between them, and the Kantorovich-Rubinstein transport
//! distance computed by successive shortest augmenting paths.

use crate::error::{invariant, validation, Result};
use crate::space::{FiniteMetricSpace, WEIGHT_SLACK};
use serde::{Deserialize, Serialize};

/// One weighted point of a measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: usize,
    pub weight: f64,
}

/// A nonnegative measure with finite support, kept sorted by point index
/// with duplicate points merged and zero weights dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasure {
    atoms: Vec<Atom>,
}

impl FiniteMeasure {
    pub fn new(mut atoms: Vec<(usize, f64)>) -> Result<Self> {
        for &(p, w) in &atoms {
            if !w.is_finite() || w < 0.0 {
                return Err(validation(format!("weight {w} at point {p} must be finite and >= 0")));
            }
        }
        atoms.sort_by_key(|a| a.0);
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.point == p => last.weight += w,
                _ => merged.push(Atom { point: p, weight: w }),
            }
        }
        merged.retain(|a| a.weight > 0.0);
        Ok(FiniteMeasure { atoms: merged })
    }

    pub fn dirac(point: usize) -> Self {
        FiniteMeasure { atoms: vec![Atom { point, weight: 1.0 }] }
    }

    /// Equal mass 1/|points| on each listed point (duplicates accumulate).
    pub fn uniform(points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(validation("uniform measure needs at least one point"));
        }
        let w = 1.0 / points.len() as f64;
        Self::new(points.iter().map(|&p| (p, w)).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total() - 1.0).abs() <= WEIGHT_SLACK
    }

    /// Checks that every support point exists in `space`.
    pub fn supported_on(&self, space: &FiniteMetricSpace) -> Result<()> {
        for a in &self.atoms {
            if a.point >= space.n() {
                return Err(validation(format!(
                    "measure atom at point {} but space has {} points",
                    a.point,
                    space.n()
                )));
            }
        }
        Ok(())
    }
}

/// l1 distance between two measures: sum of |mu({p}) - nu({p})| over points.
pub fn l1_distance(mu: &FiniteMeasure, nu: &FiniteMeasure) -> f64 {
    let (a, b) = (mu.atoms(), nu.atoms());
    let (mut i, mut j, mut acc) = (0usize, 0usize, 0.0f64);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.point == y.point => {
                acc += (x.weight - y.weight).abs();
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.point < y.point => {
                acc += x.weight;
                i += 1;
            }
            (Some(_), Some(y)) => {
                acc += y.weight;
                j += 1;
            }
            (Some(x), None) => {
                acc += x.weight;
                i += 1;
            }
            (None, Some(y)) => {
                acc += y.weight;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    acc
}

/// Kantorovich-Rubinstein (optimal transport) distance between two measures
/// of equal total mass, using ground distances from `space`. Solved by the
/// successive-shortest-path method with node potentials; costs are exact
/// metric distances, flows are f64.
pub fn kr_distance(
    space: &FiniteMetricSpace,
    mu: &FiniteMeasure,
    nu: &FiniteMeasure,
) -> Result<f64> {
    mu.supported_on(space)?;
    nu.supported_on(space)?;
    if (mu.total() - nu.total()).abs() > WEIGHT_SLACK.max(1e-9 * mu.total().max(1.0)) {
        return Err(validation(format!(
            "transport needs equal totals: {} vs {}",
            mu.total(),
            nu.total()
        )));
    }
    let src = mu.atoms();
    let dst = nu.atoms();
    let (ns, nt) = (src.len(), dst.len());
    if ns == 0 || nt == 0 {
        return Ok(0.0);
    }
    let cost = |i: usize, j: usize| space.dist(src[i].point, dst[j].point);

    let mut supply: Vec<f64> = src.iter().map(|a| a.weight).collect();
    let mut demand: Vec<f64> = dst.iter().map(|a| a.weight).collect();
    let mut flow = vec![0.0f64; ns * nt];
    let mut pot_s = vec![0.0f64; ns];
    let mut pot_t = vec![0.0f64; nt];
    let mut remaining: f64 = supply.iter().sum::<f64>().min(demand.iter().sum());
    let guard_limit = 4 * (ns * nt + ns + nt) + 16;
    let mut guard = 0usize;

    while remaining > WEIGHT_SLACK {
        guard += 1;
        if guard > guard_limit {
            return Err(invariant("transport solver failed to converge"));
        }
        // Dijkstra over the residual bipartite graph with reduced costs
        let inf = f64::INFINITY;
        let mut ds = vec![inf; ns];
        let mut dt = vec![inf; nt];
        let mut via_t: Vec<usize> = vec![usize::MAX; nt]; // source feeding sink j
        let mut via_s: Vec<usize> = vec![usize::MAX; ns]; // sink feeding source i
        let mut done_s = vec![false; ns];
        let mut done_t = vec![false; nt];
        for i in 0..ns {
            if supply[i] > 0.0 {
                ds[i] = 0.0;
            }
        }
        loop {
            let mut best = inf;
            let mut pick: Option<(bool, usize)> = None;
            for i in 0..ns {
                if !done_s[i] && ds[i] < best {
                    best = ds[i];
                    pick = Some((true, i));
                }
            }
            for j in 0..nt {
                if !done_t[j] && dt[j] < best {
                    best = dt[j];
                    pick = Some((false, j));
                }
            }
            let Some((is_source, idx)) = pick else { break };
            if is_source {
                done_s[idx] = true;
                for j in 0..nt {
                    let rc = (cost(idx, j) - pot_s[idx] - pot_t[j]).max(0.0);
                    if ds[idx] + rc < dt[j] {
                        dt[j] = ds[idx] + rc;
                        via_t[j] = idx;
                    }
                }
            } else {
                done_t[idx] = true;
                for i in 0..ns {
                    if flow[i * nt + idx] > 0.0 {
                        let rc = (pot_s[i] + pot_t[idx] - cost(i, idx)).max(0.0);
                        if dt[idx] + rc < ds[i] {
                            ds[i] = dt[idx] + rc;
                            via_s[i] = idx;
                        }
                    }
                }
            }
        }
        let target = (0..nt)
            .filter(|&j| demand[j] > 0.0 && dt[j] < inf)
            .min_by(|&a, &b| dt[a].partial_cmp(&dt[b]).unwrap());
        let Some(target) = target else {
            return Err(invariant("transport residual graph disconnected"));
        };
        let reach = dt[target];

        // trace the augmenting path and its bottleneck
        let mut path: Vec<(usize, usize, bool)> = Vec::new(); // (i, j, forward)
        let mut j = target;
        let mut bottleneck = demand[target];
        loop {
            let i = via_t[j];
            path.push((i, j, true));
            if via_s[i] == usize::MAX {
                bottleneck = bottleneck.min(supply[i]);
                break;
            }
            let back_j = via_s[i];
            bottleneck = bottleneck.min(flow[i * nt + back_j]);
            path.push((i, back_j, false));
            j = back_j;
        }
        for &(i, j, forward) in &path {
            if forward {
                flow[i * nt + j] += bottleneck;
            } else {
                flow[i * nt + j] = (flow[i * nt + j] - bottleneck).max(0.0);
            }
        }
        let (first, last) = {
            let (i0, _, _) = *path.last().unwrap();
            (i0, target)
        };
        supply[first] = (supply[first] - bottleneck).max(0.0);
        demand[last] = (demand[last] - bottleneck).max(0.0);
        remaining -= bottleneck;

        for i in 0..ns {
            if ds[i] < inf {
                pot_s[i] -= ds[i].min(reach);
            }
        }
        for j2 in 0..nt {
            if dt[j2] < inf {
                pot_t[j2] += dt[j2].min(reach);
            }
        }
    }

    let mut total = 0.0;
    for i in 0..ns {
        for j in 0..nt {
            if flow[i * nt + j] > 0.0 {
                total += flow[i * nt + j] * cost(i, j);
            }
        }
    }
    Ok(total)
}
