//! End-to-end acceptance suite: one test per shipped guarantee, each checked
//! against an oracle implemented independently inside this file and against
//! the exact constants the library promises, with explicit runtime budgets.
//!
//! The tests share a lock so the wall-clock budgets are measured one test at
//! a time, regardless of the harness thread count.

use std::collections::BTreeSet;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use coarsegeom::cover::{
    audit_colored_cover, brick_colored_cover, exact_dimension_at_scale, greedy_colored_cover,
    Cover, GreedyOutcome, ProfileStrategy, PropertyCStrategy,
};
use coarsegeom::embed::{lebesgue_brick_cover, measure_map, property_c_measure_map};
use coarsegeom::extension::{
    blend_extension, extend_halfline, lipschitz_minorant, orthant_chart, BlendProblem,
    EnumerationOrder, ExtensionProblem, GrowthMode, PartialValues, ValueRule,
};
use coarsegeom::functors::{euclid, quotient_metric, ConeChart};
use coarsegeom::homology::{betti, tower_homology_ranks};
use coarsegeom::io::complex_from_json;
use coarsegeom::maps::analyze_map;
use coarsegeom::measure::{kr_distance, l1_distance, FiniteMeasure};
use coarsegeom::nerve::{anti_cech_tower, nerve, SimplicialComplex};
use coarsegeom::space::{verify_metric, Budget, FiniteMetricSpace};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const TOL: f64 = 1e-9;

/// Serializes the suite so each test's runtime budget is measured alone.
static GATE: Mutex<()> = Mutex::new(());

fn locked() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn assert_within(start: Instant, limit: Duration, what: &str) {
    let spent = start.elapsed();
    assert!(
        spent < limit,
        "{what} took {spent:?}, over the {limit:?} budget"
    );
}

// ---------------------------------------------------------------------------
// shared generators
// ---------------------------------------------------------------------------

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Random Euclidean point cloud with all pairwise distances above 1e-3,
/// so quotient gaps and subset reaches stay far from every slack threshold.
fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize, spread: f64) -> FiniteMetricSpace {
    let bud = Budget::default();
    loop {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(0.0..spread)).collect())
            .collect();
        let mut separated = true;
        'scan: for i in 0..n {
            for j in (i + 1)..n {
                if euclid(&diff(&pts[i], &pts[j])) < 1e-3 {
                    separated = false;
                    break 'scan;
                }
            }
        }
        if !separated {
            continue;
        }
        let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let matrix: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| euclid(&diff(&pts[i], &pts[j]))).collect())
            .collect();
        return FiniteMetricSpace::from_matrix("cloud", ids, "p0", matrix, &bud).unwrap();
    }
}

/// Minimum distance between two point sets, computed directly.
fn cross_gap(space: &FiniteMetricSpace, a: &[usize], b: &[usize]) -> f64 {
    let mut gap = f64::INFINITY;
    for &p in a {
        for &q in b {
            gap = gap.min(space.dist(p, q));
        }
    }
    gap
}

// ---------------------------------------------------------------------------
// 1. quotient metric against an in-test shortest-path closure
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_quotient_matches_weighted_closure_exactly() {
    let _gate = locked();
    let start = Instant::now();
    let bud = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);

    for _case in 0..100 {
        let n = rng.gen_range(2..=12);
        let space = random_cloud(&mut rng, n, 3, 10.0);

        // random partition: a label per point, empty labels dropped
        let labels = rng.gen_range(1..=n);
        let assigned: Vec<usize> = (0..n).map(|_| rng.gen_range(0..labels)).collect();
        let classes: Vec<Vec<usize>> = (0..labels)
            .map(|c| (0..n).filter(|&p| assigned[p] == c).collect::<Vec<_>>())
            .filter(|v| !v.is_empty())
            .collect();

        let q = quotient_metric(&space, &classes, &bud).unwrap();
        assert!(!q.merged, "distinct cloud points must not collapse");

        // oracle: complete graph on the classes weighted by the cross gaps,
        // closed by the textbook triple loop, compared bit for bit
        let m = classes.len();
        let mut d = vec![0.0f64; m * m];
        for a in 0..m {
            for b in (a + 1)..m {
                let gap = cross_gap(&space, &classes[a], &classes[b]);
                d[a * m + b] = gap;
                d[b * m + a] = gap;
            }
        }
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let c = d[i * m + k] + d[k * m + j];
                    if c < d[i * m + j] {
                        d[i * m + j] = c;
                    }
                }
            }
        }
        assert_eq!(q.space.n(), m);
        for (a, class) in classes.iter().enumerate() {
            for &p in class {
                assert_eq!(q.class_of[p], a, "class order must follow the partition");
            }
        }
        for a in 0..m {
            for b in 0..m {
                assert_eq!(
                    q.space.dist(a, b),
                    d[a * m + b],
                    "closure mismatch at classes {a},{b}"
                );
            }
        }

        assert!(verify_metric(&q.space).is_metric());

        // the projection is 1-Lipschitz with zero additive defect
        let profile = analyze_map(&space, &q.space, &q.class_of, &[1.0]).unwrap();
        assert!(
            profile.s_of[0] <= 0.0,
            "projection defect s(1) = {} must be nonpositive",
            profile.s_of[0]
        );
    }
    assert_within(start, Duration::from_secs(5), "quotient closure suite");
}

// ---------------------------------------------------------------------------
// 2. transport distance against an exact rational min-cost-flow oracle
// ---------------------------------------------------------------------------

/// Optimal transport cost solved exactly over the rationals by successive
/// shortest augmenting paths (Bellman-Ford on the bipartite residual graph).
/// All inputs are finite f64, converted exactly.
fn transport_oracle(space: &FiniteMetricSpace, mu: &FiniteMeasure, nu: &FiniteMeasure) -> f64 {
    let rat = |x: f64| BigRational::from_float(x).expect("finite input");
    let a = mu.atoms();
    let b = nu.atoms();
    let (m, k) = (a.len(), b.len());
    let mut supply: Vec<BigRational> = a.iter().map(|t| rat(t.weight)).collect();
    let mut demand: Vec<BigRational> = b.iter().map(|t| rat(t.weight)).collect();
    let cost: Vec<BigRational> = a
        .iter()
        .flat_map(|ai| b.iter().map(|bj| rat(space.dist(ai.point, bj.point))))
        .collect();
    let mut flow: Vec<BigRational> = vec![BigRational::zero(); m * k];

    let mut rounds = 0usize;
    while supply.iter().any(|s| !s.is_zero()) {
        rounds += 1;
        assert!(rounds <= 10_000, "transport oracle failed to terminate");

        // shortest paths from every live source over the residual graph
        let nn = m + k;
        let mut dist: Vec<Option<BigRational>> = vec![None; nn];
        let mut pred: Vec<usize> = vec![usize::MAX; nn];
        for (i, s) in supply.iter().enumerate() {
            if !s.is_zero() {
                dist[i] = Some(BigRational::zero());
            }
        }
        for _ in 0..nn {
            let mut changed = false;
            for i in 0..m {
                let Some(di) = dist[i].clone() else { continue };
                for j in 0..k {
                    let nd = &di + &cost[i * k + j];
                    if dist[m + j].as_ref().map_or(true, |cur| nd < *cur) {
                        dist[m + j] = Some(nd);
                        pred[m + j] = i;
                        changed = true;
                    }
                }
            }
            for j in 0..k {
                let Some(dj) = dist[m + j].clone() else { continue };
                for i in 0..m {
                    if !flow[i * k + j].is_zero() {
                        let nd = &dj - &cost[i * k + j];
                        if dist[i].as_ref().map_or(true, |cur| nd < *cur) {
                            dist[i] = Some(nd);
                            pred[i] = m + j;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let sink = (0..k)
            .filter(|&j| !demand[j].is_zero() && dist[m + j].is_some())
            .min_by(|&x, &y| dist[m + x].cmp(&dist[m + y]))
            .expect("equal totals leave a reachable sink");

        // walk the predecessor chain back to a source
        let mut path = vec![m + sink];
        let mut steps = 0usize;
        while pred[*path.last().unwrap()] != usize::MAX {
            path.push(pred[*path.last().unwrap()]);
            steps += 1;
            assert!(steps <= 2 * nn, "predecessor chain must stay acyclic");
        }
        let source = *path.last().unwrap();
        assert!(source < m && !supply[source].is_zero());

        // bottleneck: leftover supply and demand, and flow on backward arcs
        let mut delta = supply[source].clone().min(demand[sink].clone());
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if to < m {
                delta = delta.min(flow[to * k + (from - m)].clone());
            }
        }
        assert!(!delta.is_zero());
        supply[source] = &supply[source] - &delta;
        demand[sink] = &demand[sink] - &delta;
        for w in path.windows(2) {
            let (to, from) = (w[0], w[1]);
            if to >= m {
                flow[from * k + (to - m)] = &flow[from * k + (to - m)] + &delta;
            } else {
                flow[to * k + (from - m)] = &flow[to * k + (from - m)] - &delta;
            }
        }
    }
    assert!(demand.iter().all(|d| d.is_zero()));

    let mut total = BigRational::zero();
    for (f, c) in flow.iter().zip(&cost) {
        total = &total + &(f * c);
    }
    total.to_f64().expect("finite cost")
}

/// A measure with the given number of atoms on distinct points and exact
/// dyadic weights k/64 summing to exactly one.
fn random_dyadic_measure(rng: &mut ChaCha8Rng, space_n: usize, atoms: usize) -> FiniteMeasure {
    let mut points: Vec<usize> = (0..space_n).collect();
    points.shuffle(rng);
    points.truncate(atoms);
    let mut cuts = BTreeSet::new();
    while cuts.len() < atoms - 1 {
        cuts.insert(rng.gen_range(1..64u32));
    }
    let mut bounds: Vec<u32> = vec![0];
    bounds.extend(cuts);
    bounds.push(64);
    let weights: Vec<f64> = bounds.windows(2).map(|w| f64::from(w[1] - w[0]) / 64.0).collect();
    FiniteMeasure::new(points.into_iter().zip(weights).collect()).unwrap()
}

#[test]
fn criterion_02_transport_distance_matches_rational_lp_oracle() {
    let _gate = locked();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);

    // 50 random instances against the exact oracle
    for _case in 0..50 {
        let n = rng.gen_range(2..=6);
        let space = random_cloud(&mut rng, n, 2, 10.0);
        let (na, nb) = (rng.gen_range(1..=4.min(n)), rng.gen_range(1..=4.min(n)));
        let mu = random_dyadic_measure(&mut rng, n, na);
        let nu = random_dyadic_measure(&mut rng, n, nb);
        let lib = kr_distance(&space, &mu, &nu).unwrap();
        let oracle = transport_oracle(&space, &mu, &nu);
        assert!(
            (lib - oracle).abs() <= TOL,
            "transport {lib} vs oracle {oracle}"
        );
    }

    // point masses move for exactly the ground distance
    for _case in 0..20 {
        let n = rng.gen_range(2..=6);
        let space = random_cloud(&mut rng, n, 2, 10.0);
        let x = rng.gen_range(0..n);
        let y = (x + rng.gen_range(1..n)) % n;
        let got = kr_distance(&space, &FiniteMeasure::dirac(x), &FiniteMeasure::dirac(y)).unwrap();
        assert_eq!(got, space.dist(x, y), "point-mass cost must be exact");
    }

    // metric axioms on random triples
    for _case in 0..20 {
        let n = rng.gen_range(3..=6);
        let space = random_cloud(&mut rng, n, 2, 10.0);
        let (na, nb, nc) = (
            rng.gen_range(1..=4.min(n)),
            rng.gen_range(1..=4.min(n)),
            rng.gen_range(1..=4.min(n)),
        );
        let mu = random_dyadic_measure(&mut rng, n, na);
        let nu = random_dyadic_measure(&mut rng, n, nb);
        let pi = random_dyadic_measure(&mut rng, n, nc);
        let self_cost = kr_distance(&space, &mu, &mu).unwrap();
        assert!(self_cost.abs() <= 1e-12, "self transport {self_cost}");
        let ab = kr_distance(&space, &mu, &nu).unwrap();
        let ba = kr_distance(&space, &nu, &mu).unwrap();
        assert!((ab - ba).abs() <= TOL, "symmetry {ab} vs {ba}");
        let bc = kr_distance(&space, &nu, &pi).unwrap();
        let ac = kr_distance(&space, &mu, &pi).unwrap();
        assert!(ac <= ab + bc + TOL, "triangle {ac} > {ab} + {bc}");
        assert!(ab >= 0.0 && bc >= 0.0 && ac >= 0.0);
    }

    assert_within(start, Duration::from_secs(5), "transport suite");
}

// ---------------------------------------------------------------------------
// 3. scalar extension: exact restriction and the certified pair bound,
//    stable under arbitrary enumeration orders
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_halfline_extension_restricts_and_meets_bounds() {
    let _gate = locked();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);

    for case in 0..100 {
        let n = rng.gen_range(6..=40);
        let space = random_cloud(&mut rng, n, 2, 10.0);

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let subset: Vec<usize> = order[..rng.gen_range(1..=n / 2)].to_vec();

        let lambda = rng.gen_range(0.6..2.0);
        let shape = rng.gen_range(0.0..1.0);
        let values: Vec<f64> = subset
            .iter()
            .map(|&a| shape * space.norm(a) + rng.gen_range(0.0..4.0))
            .collect();
        let mut excess = 0.0f64;
        for (i, &a) in subset.iter().enumerate() {
            for (j, &b) in subset.iter().enumerate().skip(i + 1) {
                excess = excess.max((values[i] - values[j]).abs() - lambda * space.dist(a, b));
            }
        }
        let s = excess.max(0.0) + 0.05;

        // odd cases additionally demand lower growth against the norm
        let mode = if case % 2 == 0 {
            GrowthMode::Plain
        } else {
            let c = lambda * rng.gen_range(0.1..0.8);
            let need = subset
                .iter()
                .zip(&values)
                .map(|(&a, &v)| c * space.norm(a) - v)
                .fold(0.0f64, f64::max);
            GrowthMode::NormGrowth { c, b: need + 0.05 }
        };
        let problem = ExtensionProblem {
            subset: subset.clone(),
            values: PartialValues::Scalar(values.clone()),
            lambda,
            s,
            mode: mode.clone(),
        };

        let complement: Vec<usize> = (0..n).filter(|p| !subset.contains(p)).collect();
        for _round in 0..5 {
            let mut enumeration = complement.clone();
            enumeration.shuffle(&mut rng);
            let ext = extend_halfline(
                &space,
                &problem,
                &EnumerationOrder::Given(enumeration),
                ValueRule::Midpoint,
                1.0,
            )
            .unwrap();

            for (i, &a) in subset.iter().enumerate() {
                assert_eq!(ext.values[a], values[i], "restriction must be verbatim");
            }
            for x in 0..n {
                assert!(ext.values[x] >= 0.0);
                for y in (x + 1)..n {
                    let gap = (ext.values[x] - ext.values[y]).abs();
                    assert!(
                        gap <= lambda * space.dist(x, y) + s + TOL,
                        "pair bound broken: {gap} > {lambda}*d + {s}"
                    );
                }
                if let GrowthMode::NormGrowth { c, b } = mode {
                    assert!(
                        ext.values[x] >= c * space.norm(x) - b - TOL,
                        "growth floor broken at point {x}"
                    );
                }
            }
        }
    }
    assert_within(start, Duration::from_secs(10), "extension suite");
}

// ---------------------------------------------------------------------------
// 4. chart constants on sampled pairs
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_chart_constants_hold_on_sampled_pairs() {
    let _gate = locked();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let pairs = 10_000;

    for n in 1..=4usize {
        let cone = ConeChart::new(n).unwrap();
        let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect()
        };
        // sum metric on (point, height)
        let rho = |x: &[f64], t: f64, y: &[f64], u: f64| euclid(&diff(x, y)) + (t - u).abs();

        // cone coordinates to halfspace coordinates
        for _ in 0..pairs {
            let (x, y) = (sample(&mut rng), sample(&mut rng));
            let t = rng.gen::<f64>() * euclid(&x);
            let u = rng.gen::<f64>() * euclid(&y);
            let (fx, ft) = cone.forward(&x, t).unwrap();
            let (fy, fu) = cone.forward(&y, u).unwrap();
            assert!(
                rho(&fx, ft, &fy, fu) <= 3.0 * rho(&x, t, &y, u) + TOL,
                "cone chart is not 3-Lipschitz at n = {n}"
            );
        }
        // halfspace coordinates back to the cone, heights within the norms
        // (the regime of the guarantee, mirroring the forward domain)
        for _ in 0..pairs {
            let (x, y) = (sample(&mut rng), sample(&mut rng));
            let t = rng.gen::<f64>() * euclid(&x);
            let u = rng.gen::<f64>() * euclid(&y);
            let (gx, gt) = cone.inverse(&x, t).unwrap();
            let (gy, gu) = cone.inverse(&y, u).unwrap();
            assert!(
                rho(&gx, gt, &gy, gu) <= 3.0 * rho(&x, t, &y, u) + TOL,
                "cone chart inverse is not 3-Lipschitz at n = {n}"
            );
        }

        let chart = orthant_chart(n).unwrap();
        let bound = (n + 1) as f64;
        let floor = 1.0 - 1.0 / 2.0f64.sqrt();
        for _ in 0..pairs {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let (tx, ty) = (chart.forward(&x), chart.forward(&y));
            let base = euclid(&diff(&x, &y));
            assert!(
                euclid(&diff(&tx, &ty)) <= bound * base + TOL,
                "orthant chart exceeds ({n}+1)-Lipschitz"
            );
            assert!(
                euclid(&tx) >= floor * euclid(&x) - TOL,
                "orthant chart loses too much norm at n = {n}"
            );
            let (bx, by) = (chart.inverse(&tx), chart.inverse(&ty));
            assert!(
                euclid(&diff(&bx, &by)) <= bound * euclid(&diff(&tx, &ty)) + TOL,
                "orthant chart inverse exceeds ({n}+1)-Lipschitz"
            );
        }
    }
    assert_within(start, Duration::from_secs(5), "chart suite");
}

// ---------------------------------------------------------------------------
// 5. brick certificates on a square box; exact search never loses to the
//    heuristics
// ---------------------------------------------------------------------------

/// Full in-test audit of a colored cover: coverage, same-family separation
/// strictly above the scale, and diameters within the recorded mesh bound.
fn audit_by_hand(
    space: &FiniteMetricSpace,
    families: &[Vec<Vec<usize>>],
    scale: f64,
    mesh_bound: f64,
) {
    let mut covered = vec![false; space.n()];
    for family in families {
        for set in family {
            for &p in set {
                covered[p] = true;
            }
            for (i, &p) in set.iter().enumerate() {
                for &q in &set[i + 1..] {
                    assert!(
                        space.dist(p, q) <= mesh_bound + TOL,
                        "set diameter exceeds the mesh bound"
                    );
                }
            }
        }
        for (i, a) in family.iter().enumerate() {
            for b in &family[i + 1..] {
                assert!(
                    cross_gap(space, a, b) > scale,
                    "same-family sets are only {} apart at scale {scale}",
                    cross_gap(space, a, b)
                );
            }
        }
    }
    assert!(covered.iter().all(|&c| c), "cover misses points");
}

#[test]
fn criterion_05_brick_certificates_and_exact_search() {
    let _gate = locked();
    let start = Instant::now();
    let bud = Budget::default();

    // square box of side 60: three brick families at every scale certify
    // that two extra families always suffice
    let box2 = FiniteMetricSpace::grid(2, 60, &bud).unwrap();
    for scale in [2.0, 5.0, 10.0] {
        let cc = brick_colored_cover(&box2, scale).unwrap();
        assert_eq!(cc.families.len(), 3, "plane bricks use three families");
        let audit = audit_colored_cover(&box2, &cc).unwrap();
        assert!(audit.passed(), "library audit failed at scale {scale}");
        audit_by_hand(&box2, &cc.families, scale, cc.mesh_bound);
    }

    // exact search matches or improves the heuristics on small spaces
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    for n in [5usize, 6, 7, 8, 9, 10] {
        let space = random_cloud(&mut rng, n, 2, 10.0);
        let mut gaps: Vec<f64> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(|j| space.dist(i, j)).collect::<Vec<_>>())
            .collect();
        gaps.sort_by(f64::total_cmp);
        let median = gaps[gaps.len() / 2];
        for scale in [0.6 * median, 1.2 * median] {
            let GreedyOutcome::Cover(greedy) = greedy_colored_cover(&space, scale, n).unwrap()
            else {
                panic!("n families always suffice for n points");
            };
            audit_by_hand(&space, &greedy.families, scale, greedy.mesh_bound);
            let (best, exact) = exact_dimension_at_scale(&space, scale, None).unwrap();
            audit_by_hand(&space, &exact.families, scale, exact.mesh_bound);
            assert_eq!(best, exact.families.len());
            assert!(
                best <= greedy.families.len(),
                "exact search ({best}) lost to greedy ({})",
                greedy.families.len()
            );
        }
    }

    // twelve-point instances, including a line where bricks are optimal
    let line = FiniteMetricSpace::grid(1, 12, &bud).unwrap();
    for scale in [2.0, 3.0] {
        let bricks = brick_colored_cover(&line, scale).unwrap();
        let (best, exact) = exact_dimension_at_scale(&line, scale, None).unwrap();
        audit_by_hand(&line, &exact.families, scale, exact.mesh_bound);
        assert!(best <= bricks.families.len());
    }
    let cloud12 = random_cloud(&mut rng, 12, 2, 10.0);
    let mut gaps: Vec<f64> = (0..12)
        .flat_map(|i| ((i + 1)..12).map(|j| cloud12.dist(i, j)).collect::<Vec<_>>())
        .collect();
    gaps.sort_by(f64::total_cmp);
    let scale = 0.5 * gaps[gaps.len() / 2];
    let GreedyOutcome::Cover(greedy) = greedy_colored_cover(&cloud12, scale, 12).unwrap() else {
        panic!("12 families always suffice for 12 points");
    };
    let (best, exact) = exact_dimension_at_scale(&cloud12, scale, None).unwrap();
    audit_by_hand(&cloud12, &exact.families, scale, exact.mesh_bound);
    assert!(best <= greedy.families.len());

    assert_within(start, Duration::from_secs(30), "certificate suite");
}

// ---------------------------------------------------------------------------
// 6. displacement bound for brick measure maps on the square box
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_measure_map_displacement_bound() {
    let _gate = locked();
    let start = Instant::now();
    let bud = Budget::default();
    let side = 100usize;
    let space = FiniteMetricSpace::grid(2, side, &bud).unwrap();

    // index lookup table by coordinates
    let index: Vec<usize> = (0..side)
        .flat_map(|x| {
            (0..side)
                .map(|y| space.index_of(&format!("{x}_{y}")).unwrap())
                .collect::<Vec<_>>()
        })
        .collect();

    let reach = 10i64; // compare points up to this distance apart
    let mut observed = Vec::new();
    for scale in [5.0, 10.0, 20.0] {
        let cover = lebesgue_brick_cover(&space, scale).unwrap();
        let mm = measure_map(&space, &cover, scale).unwrap();

        // direct scan of every pair at distance <= reach
        let mut worst = 0.0f64;
        for x in 0..side as i64 {
            for y in 0..side as i64 {
                let z = index[(x as usize) * side + y as usize];
                for dx in 0..=reach {
                    let lo = if dx == 0 { 1 } else { dx - reach };
                    for dy in lo..=(reach - dx) {
                        let (a, b) = (x + dx, y + dy);
                        if a < 0 || a >= side as i64 || b < 0 || b >= side as i64 {
                            continue;
                        }
                        let w = index[(a as usize) * side + b as usize];
                        worst = worst.max(l1_distance(&mm.measures[z], &mm.measures[w]));
                    }
                }
            }
        }
        // two extra families over the line means a displacement factor of
        // 4 * reach * 2 over the scale
        let bound = 4.0 * reach as f64 * 2.0 / scale;
        assert!(
            worst <= bound + TOL,
            "displacement {worst} over bound {bound} at scale {scale}"
        );
        observed.push(worst);
    }
    assert!(
        observed.windows(2).all(|w| w[1] <= w[0] + 1e-12),
        "displacement must not grow with the scale: {observed:?}"
    );

    assert_within(start, Duration::from_secs(60), "measure map suite");
}

// ---------------------------------------------------------------------------
// 7. weighted multi-scale maps on the long line: norm floor and the
//    displacement constant
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_weighted_map_norm_floor_and_lipschitz() {
    let _gate = locked();
    let start = Instant::now();
    let bud = Budget::default();
    let line = FiniteMetricSpace::grid(1, 500, &bud).unwrap();
    let k = 2usize;

    for n in [3usize, 5] {
        let pm = property_c_measure_map(&line, n, k, PropertyCStrategy::Grid).unwrap();
        let floor = (n as f64).powi(k as i32 + 1) / 2.0;
        assert_eq!(pm.norm_floor, floor);
        assert_eq!(pm.lipschitz_bound, 12.0 / (n as f64 - 1.0));

        for (x, &raw) in pm.raw_norms.iter().enumerate() {
            assert!(
                raw >= floor - TOL,
                "raw mass {raw} below the floor {floor} at point {x}"
            );
        }
        let rate = 12.0 / (n as f64 - 1.0);
        for x in 0..line.n() {
            for y in (x + 1)..line.n() {
                let moved = l1_distance(&pm.measures[x], &pm.measures[y]);
                assert!(
                    moved <= rate * line.dist(x, y) + TOL,
                    "pair ({x},{y}) moved {moved} over {rate} per unit"
                );
            }
        }
    }
    assert_within(start, Duration::from_secs(60), "weighted map suite");
}

// ---------------------------------------------------------------------------
// 8. homology against an in-test rational elimination oracle
// ---------------------------------------------------------------------------

/// Row-echelon rank over the rationals, written independently of the
/// library's matrix type.
fn echelon_rank(mut m: Vec<Vec<BigRational>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let pivot = m[row][col].clone();
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = &m[r][col] / &pivot;
                for c in col..cols {
                    m[r][c] = &m[r][c] - &(&factor * &m[row][c]);
                }
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Betti numbers of the complex generated by the given maximal vertex sets,
/// from scratch: subset closure, signed boundary matrices, rational ranks.
fn betti_oracle(maximal: &[Vec<usize>]) -> Vec<usize> {
    let mut simplices: BTreeSet<Vec<usize>> = BTreeSet::new();
    for top in maximal {
        let k = top.len();
        for mask in 1u32..(1 << k) {
            let sub: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| top[i]).collect();
            simplices.insert(sub);
        }
    }
    let max_dim = simplices.iter().map(|s| s.len() - 1).max().unwrap();
    let mut by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new(); max_dim + 1];
    for s in simplices {
        by_dim[s.len() - 1].push(s);
    }

    let one = || BigRational::from_integer(1.into());
    let boundary_rank = |k: usize| -> usize {
        if k == 0 || k > max_dim || by_dim[k].is_empty() {
            return 0;
        }
        let faces = &by_dim[k - 1];
        let mut matrix = vec![vec![BigRational::zero(); by_dim[k].len()]; faces.len()];
        for (col, simplex) in by_dim[k].iter().enumerate() {
            for drop in 0..simplex.len() {
                let mut face = simplex.clone();
                face.remove(drop);
                let row = faces.binary_search(&face).expect("closed under faces");
                matrix[row][col] = if drop % 2 == 0 { one() } else { -one() };
            }
        }
        echelon_rank(matrix)
    };

    (0..=max_dim)
        .map(|k| by_dim[k].len() - boundary_rank(k) - boundary_rank(k + 1))
        .collect()
}

fn complex_of(vertices: &[String], maximal: &[Vec<usize>]) -> SimplicialComplex {
    let tops: Vec<Vec<String>> = maximal
        .iter()
        .map(|s| s.iter().map(|&v| vertices[v].clone()).collect())
        .collect();
    complex_from_json(&json!({
        "schema_version": 1,
        "meshSize": 1.0,
        "vertices": vertices,
        "maxSimplices": tops,
    }))
    .unwrap()
}

#[test]
fn criterion_08_nerve_homology_matches_rational_oracle() {
    let _gate = locked();
    let start = Instant::now();
    let bud = Budget::default();

    // triangle boundary: one component, one loop
    let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let hollow = complex_of(&names, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
    assert_eq!(betti(&hollow, 1).unwrap(), vec![1, 1]);

    // the same shape arising as the nerve of three arcs on a hexagon
    let ids: Vec<String> = (0..6).map(|i| format!("h{i}")).collect();
    let edges: Vec<(usize, usize, f64)> =
        (0..6).map(|i| (i, (i + 1) % 6, 1.0)).collect();
    let hexagon = FiniteMetricSpace::from_graph("hexagon", ids, "h0", &edges, &bud).unwrap();
    let arcs = Cover::new(&hexagon, vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 0]]).unwrap();
    let arc_nerve = nerve(&hexagon, &arcs, 2.0).unwrap();
    assert_eq!(betti(&arc_nerve, 1).unwrap(), vec![1, 1]);

    // solid simplices: a single component and nothing above
    for nv in 1..=6usize {
        let names: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
        let solid = complex_of(&names, &[(0..nv).collect()]);
        let mut want = vec![0usize; nv + 1];
        want[0] = 1;
        assert_eq!(betti(&solid, nv).unwrap(), want);
    }

    // random complexes against the oracle
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    for _case in 0..20 {
        let nv = rng.gen_range(3..=8);
        let names: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
        let mut tops: Vec<Vec<usize>> = Vec::new();
        for _ in 0..rng.gen_range(2..=6) {
            let mut verts: Vec<usize> = (0..nv).collect();
            verts.shuffle(&mut rng);
            verts.truncate(rng.gen_range(1..=4.min(nv)));
            verts.sort_unstable();
            tops.push(verts);
        }
        let mut hit = vec![false; nv];
        for t in &tops {
            for &v in t {
                hit[v] = true;
            }
        }
        for (v, seen) in hit.iter().enumerate() {
            if !seen {
                tops.push(vec![v]);
            }
        }

        let want = betti_oracle(&tops);
        let complex = complex_of(&names, &tops);
        for k in 0..want.len() {
            assert_eq!(
                complex.simplices(k).len(),
                betti_oracle_count(&tops, k),
                "face closure disagrees in degree {k}"
            );
        }
        assert_eq!(betti(&complex, want.len() - 1).unwrap(), want);
    }

    // a ring of points: the loop lives at small scales and dies past the
    // diameter
    let mut rng = ChaCha8Rng::seed_from_u64(0x88);
    let count = 40usize;
    let pts: Vec<Vec<f64>> = (0..count)
        .map(|i| {
            let theta = i as f64 / count as f64 * std::f64::consts::TAU;
            let r = 8.0 + rng.gen_range(-0.1..0.1);
            vec![r * theta.cos(), r * theta.sin()]
        })
        .collect();
    let ids: Vec<String> = (0..count).map(|i| format!("r{i}")).collect();
    let matrix: Vec<Vec<f64>> = (0..count)
        .map(|i| (0..count).map(|j| euclid(&diff(&pts[i], &pts[j]))).collect())
        .collect();
    let ring = FiniteMetricSpace::from_matrix("ring", ids, "r0", matrix, &bud).unwrap();
    let tower = anti_cech_tower(
        &ring,
        &[3.0, 6.0, 26.0],
        ProfileStrategy::Greedy { max_families: count },
    )
    .unwrap();
    assert_eq!(betti(&tower.stages[0].complex, 1).unwrap()[1], 1);
    assert_eq!(betti(&tower.stages[1].complex, 1).unwrap()[1], 1);
    assert_eq!(betti(&tower.stages[2].complex, 1).unwrap()[1], 0);
    let ranks = tower_homology_ranks(&tower, 1).unwrap();
    let rank_of = |i: usize, j: usize| {
        ranks
            .iter()
            .find(|r| r.from_stage == i && r.to_stage == j)
            .expect("every stage pair is reported")
            .rank
    };
    assert_eq!(rank_of(0, 1), 1, "the loop survives one step up");
    assert_eq!(rank_of(0, 2), 0, "the loop dies past the diameter");
    assert_eq!(rank_of(1, 2), 0);

    assert_within(start, Duration::from_secs(10), "homology suite");
}

/// Number of k-simplices in the subset closure of the maximal sets —
/// recomputed straight from the definition for the cross-check above.
fn betti_oracle_count(maximal: &[Vec<usize>], k: usize) -> usize {
    let mut simplices: BTreeSet<Vec<usize>> = BTreeSet::new();
    for top in maximal {
        let klen = top.len();
        for mask in 1u32..(1 << klen) {
            let sub: Vec<usize> =
                (0..klen).filter(|i| mask >> i & 1 == 1).map(|i| top[i]).collect();
            if sub.len() == k + 1 {
                simplices.insert(sub);
            }
        }
    }
    simplices.len()
}

// ---------------------------------------------------------------------------
// 9. staircase minorant and blended extension guarantees
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_minorant_and_blend_guarantees() {
    let _gate = locked();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC9);

    for _case in 0..50 {
        let n = rng.gen_range(8..=30);
        let space = random_cloud(&mut rng, n, 2, 8.0);

        // staircase minorant: below the data, and 1-Lipschitz up to +3
        let f: Vec<f64> = (0..n)
            .map(|x| rng.gen_range(0.5..1.5) * space.norm(x) + rng.gen_range(0.0..4.0))
            .collect();
        let q = lipschitz_minorant(&space, &f).unwrap();
        for x in 0..n {
            assert!(q.values[x] <= f[x] + TOL, "minorant exceeds the data");
            for y in (x + 1)..n {
                assert!(
                    (q.values[x] - q.values[y]).abs() <= space.dist(x, y) + 3.0 + TOL,
                    "minorant pair bound broken"
                );
            }
        }

        // blended extension: reproduce g on A, never exceed the envelope,
        // and honor the constants it reports
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let w_size = rng.gen_range(2..n);
        let subset_w: Vec<usize> = order[..w_size].to_vec();
        let subset_a: Vec<usize> = subset_w[..rng.gen_range(1..=w_size)].to_vec();

        let g_values: Vec<f64> = subset_w
            .iter()
            .map(|&p| 0.7 * space.norm(p) + rng.gen_range(0.0..3.0))
            .collect();
        let lambda_g = 1.0;
        let mut excess = 0.0f64;
        for (i, &a) in subset_w.iter().enumerate() {
            for (j, &b) in subset_w.iter().enumerate().skip(i + 1) {
                excess =
                    excess.max((g_values[i] - g_values[j]).abs() - lambda_g * space.dist(a, b));
            }
        }
        let s_g = excess.max(0.0) + 0.05;

        let outside: Vec<usize> = (0..n).filter(|p| !subset_w.contains(p)).collect();
        let lambda_w = 1.0;
        let mut growth_need = 0.0f64;
        for &a in &subset_a {
            let reach = outside
                .iter()
                .map(|&p| space.dist(a, p))
                .fold(f64::INFINITY, f64::min);
            let idx = subset_w.iter().position(|&w| w == a).unwrap();
            growth_need = growth_need.max(g_values[idx] - lambda_w * reach);
        }
        let s_w = growth_need.max(0.0) + 0.05;

        let g_max = g_values.iter().fold(0.0f64, |a, &b| a.max(b));
        let mut f_values = vec![0.0f64; n];
        for (&p, &g) in subset_w.iter().zip(&g_values) {
            f_values[p] = g + 0.05 + rng.gen_range(0.0..0.5);
        }
        for &p in &outside {
            f_values[p] = rng.gen_range(0.0..g_max + 3.0);
        }

        let problem = BlendProblem {
            subset_a: subset_a.clone(),
            subset_w: subset_w.clone(),
            g_values: g_values.clone(),
            f_values: f_values.clone(),
            lambda_g,
            s_g,
            lambda_w,
            s_w,
        };
        let blend = blend_extension(&space, &problem).unwrap();

        for &a in &subset_a {
            let idx = subset_w.iter().position(|&w| w == a).unwrap();
            assert_eq!(blend.values[a], g_values[idx], "A-values must be verbatim");
        }
        for x in 0..n {
            assert!(
                blend.values[x] <= f_values[x] + TOL,
                "blend exceeds the envelope at {x}"
            );
            for y in (x + 1)..n {
                let gap = (blend.values[x] - blend.values[y]).abs();
                assert!(
                    gap <= blend.lambda * space.dist(x, y) + blend.s + TOL,
                    "blend misses its reported constants ({}, {})",
                    blend.lambda,
                    blend.s
                );
            }
        }
    }
    assert_within(start, Duration::from_secs(10), "minorant and blend suite");
}

// ---------------------------------------------------------------------------
// 10. binary determinism and the audit exit gate
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_determinism_and_audit_gate() {
    let _gate = locked();
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_coarsegeom");
    let path = |name: &str| dir.path().join(name);
    let arg = |p: &std::path::PathBuf| p.to_str().unwrap().to_string();

    let run = |args: &[&str]| -> std::process::Output {
        Command::new(bin).args(args).output().expect("binary runs")
    };

    // same seed, fresh caches: byte-identical artifacts
    let (a1, a2, a3) = (path("a1.json"), path("a2.json"), path("a3.json"));
    let (cache1, cache2) = (path("cache1"), path("cache2"));
    for (out, cache) in [(&a1, &cache1), (&a2, &cache2), (&a3, &cache1)] {
        let st = run(&[
            "--seed", "7", "--cache-dir", &arg(cache), "space", "gen", "--cloud", "30",
            "--dim", "3", "--spread", "5", "-o", &arg(out),
        ]);
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    }
    let bytes1 = std::fs::read(&a1).unwrap();
    assert_eq!(bytes1, std::fs::read(&a2).unwrap(), "same seed, same bytes");
    assert_eq!(bytes1, std::fs::read(&a3).unwrap());

    // a cached generator must reproduce the cold artifact byte for byte
    let (b1, b2) = (path("b1.json"), path("b2.json"));
    for out in [&b1, &b2] {
        let st = run(&[
            "--cache-dir", &arg(&cache1), "space", "gen", "--cayley", "a,b",
            "--relators", "[a,b]", "--radius", "3", "-o", &arg(out),
        ]);
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    }
    assert_eq!(std::fs::read(&b1).unwrap(), std::fs::read(&b2).unwrap());

    // corrupting a cover must trip the audit gate with exit code 5
    let (boxfile, coverfile, badfile) = (path("box.json"), path("c.json"), path("bad.json"));
    let st = run(&["space", "gen", "--grid", "2", "12", "-o", &arg(&boxfile)]);
    assert!(st.status.success());
    let st = run(&[
        "cover", "brick", "-s", &arg(&boxfile), "-L", "3", "-o", &arg(&coverfile),
    ]);
    assert!(st.status.success());

    let clean = run(&[
        "cover", "stats", "-s", &arg(&boxfile), "-c", &arg(&coverfile), "--audit",
    ]);
    assert_eq!(clean.status.code(), Some(0), "the honest cover must pass");

    // move one point into a sibling set of the same family: coverage stays
    // intact but the family separation collapses
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&coverfile).unwrap()).unwrap();
    let families = v["families"].as_array_mut().unwrap();
    let family = families
        .iter_mut()
        .find(|f| f.as_array().unwrap().len() >= 2)
        .expect("some family holds two sets");
    let sets = family.as_array_mut().unwrap();
    let moved = sets[0].as_array_mut().unwrap().pop().unwrap();
    sets[1].as_array_mut().unwrap().push(moved);
    std::fs::write(&badfile, serde_json::to_string_pretty(&v).unwrap()).unwrap();

    let plain = run(&["cover", "stats", "-s", &arg(&boxfile), "-c", &arg(&badfile)]);
    assert_eq!(
        plain.status.code(),
        Some(0),
        "without --audit the stats still print: {}",
        String::from_utf8_lossy(&plain.stderr)
    );
    let audited = run(&[
        "cover", "stats", "-s", &arg(&boxfile), "-c", &arg(&badfile), "--audit",
    ]);
    assert_eq!(
        audited.status.code(),
        Some(5),
        "corrupted cover must exit 5 under --audit: {}",
        String::from_utf8_lossy(&audited.stderr)
    );
}
