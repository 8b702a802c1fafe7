//! Covers at a scale: the alternating brick pattern and the greedy
//! fallback, their statistics (multiplicity, mesh, Lebesgue numbers), and
//! the independent audit that certifies family separation.

use coarsegeom::cover::{
    audit_colored_cover, brick_colored_cover, cover_stats, greedy_colored_cover, GreedyOutcome,
};
use coarsegeom::error::Result;
use coarsegeom::space::{Budget, FiniteMetricSpace};

fn main() -> Result<()> {
    let bud = Budget::default();
    let grid = FiniteMetricSpace::grid(2, 24, &bud)?;
    let scale = 3.0;

    // Brick pattern: 2^dim families of aligned boxes, shifted so that
    // same-family bricks stay more than `scale` apart.
    let bricks = brick_colored_cover(&grid, scale)?;
    println!(
        "brick cover at scale {scale}: {} families, mesh bound {}",
        bricks.m(),
        bricks.mesh_bound
    );
    let audit = audit_colored_cover(&grid, &bricks)?;
    println!(
        "  audit: {} uncovered, {} separation violations, realized mesh {}",
        audit.uncovered.len(),
        audit.separation_violations.len(),
        audit.realized_mesh
    );
    assert!(audit.passed());

    let stats = cover_stats(&grid, &bricks.flatten())?;
    println!(
        "  stats: {} sets, multiplicity {}, global mesh {}, Lebesgue number {}",
        stats.n_sets, stats.multiplicity, stats.mesh_global, stats.lebesgue
    );
    // dim + 1 families suffice in the plane, and every point sits in at
    // most that many bricks.
    assert!(stats.multiplicity <= 3);

    // Greedy alternative: no grid structure assumed. It uses at least as
    // many families here, but passes the same audit.
    match greedy_colored_cover(&grid, scale, 64)? {
        GreedyOutcome::Cover(greedy) => {
            let ga = audit_colored_cover(&grid, &greedy)?;
            assert!(ga.passed());
            println!(
                "greedy cover at scale {scale}: {} families (audit passed)",
                greedy.m()
            );
        }
        GreedyOutcome::Infeasible { families_needed, max_families } => {
            println!("greedy needs {families_needed} families (cap {max_families})");
        }
    }

    // Enlarging the bricks raises the Lebesgue number: after growing each
    // set by r = 2, every point has a ball of radius >= 2 inside one set.
    let grown = bricks.flatten().enlarge(&grid, 2.0);
    let grown_stats = cover_stats(&grid, &grown)?;
    println!(
        "after enlarging by 2: Lebesgue number {} (was {}), multiplicity {}",
        grown_stats.lebesgue, stats.lebesgue, grown_stats.multiplicity
    );
    assert!(grown_stats.lebesgue >= 2.0);
    Ok(())
}
