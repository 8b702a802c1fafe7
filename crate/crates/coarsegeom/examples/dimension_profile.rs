//! Dimension profiles: how many separated families a space needs at each
//! scale. A d-dimensional grid gets by with d + 1 families at every scale
//! (so the profile is flat), while the family count of a bounded space
//! collapses to one once the scale passes its diameter.

use coarsegeom::cover::{dimension_profile, exact_dimension_at_scale, ProfileStrategy};
use coarsegeom::error::Result;
use coarsegeom::space::{Budget, FiniteMetricSpace};

fn main() -> Result<()> {
    let bud = Budget::default();
    let plane = FiniteMetricSpace::grid(2, 40, &bud)?;

    let scales = [1.0, 2.0, 4.0, 8.0];
    let (rows, certificates) = dimension_profile(&plane, &scales, ProfileStrategy::Brick)?;
    println!("{}: brick strategy", plane.name());
    println!("{:>6} {:>4} {:>4} {:>8} {:>10}", "L", "m", "d", "ratio", "mesh");
    for row in &rows {
        println!(
            "{:>6} {:>4} {:>4} {:>8} {:>10}",
            row.scale, row.m, row.d, row.ratio, row.mesh_bound
        );
        // The plane never needs more than three families.
        assert_eq!(row.m, 3);
    }
    // Each row is backed by a cover that already passed its audit.
    assert_eq!(certificates.len(), rows.len());

    // The exact (exhaustive) count on a tiny space: six points on a line,
    // scale 1. Sets of diameter <= 1 that are > 1 apart within a family
    // force exactly two families.
    let tiny = FiniteMetricSpace::grid(1, 6, &bud)?;
    let (m, cover) = exact_dimension_at_scale(&tiny, 1.0, None)?;
    println!(
        "\n{} at scale 1: exact minimum {} families (scheme {})",
        tiny.name(),
        m,
        cover.scheme
    );
    assert_eq!(m, 2);

    // Past the diameter, one family of one set covers everything.
    let (rows, _) = dimension_profile(&tiny, &[tiny.diameter() + 1.0], ProfileStrategy::Greedy { max_families: 8 })?;
    println!(
        "{} at scale {}: {} family (everything is one set)",
        tiny.name(),
        rows[0].scale,
        rows[0].m
    );
    assert_eq!(rows[0].m, 1);
    Ok(())
}
