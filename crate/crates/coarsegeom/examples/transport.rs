//! Transport distance between finitely supported probability measures.
//! Point masses recover the underlying metric; spreading mass moves the
//! distance by at most the spread, and the metric axioms hold exactly.

use coarsegeom::error::Result;
use coarsegeom::measure::{kr_distance, FiniteMeasure};
use coarsegeom::space::{Budget, FiniteMetricSpace};

fn main() -> Result<()> {
    let bud = Budget::default();
    let grid = FiniteMetricSpace::grid(2, 8, &bud)?;
    let o = grid.index_of("0_0").expect("origin");
    let c = grid.index_of("7_7").expect("far corner");
    let e = grid.index_of("7_0").expect("near corner");

    // Point masses: transport cost equals the distance.
    let d_oc = kr_distance(&grid, &FiniteMeasure::dirac(o), &FiniteMeasure::dirac(c))?;
    println!("delta(0_0) -> delta(7_7): {d_oc}  (metric distance {})", grid.dist(o, c));
    assert_eq!(d_oc, grid.dist(o, c));

    // Splitting the target in half averages the two trips.
    let split = FiniteMeasure::new(vec![(c, 0.5), (e, 0.5)])?;
    let d_split = kr_distance(&grid, &FiniteMeasure::dirac(o), &split)?;
    println!(
        "delta(0_0) -> (delta(7_7)+delta(7_0))/2: {d_split}  (average of trips {})",
        0.5 * (grid.dist(o, c) + grid.dist(o, e))
    );
    assert_eq!(d_split, 0.5 * (grid.dist(o, c) + grid.dist(o, e)));

    // A uniform row measure against its shift-with-pileup: the shared mass
    // on the interior cancels, leaving 1/8 to carry from one end of the row
    // to the other, so the cost is exactly 7/8.
    let row: Vec<usize> = (0..8)
        .map(|i| grid.index_of(&format!("{i}_0")).expect("row point"))
        .collect();
    let mu = FiniteMeasure::uniform(&row)?;
    let shifted: Vec<usize> = row[1..8].iter().copied().chain([row[7]]).collect();
    let nu = FiniteMeasure::uniform(&shifted)?;
    let d_shift = kr_distance(&grid, &mu, &nu)?;
    println!("uniform row vs its shift: {d_shift}");
    assert_eq!(d_shift, 7.0 / 8.0);

    // Triangle inequality across three measures.
    let m1 = FiniteMeasure::uniform(&row[0..3])?;
    let m2 = FiniteMeasure::uniform(&row[2..6])?;
    let m3 = split.clone();
    let d12 = kr_distance(&grid, &m1, &m2)?;
    let d23 = kr_distance(&grid, &m2, &m3)?;
    let d13 = kr_distance(&grid, &m1, &m3)?;
    println!("triangle: d13 = {d13} <= d12 + d23 = {}", d12 + d23);
    assert!(d13 <= d12 + d23 + 1e-9);
    Ok(())
}
