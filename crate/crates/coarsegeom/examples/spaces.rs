//! Build finite pointed metric spaces three ways — an integer grid, a
//! Cayley ball of Z^2, and an explicit distance matrix — then inspect
//! norms, diameters, and the metric-axiom report of each.

use coarsegeom::error::Result;
use coarsegeom::space::{verify_metric, Budget, FiniteMetricSpace};

fn describe(space: &FiniteMetricSpace) {
    let far = (0..space.n())
        .max_by(|&i, &j| space.norm(i).total_cmp(&space.norm(j)))
        .expect("spaces are nonempty");
    println!(
        "{:<12} {:>5} points  basepoint {:<6} diameter {:<6} farthest {} at norm {}",
        space.name(),
        space.n(),
        space.id(space.basepoint()),
        space.diameter(),
        space.id(far),
        space.norm(far),
    );
}

fn main() -> Result<()> {
    let bud = Budget::default();

    // A 5 x 5 integer grid with the l1 (taxicab) metric, based at the origin.
    let grid = FiniteMetricSpace::grid(2, 5, &bud)?;
    describe(&grid);

    // The radius-4 ball of Z^2 = <a, b | [a,b]> with the word metric. The
    // ball is a diamond: 1 + 2r(r+1) elements at radius r.
    let ball = coarsegeom::cayley::cayley_ball(
        &["a".into(), "b".into()],
        &["[a,b]".into()],
        4,
        &bud,
    )?;
    describe(&ball);
    assert_eq!(ball.n(), 1 + 2 * 4 * 5);

    // An explicit matrix: four points on a circle of circumference 8.
    let ids: Vec<String> = ["n", "e", "s", "w"].iter().map(|s| s.to_string()).collect();
    let matrix = vec![
        vec![0.0, 2.0, 4.0, 2.0],
        vec![2.0, 0.0, 2.0, 4.0],
        vec![4.0, 2.0, 0.0, 2.0],
        vec![2.0, 4.0, 2.0, 0.0],
    ];
    let circle = FiniteMetricSpace::from_matrix("circle4", ids, "n", matrix, &bud)?;
    describe(&circle);

    // Every space passes the exhaustive metric audit.
    for space in [&grid, &ball, &circle] {
        let report = verify_metric(space);
        println!(
            "{:<12} audit: {} triangle checks, {} violations",
            space.name(),
            report.checked_points,
            report.violations.len()
        );
        assert!(report.is_metric());
    }
    Ok(())
}
