//! Combine spaces: sum-metric products, asymptotic products, wedges,
//! metric quotients, and discrete cones, with the identities each one
//! guarantees spot-checked along the way.

use coarsegeom::error::Result;
use coarsegeom::functors::{asymptotic_product, cone, product, quotient_metric, wedge};
use coarsegeom::space::{Budget, FiniteMetricSpace};

fn main() -> Result<()> {
    let bud = Budget::default();
    let line = FiniteMetricSpace::grid(1, 6, &bud)?;
    let square = FiniteMetricSpace::grid(2, 3, &bud)?;

    // Product: distances add coordinatewise, so norms add too.
    let prod = product(&line, &square, &bud)?;
    println!("product  {:<22} {} points", prod.name(), prod.n());
    let a = prod.index_of("3|1_2").expect("pair id");
    let x = line.index_of("3").expect("left id");
    let y = square.index_of("1_2").expect("right id");
    assert_eq!(prod.norm(a), line.norm(x) + square.norm(y));

    // Asymptotic product: keeps the pairs whose coordinate norms differ by
    // at most the tolerance. Tolerance 0 on two lines picks the diagonal.
    let diag = asymptotic_product(&line, &line, 0.0, &bud)?;
    let diag_space = diag.space.expect("diagonal is nonempty");
    println!("aproduct {:<22} {} points", diag_space.name(), diag_space.n());
    assert_eq!(diag_space.n(), line.n());

    // Wedge: glue the basepoints; distances across the seam go through it.
    let w = wedge(&line, &square, &bud)?;
    println!("wedge    {:<22} {} points", w.name(), w.n());
    let l5 = w.index_of("L5").expect("left copy");
    let r22 = w.index_of("R2_2").expect("right copy");
    let y22 = square.index_of("2_2").expect("square corner");
    assert_eq!(w.dist(l5, r22), line.norm(5) + square.norm(y22));

    // Quotient: collapse the two endpoints of the line to one class. The
    // quotient metric is the largest metric below the class-to-class gaps.
    let classes = vec![vec![0, 5], vec![1], vec![2], vec![3], vec![4]];
    let q = quotient_metric(&line, &classes, &bud)?;
    println!("quotient {:<22} {} points", q.space.name(), q.space.n());
    // 4 is one step from the glued endpoint 5, so at distance 1 from class 0.
    assert_eq!(q.space.dist(q.class_of[4], q.class_of[0]), 1.0);

    // Cone: stack height levels over each point up to its norm, then fold
    // the top boundary so same-norm points meet. The far corner at its top
    // height lands in the same class as any other norm-4 point at its top.
    let c = cone(&square, 1.0, &bud)?;
    println!(
        "cone     {:<22} {} points ({} merges at the fold)",
        c.space.name(),
        c.space.n(),
        c.apex_merges
    );
    let corner = square.index_of("2_2").expect("corner");
    let side = square.index_of("1_0").expect("side midpoint");
    let top_of = |p: usize| {
        let k = square.norm(p).round() as i64;
        let pos = c
            .levels
            .iter()
            .position(|&(i, m)| i == p && m == k)
            .expect("top level realized");
        c.class_of[pos]
    };
    // norm(2_2) = 4 and norm(1_0) = 1, so their tops are distinct classes,
    // while two norm-1 points share one.
    let e10 = square.index_of("0_1").expect("other side midpoint");
    assert_ne!(top_of(corner), top_of(side));
    assert_eq!(top_of(side), top_of(e10));
    println!(
        "         fold check: top(2_2) != top(1_0), top(1_0) == top(0_1)"
    );
    Ok(())
}
