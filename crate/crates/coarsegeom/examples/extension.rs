//! Lipschitz-type extension: take values given on a subset with the bound
//! |f(x) - f(y)| <= lambda d(x,y) + s and extend them to the whole space
//! with the same constants — scalars onto the half-line, tuples into the
//! positive orthant — plus the staircase minorant used to cap growth.

use coarsegeom::error::Result;
use coarsegeom::extension::{
    audit_scalar, audit_vector, extend_halfline, extend_orthant, lipschitz_minorant,
    EnumerationOrder, ExtensionProblem, GrowthMode, PartialValues, ValueRule,
};
use coarsegeom::space::{Budget, FiniteMetricSpace};

fn main() -> Result<()> {
    let bud = Budget::default();
    let grid = FiniteMetricSpace::grid(2, 12, &bud)?;

    // Scalar data on three pinned points.
    let pins = ["0_0", "11_0", "5_9"];
    let subset: Vec<usize> = pins
        .iter()
        .map(|p| grid.index_of(p).expect("pin exists"))
        .collect();
    let problem = ExtensionProblem {
        subset: subset.clone(),
        values: PartialValues::Scalar(vec![0.0, 9.0, 11.0]),
        lambda: 1.0,
        s: 1.0,
        mode: GrowthMode::Plain,
    };
    let sol = extend_halfline(
        &grid,
        &problem,
        &EnumerationOrder::AscendingNorm,
        ValueRule::Midpoint,
        1.0,
    )?;
    let audit = audit_scalar(&grid, &sol.values, sol.lambda, sol.s);
    println!(
        "half-line extension: lambda {} s {} | exact on pins: {:?} | audit margin {}",
        sol.lambda,
        sol.s,
        subset.iter().map(|&a| sol.values[a]).collect::<Vec<_>>(),
        -audit.max_excess
    );
    assert!(audit.satisfied());
    for (k, &a) in subset.iter().enumerate() {
        assert_eq!(sol.values[a], [0.0, 9.0, 11.0][k]);
    }

    // The same machinery under a growth clamp: extended values must also
    // stay above c * norm - b, tracking escape to infinity.
    let clamped = ExtensionProblem {
        mode: GrowthMode::NormGrowth { c: 0.5, b: 2.0 },
        ..problem
    };
    let csol = extend_halfline(
        &grid,
        &clamped,
        &EnumerationOrder::AscendingNorm,
        ValueRule::Midpoint,
        1.0,
    )?;
    let floor_ok = (0..grid.n()).all(|x| csol.values[x] >= 0.5 * grid.norm(x) - 2.0 - 1e-9);
    println!("growth-clamped variant keeps values above 0.5*norm - 2: {floor_ok}");
    assert!(floor_ok);

    // Tuple data into the positive orthant: per-axis extensions through a
    // chart that keeps coordinates nonnegative, with certified constants.
    let vproblem = ExtensionProblem {
        subset: subset.clone(),
        values: PartialValues::Vector(vec![
            vec![0.0, 0.0],
            vec![9.0, 1.0],
            vec![4.0, 8.0],
        ]),
        lambda: 1.0,
        s: 1.0,
        mode: GrowthMode::Plain,
    };
    let vsol = extend_orthant(
        &grid,
        &vproblem,
        None,
        &EnumerationOrder::AscendingNorm,
        ValueRule::Midpoint,
        1.0,
    )?;
    let vaudit = audit_vector(&grid, &vsol.values, vsol.lambda, vsol.s);
    let all_nonneg = vsol
        .values
        .iter()
        .all(|row| row.iter().all(|&v| v >= -1e-12));
    println!(
        "orthant extension: lambda {:.4} s {:.4} epsilon {} | nonnegative: {all_nonneg}",
        vsol.lambda, vsol.s, vsol.epsilon
    );
    assert!(vaudit.satisfied());
    assert!(all_nonneg);

    // Staircase minorant of a bumpy nonnegative function: q <= f everywhere
    // and q moves by at most d(x,y) + 3 across any pair.
    let f: Vec<f64> = (0..grid.n())
        .map(|x| grid.norm(x) * 0.8 + if x % 3 == 0 { 2.0 } else { 0.0 })
        .collect();
    let q = lipschitz_minorant(&grid, &f)?;
    let below = (0..grid.n()).all(|x| q.values[x] <= f[x] + 1e-12);
    let qaudit = audit_scalar(&grid, &q.values, 1.0, 3.0);
    println!(
        "minorant: below f everywhere: {below} | (1,3)-audit satisfied: {} | shells at {:?}",
        qaudit.satisfied(),
        q.radii
    );
    assert!(below && qaudit.satisfied());
    Ok(())
}
