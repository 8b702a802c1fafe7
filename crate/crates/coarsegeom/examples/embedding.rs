//! From covers to coordinates: turn deep covers at several scales into
//! measure maps, realize them in Hilbert space through square roots of
//! weights, and read off the compression profile of the result.

use coarsegeom::embed::{
    compression_profile, hilbert_embedding, lebesgue_brick_cover, measure_map, EmbeddingStage,
};
use coarsegeom::error::Result;
use coarsegeom::space::{Budget, FiniteMetricSpace};

fn main() -> Result<()> {
    let bud = Budget::default();
    let line = FiniteMetricSpace::grid(1, 200, &bud)?;

    // One measure map per scale: points deep inside a cover set barely move
    // their measures, so each stage is flat below its own scale.
    let scales = [4.0, 16.0, 64.0];
    let mut maps = Vec::new();
    for &scale in &scales {
        let cover = lebesgue_brick_cover(&line, scale)?;
        let mm = measure_map(&line, &cover, scale)?;
        println!(
            "scale {scale:>4}: {} sets, multiplicity {}, support radius {}",
            cover.sets.len(),
            mm.multiplicity,
            mm.support_radius
        );
        // Displacement bound: moving distance d changes the measure by at
        // most min(2, 4 * multiplicity * d / scale) in total variation.
        for row in &mm.increments {
            let bound = (4.0 * mm.multiplicity as f64 * row.upper / scale).min(2.0);
            assert!(row.max_increment <= bound + 1e-9);
        }
        maps.push(mm);
    }

    // Hilbert realization: coordinates are square roots of atom weights,
    // stages scaled by 2^-s, centered so the basepoint sits at the origin.
    let stages: Vec<EmbeddingStage> = maps
        .iter()
        .map(|mm| EmbeddingStage { label: mm.scale, measures: &mm.measures })
        .collect();
    let table = hilbert_embedding(&line, &stages, None, true)?;
    println!(
        "embedding: {} coordinates across {} stages",
        table.dimension,
        stages.len()
    );
    let origin = &table.coordinates[line.basepoint()];
    assert!(origin.iter().all(|&c| c == 0.0));

    // Compression profile: rho1 (worst contraction) and rho2 (worst
    // expansion) per distance bucket. rho2 stays bounded — the embedding is
    // Lipschitz up to the additive stage constants — while rho1 grows with
    // the bucket, the quantitative trace of coarse faithfulness.
    let rows = compression_profile(&line, &table, Some(25.0))?;
    println!("{:>8} {:>12} {:>12} {:>8}", "bucket", "rho1", "rho2", "pairs");
    for row in &rows {
        println!(
            "{:>8} {:>12.6} {:>12.6} {:>8}",
            row.upper, row.rho1, row.rho2, row.pairs
        );
    }
    let rho1: Vec<f64> = rows.iter().map(|r| r.rho1).collect();
    assert!(rho1.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    assert!(rho1.last().copied().unwrap_or(0.0) > 0.0);
    Ok(())
}
