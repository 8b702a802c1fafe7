//! Rational simplicial homology of nerve complexes: Betti numbers by exact
//! Gaussian elimination over arbitrary-precision rationals, chain maps of
//! simplicial vertex maps, and ranks of the maps induced on homology across
//! a tower of nerves.

use crate::error::{budget, invariant, Result};
use crate::nerve::{NerveTower, SimplicialComplex};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Cap on rows*columns of any single exact matrix.
const MAX_MATRIX_CELLS: usize = 4_000_000;

/// Dense matrix over arbitrary-precision rationals.
#[derive(Debug, Clone)]
pub struct QMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigRational>,
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Result<Self> {
        if rows.saturating_mul(cols) > MAX_MATRIX_CELLS {
            return Err(budget(format!("matrix {rows}x{cols} exceeds the exact-arithmetic budget")));
        }
        Ok(QMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] })
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    /// Concatenate columns of two matrices with equal row counts.
    pub fn hcat(&self, other: &QMatrix) -> Result<QMatrix> {
        assert_eq!(self.rows, other.rows);
        let mut out = QMatrix::zero(self.rows, self.cols + other.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        Ok(out)
    }

    /// Matrix product self * other.
    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        assert_eq!(self.cols, other.rows);
        let mut out = QMatrix::zero(self.rows, other.cols)?;
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        let v = out.get(r, c) + a * b;
                        out.set(r, c, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rank by fraction-preserving Gaussian elimination (non-destructive).
    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0usize;
        let mut row = 0usize;
        for col in 0..cols {
            // find a pivot with the smallest numerator magnitude for balance
            let mut pivot: Option<usize> = None;
            for r in row..rows {
                if !m[r * cols + col].is_zero() {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            m.swap(p * cols + col, row * cols + col);
            for c in (col + 1)..cols {
                m.swap(p * cols + c, row * cols + c);
            }
            let inv = m[row * cols + col].recip();
            for r in (row + 1)..rows {
                if m[r * cols + col].is_zero() {
                    continue;
                }
                let factor = &m[r * cols + col] * &inv;
                m[r * cols + col] = BigRational::zero();
                for c in (col + 1)..cols {
                    let sub = &factor * &m[row * cols + c];
                    if !sub.is_zero() {
                        m[r * cols + c] = &m[r * cols + c] - sub;
                    }
                }
            }
            row += 1;
            rank += 1;
            if row == rows {
                break;
            }
        }
        rank
    }

    /// Basis of the right kernel, as columns.
    pub fn kernel_basis(&self) -> Result<QMatrix> {
        let mut m = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut pivot_col_of_row: Vec<usize> = Vec::new();
        let mut is_pivot_col = vec![false; cols];
        let mut row = 0usize;
        for col in 0..cols {
            let mut pivot: Option<usize> = None;
            for r in row..rows {
                if !m[r * cols + col].is_zero() {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            for c in 0..cols {
                m.swap(p * cols + c, row * cols + c);
            }
            let inv = m[row * cols + col].recip();
            for c in 0..cols {
                let v = &m[row * cols + c] * &inv;
                m[row * cols + c] = v;
            }
            for r in 0..rows {
                if r != row && !m[r * cols + col].is_zero() {
                    let factor = m[r * cols + col].clone();
                    for c in 0..cols {
                        let sub = &factor * &m[row * cols + c];
                        m[r * cols + c] = &m[r * cols + c] - sub;
                    }
                }
            }
            pivot_col_of_row.push(col);
            is_pivot_col[col] = true;
            row += 1;
            if row == rows {
                break;
            }
        }
        let free_cols: Vec<usize> = (0..cols).filter(|&c| !is_pivot_col[c]).collect();
        let mut basis = QMatrix::zero(cols, free_cols.len())?;
        for (bi, &fc) in free_cols.iter().enumerate() {
            basis.set(fc, bi, BigRational::one());
            for (ri, &pc) in pivot_col_of_row.iter().enumerate() {
                let v = -m[ri * cols + fc].clone();
                if !v.is_zero() {
                    basis.set(pc, bi, v);
                }
            }
        }
        Ok(basis)
    }
}

fn simplex_index(level: &[Vec<usize>], s: &[usize]) -> Option<usize> {
    level.binary_search_by(|probe| probe.as_slice().cmp(s)).ok()
}

/// Boundary matrix from k-chains to (k-1)-chains; for k = 0 the matrix has
/// zero rows.
pub fn boundary_matrix(complex: &SimplicialComplex, k: usize) -> Result<QMatrix> {
    let chains = complex.simplices(k);
    if k == 0 {
        return QMatrix::zero(0, chains.len());
    }
    let faces = complex.simplices(k - 1);
    let mut m = QMatrix::zero(faces.len(), chains.len())?;
    for (ci, s) in chains.iter().enumerate() {
        for drop in 0..s.len() {
            let mut face: Vec<usize> = s.clone();
            face.remove(drop);
            let fi = simplex_index(faces, &face)
                .ok_or_else(|| invariant("complex is not closed under faces"))?;
            let sign = if drop % 2 == 0 { BigRational::one() } else { -BigRational::one() };
            m.set(fi, ci, sign);
        }
    }
    Ok(m)
}

/// Betti numbers beta_0 .. beta_kmax over the rationals.
pub fn betti(complex: &SimplicialComplex, k_max: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut rank_down = 0usize; // rank of boundary_k (0 for k = 0)
    for k in 0..=k_max {
        let n_k = complex.simplices(k).len();
        let rank_up = boundary_matrix(complex, k + 1)?.rank();
        out.push(n_k - rank_down - rank_up);
        rank_down = rank_up;
    }
    Ok(out)
}

/// Chain map in degree k of a simplicial vertex map: degenerate images die,
/// others pick up the sign of the permutation sorting their vertices.
pub fn chain_map(
    src: &SimplicialComplex,
    dst: &SimplicialComplex,
    vertex_map: &[usize],
    k: usize,
) -> Result<QMatrix> {
    let s_chains = src.simplices(k);
    let d_chains = dst.simplices(k);
    let mut m = QMatrix::zero(d_chains.len(), s_chains.len())?;
    for (ci, s) in s_chains.iter().enumerate() {
        let image: Vec<usize> = s.iter().map(|&v| vertex_map[v]).collect();
        let mut sorted = image.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue; // degenerate simplex maps to zero
        }
        // parity of the sorting permutation = parity of inversions
        let mut inversions = 0usize;
        for a in 0..image.len() {
            for b in (a + 1)..image.len() {
                if image[a] > image[b] {
                    inversions += 1;
                }
            }
        }
        let di = simplex_index(d_chains, &sorted)
            .ok_or_else(|| invariant("vertex map is not simplicial"))?;
        let sign = if inversions % 2 == 0 { BigRational::one() } else { -BigRational::one() };
        m.set(di, ci, sign);
    }
    Ok(m)
}

/// Rank of the map induced on k-th homology by a simplicial vertex map:
/// rank [C.Z | B] - rank B, where Z spans the cycles of the source and B
/// the boundaries of the target.
pub fn induced_homology_rank(
    src: &SimplicialComplex,
    dst: &SimplicialComplex,
    vertex_map: &[usize],
    k: usize,
) -> Result<usize> {
    let cycles = boundary_matrix(src, k)?.kernel_basis()?;
    let c = chain_map(src, dst, vertex_map, k)?;
    let mapped = c.mul(&cycles)?;
    let boundaries = boundary_matrix(dst, k + 1)?;
    let rank_b = boundaries.rank();
    let joint = mapped.hcat(&boundaries)?;
    Ok(joint.rank() - rank_b)
}

/// Rank of the induced homology map for every ordered stage pair of a
/// tower, in the given degree.
#[derive(Debug, Clone)]
pub struct InducedRank {
    pub from_stage: usize,
    pub to_stage: usize,
    pub degree: usize,
    pub rank: usize,
}

pub fn tower_homology_ranks(tower: &NerveTower, k: usize) -> Result<Vec<InducedRank>> {
    let mut out = Vec::new();
    for i in 0..tower.stages.len() {
        for j in (i + 1)..tower.stages.len() {
            let map = tower.vertex_map(i, j);
            let rank = induced_homology_rank(
                &tower.stages[i].complex,
                &tower.stages[j].complex,
                &map,
                k,
            )?;
            out.push(InducedRank { from_stage: i, to_stage: j, degree: k, rank });
        }
    }
    Ok(out)
}

/// Integer rank by fraction-free Bareiss elimination — used as an
/// independent oracle for the rational elimination in tests.
pub fn bareiss_rank(rows: usize, cols: usize, entries: &[i64]) -> usize {
    assert_eq!(entries.len(), rows * cols);
    let mut m: Vec<BigInt> = entries.iter().map(|&e| BigInt::from(e)).collect();
    let mut prev = BigInt::one();
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..cols {
        let mut pivot = None;
        for r in row..rows {
            if !m[r * cols + col].is_zero() {
                pivot = Some(r);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        if p != row {
            for c in 0..cols {
                m.swap(p * cols + c, row * cols + c);
            }
        }
        for r in (row + 1)..rows {
            for c in (col + 1)..cols {
                let num = &m[row * cols + col] * &m[r * cols + c]
                    - &m[r * cols + col] * &m[row * cols + c];
                m[r * cols + c] = num / &prev;
            }
            m[r * cols + col] = BigInt::zero();
        }
        prev = m[row * cols + col].clone();
        row += 1;
        rank += 1;
        if row == rows {
            break;
        }
    }
    let _ = prev.abs();
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{Cover, ProfileStrategy};
    use crate::nerve::{anti_cech_tower, nerve, simplicial_defects};
    use crate::space::{Budget, FiniteMetricSpace};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn complex_from_maximal(n_vertices: usize, maximal: &[Vec<usize>]) -> SimplicialComplex {
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in maximal {
            let m = s.len();
            for mask in 1u32..(1 << m) {
                let mut sub: Vec<usize> = (0..m)
                    .filter(|&b| mask & (1 << b) != 0)
                    .map(|b| s[b])
                    .collect();
                sub.sort_unstable();
                sub.dedup();
                all.insert(sub);
            }
        }
        let maxc = all.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); maxc];
        for s in all {
            by_dim[s.len() - 1].push(s);
        }
        for level in &mut by_dim {
            level.sort();
        }
        SimplicialComplex {
            vertices: (0..n_vertices).map(|v| v.to_string()).collect(),
            by_dim,
            mesh_size: 1.0,
        }
    }

    #[test]
    fn full_simplex_has_trivial_homology() {
        let k = complex_from_maximal(4, &[vec![0, 1, 2, 3]]);
        assert_eq!(betti(&k, 3).unwrap(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn hollow_triangle_is_a_circle() {
        let k = complex_from_maximal(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(betti(&k, 2).unwrap(), vec![1, 1, 0]);
        // the same complex arises as the nerve of three pairwise-meeting
        // sets with no triple point
        let sp = FiniteMetricSpace::from_matrix(
            "k3",
            vec!["a".into(), "b".into(), "c".into()],
            "a",
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            &Budget::default(),
        )
        .unwrap();
        let cover = Cover::new(&sp, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let n = nerve(&sp, &cover, 1.0).unwrap();
        assert_eq!(betti(&n, 1).unwrap(), vec![1, 1]);
    }

    fn union_find_components(k: &SimplicialComplex) -> usize {
        let n = k.simplices(0).len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, a: usize) -> usize {
            if parent[a] != a {
                let r = find(parent, parent[a]);
                parent[a] = r;
            }
            parent[a]
        }
        // vertex v sits at position of [v] in the 0-skeleton ordering
        let pos: Vec<usize> = k.simplices(0).iter().map(|s| s[0]).collect();
        let where_of = |v: usize| pos.iter().position(|&p| p == v).unwrap();
        for e in k.simplices(1) {
            let (a, b) = (where_of(e[0]), where_of(e[1]));
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..n).map(|a| find(&mut parent, a)).collect::<BTreeSet<_>>().len()
    }

    #[test]
    fn random_complexes_match_independent_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..20 {
            let nv = rng.gen_range(3..=8usize);
            let n_max = rng.gen_range(1..=6usize);
            let maximal: Vec<Vec<usize>> = (0..n_max)
                .map(|_| {
                    let card = rng.gen_range(1..=3.min(nv));
                    let mut s: Vec<usize> = (0..nv).collect();
                    for i in 0..card {
                        let j = rng.gen_range(i..nv);
                        s.swap(i, j);
                    }
                    s.truncate(card);
                    s
                })
                .collect();
            let k = complex_from_maximal(nv, &maximal);
            let b = betti(&k, 2).unwrap();

            // oracle 1: Bareiss integer ranks on the same boundary matrices
            for deg in 0..=2usize {
                let bm = boundary_matrix(&k, deg).unwrap();
                let mut ints: Vec<i64> = Vec::with_capacity(bm.rows * bm.cols);
                for r in 0..bm.rows {
                    for c in 0..bm.cols {
                        let v = bm.get(r, c);
                        ints.push(if v.is_zero() {
                            0
                        } else if v.is_positive() {
                            1
                        } else {
                            -1
                        });
                    }
                }
                assert_eq!(bm.rank(), bareiss_rank(bm.rows, bm.cols, &ints), "trial {trial}");
            }

            // oracle 2: connected components for beta_0
            assert_eq!(b[0], union_find_components(&k), "trial {trial}");
        }
    }

    #[test]
    fn kernel_basis_spans_the_kernel() {
        let k = complex_from_maximal(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
        let b1 = boundary_matrix(&k, 1).unwrap();
        let kern = b1.kernel_basis().unwrap();
        assert_eq!(kern.cols, 1); // the fundamental cycle
        let prod = b1.mul(&kern).unwrap();
        for r in 0..prod.rows {
            for c in 0..prod.cols {
                assert!(prod.get(r, c).is_zero());
            }
        }
    }

    fn cycle_space(n: usize) -> FiniteMetricSpace {
        let edges: Vec<(usize, usize, f64)> =
            (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        FiniteMetricSpace::from_graph(
            "cycle",
            (0..n).map(|i| format!("c{i}")).collect(),
            "c0",
            &edges,
            &Budget::default(),
        )
        .unwrap()
    }

    #[test]
    fn cycle_tower_kills_the_loop() {
        let sp = cycle_space(24);
        let tower =
            anti_cech_tower(&sp, &[2.0, 12.0], ProfileStrategy::Greedy { max_families: 8 })
                .unwrap();
        let b0 = betti(&tower.stages[0].complex, 1).unwrap();
        let b1 = betti(&tower.stages[1].complex, 1).unwrap();
        assert_eq!(b0[0], 1);
        assert_eq!(b0[1], 1, "fine nerve of a cycle carries the loop");
        assert_eq!(b1[1], 0, "coarse nerve fills the loop in");
        let ranks = tower_homology_ranks(&tower, 1).unwrap();
        assert_eq!(ranks.len(), 1);
        assert_eq!(ranks[0].rank, 0, "the loop dies along the tower");
        let ranks0 = tower_homology_ranks(&tower, 0).unwrap();
        assert_eq!(ranks0[0].rank, 1, "connectedness persists");
    }

    #[test]
    fn constant_tower_ranks_equal_betti() {
        let k = complex_from_maximal(4, &[vec![0, 1], vec![1, 2], vec![0, 2], vec![3]]);
        let identity: Vec<usize> = (0..4).collect();
        for deg in 0..=1usize {
            let b = betti(&k, deg).unwrap()[deg];
            let r = induced_homology_rank(&k, &k, &identity, deg).unwrap();
            assert_eq!(r, b);
        }
    }

    #[test]
    fn line_tower_has_no_one_dimensional_homology() {
        let sp = FiniteMetricSpace::grid(1, 40, &Budget::default()).unwrap();
        let tower = anti_cech_tower(&sp, &[2.0, 8.0], ProfileStrategy::Brick).unwrap();
        for stage in &tower.stages {
            let b = betti(&stage.complex, 1).unwrap();
            assert_eq!(b, vec![1, 0]);
        }
        for r in tower_homology_ranks(&tower, 1).unwrap() {
            assert_eq!(r.rank, 0);
        }
    }

    #[test]
    fn functoriality_composite_equals_product_of_chain_maps() {
        let sp = cycle_space(24);
        let tower = anti_cech_tower(
            &sp,
            &[2.0, 4.0, 12.0],
            ProfileStrategy::Greedy { max_families: 8 },
        )
        .unwrap();
        for i in 0..2 {
            assert!(simplicial_defects(
                &tower.stages[i].complex,
                &tower.stages[i + 1].complex,
                &tower.maps[i]
            )
            .is_empty());
        }
        for deg in 0..=1usize {
            let composite = tower.vertex_map(0, 2);
            let rank_composite = induced_homology_rank(
                &tower.stages[0].complex,
                &tower.stages[2].complex,
                &composite,
                deg,
            )
            .unwrap();

            // product of the stepwise chain maps applied to the cycle space
            let c01 = chain_map(&tower.stages[0].complex, &tower.stages[1].complex, &tower.maps[0], deg)
                .unwrap();
            let c12 = chain_map(&tower.stages[1].complex, &tower.stages[2].complex, &tower.maps[1], deg)
                .unwrap();
            let cycles = boundary_matrix(&tower.stages[0].complex, deg)
                .unwrap()
                .kernel_basis()
                .unwrap();
            let mapped = c12.mul(&c01.mul(&cycles).unwrap()).unwrap();
            let boundaries = boundary_matrix(&tower.stages[2].complex, deg + 1).unwrap();
            let rank_b = boundaries.rank();
            let rank_product = mapped.hcat(&boundaries).unwrap().rank() - rank_b;
            assert_eq!(rank_composite, rank_product, "degree {deg}");
        }
    }
}
