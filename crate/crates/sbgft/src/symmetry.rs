//! Supports, the mirroring operation, symmetry ratios, eigenvector symmetry
//! reports and residual-symmetry histograms.

use rayon::prelude::*;

use crate::gft::{build_gft_basis, pairing_for_axis, GftBasis};
use crate::grid::{build_sbg, build_sbg_family, enumerate_reflection_axes, Direction, GridGraph, NodeId, ReflectionAxis};
use crate::{Error, Result};

/// Support of a reflection axis on a graph: all nodes belonging to some
/// connected specular pair, with the connecting pairs. On-axis nodes are
/// never part of a pair (a node is not its own mirror partner).
#[derive(Clone, Debug)]
pub struct Support {
    axis: ReflectionAxis,
    nodes: Vec<NodeId>,
    /// Pair entries as positions into `nodes`.
    pair_positions: Vec<(u32, u32)>,
    /// For each position in `nodes`, the position of its partner.
    partner: Vec<u32>,
}

impl Support {
    pub fn axis(&self) -> ReflectionAxis {
        self.axis
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Connecting edges as ordered (near-side, far-side) node pairs, the
    /// near side being the lower node id.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.pair_positions
            .iter()
            .map(|&(a, b)| (self.nodes[a as usize], self.nodes[b as usize]))
    }

    pub fn pair_count(&self) -> usize {
        self.pair_positions.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Restrict a full-length signal to the support node order.
    pub fn restrict(&self, f: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|v| f[v.index()]).collect()
    }
}

/// Enumerate the connected specular pairs of `axis` on `g`.
pub fn support_of(g: &GridGraph, axis: ReflectionAxis) -> Support {
    let n = g.n();
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    for y in 1..=n as u32 {
        for x in 1..=n as u32 {
            if let Some((rx, ry)) = axis.reflect(x, y, n) {
                if (rx, ry) == (x, y) {
                    continue;
                }
                let a = NodeId::from_coords(x, y, n);
                let b = NodeId::from_coords(rx, ry, n);
                if a < b && g.has_edge(a, b) {
                    pairs.push((a, b));
                }
            }
        }
    }
    pairs.sort();
    let mut nodes: Vec<NodeId> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    nodes.sort();
    nodes.dedup();
    let pos = |v: NodeId| nodes.binary_search(&v).unwrap() as u32;
    let pair_positions: Vec<(u32, u32)> = pairs.iter().map(|&(a, b)| (pos(a), pos(b))).collect();
    let mut partner = vec![0u32; nodes.len()];
    for &(a, b) in &pair_positions {
        partner[a as usize] = b;
        partner[b as usize] = a;
    }
    Support {
        axis,
        nodes,
        pair_positions,
        partner,
    }
}

/// Mirroring: swap the signal values within each specular pair. Involutive.
pub fn mirror(fs: &[f64], support: &Support) -> Result<Vec<f64>> {
    if fs.len() != support.len() {
        return Err(Error::LengthMismatch {
            got: fs.len(),
            expected: support.len(),
        });
    }
    Ok((0..fs.len())
        .map(|i| fs[support.partner[i] as usize])
        .collect())
}

/// Symmetry ratio of a support-restricted signal, in [-1, 1]: +1 for a
/// pairwise-symmetric signal, -1 for a pairwise-antisymmetric one.
pub fn symmetry_ratio(fs: &[f64], support: &Support) -> Result<f64> {
    let mirrored = mirror(fs, support)?;
    let den: f64 = fs.iter().map(|v| v * v).sum();
    if den <= 0.0 {
        return Err(Error::ZeroSupportSignal);
    }
    let num: f64 = fs.iter().zip(&mirrored).map(|(a, b)| a * b).sum();
    Ok(num / den)
}

/// Per-SBG eigenvector symmetry ratios on the graph's own support.
#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub axis: ReflectionAxis,
    /// S_s per eigenvector in canonical order; `None` when the eigenvector
    /// has zero norm on the support.
    pub ratios: Vec<Option<f64>>,
    pub min_abs: f64,
    pub mean_abs: f64,
}

/// Symmetry ratios of every canonical eigenvector of one basis, restricted
/// to the support of the generating axis on its own graph.
pub fn symmetry_report_for_basis(g: &GridGraph, basis: &GftBasis) -> SymmetryReport {
    let axis = g.axis().expect("report requires an SBG with generating axis");
    let support = support_of(g, axis);
    let u = basis.to_dense();
    let mut ratios = Vec::with_capacity(basis.signal_len());
    for j in 0..basis.signal_len() {
        let col: Vec<f64> = u.column(j).iter().copied().collect();
        let fs = support.restrict(&col);
        ratios.push(symmetry_ratio(&fs, &support).ok());
    }
    let abs: Vec<f64> = ratios.iter().flatten().map(|s| s.abs()).collect();
    let min_abs = abs.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_abs = abs.iter().sum::<f64>() / abs.len().max(1) as f64;
    SymmetryReport {
        axis,
        ratios,
        min_abs,
        mean_abs,
    }
}

/// Build the full per-SBG eigenvector symmetry report for grid side `n`.
pub fn eigenvector_symmetry_report(n: usize) -> Result<Vec<SymmetryReport>> {
    let family = build_sbg_family(n)?;
    family
        .par_iter()
        .map(|g| {
            let axis = g.axis().unwrap();
            let basis = build_gft_basis(g, &pairing_for_axis(axis, n))?;
            Ok(symmetry_report_for_basis(g, &basis))
        })
        .collect()
}

/// Residual symmetry statistics over a block corpus.
#[derive(Clone, Debug)]
pub struct SymmetryHistogram {
    pub n: usize,
    pub threshold: f64,
    /// Fraction of blocks with S_s above the threshold, per axis.
    pub per_axis: Vec<(ReflectionAxis, f64)>,
    /// Fraction of blocks exceeding the threshold on at least one axis of
    /// each direction family.
    pub per_direction_any: Vec<(Direction, f64)>,
}

/// For each of the 8n-24 axes, the fraction of blocks whose support-restricted
/// signal has `S_s > threshold`, computed on the support of the corresponding
/// SBG; plus the any-axis fraction per direction family. Blocks are length-n²
/// signals in column-wise node order.
pub fn residual_symmetry_histogram(
    blocks: &[Vec<f64>],
    n: usize,
    threshold: f64,
) -> Result<SymmetryHistogram> {
    if blocks.is_empty() {
        return Err(Error::EmptyInput("residual block list"));
    }
    let axes = enumerate_reflection_axes(n)?;
    let supports: Vec<Support> = axes
        .iter()
        .map(|&axis| Ok(support_of(&build_sbg(n, axis)?, axis)))
        .collect::<Result<_>>()?;
    for b in blocks {
        if b.len() != n * n {
            return Err(Error::LengthMismatch {
                got: b.len(),
                expected: n * n,
            });
        }
    }
    let hits: Vec<(Vec<bool>, [bool; 4])> = blocks
        .par_iter()
        .map(|block| {
            let mut per_axis = vec![false; axes.len()];
            let mut any = [false; 4];
            for (i, support) in supports.iter().enumerate() {
                let fs = support.restrict(block);
                if let Ok(s) = symmetry_ratio(&fs, support) {
                    if s > threshold {
                        per_axis[i] = true;
                        let d = Direction::ALL
                            .iter()
                            .position(|&d| d == axes[i].direction)
                            .unwrap();
                        any[d] = true;
                    }
                }
            }
            (per_axis, any)
        })
        .collect();
    let total = blocks.len() as f64;
    let per_axis = axes
        .iter()
        .enumerate()
        .map(|(i, &axis)| {
            let c = hits.iter().filter(|(h, _)| h[i]).count();
            (axis, c as f64 / total)
        })
        .collect();
    let per_direction_any = Direction::ALL
        .iter()
        .enumerate()
        .map(|(d, &dir)| {
            let c = hits.iter().filter(|(_, any)| any[d]).count();
            (dir, c as f64 / total)
        })
        .collect();
    Ok(SymmetryHistogram {
        n,
        threshold,
        per_axis,
        per_direction_any,
    })
}

/// CSV rows `axis,eigenvector,s` for the per-eigenvector symmetry report.
pub fn report_csv(reports: &[SymmetryReport]) -> String {
    let mut out = String::from("axis,eigenvector,s\n");
    for r in reports {
        for (j, s) in r.ratios.iter().enumerate() {
            match s {
                Some(v) => out.push_str(&format!("{},{},{:.9}\n", r.axis, j, v)),
                None => out.push_str(&format!("{},{},nan\n", r.axis, j)),
            }
        }
    }
    out
}

/// CSV rows `axis,frequency` for the residual histogram, with `any:<dir>`
/// rows for the per-direction any-axis frequencies.
pub fn histogram_csv(h: &SymmetryHistogram) -> String {
    let mut out = String::from("axis,frequency\n");
    for (axis, f) in &h.per_axis {
        out.push_str(&format!("{},{:.6}\n", axis, f));
    }
    for (dir, f) in &h.per_direction_any {
        out.push_str(&format!("any:{},{:.6}\n", dir.tag(), f));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gft::build_sbgft;
    use crate::grid::build_2dgg;

    #[test]
    fn support_of_h_axis_x2() {
        let axis = ReflectionAxis::new(Direction::Horizontal, 1); // x = 2
        let g = build_sbg(4, axis).unwrap();
        let s = support_of(&g, axis);
        assert_eq!(s.len(), 8);
        assert_eq!(s.pair_count(), 4);
        for v in s.nodes() {
            let (x, _) = v.coords(4);
            assert!(x == 1 || x == 3);
        }
    }

    #[test]
    fn support_of_h_axis_x2p5_covers_grid() {
        let axis = ReflectionAxis::new(Direction::Horizontal, 2); // x = 2.5
        let g = build_sbg(4, axis).unwrap();
        let s = support_of(&g, axis);
        assert_eq!(s.len(), 16);
        assert_eq!(s.pair_count(), 8);
    }

    #[test]
    fn support_on_plain_grid_near_border() {
        // x = 1.5 is outside the SBG axis family but valid for analysis: the
        // plain grid already connects rows 1 and 2.
        let g = build_2dgg(8).unwrap();
        let axis = ReflectionAxis {
            direction: Direction::Horizontal,
            k: 0, // x = 1.5
        };
        let s = support_of(&g, axis);
        assert_eq!(s.pair_count(), 8);
        for v in s.nodes() {
            let (x, _) = v.coords(8);
            assert!(x == 1 || x == 2);
        }
    }

    #[test]
    fn mirror_is_involutive_and_swaps() {
        let axis = ReflectionAxis::new(Direction::Horizontal, 1);
        let g = build_sbg(4, axis).unwrap();
        let s = support_of(&g, axis);
        let fs: Vec<f64> = (0..s.len()).map(|i| i as f64 - 3.5).collect();
        let m = mirror(&fs, &s).unwrap();
        assert_ne!(fs, m);
        assert_eq!(mirror(&m, &s).unwrap(), fs);
        // pairwise-equal signal unchanged
        let mut eq = vec![0.0; s.len()];
        for (a, b) in s.pair_positions.iter() {
            eq[*a as usize] = 2.0;
            eq[*b as usize] = 2.0;
        }
        assert_eq!(mirror(&eq, &s).unwrap(), eq);
        // norm preserved
        let n0: f64 = fs.iter().map(|v| v * v).sum();
        let n1: f64 = m.iter().map(|v| v * v).sum();
        assert_eq!(n0, n1);
    }

    #[test]
    fn symmetry_ratio_signs() {
        let axis = ReflectionAxis::new(Direction::Horizontal, 1);
        let g = build_sbg(4, axis).unwrap();
        let s = support_of(&g, axis);
        let mut sym = vec![0.0; s.len()];
        let mut anti = vec![0.0; s.len()];
        for (i, &(a, b)) in s.pair_positions.iter().enumerate() {
            sym[a as usize] = i as f64 + 1.0;
            sym[b as usize] = i as f64 + 1.0;
            anti[a as usize] = i as f64 + 1.0;
            anti[b as usize] = -(i as f64 + 1.0);
        }
        assert!((symmetry_ratio(&sym, &s).unwrap() - 1.0).abs() < 1e-15);
        assert!((symmetry_ratio(&anti, &s).unwrap() + 1.0).abs() < 1e-15);
        // lone (1, 0) pair: ratio 0
        let mut lone = vec![0.0; s.len()];
        lone[s.pair_positions[0].0 as usize] = 1.0;
        assert_eq!(symmetry_ratio(&lone, &s).unwrap(), 0.0);
        assert!(matches!(
            symmetry_ratio(&vec![0.0; s.len()], &s),
            Err(Error::ZeroSupportSignal)
        ));
    }

    #[test]
    fn ratio_bounded_by_cauchy_schwarz() {
        let axis = ReflectionAxis::new(Direction::Diagonal, 2);
        let g = build_sbg(8, axis).unwrap();
        let s = support_of(&g, axis);
        let mut state = 42u64;
        for _ in 0..200 {
            let fs: Vec<f64> = (0..s.len())
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
                })
                .collect();
            let r = symmetry_ratio(&fs, &s).unwrap();
            assert!((-1.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn main_axis_reports_are_exactly_one() {
        for (d, k) in [
            (Direction::Horizontal, 6u32),
            (Direction::Vertical, 6),
            (Direction::Diagonal, 5),
            (Direction::AntiDiagonal, 5),
        ] {
            let axis = ReflectionAxis::new(d, k);
            assert!(axis.is_main(8));
            let g = build_sbg(8, axis).unwrap();
            let basis = build_sbgft(8, axis).unwrap();
            let report = symmetry_report_for_basis(&g, &basis);
            assert!(
                (report.min_abs - 1.0).abs() < 1e-9,
                "{axis}: min {}",
                report.min_abs
            );
            // + and - ratio class sizes
            let plus = report
                .ratios
                .iter()
                .flatten()
                .filter(|&&s| s > 0.0)
                .count();
            match d {
                Direction::Horizontal | Direction::Vertical => assert_eq!(plus, 32),
                // the anti-/transpose pairing has N fixed nodes, so classes
                // split (N^2+N)/2 and (N^2-N)/2
                _ => assert_eq!(plus, 36),
            }
        }
    }

    #[test]
    fn low_frequency_eigenvector_is_positively_symmetric() {
        for axis in enumerate_reflection_axes(8).unwrap() {
            let g = build_sbg(8, axis).unwrap();
            let basis = build_sbgft(8, axis).unwrap();
            let report = symmetry_report_for_basis(&g, &basis);
            let s1 = report.ratios[1].expect("u_1 has support energy");
            assert!(s1 > 0.0, "{axis}: S_s(u_1) = {s1}");
        }
    }

    #[test]
    fn histogram_constant_blocks() {
        let blocks = vec![vec![3.0; 64]; 10];
        let h = residual_symmetry_histogram(&blocks, 8, 0.7).unwrap();
        assert_eq!(h.per_axis.len(), 40);
        for (_, f) in &h.per_axis {
            assert_eq!(*f, 1.0);
        }
        for (_, f) in &h.per_direction_any {
            assert_eq!(*f, 1.0);
        }
    }

    #[test]
    fn histogram_noise_blocks_rarely_exceed() {
        let mut state = 7u64;
        let blocks: Vec<Vec<f64>> = (0..500)
            .map(|_| {
                (0..64)
                    .map(|_| {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(99);
                        ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
                    })
                    .collect()
            })
            .collect();
        let h = residual_symmetry_histogram(&blocks, 8, 0.7).unwrap();
        for (axis, f) in &h.per_axis {
            assert!(*f < 0.15, "{axis}: {f}");
        }
        // large supports (main axes) essentially never exceed 0.7 on noise
        for (axis, f) in &h.per_axis {
            if axis.is_main(8) {
                assert!(*f < 0.02, "{axis}: {f}");
            }
        }
    }

    #[test]
    fn histogram_rejects_empty() {
        assert!(residual_symmetry_histogram(&[], 8, 0.7).is_err());
    }

    #[test]
    fn csv_shapes() {
        let reports = eigenvector_symmetry_report(4).unwrap();
        let csv = report_csv(&reports);
        assert_eq!(csv.lines().count(), 1 + 8 * 16);
        let blocks = vec![vec![1.0; 16]; 2];
        let h = residual_symmetry_histogram(&blocks, 4, 0.7).unwrap();
        let csv = histogram_csv(&h);
        assert_eq!(csv.lines().count(), 1 + 8 + 4);
    }
}
