//! Graph Fourier transform bases with symmetry-canonical eigendecomposition
//! and butterfly-accelerated forward/inverse paths.
//!
//! Every symmetry-based graph is invariant under the grid reflection
//! perpendicular to its generating axis. Folding the Laplacian along that
//! involution splits the eigenproblem into a symmetric-part and an
//! antisymmetric-part reduced problem; the four main-axis graphs carry a
//! second commuting reflection and fold into four blocks. Eigenvectors are
//! built from the reduced problems and hence carry exact parity, and the
//! reduced blocks double as the fast (butterfly) transform plan whose
//! multiplication count is the sum of squared block sides.

use nalgebra::DMatrix;

use crate::grid::{Direction, GridGraph, NodeId, ReflectionAxis};
use crate::{Error, Result};

/// Eigenvalue gap below which two eigenvalues are treated as tied when
/// fixing the canonical order.
const TIE_EPS: f64 = 1e-9;
/// Magnitude threshold for the sign-fixing scan over eigenvector entries.
const SIGN_EPS: f64 = 1e-12;

/// Node involution realizing one of the four grid reflections.
#[derive(Clone, Debug)]
pub struct SymmetryPairing {
    n: usize,
    map: Vec<u32>,
    fixed: Vec<u32>,
    direction: Direction,
}

impl SymmetryPairing {
    /// The grid reflection associated with SBGs generated by axes of the
    /// given direction: H axes pair left-right, V axes up-down, D axes pair
    /// across the anti-diagonal and AD axes across the main diagonal.
    pub fn for_direction(direction: Direction, n: usize) -> Self {
        let mut map = vec![0u32; n * n];
        let mut fixed = Vec::new();
        for y in 1..=n as u32 {
            for x in 1..=n as u32 {
                let (mx, my) = match direction {
                    Direction::Horizontal => (x, n as u32 + 1 - y),
                    Direction::Vertical => (n as u32 + 1 - x, y),
                    Direction::Diagonal => (n as u32 + 1 - y, n as u32 + 1 - x),
                    Direction::AntiDiagonal => (y, x),
                };
                let i = NodeId::from_coords(x, y, n).index();
                let j = NodeId::from_coords(mx, my, n).index();
                map[i] = j as u32;
                if i == j {
                    fixed.push(i as u32);
                }
            }
        }
        SymmetryPairing {
            n,
            map,
            fixed,
            direction,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Image of a 0-based node index under the involution.
    pub fn image(&self, i: usize) -> usize {
        self.map[i] as usize
    }

    pub fn fixed_nodes(&self) -> &[u32] {
        &self.fixed
    }

    /// Whether the involution maps the graph's edge set onto itself.
    pub fn is_automorphism(&self, g: &GridGraph) -> bool {
        if g.node_count() != self.map.len() {
            return false;
        }
        g.edges().all(|(a, b)| {
            let ia = NodeId(self.map[a.index()] + 1);
            let ib = NodeId(self.map[b.index()] + 1);
            g.has_edge(ia, ib)
        })
    }

    /// Apply the involution to a signal.
    pub fn permute(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for (i, &j) in self.map.iter().enumerate() {
            out[j as usize] = f[i];
        }
        out
    }
}

/// Pairing used for the SBG generated by `axis`.
pub fn pairing_for_axis(axis: ReflectionAxis, n: usize) -> SymmetryPairing {
    SymmetryPairing::for_direction(axis.direction, n)
}

/// Dense symmetric eigendecomposition: ascending eigenvalues with orthonormal
/// eigenvector columns. Rejects non-symmetric input; reports non-convergence
/// instead of returning silently wrong output.
pub fn eig_symmetric(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !m.is_square() {
        return Err(Error::NotSymmetric(f64::INFINITY));
    }
    let mut asym = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > 1e-10 {
        return Err(Error::NotSymmetric(asym));
    }
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenFailed)?;
    let dim = m.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Sparse symmetry-adapted basis vector: entries as (node index, coefficient).
type SparseVec = Vec<(u32, f64)>;

/// One reduced block of a fast plan: the fold basis spanning an invariant
/// subspace plus the reduced eigenvector matrix on that subspace.
#[derive(Clone, Debug)]
pub struct PlanBlock {
    basis: Vec<SparseVec>,
    vecs: DMatrix<f64>,
    /// Parity of the block under the primary pairing.
    parity: i8,
}

impl PlanBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn fold(&self, f: &[f64]) -> Vec<f64> {
        self.basis
            .iter()
            .map(|v| v.iter().map(|&(i, w)| w * f[i as usize]).sum())
            .collect()
    }

    fn unfold_into(&self, s: &[f64], out: &mut [f64]) {
        for (j, v) in self.basis.iter().enumerate() {
            for &(i, w) in v {
                out[i as usize] += w * s[j];
            }
        }
    }
}

/// Butterfly-accelerated transform plan: fold the signal into symmetry
/// classes, apply one dense block per class, and merge coefficients into the
/// canonical global order. The multiplication count is the sum of squared
/// block sides; the fold itself costs only additions and fixed scalings.
#[derive(Clone, Debug)]
pub struct FastPlan {
    n2: usize,
    blocks: Vec<PlanBlock>,
    /// Canonical global index -> (block, column within block).
    perm: Vec<(u8, u32)>,
}

impl FastPlan {
    pub fn block_sides(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim()).collect()
    }

    /// Number of multiplications for one forward (or inverse) application.
    pub fn multiplication_count(&self) -> usize {
        self.blocks.iter().map(|b| b.dim() * b.dim()).sum()
    }

    pub fn signal_len(&self) -> usize {
        self.n2
    }

    /// Fast forward transform: coefficients in canonical order.
    pub fn forward(&self, f: &[f64]) -> Vec<f64> {
        let per_block: Vec<Vec<f64>> = self
            .blocks
            .iter()
            .map(|b| {
                let folded = nalgebra::DVector::from_vec(b.fold(f));
                (b.vecs.transpose() * folded).data.into()
            })
            .collect();
        self.perm
            .iter()
            .map(|&(c, j)| per_block[c as usize][j as usize])
            .collect()
    }

    /// Fast inverse transform.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut per_block: Vec<Vec<f64>> =
            self.blocks.iter().map(|b| vec![0.0; b.dim()]).collect();
        for (g, &(c, j)) in self.perm.iter().enumerate() {
            per_block[c as usize][j as usize] = coeffs[g];
        }
        let mut out = vec![0.0; self.n2];
        for (b, cb) in self.blocks.iter().zip(&per_block) {
            let s = &b.vecs * nalgebra::DVector::from_vec(cb.clone());
            b.unfold_into(s.as_slice(), &mut out);
        }
        out
    }

    /// Batched forward transform: `signals` holds one length-N² signal per
    /// column; the result holds canonical coefficients per column.
    pub fn forward_batch(&self, signals: &DMatrix<f64>) -> DMatrix<f64> {
        let m = signals.ncols();
        let mut out = DMatrix::zeros(self.n2, m);
        for (c, b) in self.blocks.iter().enumerate() {
            let mut folded = DMatrix::zeros(b.dim(), m);
            for col in 0..m {
                let f = signals.column(col);
                for (j, v) in b.basis.iter().enumerate() {
                    folded[(j, col)] = v.iter().map(|&(i, w)| w * f[i as usize]).sum();
                }
            }
            let coeffs = b.vecs.transpose() * folded;
            for (g, &(bc, j)) in self.perm.iter().enumerate() {
                if bc as usize == c {
                    for col in 0..m {
                        out[(g, col)] = coeffs[(j as usize, col)];
                    }
                }
            }
        }
        out
    }
}

/// Orthonormal GFT basis with eigenvalues in canonical ascending order,
/// exact parity flags under the pairing, and the fast plan built in.
#[derive(Clone, Debug)]
pub struct GftBasis {
    n: usize,
    eigenvalues: Vec<f64>,
    parities: Vec<i8>,
    pairing: SymmetryPairing,
    plan: FastPlan,
    label: String,
}

impl GftBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signal_len(&self) -> usize {
        self.n * self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Parity of each eigenvector under [`GftBasis::pairing`]: +1 symmetric,
    /// -1 antisymmetric. Exact by construction.
    pub fn parities(&self) -> &[i8] {
        &self.parities
    }

    pub fn pairing(&self) -> &SymmetryPairing {
        &self.pairing
    }

    pub fn plan(&self) -> &FastPlan {
        &self.plan
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Materialize the dense eigenvector matrix U (columns in canonical
    /// order). Built fresh on every call; intended for tests, serialization
    /// and small sizes.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n2 = self.plan.n2;
        let mut u = DMatrix::zeros(n2, n2);
        let mut unit = vec![0.0; n2];
        for g in 0..n2 {
            unit[..].fill(0.0);
            let (c, j) = self.plan.perm[g];
            let b = &self.plan.blocks[c as usize];
            let col = b.vecs.column(j as usize);
            let mut out = vec![0.0; n2];
            b.unfold_into(col.as_slice(), &mut out);
            unit.copy_from_slice(&out);
            for (i, v) in unit.iter().enumerate() {
                u[(i, g)] = *v;
            }
        }
        u
    }

    /// Forward GFT, `c = U' f`.
    pub fn forward(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.signal_len() {
            return Err(Error::LengthMismatch {
                got: f.len(),
                expected: self.signal_len(),
            });
        }
        Ok(self.plan.forward(f))
    }

    /// Inverse GFT, `f = U c`.
    pub fn inverse(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.signal_len() {
            return Err(Error::LengthMismatch {
                got: c.len(),
                expected: self.signal_len(),
            });
        }
        Ok(self.plan.inverse(c))
    }
}

/// Forward GFT (spec-level free function).
pub fn gft_forward(basis: &GftBasis, f: &[f64]) -> Result<Vec<f64>> {
    basis.forward(f)
}

/// Inverse GFT.
pub fn gft_inverse(basis: &GftBasis, c: &[f64]) -> Result<Vec<f64>> {
    basis.inverse(c)
}

/// The fast plan of a basis (precomputed at construction).
pub fn make_fast_plan(basis: &GftBasis) -> FastPlan {
    basis.plan.clone()
}

pub fn fast_forward(plan: &FastPlan, f: &[f64]) -> Vec<f64> {
    plan.forward(f)
}

pub fn fast_inverse(plan: &FastPlan, c: &[f64]) -> Vec<f64> {
    plan.inverse(c)
}

pub fn multiplication_count(plan: &FastPlan) -> usize {
    plan.multiplication_count()
}

/// Symmetry-adapted basis vectors for the group generated by one or two
/// commuting involutions, grouped by character class. Each class spans an
/// invariant subspace of every matrix commuting with the involutions.
fn symmetry_classes(
    n2: usize,
    primary: &SymmetryPairing,
    secondary: Option<&SymmetryPairing>,
) -> Vec<(i8, Vec<SparseVec>)> {
    let sigma = |i: usize| primary.image(i);
    match secondary {
        None => {
            let mut sym = Vec::new();
            let mut anti = Vec::new();
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..n2 {
                let j = sigma(i);
                if i == j {
                    sym.push(vec![(i as u32, 1.0)]);
                } else if i < j {
                    sym.push(vec![(i as u32, inv_sqrt2), (j as u32, inv_sqrt2)]);
                    anti.push(vec![(i as u32, inv_sqrt2), (j as u32, -inv_sqrt2)]);
                }
            }
            vec![(1, sym), (-1, anti)]
        }
        Some(second) => {
            let tau = |i: usize| second.image(i);
            // orbits of the Klein four-group {1, sigma, tau, sigma*tau}
            let mut seen = vec![false; n2];
            let mut classes: Vec<(i8, i8, Vec<SparseVec>)> = vec![
                (1, 1, Vec::new()),
                (1, -1, Vec::new()),
                (-1, 1, Vec::new()),
                (-1, -1, Vec::new()),
            ];
            for i in 0..n2 {
                if seen[i] {
                    continue;
                }
                let orbit = [i, sigma(i), tau(i), sigma(tau(i))];
                for &o in &orbit {
                    seen[o] = true;
                }
                for (eps, delta, vecs) in classes.iter_mut() {
                    // projection of e_i onto the (eps, delta) class
                    let chi = [1.0, *eps as f64, *delta as f64, (*eps * *delta) as f64];
                    let mut accum: Vec<(u32, f64)> = Vec::with_capacity(4);
                    for (&o, &c) in orbit.iter().zip(chi.iter()) {
                        match accum.iter_mut().find(|(idx, _)| *idx == o as u32) {
                            Some((_, w)) => *w += c,
                            None => accum.push((o as u32, c)),
                        }
                    }
                    accum.retain(|&(_, w)| w != 0.0);
                    if accum.is_empty() {
                        continue;
                    }
                    let norm = accum.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
                    for (_, w) in accum.iter_mut() {
                        *w /= norm;
                    }
                    accum.sort_by_key(|&(idx, _)| idx);
                    vecs.push(accum);
                }
            }
            classes
                .into_iter()
                .map(|(eps, _, vecs)| (eps, vecs))
                .collect()
        }
    }
}

/// Reduced matrix `B' L B` for a sparse symmetry-adapted basis, using the
/// graph's sparse adjacency.
fn reduced_matrix(g: &GridGraph, basis: &[SparseVec]) -> DMatrix<f64> {
    let n2 = g.node_count();
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n2];
    for (a, b) in g.edges() {
        neighbors[a.index()].push(b.index() as u32);
        neighbors[b.index()].push(a.index() as u32);
    }
    let d = basis.len();
    // columns of L*B, kept dense per column
    let mut lb: DMatrix<f64> = DMatrix::zeros(n2, d);
    for (j, v) in basis.iter().enumerate() {
        for &(i, w) in v {
            let i = i as usize;
            lb[(i, j)] += neighbors[i].len() as f64 * w;
            for &nb in &neighbors[i] {
                lb[(nb as usize, j)] -= w;
            }
        }
    }
    let mut m = DMatrix::zeros(d, d);
    for (a, va) in basis.iter().enumerate() {
        for b in 0..d {
            m[(a, b)] = va.iter().map(|&(i, w)| w * lb[(i as usize, b)]).sum();
        }
    }
    // symmetrize away rounding noise
    for a in 0..d {
        for b in (a + 1)..d {
            let avg = 0.5 * (m[(a, b)] + m[(b, a)]);
            m[(a, b)] = avg;
            m[(b, a)] = avg;
        }
    }
    m
}

/// The complementary main-axis pairing used to quarter the plan of the four
/// double-symmetry graphs.
fn secondary_direction(d: Direction) -> Direction {
    match d {
        Direction::Horizontal => Direction::Vertical,
        Direction::Vertical => Direction::Horizontal,
        Direction::Diagonal => Direction::AntiDiagonal,
        Direction::AntiDiagonal => Direction::Diagonal,
    }
}

/// Build the canonical GFT basis of a graph using its symmetry pairing.
///
/// Eigenvectors are constructed from the symmetry-reduced subproblems so
/// parity under the pairing is exact, then globally ordered by ascending
/// eigenvalue with ties (gap <= 1e-9) broken by parity (symmetric first) and
/// then by lexicographic comparison of sign-fixed entries. The sign of each
/// eigenvector is fixed so its first entry of magnitude > 1e-12 is positive.
/// Main-axis graphs carry a second commuting reflection and use the quartered
/// fold.
pub fn build_gft_basis(g: &GridGraph, pairing: &SymmetryPairing) -> Result<GftBasis> {
    if !pairing.is_automorphism(g) {
        return Err(Error::NotAutomorphism);
    }
    let n = g.n();
    let n2 = g.node_count();
    let secondary = match g.axis() {
        Some(axis) if axis.is_main(n) => {
            let second =
                SymmetryPairing::for_direction(secondary_direction(axis.direction), n);
            debug_assert!(second.is_automorphism(g));
            Some(second)
        }
        _ => None,
    };
    let classes = symmetry_classes(n2, pairing, secondary.as_ref());
    debug_assert_eq!(classes.iter().map(|(_, v)| v.len()).sum::<usize>(), n2);

    let mut blocks = Vec::new();
    // (eigenvalue, block, column) for global ordering
    let mut entries: Vec<(f64, u8, u32)> = Vec::with_capacity(n2);
    for (parity, basis) in classes {
        if basis.is_empty() {
            continue;
        }
        let reduced = reduced_matrix(g, &basis);
        let (values, mut vecs) = eig_symmetric(&reduced)?;
        let block_idx = blocks.len() as u8;
        // sign-fix each unfolded eigenvector
        for j in 0..vecs.ncols() {
            let mut unfolded = vec![0.0; n2];
            for (r, v) in basis.iter().enumerate() {
                for &(i, w) in v {
                    unfolded[i as usize] += w * vecs[(r, j)];
                }
            }
            if let Some(first) = unfolded.iter().find(|v| v.abs() > SIGN_EPS) {
                if *first < 0.0 {
                    for r in 0..vecs.nrows() {
                        vecs[(r, j)] = -vecs[(r, j)];
                    }
                }
            }
        }
        for (j, &lam) in values.iter().enumerate() {
            entries.push((lam, block_idx, j as u32));
        }
        blocks.push(PlanBlock {
            basis,
            vecs,
            parity,
        });
    }

    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // break ties: parity (symmetric first), then lexicographic entries
    let unfold = |blocks: &[PlanBlock], c: u8, j: u32| -> Vec<f64> {
        let b = &blocks[c as usize];
        let mut out = vec![0.0; n2];
        b.unfold_into(b.vecs.column(j as usize).as_slice(), &mut out);
        out
    };
    let mut i = 0;
    while i < entries.len() {
        let mut j = i;
        while j + 1 < entries.len() && entries[j + 1].0 - entries[i].0 <= TIE_EPS {
            j += 1;
        }
        if j > i {
            let group = &mut entries[i..=j];
            group.sort_by(|a, b| {
                let pa = blocks[a.1 as usize].parity;
                let pb = blocks[b.1 as usize].parity;
                pb.cmp(&pa).then_with(|| {
                    let ua = unfold(&blocks, a.1, a.2);
                    let ub = unfold(&blocks, b.1, b.2);
                    ua.partial_cmp(&ub).unwrap()
                })
            });
        }
        i = j + 1;
    }

    let eigenvalues: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let parities: Vec<i8> = entries
        .iter()
        .map(|e| blocks[e.1 as usize].parity)
        .collect();
    let perm: Vec<(u8, u32)> = entries.iter().map(|e| (e.1, e.2)).collect();
    let label = match g.axis() {
        Some(axis) => format!("SBG n={} axis={}", n, axis),
        None => format!("2DGG n={}", n),
    };
    Ok(GftBasis {
        n,
        eigenvalues,
        parities,
        pairing: pairing.clone(),
        plan: FastPlan { n2, blocks, perm },
        label,
    })
}

/// Convenience: basis of the SBG for one axis, using its canonical pairing.
pub fn build_sbgft(n: usize, axis: ReflectionAxis) -> Result<GftBasis> {
    let g = crate::grid::build_sbg(n, axis)?;
    let pairing = pairing_for_axis(axis, n);
    build_gft_basis(&g, &pairing)
}
