//! 2D grid graphs, reflection axes, and symmetry-based graph construction.
//!
//! Nodes of an N×N grid are addressed by 1-based coordinates (x, y) with x
//! the row index (north to south) and y the column index (west to east), and
//! by the column-wise id `id(x, y) = (y-1)*N + x`. A symmetry-based graph
//! (SBG) is the 4-connected grid plus unit-weight edges joining every node
//! pair that is specular with respect to one reflection axis, so that node
//! symmetry holds for that axis by construction.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// 1-based node id in `1..=N²`, column-wise: `id(x, y) = (y-1)*N + x`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn from_coords(x: u32, y: u32, n: usize) -> Self {
        debug_assert!(x >= 1 && x <= n as u32 && y >= 1 && y <= n as u32);
        NodeId((y - 1) * n as u32 + x)
    }

    /// Inverse of [`NodeId::from_coords`].
    pub fn coords(self, n: usize) -> (u32, u32) {
        let z = self.0 - 1;
        ((z % n as u32) + 1, (z / n as u32) + 1)
    }

    /// 0-based index into length-N² signal vectors.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

/// Direction of a reflection axis.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
    AntiDiagonal,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Horizontal,
        Direction::Vertical,
        Direction::Diagonal,
        Direction::AntiDiagonal,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Direction::Horizontal => "H",
            Direction::Vertical => "V",
            Direction::Diagonal => "D",
            Direction::AntiDiagonal => "AD",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "H" => Some(Direction::Horizontal),
            "V" => Some(Direction::Vertical),
            "D" => Some(Direction::Diagonal),
            "AD" => Some(Direction::AntiDiagonal),
            _ => None,
        }
    }

    /// Number of axes of this direction for grid side `n`.
    pub fn axis_count(self, n: usize) -> usize {
        match self {
            Direction::Horizontal | Direction::Vertical => 2 * n - 5,
            Direction::Diagonal | Direction::AntiDiagonal => 2 * n - 7,
        }
    }
}

/// A reflection axis, identified by direction and 1-based index `k`.
///
/// Offsets: horizontal `x = (k+3)/2` and vertical `y = (k+3)/2` with
/// `k = 1..=2N-5`; diagonal `y = x - (N-3) + k` and anti-diagonal
/// `y = -x + 4 + k` with `k = 1..=2N-7`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ReflectionAxis {
    pub direction: Direction,
    pub k: u32,
}

impl ReflectionAxis {
    pub fn new(direction: Direction, k: u32) -> Self {
        ReflectionAxis { direction, k }
    }

    fn validate(self, n: usize) -> Result<()> {
        validate_size(n)?;
        let kmax = self.direction.axis_count(n) as u32;
        if self.k >= 1 && self.k <= kmax {
            Ok(())
        } else {
            Err(Error::AxisMismatch {
                axis: self.to_string(),
                n,
            })
        }
    }

    /// Axis offset: the constant in `x = q` / `y = q` for H/V (may be a
    /// half-integer), the intercept in `y = x + q` for D, or the intercept in
    /// `y = -x + q` for AD.
    pub fn offset(self, n: usize) -> f64 {
        match self.direction {
            Direction::Horizontal | Direction::Vertical => (self.k as f64 + 3.0) / 2.0,
            Direction::Diagonal => self.k as f64 - (n as f64 - 3.0),
            Direction::AntiDiagonal => self.k as f64 + 4.0,
        }
    }

    /// Whether this is one of the four main grid axes (through the center).
    pub fn is_main(self, n: usize) -> bool {
        match self.direction {
            Direction::Horizontal | Direction::Vertical => self.k as usize == n - 2,
            Direction::Diagonal | Direction::AntiDiagonal => self.k as usize == n - 3,
        }
    }

    /// Reflect grid coordinates across the axis. Uses the doubled offset so
    /// the arithmetic stays in integers even for half-integer H/V axes.
    /// Returns `None` when the specular point falls outside the grid.
    pub fn reflect(self, x: u32, y: u32, n: usize) -> Option<(u32, u32)> {
        let (x, y) = (x as i64, y as i64);
        let (rx, ry) = match self.direction {
            // x = (k+3)/2: x' = (k+3) - x
            Direction::Horizontal => ((self.k as i64 + 3) - x, y),
            Direction::Vertical => (x, (self.k as i64 + 3) - y),
            // y = x + q: (x, y) -> (y - q, x + q)
            Direction::Diagonal => {
                let q = self.k as i64 - (n as i64 - 3);
                (y - q, x + q)
            }
            // y = -x + c: (x, y) -> (c - y, c - x)
            Direction::AntiDiagonal => {
                let c = self.k as i64 + 4;
                (c - y, c - x)
            }
        };
        if rx >= 1 && rx <= n as i64 && ry >= 1 && ry <= n as i64 {
            Some((rx as u32, ry as u32))
        } else {
            None
        }
    }
}

impl fmt::Display for ReflectionAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.direction.tag(), self.k)
    }
}

/// Undirected graph on an N×N grid with unit edge weights.
///
/// Edges are kept as a set of normalized (low, high) node-id pairs, so
/// insertion is idempotent and iteration order is deterministic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridGraph {
    n: usize,
    edges: BTreeSet<(NodeId, NodeId)>,
    axis: Option<ReflectionAxis>,
}

impl GridGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes, N².
    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The reflection axis that generated this graph, if any.
    pub fn axis(&self) -> Option<ReflectionAxis> {
        self.axis
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn insert_edge(&mut self, a: NodeId, b: NodeId) {
        debug_assert_ne!(a, b, "self-loops are not allowed");
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    /// Textual edge-list export: a header line followed by one `u v 1` line
    /// per edge.
    pub fn export_edge_list(&self) -> String {
        let mut out = match self.axis {
            Some(axis) => format!("SBG n={} axis={}\n", self.n, axis),
            None => format!("2DGG n={}\n", self.n),
        };
        for (a, b) in &self.edges {
            out.push_str(&format!("{} {} 1\n", a.0, b.0));
        }
        out
    }
}

fn validate_size(n: usize) -> Result<()> {
    if n % 2 == 0 && (4..=64).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedSize(n))
    }
}

/// Build the plain 4-connected 2D grid graph with `2N(N-1)` unit edges.
pub fn build_2dgg(n: usize) -> Result<GridGraph> {
    validate_size(n)?;
    let mut g = GridGraph {
        n,
        edges: BTreeSet::new(),
        axis: None,
    };
    for y in 1..=n as u32 {
        for x in 1..=n as u32 {
            if x < n as u32 {
                g.insert_edge(NodeId::from_coords(x, y, n), NodeId::from_coords(x + 1, y, n));
            }
            if y < n as u32 {
                g.insert_edge(NodeId::from_coords(x, y, n), NodeId::from_coords(x, y + 1, n));
            }
        }
    }
    Ok(g)
}

/// Enumerate all `8N-24` reflection axes for grid side `n`, in deterministic
/// order: horizontal by ascending k, then vertical, diagonal, anti-diagonal.
pub fn enumerate_reflection_axes(n: usize) -> Result<Vec<ReflectionAxis>> {
    validate_size(n)?;
    let mut axes = Vec::with_capacity(8 * n - 24);
    for direction in Direction::ALL {
        for k in 1..=direction.axis_count(n) as u32 {
            axes.push(ReflectionAxis::new(direction, k));
        }
    }
    Ok(axes)
}

/// Build the symmetry-based graph for one reflection axis: the 2DGG plus a
/// unit edge for every in-grid node pair specular with respect to the axis.
/// Insertion is idempotent, so pairs already joined by a grid edge leave the
/// edge set unchanged.
pub fn build_sbg(n: usize, axis: ReflectionAxis) -> Result<GridGraph> {
    axis.validate(n)?;
    let mut g = build_2dgg(n)?;
    g.axis = Some(axis);
    for y in 1..=n as u32 {
        for x in 1..=n as u32 {
            if let Some((rx, ry)) = axis.reflect(x, y, n) {
                if (rx, ry) != (x, y) {
                    g.insert_edge(NodeId::from_coords(x, y, n), NodeId::from_coords(rx, ry, n));
                }
            }
        }
    }
    Ok(g)
}

/// Build the full SBG family: one graph per reflection axis, in
/// [`enumerate_reflection_axes`] order. The plain 2DGG is not a member.
pub fn build_sbg_family(n: usize) -> Result<Vec<GridGraph>> {
    enumerate_reflection_axes(n)?
        .into_iter()
        .map(|axis| build_sbg(n, axis))
        .collect()
}

/// Combinatorial Laplacian L = D - W as a dense symmetric N²×N² matrix.
pub fn laplacian(g: &GridGraph) -> DMatrix<f64> {
    let m = g.node_count();
    let mut l = DMatrix::zeros(m, m);
    for (a, b) in g.edges() {
        let (i, j) = (a.index(), b.index());
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
    }
    l
}

/// Laplacian quadratic form of a signal: `sum over edges of (f_i - f_j)^2`.
pub fn laplacian_quadratic_form(g: &GridGraph, f: &[f64]) -> Result<f64> {
    if f.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            got: f.len(),
            expected: g.node_count(),
        });
    }
    Ok(g.edges()
        .map(|(a, b)| {
            let d = f[a.index()] - f[b.index()];
            d * d
        })
        .sum())
}
