//! Lattice graphs carrying the nearest-neighbor bonds of the spin-glass model.
//!
//! Sites of regular lattices are indexed row-major over their coordinates, with
//! the last axis varying fastest: for extents `[d0, d1, d2]` the site
//! `(x0, x1, x2)` has index `(x0 * d1 + x1) * d2 + x2`.
//!
//! The honeycomb lattice uses the brick-wall embedding: sites sit on a
//! `d0 x d1` grid, every site bonds to its two horizontal (axis 1) neighbors,
//! and a vertical (axis 0) bond joins `(x0, x1)` and `(x0 + 1, x1)` whenever
//! `x0 + x1` is even. Every site then has coordination 3.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Chain1d,
    Honeycomb2d,
    Square2d,
    Cubic3d,
    Complete,
    Custom,
}

impl LatticeKind {
    /// Number of axes the kind expects in `dims`.
    pub fn rank(self) -> usize {
        match self {
            LatticeKind::Chain1d | LatticeKind::Complete | LatticeKind::Custom => 1,
            LatticeKind::Honeycomb2d | LatticeKind::Square2d => 2,
            LatticeKind::Cubic3d => 3,
        }
    }

    /// Coordination number of the periodic lattice, if the kind is regular.
    pub fn coordination(self) -> Option<usize> {
        match self {
            LatticeKind::Chain1d => Some(2),
            LatticeKind::Honeycomb2d => Some(3),
            LatticeKind::Square2d => Some(4),
            LatticeKind::Cubic3d => Some(6),
            LatticeKind::Complete | LatticeKind::Custom => None,
        }
    }

    /// Default extents used by the experiment drivers: the smallest periodic
    /// lattices on which no bonded pair shares a neighbor.
    pub fn default_dims(self) -> Vec<usize> {
        match self {
            LatticeKind::Chain1d => vec![8],
            LatticeKind::Honeycomb2d | LatticeKind::Square2d => vec![4, 4],
            LatticeKind::Cubic3d => vec![4, 4, 4],
            LatticeKind::Complete | LatticeKind::Custom => vec![4],
        }
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chain1d" | "chain" => Ok(LatticeKind::Chain1d),
            "honeycomb2d" | "honeycomb" => Ok(LatticeKind::Honeycomb2d),
            "square2d" | "square" => Ok(LatticeKind::Square2d),
            "cubic3d" | "cubic" => Ok(LatticeKind::Cubic3d),
            "complete" => Ok(LatticeKind::Complete),
            "custom" => Ok(LatticeKind::Custom),
            other => Err(Error::InvalidLattice(format!("unknown lattice kind `{other}`"))),
        }
    }
}

/// Serialized form of a [`LatticeGraph`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct LatticeDoc {
    kind: LatticeKind,
    dims: Vec<usize>,
    #[serde(default)]
    periodic: bool,
    edges: Vec<(usize, usize)>,
}

/// Undirected simple graph over `sites` spins. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeDoc", into = "LatticeDoc")]
pub struct LatticeGraph {
    kind: LatticeKind,
    dims: Vec<usize>,
    periodic: bool,
    sites: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl TryFrom<LatticeDoc> for LatticeGraph {
    type Error = Error;

    fn try_from(doc: LatticeDoc) -> Result<Self> {
        let sites = match doc.kind {
            LatticeKind::Custom | LatticeKind::Complete => {
                if doc.dims.len() != 1 {
                    return Err(Error::InvalidLattice(format!(
                        "{:?} graphs take a single extent (the site count)",
                        doc.kind
                    )));
                }
                doc.dims[0]
            }
            _ => doc.dims.iter().product(),
        };
        let graph = Self::from_parts(doc.kind, doc.dims, doc.periodic, sites, doc.edges)?;
        if doc.kind != LatticeKind::Custom {
            let rebuilt = build_lattice(graph.kind, &graph.dims, graph.periodic)?;
            if rebuilt.edges != graph.edges {
                return Err(Error::InvalidLattice(
                    "edge list does not match the declared lattice kind".into(),
                ));
            }
        }
        Ok(graph)
    }
}

impl From<LatticeGraph> for LatticeDoc {
    fn from(g: LatticeGraph) -> Self {
        LatticeDoc { kind: g.kind, dims: g.dims, periodic: g.periodic, edges: g.edges }
    }
}

impl LatticeGraph {
    fn from_parts(
        kind: LatticeKind,
        dims: Vec<usize>,
        periodic: bool,
        sites: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::InvalidLattice(format!("self-loop at site {a}")));
            }
            if a >= sites || b >= sites {
                return Err(Error::InvalidLattice(format!(
                    "edge ({a}, {b}) out of range for {sites} sites"
                )));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidLattice(format!("duplicate edge ({a}, {b})")));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); sites];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { kind, dims, periodic, sites, edges, adjacency })
    }

    /// Graph over `sites` vertices with an explicit edge list.
    pub fn custom(sites: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::from_parts(LatticeKind::Custom, vec![sites], false, sites, edges)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Edges as `(low, high)` site pairs, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.adjacency[site]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.adjacency[site].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.sites && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Sites outside `{i, j}` adjacent to `i` or `j`, sorted and deduplicated.
    ///
    /// These are the only spins whose couplings enter the reduced dynamics of
    /// the bonded pair.
    pub fn exterior_neighbors(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        if i == j || !self.has_edge(i, j) {
            return Err(Error::NotAnEdge(i, j));
        }
        let set: BTreeSet<usize> = self.adjacency[i]
            .iter()
            .chain(&self.adjacency[j])
            .copied()
            .filter(|&k| k != i && k != j)
            .collect();
        Ok(set.into_iter().collect())
    }
}

/// Builds a lattice of the given kind. See the module docs for site indexing.
pub fn build_lattice(kind: LatticeKind, dims: &[usize], periodic: bool) -> Result<LatticeGraph> {
    if kind == LatticeKind::Custom {
        return Err(Error::InvalidLattice(
            "custom graphs are built from an explicit edge list".into(),
        ));
    }
    if dims.len() != kind.rank() {
        return Err(Error::InvalidLattice(format!(
            "{kind:?} expects {} extent(s), got {}",
            kind.rank(),
            dims.len()
        )));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidLattice(format!("extent {d} is below 2")));
    }
    let periodic = periodic && kind != LatticeKind::Complete;
    // A periodic extent of 2 would wrap onto the existing bond.
    if periodic {
        if let Some(&d) = dims.iter().find(|&&d| d < 3) {
            return Err(Error::InvalidLattice(format!(
                "periodic extent {d} would duplicate bonds; use at least 3"
            )));
        }
    }
    if kind == LatticeKind::Honeycomb2d && periodic && dims.iter().any(|d| d % 2 == 1) {
        return Err(Error::InvalidLattice(
            "periodic honeycomb needs even extents for a consistent tiling".into(),
        ));
    }

    let sites: usize = dims.iter().product();
    let mut edges = Vec::new();
    match kind {
        LatticeKind::Complete => {
            for a in 0..sites {
                for b in a + 1..sites {
                    edges.push((a, b));
                }
            }
        }
        LatticeKind::Honeycomb2d => {
            let (rows, cols) = (dims[0], dims[1]);
            let idx = |r: usize, c: usize| r * cols + c;
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols || periodic {
                        edges.push((idx(r, c), idx(r, (c + 1) % cols)));
                    }
                    if (r + c) % 2 == 0 && (r + 1 < rows || periodic) {
                        edges.push((idx(r, c), idx((r + 1) % rows, c)));
                    }
                }
            }
        }
        _ => {
            // hypercubic: one bond per site and axis toward the +1 neighbor
            let mut strides = vec![1usize; dims.len()];
            for ax in (0..dims.len() - 1).rev() {
                strides[ax] = strides[ax + 1] * dims[ax + 1];
            }
            for site in 0..sites {
                for (&extent, &stride) in dims.iter().zip(&strides) {
                    let coord = (site / stride) % extent;
                    if coord + 1 < extent {
                        edges.push((site, site + stride));
                    } else if periodic {
                        edges.push((site, site - coord * stride));
                    }
                }
            }
        }
    }
    LatticeGraph::from_parts(kind, dims.to_vec(), periodic, sites, edges)
}
