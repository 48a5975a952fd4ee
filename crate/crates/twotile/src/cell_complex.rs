//! Oriented cell decompositions of the 2-sphere.
//!
//! Cells carry external `u32` ids; all algorithms work on dense indices
//! (`0..n`) in declaration order. Tiles store their boundary as a cyclic list
//! of directed edges with the tile on the left of each one.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// External identifier of a vertex, edge or tile.
pub type CellId = u32;

/// An edge traversed in one of its two directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedEdge {
    /// Dense edge index.
    pub edge: usize,
    /// `true` for tail to head.
    pub forward: bool,
}

impl DirectedEdge {
    pub fn new(edge: usize, forward: bool) -> Self {
        Self { edge, forward }
    }

    pub fn reversed(self) -> Self {
        Self { edge: self.edge, forward: !self.forward }
    }
}

/// A signed reference to an edge by external id, as written in files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedEdgeId {
    pub id: CellId,
    pub forward: bool,
}

impl fmt::Display for SignedEdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.forward { '+' } else { '-' }, self.id)
    }
}

impl std::str::FromStr for SignedEdgeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (forward, rest) = match s.as_bytes().first() {
            Some(b'+') => (true, &s[1..]),
            Some(b'-') => (false, &s[1..]),
            _ => return Err(format!("expected a signed edge id, got `{s}`")),
        };
        let id = rest.parse::<CellId>().map_err(|_| format!("bad edge id `{s}`"))?;
        Ok(Self { id, forward })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub id: CellId,
    pub tail: CellId,
    pub head: CellId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileRecord {
    pub id: CellId,
    pub boundary: Vec<SignedEdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: CellId },
    #[error("{owner} references undeclared {kind} {id}")]
    DanglingReference { owner: String, kind: &'static str, id: CellId },
    #[error("edge {edge} is traversed in the same direction by tiles {first} and {second}")]
    EdgeUsedTwiceSameDirection { edge: CellId, first: CellId, second: CellId },
    #[error("edge {edge} occurs {count} times in tile boundaries, expected 2")]
    EdgeUsageCountNot2 { edge: CellId, count: usize },
    #[error("boundary of tile {tile} is not a simple closed walk: {reason}")]
    NonSimpleBoundaryWalk { tile: CellId, reason: String },
    #[error("Euler characteristic V - E + F = {chi}, expected 2")]
    EulerMismatch { chi: i64 },
    #[error("the incidence structure is not connected")]
    Disconnected,
    #[error("the tiles around vertex {vertex} do not form a single cycle")]
    NonManifoldVertex { vertex: CellId },
    #[error("unknown vertex {0}")]
    UnknownVertex(CellId),
}

impl ComplexError {
    pub fn code(&self) -> &'static str {
        match self {
            ComplexError::DuplicateId { .. } => "DuplicateId",
            ComplexError::DanglingReference { .. } => "DanglingReference",
            ComplexError::EdgeUsedTwiceSameDirection { .. } => "EdgeUsedTwiceSameDirection",
            ComplexError::EdgeUsageCountNot2 { .. } => "EdgeUsageCountNot2",
            ComplexError::NonSimpleBoundaryWalk { .. } => "NonSimpleBoundaryWalk",
            ComplexError::EulerMismatch { .. } => "EulerMismatch",
            ComplexError::Disconnected => "Disconnected",
            ComplexError::NonManifoldVertex { .. } => "NonManifoldVertex",
            ComplexError::UnknownVertex(_) => "UnknownVertex",
        }
    }
}

/// Which cell of a complex a diagnostic or query refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellRef {
    Vertex(usize),
    Edge(usize),
    Tile(usize),
}

/// The alternating cycle of edges and tiles around a vertex.
///
/// `darts[j]` leaves the vertex; `tiles[j]` lies on its right and
/// `tiles[j + 1]` on its left, so `darts[j]` bounds both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCycle {
    pub vertex: usize,
    pub darts: Vec<DirectedEdge>,
    pub tiles: Vec<usize>,
}

impl VertexCycle {
    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flag {
    pub vertex: usize,
    pub edge: usize,
    pub tile: usize,
    pub positive: bool,
}

/// A validated oriented cell decomposition of the sphere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedComplex {
    vertex_ids: Vec<CellId>,
    edge_ids: Vec<CellId>,
    tile_ids: Vec<CellId>,
    ends: Vec<[usize; 2]>,
    boundaries: Vec<Vec<DirectedEdge>>,
    // left tile of the forward / backward dart, with position in its walk
    sides: Vec<[(usize, usize); 2]>,
    // outgoing darts per vertex, in counterclockwise rotation order
    rotation: Vec<Vec<DirectedEdge>>,
    vertex_index: HashMap<CellId, usize>,
    edge_index: HashMap<CellId, usize>,
    tile_index: HashMap<CellId, usize>,
}

fn index_ids(
    ids: impl Iterator<Item = CellId>,
    kind: &'static str,
    errors: &mut Vec<ComplexError>,
) -> HashMap<CellId, usize> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id, i).is_some() {
            errors.push(ComplexError::DuplicateId { kind, id });
        }
    }
    map
}

impl OrientedComplex {
    /// Validates the records and builds incidence indices.
    ///
    /// Tile boundaries are rotated to start at their smallest `(edge id, forward)` entry.
    pub fn build(
        vertex_ids: &[CellId],
        edges: &[EdgeRecord],
        tiles: &[TileRecord],
    ) -> Result<Self, Vec<ComplexError>> {
        let mut errors = Vec::new();
        let vertex_index = index_ids(vertex_ids.iter().copied(), "vertex", &mut errors);
        let edge_index = index_ids(edges.iter().map(|e| e.id), "edge", &mut errors);
        let tile_index = index_ids(tiles.iter().map(|t| t.id), "tile", &mut errors);
        if !errors.is_empty() {
            return Err(errors);
        }

        let mut ends = Vec::with_capacity(edges.len());
        for e in edges {
            let mut end = [0usize; 2];
            for (slot, v) in [e.tail, e.head].into_iter().enumerate() {
                match vertex_index.get(&v) {
                    Some(&i) => end[slot] = i,
                    None => errors.push(ComplexError::DanglingReference {
                        owner: format!("edge {}", e.id),
                        kind: "vertex",
                        id: v,
                    }),
                }
            }
            ends.push(end);
        }
        let mut boundaries = Vec::with_capacity(tiles.len());
        for t in tiles {
            let mut walk = Vec::with_capacity(t.boundary.len());
            for s in &t.boundary {
                match edge_index.get(&s.id) {
                    Some(&i) => walk.push(DirectedEdge::new(i, s.forward)),
                    None => errors.push(ComplexError::DanglingReference {
                        owner: format!("tile {}", t.id),
                        kind: "edge",
                        id: s.id,
                    }),
                }
            }
            boundaries.push(walk);
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let edge_ids: Vec<CellId> = edges.iter().map(|e| e.id).collect();
        let tile_ids: Vec<CellId> = tiles.iter().map(|t| t.id).collect();
        Self::assemble(
            vertex_ids.to_vec(),
            edge_ids,
            tile_ids,
            ends,
            boundaries,
            vertex_index,
            edge_index,
            tile_index,
        )
    }

    /// Builds a complex whose ids equal its dense indices.
    pub fn from_indices(
        vertex_count: usize,
        ends: Vec<[usize; 2]>,
        boundaries: Vec<Vec<DirectedEdge>>,
    ) -> Result<Self, Vec<ComplexError>> {
        let ids = |n: usize| (0..n as CellId).collect::<Vec<_>>();
        let map = |n: usize| (0..n).map(|i| (i as CellId, i)).collect::<HashMap<_, _>>();
        if let Some((e, _)) = ends.iter().enumerate().find(|(_, [a, b])| *a >= vertex_count || *b >= vertex_count) {
            return Err(vec![ComplexError::DanglingReference {
                owner: format!("edge {e}"),
                kind: "vertex",
                id: ends[e][0].max(ends[e][1]) as CellId,
            }]);
        }
        let (nv, ne, nt) = (vertex_count, ends.len(), boundaries.len());
        Self::assemble(ids(nv), ids(ne), ids(nt), ends, boundaries, map(nv), map(ne), map(nt))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        vertex_ids: Vec<CellId>,
        edge_ids: Vec<CellId>,
        tile_ids: Vec<CellId>,
        ends: Vec<[usize; 2]>,
        mut boundaries: Vec<Vec<DirectedEdge>>,
        vertex_index: HashMap<CellId, usize>,
        edge_index: HashMap<CellId, usize>,
        tile_index: HashMap<CellId, usize>,
    ) -> Result<Self, Vec<ComplexError>> {
        let mut errors = Vec::new();
        let tail = |d: DirectedEdge| if d.forward { ends[d.edge][0] } else { ends[d.edge][1] };
        let head = |d: DirectedEdge| if d.forward { ends[d.edge][1] } else { ends[d.edge][0] };

        for (t, walk) in boundaries.iter().enumerate() {
            let tile = tile_ids[t];
            if walk.len() < 2 {
                errors.push(ComplexError::NonSimpleBoundaryWalk {
                    tile,
                    reason: format!("{} edge(s)", walk.len()),
                });
                continue;
            }
            for j in 0..walk.len() {
                let next = walk[(j + 1) % walk.len()];
                if head(walk[j]) != tail(next) {
                    errors.push(ComplexError::NonSimpleBoundaryWalk {
                        tile,
                        reason: format!(
                            "edge {} does not end where edge {} starts",
                            edge_ids[walk[j].edge], edge_ids[next.edge]
                        ),
                    });
                }
            }
            let mut seen: Vec<usize> = walk.iter().map(|&d| tail(d)).collect();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                errors.push(ComplexError::NonSimpleBoundaryWalk {
                    tile,
                    reason: "a vertex repeats".into(),
                });
            }
        }

        const UNSET: (usize, usize) = (usize::MAX, usize::MAX);
        let mut sides = vec![[UNSET; 2]; ends.len()];
        let mut uses = vec![0usize; ends.len()];
        for (t, walk) in boundaries.iter().enumerate() {
            for (pos, d) in walk.iter().enumerate() {
                uses[d.edge] += 1;
                let slot = &mut sides[d.edge][usize::from(!d.forward)];
                if *slot == UNSET {
                    *slot = (t, pos);
                } else {
                    errors.push(ComplexError::EdgeUsedTwiceSameDirection {
                        edge: edge_ids[d.edge],
                        first: tile_ids[slot.0],
                        second: tile_ids[t],
                    });
                }
            }
        }
        for (e, &n) in uses.iter().enumerate() {
            if n != 2 {
                errors.push(ComplexError::EdgeUsageCountNot2 { edge: edge_ids[e], count: n });
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let chi = vertex_ids.len() as i64 - ends.len() as i64 + boundaries.len() as i64;
        if chi != 2 {
            errors.push(ComplexError::EulerMismatch { chi });
        }
        let mut parent: Vec<usize> = (0..vertex_ids.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &[a, b] in &ends {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let roots = (0..vertex_ids.len()).filter(|&v| find(&mut parent, v) == v).count();
        if roots != 1 {
            errors.push(ComplexError::Disconnected);
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        // Rotation at each vertex: the dart after d is the reverse of the dart
        // preceding d in the walk of the tile on the left of d.
        let mut outgoing: Vec<Vec<DirectedEdge>> = vec![Vec::new(); vertex_ids.len()];
        for e in 0..ends.len() {
            outgoing[ends[e][0]].push(DirectedEdge::new(e, true));
            outgoing[ends[e][1]].push(DirectedEdge::new(e, false));
        }
        let mut rotation = Vec::with_capacity(vertex_ids.len());
        for (v, out) in outgoing.iter().enumerate() {
            let Some(&start) = out.iter().min_by_key(|d| (edge_ids[d.edge], !d.forward)) else {
                rotation.push(Vec::new());
                continue;
            };
            let mut cycle = vec![start];
            let mut d = start;
            loop {
                let (t, pos) = sides[d.edge][usize::from(!d.forward)];
                let walk = &boundaries[t];
                let prev = walk[(pos + walk.len() - 1) % walk.len()];
                d = prev.reversed();
                if d == start {
                    break;
                }
                cycle.push(d);
                if cycle.len() > out.len() {
                    break;
                }
            }
            if cycle.len() != out.len() {
                errors.push(ComplexError::NonManifoldVertex { vertex: vertex_ids[v] });
            }
            rotation.push(cycle);
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        for (t, walk) in boundaries.iter_mut().enumerate() {
            let start = (0..walk.len())
                .min_by_key(|&j| (edge_ids[walk[j].edge], walk[j].forward))
                .unwrap_or(0);
            walk.rotate_left(start);
            for (pos, d) in walk.iter().enumerate() {
                sides[d.edge][usize::from(!d.forward)] = (t, pos);
            }
        }

        Ok(Self {
            vertex_ids,
            edge_ids,
            tile_ids,
            ends,
            boundaries,
            sides,
            rotation,
            vertex_index,
            edge_index,
            tile_index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn tile_count(&self) -> usize {
        self.tile_ids.len()
    }

    pub fn vertex_id(&self, v: usize) -> CellId {
        self.vertex_ids[v]
    }

    pub fn edge_id(&self, e: usize) -> CellId {
        self.edge_ids[e]
    }

    pub fn tile_id(&self, t: usize) -> CellId {
        self.tile_ids[t]
    }

    pub fn vertex_by_id(&self, id: CellId) -> Option<usize> {
        self.vertex_index.get(&id).copied()
    }

    pub fn edge_by_id(&self, id: CellId) -> Option<usize> {
        self.edge_index.get(&id).copied()
    }

    pub fn tile_by_id(&self, id: CellId) -> Option<usize> {
        self.tile_index.get(&id).copied()
    }

    /// `[tail, head]` of an edge.
    pub fn ends(&self, e: usize) -> [usize; 2] {
        self.ends[e]
    }

    pub fn tail(&self, d: DirectedEdge) -> usize {
        self.ends[d.edge][usize::from(!d.forward)]
    }

    pub fn head(&self, d: DirectedEdge) -> usize {
        self.ends[d.edge][usize::from(d.forward)]
    }

    /// Positive boundary walk of a tile, canonically rotated.
    pub fn boundary(&self, t: usize) -> &[DirectedEdge] {
        &self.boundaries[t]
    }

    /// Boundary vertices of a tile in walk order.
    pub fn tile_vertices(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.boundaries[t].iter().map(move |&d| self.tail(d))
    }

    /// The tile on the left of a directed edge.
    pub fn left_tile(&self, d: DirectedEdge) -> usize {
        self.sides[d.edge][usize::from(!d.forward)].0
    }

    /// Position of a directed edge within the walk of its left tile.
    pub fn position_in_left_tile(&self, d: DirectedEdge) -> usize {
        self.sides[d.edge][usize::from(!d.forward)].1
    }

    /// The two tiles containing an edge: left of the forward dart, then left of the backward dart.
    pub fn edge_tiles(&self, e: usize) -> [usize; 2] {
        [self.sides[e][0].0, self.sides[e][1].0]
    }

    /// Outgoing darts of a vertex in counterclockwise order, starting at the smallest edge id.
    pub fn rotation(&self, v: usize) -> &[DirectedEdge] {
        &self.rotation[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    /// Tiles containing a vertex, in rotation order (each tile once per corner).
    pub fn vertex_tiles(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.rotation[v].iter().map(move |&d| self.left_tile(d))
    }

    pub fn vertex_cycle(&self, v: usize) -> Result<VertexCycle, ComplexError> {
        if v >= self.vertex_count() {
            return Err(ComplexError::UnknownVertex(v as CellId));
        }
        let darts = self.rotation[v].clone();
        let tiles = darts.iter().map(|&d| self.left_tile(d.reversed())).collect();
        Ok(VertexCycle { vertex: v, darts, tiles })
    }

    pub fn vertex_cycle_by_id(&self, id: CellId) -> Result<VertexCycle, ComplexError> {
        let v = self.vertex_by_id(id).ok_or(ComplexError::UnknownVertex(id))?;
        self.vertex_cycle(v)
    }

    /// Every flag once, ordered by tile and walk position.
    pub fn flags(&self) -> Vec<Flag> {
        let mut out = Vec::with_capacity(4 * self.edge_count());
        for (t, walk) in self.boundaries.iter().enumerate() {
            for &d in walk {
                out.push(Flag { vertex: self.tail(d), edge: d.edge, tile: t, positive: true });
                out.push(Flag { vertex: self.head(d), edge: d.edge, tile: t, positive: false });
            }
        }
        out
    }

    /// Whether `(vertex, edge, tile)` is a positively-oriented flag.
    pub fn is_positive_flag(&self, vertex: usize, edge: usize, tile: usize) -> Option<bool> {
        for forward in [true, false] {
            let d = DirectedEdge::new(edge, forward);
            if self.left_tile(d) == tile {
                if self.tail(d) == vertex {
                    return Some(true);
                }
                if self.head(d) == vertex {
                    return Some(false);
                }
            }
        }
        None
    }

    /// Neighbouring vertices along edges, in rotation order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, DirectedEdge)> + '_ {
        self.rotation[v].iter().map(move |&d| (self.head(d), d))
    }

    pub fn edge_records(&self) -> Vec<EdgeRecord> {
        (0..self.edge_count())
            .map(|e| EdgeRecord {
                id: self.edge_ids[e],
                tail: self.vertex_ids[self.ends[e][0]],
                head: self.vertex_ids[self.ends[e][1]],
            })
            .collect()
    }

    pub fn tile_records(&self) -> Vec<TileRecord> {
        (0..self.tile_count())
            .map(|t| TileRecord {
                id: self.tile_ids[t],
                boundary: self.signed_boundary(t),
            })
            .collect()
    }

    pub fn signed_boundary(&self, t: usize) -> Vec<SignedEdgeId> {
        self.boundaries[t]
            .iter()
            .map(|d| SignedEdgeId { id: self.edge_ids[d.edge], forward: d.forward })
            .collect()
    }

    pub fn vertex_ids(&self) -> &[CellId] {
        &self.vertex_ids
    }
}
