//! Built-in rules and skeletons.
//!
//! | name          | k | deg | notes                                            |
//! |---------------|---|-----|--------------------------------------------------|
//! | `lattes2x2`   | 4 | 4   | 2×2 checkerboard per face, explicit labels        |
//! | `grid:p:q`    | 4 | p·q | p×q checkerboard per face, derived labels         |
//! | `barycentric` | 3 | 6   | six triangles per face, explicit labels          |
//! | `z2m1`        | 3 | 2   | four quadrants, explicit labels                  |
//! | `z4rays`      | 3 | -   | skeleton only (no hosts), three marked vertices  |

use std::collections::HashMap;

use thiserror::Error;

use crate::cell_complex::{CellId, EdgeRecord, OrientedComplex, SignedEdgeId, TileRecord};
use crate::rule::{
    derive_labeling, BaseFlag, BaseFlagDecl, Color, EdgeDecl, Location, RuleDecl, SubdivisionRule, TileDecl,
    VertexDecl,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("grid parameters must satisfy p, q >= 2, got {0}x{1}")]
    BadGridParams(usize, usize),
}

impl FixtureError {
    pub fn code(&self) -> &'static str {
        match self {
            FixtureError::UnknownFixture(_) => "UnknownFixture",
            FixtureError::BadGridParams(..) => "BadGridParams",
        }
    }
}

/// A complex with marked vertices and no host data.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub name: String,
    pub complex: OrientedComplex,
    pub marked: Vec<usize>,
}

/// What a fixture name resolves to.
#[derive(Clone, Debug)]
pub enum Fixture {
    Rule(Box<SubdivisionRule>),
    Skeleton(Skeleton),
}

/// Names accepted by [`fixture`], with `grid:p:q` standing for the family.
pub const FIXTURE_NAMES: [&str; 5] = ["lattes2x2", "grid:p:q", "barycentric", "z2m1", "z4rays"];

/// Resolves `lattes2x2`, `grid:p:q`, `barycentric`, `z2m1` or `z4rays`.
pub fn fixture(name: &str) -> Result<Fixture, FixtureError> {
    if let Some(rest) = name.strip_prefix("grid:") {
        let mut parts = rest.split(':').map(|s| s.parse::<usize>());
        return match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(p)), Some(Ok(q)), None) => Ok(Fixture::Rule(Box::new(grid(p, q)?))),
            _ => Err(FixtureError::UnknownFixture(name.to_string())),
        };
    }
    match name {
        "lattes2x2" => Ok(Fixture::Rule(Box::new(lattes2x2()))),
        "barycentric" => Ok(Fixture::Rule(Box::new(barycentric()))),
        "z2m1" => Ok(Fixture::Rule(Box::new(z2m1()))),
        "z4rays" => Ok(Fixture::Skeleton(z4rays_skeleton())),
        _ => Err(FixtureError::UnknownFixture(name.to_string())),
    }
}

/// Like [`fixture`] but only for rules.
pub fn rule_fixture(name: &str) -> Result<SubdivisionRule, FixtureError> {
    match fixture(name)? {
        Fixture::Rule(r) => Ok(*r),
        Fixture::Skeleton(_) => Err(FixtureError::UnknownFixture(name.to_string())),
    }
}

/// Every rule fixture used by the test suites, with its conventional name.
pub fn all_rule_fixtures() -> Vec<(String, SubdivisionRule)> {
    ["lattes2x2", "grid:2:3", "grid:5:5", "barycentric", "z2m1"]
        .iter()
        .map(|n| (n.to_string(), rule_fixture(n).expect("built-in fixture")))
        .collect()
}

fn signed(id: CellId, forward: bool) -> SignedEdgeId {
    SignedEdgeId { id, forward }
}

// Accumulates records; labels and colors are filled in by `finish`.
#[derive(Default)]
struct Builder {
    vertices: Vec<VertexDecl>,
    edges: Vec<EdgeDecl>,
    tiles: Vec<TileDecl>,
}

impl Builder {
    fn vertex(&mut self, loc: Location) -> CellId {
        let id = self.vertices.len() as CellId;
        self.vertices.push(VertexDecl { id, label: 0, loc, line: None });
        id
    }

    fn edge(&mut self, tail: CellId, head: CellId, loc: Location) -> CellId {
        let id = self.edges.len() as CellId;
        self.edges.push(EdgeDecl { id, tail, head, label: 0, loc, line: None });
        id
    }

    fn tile(&mut self, host: Color, boundary: Vec<SignedEdgeId>) -> CellId {
        let id = self.tiles.len() as CellId;
        self.tiles.push(TileDecl { id, color: Color::White, host, boundary, line: None });
        id
    }

    /// Fills labels from the base flag. `expected` vertex labels, when given,
    /// must agree with the derived ones.
    fn finish(self, name: &str, k: usize, base: (CellId, SignedEdgeId, CellId), expected: Option<&[usize]>) -> RuleDecl {
        let vids: Vec<CellId> = self.vertices.iter().map(|v| v.id).collect();
        let edges: Vec<EdgeRecord> =
            self.edges.iter().map(|e| EdgeRecord { id: e.id, tail: e.tail, head: e.head }).collect();
        let tiles: Vec<TileRecord> =
            self.tiles.iter().map(|t| TileRecord { id: t.id, boundary: t.boundary.clone() }).collect();
        let complex = OrientedComplex::build(&vids, &edges, &tiles).expect("fixture complex is valid");
        let flag = BaseFlag { vertex: base.0 as usize, edge: base.1.id as usize, tile: base.2 as usize };
        let labels = derive_labeling(&complex, k, flag).expect("fixture labeling exists");
        if let Some(expected) = expected {
            assert_eq!(labels.vertex_label, expected, "fixture `{name}` labels disagree with the derived labeling");
        }
        let mut decl = RuleDecl {
            name: name.to_string(),
            k,
            vertices: self.vertices,
            edges: self.edges,
            tiles: self.tiles,
            base_flag: Some(BaseFlagDecl { vertex: base.0, edge: base.1, tile: base.2, line: None }),
        };
        for (v, l) in decl.vertices.iter_mut().zip(&labels.vertex_label) {
            v.label = *l as i64;
        }
        for (e, l) in decl.edges.iter_mut().zip(&labels.edge_label) {
            e.label = *l as i64;
        }
        for (t, c) in decl.tiles.iter_mut().zip(&labels.tile_color) {
            t.color = *c;
        }
        decl
    }
}

// The pillow of two p×q rectangles. The white face is drawn counterclockwise
// with corners 0..3 at (0,0), (p,0), (p,q), (0,q); the black face is its mirror.
fn grid_decl(name: &str, p: usize, q: usize, labels: Option<&dyn Fn(usize, usize) -> usize>) -> RuleDecl {
    let mut b = Builder::default();
    let side = |x: usize, y: usize| -> Option<Location> {
        match (x, y) {
            (0, 0) => Some(Location::Corner(0)),
            (x, 0) if x == p => Some(Location::Corner(1)),
            (x, y) if x == p && y == q => Some(Location::Corner(2)),
            (0, y) if y == q => Some(Location::Corner(3)),
            (_, 0) => Some(Location::BoundaryEdge(0)),
            (x, _) if x == p => Some(Location::BoundaryEdge(1)),
            (_, y) if y == q => Some(Location::BoundaryEdge(2)),
            (0, _) => Some(Location::BoundaryEdge(3)),
            _ => None,
        }
    };
    let mut vid: HashMap<(usize, usize, usize), CellId> = HashMap::new();
    let mut expected = Vec::new();
    for face in Color::BOTH {
        for y in 0..=q {
            for x in 0..=p {
                let on_c = side(x, y);
                if on_c.is_some() && face == Color::Black {
                    continue;
                }
                let loc = on_c.unwrap_or(Location::TileInterior(face));
                let id = b.vertex(loc);
                expected.push(labels.map(|f| f(x, y)).unwrap_or(0));
                vid.insert((face.index(), x, y), id);
            }
        }
    }
    let v = |face: Color, x: usize, y: usize| -> CellId {
        let f = if side(x, y).is_some() { 0 } else { face.index() };
        vid[&(f, x, y)]
    };
    // horizontal edges (x,y)->(x+1,y) and vertical edges (x,y)->(x,y+1)
    let mut hid: HashMap<(usize, usize, usize), CellId> = HashMap::new();
    let mut vert: HashMap<(usize, usize, usize), CellId> = HashMap::new();
    for face in Color::BOTH {
        for y in 0..=q {
            for x in 0..p {
                let boundary = y == 0 || y == q;
                if boundary && face == Color::Black {
                    continue;
                }
                let loc = match (boundary, y == 0) {
                    (true, true) => Location::BoundaryEdge(0),
                    (true, false) => Location::BoundaryEdge(2),
                    _ => Location::TileInterior(face),
                };
                let id = b.edge(v(face, x, y), v(face, x + 1, y), loc);
                hid.insert((if boundary { 0 } else { face.index() }, x, y), id);
            }
        }
        for x in 0..=p {
            for y in 0..q {
                let boundary = x == 0 || x == p;
                if boundary && face == Color::Black {
                    continue;
                }
                let loc = match (boundary, x == p) {
                    (true, true) => Location::BoundaryEdge(1),
                    (true, false) => Location::BoundaryEdge(3),
                    _ => Location::TileInterior(face),
                };
                let id = b.edge(v(face, x, y), v(face, x, y + 1), loc);
                vert.insert((if boundary { 0 } else { face.index() }, x, y), id);
            }
        }
    }
    let h = |face: Color, x: usize, y: usize| hid[&(if y == 0 || y == q { 0 } else { face.index() }, x, y)];
    let vv = |face: Color, x: usize, y: usize| vert[&(if x == 0 || x == p { 0 } else { face.index() }, x, y)];
    for face in Color::BOTH {
        for j in 0..q {
            for i in 0..p {
                let boundary = match face {
                    Color::White => vec![
                        signed(h(face, i, j), true),
                        signed(vv(face, i + 1, j), true),
                        signed(h(face, i, j + 1), false),
                        signed(vv(face, i, j), false),
                    ],
                    Color::Black => vec![
                        signed(vv(face, i, j), true),
                        signed(h(face, i, j + 1), true),
                        signed(vv(face, i + 1, j), false),
                        signed(h(face, i, j), false),
                    ],
                };
                b.tile(face, boundary);
            }
        }
    }
    // base flag: corner 0, bottom edge, white-face corner square
    let base = (v(Color::White, 0, 0), signed(h(Color::White, 0, 0), true), 0);
    b.finish(name, 4, base, labels.map(|_| expected.as_slice()))
}

/// Records of the `p×q` grid rule.
pub fn grid_decl_pq(p: usize, q: usize) -> Result<RuleDecl, FixtureError> {
    if p < 2 || q < 2 {
        return Err(FixtureError::BadGridParams(p, q));
    }
    Ok(grid_decl(&format!("grid_{p}_{q}"), p, q, None))
}

/// The `p×q` grid rule: each face of the square pillow cut into a p×q checkerboard.
pub fn grid(p: usize, q: usize) -> Result<SubdivisionRule, FixtureError> {
    let decl = grid_decl_pq(p, q)?;
    Ok(SubdivisionRule::from_decl(&decl).expect("grid fixture validates"))
}

/// Records of the Lattès rule.
pub fn lattes2x2_decl() -> RuleDecl {
    // corners of the square map to 0, edge midpoints alternately to 1 and 3, centers to 2
    let label = |x: usize, y: usize| match (x, y) {
        (1, 1) => 2,
        (1, _) => 1,
        (_, 1) => 3,
        _ => 0,
    };
    grid_decl("lattes2x2", 2, 2, Some(&label))
}

pub fn lattes2x2() -> SubdivisionRule {
    SubdivisionRule::from_decl(&lattes2x2_decl()).expect("lattes2x2 fixture validates")
}

/// Records of the barycentric rule.
pub fn barycentric_decl() -> RuleDecl {
    // 0-vertices -1, 1, oo are corners 0, 1, 2. Every corner maps to 1 (label 1),
    // every edge midpoint to -1 (label 0), every centroid to oo (label 2).
    let mut b = Builder::default();
    let corners: Vec<CellId> = (0..3).map(|i| b.vertex(Location::Corner(i))).collect();
    let mids: Vec<CellId> = (0..3).map(|l| b.vertex(Location::BoundaryEdge(l))).collect();
    let centroid = Color::BOTH.map(|c| b.vertex(Location::TileInterior(c)));
    let mut halves = Vec::new();
    for l in 0..3 {
        let first = b.edge(corners[l], mids[l], Location::BoundaryEdge(l));
        let second = b.edge(mids[l], corners[(l + 1) % 3], Location::BoundaryEdge(l));
        halves.push((corners[l], first, mids[l]));
        halves.push((mids[l], second, corners[(l + 1) % 3]));
    }
    let mut spokes: HashMap<(usize, CellId), CellId> = HashMap::new();
    for c in Color::BOTH {
        let g = centroid[c.index()];
        for &x in corners.iter().chain(&mids) {
            let loc = Location::TileInterior(c);
            spokes.insert((c.index(), x), b.edge(g, x, loc));
        }
    }
    let mut base_tile = 0;
    for c in Color::BOTH {
        for &(a, e, z) in &halves {
            let (sa, sz) = (spokes[&(c.index(), a)], spokes[&(c.index(), z)]);
            let boundary = match c {
                Color::White => vec![signed(e, true), signed(sz, false), signed(sa, true)],
                Color::Black => vec![signed(e, false), signed(sa, false), signed(sz, true)],
            };
            let t = b.tile(c, boundary);
            if c == Color::White && a == mids[0] {
                base_tile = t;
            }
        }
    }
    let mut expected = vec![1; 3];
    expected.extend([0; 3]);
    expected.extend([2; 2]);
    let base = (mids[0], signed(halves[1].1, true), base_tile);
    b.finish("barycentric", 3, base, Some(&expected))
}

pub fn barycentric() -> SubdivisionRule {
    SubdivisionRule::from_decl(&barycentric_decl()).expect("barycentric fixture validates")
}

/// Records of the z² − 1 rule.
pub fn z2m1_decl() -> RuleDecl {
    // 0-vertices -1, 0, oo are corners 0, 1, 2; the white 0-tile is the upper half-plane.
    // 1-vertices: -1 and 1 map to 0 (label 1), 0 maps to -1 (label 0), oo is fixed (label 2).
    let mut b = Builder::default();
    let m1 = b.vertex(Location::Corner(0));
    let zero = b.vertex(Location::Corner(1));
    let one = b.vertex(Location::BoundaryEdge(1));
    let inf = b.vertex(Location::Corner(2));
    let e0 = b.edge(m1, zero, Location::BoundaryEdge(0));
    let e1 = b.edge(zero, one, Location::BoundaryEdge(1));
    let e2 = b.edge(one, inf, Location::BoundaryEdge(1));
    let e3 = b.edge(inf, m1, Location::BoundaryEdge(2));
    let up = b.edge(zero, inf, Location::TileInterior(Color::White));
    let down = b.edge(zero, inf, Location::TileInterior(Color::Black));
    let q1 = b.tile(Color::White, vec![signed(e1, true), signed(e2, true), signed(up, false)]);
    b.tile(Color::White, vec![signed(up, true), signed(e3, true), signed(e0, true)]);
    b.tile(Color::Black, vec![signed(e0, false), signed(e3, false), signed(down, false)]);
    b.tile(Color::Black, vec![signed(down, true), signed(e2, false), signed(e1, false)]);
    b.finish("z2m1", 3, (zero, signed(e1, true), q1), Some(&[1, 0, 1, 2]))
}

pub fn z2m1() -> SubdivisionRule {
    SubdivisionRule::from_decl(&z2m1_decl()).expect("z2m1 fixture validates")
}

/// Preimage of the unit circle under z ↦ z⁴ restricted to the 8 rays through
/// the 8th roots of unity, with 0, ∞ and the four 4th roots as vertices.
/// The marked vertices are -i, 1, i.
pub fn z4rays_skeleton() -> Skeleton {
    // vertices: 0 -> 0, 1 -> oo, 2 + j -> i^j
    let vertices: Vec<CellId> = (0..6).collect();
    let mut edges = Vec::new();
    let mut add = |tail: CellId, head: CellId| {
        let id = edges.len() as CellId;
        edges.push(EdgeRecord { id, tail, head });
        id
    };
    let inner: Vec<CellId> = (0..4).map(|j| add(0, 2 + j)).collect();
    let outer: Vec<CellId> = (0..4).map(|j| add(2 + j, 1)).collect();
    let odd: Vec<CellId> = (0..4).map(|_| add(0, 1)).collect();
    let mut tiles = Vec::new();
    for j in 0..4 {
        let next = (j + 1) % 4;
        tiles.push(TileRecord {
            id: tiles.len() as CellId,
            boundary: vec![signed(inner[j], true), signed(outer[j], true), signed(odd[j], false)],
        });
        tiles.push(TileRecord {
            id: tiles.len() as CellId,
            boundary: vec![signed(odd[j], true), signed(outer[next], false), signed(inner[next], false)],
        });
    }
    let complex = OrientedComplex::build(&vertices, &edges, &tiles).expect("z4rays skeleton is valid");
    Skeleton { name: "z4rays".into(), complex, marked: vec![5, 2, 3] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_of_fixtures() {
        let c = lattes2x2().counts();
        assert_eq!((c.ww, c.wb, c.bw, c.bb, c.deg), (2, 2, 2, 2, 4));
        let c = barycentric().counts();
        assert_eq!((c.ww, c.wb, c.bw, c.bb, c.deg), (3, 3, 3, 3, 6));
        let c = z2m1().counts();
        assert_eq!((c.ww, c.wb, c.bw, c.bb, c.deg), (1, 1, 1, 1, 2));
        let c = grid(2, 3).unwrap().counts();
        assert_eq!((c.ww, c.wb, c.bw, c.bb, c.deg), (3, 3, 3, 3, 6));
        let c = grid(5, 5).unwrap().counts();
        assert_eq!((c.ww, c.wb, c.bw, c.bb, c.deg), (13, 12, 12, 13, 25));
    }

    #[test]
    fn cell_counts() {
        let r = barycentric();
        assert_eq!(r.d1().tile_count(), 12);
        assert!((0..12).all(|t| r.d1().boundary(t).len() == 3));
        let r = grid(5, 5).unwrap();
        assert_eq!(r.d1().tile_count(), 50);
        let s = z4rays_skeleton();
        assert_eq!((s.complex.vertex_count(), s.complex.edge_count(), s.complex.tile_count()), (6, 12, 8));
    }

    #[test]
    fn lattes_vertex_cycles() {
        let r = lattes2x2();
        let d1 = r.d1();
        let center = (0..d1.vertex_count()).find(|&v| r.vertex_label(v) == 2).unwrap();
        assert_eq!(d1.vertex_cycle(center).unwrap().len(), 4);
        assert_eq!(d1.vertex_cycle(r.base_vertex(2)).unwrap().len(), 2);
    }

    #[test]
    fn grid_two_by_two_matches_lattes() {
        let g = grid(2, 2).unwrap();
        let l = lattes2x2();
        assert_eq!(g.d1(), l.d1());
        assert_eq!(g.labels(), l.labels());
    }

    #[test]
    fn grid_corner_tile_is_white() {
        for (p, q) in [(2, 3), (3, 3), (5, 5), (3, 4)] {
            let r = grid(p, q).unwrap();
            let f = r.base_flag();
            assert_eq!(f.vertex, r.base_vertex(0));
            assert_eq!(r.tile_color(f.tile), Color::White);
            assert_eq!(r.tile_host(f.tile), Color::White);
        }
    }

    #[test]
    fn fixture_names() {
        assert!(matches!(fixture("grid:2:3"), Ok(Fixture::Rule(_))));
        assert!(matches!(fixture("z4rays"), Ok(Fixture::Skeleton(_))));
        assert_eq!(fixture("grid:1:3").unwrap_err().code(), "BadGridParams");
        assert_eq!(fixture("nope").unwrap_err().code(), "UnknownFixture");
        assert_eq!(fixture("grid:2").unwrap_err().code(), "UnknownFixture");
    }

    #[test]
    fn text_round_trip() {
        for (_, r) in all_rule_fixtures() {
            let text = r.to_text();
            let back = SubdivisionRule::parse(&text).unwrap();
            assert_eq!(back.to_text(), text);
            assert_eq!(back.d1(), r.d1());
        }
    }

    #[test]
    fn odd_vertex_cycle_is_rejected() {
        let mut decl = barycentric_decl();
        let spokes: Vec<CellId> = decl
            .edges
            .iter()
            .filter(|e| e.loc == Location::TileInterior(Color::Black) && (e.head == 0 || e.head == 3))
            .map(|e| e.id)
            .collect();
        for e in spokes {
            decl.remove_edge(e);
        }
        let err = SubdivisionRule::from_decl(&decl).unwrap_err();
        assert!(err.has_code("OddVertexCycle"), "{:?}", err.diagnostics());
    }
}
