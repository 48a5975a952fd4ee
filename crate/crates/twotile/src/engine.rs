//! Generation of the decompositions `D^n`, tile addresses and the subshift coding.
//!
//! Index layout of level `n + 1` given level `n`:
//!
//! * vertices: the level-`n` vertices (same indices), then the interior
//!   vertices of each subdivided edge in edge order, then the interior
//!   vertices of each tile's template copy in tile order;
//! * edges: the pieces of each subdivided edge in edge order, then the
//!   interior edges of each tile's template copy;
//! * tiles: the template tiles of each parent tile in parent order.
//!
//! Ids equal indices, so output depends only on the rule and the level.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::cell_complex::{CellRef, DirectedEdge, OrientedComplex};
use crate::rule::{check_labeling_axioms, Color, Labeling, Location, SubdivisionRule};

/// Default cap on the number of tiles generated at one level.
pub const DEFAULT_MAX_TILES: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("level {level} would have {tiles} tiles, above the cap of {cap}")]
    ResourceLimit { level: usize, tiles: u64, cap: u64 },
    #[error("the level complex was generated from rule `{found}`, not `{expected}`")]
    WrongRule { expected: String, found: String },
    #[error("boundary match failure: {0}")]
    BoundaryMatchFailure(String),
    #[error("self-check failed at level {level}: {message}")]
    SelfCheck { level: usize, message: String },
    #[error("address {0} is not admissible")]
    InadmissibleAddress(String),
    #[error("address has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("tile index {0} out of range")]
    UnknownCell(usize),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::ResourceLimit { .. } => "ResourceLimit",
            EngineError::WrongRule { .. } => "WrongRule",
            EngineError::BoundaryMatchFailure(_) => "BoundaryMatchFailure",
            EngineError::SelfCheck { .. } => "SelfCheck",
            EngineError::InadmissibleAddress(_) => "InadmissibleAddress",
            EngineError::LengthMismatch { .. } => "LengthMismatch",
            EngineError::UnknownCell(_) => "UnknownCell",
        }
    }
}

/// A tile address `(c₀, t₁, …, t_n)`; letters are dense D¹ tile indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address {
    pub root: Color,
    pub letters: Vec<usize>,
}

impl Address {
    pub fn root(c: Color) -> Self {
        Self { root: c, letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn child(&self, letter: usize) -> Self {
        let mut letters = self.letters.clone();
        letters.push(letter);
        Self { root: self.root, letters }
    }

    /// The address of the ancestor at level `j`.
    pub fn truncate(&self, j: usize) -> Self {
        Self { root: self.root, letters: self.letters[..j.min(self.len())].to_vec() }
    }

    /// The color of the addressed tile.
    pub fn color(&self, rule: &SubdivisionRule) -> Color {
        self.letters.last().map_or(self.root, |&t| rule.tile_color(t))
    }

    pub fn is_admissible(&self, rule: &SubdivisionRule) -> bool {
        let mut c = self.root;
        for &t in &self.letters {
            if t >= rule.d1().tile_count() || rule.tile_host(t) != c {
                return false;
            }
            c = rule.tile_color(t);
        }
        true
    }

    /// The address of `F^m` of the tile: drop `m` letters, rooting at the color reached.
    pub fn shift(&self, rule: &SubdivisionRule, m: usize) -> Self {
        if m == 0 {
            return self.clone();
        }
        let root = rule.tile_color(self.letters[m - 1]);
        Self { root, letters: self.letters[m..].to_vec() }
    }

    /// Renders with D¹ tile ids, e.g. `w.3.7`.
    pub fn display(&self, rule: &SubdivisionRule) -> String {
        let mut s = self.root.letter().to_string();
        for &t in &self.letters {
            s.push('.');
            s.push_str(&rule.d1().tile_id(t).to_string());
        }
        s
    }

    /// Parses `w.3.7` (D¹ tile ids after the color).
    pub fn parse(text: &str, rule: &SubdivisionRule) -> Option<Self> {
        let mut parts = text.split('.');
        let root = Color::from_letter(parts.next()?)?;
        let letters = parts
            .map(|p| p.parse().ok().and_then(|id| rule.d1().tile_by_id(id)))
            .collect::<Option<Vec<_>>>()?;
        Some(Self { root, letters })
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)?;
        for t in &self.letters {
            write!(f, ".{t}")?;
        }
        Ok(())
    }
}

/// Parent links and child blocks relating a level to the one above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lineage {
    pub vertex_parent: Vec<CellRef>,
    pub edge_parent: Vec<CellRef>,
    pub tile_parent: Vec<usize>,
    /// Per parent edge: first new vertex and first new edge.
    pub edge_blocks: Vec<(usize, usize)>,
    /// Per parent tile: first new vertex, edge and tile of its template copy.
    pub tile_blocks: Vec<(usize, usize, usize)>,
}

/// The decomposition `D^n` with labels, locations and addresses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelComplex {
    pub level: usize,
    pub k: usize,
    pub deg: usize,
    pub rule_name: String,
    pub complex: OrientedComplex,
    pub labels: Labeling,
    pub vertex_loc0: Vec<Location>,
    pub edge_loc0: Vec<Location>,
    /// Color of the 0-tile containing each tile.
    pub tile_loc0: Vec<Color>,
    pub addresses: Vec<Address>,
    pub lineage: Option<Lineage>,
}

impl LevelComplex {
    /// The pillow `D⁰` of a rule.
    pub fn level_zero(rule: &SubdivisionRule) -> Self {
        let k = rule.k();
        let ends = (0..k).map(|l| [l, (l + 1) % k]).collect();
        let white = (0..k).map(|l| DirectedEdge::new(l, true)).collect();
        let black = (0..k).rev().map(|l| DirectedEdge::new(l, false)).collect();
        let complex = OrientedComplex::from_indices(k, ends, vec![white, black]).expect("pillow is valid");
        Self {
            level: 0,
            k,
            deg: rule.deg(),
            rule_name: rule.name().to_string(),
            complex,
            labels: Labeling {
                vertex_label: (0..k).collect(),
                edge_label: (0..k).collect(),
                tile_color: vec![Color::White, Color::Black],
            },
            vertex_loc0: (0..k).map(Location::Corner).collect(),
            edge_loc0: (0..k).map(Location::BoundaryEdge).collect(),
            tile_loc0: vec![Color::White, Color::Black],
            addresses: vec![Address::root(Color::White), Address::root(Color::Black)],
            lineage: None,
        }
    }

    pub fn tile_count(&self) -> usize {
        self.complex.tile_count()
    }

    pub fn tile_color(&self, t: usize) -> Color {
        self.labels.tile_color[t]
    }

    /// Boundary vertices and edges of a tile indexed by their label.
    pub fn tile_frame(&self, t: usize) -> (Vec<usize>, Vec<usize>) {
        let mut corners = vec![usize::MAX; self.k];
        let mut edges = vec![usize::MAX; self.k];
        for &d in self.complex.boundary(t) {
            corners[self.labels.vertex_label[self.complex.tail(d)]] = self.complex.tail(d);
            edges[self.labels.edge_label[d.edge]] = d.edge;
        }
        (corners, edges)
    }

    /// Endpoints of an edge ordered as (label l, label l+1) with l its label.
    pub fn oriented_ends(&self, e: usize) -> [usize; 2] {
        let [a, b] = self.complex.ends(e);
        if self.labels.vertex_label[a] == self.labels.edge_label[e] {
            [a, b]
        } else {
            [b, a]
        }
    }

    /// The tile with the given address, by binary search (addresses are sorted).
    pub fn tile_at(&self, rule: &SubdivisionRule, address: &Address) -> Result<usize, EngineError> {
        if address.len() != self.level {
            return Err(EngineError::LengthMismatch { expected: self.level, found: address.len() });
        }
        if !address.is_admissible(rule) {
            return Err(EngineError::InadmissibleAddress(address.display(rule)));
        }
        self.addresses
            .binary_search(address)
            .map_err(|_| EngineError::InadmissibleAddress(address.display(rule)))
    }

    pub fn address_of(&self, t: usize) -> Result<&Address, EngineError> {
        self.addresses.get(t).ok_or(EngineError::UnknownCell(t))
    }

    /// The copy of D¹ vertex `p` inside the parent tile `x`; `p` must lie in the closed 0-tile of `x`'s color.
    pub fn template_vertex_copy(&self, parent: &LevelComplex, rule: &SubdivisionRule, x: usize, p: usize) -> usize {
        let lin = self.lineage.as_ref().expect("levels above 0 have lineage");
        let (corners, frame) = parent.tile_frame(x);
        match rule.vertex_loc(p) {
            Location::Corner(i) => corners[i],
            Location::BoundaryEdge(l) => lin.edge_blocks[frame[l]].0 + rule.vertex_path_position(p) - 1,
            Location::TileInterior(_) => lin.tile_blocks[x].0 + rule.vertex_template_slot(p),
        }
    }

    /// The copy of D¹ edge `e` inside the parent tile `x`, oriented as `e`.
    pub fn template_edge_copy(&self, parent: &LevelComplex, rule: &SubdivisionRule, x: usize, e: usize) -> usize {
        let lin = self.lineage.as_ref().expect("levels above 0 have lineage");
        match rule.edge_loc(e) {
            Location::BoundaryEdge(l) => {
                let (_, frame) = parent.tile_frame(x);
                lin.edge_blocks[frame[l]].1 + rule.edge_path_position(e)
            }
            _ => lin.tile_blocks[x].1 + rule.edge_template_slot(e),
        }
    }

    /// Checks counts, labeling axioms, locations and addresses.
    pub fn self_check(&self, rule: &SubdivisionRule) -> Result<(), EngineError> {
        let fail = |message: String| Err(EngineError::SelfCheck { level: self.level, message });
        let dn = (self.deg as u64).pow(self.level as u32);
        let c = &self.complex;
        let expected = (2 * dn, self.k as u64 * dn, (self.k as u64 - 2) * dn + 2);
        let got = (c.tile_count() as u64, c.edge_count() as u64, c.vertex_count() as u64);
        if got != expected {
            return fail(format!("(tiles, edges, vertices) = {got:?}, expected {expected:?}"));
        }
        if let Some((code, msg, _)) = check_labeling_axioms(c, self.k, &self.labels).into_iter().next() {
            return fail(format!("{code}: {msg}"));
        }
        for t in 0..c.tile_count() {
            let a = &self.addresses[t];
            if a.len() != self.level || !a.is_admissible(rule) || a.color(rule) != self.tile_color(t) || a.root != self.tile_loc0[t] {
                return fail(format!("tile {t} has inconsistent address {a}"));
            }
            for &d in c.boundary(t) {
                let (v, e) = (c.tail(d), d.edge);
                if !self.vertex_loc0[v].in_closure_of(self.tile_loc0[t]) || !self.edge_loc0[e].in_closure_of(self.tile_loc0[t]) {
                    return fail(format!("tile {t} has a boundary cell outside its 0-tile"));
                }
            }
        }
        if self.addresses.windows(2).any(|w| w[0] >= w[1]) {
            return fail("addresses are not strictly increasing".into());
        }
        if let Some(lin) = &self.lineage {
            for e in 0..c.edge_count() {
                let ok = match lin.edge_parent[e] {
                    CellRef::Edge(a) => self.edge_loc0[e] == self.parent_edge_loc0(a),
                    CellRef::Tile(_) => matches!(self.edge_loc0[e], Location::TileInterior(_)),
                    CellRef::Vertex(_) => false,
                };
                if !ok {
                    return fail(format!("edge {e} has a location inconsistent with its parent"));
                }
            }
        }
        Ok(())
    }

    // Children of a parent edge share its loc0; the parent edge's loc0 is
    // recovered from any child since levels do not keep their parent.
    fn parent_edge_loc0(&self, a: usize) -> Location {
        let lin = self.lineage.as_ref().expect("lineage present");
        self.edge_loc0[lin.edge_blocks[a].1]
    }
}

/// Subdivides every tile of `level` as the 0-tile of its color is subdivided in D¹.
pub fn subdivide(level: &LevelComplex, rule: &SubdivisionRule) -> Result<LevelComplex, EngineError> {
    if level.rule_name != rule.name() || level.k != rule.k() || level.deg != rule.deg() {
        return Err(EngineError::WrongRule { expected: rule.name().to_string(), found: level.rule_name.clone() });
    }
    let d1 = rule.d1();
    let pc = &level.complex;
    let k = rule.k();

    let mut vertex_label: Vec<usize> =
        (0..pc.vertex_count()).map(|v| rule.vertex_label(rule.base_vertex(level.labels.vertex_label[v]))).collect();
    let mut vertex_loc0 = level.vertex_loc0.clone();
    let mut vertex_parent: Vec<CellRef> = (0..pc.vertex_count()).map(CellRef::Vertex).collect();
    let mut ends: Vec<[usize; 2]> = Vec::new();
    let mut edge_label = Vec::new();
    let mut edge_loc0 = Vec::new();
    let mut edge_parent = Vec::new();
    let mut edge_blocks = Vec::with_capacity(pc.edge_count());

    // new vertices on subdivided edges
    let mut next_vertex = pc.vertex_count();
    for a in 0..pc.edge_count() {
        let l = level.labels.edge_label[a];
        let m = rule.boundary_path(l).len();
        edge_blocks.push((next_vertex, 0));
        for j in 1..m {
            let p = d1.head(rule.boundary_path(l)[j - 1]);
            vertex_label.push(rule.vertex_label(p));
            vertex_loc0.push(level.edge_loc0[a]);
            vertex_parent.push(CellRef::Edge(a));
        }
        next_vertex += m - 1;
    }
    for a in 0..pc.edge_count() {
        let l = level.labels.edge_label[a];
        let path = rule.boundary_path(l);
        let [p0, p1] = level.oriented_ends(a);
        if level.labels.vertex_label[p0] != l || level.labels.vertex_label[p1] != (l + 1) % k {
            return Err(EngineError::BoundaryMatchFailure(format!("edge {a} endpoints do not carry labels {l}, {}", (l + 1) % k)));
        }
        let first = edge_blocks[a].0;
        let pv = |j: usize| if j == 0 { p0 } else if j == path.len() { p1 } else { first + j - 1 };
        edge_blocks[a].1 = ends.len();
        for (j, d) in path.iter().enumerate() {
            ends.push(if d.forward { [pv(j), pv(j + 1)] } else { [pv(j + 1), pv(j)] });
            edge_label.push(rule.edge_label(d.edge));
            edge_loc0.push(level.edge_loc0[a]);
            edge_parent.push(CellRef::Edge(a));
        }
    }

    let mut tile_blocks = Vec::with_capacity(pc.tile_count());
    let mut boundaries = Vec::new();
    let mut tile_color = Vec::new();
    let mut tile_loc0 = Vec::new();
    let mut tile_parent = Vec::new();
    let mut addresses = Vec::new();
    for x in 0..pc.tile_count() {
        let c = level.tile_color(x);
        let tpl = rule.template(c);
        let (corners, frame) = level.tile_frame(x);
        if corners.contains(&usize::MAX) || frame.contains(&usize::MAX) {
            return Err(EngineError::BoundaryMatchFailure(format!("tile {x} does not carry every label once")));
        }
        let inside = Location::TileInterior(level.tile_loc0[x]);
        let block = (next_vertex, ends.len(), boundaries.len());
        tile_blocks.push(block);
        for &p in &tpl.interior_vertices {
            vertex_label.push(rule.vertex_label(p));
            vertex_loc0.push(inside);
            vertex_parent.push(CellRef::Tile(x));
        }
        next_vertex += tpl.interior_vertices.len();
        let copy_vertex = |p: usize| -> usize {
            match rule.vertex_loc(p) {
                Location::Corner(i) => corners[i],
                Location::BoundaryEdge(l) => edge_blocks[frame[l]].0 + rule.vertex_path_position(p) - 1,
                Location::TileInterior(_) => block.0 + rule.vertex_template_slot(p),
            }
        };
        for &e in &tpl.interior_edges {
            let [t, h] = d1.ends(e);
            ends.push([copy_vertex(t), copy_vertex(h)]);
            edge_label.push(rule.edge_label(e));
            edge_loc0.push(inside);
            edge_parent.push(CellRef::Tile(x));
        }
        let copy_edge = |e: usize| -> usize {
            match rule.edge_loc(e) {
                Location::BoundaryEdge(l) => edge_blocks[frame[l]].1 + rule.edge_path_position(e),
                _ => block.1 + rule.edge_template_slot(e),
            }
        };
        for &t in &tpl.tiles {
            boundaries.push(d1.boundary(t).iter().map(|d| DirectedEdge::new(copy_edge(d.edge), d.forward)).collect());
            tile_color.push(rule.tile_color(t));
            tile_loc0.push(level.tile_loc0[x]);
            tile_parent.push(x);
            addresses.push(level.addresses[x].child(t));
        }
    }

    let complex = OrientedComplex::from_indices(next_vertex, ends, boundaries).map_err(|errs| EngineError::SelfCheck {
        level: level.level + 1,
        message: errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "),
    })?;
    let out = LevelComplex {
        level: level.level + 1,
        k,
        deg: rule.deg(),
        rule_name: rule.name().to_string(),
        complex,
        labels: Labeling { vertex_label, edge_label, tile_color },
        vertex_loc0,
        edge_loc0,
        tile_loc0,
        addresses,
        lineage: Some(Lineage { vertex_parent, edge_parent, tile_parent, edge_blocks, tile_blocks }),
    };
    out.self_check(rule)?;
    Ok(out)
}

/// The number of tiles at level `n`, saturating.
pub fn tile_count_at(rule: &SubdivisionRule, n: usize) -> u64 {
    (0..n).fold(2u64, |acc, _| acc.saturating_mul(rule.deg() as u64))
}

fn check_cap(rule: &SubdivisionRule, n: usize, cap: u64) -> Result<(), EngineError> {
    let tiles = tile_count_at(rule, n);
    if tiles > cap {
        return Err(EngineError::ResourceLimit { level: n, tiles, cap });
    }
    Ok(())
}

/// All levels `0..=n` of a rule.
#[derive(Clone, Debug)]
pub struct Tower {
    pub levels: Vec<LevelComplex>,
}

impl Tower {
    pub fn generate(rule: &SubdivisionRule, n: usize) -> Result<Self, EngineError> {
        Self::generate_capped(rule, n, DEFAULT_MAX_TILES)
    }

    pub fn generate_capped(rule: &SubdivisionRule, n: usize, max_tiles: u64) -> Result<Self, EngineError> {
        check_cap(rule, n, max_tiles)?;
        let mut levels = vec![LevelComplex::level_zero(rule)];
        for _ in 0..n {
            let next = subdivide(levels.last().expect("nonempty"), rule)?;
            levels.push(next);
        }
        Ok(Self { levels })
    }

    pub fn top(&self) -> &LevelComplex {
        self.levels.last().expect("a tower has level 0")
    }

    pub fn level(&self, j: usize) -> &LevelComplex {
        &self.levels[j]
    }

    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    /// The level-`j` ancestor of a tile of level `n`.
    pub fn ancestor(&self, n: usize, tile: usize, j: usize) -> usize {
        let mut t = tile;
        for lvl in (j + 1..=n).rev() {
            t = self.levels[lvl].lineage.as_ref().expect("levels above 0 have lineage").tile_parent[t];
        }
        t
    }
}

/// The decomposition `D^n` of a rule.
pub fn generate(rule: &SubdivisionRule, n: usize) -> Result<LevelComplex, EngineError> {
    generate_capped(rule, n, DEFAULT_MAX_TILES)
}

pub fn generate_capped(rule: &SubdivisionRule, n: usize, max_tiles: u64) -> Result<LevelComplex, EngineError> {
    check_cap(rule, n, max_tiles)?;
    let mut level = LevelComplex::level_zero(rule);
    for _ in 0..n {
        level = subdivide(&level, rule)?;
    }
    Ok(level)
}

/// Transition matrix of the subshift on D¹ tiles: `σ → τ` iff `host(τ) = color(σ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SftMatrix {
    /// D¹ tile ids in index order.
    pub alphabet: Vec<u32>,
    pub transitions: Vec<Vec<bool>>,
    pub strongly_connected: bool,
    /// Whether some periodic word passes through each letter.
    pub periodic: Vec<bool>,
}

impl SftMatrix {
    pub fn row_sums(&self) -> Vec<usize> {
        self.transitions.iter().map(|r| r.iter().filter(|&&b| b).count()).collect()
    }

    /// Graphviz rendering of the transition digraph.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph \"{name}\" {{\n");
        for (i, row) in self.transitions.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b {
                    s.push_str(&format!("  t{} -> t{};\n", self.alphabet[i], self.alphabet[j]));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

fn reachable(adj: &[Vec<bool>], from: usize, reverse: bool) -> Vec<bool> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for j in 0..n {
        let edge = if reverse { adj[j][from] } else { adj[from][j] };
        if edge && !seen[j] {
            seen[j] = true;
            queue.push_back(j);
        }
    }
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            let edge = if reverse { adj[j][i] } else { adj[i][j] };
            if edge && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

pub fn sft_matrix(rule: &SubdivisionRule) -> SftMatrix {
    let d1 = rule.d1();
    let n = d1.tile_count();
    let transitions: Vec<Vec<bool>> =
        (0..n).map(|s| (0..n).map(|t| rule.tile_host(t) == rule.tile_color(s)).collect()).collect();
    let periodic = (0..n).map(|s| reachable(&transitions, s, false)[s]).collect();
    let strongly_connected =
        n > 0 && reachable(&transitions, 0, false).iter().all(|&b| b) && reachable(&transitions, 0, true).iter().all(|&b| b);
    SftMatrix { alphabet: (0..n).map(|t| d1.tile_id(t)).collect(), transitions, strongly_connected, periodic }
}

/// Number of admissible addresses of length `n` (both roots).
pub fn admissible_word_count(rule: &SubdivisionRule, n: usize) -> u128 {
    // words[c] = number of admissible continuations of length j starting in 0-tile c
    let mut words = [1u128, 1u128];
    for _ in 0..n {
        let mut next = [0u128; 2];
        for host in Color::BOTH {
            for &t in &rule.template(host).tiles {
                next[host.index()] += words[rule.tile_color(t).index()];
            }
        }
        words = next;
    }
    words[0] + words[1]
}

/// All admissible addresses of length `n` in increasing order.
pub fn admissible_addresses(rule: &SubdivisionRule, n: usize) -> Vec<Address> {
    let mut current = vec![Address::root(Color::White), Address::root(Color::Black)];
    for _ in 0..n {
        let mut next = Vec::new();
        for a in &current {
            for &t in &rule.template(a.color(rule)).tiles {
                next.push(a.child(t));
            }
        }
        current = next;
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{all_rule_fixtures, barycentric, lattes2x2, z2m1};

    #[test]
    fn lattes_levels() {
        let r = lattes2x2();
        let one = generate(&r, 1).unwrap();
        assert_eq!((one.complex.tile_count(), one.complex.edge_count(), one.complex.vertex_count()), (8, 16, 10));
        let two = generate(&r, 2).unwrap();
        assert_eq!((two.complex.tile_count(), two.complex.edge_count(), two.complex.vertex_count()), (32, 64, 34));
    }

    #[test]
    fn level_one_is_isomorphic_to_d1() {
        // Same labels and locations multiset, same vertex cycle profile.
        for (_, r) in all_rule_fixtures() {
            let one = generate(&r, 1).unwrap();
            let mut a: Vec<_> = (0..r.d1().vertex_count()).map(|v| (r.vertex_label(v), r.vertex_loc(v), r.d1().degree(v))).collect();
            let mut b: Vec<_> = (0..one.complex.vertex_count())
                .map(|v| (one.labels.vertex_label[v], one.vertex_loc0[v], one.complex.degree(v)))
                .collect();
            a.sort();
            b.sort();
            assert_eq!(a, b, "{}", r.name());
        }
    }

    #[test]
    fn barycentric_level_two() {
        let l = generate(&barycentric(), 2).unwrap();
        assert_eq!((l.complex.tile_count(), l.complex.edge_count(), l.complex.vertex_count()), (72, 108, 38));
    }

    #[test]
    fn z2m1_doubles() {
        let r = z2m1();
        for n in 0..6 {
            assert_eq!(generate(&r, n).unwrap().tile_count(), 2 << n);
        }
    }

    #[test]
    fn level_zero_is_pillow() {
        let l = generate(&lattes2x2(), 0).unwrap();
        assert_eq!((l.complex.tile_count(), l.complex.edge_count(), l.complex.vertex_count()), (2, 4, 4));
    }

    #[test]
    fn resource_limit() {
        let err = generate_capped(&lattes2x2(), 6, 1000).unwrap_err();
        assert_eq!(err.code(), "ResourceLimit");
    }

    #[test]
    fn wrong_rule() {
        let l = generate(&lattes2x2(), 1).unwrap();
        assert_eq!(subdivide(&l, &z2m1()).unwrap_err().code(), "WrongRule");
    }

    #[test]
    fn addresses_biject() {
        for (_, r) in all_rule_fixtures() {
            let tower = Tower::generate(&r, 2).unwrap();
            for lvl in &tower.levels {
                let words = admissible_addresses(&r, lvl.level);
                assert_eq!(words.len() as u128, admissible_word_count(&r, lvl.level));
                assert_eq!(words, lvl.addresses);
                for (t, a) in words.iter().enumerate() {
                    assert_eq!(lvl.tile_at(&r, a).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn address_errors() {
        let r = lattes2x2();
        let l = generate(&r, 2).unwrap();
        assert_eq!(l.tile_at(&r, &Address::root(Color::White)).unwrap_err().code(), "LengthMismatch");
        let t1 = r.template(Color::White).tiles[0];
        let wrong = r.template(r.tile_color(t1).other()).tiles[0];
        let bad = Address { root: Color::White, letters: vec![t1, wrong] };
        assert_eq!(l.tile_at(&r, &bad).unwrap_err().code(), "InadmissibleAddress");
    }

    #[test]
    fn sft_rows() {
        let m = sft_matrix(&lattes2x2());
        assert_eq!(m.alphabet.len(), 8);
        assert!(m.row_sums().iter().all(|&s| s == 4));
        assert!(m.strongly_connected && m.periodic.iter().all(|&b| b));
        let m = sft_matrix(&z2m1());
        assert_eq!(m.alphabet.len(), 4);
        assert!(m.row_sums().iter().all(|&s| s == 2));
    }

    #[test]
    fn ancestors_follow_addresses() {
        let r = lattes2x2();
        let tower = Tower::generate(&r, 3).unwrap();
        for t in 0..tower.top().tile_count() {
            for j in 0..=3 {
                let a = tower.ancestor(3, t, j);
                assert_eq!(tower.level(j).addresses[a], tower.top().addresses[t].truncate(j));
            }
        }
    }
}
