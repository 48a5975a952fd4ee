//! Candidate invariant curves in a 1-skeleton and the iterative edge
//! replacement construction of the curves `C^n`.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::cell_complex::{DirectedEdge, OrientedComplex, SignedEdgeId};
use crate::engine::{subdivide, tile_count_at, EngineError, LevelComplex, DEFAULT_MAX_TILES};
use crate::metrics::mask_joins;
use crate::rule::{Color, Location, SubdivisionRule};

/// Default cap on the number of curves returned by a search.
pub const DEFAULT_MAX_CURVES: usize = 10_000;
/// Default cap on search steps.
pub const DEFAULT_MAX_STEPS: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("invalid replacement spec: {0}")]
    InvalidSpec(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("curves from levels {0} and {1} compared")]
    LevelMismatch(usize, usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl CurveError {
    pub fn code(&self) -> &'static str {
        match self {
            CurveError::InvalidSpec(_) => "InvalidSpec",
            CurveError::ResourceLimit(_) => "ResourceLimit",
            CurveError::LevelMismatch(..) => "LevelMismatch",
            CurveError::Engine(e) => e.code(),
        }
    }
}

/// A closed edge walk in the 1-skeleton of one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    pub level: usize,
    pub walk: Vec<DirectedEdge>,
}

impl Curve {
    /// Tails of the walk's edges, in order.
    pub fn vertices(&self, c: &OrientedComplex) -> Vec<usize> {
        self.walk.iter().map(|&d| c.tail(d)).collect()
    }

    pub fn is_closed(&self, c: &OrientedComplex) -> bool {
        !self.walk.is_empty() && (0..self.walk.len()).all(|i| c.head(self.walk[i]) == c.tail(self.walk[(i + 1) % self.walk.len()]))
    }

    /// Closed with no repeated vertex.
    pub fn is_simple(&self, c: &OrientedComplex) -> bool {
        let vs = self.vertices(c);
        self.is_closed(c) && vs.iter().collect::<BTreeSet<_>>().len() == vs.len()
    }

    /// Signed edge ids of the walk.
    pub fn signed_ids(&self, c: &OrientedComplex) -> Vec<SignedEdgeId> {
        self.walk.iter().map(|d| SignedEdgeId { id: c.edge_id(d.edge), forward: d.forward }).collect()
    }

    /// Splits the walk at the given vertices, which it must visit in order.
    pub fn arcs(&self, c: &OrientedComplex, corners: &[usize]) -> Option<Vec<Vec<DirectedEdge>>> {
        let start = self.walk.iter().position(|&d| c.tail(d) == corners[0])?;
        let mut arcs = vec![Vec::new()];
        for i in 0..self.walk.len() {
            let d = self.walk[(start + i) % self.walk.len()];
            arcs.last_mut().expect("nonempty").push(d);
            let h = c.head(d);
            if i + 1 < self.walk.len() && corners.contains(&h) {
                if corners.get(arcs.len()) != Some(&h) {
                    return None;
                }
                arcs.push(Vec::new());
            }
        }
        (arcs.len() == corners.len()).then_some(arcs)
    }
}

/// The replacement arc of one 0-edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replacement {
    /// `None` when the arc is the boundary path `s_l` itself.
    pub host: Option<Color>,
    /// D¹ darts from `base_vertex(l)` to `base_vertex(l+1)`.
    pub path: Vec<DirectedEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplacementSpec {
    pub arcs: Vec<Replacement>,
}

impl ReplacementSpec {
    /// Every arc is its own boundary path.
    pub fn identity(rule: &SubdivisionRule) -> Self {
        Self { arcs: (0..rule.k()).map(|l| Replacement { host: None, path: rule.boundary_path(l).to_vec() }).collect() }
    }

    /// Parses lines `beta <l> host (w|b|boundary) path <±eid ...>` and validates.
    pub fn parse(text: &str, rule: &SubdivisionRule) -> Result<Self, CurveError> {
        let mut arcs: Vec<Option<Replacement>> = vec![None; rule.k()];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| CurveError::InvalidSpec(format!("line {}: {m}", i + 1));
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() < 6 || tok[0] != "beta" || tok[2] != "host" || tok[4] != "path" {
                return Err(bad("expected `beta <l> host (w|b|boundary) path <edges>`"));
            }
            let l: usize = tok[1].parse().map_err(|_| bad("bad edge label"))?;
            if l >= rule.k() {
                return Err(bad("edge label out of range"));
            }
            let host = match tok[3] {
                "boundary" => None,
                s => Some(Color::from_letter(s).ok_or_else(|| bad("host must be w, b or boundary"))?),
            };
            let path = tok[5..]
                .iter()
                .map(|s| {
                    let se: SignedEdgeId = s.parse().map_err(|_| bad("bad signed edge id"))?;
                    let e = rule.d1().edge_by_id(se.id).ok_or_else(|| bad("unknown edge id"))?;
                    Ok(DirectedEdge::new(e, se.forward))
                })
                .collect::<Result<Vec<_>, CurveError>>()?;
            if arcs[l].replace(Replacement { host, path }).is_some() {
                return Err(bad("duplicate arc"));
            }
        }
        let arcs = arcs
            .into_iter()
            .enumerate()
            .map(|(l, a)| a.ok_or_else(|| CurveError::InvalidSpec(format!("no arc for edge label {l}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = Self { arcs };
        spec.validate(rule)?;
        Ok(spec)
    }

    pub fn to_text(&self, rule: &SubdivisionRule) -> String {
        let d1 = rule.d1();
        let mut s = String::new();
        for (l, a) in self.arcs.iter().enumerate() {
            let host = a.host.map_or("boundary".to_string(), |c| c.letter().to_string());
            let path: Vec<String> =
                a.path.iter().map(|d| SignedEdgeId { id: d1.edge_id(d.edge), forward: d.forward }.to_string()).collect();
            s.push_str(&format!("beta {l} host {host} path {}\n", path.join(" ")));
        }
        s
    }

    pub fn validate(&self, rule: &SubdivisionRule) -> Result<(), CurveError> {
        self.validate_arcs(rule)?;
        let all: Vec<DirectedEdge> = self.arcs.iter().flat_map(|a| a.path.iter().copied()).collect();
        if !(Curve { level: 1, walk: all }).is_simple(rule.d1()) {
            return Err(CurveError::InvalidSpec("the arcs do not form a simple closed curve".into()));
        }
        Ok(())
    }

    /// Checks each arc on its own, without requiring the arcs to form a simple curve.
    pub fn validate_arcs(&self, rule: &SubdivisionRule) -> Result<(), CurveError> {
        let d1 = rule.d1();
        let k = rule.k();
        let bad = |l: usize, m: &str| Err(CurveError::InvalidSpec(format!("arc {l}: {m}")));
        if self.arcs.len() != k {
            return Err(CurveError::InvalidSpec(format!("expected {k} arcs, found {}", self.arcs.len())));
        }
        for (l, a) in self.arcs.iter().enumerate() {
            if a.path.is_empty() || a.path.iter().any(|d| d.edge >= d1.edge_count()) {
                return bad(l, "empty path or unknown edge");
            }
            if d1.tail(a.path[0]) != rule.base_vertex(l) || d1.head(*a.path.last().expect("nonempty")) != rule.base_vertex((l + 1) % k) {
                return bad(l, "path does not run between the base vertices of its edge");
            }
            if a.path.windows(2).any(|w| d1.head(w[0]) != d1.tail(w[1])) {
                return bad(l, "path is not connected");
            }
            match a.host {
                None if a.path != rule.boundary_path(l) => return bad(l, "host boundary requires the boundary path"),
                None => {}
                Some(c) => {
                    let inside = a.path.iter().all(|d| rule.edge_loc(d.edge).in_closure_of(c))
                        && a.path.iter().all(|&d| rule.vertex_loc(d1.head(d)).in_closure_of(c));
                    if !inside {
                        return bad(l, &format!("path leaves the closed {c} 0-tile"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.arcs.iter().all(|a| a.host.is_none())
    }
}

/// Derives a spec from a simple closed walk in D¹ through the base vertices in order.
pub fn spec_from_curve(rule: &SubdivisionRule, walk: &[DirectedEdge]) -> Result<ReplacementSpec, CurveError> {
    let d1 = rule.d1();
    let corners: Vec<usize> = (0..rule.k()).map(|i| rule.base_vertex(i)).collect();
    let curve = Curve { level: 1, walk: walk.to_vec() };
    let reversed = Curve { level: 1, walk: walk.iter().rev().map(|d| d.reversed()).collect() };
    let arcs = curve
        .arcs(d1, &corners)
        .or_else(|| reversed.arcs(d1, &corners))
        .ok_or_else(|| CurveError::InvalidSpec("the curve does not visit the base vertices in order".into()))?;
    let arcs = arcs
        .into_iter()
        .enumerate()
        .map(|(l, path)| {
            if path == rule.boundary_path(l) {
                return Ok(Replacement { host: None, path });
            }
            let interior = path
                .iter()
                .map(|d| rule.edge_loc(d.edge))
                .chain(path.iter().map(|&d| rule.vertex_loc(d1.head(d))))
                .find_map(|loc| match loc {
                    Location::TileInterior(c) => Some(c),
                    _ => None,
                });
            let host = interior.ok_or_else(|| CurveError::InvalidSpec(format!("arc {l} runs on the boundary but is not s_{l}")))?;
            Ok(Replacement { host: Some(host), path })
        })
        .collect::<Result<Vec<_>, CurveError>>()?;
    let spec = ReplacementSpec { arcs };
    spec.validate(rule)?;
    Ok(spec)
}

/// Non-identity specs derived from filtered single-host candidates of D¹.
pub fn candidate_specs(rule: &SubdivisionRule, max_curves: usize) -> Result<Vec<ReplacementSpec>, CurveError> {
    let marked: Vec<usize> = (0..rule.k()).map(|i| rule.base_vertex(i)).collect();
    let opts = SearchOptions { max_curves, ..SearchOptions::single_host(rule, true) };
    let found = find_candidate_curves_with(rule.d1(), &marked, &opts)?;
    Ok(found.curves.iter().filter_map(|c| spec_from_curve(rule, c).ok()).filter(|s| !s.is_identity()).collect())
}

/// Outcome of a candidate search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSearch {
    pub curves: Vec<Vec<DirectedEdge>>,
    pub truncated: bool,
}

struct Search<'a> {
    c: &'a OrientedComplex,
    marked: &'a [usize],
    is_marked: Vec<bool>,
    k: usize,
    filter: bool,
    vertex_tiles: Vec<Vec<usize>>,
    tile_mask: Vec<u64>,
    visited: Vec<bool>,
    path: Vec<DirectedEdge>,
    out: Vec<Vec<DirectedEdge>>,
    max_curves: usize,
    steps: u64,
    max_steps: u64,
    locations: Option<&'a (Vec<Location>, Vec<Location>)>,
    arc_host: Vec<Option<Color>>,
}

impl Search<'_> {
    // The host of the current arc after adding edge `e` and vertex `w`, or `Err` if it would have two.
    fn next_host(&self, e: usize, w: usize) -> Result<Option<Color>, ()> {
        let mut host = *self.arc_host.last().expect("nonempty");
        if let Some((vl, el)) = self.locations {
            for loc in [el[e], vl[w]] {
                if let Location::TileInterior(c) = loc {
                    match host {
                        Some(h) if h != c => return Err(()),
                        _ => host = Some(c),
                    }
                }
            }
        }
        Ok(host)
    }

    fn pair_ok(&self, mask: u64, arcs_known: usize) -> bool {
        if self.k == 3 {
            return mask != 0b111;
        }
        let closed = arcs_known == self.k;
        for i in 0..self.k {
            for j in i + 2..self.k {
                if mask >> i & 1 == 1 && mask >> j & 1 == 1 && !(closed && i == 0 && j == self.k - 1) {
                    return false;
                }
            }
        }
        true
    }

    // Marks the tiles at `v` as meeting the given arcs; returns the undo log and whether the filter still holds.
    fn touch(&mut self, v: usize, bits: u64, arcs_known: usize) -> (Vec<(usize, u64)>, bool) {
        let mut log = Vec::new();
        let mut ok = true;
        if !self.filter {
            return (log, ok);
        }
        for i in 0..self.vertex_tiles[v].len() {
            let t = self.vertex_tiles[v][i];
            log.push((t, self.tile_mask[t]));
            self.tile_mask[t] |= bits;
            ok &= self.pair_ok(self.tile_mask[t], arcs_known);
        }
        (log, ok)
    }

    fn undo(&mut self, log: Vec<(usize, u64)>) {
        for (t, m) in log.into_iter().rev() {
            self.tile_mask[t] = m;
        }
    }

    // Every unvisited marked vertex and the start remain reachable from `v`.
    fn reachable(&self, v: usize) -> bool {
        let mut seen = vec![false; self.c.vertex_count()];
        let mut queue = VecDeque::from([v]);
        seen[v] = true;
        let start = self.marked[0];
        let mut start_seen = false;
        while let Some(x) = queue.pop_front() {
            for (y, _) in self.c.neighbors(x) {
                if y == start {
                    start_seen = true;
                }
                if !seen[y] && !self.visited[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        start_seen && self.marked.iter().all(|&m| self.visited[m] || seen[m])
    }

    fn dfs(&mut self, v: usize, arc: usize, marked_seen: usize) -> Result<(), CurveError> {
        self.steps += 1;
        if self.steps > self.max_steps {
            return Err(CurveError::ResourceLimit(format!("search exceeded {} steps", self.max_steps)));
        }
        let start = self.marked[0];
        let rotation: Vec<DirectedEdge> = self.c.rotation(v).to_vec();
        for d in rotation {
            if self.out.len() >= self.max_curves {
                return Ok(());
            }
            let w = self.c.head(d);
            if w == start {
                if self.next_host(d.edge, w).is_err() {
                    continue;
                }
                if marked_seen == self.k && self.path.len() >= 2 && self.path[0].edge < d.edge {
                    let (log, ok) = self.touch(start, 1 << (self.k - 1), self.k);
                    if ok {
                        let mut cycle = self.path.clone();
                        cycle.push(d);
                        self.out.push(cycle);
                    }
                    self.undo(log);
                }
                continue;
            }
            if self.visited[w] || self.path.iter().any(|p| p.edge == d.edge) {
                continue;
            }
            let (next_arc, bits) = if self.is_marked[w] { (arc + 1, (1 << arc) | (1 << (arc + 1))) } else { (arc, 1 << arc) };
            if self.is_marked[w] && next_arc >= self.k {
                continue;
            }
            let Ok(host) = self.next_host(d.edge, w) else { continue };
            let seen = marked_seen + usize::from(self.is_marked[w]);
            let (log, ok) = self.touch(w, bits, next_arc + 1);
            self.visited[w] = true;
            if ok && self.reachable(w) {
                self.path.push(d);
                *self.arc_host.last_mut().expect("nonempty") = host;
                if self.is_marked[w] {
                    self.arc_host.push(None);
                }
                let saved = self.arc_host.clone();
                self.dfs(w, next_arc, seen)?;
                self.arc_host = saved;
                if self.is_marked[w] {
                    self.arc_host.pop();
                }
                self.path.pop();
            }
            self.visited[w] = false;
            self.undo(log);
        }
        Ok(())
    }
}

/// Options of a candidate search.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub require_no_tile_joins: bool,
    /// Vertex and edge locations; when given, each arc between marked vertices
    /// must stay in the closure of one 0-tile.
    pub single_host: Option<(Vec<Location>, Vec<Location>)>,
    pub max_curves: usize,
    pub max_steps: u64,
}

impl SearchOptions {
    /// Options restricting arcs to single 0-tiles of a rule's D¹.
    pub fn single_host(rule: &SubdivisionRule, require_no_tile_joins: bool) -> Self {
        let d1 = rule.d1();
        let vl = (0..d1.vertex_count()).map(|v| rule.vertex_loc(v)).collect();
        let el = (0..d1.edge_count()).map(|e| rule.edge_loc(e)).collect();
        Self { require_no_tile_joins, single_host: Some((vl, el)), max_curves: DEFAULT_MAX_CURVES, max_steps: DEFAULT_MAX_STEPS }
    }
}

/// Simple cycles through all marked vertices, each reported once, starting at `marked[0]`.
pub fn find_candidate_curves(
    c: &OrientedComplex,
    marked: &[usize],
    require_no_tile_joins: bool,
    max_curves: usize,
    max_steps: u64,
) -> Result<CandidateSearch, CurveError> {
    let opts = SearchOptions { require_no_tile_joins, single_host: None, max_curves, max_steps };
    find_candidate_curves_with(c, marked, &opts)
}

pub fn find_candidate_curves_with(c: &OrientedComplex, marked: &[usize], opts: &SearchOptions) -> Result<CandidateSearch, CurveError> {
    let (require_no_tile_joins, max_curves, max_steps) = (opts.require_no_tile_joins, opts.max_curves, opts.max_steps);
    let k = marked.len();
    if !(2..=64).contains(&k) {
        return Err(CurveError::InvalidSpec(format!("{k} marked vertices")));
    }
    let mut is_marked = vec![false; c.vertex_count()];
    for &m in marked {
        is_marked[m] = true;
    }
    let vertex_tiles = (0..c.vertex_count()).map(|v| c.vertex_tiles(v).collect::<BTreeSet<_>>().into_iter().collect()).collect();
    let mut s = Search {
        c,
        marked,
        is_marked,
        k,
        filter: require_no_tile_joins,
        vertex_tiles,
        tile_mask: vec![0; c.tile_count()],
        visited: vec![false; c.vertex_count()],
        path: Vec::new(),
        out: Vec::new(),
        max_curves,
        steps: 0,
        max_steps,
        locations: opts.single_host.as_ref(),
        arc_host: vec![None],
    };
    s.visited[marked[0]] = true;
    let (_, ok) = s.touch(marked[0], 1, 1);
    if ok {
        s.dfs(marked[0], 0, 1)?;
    }
    let truncated = s.out.len() >= max_curves;
    Ok(CandidateSearch { curves: s.out, truncated })
}

/// Whether some tile meets non-adjacent arcs (all three arcs when `k = 3`) of a curve split at `corners`.
pub fn tile_joins_arcs(c: &OrientedComplex, arcs: &[Vec<DirectedEdge>]) -> bool {
    let k = arcs.len();
    let mut vertex_mask = vec![0u64; c.vertex_count()];
    for (i, arc) in arcs.iter().enumerate() {
        for &d in arc {
            vertex_mask[c.tail(d)] |= 1 << i;
            vertex_mask[c.head(d)] |= 1 << i;
        }
    }
    (0..c.tile_count()).any(|t| mask_joins(c.tile_vertices(t).fold(0, |m, v| m | vertex_mask[v]), k))
}

/// Checks of one replacement step `C^n → C^{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepReport {
    pub level: usize,
    pub length: usize,
    pub jordan: bool,
    pub through_base_vertices: bool,
    /// Each new edge lies in an `n`-tile meeting `C^n`.
    pub containment: bool,
    /// Each edge of `C^n` meets an `n`-tile containing part of `C^{n+1}`.
    pub converse: bool,
    /// `C^{n+1}` and `C^n` pass through the same `n`-vertices.
    pub vertex_agreement: bool,
}

impl StepReport {
    pub fn ok(&self) -> bool {
        self.jordan && self.through_base_vertices && self.containment && self.converse && self.vertex_agreement
    }
}

#[derive(Clone, Debug)]
pub struct Iteration {
    pub curves: Vec<Curve>,
    pub steps: Vec<StepReport>,
    /// Level at which the walk stopped being simple.
    pub non_jordan_at: Option<usize>,
    /// Per level: whether some tile joins opposite sides of `(C^n, base vertices)`.
    pub tile_joins: Vec<bool>,
}

/// One replacement step on consecutive levels.
pub fn replace_step(rule: &SubdivisionRule, spec: &ReplacementSpec, parent: &LevelComplex, child: &LevelComplex, curve: &Curve) -> Curve {
    let pc = &parent.complex;
    let lin = child.lineage.as_ref().expect("child level has lineage");
    let mut walk = Vec::new();
    for &alpha in &curve.walk {
        let l = parent.labels.edge_label[alpha.edge];
        let from_l_end = pc.tail(alpha) == parent.oriented_ends(alpha.edge)[0];
        let arc = &spec.arcs[l];
        let mut piece: Vec<DirectedEdge> = match arc.host {
            None => {
                let first = lin.edge_blocks[alpha.edge].1;
                rule.boundary_path(l).iter().enumerate().map(|(j, d)| DirectedEdge::new(first + j, d.forward)).collect()
            }
            Some(c) => {
                let x = pc.edge_tiles(alpha.edge).into_iter().find(|&t| parent.tile_color(t) == c).expect("edges separate colors");
                arc.path.iter().map(|d| DirectedEdge::new(child.template_edge_copy(parent, rule, x, d.edge), d.forward)).collect()
            }
        };
        if !from_l_end {
            piece = piece.into_iter().rev().map(|d| d.reversed()).collect();
        }
        walk.extend(piece);
    }
    Curve { level: curve.level + 1, walk }
}

/// Compares consecutive curves; `child` must be the subdivision of `parent`.
pub fn step_report(parent: &LevelComplex, child: &LevelComplex, before: &Curve, after: &Curve) -> Result<StepReport, CurveError> {
    if before.level != parent.level || after.level != child.level || child.level != parent.level + 1 {
        return Err(CurveError::LevelMismatch(before.level, after.level));
    }
    let (pc, cc) = (&parent.complex, &child.complex);
    let lin = child.lineage.as_ref().expect("child level has lineage");
    let on_before: BTreeSet<usize> = before.vertices(pc).into_iter().collect();
    let after_vertices = after.vertices(cc);
    let meets_before = |t: usize| pc.tile_vertices(t).any(|v| on_before.contains(&v));
    let mut hosts = BTreeSet::new();
    let mut containment = true;
    for d in &after.walk {
        let tiles: Vec<usize> = match lin.edge_parent[d.edge] {
            crate::cell_complex::CellRef::Edge(a) => pc.edge_tiles(a).to_vec(),
            crate::cell_complex::CellRef::Tile(x) => vec![x],
            crate::cell_complex::CellRef::Vertex(_) => Vec::new(),
        };
        containment &= tiles.iter().any(|&t| meets_before(t));
        hosts.extend(tiles);
    }
    let host_vertices: BTreeSet<usize> = hosts.iter().flat_map(|&t| pc.tile_vertices(t)).collect();
    let converse = before.walk.iter().all(|d| pc.ends(d.edge).iter().any(|v| host_vertices.contains(v)));
    let old: BTreeSet<usize> = after_vertices.iter().copied().filter(|&v| v < pc.vertex_count()).collect();
    let all: BTreeSet<usize> = after_vertices.iter().copied().collect();
    Ok(StepReport {
        level: child.level,
        length: after.walk.len(),
        jordan: after.is_simple(cc),
        through_base_vertices: (0..child.k).all(|v| all.contains(&v)),
        containment,
        converse,
        vertex_agreement: old == on_before,
    })
}

/// The one-tile Hausdorff bound between consecutive curves, as (containment, converse).
pub fn curve_hausdorff_proxy(parent: &LevelComplex, child: &LevelComplex, before: &Curve, after: &Curve) -> Result<(bool, bool), CurveError> {
    let r = step_report(parent, child, before, after)?;
    Ok((r.containment, r.converse))
}

fn joins_at(level: &LevelComplex, curve: &Curve) -> bool {
    let corners: Vec<usize> = (0..level.k).collect();
    match curve.arcs(&level.complex, &corners) {
        Some(arcs) => tile_joins_arcs(&level.complex, &arcs),
        None => true,
    }
}

/// Runs the replacement construction up to level `n`, stopping at the first non-simple curve.
pub fn iterate_curve(rule: &SubdivisionRule, spec: &ReplacementSpec, n: usize) -> Result<Iteration, CurveError> {
    iterate_curve_capped(rule, spec, n, DEFAULT_MAX_TILES)
}

pub fn iterate_curve_capped(rule: &SubdivisionRule, spec: &ReplacementSpec, n: usize, max_tiles: u64) -> Result<Iteration, CurveError> {
    spec.validate(rule)?;
    iterate_unchecked(rule, spec, n, max_tiles)
}

/// Runs the construction for a spec whose arcs are individually valid but
/// may not form a simple curve; such a spec fails at the first step.
pub fn iterate_curve_relaxed(rule: &SubdivisionRule, spec: &ReplacementSpec, n: usize) -> Result<Iteration, CurveError> {
    spec.validate_arcs(rule)?;
    iterate_unchecked(rule, spec, n, DEFAULT_MAX_TILES)
}

fn iterate_unchecked(rule: &SubdivisionRule, spec: &ReplacementSpec, n: usize, max_tiles: u64) -> Result<Iteration, CurveError> {
    let tiles = tile_count_at(rule, n);
    if tiles > max_tiles {
        return Err(EngineError::ResourceLimit { level: n, tiles, cap: max_tiles }.into());
    }
    let mut level = LevelComplex::level_zero(rule);
    let c0 = Curve { level: 0, walk: (0..rule.k()).map(|l| DirectedEdge::new(l, true)).collect() };
    let mut out = Iteration { tile_joins: vec![joins_at(&level, &c0)], curves: vec![c0], steps: Vec::new(), non_jordan_at: None };
    for _ in 0..n {
        let child = subdivide(&level, rule)?;
        let before = out.curves.last().expect("nonempty");
        let after = replace_step(rule, spec, &level, &child, before);
        let report = step_report(&level, &child, before, &after)?;
        let jordan = report.jordan;
        out.tile_joins.push(!jordan || joins_at(&child, &after));
        out.steps.push(report);
        out.curves.push(after);
        if !jordan {
            out.non_jordan_at = Some(child.level);
            break;
        }
        level = child;
    }
    Ok(out)
}

/// The first level `n ≤ max_n` at which no `n`-tile joins opposite sides of `C^n`.
pub fn expansion_for_spec(rule: &SubdivisionRule, spec: &ReplacementSpec, max_n: usize) -> Result<Option<usize>, CurveError> {
    let it = iterate_curve(rule, spec, max_n)?;
    Ok(it.tile_joins.iter().position(|&j| !j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::generate;
    use crate::fixtures::{all_rule_fixtures, grid, lattes2x2, z2m1, z4rays_skeleton};

    #[test]
    fn z4rays_has_no_curve() {
        let s = z4rays_skeleton();
        let found = find_candidate_curves(&s.complex, &s.marked, false, 10, 1_000_000).unwrap();
        assert!(found.curves.is_empty() && !found.truncated);
    }

    #[test]
    fn lattes_boundary_is_a_candidate() {
        let r = lattes2x2();
        let d1 = r.d1();
        let marked: Vec<usize> = (0..4).map(|i| r.base_vertex(i)).collect();
        let found = find_candidate_curves(d1, &marked, false, DEFAULT_MAX_CURVES, DEFAULT_MAX_STEPS).unwrap();
        let boundary: Vec<DirectedEdge> = (0..4).flat_map(|l| r.boundary_path(l).to_vec()).collect();
        let as_set = |w: &[DirectedEdge]| w.iter().map(|d| d.edge).collect::<BTreeSet<_>>();
        assert!(found.curves.iter().any(|c| as_set(c) == as_set(&boundary)));
        for c in &found.curves {
            assert!(Curve { level: 1, walk: c.clone() }.is_simple(d1));
        }
    }

    #[test]
    fn candidates_are_unique() {
        let r = lattes2x2();
        let marked: Vec<usize> = (0..4).map(|i| r.base_vertex(i)).collect();
        let found = find_candidate_curves(r.d1(), &marked, false, DEFAULT_MAX_CURVES, DEFAULT_MAX_STEPS).unwrap();
        let sets: BTreeSet<BTreeSet<usize>> = found.curves.iter().map(|c| c.iter().map(|d| d.edge).collect()).collect();
        assert_eq!(sets.len(), found.curves.len());
    }

    #[test]
    fn filtered_candidates_pass_the_filter() {
        let r = grid(3, 3).unwrap();
        let marked: Vec<usize> = (0..4).map(|i| r.base_vertex(i)).collect();
        let all = find_candidate_curves(r.d1(), &marked, false, 2000, DEFAULT_MAX_STEPS).unwrap();
        let filtered = find_candidate_curves(r.d1(), &marked, true, 2000, DEFAULT_MAX_STEPS).unwrap();
        assert!(!filtered.curves.is_empty());
        let d1 = r.d1();
        for c in &filtered.curves {
            let curve = Curve { level: 1, walk: c.clone() };
            let start = marked[0];
            let order: Vec<usize> = curve.vertices(d1).into_iter().filter(|v| marked.contains(v)).collect();
            assert_eq!(order[0], start);
            let arcs = curve.arcs(d1, &order).unwrap();
            assert!(!tile_joins_arcs(d1, &arcs));
        }
        // the unfiltered search finds the same curves plus joining ones
        let unfiltered_ok = all
            .curves
            .iter()
            .filter(|c| {
                let curve = Curve { level: 1, walk: (*c).clone() };
                let order: Vec<usize> = curve.vertices(d1).into_iter().filter(|v| marked.contains(v)).collect();
                !tile_joins_arcs(d1, &curve.arcs(d1, &order).unwrap())
            })
            .count();
        if !all.truncated && !filtered.truncated {
            assert_eq!(unfiltered_ok, filtered.curves.len());
        }
    }

    #[test]
    fn search_budget() {
        let r = grid(3, 3).unwrap();
        let marked: Vec<usize> = (0..4).map(|i| r.base_vertex(i)).collect();
        assert_eq!(find_candidate_curves(r.d1(), &marked, false, 10, 5).unwrap_err().code(), "ResourceLimit");
        let some = find_candidate_curves(r.d1(), &marked, false, 3, DEFAULT_MAX_STEPS).unwrap();
        assert!(some.truncated && some.curves.len() == 3);
    }

    #[test]
    fn identity_iteration() {
        for (_, r) in all_rule_fixtures() {
            let spec = ReplacementSpec::identity(&r);
            let it = iterate_curve(&r, &spec, 2).unwrap();
            assert!(it.non_jordan_at.is_none());
            assert!(it.steps.iter().all(|s| s.ok()), "{}", r.name());
            let top = generate(&r, 2).unwrap();
            // C^n is the subdivided boundary: the n-edges located on 0-edges
            let on_c = (0..top.complex.edge_count()).filter(|&e| matches!(top.edge_loc0[e], Location::BoundaryEdge(_))).count();
            assert_eq!(it.curves[2].walk.len(), on_c);
        }
    }

    #[test]
    fn identity_expansion() {
        assert_eq!(expansion_for_spec(&lattes2x2(), &ReplacementSpec::identity(&lattes2x2()), 3).unwrap(), Some(1));
        assert_eq!(expansion_for_spec(&z2m1(), &ReplacementSpec::identity(&z2m1()), 5).unwrap(), None);
    }

    #[test]
    fn spec_text_round_trip() {
        let r = grid(2, 3).unwrap();
        let spec = ReplacementSpec::identity(&r);
        assert_eq!(ReplacementSpec::parse(&spec.to_text(&r), &r).unwrap(), spec);
        assert_eq!(ReplacementSpec::parse("beta 0 host q path +1", &r).unwrap_err().code(), "InvalidSpec");
    }

    #[test]
    fn wrong_host_is_invalid() {
        let r = grid(5, 5).unwrap();
        let spec = candidate_specs(&r, 200).unwrap().remove(0);
        let mut bad = spec.clone();
        let l = bad.arcs.iter().position(|a| a.host.is_some()).unwrap();
        bad.arcs[l].host = bad.arcs[l].host.map(Color::other);
        assert_eq!(bad.validate(&r).unwrap_err().code(), "InvalidSpec");
        let mut bad = spec;
        bad.arcs[l].host = None;
        assert_eq!(bad.validate(&r).unwrap_err().code(), "InvalidSpec");
    }

    // Simple paths between the base vertices of edge `l` inside the closed 0-tile `host`.
    fn hosted_paths(r: &SubdivisionRule, l: usize, host: Color) -> Vec<Vec<DirectedEdge>> {
        fn go(r: &SubdivisionRule, host: Color, v: usize, target: usize, path: &mut Vec<DirectedEdge>, seen: &mut Vec<bool>, out: &mut Vec<Vec<DirectedEdge>>) {
            if v == target {
                out.push(path.clone());
                return;
            }
            for (w, d) in r.d1().neighbors(v).collect::<Vec<_>>() {
                if !seen[w] && r.edge_loc(d.edge).in_closure_of(host) && (w == target || matches!(r.vertex_loc(w), Location::TileInterior(_) | Location::BoundaryEdge(_))) {
                    seen[w] = true;
                    path.push(d);
                    go(r, host, w, target, path, seen, out);
                    path.pop();
                    seen[w] = false;
                }
            }
        }
        let mut out = Vec::new();
        let mut seen = vec![false; r.d1().vertex_count()];
        let s = r.base_vertex(l);
        seen[s] = true;
        go(r, host, s, r.base_vertex((l + 1) % r.k()), &mut Vec::new(), &mut seen, &mut out);
        out
    }

    #[test]
    fn touching_arcs_give_a_non_jordan_step() {
        let r = grid(3, 3).unwrap();
        let identity = ReplacementSpec::identity(&r);
        let mut engineered = None;
        'search: for p0 in hosted_paths(&r, 0, Color::White) {
            for p2 in hosted_paths(&r, 2, Color::White) {
                let mut spec = identity.clone();
                spec.arcs[0] = Replacement { host: Some(Color::White), path: p0.clone() };
                spec.arcs[2] = Replacement { host: Some(Color::White), path: p2 };
                let v0: BTreeSet<usize> = p0.iter().map(|&d| r.d1().head(d)).collect();
                let touches = spec.arcs[2].path.iter().any(|&d| v0.contains(&r.d1().head(d)));
                if touches && spec.validate_arcs(&r).is_ok() {
                    engineered = Some(spec);
                    break 'search;
                }
            }
        }
        let spec = engineered.expect("grid 3x3 has touching hosted arcs");
        assert_eq!(spec.validate(&r).unwrap_err().code(), "InvalidSpec");
        let it = iterate_curve_relaxed(&r, &spec, 3).unwrap();
        assert_eq!(it.non_jordan_at, Some(1));
        assert!(!it.steps[0].jordan);
        assert_eq!(it.curves.len(), 2);
    }

    #[test]
    fn grid_spec_iterates() {
        let r = grid(5, 5).unwrap();
        let spec = candidate_specs(&r, 50).unwrap().remove(0);
        let it = iterate_curve(&r, &spec, 2).unwrap();
        assert!(it.non_jordan_at.is_none() && it.steps.iter().all(StepReport::ok));
        assert!(expansion_for_spec(&r, &spec, 2).unwrap().is_some());
    }
}
