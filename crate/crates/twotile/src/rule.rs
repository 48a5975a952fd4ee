//! Two-tile subdivision rules: types, the text format, validation and labeling.

use std::collections::VecDeque;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cell_complex::{
    CellId, ComplexError, DirectedEdge, EdgeRecord, OrientedComplex, SignedEdgeId, TileRecord,
};

/// Which of the two 0-tiles a tile maps onto (its color) or sits in (its host).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub const BOTH: [Color; 2] = [Color::White, Color::Black];

    pub fn other(self) -> Self {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    /// 0 for white, 1 for black; also the index of the 0-tile.
    pub fn index(self) -> usize {
        match self {
            Color::White => 0,
            Color::Black => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Color::White => 'w',
            Color::Black => 'b',
        }
    }

    pub fn from_letter(s: &str) -> Option<Self> {
        match s {
            "w" => Some(Color::White),
            "b" => Some(Color::Black),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The minimal cell of the level-0 decomposition containing a cell's interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    TileInterior(Color),
    BoundaryEdge(usize),
    Corner(usize),
}

impl Location {
    /// Whether the location lies in the closed 0-tile of color `c`.
    pub fn in_closure_of(self, c: Color) -> bool {
        match self {
            Location::TileInterior(x) => x == c,
            _ => true,
        }
    }

    /// Whether the location lies on the closed 0-edge `l` of a `k`-gon.
    pub fn on_closed_edge(self, l: usize, k: usize) -> bool {
        match self {
            Location::BoundaryEdge(m) => m == l,
            Location::Corner(i) => i == l || i == (l + 1) % k,
            Location::TileInterior(_) => false,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::TileInterior(c) => write!(f, "tileint {c}"),
            Location::BoundaryEdge(l) => write!(f, "bedge {l}"),
            Location::Corner(i) => write!(f, "corner {i}"),
        }
    }
}

/// A validation finding, printed as `<code>: <message> [line N]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
    pub line: Option<usize>,
}

impl Diagnostic {
    fn new(code: &'static str, message: impl Into<String>, line: Option<usize>) -> Self {
        Self { code, message: message.into(), line }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)?;
        if let Some(line) = self.line {
            write!(f, " [line {line}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("syntax error at line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("invalid rule ({} diagnostic(s))", .0.len())]
    Invalid(Vec<Diagnostic>),
}

impl RuleError {
    /// The diagnostics in printable form; a syntax error yields one entry.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            RuleError::SyntaxError { line, message } => {
                vec![Diagnostic::new("SyntaxError", message.clone(), Some(*line))]
            }
            RuleError::Invalid(d) => d.clone(),
        }
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.diagnostics().iter().any(|d| d.code == code)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LabelingError {
    #[error("vertex {0} has a cycle of odd length {1}")]
    OddVertexCycle(CellId, usize),
    #[error("tile {0} has {1} edges, expected {2}")]
    NotKGon(CellId, usize, usize),
    #[error("an e-chain cycle through tile {0} has odd length")]
    ColorParityConflict(CellId),
    #[error("a closed edge path through vertex {0} has nonzero label sum")]
    LabelHolonomy(CellId),
    #[error("the base flag is not a positively-oriented flag of the complex")]
    BadBaseFlag,
}

impl LabelingError {
    pub fn code(&self) -> &'static str {
        match self {
            LabelingError::OddVertexCycle(..) => "OddVertexCycle",
            LabelingError::NotKGon(..) => "NotKGon",
            LabelingError::ColorParityConflict(_) => "ColorParityConflict",
            LabelingError::LabelHolonomy(_) => "LabelHolonomy",
            LabelingError::BadBaseFlag => "BadBaseFlag",
        }
    }
}

/// Labels of every cell: vertex and edge labels are residues mod k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    pub vertex_label: Vec<usize>,
    pub edge_label: Vec<usize>,
    pub tile_color: Vec<Color>,
}

/// A flag given by dense indices: a vertex, an edge at it, a tile containing the edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseFlag {
    pub vertex: usize,
    pub edge: usize,
    pub tile: usize,
}

/// Derives the unique labeling normalized so the base flag carries `(0, 0, white)`.
pub fn derive_labeling(
    complex: &OrientedComplex,
    k: usize,
    base: BaseFlag,
) -> Result<Labeling, LabelingError> {
    for t in 0..complex.tile_count() {
        let n = complex.boundary(t).len();
        if n != k {
            return Err(LabelingError::NotKGon(complex.tile_id(t), n, k));
        }
    }
    for v in 0..complex.vertex_count() {
        if complex.degree(v) % 2 == 1 {
            return Err(LabelingError::OddVertexCycle(complex.vertex_id(v), complex.degree(v)));
        }
    }
    if base.vertex >= complex.vertex_count()
        || base.edge >= complex.edge_count()
        || base.tile >= complex.tile_count()
        || complex.is_positive_flag(base.vertex, base.edge, base.tile) != Some(true)
    {
        return Err(LabelingError::BadBaseFlag);
    }

    let mut color: Vec<Option<Color>> = vec![None; complex.tile_count()];
    color[base.tile] = Some(Color::White);
    let mut queue = VecDeque::from([base.tile]);
    while let Some(t) = queue.pop_front() {
        let c = color[t].expect("queued tiles are colored");
        for &d in complex.boundary(t) {
            let u = complex.left_tile(d.reversed());
            match color[u] {
                None => {
                    color[u] = Some(c.other());
                    queue.push_back(u);
                }
                Some(x) if x == c => return Err(LabelingError::ColorParityConflict(complex.tile_id(u))),
                Some(_) => {}
            }
        }
    }
    let tile_color: Vec<Color> = color.into_iter().map(|c| c.expect("complex is connected")).collect();

    let alpha = |d: DirectedEdge| -> usize {
        if tile_color[complex.left_tile(d)] == Color::White {
            1
        } else {
            k - 1
        }
    };
    let mut label: Vec<Option<usize>> = vec![None; complex.vertex_count()];
    label[base.vertex] = Some(0);
    let mut queue = VecDeque::from([base.vertex]);
    while let Some(v) = queue.pop_front() {
        let lv = label[v].expect("queued vertices are labeled");
        for (w, d) in complex.neighbors(v) {
            let lw = (lv + alpha(d)) % k;
            match label[w] {
                None => {
                    label[w] = Some(lw);
                    queue.push_back(w);
                }
                Some(x) if x != lw => return Err(LabelingError::LabelHolonomy(complex.vertex_id(w))),
                Some(_) => {}
            }
        }
    }
    let vertex_label: Vec<usize> = label.into_iter().map(|l| l.expect("complex is connected")).collect();
    let edge_label = (0..complex.edge_count())
        .map(|e| {
            let d = DirectedEdge::new(e, true);
            let d = if tile_color[complex.left_tile(d)] == Color::White { d } else { d.reversed() };
            vertex_label[complex.tail(d)]
        })
        .collect();
    Ok(Labeling { vertex_label, edge_label, tile_color })
}

/// Checks the labeling axioms of a labeled complex, returning one message per violation.
///
/// Used both for rules and for generated levels.
pub fn check_labeling_axioms(
    complex: &OrientedComplex,
    k: usize,
    labels: &Labeling,
) -> Vec<(&'static str, String, Option<crate::cell_complex::CellRef>)> {
    use crate::cell_complex::CellRef;
    let mut out = Vec::new();
    for t in 0..complex.tile_count() {
        let walk = complex.boundary(t);
        if walk.len() != k {
            out.push(("NotKGon", format!("tile {} has {} edges, expected {k}", complex.tile_id(t), walk.len()), Some(CellRef::Tile(t))));
            continue;
        }
        let step = if labels.tile_color[t] == Color::White { 1 } else { k - 1 };
        let first = labels.vertex_label[complex.tail(walk[0])];
        let ordered = walk
            .iter()
            .enumerate()
            .all(|(j, &d)| labels.vertex_label[complex.tail(d)] == (first + j * step) % k);
        if !ordered {
            out.push((
                "BoundaryLabelOrder",
                format!(
                    "boundary labels of {} tile {} are not in {} order",
                    if step == 1 { "white" } else { "black" },
                    complex.tile_id(t),
                    if step == 1 { "cyclic" } else { "anti-cyclic" }
                ),
                Some(CellRef::Tile(t)),
            ));
        }
    }
    for v in 0..complex.vertex_count() {
        if complex.degree(v) % 2 == 1 {
            out.push(("OddVertexCycle", format!("vertex {} has a cycle of odd length {}", complex.vertex_id(v), complex.degree(v)), Some(CellRef::Vertex(v))));
        }
    }
    for e in 0..complex.edge_count() {
        let [a, b] = complex.edge_tiles(e);
        if labels.tile_color[a] == labels.tile_color[b] {
            out.push(("AdjacentSameColor", format!("tiles {} and {} share edge {} and have the same color", complex.tile_id(a), complex.tile_id(b), complex.edge_id(e)), Some(CellRef::Edge(e))));
        }
        let l = labels.edge_label[e];
        let [p, q] = complex.ends(e);
        let mut got = [labels.vertex_label[p], labels.vertex_label[q]];
        got.sort_unstable();
        let mut want = [l, (l + 1) % k];
        want.sort_unstable();
        if got != want {
            out.push(("EdgeEndpointLabelMismatch", format!("edge {} labeled {l} has endpoint labels {{{}, {}}}", complex.edge_id(e), got[0], got[1]), Some(CellRef::Edge(e))));
        }
    }
    let whites = labels.tile_color.iter().filter(|&&c| c == Color::White).count();
    if 2 * whites != complex.tile_count() {
        out.push(("ColorImbalance", format!("{whites} white tiles out of {}", complex.tile_count()), None));
    }
    for f in complex.flags().into_iter().filter(|f| f.positive) {
        let (lv, le) = (labels.vertex_label[f.vertex], labels.edge_label[f.edge]);
        let ok = match labels.tile_color[f.tile] {
            Color::White => lv == le,
            Color::Black => lv == (le + 1) % k,
        };
        if !ok {
            out.push((
                "FlagLabelMismatch",
                format!(
                    "positive flag (vertex {}, edge {}, tile {}) carries labels ({lv}, {le}, {})",
                    complex.vertex_id(f.vertex),
                    complex.edge_id(f.edge),
                    complex.tile_id(f.tile),
                    labels.tile_color[f.tile]
                ),
                Some(CellRef::Tile(f.tile)),
            ));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexDecl {
    pub id: CellId,
    pub label: i64,
    pub loc: Location,
    pub line: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeDecl {
    pub id: CellId,
    pub tail: CellId,
    pub head: CellId,
    pub label: i64,
    pub loc: Location,
    pub line: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileDecl {
    pub id: CellId,
    pub color: Color,
    pub host: Color,
    pub boundary: Vec<SignedEdgeId>,
    pub line: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseFlagDecl {
    pub vertex: CellId,
    pub edge: SignedEdgeId,
    pub tile: CellId,
    pub line: Option<usize>,
}

/// Unvalidated rule records, as parsed or as assembled by a fixture.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleDecl {
    pub name: String,
    pub k: usize,
    pub vertices: Vec<VertexDecl>,
    pub edges: Vec<EdgeDecl>,
    pub tiles: Vec<TileDecl>,
    pub base_flag: Option<BaseFlagDecl>,
}

fn syntax(line: usize, message: impl Into<String>) -> RuleError {
    RuleError::SyntaxError { line, message: message.into() }
}

fn parse_int<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T, RuleError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| syntax(line, format!("bad {what} `{tok}`")))
}

fn expect(tok: Option<&str>, word: &str, line: usize) -> Result<(), RuleError> {
    match tok {
        Some(t) if t == word => Ok(()),
        Some(t) => Err(syntax(line, format!("expected `{word}`, found `{t}`"))),
        None => Err(syntax(line, format!("expected `{word}`"))),
    }
}

fn parse_color(tok: Option<&str>, line: usize) -> Result<Color, RuleError> {
    let tok = tok.ok_or_else(|| syntax(line, "missing color"))?;
    Color::from_letter(tok).ok_or_else(|| syntax(line, format!("bad color `{tok}`")))
}

// Residues are reduced once k is known; the raw value is kept here.
fn parse_loc<'a>(toks: &mut impl Iterator<Item = &'a str>, line: usize) -> Result<(u8, i64, Color), RuleError> {
    match toks.next() {
        Some("tileint") => Ok((0, 0, parse_color(toks.next(), line)?)),
        Some("bedge") => Ok((1, parse_int(toks.next(), "edge residue", line)?, Color::White)),
        Some("corner") => Ok((2, parse_int(toks.next(), "corner residue", line)?, Color::White)),
        Some(t) => Err(syntax(line, format!("bad location kind `{t}`"))),
        None => Err(syntax(line, "missing location")),
    }
}

fn reduce(x: i64, k: usize) -> usize {
    x.rem_euclid(k as i64) as usize
}

impl RuleDecl {
    /// Parses the line-oriented rule format.
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut decl = RuleDecl::default();
        let mut raw_locs: Vec<(u8, i64, Color)> = Vec::new();
        let mut raw_edge_locs: Vec<(u8, i64, Color)> = Vec::new();
        let mut k: Option<i64> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let mut toks = content.split_whitespace();
            let Some(head) = toks.next() else { continue };
            match head {
                "rule" => {
                    decl.name = toks.next().ok_or_else(|| syntax(line, "missing rule name"))?.to_string();
                }
                "k" => k = Some(parse_int(toks.next(), "k", line)?),
                "vertex" => {
                    let id = parse_int(toks.next(), "vertex id", line)?;
                    expect(toks.next(), "label", line)?;
                    let label = parse_int(toks.next(), "label", line)?;
                    expect(toks.next(), "loc", line)?;
                    raw_locs.push(parse_loc(&mut toks, line)?);
                    decl.vertices.push(VertexDecl { id, label, loc: Location::Corner(0), line: Some(line) });
                }
                "edge" => {
                    let id = parse_int(toks.next(), "edge id", line)?;
                    expect(toks.next(), "tail", line)?;
                    let tail = parse_int(toks.next(), "tail id", line)?;
                    expect(toks.next(), "head", line)?;
                    let head = parse_int(toks.next(), "head id", line)?;
                    expect(toks.next(), "label", line)?;
                    let label = parse_int(toks.next(), "label", line)?;
                    expect(toks.next(), "loc", line)?;
                    let loc = parse_loc(&mut toks, line)?;
                    if loc.0 == 2 {
                        return Err(syntax(line, "an edge cannot be located at a corner"));
                    }
                    raw_edge_locs.push(loc);
                    decl.edges.push(EdgeDecl { id, tail, head, label, loc: Location::Corner(0), line: Some(line) });
                }
                "tile" => {
                    let id = parse_int(toks.next(), "tile id", line)?;
                    expect(toks.next(), "color", line)?;
                    let color = parse_color(toks.next(), line)?;
                    expect(toks.next(), "host", line)?;
                    let host = parse_color(toks.next(), line)?;
                    expect(toks.next(), "boundary", line)?;
                    let boundary = toks
                        .by_ref()
                        .map(|t| t.parse::<SignedEdgeId>().map_err(|m| syntax(line, m)))
                        .collect::<Result<Vec<_>, _>>()?;
                    decl.tiles.push(TileDecl { id, color, host, boundary, line: Some(line) });
                }
                "baseflag" => {
                    let vertex = parse_int(toks.next(), "vertex id", line)?;
                    let edge = toks
                        .next()
                        .ok_or_else(|| syntax(line, "missing edge"))?
                        .parse::<SignedEdgeId>()
                        .map_err(|m| syntax(line, m))?;
                    let tile = parse_int(toks.next(), "tile id", line)?;
                    decl.base_flag = Some(BaseFlagDecl { vertex, edge, tile, line: Some(line) });
                }
                other => return Err(syntax(line, format!("unknown directive `{other}`"))),
            }
            if let Some(extra) = toks.next() {
                return Err(syntax(line, format!("unexpected token `{extra}`")));
            }
        }
        let k = k.ok_or_else(|| syntax(text.lines().count().max(1), "missing `k` line"))?;
        if k < 1 {
            return Err(RuleError::Invalid(vec![Diagnostic::new("BadK", format!("k = {k} must be at least 3"), None)]));
        }
        decl.k = k as usize;
        let to_loc = |(kind, x, c): (u8, i64, Color)| match kind {
            0 => Location::TileInterior(c),
            1 => Location::BoundaryEdge(reduce(x, k as usize)),
            _ => Location::Corner(reduce(x, k as usize)),
        };
        for (v, raw) in decl.vertices.iter_mut().zip(raw_locs) {
            v.loc = to_loc(raw);
        }
        for (e, raw) in decl.edges.iter_mut().zip(raw_edge_locs) {
            e.loc = to_loc(raw);
        }
        Ok(decl)
    }

    /// Deletes an edge and merges its two tiles into one.
    pub fn remove_edge(&mut self, edge: CellId) {
        let mut merged = Vec::new();
        self.tiles.retain(|t| {
            if t.boundary.iter().any(|s| s.id == edge) {
                merged.push(t.clone());
                false
            } else {
                true
            }
        });
        self.edges.retain(|e| e.id != edge);
        let mut walk = Vec::new();
        for t in &merged {
            let b = &t.boundary;
            let i = b.iter().position(|s| s.id == edge).unwrap();
            walk.extend((1..b.len()).map(|j| b[(i + j) % b.len()]));
        }
        let first = merged[0].clone();
        self.tiles.push(TileDecl { boundary: walk, ..first });
    }

    /// Canonical text form; parsing it back yields the same records.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rule {}", self.name);
        let _ = writeln!(s, "k {}", self.k);
        for v in &self.vertices {
            let _ = writeln!(s, "vertex {} label {} loc {}", v.id, v.label, v.loc);
        }
        for e in &self.edges {
            let _ = writeln!(s, "edge {} tail {} head {} label {} loc {}", e.id, e.tail, e.head, e.label, e.loc);
        }
        for t in &self.tiles {
            let b: Vec<String> = t.boundary.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "tile {} color {} host {} boundary {}", t.id, t.color, t.host, b.join(" "));
        }
        if let Some(f) = &self.base_flag {
            let _ = writeln!(s, "baseflag {} {} {}", f.vertex, f.edge, f.tile);
        }
        s
    }
}

/// The sub-complex of D¹ hosted in one 0-tile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub host: Color,
    pub interior_vertices: Vec<usize>,
    pub interior_edges: Vec<usize>,
    pub tiles: Vec<usize>,
}

/// A validated two-tile subdivision rule.
#[derive(Clone, Debug)]
pub struct SubdivisionRule {
    name: String,
    k: usize,
    d1: OrientedComplex,
    labels: Labeling,
    vertex_loc: Vec<Location>,
    edge_loc: Vec<Location>,
    tile_host: Vec<Color>,
    base_vertex: Vec<usize>,
    base_flag: BaseFlag,
    // s_l as directed D¹ edges from base_vertex(l) to base_vertex(l+1)
    paths: Vec<Vec<DirectedEdge>>,
    // position along s_l: path-vertex index for vertices, edge index for edges
    vertex_pos: Vec<usize>,
    edge_pos: Vec<usize>,
    templates: [Template; 2],
    template_slot: Vec<usize>,
    edge_template_slot: Vec<usize>,
    vertex_template_slot: Vec<usize>,
}

/// `(w₁, b₁, w′₁, b′₁)`: tiles counted by (host, color) = (w,w), (w,b), (b,w), (b,b).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileCounts {
    pub ww: u64,
    pub wb: u64,
    pub bw: u64,
    pub bb: u64,
    pub deg: u64,
}

impl TileCounts {
    /// Tiles of color `color` inside the 0-tile `host`.
    pub fn get(&self, host: Color, color: Color) -> u64 {
        match (host, color) {
            (Color::White, Color::White) => self.ww,
            (Color::White, Color::Black) => self.wb,
            (Color::Black, Color::White) => self.bw,
            (Color::Black, Color::Black) => self.bb,
        }
    }

    /// Number of tiles hosted in `host`.
    pub fn hosted(&self, host: Color) -> u64 {
        self.get(host, Color::White) + self.get(host, Color::Black)
    }
}

impl SubdivisionRule {
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        Self::from_decl(&RuleDecl::parse(text)?)
    }

    /// Validates the records; every violated axiom yields a named diagnostic.
    pub fn from_decl(decl: &RuleDecl) -> Result<Self, RuleError> {
        let k = decl.k;
        let invalid = |d: Vec<Diagnostic>| Err(RuleError::Invalid(d));
        if k < 3 {
            return invalid(vec![Diagnostic::new("BadK", format!("k = {k} must be at least 3"), None)]);
        }
        let vline = |id: CellId| decl.vertices.iter().find(|v| v.id == id).and_then(|v| v.line);
        let eline = |id: CellId| decl.edges.iter().find(|e| e.id == id).and_then(|e| e.line);
        let tline = |id: CellId| decl.tiles.iter().find(|t| t.id == id).and_then(|t| t.line);

        let vertex_ids: Vec<CellId> = decl.vertices.iter().map(|v| v.id).collect();
        let edges: Vec<EdgeRecord> =
            decl.edges.iter().map(|e| EdgeRecord { id: e.id, tail: e.tail, head: e.head }).collect();
        let tiles: Vec<TileRecord> =
            decl.tiles.iter().map(|t| TileRecord { id: t.id, boundary: t.boundary.clone() }).collect();
        let d1 = match OrientedComplex::build(&vertex_ids, &edges, &tiles) {
            Ok(c) => c,
            Err(errs) => {
                let diags = errs
                    .into_iter()
                    .map(|e| {
                        let line = match &e {
                            ComplexError::DuplicateId { kind: "vertex", id } => vline(*id),
                            ComplexError::DuplicateId { kind: "edge", id } => eline(*id),
                            ComplexError::DuplicateId { id, .. } => tline(*id),
                            ComplexError::EdgeUsedTwiceSameDirection { second, .. } => tline(*second),
                            ComplexError::EdgeUsageCountNot2 { edge, .. } => eline(*edge),
                            ComplexError::NonSimpleBoundaryWalk { tile, .. } => tline(*tile),
                            ComplexError::NonManifoldVertex { vertex } => vline(*vertex),
                            _ => None,
                        };
                        Diagnostic::new(e.code(), e.to_string(), line)
                    })
                    .collect();
                return invalid(diags);
            }
        };

        let mut diags = Vec::new();
        let nt = d1.tile_count();
        if nt <= 2 {
            diags.push(Diagnostic::new("TooFewTiles", format!("D¹ has {nt} tiles, need more than 2"), None));
        } else if nt % 2 == 1 {
            diags.push(Diagnostic::new("OddTileCount", format!("D¹ has an odd number {nt} of tiles"), None));
        }
        if !diags.is_empty() {
            return invalid(diags);
        }

        let labels = Labeling {
            vertex_label: decl.vertices.iter().map(|v| reduce(v.label, k)).collect(),
            edge_label: decl.edges.iter().map(|e| reduce(e.label, k)).collect(),
            tile_color: decl.tiles.iter().map(|t| t.color).collect(),
        };
        let cell_line = |c: Option<crate::cell_complex::CellRef>| {
            use crate::cell_complex::CellRef;
            match c {
                Some(CellRef::Vertex(v)) => decl.vertices[v].line,
                Some(CellRef::Edge(e)) => decl.edges[e].line,
                Some(CellRef::Tile(t)) => decl.tiles[t].line,
                None => None,
            }
        };
        for (code, message, cell) in check_labeling_axioms(&d1, k, &labels) {
            diags.push(Diagnostic::new(code, message, cell_line(cell)));
        }

        let vertex_loc: Vec<Location> = decl.vertices.iter().map(|v| v.loc).collect();
        let edge_loc: Vec<Location> = decl.edges.iter().map(|e| e.loc).collect();
        let tile_host: Vec<Color> = decl.tiles.iter().map(|t| t.host).collect();

        let counts = count_pairs(&labels.tile_color, &tile_host, nt as u64 / 2);
        if counts.wb == 0 || counts.bw == 0 {
            diags.push(Diagnostic::new(
                "DegenerateCounts",
                format!("need b₁ ≥ 1 and w′₁ ≥ 1, found b₁ = {} and w′₁ = {}", counts.wb, counts.bw),
                None,
            ));
        }

        // corners
        let mut base_vertex = vec![usize::MAX; k];
        for (v, loc) in vertex_loc.iter().enumerate() {
            if let Location::Corner(i) = *loc {
                if base_vertex[i] != usize::MAX {
                    diags.push(Diagnostic::new("CornerLocation", format!("two vertices are located at corner {i}"), decl.vertices[v].line));
                }
                base_vertex[i] = v;
            }
        }
        if let Some(i) = base_vertex.iter().position(|&v| v == usize::MAX) {
            diags.push(Diagnostic::new("CornerLocation", format!("no vertex is located at corner {i}"), None));
            return invalid(diags);
        }

        // tiles lie in the closure of their host; shared edges respect hosts
        for t in 0..nt {
            let host = tile_host[t];
            for &d in d1.boundary(t) {
                let (v, e) = (d1.tail(d), d.edge);
                if !vertex_loc[v].in_closure_of(host) || !edge_loc[e].in_closure_of(host) {
                    diags.push(Diagnostic::new(
                        "HostClosure",
                        format!("tile {} hosted in {host} has a boundary cell located outside that 0-tile", d1.tile_id(t)),
                        decl.tiles[t].line,
                    ));
                    break;
                }
            }
        }
        for e in 0..d1.edge_count() {
            let [a, b] = d1.edge_tiles(e);
            let same = tile_host[a] == tile_host[b];
            match edge_loc[e] {
                Location::TileInterior(_) if !same => diags.push(Diagnostic::new(
                    "HostMismatch",
                    format!("edge {} is interior to a 0-tile but its tiles have different hosts", d1.edge_id(e)),
                    decl.edges[e].line,
                )),
                Location::BoundaryEdge(_) if same => diags.push(Diagnostic::new(
                    "HostMismatch",
                    format!("edge {} lies on a 0-edge but its tiles have the same host", d1.edge_id(e)),
                    decl.edges[e].line,
                )),
                _ => {}
            }
        }

        // boundary paths s_l
        let mut paths = Vec::with_capacity(k);
        let mut vertex_pos = vec![usize::MAX; d1.vertex_count()];
        let mut edge_pos = vec![usize::MAX; d1.edge_count()];
        for l in 0..k {
            match trace_boundary_path(&d1, &vertex_loc, &edge_loc, &base_vertex, l, k) {
                Ok(path) => {
                    for (j, d) in path.iter().enumerate() {
                        edge_pos[d.edge] = j;
                        vertex_pos[d1.head(*d)] = j + 1;
                        if j == 0 {
                            vertex_pos[d1.tail(*d)] = 0;
                        }
                        if tile_host[d1.left_tile(*d)] != Color::White {
                            diags.push(Diagnostic::new(
                                "BoundaryOrientation",
                                format!("the tile on the left of edge {} along s_{l} is not hosted in the white 0-tile", d1.edge_id(d.edge)),
                                decl.edges[d.edge].line,
                            ));
                        }
                    }
                    paths.push(path);
                }
                Err(message) => diags.push(Diagnostic::new("BoundaryPath", message, None)),
            }
        }

        let base = match &decl.base_flag {
            None => {
                diags.push(Diagnostic::new("MissingBaseFlag", "no baseflag line", None));
                None
            }
            Some(f) => match (d1.vertex_by_id(f.vertex), d1.edge_by_id(f.edge.id), d1.tile_by_id(f.tile)) {
                (Some(vertex), Some(edge), Some(tile)) => {
                    let dart = DirectedEdge::new(edge, f.edge.forward);
                    if d1.tail(dart) != vertex || d1.left_tile(dart) != tile {
                        diags.push(Diagnostic::new("BadBaseFlag", "base flag is not positively oriented", f.line));
                        None
                    } else {
                        Some(BaseFlag { vertex, edge, tile })
                    }
                }
                _ => {
                    diags.push(Diagnostic::new("DanglingReference", "base flag references an undeclared cell", f.line));
                    None
                }
            },
        };
        if let Some(b) = base {
            let line = decl.base_flag.as_ref().and_then(|f| f.line);
            if labels.vertex_label[b.vertex] != 0 || labels.edge_label[b.edge] != 0 || labels.tile_color[b.tile] != Color::White {
                diags.push(Diagnostic::new("BaseFlagLabels", "the base flag must carry labels (0, 0, w)", line));
            }
            if diags.is_empty() {
                match derive_labeling(&d1, k, b) {
                    Ok(derived) if derived == labels => {}
                    Ok(_) => diags.push(Diagnostic::new("LabelMismatch", "stored labels differ from the labeling derived at the base flag", line)),
                    Err(e) => diags.push(Diagnostic::new(e.code(), e.to_string(), line)),
                }
            }
        }
        if !diags.is_empty() {
            return invalid(diags);
        }

        let templates = Color::BOTH.map(|c| Template {
            host: c,
            interior_vertices: (0..d1.vertex_count()).filter(|&v| vertex_loc[v] == Location::TileInterior(c)).collect(),
            interior_edges: (0..d1.edge_count()).filter(|&e| edge_loc[e] == Location::TileInterior(c)).collect(),
            tiles: (0..nt).filter(|&t| tile_host[t] == c).collect(),
        });
        let slots = |items: &dyn Fn(&Template) -> &Vec<usize>, n: usize| {
            let mut slot = vec![usize::MAX; n];
            for t in &templates {
                for (j, &x) in items(t).iter().enumerate() {
                    slot[x] = j;
                }
            }
            slot
        };
        let template_slot = slots(&|t| &t.tiles, nt);
        let edge_template_slot = slots(&|t| &t.interior_edges, d1.edge_count());
        let vertex_template_slot = slots(&|t| &t.interior_vertices, d1.vertex_count());

        Ok(Self {
            name: decl.name.clone(),
            k,
            d1,
            labels,
            vertex_loc,
            edge_loc,
            tile_host,
            base_vertex,
            base_flag: base.expect("checked above"),
            paths,
            vertex_pos,
            edge_pos,
            templates,
            template_slot,
            edge_template_slot,
            vertex_template_slot,
        })
    }

    /// The records of this rule in canonical order.
    pub fn to_decl(&self) -> RuleDecl {
        let d1 = &self.d1;
        RuleDecl {
            name: self.name.clone(),
            k: self.k,
            vertices: (0..d1.vertex_count())
                .map(|v| VertexDecl {
                    id: d1.vertex_id(v),
                    label: self.labels.vertex_label[v] as i64,
                    loc: self.vertex_loc[v],
                    line: None,
                })
                .collect(),
            edges: d1
                .edge_records()
                .into_iter()
                .enumerate()
                .map(|(e, r)| EdgeDecl {
                    id: r.id,
                    tail: r.tail,
                    head: r.head,
                    label: self.labels.edge_label[e] as i64,
                    loc: self.edge_loc[e],
                    line: None,
                })
                .collect(),
            tiles: (0..d1.tile_count())
                .map(|t| TileDecl {
                    id: d1.tile_id(t),
                    color: self.labels.tile_color[t],
                    host: self.tile_host[t],
                    boundary: d1.signed_boundary(t),
                    line: None,
                })
                .collect(),
            base_flag: Some(BaseFlagDecl {
                vertex: d1.vertex_id(self.base_flag.vertex),
                edge: SignedEdgeId {
                    id: d1.edge_id(self.base_flag.edge),
                    forward: d1.left_tile(DirectedEdge::new(self.base_flag.edge, true)) == self.base_flag.tile
                        && d1.tail(DirectedEdge::new(self.base_flag.edge, true)) == self.base_flag.vertex,
                },
                tile: d1.tile_id(self.base_flag.tile),
                line: None,
            }),
        }
    }

    pub fn to_text(&self) -> String {
        self.to_decl().to_text()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn deg(&self) -> usize {
        self.d1.tile_count() / 2
    }

    pub fn d1(&self) -> &OrientedComplex {
        &self.d1
    }

    pub fn labels(&self) -> &Labeling {
        &self.labels
    }

    pub fn vertex_label(&self, v: usize) -> usize {
        self.labels.vertex_label[v]
    }

    pub fn edge_label(&self, e: usize) -> usize {
        self.labels.edge_label[e]
    }

    pub fn tile_color(&self, t: usize) -> Color {
        self.labels.tile_color[t]
    }

    pub fn vertex_loc(&self, v: usize) -> Location {
        self.vertex_loc[v]
    }

    pub fn edge_loc(&self, e: usize) -> Location {
        self.edge_loc[e]
    }

    pub fn tile_host(&self, t: usize) -> Color {
        self.tile_host[t]
    }

    pub fn base_vertex(&self, i: usize) -> usize {
        self.base_vertex[i % self.k]
    }

    pub fn base_flag(&self) -> BaseFlag {
        self.base_flag
    }

    /// The subdivision `s_l` of 0-edge `l`, from `base_vertex(l)` to `base_vertex(l+1)`.
    pub fn boundary_path(&self, l: usize) -> &[DirectedEdge] {
        &self.paths[l % self.k]
    }

    /// Index along its boundary path of a vertex located on a 0-edge or corner.
    pub fn vertex_path_position(&self, v: usize) -> usize {
        self.vertex_pos[v]
    }

    /// Index along its boundary path of an edge located on a 0-edge.
    pub fn edge_path_position(&self, e: usize) -> usize {
        self.edge_pos[e]
    }

    pub fn template(&self, host: Color) -> &Template {
        &self.templates[host.index()]
    }

    /// Position of a D¹ tile within its host template.
    pub fn template_slot(&self, t: usize) -> usize {
        self.template_slot[t]
    }

    /// Position of an interior D¹ edge within its host template.
    pub fn edge_template_slot(&self, e: usize) -> usize {
        self.edge_template_slot[e]
    }

    /// Position of an interior D¹ vertex within its host template.
    pub fn vertex_template_slot(&self, v: usize) -> usize {
        self.vertex_template_slot[v]
    }

    pub fn counts(&self) -> TileCounts {
        let c = count_pairs(&self.labels.tile_color, &self.tile_host, self.deg() as u64);
        debug_assert_eq!(c.ww + c.bw, c.deg);
        debug_assert_eq!(c.wb + c.bb, c.deg);
        c
    }
}

fn count_pairs(color: &[Color], host: &[Color], deg: u64) -> TileCounts {
    let mut c = TileCounts { ww: 0, wb: 0, bw: 0, bb: 0, deg };
    for (&col, &h) in color.iter().zip(host) {
        match (h, col) {
            (Color::White, Color::White) => c.ww += 1,
            (Color::White, Color::Black) => c.wb += 1,
            (Color::Black, Color::White) => c.bw += 1,
            (Color::Black, Color::Black) => c.bb += 1,
        }
    }
    c
}

fn trace_boundary_path(
    d1: &OrientedComplex,
    vertex_loc: &[Location],
    edge_loc: &[Location],
    base_vertex: &[usize],
    l: usize,
    k: usize,
) -> Result<Vec<DirectedEdge>, String> {
    let on_l = Location::BoundaryEdge(l);
    let total = edge_loc.iter().filter(|&&x| x == on_l).count();
    let (start, end) = (base_vertex[l], base_vertex[(l + 1) % k]);
    let mut path = Vec::new();
    let mut used = vec![false; d1.edge_count()];
    let mut v = start;
    loop {
        let steps: Vec<DirectedEdge> = d1
            .rotation(v)
            .iter()
            .copied()
            .filter(|d| edge_loc[d.edge] == on_l && !used[d.edge])
            .collect();
        if v == end && !path.is_empty() {
            if !steps.is_empty() {
                return Err(format!("s_{l} continues past corner {}", (l + 1) % k));
            }
            break;
        }
        match steps.as_slice() {
            [d] => {
                used[d.edge] = true;
                path.push(*d);
                v = d1.head(*d);
                if v != end && vertex_loc[v] != on_l {
                    return Err(format!(
                        "s_{l} passes through vertex {} which is not located on 0-edge {l}",
                        d1.vertex_id(v)
                    ));
                }
            }
            [] => return Err(format!("s_{l} does not reach corner {} from corner {l}", (l + 1) % k)),
            _ => return Err(format!("s_{l} branches at vertex {}", d1.vertex_id(v))),
        }
    }
    if path.len() != total {
        return Err(format!("{} edges located on 0-edge {l} are not on the path s_{l}", total - path.len()));
    }
    let on_path = path.len() - 1;
    let located = vertex_loc.iter().filter(|&&x| x == on_l).count();
    if located != on_path {
        return Err(format!("{} vertices located on 0-edge {l} are not on the path s_{l}", located - on_path));
    }
    Ok(path)
}

/// Canonical level-0 records: two k-gons glued along their boundary.
pub fn pillow_decl(k: usize) -> RuleDecl {
    let vertices = (0..k)
        .map(|i| VertexDecl { id: i as CellId, label: i as i64, loc: Location::Corner(i), line: None })
        .collect();
    let edges = (0..k)
        .map(|l| EdgeDecl {
            id: l as CellId,
            tail: l as CellId,
            head: ((l + 1) % k) as CellId,
            label: l as i64,
            loc: Location::BoundaryEdge(l),
            line: None,
        })
        .collect();
    let white = TileDecl {
        id: 0,
        color: Color::White,
        host: Color::White,
        boundary: (0..k).map(|l| SignedEdgeId { id: l as CellId, forward: true }).collect(),
        line: None,
    };
    let black = TileDecl {
        id: 1,
        color: Color::Black,
        host: Color::Black,
        boundary: (0..k).rev().map(|l| SignedEdgeId { id: l as CellId, forward: false }).collect(),
        line: None,
    };
    RuleDecl {
        name: format!("pillow{k}"),
        k,
        vertices,
        edges,
        tiles: vec![white, black],
        base_flag: Some(BaseFlagDecl { vertex: 0, edge: SignedEdgeId { id: 0, forward: true }, tile: 0, line: None }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pillow_complex(k: usize) -> OrientedComplex {
        let decl = pillow_decl(k);
        let vids: Vec<CellId> = decl.vertices.iter().map(|v| v.id).collect();
        let edges: Vec<EdgeRecord> = decl.edges.iter().map(|e| EdgeRecord { id: e.id, tail: e.tail, head: e.head }).collect();
        let tiles: Vec<TileRecord> = decl.tiles.iter().map(|t| TileRecord { id: t.id, boundary: t.boundary.clone() }).collect();
        OrientedComplex::build(&vids, &edges, &tiles).unwrap()
    }

    #[test]
    fn pillow_labeling_is_canonical() {
        for k in 3..8 {
            let c = pillow_complex(k);
            let lab = derive_labeling(&c, k, BaseFlag { vertex: 0, edge: 0, tile: 0 }).unwrap();
            assert_eq!(lab.vertex_label, (0..k).collect::<Vec<_>>());
            assert_eq!(lab.edge_label, (0..k).collect::<Vec<_>>());
            assert_eq!(lab.tile_color, vec![Color::White, Color::Black]);
            assert!(check_labeling_axioms(&c, k, &lab).is_empty());
        }
    }

    #[test]
    fn negative_base_flag_is_rejected() {
        let c = pillow_complex(4);
        // vertex 1 is the head of edge 0 in the white tile: negative flag
        let err = derive_labeling(&c, 4, BaseFlag { vertex: 1, edge: 0, tile: 0 }).unwrap_err();
        assert_eq!(err, LabelingError::BadBaseFlag);
    }

    #[test]
    fn pillow_is_not_a_rule() {
        let err = SubdivisionRule::from_decl(&pillow_decl(4)).unwrap_err();
        assert!(err.has_code("TooFewTiles"));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = RuleDecl::parse("rule x\nk 4\nvertex 0 label 0 loc nowhere\n").unwrap_err();
        assert_eq!(err, RuleError::SyntaxError { line: 3, message: "bad location kind `nowhere`".into() });
        let err = RuleDecl::parse("rule x\nvertex 0 label 0 loc corner 0\n").unwrap_err();
        assert!(matches!(err, RuleError::SyntaxError { .. }));
        let err = RuleDecl::parse("k 3\nfoo\n").unwrap_err();
        assert_eq!(err.diagnostics()[0].to_string(), "SyntaxError: unknown directive `foo` [line 2]");
    }

    #[test]
    fn comments_and_residues() {
        let decl = RuleDecl::parse("# header\nrule p # name\nk 3\nvertex 7 label -1 loc corner 5\n").unwrap();
        assert_eq!(decl.vertices[0].label, -1);
        assert_eq!(decl.vertices[0].loc, Location::Corner(2));
    }

    #[test]
    fn decl_text_round_trip() {
        let decl = pillow_decl(5);
        let text = decl.to_text();
        assert_eq!(RuleDecl::parse(&text).unwrap().to_text(), text);
    }

    #[test]
    fn location_predicates() {
        assert!(Location::Corner(0).on_closed_edge(3, 4));
        assert!(Location::Corner(0).on_closed_edge(0, 4));
        assert!(!Location::Corner(2).on_closed_edge(0, 4));
        assert!(!Location::TileInterior(Color::White).in_closure_of(Color::Black));
        assert!(Location::BoundaryEdge(1).in_closure_of(Color::Black));
    }
}
