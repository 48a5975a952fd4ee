//! JSON export of level complexes, Tutte embeddings of the two 0-tiles and
//! two-panel SVG rendering.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell_complex::{DirectedEdge, OrientedComplex, SignedEdgeId};
use crate::engine::{Address, LevelComplex};
use crate::rule::{Color, Labeling, Location, SubdivisionRule};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RenderError {
    #[error("solver did not converge, residual {0}")]
    SolverDidNotConverge(f64),
    #[error("malformed export: {0}")]
    BadExport(String),
    #[error("export was made for rule `{found}`, not `{expected}`")]
    WrongRule { expected: String, found: String },
}

impl RenderError {
    pub fn code(&self) -> &'static str {
        match self {
            RenderError::SolverDidNotConverge(_) => "SolverDidNotConverge",
            RenderError::BadExport(_) => "BadExport",
            RenderError::WrongRule { .. } => "WrongRule",
        }
    }
}

/// A location as serialized: `{"t":"tile","c":"w"}`, `{"t":"edge","l":2}` or `{"t":"corner","i":0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "t")]
pub enum LocExport {
    #[serde(rename = "tile")]
    Tile { c: char },
    #[serde(rename = "edge")]
    Edge { l: usize },
    #[serde(rename = "corner")]
    Corner { i: usize },
}

impl From<Location> for LocExport {
    fn from(loc: Location) -> Self {
        match loc {
            Location::TileInterior(c) => LocExport::Tile { c: c.letter() },
            Location::BoundaryEdge(l) => LocExport::Edge { l },
            Location::Corner(i) => LocExport::Corner { i },
        }
    }
}

impl LocExport {
    fn to_location(self) -> Option<Location> {
        Some(match self {
            LocExport::Tile { c } => Location::TileInterior(Color::from_letter(&c.to_string())?),
            LocExport::Edge { l } => Location::BoundaryEdge(l),
            LocExport::Corner { i } => Location::Corner(i),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexExport {
    pub id: u32,
    pub label: usize,
    pub loc: LocExport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeExport {
    pub id: u32,
    pub tail: u32,
    pub head: u32,
    pub label: usize,
    pub loc: LocExport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileExport {
    pub id: u32,
    pub color: char,
    pub loc0: char,
    pub boundary: Vec<String>,
    /// The root color followed by D¹ tile ids.
    pub address: Vec<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexExport {
    pub rule: String,
    pub level: usize,
    pub k: usize,
    pub deg: usize,
    pub vertices: Vec<VertexExport>,
    pub edges: Vec<EdgeExport>,
    pub tiles: Vec<TileExport>,
}

pub fn export_level(level: &LevelComplex, rule: &SubdivisionRule) -> ComplexExport {
    let c = &level.complex;
    let d1 = rule.d1();
    ComplexExport {
        rule: level.rule_name.clone(),
        level: level.level,
        k: level.k,
        deg: level.deg,
        vertices: (0..c.vertex_count())
            .map(|v| VertexExport { id: c.vertex_id(v), label: level.labels.vertex_label[v], loc: level.vertex_loc0[v].into() })
            .collect(),
        edges: (0..c.edge_count())
            .map(|e| {
                let [t, h] = c.ends(e);
                EdgeExport {
                    id: c.edge_id(e),
                    tail: c.vertex_id(t),
                    head: c.vertex_id(h),
                    label: level.labels.edge_label[e],
                    loc: level.edge_loc0[e].into(),
                }
            })
            .collect(),
        tiles: (0..c.tile_count())
            .map(|t| {
                let a = &level.addresses[t];
                let mut address = vec![serde_json::Value::from(a.root.letter().to_string())];
                address.extend(a.letters.iter().map(|&x| serde_json::Value::from(d1.tile_id(x))));
                TileExport {
                    id: c.tile_id(t),
                    color: level.tile_color(t).letter(),
                    loc0: level.tile_loc0[t].letter(),
                    boundary: c.signed_boundary(t).iter().map(|s| s.to_string()).collect(),
                    address,
                }
            })
            .collect(),
    }
}

pub fn export_json(level: &LevelComplex, rule: &SubdivisionRule) -> String {
    let mut s = serde_json::to_string_pretty(&export_level(level, rule)).expect("exports serialize");
    s.push('\n');
    s
}

/// Rebuilds a level complex from an export; parent links are not stored and come back empty.
pub fn import_level(export: &ComplexExport, rule: &SubdivisionRule) -> Result<LevelComplex, RenderError> {
    if export.rule != rule.name() || export.k != rule.k() || export.deg != rule.deg() {
        return Err(RenderError::WrongRule { expected: rule.name().to_string(), found: export.rule.clone() });
    }
    let bad = |m: String| RenderError::BadExport(m);
    let index = |id: u32, n: usize, kind: &str| -> Result<usize, RenderError> {
        let i = id as usize;
        if i < n {
            Ok(i)
        } else {
            Err(bad(format!("{kind} id {id} is not dense")))
        }
    };
    let nv = export.vertices.len();
    let ne = export.edges.len();
    for (i, v) in export.vertices.iter().enumerate() {
        if v.id as usize != i {
            return Err(bad(format!("vertex {i} has id {}", v.id)));
        }
    }
    let mut ends = Vec::with_capacity(ne);
    for (i, e) in export.edges.iter().enumerate() {
        if e.id as usize != i {
            return Err(bad(format!("edge {i} has id {}", e.id)));
        }
        ends.push([index(e.tail, nv, "vertex")?, index(e.head, nv, "vertex")?]);
    }
    let mut boundaries = Vec::new();
    let mut tile_color = Vec::new();
    let mut tile_loc0 = Vec::new();
    let mut addresses = Vec::new();
    for (i, t) in export.tiles.iter().enumerate() {
        if t.id as usize != i {
            return Err(bad(format!("tile {i} has id {}", t.id)));
        }
        let walk = t
            .boundary
            .iter()
            .map(|s| {
                let se: SignedEdgeId = s.parse().map_err(|_| bad(format!("bad signed edge `{s}`")))?;
                Ok(DirectedEdge::new(index(se.id, ne, "edge")?, se.forward))
            })
            .collect::<Result<Vec<_>, RenderError>>()?;
        boundaries.push(walk);
        let color = |ch: char| Color::from_letter(&ch.to_string()).ok_or_else(|| bad(format!("bad color `{ch}`")));
        tile_color.push(color(t.color)?);
        tile_loc0.push(color(t.loc0)?);
        let root = t.address.first().and_then(|v| v.as_str()).and_then(Color::from_letter).ok_or_else(|| bad("bad address root".into()))?;
        let letters = t.address[1..]
            .iter()
            .map(|v| v.as_u64().and_then(|id| rule.d1().tile_by_id(id as u32)).ok_or_else(|| bad("bad address letter".into())))
            .collect::<Result<Vec<_>, _>>()?;
        addresses.push(Address { root, letters });
    }
    let complex = OrientedComplex::from_indices(nv, ends, boundaries)
        .map_err(|errs| bad(errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")))?;
    let loc = |l: LocExport| l.to_location().ok_or_else(|| bad("bad location".into()));
    let level = LevelComplex {
        level: export.level,
        k: export.k,
        deg: export.deg,
        rule_name: export.rule.clone(),
        complex,
        labels: Labeling {
            vertex_label: export.vertices.iter().map(|v| v.label).collect(),
            edge_label: export.edges.iter().map(|e| e.label).collect(),
            tile_color,
        },
        vertex_loc0: export.vertices.iter().map(|v| loc(v.loc)).collect::<Result<_, _>>()?,
        edge_loc0: export.edges.iter().map(|e| loc(e.loc)).collect::<Result<_, _>>()?,
        tile_loc0,
        addresses,
        lineage: None,
    };
    level.self_check(rule).map_err(|e| bad(e.to_string()))?;
    Ok(level)
}

/// Planar coordinates of the vertices in one closed 0-tile.
#[derive(Clone, Debug)]
pub struct Embedding<F> {
    pub panel: Color,
    /// Coordinates per level vertex; `None` outside the panel.
    pub coords: Vec<Option<[F; 2]>>,
    /// Tiles of the panel in index order.
    pub tiles: Vec<usize>,
    /// Maximal distance of an interior vertex from the mean of its neighbors.
    pub residual: F,
    pub min_signed_area: F,
    /// Pairs of interior vertices closer than `1e-7` of the panel diameter.
    pub coincident_pairs: usize,
}

impl<F: Float> Embedding<F> {
    pub fn polygon(&self, level: &LevelComplex, t: usize) -> Vec<[F; 2]> {
        level.complex.tile_vertices(t).map(|v| self.coords[v].expect("panel vertex")).collect()
    }
}

fn signed_area<F: Float>(pts: &[[F; 2]]) -> F {
    let n = pts.len();
    let two = F::one() + F::one();
    (0..n).fold(F::zero(), |acc, i| {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        acc + (a[0] * b[1] - b[0] * a[1])
    }) / two
}

// Boundary vertices of the closed 0-edge `l`, from corner `l` to corner `l+1`.
fn edge_chain(level: &LevelComplex, l: usize) -> Vec<usize> {
    let c = &level.complex;
    let mut chain = vec![l];
    let mut prev_edge = usize::MAX;
    while chain.len() == 1 || *chain.last().expect("nonempty") != (l + 1) % level.k {
        let v = *chain.last().expect("nonempty");
        let d = c
            .rotation(v)
            .iter()
            .find(|d| d.edge != prev_edge && level.edge_loc0[d.edge] == Location::BoundaryEdge(l))
            .expect("0-edges are subdivided into paths");
        prev_edge = d.edge;
        chain.push(c.head(*d));
    }
    chain
}

/// Tutte embedding of one 0-tile: its boundary on the unit circle with corner `i`
/// at angle `±2πi/k`, interior vertices at the mean of their neighbors.
pub fn tutte_embed<F: Float>(level: &LevelComplex, panel: Color) -> Result<Embedding<F>, RenderError> {
    let c = &level.complex;
    let k = level.k;
    let nv = c.vertex_count();
    let sign = if panel == Color::White { 1.0 } else { -1.0 };
    let cst = |x: f64| F::from(x).expect("float conversion");
    let mut coords: Vec<Option<[F; 2]>> = vec![None; nv];
    for l in 0..k {
        let chain = edge_chain(level, l);
        let m = (chain.len() - 1) as f64;
        for (j, &v) in chain.iter().enumerate() {
            let theta = sign * 2.0 * PI * (l as f64 + j as f64 / m) / k as f64;
            coords[v] = Some([cst(theta.cos()), cst(theta.sin())]);
        }
    }
    let interior: Vec<usize> = (0..nv).filter(|&v| level.vertex_loc0[v] == Location::TileInterior(panel)).collect();
    let mut slot = vec![usize::MAX; nv];
    for (i, &v) in interior.iter().enumerate() {
        slot[v] = i;
    }
    let n = interior.len();
    let neighbors: Vec<Vec<usize>> = interior.iter().map(|&v| c.neighbors(v).map(|(u, _)| u).collect()).collect();
    let mut x = vec![[F::zero(); 2]; n];
    let tol = cst(1e-13).max(F::epsilon() * cst(16.0));
    for axis in 0..2 {
        // L x = b with L = deg·I − A restricted to interior vertices
        let apply = |x: &[F], out: &mut [F]| {
            for i in 0..n {
                let mut s = F::from(neighbors[i].len()).expect("degree") * x[i];
                for &u in &neighbors[i] {
                    if slot[u] != usize::MAX {
                        s = s - x[slot[u]];
                    }
                }
                out[i] = s;
            }
        };
        let b: Vec<F> = (0..n)
            .map(|i| neighbors[i].iter().filter(|&&u| slot[u] == usize::MAX).fold(F::zero(), |acc, &u| acc + coords[u].expect("boundary")[axis]))
            .collect();
        let mut xs = vec![F::zero(); n];
        let mut r = b.clone();
        let mut p = r.clone();
        let mut ap = vec![F::zero(); n];
        let dot = |a: &[F], b: &[F]| a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y);
        let mut rr = dot(&r, &r);
        for _ in 0..(10 * n + 10) {
            if rr.sqrt() <= tol {
                break;
            }
            apply(&p, &mut ap);
            let alpha = rr / dot(&p, &ap);
            for i in 0..n {
                xs[i] = xs[i] + alpha * p[i];
                r[i] = r[i] - alpha * ap[i];
            }
            let next = dot(&r, &r);
            let beta = next / rr;
            rr = next;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        for i in 0..n {
            x[i][axis] = xs[i];
        }
    }
    for (i, &v) in interior.iter().enumerate() {
        coords[v] = Some(x[i]);
    }
    let mut residual = F::zero();
    for (i, &v) in interior.iter().enumerate() {
        let deg = F::from(neighbors[i].len()).expect("degree");
        let p = coords[v].expect("placed");
        for axis in 0..2 {
            let mean = neighbors[i].iter().fold(F::zero(), |acc, &u| acc + coords[u].expect("placed")[axis]) / deg;
            residual = residual.max((p[axis] - mean).abs());
        }
    }
    let limit = cst(1e-9).max(F::epsilon() * cst(1e3));
    if residual.is_nan() || residual > limit {
        return Err(RenderError::SolverDidNotConverge(residual.to_f64().unwrap_or(f64::NAN)));
    }
    let tiles: Vec<usize> = (0..c.tile_count()).filter(|&t| level.tile_loc0[t] == panel).collect();
    let mut emb = Embedding { panel, coords, tiles, residual, min_signed_area: F::infinity(), coincident_pairs: 0 };
    for &t in &emb.tiles {
        emb.min_signed_area = emb.min_signed_area.min(signed_area(&emb.polygon(level, t)));
    }
    let eps = cst(2e-7);
    let mut pts: Vec<[F; 2]> = interior.iter().map(|&v| emb.coords[v].expect("placed")).collect();
    pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap_or(std::cmp::Ordering::Equal));
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[j][0] - pts[i][0] > eps {
                break;
            }
            if (pts[j][1] - pts[i][1]).abs() <= eps {
                emb.coincident_pairs += 1;
            }
        }
    }
    Ok(emb)
}

/// Two-panel SVG: the white 0-tile on the left, the black one on the right.
pub fn render_svg(level: &LevelComplex) -> Result<String, RenderError> {
    let size = 400.0;
    let margin = 20.0;
    let mut s = String::new();
    let width = 2.0 * size + 3.0 * margin;
    let height = size + 2.0 * margin;
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).expect("write");
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .expect("write");
    for (p, panel) in Color::BOTH.into_iter().enumerate() {
        let emb: Embedding<f64> = tutte_embed(level, panel)?;
        let cx = margin + size / 2.0 + p as f64 * (size + margin);
        let cy = margin + size / 2.0;
        let r = size / 2.0;
        writeln!(s, r##"<g id="panel-{}" stroke="#000000" stroke-width="0.5" stroke-linejoin="round">"##, panel.letter()).expect("write");
        for &t in &emb.tiles {
            let fill = match level.tile_color(t) {
                Color::White => "#ffffff",
                Color::Black => "#555555",
            };
            let pts: Vec<String> =
                emb.polygon(level, t).iter().map(|q| format!("{:.3},{:.3}", cx + r * q[0], cy - r * q[1])).collect();
            writeln!(s, r#"<polygon data-tile="{}" fill="{fill}" points="{}"/>"#, level.complex.tile_id(t), pts.join(" ")).expect("write");
        }
        writeln!(s, "</g>").expect("write");
    }
    writeln!(s, "</svg>").expect("write");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::generate;
    use crate::fixtures::{all_rule_fixtures, grid, lattes2x2};

    #[test]
    fn export_round_trip() {
        for (_, r) in all_rule_fixtures() {
            let level = generate(&r, 2).unwrap();
            let json = export_json(&level, &r);
            let back: ComplexExport = serde_json::from_str(&json).unwrap();
            let imported = import_level(&back, &r).unwrap();
            let mut expected = level.clone();
            expected.lineage = None;
            assert_eq!(imported, expected, "{}", r.name());
            assert_eq!(export_json(&imported, &r), json);
        }
    }

    #[test]
    fn loc_encoding() {
        let j = |l: Location| serde_json::to_string(&LocExport::from(l)).unwrap();
        assert_eq!(j(Location::TileInterior(Color::White)), r#"{"t":"tile","c":"w"}"#);
        assert_eq!(j(Location::BoundaryEdge(2)), r#"{"t":"edge","l":2}"#);
        assert_eq!(j(Location::Corner(0)), r#"{"t":"corner","i":0}"#);
    }

    #[test]
    fn import_rejects_other_rules() {
        let level = generate(&lattes2x2(), 1).unwrap();
        let e = export_level(&level, &lattes2x2());
        assert_eq!(import_level(&e, &grid(2, 3).unwrap()).unwrap_err().code(), "WrongRule");
    }

    #[test]
    fn level_zero_panel_is_the_polygon() {
        let r = lattes2x2();
        let level = generate(&r, 0).unwrap();
        for panel in Color::BOTH {
            let emb: Embedding<f64> = tutte_embed(&level, panel).unwrap();
            assert_eq!(emb.tiles.len(), 1);
            let poly = emb.polygon(&level, emb.tiles[0]);
            assert!((signed_area(&poly) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn embeddings_are_proper() {
        for (_, r) in all_rule_fixtures() {
            let level = generate(&r, 2).unwrap();
            for panel in Color::BOTH {
                let emb: Embedding<f64> = tutte_embed(&level, panel).unwrap();
                assert!(emb.residual <= 1e-9);
                assert!(emb.min_signed_area > 0.0, "{} {panel}", r.name());
                assert_eq!(emb.coincident_pairs, 0);
                assert_eq!(emb.tiles.len(), level.tile_count() / 2);
            }
        }
    }

    #[test]
    fn single_precision_embedding() {
        let level = generate(&lattes2x2(), 2).unwrap();
        let emb: Embedding<f32> = tutte_embed(&level, Color::White).unwrap();
        assert!(emb.min_signed_area > 0.0);
    }

    #[test]
    fn svg_has_one_polygon_per_tile() {
        let level = generate(&lattes2x2(), 1).unwrap();
        let svg = render_svg(&level).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 8);
        assert_eq!(svg, render_svg(&level).unwrap());
    }
}
