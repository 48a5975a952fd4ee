#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use twotile::curve::{find_candidate_curves_with, spec_from_curve, ReplacementSpec, SearchOptions};
use twotile::engine::{generate, sft_matrix};
use twotile::fixtures::{all_rule_fixtures, barycentric_decl, rule_fixture};
use twotile::{Color, Location};
use twotile::render::{export_json, render_svg};

pub const BLESS_VAR: &str = "TWOTILE_BLESS";

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn file_stem(fixture: &str) -> String {
    fixture.replace(':', "_")
}

/// The level-1 spec on grid(5,5) from the first single-host curve with no joining tile.
pub fn grid_5_5_spec() -> ReplacementSpec {
    let r = rule_fixture("grid:5:5").expect("fixture");
    let marked: Vec<usize> = (0..r.k()).map(|i| r.base_vertex(i)).collect();
    let found = find_candidate_curves_with(r.d1(), &marked, &SearchOptions::single_host(&r, true)).expect("search");
    found
        .curves
        .iter()
        .filter_map(|c| spec_from_curve(&r, c).ok())
        .find(|s| !s.is_identity() && s.validate(&r).is_ok())
        .expect("grid(5,5) has a filtered candidate")
}

/// The barycentric rule with the black spokes at two corners removed; some vertex cycle becomes odd.
pub fn odd_cycle_rule_text() -> String {
    let mut decl = barycentric_decl();
    decl.name = "odd_cycle".into();
    let spokes: Vec<_> = decl
        .edges
        .iter()
        .filter(|e| e.loc == Location::TileInterior(Color::Black) && (e.head == 0 || e.head == 3))
        .map(|e| e.id)
        .collect();
    for e in spokes {
        decl.remove_edge(e);
    }
    decl.to_text()
}

/// Every checked-in artifact as `(path relative to data/, expected content)`.
pub fn artifacts() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (name, r) in all_rule_fixtures() {
        out.push((format!("{}.rule", file_stem(&name)), r.to_text()));
    }
    out.push(("invalid/odd_cycle.rule".into(), odd_cycle_rule_text()));
    let grid = rule_fixture("grid:5:5").expect("fixture");
    out.push(("grid_5_5.spec".into(), grid_5_5_spec().to_text(&grid)));
    for (name, n) in [("lattes2x2", 2), ("barycentric", 1), ("z2m1", 2)] {
        let r = rule_fixture(name).expect("fixture");
        let l = generate(&r, n).expect("generate");
        out.push((format!("golden/gen_{}_{n}.json", file_stem(name)), export_json(&l, &r)));
    }
    for (name, n) in [("lattes2x2", 1), ("grid:2:3", 1), ("barycentric", 2)] {
        let r = rule_fixture(name).expect("fixture");
        let l = generate(&r, n).expect("generate");
        out.push((format!("golden/render_{}_{n}.svg", file_stem(name)), render_svg(&l).expect("render")));
    }
    for name in ["lattes2x2", "z2m1"] {
        let r = rule_fixture(name).expect("fixture");
        out.push((format!("golden/sft_{}.dot", file_stem(name)), sft_matrix(&r).to_dot(r.name())));
    }
    out
}

/// Paths whose on-disk content differs from `expected`; rewrites them when blessing.
pub fn stale_artifacts(expected: &[(String, String)]) -> Vec<String> {
    let bless = std::env::var_os(BLESS_VAR).is_some();
    let mut stale = Vec::new();
    for (rel, content) in expected {
        let path = data_dir().join(rel);
        if bless {
            fs::create_dir_all(path.parent().expect("has parent")).expect("create data dir");
            fs::write(&path, content).expect("write artifact");
        } else if fs::read_to_string(&path).ok().as_deref() != Some(content.as_str()) {
            stale.push(rel.clone());
        }
    }
    stale
}
