use std::sync::OnceLock;

use proptest::prelude::*;

use twotile::cell_complex::SignedEdgeId;
use twotile::curve::{iterate_curve, ReplacementSpec};
use twotile::engine::{generate, Address, Tower};
use twotile::fixtures::{all_rule_fixtures, grid, lattes2x2};
use twotile::measure::{enumerate_counts, martingale_holds, measure_model};
use twotile::metrics::{brute_force_Dn, compute_Dn, flower, m_value, ChainMetric, TileRef};
use twotile::render::{export_level, import_level, tutte_embed};
use twotile::{Color, ExactScalar, Rational, SubdivisionRule};

fn fixtures() -> &'static [(String, SubdivisionRule)] {
    static F: OnceLock<Vec<(String, SubdivisionRule)>> = OnceLock::new();
    F.get_or_init(all_rule_fixtures)
}

/// A fixture index and a level small enough for that fixture.
fn fixture_level(max: usize) -> impl Strategy<Value = (usize, usize)> {
    (0..fixtures().len()).prop_flat_map(move |i| {
        let cap = if fixtures()[i].1.deg() > 10 { max.min(2) } else { max };
        (Just(i), 0..=cap)
    })
}

fn lattes_metric() -> &'static ChainMetric {
    static M: OnceLock<ChainMetric> = OnceLock::new();
    M.get_or_init(|| ChainMetric::new(&Tower::generate(&lattes2x2(), 2).unwrap()))
}

fn random_address(r: &SubdivisionRule, root: Color, picks: &[usize]) -> Address {
    let mut a = Address::root(root);
    for &p in picks {
        let tiles = &r.template(a.color(r)).tiles;
        a = a.child(tiles[p % tiles.len()]);
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn address_lookup_inverts_address_of((i, n) in fixture_level(3), pick in any::<prop::sample::Index>()) {
        let r = &fixtures()[i].1;
        let l = generate(r, n).unwrap();
        let t = pick.index(l.tile_count());
        let a = l.address_of(t).unwrap().clone();
        prop_assert_eq!(l.tile_at(r, &a).unwrap(), t);
        prop_assert_eq!(Address::parse(&a.display(r), r), Some(a));
    }

    #[test]
    fn random_addresses_are_admissible((i, _) in fixture_level(0), white in any::<bool>(), picks in prop::collection::vec(0usize..1000, 0..4)) {
        let r = &fixtures()[i].1;
        let root = if white { Color::White } else { Color::Black };
        let a = random_address(r, root, &picks);
        prop_assert!(a.is_admissible(r));
        prop_assert!(martingale_holds(&measure_model(r), r, &a, 2));
    }

    #[test]
    fn chain_distance_is_a_metric(u in 0usize..18, v in 0usize..18, w in 0usize..18) {
        let cm = lattes_metric();
        let lam = Rational::from_int(2);
        let du = cm.distances_from(u, &lam).unwrap();
        let dv = cm.distances_from(v, &lam).unwrap();
        prop_assert_eq!(&du[v], &dv[u]);
        prop_assert_eq!(du[v] == Rational::from_int(0), u == v);
        prop_assert!(du[w] <= du[v].clone() + dv[w].clone());
    }

    #[test]
    fn m_value_is_symmetric_and_maximal_on_the_diagonal(x in 0usize..32, y in 0usize..32) {
        let tower = Tower::generate(&lattes2x2(), 2).unwrap();
        let tx = TileRef { level: 2, tile: x };
        let ty = TileRef { level: 2, tile: y };
        prop_assert_eq!(m_value(&tower, tx, ty).unwrap(), m_value(&tower, ty, tx).unwrap());
        prop_assert_eq!(m_value(&tower, tx, tx).unwrap(), 2);
    }

    #[test]
    fn flower_holds_exactly_the_incident_tiles((i, n) in fixture_level(2), pick in any::<prop::sample::Index>()) {
        let l = generate(&fixtures()[i].1, n).unwrap();
        let v = pick.index(l.complex.vertex_count());
        let f = flower(&l, v).unwrap();
        let incident: Vec<usize> = (0..l.tile_count()).filter(|&t| l.complex.tile_vertices(t).any(|x| x == v)).collect();
        prop_assert_eq!(f.tiles, incident);
        prop_assert!(f.vertices.contains(&v));
    }

    #[test]
    fn signed_ids_round_trip(id in 0u32..1_000_000, forward in any::<bool>()) {
        let s = SignedEdgeId { id, forward };
        prop_assert_eq!(s.to_string().parse::<SignedEdgeId>(), Ok(s));
    }

    #[test]
    fn export_round_trips((i, n) in fixture_level(2)) {
        let r = &fixtures()[i].1;
        let l = generate(r, n).unwrap();
        let back = import_level(&export_level(&l, r), r).unwrap();
        prop_assert_eq!(&back.complex, &l.complex);
        prop_assert_eq!(&back.addresses, &l.addresses);
    }

    #[test]
    fn tutte_embedding_is_proper((i, n) in fixture_level(2), white in any::<bool>()) {
        let l = generate(&fixtures()[i].1, n).unwrap();
        let panel = if white { Color::White } else { Color::Black };
        let e = tutte_embed::<f64>(&l, panel).unwrap();
        prop_assert!(e.residual <= 1e-9);
        prop_assert!(e.min_signed_area > 0.0);
        prop_assert_eq!(e.tiles.len(), l.tile_count() / 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grid_rules_round_trip_and_count(p in 2usize..6, q in 2usize..6, n in 0usize..3) {
        let r = grid(p, q).unwrap();
        let back = SubdivisionRule::parse(&r.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), r.to_text());
        let l = generate(&r, n).unwrap();
        let d = (p * q).pow(n as u32);
        prop_assert_eq!(l.tile_count(), 2 * d);
        prop_assert_eq!(l.complex.edge_count(), 4 * d);
        prop_assert_eq!(l.complex.vertex_count(), 2 * d + 2);
        prop_assert_eq!(measure_model(&r).closed_form_counts(n).unwrap(), enumerate_counts(&l));
    }

    #[test]
    fn grid_dn_matches_the_oracle(p in 2usize..4, q in 2usize..4) {
        let r = grid(p, q).unwrap();
        prop_assert_eq!(compute_Dn(&r, 1).unwrap(), brute_force_Dn(&r, 1).unwrap());
    }

    #[test]
    fn identity_curves_stay_jordan(p in 2usize..5, q in 2usize..5) {
        let r = grid(p, q).unwrap();
        let it = iterate_curve(&r, &ReplacementSpec::identity(&r), 2).unwrap();
        prop_assert!(it.non_jordan_at.is_none());
        prop_assert!(it.steps.iter().all(|s| s.ok()));
    }
}
