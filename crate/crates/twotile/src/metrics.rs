//! Tile graphs, `D_n`, combinatorial expansion, m-values, the chain metric,
//! flowers and the orbit of vertices under the labeling.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::engine::{generate_capped, EngineError, LevelComplex, Tower, DEFAULT_MAX_TILES};
use crate::rule::SubdivisionRule;
use crate::scalar::ExactScalar;

/// Tile cap for the brute-force oracle.
pub const ORACLE_MAX_TILES: usize = 5000;
/// Connected-set budget for the brute-force oracle.
pub const ORACLE_MAX_SETS: u64 = 200_000_000;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("cells from levels {0} and {1} mixed in one query")]
    MixedLevels(usize, usize),
    #[error("unknown {kind} {index}")]
    UnknownCell { kind: &'static str, index: usize },
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("k = {0} exceeds the supported maximum of 64")]
    UnsupportedK(usize),
    #[error("lambda must exceed 1, got {0}")]
    BadLambda(f64),
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::Engine(e) => e.code(),
            MetricsError::MixedLevels(..) => "MixedLevels",
            MetricsError::UnknownCell { .. } => "UnknownCell",
            MetricsError::ResourceLimit(_) => "ResourceLimit",
            MetricsError::UnsupportedK(_) => "UnsupportedK",
            MetricsError::BadLambda(_) => "BadLambda",
        }
    }
}

/// Whether a set of met 0-edges (bit mask) contains opposite sides.
pub fn mask_joins(mask: u64, k: usize) -> bool {
    if k == 3 {
        return mask == 0b111;
    }
    (0..k).all(|l| mask & !((1u64 << l) | (1u64 << ((l + 1) % k))) != 0) && mask != 0
}

/// Tiles of one level, adjacent when they share a vertex.
#[derive(Clone, Debug)]
pub struct TileGraph {
    pub level: usize,
    pub k: usize,
    pub adjacency: Vec<Vec<usize>>,
    /// Bit `l` is set when the tile meets the closed 0-edge `l`.
    pub edge_mask: Vec<u64>,
}

impl TileGraph {
    pub fn new(level: &LevelComplex) -> Result<Self, MetricsError> {
        let k = level.k;
        if k > 64 {
            return Err(MetricsError::UnsupportedK(k));
        }
        let c = &level.complex;
        let mut vertex_tiles = vec![Vec::new(); c.vertex_count()];
        for t in 0..c.tile_count() {
            for v in c.tile_vertices(t) {
                vertex_tiles[v].push(t);
            }
        }
        let mut adjacency = Vec::with_capacity(c.tile_count());
        let mut edge_mask = Vec::with_capacity(c.tile_count());
        for t in 0..c.tile_count() {
            let mut nb = BTreeSet::new();
            let mut mask = 0u64;
            for v in c.tile_vertices(t) {
                nb.extend(vertex_tiles[v].iter().copied().filter(|&s| s != t));
                for l in 0..k {
                    if level.vertex_loc0[v].on_closed_edge(l, k) {
                        mask |= 1 << l;
                    }
                }
            }
            adjacency.push(nb.into_iter().collect());
            edge_mask.push(mask);
        }
        Ok(Self { level: level.level, k, adjacency, edge_mask })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn terminal_set(&self, l: usize) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.edge_mask[t] >> l & 1 == 1).collect()
    }

    /// Tile-counted distances (a tile in the source set has distance 1).
    pub fn distances_from(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == usize::MAX {
                dist[s] = 1;
                queue.push_back(s);
            }
        }
        while let Some(t) = queue.pop_front() {
            for &s in &self.adjacency[t] {
                if dist[s] == usize::MAX {
                    dist[s] = dist[t] + 1;
                    queue.push_back(s);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.distances_from(&[0]).iter().all(|&d| d != usize::MAX)
    }

    /// The minimal number of tiles in a connected set joining opposite sides.
    pub fn dn(&self) -> usize {
        let k = self.k;
        let dists: Vec<Vec<usize>> = (0..k).map(|l| self.distances_from(&self.terminal_set(l))).collect();
        if k == 3 {
            (0..self.len()).map(|t| dists[0][t] + dists[1][t] + dists[2][t] - 2).min().expect("tiles exist")
        } else {
            let mut best = usize::MAX;
            for l in 0..k {
                for m in l + 2..k {
                    if (m + 1) % k == l {
                        continue;
                    }
                    let d = self.terminal_set(m).iter().map(|&t| dists[l][t]).min().expect("terminal sets are nonempty");
                    best = best.min(d);
                }
            }
            best
        }
    }
}

/// Whether a set of tiles of one level joins opposite sides.
pub fn joins_opposite_sides(level: &LevelComplex, tiles: &[usize]) -> Result<bool, MetricsError> {
    if level.k > 64 {
        return Err(MetricsError::UnsupportedK(level.k));
    }
    let mut mask = 0u64;
    for &t in tiles {
        if t >= level.tile_count() {
            return Err(MetricsError::UnknownCell { kind: "tile", index: t });
        }
        for v in level.complex.tile_vertices(t) {
            for l in 0..level.k {
                if level.vertex_loc0[v].on_closed_edge(l, level.k) {
                    mask |= 1 << l;
                }
            }
        }
    }
    Ok(mask_joins(mask, level.k))
}

#[allow(non_snake_case)]
pub fn compute_Dn(rule: &SubdivisionRule, n: usize) -> Result<usize, MetricsError> {
    let level = generate_capped(rule, n, DEFAULT_MAX_TILES)?;
    Ok(TileGraph::new(&level)?.dn())
}

/// `D_n` by exhaustive search over connected tile sets of increasing size.
#[allow(non_snake_case)]
pub fn brute_force_Dn(rule: &SubdivisionRule, n: usize) -> Result<usize, MetricsError> {
    let level = generate_capped(rule, n, ORACLE_MAX_TILES as u64)?;
    let g = TileGraph::new(&level)?;
    brute_force_graph(&g, ORACLE_MAX_SETS)
}

struct Esu<'a> {
    g: &'a TileGraph,
    size: usize,
    budget: u64,
    visited: u64,
    // number of members of the current set in whose closed neighborhood a tile lies
    covered: Vec<u32>,
}

impl Esu<'_> {
    fn extend(&mut self, set_len: usize, mask: u64, ext: Vec<usize>, root: usize, member: &mut Vec<bool>) -> Result<bool, MetricsError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(MetricsError::ResourceLimit(format!("more than {} connected sets", self.budget)));
        }
        if set_len == self.size {
            return Ok(mask_joins(mask, self.g.k));
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &self.g.adjacency[w] {
                if u > root && self.covered[u] == 0 && !member[u] {
                    next.push(u);
                }
            }
            member[w] = true;
            self.covered[w] += 1;
            for &u in &self.g.adjacency[w] {
                self.covered[u] += 1;
            }
            let found = self.extend(set_len + 1, mask | self.g.edge_mask[w], next, root, member)?;
            member[w] = false;
            self.covered[w] -= 1;
            for &u in &self.g.adjacency[w] {
                self.covered[u] -= 1;
            }
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn brute_force_graph(g: &TileGraph, budget: u64) -> Result<usize, MetricsError> {
    if g.len() > ORACLE_MAX_TILES {
        return Err(MetricsError::ResourceLimit(format!("{} tiles exceed the oracle cap", g.len())));
    }
    let mut esu = Esu { g, size: 0, budget, visited: 0, covered: vec![0; g.len()] };
    for size in 1..=g.len() {
        esu.size = size;
        let mut member = vec![false; g.len()];
        for root in 0..g.len() {
            member[root] = true;
            esu.covered[root] += 1;
            for &u in &g.adjacency[root] {
                esu.covered[u] += 1;
            }
            let ext: Vec<usize> = g.adjacency[root].iter().copied().filter(|&u| u > root).collect();
            let found = esu.extend(1, g.edge_mask[root], ext, root, &mut member)?;
            member[root] = false;
            esu.covered[root] -= 1;
            for &u in &g.adjacency[root] {
                esu.covered[u] -= 1;
            }
            if found {
                return Ok(size);
            }
        }
    }
    Err(MetricsError::ResourceLimit("no joining set exists".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub d_values: Vec<usize>,
    pub first_expanding_level: Option<usize>,
    pub inconclusive: bool,
    pub lambda0_lower: f64,
    pub lambda0_upper: usize,
    pub alpha: f64,
    pub monotone: bool,
    pub supermultiplicative: bool,
}

/// Whether `D_{a+b}` obeys the lower bound from `D_a` and `D_b`.
pub fn supermultiplicative_holds(k: usize, dab: usize, da: usize, db: usize) -> bool {
    if k == 3 {
        dab + da > da * db
    } else {
        dab >= da * db
    }
}

pub fn expansion_report(rule: &SubdivisionRule, max_n: usize) -> Result<ExpansionReport, MetricsError> {
    let d_values = (1..=max_n).map(|n| compute_Dn(rule, n)).collect::<Result<Vec<_>, _>>()?;
    Ok(expansion_from_values(rule.k(), rule.deg(), d_values))
}

pub fn expansion_from_values(k: usize, deg: usize, d_values: Vec<usize>) -> ExpansionReport {
    let n = d_values.len();
    let first_expanding_level = d_values.iter().position(|&d| d >= 2).map(|i| i + 1);
    let lambda0_lower =
        d_values.iter().enumerate().map(|(i, &d)| (d as f64).powf(1.0 / (i + 1) as f64)).fold(1.0, f64::max);
    let alpha = d_values.last().map_or(0.0, |&d| (d as f64).ln() / n as f64);
    let monotone = d_values.windows(2).all(|w| w[0] <= w[1]);
    let mut supermultiplicative = true;
    for a in 1..=n {
        for b in 1..=n - a {
            let (da, db, dab) = (d_values[a - 1], d_values[b - 1], d_values[a + b - 1]);
            supermultiplicative &= supermultiplicative_holds(k, dab, da, db);
        }
    }
    ExpansionReport {
        d_values,
        first_expanding_level,
        inconclusive: first_expanding_level.is_none(),
        lambda0_lower,
        lambda0_upper: deg,
        alpha,
        monotone,
        supermultiplicative,
    }
}

/// A tile of a given level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileRef {
    pub level: usize,
    pub tile: usize,
}

fn tiles_meet(level: &LevelComplex, a: usize, b: usize) -> bool {
    let va: BTreeSet<usize> = level.complex.tile_vertices(a).collect();
    level.complex.tile_vertices(b).any(|v| va.contains(&v))
}

/// The largest `j` such that the `j`-ancestors of two tiles intersect.
pub fn m_value(tower: &Tower, x: TileRef, y: TileRef) -> Result<usize, MetricsError> {
    if x.level != y.level {
        return Err(MetricsError::MixedLevels(x.level, y.level));
    }
    let n = x.level;
    if n > tower.height() {
        return Err(MetricsError::UnknownCell { kind: "level", index: n });
    }
    for t in [x.tile, y.tile] {
        if t >= tower.level(n).tile_count() {
            return Err(MetricsError::UnknownCell { kind: "tile", index: t });
        }
    }
    // 0-tiles always meet
    Ok((0..=n)
        .rev()
        .find(|&j| tiles_meet(tower.level(j), tower.ancestor(n, x.tile, j), tower.ancestor(n, y.tile, j)))
        .unwrap_or(0))
}

/// Incidence of level-`n` vertices with the closed tiles of orders `0..=n`.
#[derive(Clone, Debug)]
pub struct ChainMetric {
    pub n: usize,
    pub vertex_count: usize,
    /// Per order `j`: tiles of order `j` and the level-`n` vertices in each closure.
    closures: Vec<Vec<Vec<usize>>>,
    /// Per order `j` and vertex: the `j`-tiles whose closure contains it.
    containing: Vec<Vec<Vec<usize>>>,
    /// Per order `j`: vertex sets of `j`-tiles as level-`j` cells.
    frames: Vec<Vec<Vec<usize>>>,
}

#[derive(PartialEq)]
struct Entry<T>(T, usize);

impl<T: PartialOrd> Eq for Entry<T> {}

impl<T: PartialOrd> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}

impl ChainMetric {
    pub fn new(tower: &Tower) -> Self {
        let n = tower.height();
        let top = tower.top();
        let vertex_count = top.complex.vertex_count();
        let mut closures = Vec::new();
        let mut containing = Vec::new();
        let mut frames = Vec::new();
        for j in 0..=n {
            let lj = tower.level(j);
            let mut sets = vec![BTreeSet::new(); lj.tile_count()];
            for z in 0..top.tile_count() {
                sets[tower.ancestor(n, z, j)].extend(top.complex.tile_vertices(z));
            }
            let mut cont = vec![Vec::new(); vertex_count];
            for (t, s) in sets.iter().enumerate() {
                for &v in s {
                    cont[v].push(t);
                }
            }
            closures.push(sets.into_iter().map(|s| s.into_iter().collect()).collect());
            containing.push(cont);
            frames.push((0..lj.tile_count()).map(|t| lj.complex.tile_vertices(t).collect()).collect());
        }
        Self { n, vertex_count, closures, containing, frames }
    }

    fn check_vertex(&self, v: usize) -> Result<(), MetricsError> {
        if v >= self.vertex_count {
            return Err(MetricsError::UnknownCell { kind: "vertex", index: v });
        }
        Ok(())
    }

    /// Chain distances from `u` to every level-`n` vertex for tile weights `Λ^{-j}`.
    pub fn distances_from<T: ExactScalar>(&self, u: usize, lambda: &T) -> Result<Vec<T>, MetricsError> {
        self.check_vertex(u)?;
        let weights: Vec<T> = (0..=self.n).map(|j| T::one() / lambda.clone().powi(j as u32)).collect();
        let mut dist: Vec<Option<T>> = vec![None; self.vertex_count];
        let mut tile_done: Vec<Vec<bool>> = self.closures.iter().map(|c| vec![false; c.len()]).collect();
        let mut heap = BinaryHeap::new();
        dist[u] = Some(T::zero());
        heap.push(Entry(T::zero(), u));
        let mut done = vec![false; self.vertex_count];
        while let Some(Entry(d, v)) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            for j in 0..=self.n {
                for &t in &self.containing[j][v] {
                    if tile_done[j][t] {
                        continue;
                    }
                    // vertices are settled in distance order, so the first visit is optimal
                    tile_done[j][t] = true;
                    let nd = d.clone() + weights[j].clone();
                    for &w in &self.closures[j][t] {
                        if dist[w].as_ref().is_none_or(|old| nd < *old) {
                            dist[w] = Some(nd.clone());
                            heap.push(Entry(nd.clone(), w));
                        }
                    }
                }
            }
        }
        Ok(dist.into_iter().map(|d| d.expect("the complex is connected")).collect())
    }

    pub fn distance<T: ExactScalar>(&self, u: usize, v: usize, lambda: &T) -> Result<T, MetricsError> {
        self.check_vertex(v)?;
        Ok(self.distances_from(u, lambda)?.swap_remove(v))
    }

    /// The largest `j` such that `j`-tiles containing `u` and `v` intersect.
    pub fn vertex_m_value(&self, u: usize, v: usize) -> Result<usize, MetricsError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let reach = |j: usize, x: usize| -> BTreeSet<usize> {
            self.containing[j][x].iter().flat_map(|&t| self.frames[j][t].iter().copied()).collect()
        };
        Ok((0..=self.n).rev().find(|&j| !reach(j, u).is_disjoint(&reach(j, v))).unwrap_or(0))
    }
}

/// Shorthand for a one-off chain distance on the top level of a tower.
pub fn chain_distance<T: ExactScalar>(tower: &Tower, u: usize, v: usize, lambda: &T) -> Result<T, MetricsError> {
    ChainMetric::new(tower).distance(u, v, lambda)
}

/// Cells of a flower, as sorted index lists.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CellSet {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub tiles: Vec<usize>,
}

impl CellSet {
    fn union(&self, other: &CellSet) -> CellSet {
        let merge = |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().chain(b).copied().collect::<BTreeSet<_>>().into_iter().collect() };
        CellSet {
            vertices: merge(&self.vertices, &other.vertices),
            edges: merge(&self.edges, &other.edges),
            tiles: merge(&self.tiles, &other.tiles),
        }
    }
}

/// All cells containing a vertex.
pub fn flower(level: &LevelComplex, v: usize) -> Result<CellSet, MetricsError> {
    let c = &level.complex;
    if v >= c.vertex_count() {
        return Err(MetricsError::UnknownCell { kind: "vertex", index: v });
    }
    let edges: BTreeSet<usize> = c.rotation(v).iter().map(|d| d.edge).collect();
    let tiles: BTreeSet<usize> = c.vertex_tiles(v).collect();
    Ok(CellSet { vertices: vec![v], edges: edges.into_iter().collect(), tiles: tiles.into_iter().collect() })
}

/// All cells meeting a closed edge: the union of its endpoint flowers.
pub fn edge_flower(level: &LevelComplex, e: usize) -> Result<CellSet, MetricsError> {
    if e >= level.complex.edge_count() {
        return Err(MetricsError::UnknownCell { kind: "edge", index: e });
    }
    let [a, b] = level.complex.ends(e);
    Ok(flower(level, a)?.union(&flower(level, b)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitReport {
    /// D¹ vertex ids in index order.
    pub vertices: Vec<u32>,
    /// Image of each vertex, as a D¹ vertex id.
    pub orbit: Vec<u32>,
    pub local_degree: Vec<usize>,
    pub critical: Vec<u32>,
    pub periodic_critical: Vec<u32>,
    pub has_periodic_critical: bool,
    pub doubling: bool,
    /// Per label `i`: the sum of local degrees over vertices labeled `i`.
    pub fiber_degree_sums: Vec<usize>,
    pub deg: usize,
}

pub fn orbit_report(rule: &SubdivisionRule) -> OrbitReport {
    let d1 = rule.d1();
    let nv = d1.vertex_count();
    let o: Vec<usize> = (0..nv).map(|v| rule.base_vertex(rule.vertex_label(v))).collect();
    let local_degree: Vec<usize> = (0..nv).map(|v| d1.degree(v) / 2).collect();
    let is_critical = |v: usize| local_degree[v] >= 2;
    // a vertex is periodic when iterating o returns to it; o has k-element image
    let periodic = |v: usize| {
        let mut x = o[v];
        for _ in 0..nv {
            if x == v {
                return true;
            }
            x = o[x];
        }
        false
    };
    let critical: Vec<usize> = (0..nv).filter(|&v| is_critical(v)).collect();
    let periodic_critical: Vec<usize> = critical.iter().copied().filter(|&v| periodic(v)).collect();
    let mut fiber_degree_sums = vec![0; rule.k()];
    for v in 0..nv {
        fiber_degree_sums[rule.vertex_label(v)] += local_degree[v];
    }
    let id = |v: usize| d1.vertex_id(v);
    OrbitReport {
        vertices: (0..nv).map(id).collect(),
        orbit: o.iter().map(|&v| id(v)).collect(),
        local_degree,
        critical: critical.iter().map(|&v| id(v)).collect(),
        has_periodic_critical: !periodic_critical.is_empty(),
        doubling: periodic_critical.is_empty(),
        periodic_critical: periodic_critical.iter().map(|&v| id(v)).collect(),
        fiber_degree_sums,
        deg: rule.deg(),
    }
}

/// The Ahlfors-regularity exponent `log deg / log Λ`.
pub fn ahlfors_exponent(deg: usize, lambda: f64) -> Result<f64, MetricsError> {
    if lambda <= 1.0 || !lambda.is_finite() {
        return Err(MetricsError::BadLambda(lambda));
    }
    Ok((deg as f64).ln() / lambda.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::generate;
    use crate::fixtures::{barycentric, grid, lattes2x2, z2m1};
    use crate::scalar::Rational;

    fn corner_tile(level: &LevelComplex, corner: usize, color: crate::rule::Color) -> usize {
        (0..level.tile_count())
            .find(|&t| level.tile_color(t) == color && level.tile_loc0[t] == crate::rule::Color::White && level.complex.tile_vertices(t).any(|v| v == corner))
            .unwrap()
    }

    #[test]
    fn mask_joins_cases() {
        assert!(!mask_joins(0b0011, 4));
        assert!(!mask_joins(0b1001, 4));
        assert!(mask_joins(0b0101, 4));
        assert!(mask_joins(0b0111, 4));
        assert!(!mask_joins(0b011, 3));
        assert!(mask_joins(0b111, 3));
        assert!(!mask_joins(0, 4));
    }

    #[test]
    fn single_lattes_tiles_do_not_join() {
        let l = generate(&lattes2x2(), 1).unwrap();
        for t in 0..l.tile_count() {
            assert!(!joins_opposite_sides(&l, &[t]).unwrap());
        }
        // a column of two tiles in one face sharing an edge
        let a = (0..8).find(|&t| l.tile_loc0[t] == crate::rule::Color::White && l.complex.tile_vertices(t).any(|v| v == 0)).unwrap();
        let b = (0..8)
            .find(|&t| {
                t != a
                    && l.tile_loc0[t] == crate::rule::Color::White
                    && l.complex.tile_vertices(t).any(|v| v == 3)
            })
            .unwrap();
        assert!(joins_opposite_sides(&l, &[a, b]).unwrap());
    }

    #[test]
    fn z2m1_single_tile_joins() {
        for n in 0..5 {
            let l = generate(&z2m1(), n).unwrap();
            assert!((0..l.tile_count()).any(|t| joins_opposite_sides(&l, &[t]).unwrap()));
        }
    }

    #[test]
    fn dn_values() {
        assert_eq!(compute_Dn(&grid(2, 3).unwrap(), 1).unwrap(), 2);
        let r = lattes2x2();
        assert_eq!((1..=3).map(|n| compute_Dn(&r, n).unwrap()).collect::<Vec<_>>(), vec![2, 4, 8]);
        for n in 0..=6 {
            assert_eq!(compute_Dn(&z2m1(), n).unwrap(), 1);
        }
    }

    #[test]
    fn oracle_agrees() {
        let r = lattes2x2();
        for n in 0..=2 {
            assert_eq!(brute_force_Dn(&r, n).unwrap(), compute_Dn(&r, n).unwrap());
        }
        let g = grid(2, 3).unwrap();
        for n in 0..=2 {
            assert_eq!(brute_force_Dn(&g, n).unwrap(), compute_Dn(&g, n).unwrap());
        }
        let b = barycentric();
        for n in 0..=2 {
            assert_eq!(brute_force_Dn(&b, n).unwrap(), compute_Dn(&b, n).unwrap());
        }
    }

    #[test]
    fn oracle_budget() {
        let l = generate(&lattes2x2(), 2).unwrap();
        let g = TileGraph::new(&l).unwrap();
        assert_eq!(brute_force_graph(&g, 10).unwrap_err().code(), "ResourceLimit");
    }

    #[test]
    fn expansion_reports() {
        let rep = expansion_report(&lattes2x2(), 3).unwrap();
        assert_eq!(rep.first_expanding_level, Some(1));
        assert!((rep.lambda0_lower - 2.0).abs() < 1e-12);
        assert_eq!(rep.lambda0_upper, 4);
        assert!(rep.monotone && rep.supermultiplicative);
        let rep = expansion_report(&z2m1(), 4).unwrap();
        assert!(rep.inconclusive);
        assert_eq!(rep.lambda0_lower, 1.0);
    }

    #[test]
    fn tile_graph_is_symmetric_and_connected() {
        let l = generate(&barycentric(), 1).unwrap();
        let g = TileGraph::new(&l).unwrap();
        assert!(g.is_connected());
        for t in 0..g.len() {
            assert!(!g.adjacency[t].contains(&t));
            for &s in &g.adjacency[t] {
                assert!(g.adjacency[s].contains(&t));
            }
        }
    }

    #[test]
    fn m_values() {
        let r = lattes2x2();
        let tower = Tower::generate(&r, 2).unwrap();
        let top = tower.top();
        let at = |t| TileRef { level: 2, tile: t };
        assert_eq!(m_value(&tower, at(5), at(5)).unwrap(), 2);
        let nb = TileGraph::new(top).unwrap().adjacency[5][0];
        assert_eq!(m_value(&tower, at(5), at(nb)).unwrap(), 2);
        // tiles at corner 0 of the white face and corner 2 of the black face
        let x = corner_tile(top, 0, top.tile_color(0));
        let y = (0..top.tile_count())
            .find(|&t| top.tile_loc0[t] == crate::rule::Color::Black && top.complex.tile_vertices(t).any(|v| v == 2))
            .unwrap();
        assert_eq!(m_value(&tower, at(x), at(y)).unwrap(), 0);
        assert_eq!(m_value(&tower, at(x), TileRef { level: 1, tile: 0 }).unwrap_err().code(), "MixedLevels");
    }

    #[test]
    fn chain_metric_small() {
        let tower = Tower::generate(&lattes2x2(), 1).unwrap();
        let cm = ChainMetric::new(&tower);
        let two = Rational::from_int(2);
        assert_eq!(cm.distance(3, 3, &two).unwrap(), Rational::from_int(0));
        // the center of the white face and corner 0 share a 1-tile
        let center = (0..10).find(|&v| tower.top().complex.degree(v) == 4 && tower.top().labels.vertex_label[v] == 2).unwrap();
        assert!(cm.distance(0, center, &two).unwrap() <= Rational::new(1.into(), 2.into()));
        let f = cm.distance(0, center, &2.0f64).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        assert_eq!(cm.distance(0, 99, &two).unwrap_err().code(), "UnknownCell");
    }

    #[test]
    fn flowers() {
        let l = generate(&lattes2x2(), 0).unwrap();
        let f = flower(&l, 0).unwrap();
        assert_eq!((f.vertices.len(), f.edges.len(), f.tiles.len()), (1, 2, 2));
        let l = generate(&lattes2x2(), 1).unwrap();
        let center = (0..10).find(|&v| l.labels.vertex_label[v] == 2).unwrap();
        let f = flower(&l, center).unwrap();
        assert_eq!((f.vertices.len(), f.edges.len(), f.tiles.len()), (1, 4, 4));
        for e in 0..l.complex.edge_count() {
            let [a, b] = l.complex.ends(e);
            assert_eq!(edge_flower(&l, e).unwrap(), flower(&l, a).unwrap().union(&flower(&l, b).unwrap()));
        }
    }

    #[test]
    fn orbits() {
        assert!(orbit_report(&z2m1()).has_periodic_critical);
        assert!(orbit_report(&barycentric()).has_periodic_critical);
        let rep = orbit_report(&lattes2x2());
        assert!(!rep.has_periodic_critical && rep.doubling);
        for r in [z2m1(), barycentric(), lattes2x2(), grid(2, 3).unwrap()] {
            let rep = orbit_report(&r);
            assert!(rep.fiber_degree_sums.iter().all(|&s| s == r.deg()), "{}", r.name());
        }
    }

    #[test]
    fn ahlfors() {
        assert!((ahlfors_exponent(4, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(ahlfors_exponent(4, 1.0).unwrap_err().code(), "BadLambda");
    }
}
