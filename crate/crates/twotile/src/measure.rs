//! The measure of maximal entropy on tiles, closed-form tile counts, entropy
//! and mixing correlations. Masses are exact rationals.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::engine::{admissible_addresses, Address, EngineError, LevelComplex, DEFAULT_MAX_TILES};
use crate::rule::{Color, SubdivisionRule};
use crate::scalar::{rational_string, ExactScalar, Rational};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MeasureError {
    #[error("address {0} is not admissible")]
    InadmissibleAddress(String),
    #[error("closed form count is not an integer: {0}")]
    NonIntegerClosedForm(String),
    #[error("lambda must exceed 1, got {0}")]
    BadLambda(f64),
    #[error("enumeration needs {0} tiles, above the cap")]
    ResourceLimit(u64),
    #[error("depth {m} is below the level {level} of Y")]
    LevelMismatch { m: usize, level: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl MeasureError {
    pub fn code(&self) -> &'static str {
        match self {
            MeasureError::InadmissibleAddress(_) => "InadmissibleAddress",
            MeasureError::NonIntegerClosedForm(_) => "NonIntegerClosedForm",
            MeasureError::BadLambda(_) => "BadLambda",
            MeasureError::ResourceLimit(_) => "ResourceLimit",
            MeasureError::LevelMismatch { .. } => "LevelMismatch",
            MeasureError::Engine(e) => e.code(),
        }
    }
}

/// Tile counts of D¹ and the weights of the two 0-tiles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureModel {
    /// White tiles in the white 0-tile.
    pub w1: u64,
    /// Black tiles in the white 0-tile.
    pub b1: u64,
    /// White tiles in the black 0-tile.
    pub w1p: u64,
    /// Black tiles in the black 0-tile.
    pub b1p: u64,
    pub w: Rational,
    pub b: Rational,
    pub deg: u64,
    pub lambda1: i64,
    pub lambda2: i64,
}

/// Closed-form counts of `k`-tiles by color inside each 0-tile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TileCountsAt {
    pub k: usize,
    /// White tiles in the white 0-tile.
    #[serde(serialize_with = "big_string")]
    pub wk: BigInt,
    /// Black tiles in the white 0-tile.
    #[serde(serialize_with = "big_string")]
    pub bk: BigInt,
    /// White tiles in the black 0-tile.
    #[serde(serialize_with = "big_string")]
    pub wk_prime: BigInt,
    /// Black tiles in the black 0-tile.
    #[serde(serialize_with = "big_string")]
    pub bk_prime: BigInt,
}

fn big_string<S: serde::Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl TileCountsAt {
    /// Number of tiles of color `color` at depth `k` inside a tile of color `host`.
    pub fn get(&self, host: Color, color: Color) -> &BigInt {
        match (host, color) {
            (Color::White, Color::White) => &self.wk,
            (Color::White, Color::Black) => &self.bk,
            (Color::Black, Color::White) => &self.wk_prime,
            (Color::Black, Color::Black) => &self.bk_prime,
        }
    }
}

pub fn measure_model(rule: &SubdivisionRule) -> MeasureModel {
    let c = rule.counts();
    let (w1, b1, w1p, b1p) = (c.get(Color::White, Color::White), c.get(Color::White, Color::Black), c.get(Color::Black, Color::White), c.get(Color::Black, Color::Black));
    let denom = BigInt::from(b1 + w1p);
    let w = Rational::new(BigInt::from(b1), denom.clone());
    let b = Rational::new(BigInt::from(w1p), denom);
    let deg = rule.deg() as u64;
    let lambda2 = w1 as i64 - b1 as i64;
    assert!(w.is_positive() && b.is_positive() && &w + &b == Rational::one());
    assert!(lambda2.unsigned_abs() < deg);
    MeasureModel { w1, b1, w1p, b1p, w, b, deg, lambda1: deg as i64, lambda2 }
}

impl MeasureModel {
    pub fn weight(&self, c: Color) -> &Rational {
        match c {
            Color::White => &self.w,
            Color::Black => &self.b,
        }
    }

    fn deg_pow(&self, n: usize) -> Rational {
        Rational::from_int(self.deg as i64).powi(n as u32)
    }

    /// Mass of the addressed tile.
    pub fn tile_mass(&self, rule: &SubdivisionRule, address: &Address) -> Result<Rational, MeasureError> {
        if !address.is_admissible(rule) {
            return Err(MeasureError::InadmissibleAddress(address.display(rule)));
        }
        Ok(self.weight(address.color(rule)) / self.deg_pow(address.len()))
    }

    /// Mass of a tile of a given color at level `n`.
    pub fn mass_of(&self, color: Color, n: usize) -> Rational {
        self.weight(color) / self.deg_pow(n)
    }

    pub fn closed_form_counts(&self, k: usize) -> Result<TileCountsAt, MeasureError> {
        let d = self.deg_pow(k);
        let l = Rational::from_int(self.lambda2).powi(k as u32);
        let (w, b) = (&self.w, &self.b);
        let as_int = |r: Rational| -> Result<BigInt, MeasureError> {
            if r.is_integer() {
                Ok(r.to_integer())
            } else {
                Err(MeasureError::NonIntegerClosedForm(rational_string(&r)))
            }
        };
        let out = TileCountsAt {
            k,
            wk: as_int(w * &d + b * &l)?,
            bk: as_int(w * &d - w * &l)?,
            wk_prime: as_int(b * &d - b * &l)?,
            bk_prime: as_int(b * &d + w * &l)?,
        };
        let dk = d.to_integer();
        assert!(&out.wk + &out.wk_prime == dk && &out.bk + &out.bk_prime == dk);
        Ok(out)
    }
}

/// Counts of `(0-ancestor, color)` pairs in a generated level.
pub fn enumerate_counts(level: &LevelComplex) -> TileCountsAt {
    let mut c = [[0u64; 2]; 2];
    for t in 0..level.tile_count() {
        c[level.tile_loc0[t].index()][level.tile_color(t).index()] += 1;
    }
    TileCountsAt {
        k: level.level,
        wk: c[0][0].into(),
        bk: c[0][1].into(),
        wk_prime: c[1][0].into(),
        bk_prime: c[1][1].into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub h_top: f64,
    /// `(k, H_k)` pairs.
    pub partition_entropy: Vec<(usize, f64)>,
    pub q: Option<f64>,
}

fn plogp(r: &Rational) -> f64 {
    let x = r.to_f64().expect("finite weight");
    x * (1.0 / x).ln()
}

pub fn entropy_report(model: &MeasureModel, ks: &[usize], lambda: Option<f64>) -> Result<EntropyReport, MeasureError> {
    let q = match lambda {
        Some(l) if !(l > 1.0 && l.is_finite()) => return Err(MeasureError::BadLambda(l)),
        Some(l) => Some((model.deg as f64).ln() / l.ln()),
        None => None,
    };
    let h_top = (model.deg as f64).ln();
    let tail = plogp(&model.w) + plogp(&model.b);
    Ok(EntropyReport { h_top, partition_entropy: ks.iter().map(|&k| (k, k as f64 * h_top + tail)).collect(), q })
}

/// The mass of `F^{-m}(X) ∩ Y`, from the closed-form counts.
pub fn correlation(model: &MeasureModel, rule: &SubdivisionRule, x: &Address, y: &Address, m: usize) -> Result<Rational, MeasureError> {
    for a in [x, y] {
        if !a.is_admissible(rule) {
            return Err(MeasureError::InadmissibleAddress(a.display(rule)));
        }
    }
    if m < y.len() {
        return Err(MeasureError::LevelMismatch { m, level: y.len() });
    }
    let counts = model.closed_form_counts(m - y.len())?;
    let c = Rational::from_integer(counts.get(y.color(rule), x.root).clone());
    Ok(model.tile_mass(rule, x)? * c / model.deg_pow(m))
}

/// The same mass by summing over `(m + |X|)`-tiles inside `Y` that `F^m` maps onto `X`.
pub fn correlation_by_enumeration(
    model: &MeasureModel,
    rule: &SubdivisionRule,
    x: &Address,
    y: &Address,
    m: usize,
) -> Result<Rational, MeasureError> {
    if m < y.len() {
        return Err(MeasureError::LevelMismatch { m, level: y.len() });
    }
    let depth = m + x.len();
    let tiles = crate::engine::tile_count_at(rule, depth);
    if tiles > DEFAULT_MAX_TILES {
        return Err(MeasureError::ResourceLimit(tiles));
    }
    let mut total = Rational::zero();
    for z in admissible_addresses(rule, depth) {
        if z.truncate(y.len()) == *y && z.shift(rule, m) == *x {
            total += model.tile_mass(rule, &z)?;
        }
    }
    Ok(total)
}

/// Checks that each tile's mass equals the total mass of its descendants `depth` levels down.
pub fn martingale_holds(model: &MeasureModel, rule: &SubdivisionRule, address: &Address, depth: usize) -> bool {
    let mut frontier = vec![address.clone()];
    for _ in 0..depth {
        frontier = frontier.iter().flat_map(|a| rule.template(a.color(rule)).tiles.iter().map(move |&t| a.child(t))).collect();
    }
    let sum: Rational = frontier.iter().map(|a| model.tile_mass(rule, a).expect("children are admissible")).sum();
    sum == model.tile_mass(rule, address).expect("admissible")
}

/// Exact bound on `|correlation − μ(X)μ(Y)|` from the second eigenvalue.
pub fn mixing_bound(model: &MeasureModel, m: usize, level_y: usize) -> Rational {
    Rational::new(BigInt::from(model.lambda2.abs()), BigInt::from(model.deg)).powi((m - level_y) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::generate;
    use crate::fixtures::{all_rule_fixtures, barycentric, grid, lattes2x2, z2m1};

    fn half() -> Rational {
        Rational::new(1.into(), 2.into())
    }

    #[test]
    fn models() {
        for r in [lattes2x2(), barycentric(), grid(2, 3).unwrap()] {
            let m = measure_model(&r);
            assert_eq!((m.w.clone(), m.b.clone(), m.lambda2), (half(), half(), 0), "{}", r.name());
        }
    }

    #[test]
    fn masses() {
        let r = lattes2x2();
        let m = measure_model(&r);
        assert_eq!(m.tile_mass(&r, &Address::root(Color::White)).unwrap(), half());
        let l = generate(&r, 3).unwrap();
        for a in &l.addresses {
            assert_eq!(m.tile_mass(&r, a).unwrap(), Rational::new(1.into(), 128.into()));
        }
        let t = r.template(Color::White).tiles[0];
        let bad = Address { root: Color::Black, letters: vec![t] };
        assert_eq!(m.tile_mass(&r, &bad).unwrap_err().code(), "InadmissibleAddress");
    }

    #[test]
    fn masses_sum_to_one() {
        for (_, r) in all_rule_fixtures() {
            let m = measure_model(&r);
            for n in 0..=2 {
                let total: Rational = admissible_addresses(&r, n).iter().map(|a| m.tile_mass(&r, a).unwrap()).sum();
                assert_eq!(total, Rational::one());
            }
        }
    }

    #[test]
    fn closed_forms() {
        let r = lattes2x2();
        let c = measure_model(&r).closed_form_counts(3).unwrap();
        assert_eq!(c.wk, 32.into());
        assert_eq!((c.bk.clone(), c.wk_prime.clone(), c.bk_prime.clone()), (32.into(), 32.into(), 32.into()));
        let c = measure_model(&z2m1()).closed_form_counts(4).unwrap();
        assert_eq!((c.wk, c.bk, c.wk_prime, c.bk_prime), (8.into(), 8.into(), 8.into(), 8.into()));
        for (_, r) in all_rule_fixtures() {
            let m = measure_model(&r);
            for k in 0..=2 {
                assert_eq!(m.closed_form_counts(k).unwrap(), enumerate_counts(&generate(&r, k).unwrap()));
            }
        }
    }

    #[test]
    fn entropy() {
        let m = measure_model(&lattes2x2());
        let rep = entropy_report(&m, &[0, 1, 2], Some(2.0)).unwrap();
        assert!((rep.h_top - 4f64.ln()).abs() < 1e-12);
        assert!((rep.partition_entropy[2].1 - (2.0 * 4f64.ln() + 2f64.ln())).abs() < 1e-12);
        assert!((rep.q.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(entropy_report(&m, &[], Some(0.5)).unwrap_err().code(), "BadLambda");
        assert!((entropy_report(&measure_model(&z2m1()), &[], None).unwrap().h_top - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn correlation_example() {
        let r = lattes2x2();
        let m = measure_model(&r);
        let x = Address::root(Color::White).child(r.template(Color::White).tiles.iter().copied().find(|&t| r.tile_color(t) == Color::White).unwrap());
        let y = Address::root(Color::White);
        let c = correlation(&m, &r, &x, &y, 2).unwrap();
        assert_eq!(c, Rational::new(1.into(), 16.into()));
        assert_eq!(correlation_by_enumeration(&m, &r, &x, &y, 2).unwrap(), c);
        assert_eq!(correlation(&m, &r, &x, &Address::root(Color::White).child(0), 0).unwrap_err().code(), "LevelMismatch");
    }

    #[test]
    fn martingale() {
        let r = barycentric();
        let m = measure_model(&r);
        for a in admissible_addresses(&r, 1) {
            assert!(martingale_holds(&m, &r, &a, 2));
        }
    }
}
