//! Exact lattice-tiling certificates, dual sets, and the tiling
//! translation group.
//!
//! Tiling is a measure-zero-sensitive predicate, so every reduction here
//! runs in exact rational arithmetic: floating endpoints convert exactly
//! to rationals (every finite f64 is rational) and all overlap measures
//! are computed without rounding.

use crate::geometry::{BoxUnion, IntervalUnion};
use crate::pwexp::PiecewiseExp;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;
use thiserror::Error;

type Rat = BigRational;

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("tiling checks require bounded rational data")]
    UnboundedDomain,
    #[error("lattice matrix must be square and invertible")]
    Singular,
    #[error("generator rank d1={d1} incompatible with {full_axes} full-line axes in dimension {dim}")]
    IncompatibleRank {
        d1: usize,
        full_axes: usize,
        dim: usize,
    },
    #[error("dual set is continuous when d2 > 0; use the product structure")]
    ContinuousDual,
    #[error("domain does not tile by the given lattice")]
    NotATiling,
    #[error("point lands on a tiling-cell boundary")]
    BoundaryPoint,
    #[error("dimension mismatch: domain is {domain}-dimensional, lattice is {lattice}-dimensional")]
    DimensionMismatch { domain: usize, lattice: usize },
    #[error("bad rational literal {0:?}")]
    BadRational(String),
}

/// Exact conversion; every finite f64 is a dyadic rational.
fn rat(x: f64) -> Result<Rat, TilingError> {
    Rat::from_float(x).ok_or(TilingError::UnboundedDomain)
}

fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational fits in f64")
}

fn rat_to_string(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rat_from_string(s: &str) -> Result<Rat, TilingError> {
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| TilingError::BadRational(s.to_string()))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse(d)?;
            if d.is_zero() {
                return Err(TilingError::BadRational(s.to_string()));
            }
            Ok(Rat::new(parse(n)?, d))
        }
        None => Ok(Rat::from_integer(parse(s)?)),
    }
}

// --- small exact matrix helpers -------------------------------------------

fn mat_det(a: &[Vec<Rat>]) -> Rat {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut det = Rat::from_integer(BigInt::from(1));
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !m[r][col].is_zero()) {
            Some(p) => p,
            None => return Rat::zero(),
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col].clone();
        let inv = m[col][col].clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / inv.clone();
            for c in col..n {
                let sub = factor.clone() * m[col][c].clone();
                m[r][c] -= sub;
            }
        }
    }
    det
}

fn mat_inv(a: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rat::from_integer(BigInt::from(1))
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(pivot, col);
        inv.swap(pivot, col);
        let p = m[col][col].clone();
        for c in 0..n {
            m[col][c] /= p.clone();
            inv[col][c] /= p.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..n {
                let s1 = f.clone() * m[col][c].clone();
                m[r][c] -= s1;
                let s2 = f.clone() * inv[col][c].clone();
                inv[r][c] -= s2;
            }
        }
    }
    Some(inv)
}

fn mat_transpose(a: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].clone()).collect()).collect()
}

fn mat_vec(a: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x.clone() * y.clone()).sum())
        .collect()
}

// --- lattice ---------------------------------------------------------------

/// The discrete subgroup `T = A (Z^{d1} x {0})` of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    a: Vec<Vec<Rat>>,
    d1: usize,
}

impl Lattice {
    pub fn new(a: Vec<Vec<Rat>>, d1: usize) -> Result<Self, TilingError> {
        let d = a.len();
        if d == 0 || a.iter().any(|row| row.len() != d) || d1 > d {
            return Err(TilingError::Singular);
        }
        if mat_det(&a).is_zero() {
            return Err(TilingError::Singular);
        }
        Ok(Lattice { a, d1 })
    }

    /// Full-rank lattice from floating entries (converted exactly).
    pub fn from_f64(rows: &[Vec<f64>], d1: usize) -> Result<Self, TilingError> {
        let a = rows
            .iter()
            .map(|row| row.iter().map(|&x| rat(x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Lattice::new(a, d1)
    }

    /// The 1D lattice `step * Z`.
    pub fn one_d(step: f64) -> Result<Self, TilingError> {
        Lattice::from_f64(&[vec![step]], 1)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.a.len() - self.d1
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.a
    }

    pub fn det(&self) -> Rat {
        mat_det(&self.a)
    }

    pub fn det_abs_f64(&self) -> f64 {
        rat_f64(&self.det().abs())
    }

    /// Lattice vector `A (k, 0)`.
    fn vector(&self, k: &[i64]) -> Vec<Rat> {
        let d = self.dim();
        let mut kv: Vec<Rat> = k
            .iter()
            .map(|&x| Rat::from_integer(BigInt::from(x)))
            .collect();
        kv.resize(d, Rat::zero());
        mat_vec(&self.a, &kv)
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    #[serde(rename = "A")]
    a: Vec<Vec<RatRepr>>,
    d1: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RatRepr {
    Num(f64),
    Str(String),
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LatticeRepr {
            a: self
                .a
                .iter()
                .map(|row| row.iter().map(|r| RatRepr::Str(rat_to_string(r))).collect())
                .collect(),
            d1: self.d1,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = LatticeRepr::deserialize(d)?;
        let a = repr
            .a
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| match e {
                        RatRepr::Num(x) => rat(*x),
                        RatRepr::Str(s) => rat_from_string(s),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Lattice::new(a, repr.d1).map_err(serde::de::Error::custom)
    }
}

// --- tiling certificate ----------------------------------------------------

/// Exact verdict of `tiles_by` with its defect measures.
#[derive(Clone, Debug, PartialEq)]
pub struct TilingReport {
    pub tiles: bool,
    /// Total pairwise overlap measure (each unordered pair once).
    pub overlap: Rat,
    /// Lower bound on the uncovered measure of the fundamental domain;
    /// exact whenever no point is covered three or more times.
    pub uncovered: Rat,
}

impl TilingReport {
    pub fn overlap_f64(&self) -> f64 {
        rat_f64(&self.overlap)
    }

    pub fn uncovered_f64(&self) -> f64 {
        rat_f64(&self.uncovered)
    }
}

impl Serialize for TilingReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            tiles: bool,
            overlap: String,
            uncovered: String,
        }
        Repr {
            tiles: self.tiles,
            overlap: rat_to_string(&self.overlap),
            uncovered: rat_to_string(&self.uncovered),
        }
        .serialize(s)
    }
}

/// Rational boxes of the non-full axes.
fn rational_boxes(omega: &BoxUnion) -> Result<Vec<Vec<(Rat, Rat)>>, TilingError> {
    omega
        .boxes()
        .iter()
        .map(|b| {
            b.iter()
                .map(|&(lo, hi)| Ok((rat(lo)?, rat(hi)?)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

/// Integer points of `A^{-1}(t-box)`, bounded via the box corners.
fn integer_range(a_inv: &[Vec<Rat>], t_box: &[(Rat, Rat)]) -> Vec<(i64, i64)> {
    let d = t_box.len();
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for corner in 0..(1usize << d) {
        let c: Vec<Rat> = (0..d)
            .map(|j| {
                if corner >> j & 1 == 0 {
                    t_box[j].0.clone()
                } else {
                    t_box[j].1.clone()
                }
            })
            .collect();
        let k = mat_vec(a_inv, &c);
        for j in 0..d {
            let v = rat_f64(&k[j]);
            bounds[j].0 = bounds[j].0.min(v);
            bounds[j].1 = bounds[j].1.max(v);
        }
    }
    bounds
        .iter()
        .map(|&(lo, hi)| ((lo.floor() as i64) - 1, (hi.ceil() as i64) + 1))
        .collect()
}

fn for_each_k(ranges: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    let d = ranges.len();
    let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&k);
        let mut j = 0;
        loop {
            if j == d {
                return;
            }
            k[j] += 1;
            if k[j] <= ranges[j].1 {
                break;
            }
            k[j] = ranges[j].0;
            j += 1;
        }
    }
}

/// Exact tiling certificate for `omega + T`, `T = A(Z^{d1} x {0})`.
///
/// Full rank: tiles iff `m(omega) = |det A|` and all lattice-translate
/// overlaps vanish. Product case (`d2 > 0`): the full-line axes must
/// match `d2`; the problem reduces to the projected `d1`-dimensional
/// factor.
pub fn tiles_by(omega: &BoxUnion, lattice: &Lattice) -> Result<TilingReport, TilingError> {
    let d = omega.dim();
    if lattice.dim() != d {
        return Err(TilingError::DimensionMismatch {
            domain: d,
            lattice: lattice.dim(),
        });
    }
    let d2 = lattice.d2();
    if d2 != omega.full_axes().len() {
        return Err(TilingError::IncompatibleRank {
            d1: lattice.d1(),
            full_axes: omega.full_axes().len(),
            dim: d,
        });
    }
    if d2 > 0 {
        // Project the generators onto the bounded axes and recurse.
        let keep: Vec<usize> = (0..d).filter(|j| !omega.full_axes().contains(j)).collect();
        let proj: Vec<Vec<Rat>> = keep
            .iter()
            .map(|&row| (0..lattice.d1()).map(|col| lattice.a[row][col].clone()).collect())
            .collect();
        let sub = Lattice::new(proj, lattice.d1()).map_err(|_| TilingError::IncompatibleRank {
            d1: lattice.d1(),
            full_axes: d2,
            dim: d,
        })?;
        let stripped = omega.strip_full_axes().map_err(|_| TilingError::UnboundedDomain)?;
        return tiles_by(&stripped, &sub);
    }

    let boxes = rational_boxes(omega)?;
    let det_abs = lattice.det().abs();
    let measure: Rat = boxes
        .iter()
        .map(|b| {
            b.iter()
                .map(|(lo, hi)| hi.clone() - lo.clone())
                .product::<Rat>()
        })
        .sum();
    let a_inv = mat_inv(&lattice.a).ok_or(TilingError::Singular)?;

    // Sum of m(b1 ∩ (b2 + Ak)) over all box pairs and all k != 0.
    let mut pair_sum = Rat::zero();
    for b1 in &boxes {
        for b2 in &boxes {
            let t_box: Vec<(Rat, Rat)> = (0..d)
                .map(|j| {
                    (
                        b1[j].0.clone() - b2[j].1.clone(),
                        b1[j].1.clone() - b2[j].0.clone(),
                    )
                })
                .collect();
            let ranges = integer_range(&a_inv, &t_box);
            for_each_k(&ranges, |k| {
                if k.iter().all(|&x| x == 0) {
                    return;
                }
                let t = lattice.vector(k);
                let mut vol = Rat::from_integer(BigInt::from(1));
                for j in 0..d {
                    let lo = (&b2[j].0 + &t[j]).max(b1[j].0.clone());
                    let hi = (&b2[j].1 + &t[j]).min(b1[j].1.clone());
                    if hi <= lo {
                        vol = Rat::zero();
                        break;
                    }
                    vol *= hi - lo;
                }
                pair_sum += vol;
            });
        }
    }
    let two = Rat::from_integer(BigInt::from(2));
    let overlap = pair_sum.clone() / two;
    let uncovered = (det_abs.clone() - measure.clone() + overlap.clone()).max(Rat::zero());
    Ok(TilingReport {
        tiles: measure == det_abs && pair_sum.is_zero(),
        overlap,
        uncovered,
    })
}

/// [`tiles_by`] for a bounded 1D interval union.
pub fn tiles_by_intervals(
    omega: &IntervalUnion,
    lattice: &Lattice,
) -> Result<TilingReport, TilingError> {
    if !omega.is_bounded() {
        return Err(TilingError::UnboundedDomain);
    }
    let boxes = omega
        .intervals()
        .iter()
        .map(|iv| vec![(iv.alpha, iv.beta)])
        .collect();
    let b = BoxUnion::new(1, boxes, vec![]).map_err(|_| TilingError::UnboundedDomain)?;
    tiles_by(&b, lattice)
}

/// All dual points `(A^T)^{-1} k` inside the closed window box.
pub fn dual_points(
    lattice: &Lattice,
    window: &[(f64, f64)],
) -> Result<Vec<Vec<f64>>, TilingError> {
    if lattice.d2() > 0 {
        return Err(TilingError::ContinuousDual);
    }
    let d = lattice.dim();
    if window.len() != d {
        return Err(TilingError::DimensionMismatch {
            domain: window.len(),
            lattice: d,
        });
    }
    let at = mat_transpose(&lattice.a);
    let at_inv = mat_inv(&at).ok_or(TilingError::Singular)?;
    let w: Vec<(Rat, Rat)> = window
        .iter()
        .map(|&(lo, hi)| Ok((rat(lo)?, rat(hi)?)))
        .collect::<Result<Vec<_>, TilingError>>()?;
    // k = A^T x ranges over A^T(window).
    let ranges = integer_range(&at, &w);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for_each_k(&ranges, |k| {
        let kv: Vec<Rat> = k.iter().map(|&x| Rat::from_integer(BigInt::from(x))).collect();
        let x = mat_vec(&at_inv, &kv);
        if x.iter().zip(&w).all(|(xi, (lo, hi))| lo <= xi && xi <= hi) {
            out.push(x.iter().map(rat_f64).collect());
        }
    });
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// 1D convenience wrapper around [`dual_points`].
pub fn dual_points_1d(lattice: &Lattice, window: (f64, f64)) -> Result<Vec<f64>, TilingError> {
    Ok(dual_points(lattice, &[window])?
        .into_iter()
        .map(|p| p[0])
        .collect())
}

/// Unique decomposition `x + t = y + gamma`, `y in omega`, `gamma in T`,
/// for a verified 1D tiling. Exact membership test; landing on an
/// endpoint raises `BoundaryPoint`.
pub fn tiling_translate(
    omega: &IntervalUnion,
    lattice: &Lattice,
    x: f64,
    t: f64,
) -> Result<f64, TilingError> {
    if lattice.dim() != 1 {
        return Err(TilingError::DimensionMismatch {
            domain: 1,
            lattice: lattice.dim(),
        });
    }
    if !tiles_by_intervals(omega, lattice)?.tiles {
        return Err(TilingError::NotATiling);
    }
    let step = lattice.a[0][0].abs();
    let target = rat(x)? + rat(t)?;
    let lo = omega.intervals().first().unwrap().alpha;
    let hi = omega.intervals().last().unwrap().beta;
    let step_f = rat_f64(&step);
    let k_lo = ((rat_f64(&target) - hi) / step_f).floor() as i64 - 2;
    let k_hi = ((rat_f64(&target) - lo) / step_f).ceil() as i64 + 2;
    for k in k_lo..=k_hi {
        let gamma = step.clone() * Rat::from_integer(BigInt::from(k));
        let y = target.clone() - gamma;
        for iv in omega.intervals() {
            let (a, b) = (rat(iv.alpha)?, rat(iv.beta)?);
            if y == a || y == b {
                return Err(TilingError::BoundaryPoint);
            }
            if a < y && y < b {
                return Ok(rat_f64(&y));
            }
        }
    }
    Err(TilingError::BoundaryPoint)
}

/// The tiling translation `U(t) f (x) = f(y(x + t))` realized exactly on
/// piecewise exponentials: one translated copy of `f` per relevant
/// lattice vector, clipped to `omega`.
pub fn tiling_evolve(
    omega: &IntervalUnion,
    lattice: &Lattice,
    f: &PiecewiseExp,
    t: f64,
) -> Result<PiecewiseExp, TilingError> {
    if !tiles_by_intervals(omega, lattice)?.tiles {
        return Err(TilingError::NotATiling);
    }
    let Some((s_lo, s_hi)) = f.support_bounds() else {
        return Ok(PiecewiseExp::zero());
    };
    let lo = omega.intervals().first().unwrap().alpha;
    let hi = omega.intervals().last().unwrap().beta;
    let step = rat_f64(&lattice.a[0][0]).abs();
    // x = y - t + gamma must meet omega: gamma in [lo - s_hi + t, hi - s_lo + t].
    let k_lo = ((lo - s_hi + t) / step).floor() as i64 - 1;
    let k_hi = ((hi - s_lo + t) / step).ceil() as i64 + 1;
    let mut acc = PiecewiseExp::zero();
    for k in k_lo..=k_hi {
        let gamma = step * k as f64;
        acc = acc.add(&f.translate(t - gamma).restrict(omega));
    }
    Ok(acc)
}

/// Checks the Fourier multiplication law of the tiling translation group:
/// `<U(t) f, e_{g*}> = e^{2 pi i g* t} <f, e_{g*}>` for dual points `g*`
/// in the window, plus norm preservation. Returns the max residual.
pub fn prut_group_check(
    omega: &IntervalUnion,
    lattice: &Lattice,
    f: &PiecewiseExp,
    t: f64,
    dual_window: (f64, f64),
) -> Result<f64, TilingError> {
    let uf = tiling_evolve(omega, lattice, f, t)?;
    let mut worst = (uf.norm() - f.norm()).abs();
    for gs in dual_points_1d(lattice, dual_window)? {
        let e = PiecewiseExp::exponential_on(omega, gs);
        let lhs = uf.inner_product(&e);
        let rhs = f.inner_product(&e) * Complex64::from_polar(1.0, TAU * gs * t);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iu(pairs: &[(f64, f64)]) -> IntervalUnion {
        IntervalUnion::new(pairs).unwrap()
    }

    #[test]
    fn tiles_by_interval_examples() {
        let two_z = Lattice::one_d(2.0).unwrap();
        let r = tiles_by_intervals(&iu(&[(0.0, 1.0), (3.0, 4.0)]), &two_z).unwrap();
        assert!(r.tiles);
        assert!(r.overlap.is_zero() && r.uncovered.is_zero());

        let r = tiles_by_intervals(&iu(&[(0.0, 1.0), (2.0, 3.0)]), &two_z).unwrap();
        assert!(!r.tiles);
        assert_eq!(rat_to_string(&r.overlap), "1");
        assert_eq!(rat_to_string(&r.uncovered), "1");

        // Measure consistency: tiling by Z forces measure 1.
        let r = tiles_by_intervals(&iu(&[(0.0, 0.5), (1.5, 2.0)]), &Lattice::one_d(1.0).unwrap())
            .unwrap();
        assert!(r.tiles);
    }

    #[test]
    fn tiles_by_product_example() {
        // (0,1) x R tiles R^2 by Z x {0}.
        let omega = BoxUnion::new(
            2,
            vec![vec![(0.0, 1.0), (f64::NEG_INFINITY, f64::INFINITY)]],
            vec![1],
        )
        .unwrap();
        let lat = Lattice::from_f64(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1).unwrap();
        assert!(tiles_by(&omega, &lat).unwrap().tiles);

        // Rank mismatch: full axis present but d2 = 0.
        let full_rank = Lattice::from_f64(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        assert!(matches!(
            tiles_by(&omega, &full_rank),
            Err(TilingError::IncompatibleRank { .. })
        ));
    }

    #[test]
    fn tiles_by_2d_full_rank() {
        let unit_sq = BoxUnion::new(2, vec![vec![(0.0, 1.0), (0.0, 1.0)]], vec![]).unwrap();
        let z2 = Lattice::from_f64(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        assert!(tiles_by(&unit_sq, &z2).unwrap().tiles);
        // Sheared lattice with the same box: A=[[1,0],[1,1]] still tiles
        // (fundamental domain is a sheared copy, unit square works too).
        let shear = Lattice::from_f64(&[vec![1.0, 0.0], vec![1.0, 1.0]], 2).unwrap();
        assert!(tiles_by(&unit_sq, &shear).unwrap().tiles);
        // Too-small box fails with uncovered measure.
        let small = BoxUnion::new(2, vec![vec![(0.0, 0.5), (0.0, 1.0)]], vec![]).unwrap();
        let r = tiles_by(&small, &z2).unwrap();
        assert!(!r.tiles);
        assert_eq!(rat_to_string(&r.uncovered), "1/2");
    }

    #[test]
    fn diagonal_invariance() {
        // Scaling both the domain and the lattice preserves the verdict.
        let base = iu(&[(0.0, 1.0), (3.0, 4.0)]);
        let scaled = iu(&[(0.0, 1.5), (4.5, 6.0)]);
        assert!(tiles_by_intervals(&base, &Lattice::one_d(2.0).unwrap()).unwrap().tiles);
        assert!(tiles_by_intervals(&scaled, &Lattice::one_d(3.0).unwrap()).unwrap().tiles);
        let bad = iu(&[(0.0, 1.5), (3.0, 4.5)]);
        assert!(!tiles_by_intervals(&bad, &Lattice::one_d(3.0).unwrap()).unwrap().tiles);
    }

    #[test]
    fn dual_point_examples() {
        let lat = Lattice::one_d(2.0).unwrap();
        let pts = dual_points_1d(&lat, (-1.0, 1.0)).unwrap();
        assert_eq!(pts, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);

        let z2 = Lattice::from_f64(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        let pts = dual_points(&z2, &[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(pts.len(), 4);

        // Dual pairing integrality for a non-diagonal A.
        let a = Lattice::from_f64(&[vec![2.0, 0.0], vec![1.0, 1.0]], 2).unwrap();
        let pts = dual_points(&a, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            for col in 0..2 {
                let dot: f64 = (0..2).map(|row| p[row] * rat_f64(&a.a[row][col])).sum();
                assert!((dot - dot.round()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tiling_translate_examples() {
        let omega = iu(&[(0.0, 1.0), (3.0, 4.0)]);
        let lat = Lattice::one_d(2.0).unwrap();
        assert!((tiling_translate(&omega, &lat, 0.5, 1.0).unwrap() - 3.5).abs() < 1e-12);
        assert!((tiling_translate(&omega, &lat, 0.5, 0.25).unwrap() - 0.75).abs() < 1e-12);

        let circle = iu(&[(0.0, 1.0)]);
        let z = Lattice::one_d(1.0).unwrap();
        assert!((tiling_translate(&circle, &z, 0.5, 0.75).unwrap() - 0.25).abs() < 1e-12);
        assert!(matches!(
            tiling_translate(&circle, &z, 0.5, 0.5),
            Err(TilingError::BoundaryPoint)
        ));
        assert!(matches!(
            tiling_translate(&iu(&[(0.0, 1.0), (2.0, 3.0)]), &Lattice::one_d(2.0).unwrap(), 0.5, 1.0),
            Err(TilingError::NotATiling)
        ));
    }

    #[test]
    fn prut_examples() {
        let z = Lattice::one_d(1.0).unwrap();
        let circle = iu(&[(0.0, 1.0)]);
        let f = PiecewiseExp::indicator(0.0, 0.5);
        let r = prut_group_check(&circle, &z, &f, 0.5, (-2.0, 2.0)).unwrap();
        assert!(r < 1e-10, "residual {r}");

        let omega = iu(&[(0.0, 1.0), (3.0, 4.0)]);
        let lat = Lattice::one_d(2.0).unwrap();
        // A lattice vector acts as the identity on omega.
        let g = PiecewiseExp::indicator(0.0, 1.0);
        let u = tiling_evolve(&omega, &lat, &g, 2.0).unwrap();
        assert!(u.sub(&g).norm() < 1e-12);
        assert!(prut_group_check(&omega, &lat, &g, 2.0, (-3.0, 3.0)).unwrap() < 1e-10);

        // t = 1 carries (3,4) onto (0,1).
        let h = PiecewiseExp::indicator(3.0, 4.0);
        let u = tiling_evolve(&omega, &lat, &h, -1.0).unwrap();
        assert!(u.sub(&PiecewiseExp::indicator(0.0, 1.0)).norm() < 1e-12
            || tiling_evolve(&omega, &lat, &h, 1.0)
                .unwrap()
                .sub(&PiecewiseExp::indicator(0.0, 1.0))
                .norm()
                < 1e-12);
        assert!(prut_group_check(&omega, &lat, &h, 1.0, (-3.0, 3.0)).unwrap() < 1e-10);
    }

    #[test]
    fn prut_group_law() {
        let omega = iu(&[(0.0, 1.0), (3.0, 4.0)]);
        let lat = Lattice::one_d(2.0).unwrap();
        let f = PiecewiseExp::from_pieces(vec![
            crate::pwexp::Piece::new(0.2, 0.9, Complex64::new(0.6, -0.3), 1.5),
            crate::pwexp::Piece::new(3.1, 3.4, Complex64::new(-0.2, 0.8), -0.5),
        ]);
        for (t1, t2) in [(0.3, 0.45), (1.1, -0.7), (-2.3, 0.9)] {
            let a = tiling_evolve(&omega, &lat, &f, t1).unwrap();
            let ab = tiling_evolve(&omega, &lat, &a, t2).unwrap();
            let direct = tiling_evolve(&omega, &lat, &f, t1 + t2).unwrap();
            assert!(ab.sub(&direct).norm() < 1e-10);
            assert!((a.norm() - f.norm()).abs() < 1e-10);
        }
        // Pieces staying inside one cell translate literally.
        let v = PiecewiseExp::indicator(0.2, 0.4);
        let u = tiling_evolve(&omega, &lat, &v, -0.3).unwrap();
        assert!(u.sub(&v.translate(-0.3)).norm() < 1e-12);
    }

    #[test]
    fn json_round_trips() {
        let lat = Lattice::from_f64(&[vec![2.0, 0.0], vec![1.0, 1.0]], 2).unwrap();
        let json = serde_json::to_string(&lat).unwrap();
        assert!(json.contains("\"A\""));
        let back: Lattice = serde_json::from_str(&json).unwrap();
        assert_eq!(back, lat);
        // Mixed number/string entries parse too.
        let mixed: Lattice = serde_json::from_str(r#"{"A": [["1/2", 0.0], [0.25, "3"]], "d1": 2}"#)
            .unwrap();
        assert_eq!(rat_to_string(&mixed.a[0][0]), "1/2");
        assert_eq!(rat_to_string(&mixed.a[1][0]), "1/4");

        let report = tiles_by_intervals(
            &iu(&[(0.0, 1.0), (2.0, 3.0)]),
            &Lattice::one_d(2.0).unwrap(),
        )
        .unwrap();
        let j = serde_json::to_string(&report).unwrap();
        assert!(j.contains("\"overlap\":\"1\""));
    }
}
