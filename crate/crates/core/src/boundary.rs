//! Boundary matrices and the unitary evolution group they generate.
//!
//! A unitary matrix B glues the finite left endpoints of an interval union
//! to its finite right endpoints. The resulting one-parameter group U(t)
//! acts exactly on piecewise-exponential functions: mass translates inside
//! each component and wraps through B at the endpoints.

use crate::geometry::IntervalUnion;
use crate::linalg::CMat;
use crate::pwexp::{Piece, PiecewiseExp};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Maximum allowed departure of `B* B` from the identity.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("no self-adjoint extension: {left} finite left endpoints vs {right} finite right endpoints")]
    NoExtension { left: usize, right: usize },
    #[error("boundary matrix is not unitary (defect {defect:.3e}, tolerance {UNITARITY_TOL:.1e})")]
    NotUnitary { defect: f64 },
    #[error("degenerate domain: smallest component length {len} is not positive")]
    DegenerateDomain { len: f64 },
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    SizeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("row/column index sets do not match the components with finite endpoints")]
    IndexMismatch,
    #[error("time step {t} exceeds the small-step bound {max}")]
    StepTooLarge { t: f64, max: f64 },
}

/// The unitary gluing matrix `b_{i,k}`: rows run over components with a
/// finite left endpoint, columns over components with a finite right
/// endpoint, in the order given by `row_index` / `col_index`.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    mat: CMat,
    row_index: Vec<usize>,
    col_index: Vec<usize>,
}

impl BoundaryMatrix {
    pub fn new(
        mat: CMat,
        row_index: Vec<usize>,
        col_index: Vec<usize>,
    ) -> Result<Self, BoundaryError> {
        if mat.nrows() != row_index.len() || mat.ncols() != col_index.len() {
            return Err(BoundaryError::SizeMismatch {
                rows: mat.nrows(),
                cols: mat.ncols(),
                expected: row_index.len(),
            });
        }
        Ok(BoundaryMatrix {
            mat,
            row_index,
            col_index,
        })
    }

    /// Identity gluing on components `0..n`.
    pub fn identity(n: usize) -> Self {
        BoundaryMatrix {
            mat: CMat::identity(n),
            row_index: (0..n).collect(),
            col_index: (0..n).collect(),
        }
    }

    /// Permutation gluing: component `perm[k]` receives the mass leaving
    /// the right endpoint of column component `k`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut mat = CMat::zeros(n, n);
        for (k, &i) in perm.iter().enumerate() {
            mat[(i, k)] = Complex64::new(1.0, 0.0);
        }
        BoundaryMatrix {
            mat,
            row_index: (0..n).collect(),
            col_index: (0..n).collect(),
        }
    }

    pub fn from_entries(
        rows: &[Vec<Complex64>],
        row_index: Vec<usize>,
        col_index: Vec<usize>,
    ) -> Result<Self, BoundaryError> {
        Self::new(CMat::from_rows(rows), row_index, col_index)
    }

    pub fn size(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn row_index(&self) -> &[usize] {
        &self.row_index
    }

    pub fn col_index(&self) -> &[usize] {
        &self.col_index
    }

    /// Entry by position in the row/column orderings.
    pub fn entry(&self, i: usize, k: usize) -> Complex64 {
        self.mat[(i, k)]
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.mat.unitarity_defect()
    }
}

#[derive(Serialize, Deserialize)]
struct BoundaryMatrixRepr {
    rows: usize,
    cols: usize,
    #[serde(with = "crate::jsonc::mat")]
    entries: Vec<Vec<Complex64>>,
    row_index: Vec<usize>,
    col_index: Vec<usize>,
}

impl Serialize for BoundaryMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries = (0..self.mat.nrows())
            .map(|i| (0..self.mat.ncols()).map(|k| self.mat[(i, k)]).collect())
            .collect();
        BoundaryMatrixRepr {
            rows: self.mat.nrows(),
            cols: self.mat.ncols(),
            entries,
            row_index: self.row_index.clone(),
            col_index: self.col_index.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoundaryMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = BoundaryMatrixRepr::deserialize(d)?;
        if repr.entries.len() != repr.rows || repr.entries.iter().any(|r| r.len() != repr.cols) {
            return Err(serde::de::Error::custom("entry matrix shape mismatch"));
        }
        BoundaryMatrix::from_entries(&repr.entries, repr.row_index, repr.col_index)
            .map_err(serde::de::Error::custom)
    }
}

/// Verdict of the spectral-possibility gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralPossible {
    /// Ruled out: unbounded domain with a positive gap.
    No,
    /// Forced: unbounded domain with no gaps is a translate-closed ray or line.
    Yes,
    /// Bounded domains: the gates are silent.
    Unknown,
}

/// Feasibility gates derived from the geometry alone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gates {
    pub extension_exists: bool,
    pub spectral_possible: SpectralPossible,
    pub reasons: Vec<String>,
}

/// Checks whether a self-adjoint extension can exist and whether the
/// spectral-set question is already decided by the geometry.
pub fn gates(omega: &IntervalUnion) -> Gates {
    let left = omega.finite_left_count();
    let right = omega.finite_right_count();
    let extension_exists = left == right;
    let mut reasons = Vec::new();
    if !extension_exists {
        reasons.push(format!(
            "deficiency indices differ: {left} finite left endpoints vs {right} finite right endpoints"
        ));
    }
    let spectral_possible = if omega.is_bounded() {
        reasons.push("bounded domain: spectrality not decided by the gates".into());
        SpectralPossible::Unknown
    } else if omega.has_positive_gap() {
        reasons.push("unbounded domain with a positive gap cannot be spectral".into());
        SpectralPossible::No
    } else {
        reasons.push("unbounded domain without gaps is a half-line or line".into());
        SpectralPossible::Yes
    };
    Gates {
        extension_exists,
        spectral_possible,
        reasons,
    }
}

/// The evolution group `U(t)` determined by `(omega, B)`. Immutable after
/// construction; `evolve` is pure.
#[derive(Clone, Debug)]
pub struct EvolutionEngine {
    omega: IntervalUnion,
    b: BoundaryMatrix,
    eps0: f64,
}

/// Fallback base step when every component is unbounded.
const EPS0_UNBOUNDED: f64 = 1.0;

/// Validates the gluing data and fixes the base step `eps0 = l/4` where
/// `l` is the smallest component length (`1.0` if all components are
/// unbounded).
pub fn build_engine(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
) -> Result<EvolutionEngine, BoundaryError> {
    let left = omega.finite_left_count();
    let right = omega.finite_right_count();
    if left != right {
        return Err(BoundaryError::NoExtension { left, right });
    }
    if b.size() != left || b.matrix().ncols() != right {
        return Err(BoundaryError::SizeMismatch {
            rows: b.size(),
            cols: b.matrix().ncols(),
            expected: left,
        });
    }
    let expected_rows: Vec<usize> = omega
        .intervals()
        .iter()
        .enumerate()
        .filter(|(_, iv)| iv.alpha.is_finite())
        .map(|(i, _)| i)
        .collect();
    let expected_cols: Vec<usize> = omega
        .intervals()
        .iter()
        .enumerate()
        .filter(|(_, iv)| iv.beta.is_finite())
        .map(|(i, _)| i)
        .collect();
    if b.row_index() != expected_rows.as_slice() || b.col_index() != expected_cols.as_slice() {
        return Err(BoundaryError::IndexMismatch);
    }
    if left > 0 {
        let defect = b.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(BoundaryError::NotUnitary { defect });
        }
    }
    let l = omega.min_length();
    if l <= 0.0 {
        return Err(BoundaryError::DegenerateDomain { len: l });
    }
    let eps0 = if l.is_finite() { l / 4.0 } else { EPS0_UNBOUNDED };
    Ok(EvolutionEngine {
        omega: omega.clone(),
        b: b.clone(),
        eps0,
    })
}

impl EvolutionEngine {
    pub fn omega(&self) -> &IntervalUnion {
        &self.omega
    }

    pub fn boundary_matrix(&self) -> &BoundaryMatrix {
        &self.b
    }

    pub fn base_step(&self) -> f64 {
        self.eps0
    }

    /// One small step of the group, `|t| <= 2 eps0`.
    ///
    /// Forward: `U(t)f(x) = f(x+t)` on `(alpha_k, beta_k - t)` and
    /// `sum_i b_{i,k} f(alpha_i + t - (beta_k - x))` on `(beta_k - t, beta_k)`.
    /// Backward steps use the adjoint formula with conjugated entries.
    pub fn evolve_small(&self, f: &PiecewiseExp, t: f64) -> Result<PiecewiseExp, BoundaryError> {
        let max = 2.0 * self.eps0;
        if t.abs() > max * (1.0 + 1e-12) {
            return Err(BoundaryError::StepTooLarge { t, max });
        }
        if t == 0.0 {
            return Ok(f.clone());
        }
        Ok(if t > 0.0 {
            self.small_forward(f, t)
        } else {
            self.small_backward(f, -t)
        })
    }

    fn small_forward(&self, f: &PiecewiseExp, t: f64) -> PiecewiseExp {
        let mut pieces: Vec<Piece> = Vec::new();
        // Interior translation, component by component.
        for iv in self.omega.intervals() {
            let shifted = f.restrict_to_interval(iv.alpha, iv.beta).translate(t);
            let cut = if iv.beta.is_finite() {
                iv.beta - t
            } else {
                f64::INFINITY
            };
            pieces.extend_from_slice(shifted.restrict_to_interval(iv.alpha, cut).pieces());
        }
        // Mass leaving through each finite left endpoint re-enters at the
        // finite right endpoints, weighted by B.
        for (row, &i) in self.b.row_index().iter().enumerate() {
            let alpha_i = self.omega.intervals()[i].alpha;
            let chunk = f.restrict_to_interval(alpha_i, alpha_i + t);
            if chunk.is_zero() {
                continue;
            }
            for (col, &k) in self.b.col_index().iter().enumerate() {
                let w = self.b.entry(row, col);
                if w.norm() == 0.0 {
                    continue;
                }
                let beta_k = self.omega.intervals()[k].beta;
                pieces.extend_from_slice(
                    chunk.translate(alpha_i + t - beta_k).scale(w).pieces(),
                );
            }
        }
        PiecewiseExp::from_pieces(pieces)
    }

    fn small_backward(&self, f: &PiecewiseExp, t: f64) -> PiecewiseExp {
        let mut pieces: Vec<Piece> = Vec::new();
        for iv in self.omega.intervals() {
            let shifted = f.restrict_to_interval(iv.alpha, iv.beta).translate(-t);
            let cut = if iv.alpha.is_finite() {
                iv.alpha + t
            } else {
                f64::NEG_INFINITY
            };
            pieces.extend_from_slice(shifted.restrict_to_interval(cut, iv.beta).pieces());
        }
        // Mass leaving through each finite right endpoint re-enters at the
        // finite left endpoints, weighted by conj(B).
        for (col, &k) in self.b.col_index().iter().enumerate() {
            let beta_k = self.omega.intervals()[k].beta;
            let chunk = f.restrict_to_interval(beta_k - t, beta_k);
            if chunk.is_zero() {
                continue;
            }
            for (row, &i) in self.b.row_index().iter().enumerate() {
                let w = self.b.entry(row, col).conj();
                if w.norm() == 0.0 {
                    continue;
                }
                let alpha_i = self.omega.intervals()[i].alpha;
                pieces.extend_from_slice(
                    chunk.translate(beta_k - t - alpha_i).scale(w).pieces(),
                );
            }
        }
        PiecewiseExp::from_pieces(pieces)
    }

    /// The full group: `t = n*eps0 + r` composed from small steps.
    pub fn evolve(&self, f: &PiecewiseExp, t: f64) -> PiecewiseExp {
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        let mut remaining = t.abs();
        let mut g = f.clone();
        while remaining > self.eps0 {
            g = self
                .evolve_small(&g, sign * self.eps0)
                .expect("step within bound");
            remaining -= self.eps0;
        }
        if remaining > 0.0 {
            g = self
                .evolve_small(&g, sign * remaining)
                .expect("step within bound");
        }
        g
    }
}

/// A single sampled comparison from [`check_local_translation`].
#[derive(Clone, Debug, Serialize)]
pub struct LocalTranslationWitness {
    /// Sampled subinterval `V` inside component `from`.
    pub v: (f64, f64),
    /// Group time applied; the translated support is `V - t`.
    pub t: f64,
    pub from: usize,
    pub to: usize,
    pub discrepancy: f64,
}

/// Outcome of the local-translation predicate.
#[derive(Clone, Debug, Serialize)]
pub struct LocalTranslationReport {
    pub passed: bool,
    pub samples: usize,
    pub tol: f64,
    pub max_discrepancy: f64,
    /// Sample realizing the maximal discrepancy.
    pub worst: Option<LocalTranslationWitness>,
}

/// Bounded sampling window for a (possibly unbounded) component.
fn component_window(iv: &crate::geometry::Interval) -> (f64, f64) {
    match (iv.alpha.is_finite(), iv.beta.is_finite()) {
        (true, true) => (iv.alpha, iv.beta),
        (true, false) => (iv.alpha, iv.alpha + 4.0),
        (false, true) => (iv.beta - 4.0, iv.beta),
        (false, false) => (-2.0, 2.0),
    }
}

/// Samples pairs `(V, t)` with `V` inside one component and `V - t` inside
/// another (or the same) component, and compares `U(t)` against plain
/// translation on test functions supported on `V`. True iff every sampled
/// discrepancy stays below `tol`.
pub fn check_local_translation(
    engine: &EvolutionEngine,
    samples: usize,
    tol: f64,
    seed: u64,
) -> LocalTranslationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = engine.omega().component_count();
    let mut max_discrepancy = 0.0f64;
    let mut worst = None;
    for s in 0..samples {
        // Cycle through ordered component pairs so i != j cases always occur.
        let from = s % p;
        let to = (s / p) % p;
        let (a_f, b_f) = component_window(&engine.omega().intervals()[from]);
        let (a_t, b_t) = component_window(&engine.omega().intervals()[to]);
        let max_w = 0.5 * (b_f - a_f).min(b_t - a_t);
        let w = rng.gen_range(0.25 * max_w..max_w);
        let lo = rng.gen_range(a_f..b_f - w);
        let target_lo = rng.gen_range(a_t..b_t - w);
        // Support moves left by t, so reaching target_lo needs t = lo - target_lo.
        let t = lo - target_lo;
        if from == to && t == 0.0 {
            continue;
        }
        let mut f_pieces = Vec::new();
        for _ in 0..2 {
            let amp = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let freq = rng.gen_range(-5.0..5.0);
            f_pieces.push(Piece::new(lo, lo + w, amp, freq));
        }
        let f = PiecewiseExp::from_pieces(f_pieces);
        let evolved = engine.evolve(&f, t);
        let translated = f.translate(t);
        let norm = f.norm().max(1e-30);
        let discrepancy = evolved.sub(&translated).norm() / norm;
        if discrepancy > max_discrepancy {
            max_discrepancy = discrepancy;
            worst = Some(LocalTranslationWitness {
                v: (lo, lo + w),
                t,
                from,
                to,
                discrepancy,
            });
        }
    }
    LocalTranslationReport {
        passed: max_discrepancy <= tol,
        samples,
        tol,
        max_discrepancy,
        worst,
    }
}
