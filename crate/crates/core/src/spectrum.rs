//! Atomic joint spectrum of the extension determined by `(omega, B)`.
//!
//! For bounded `omega` the eigenvalue condition is `1 in spec M(lambda)`
//! where `M` is the unitary secular matrix. All eigenphases of the
//! similar matrix `S(lambda) = Exp(-lambda l) B^T` decrease strictly in
//! `lambda` at rates between `2 pi min(l)` and `2 pi max(l)`, so the
//! solver tracks sorted phase branches across a grid, brackets every zero
//! crossing, and refines it by bisection.

use crate::boundary::{BoundaryError, BoundaryMatrix, EvolutionEngine};
use crate::geometry::IntervalUnion;
use crate::linalg::{unitary_eig, CMat, LinalgError};
use crate::pwexp::{Piece, PiecewiseExp};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

/// Roots closer than this (in lambda) merge into one spectrum point.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Eigenvalues of `S(lambda*)` this close to 1 select the eigenspace.
pub const EIGENVALUE_SELECT_TOL: f64 = 1e-7;
/// Residual tolerance handed to the unitary eigensolver.
const EIG_RESIDUAL_TOL: f64 = 1e-8;
/// Scan overshoot so roots sitting exactly on the window edge are kept.
const WINDOW_MARGIN: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("spectrum machinery requires a bounded domain")]
    UnboundedDomain,
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("root count {found} disagrees with det winding {winding:.3} by more than {allowance}")]
    WindingMismatch {
        found: usize,
        winding: f64,
        allowance: usize,
    },
}

/// The pair of similar unitary matrices governing the eigenvalue
/// condition at a fixed `lambda`.
#[derive(Clone, Debug)]
pub struct SecularMatrix {
    pub lambda: f64,
    /// `S(lambda) = Exp(-lambda l) B^T`, entries `e^{-2 pi i lambda l_k} b_{i,k}`.
    pub s: CMat,
    /// `M(lambda)`, entries `e^{-2 pi i lambda beta_k} b_{i,k} e^{2 pi i lambda alpha_i}`.
    pub m: CMat,
}

/// Builds `S(lambda)` and `M(lambda)`; both unitary, similar via the
/// diagonal phase matrix `Exp(lambda alpha)`.
pub fn secular(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    lambda: f64,
) -> Result<SecularMatrix, SpectrumError> {
    if !omega.is_bounded() {
        return Err(SpectrumError::UnboundedDomain);
    }
    let p = omega.component_count();
    if b.size() != p {
        return Err(SpectrumError::Boundary(BoundaryError::SizeMismatch {
            rows: b.size(),
            cols: b.matrix().ncols(),
            expected: p,
        }));
    }
    let mut s = CMat::zeros(p, p);
    let mut m = CMat::zeros(p, p);
    for k in 0..p {
        let iv_k = &omega.intervals()[k];
        let phase_len = Complex64::from_polar(1.0, -TAU * lambda * iv_k.length());
        let phase_beta = Complex64::from_polar(1.0, -TAU * lambda * iv_k.beta);
        for i in 0..p {
            let bik = b.entry(i, k);
            s[(k, i)] = phase_len * bik;
            let phase_alpha = Complex64::from_polar(1.0, TAU * lambda * omega.intervals()[i].alpha);
            m[(k, i)] = phase_beta * bik * phase_alpha;
        }
    }
    Ok(SecularMatrix { lambda, s, m })
}

/// Sorted eigenphases of `S(lambda)` in `(-pi, pi]`, with the matching
/// eigenvector columns.
pub fn eigenphases(sec: &SecularMatrix) -> Result<(Vec<f64>, CMat), SpectrumError> {
    let (vals, vecs) = unitary_eig(&sec.s, EIG_RESIDUAL_TOL)?;
    Ok((vals.iter().map(|z| z.arg()).collect(), vecs))
}

/// One atom of the joint spectral measure.
#[derive(Clone, Debug)]
pub struct SpectrumPoint {
    pub lambda: f64,
    pub multiplicity: usize,
    /// `multiplicity` orthonormal vectors `c` in `C^p` with `M(lambda) c = c`.
    pub coeff_vectors: Vec<Vec<Complex64>>,
    /// Worst `||M(lambda) c - c||` over the stored vectors.
    pub residual: f64,
}

/// The spectrum restricted to a window, sorted by `lambda`.
#[derive(Clone, Debug)]
pub struct SpectrumSet {
    pub window: (f64, f64),
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumSet {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|pt| pt.multiplicity).sum()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.lambda).collect()
    }
}

/// Positive remainder of `x` modulo `2 pi`.
fn wrap_pos(x: f64) -> f64 {
    let r = x % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Matches two sorted phase vectors one grid step apart.
///
/// The matching preserves circular order, so it is a rotation by some
/// offset `r`; candidate total motions for different `r` differ by exact
/// multiples of `2 pi`, and the true one equals `2 pi m(Omega) dlambda`.
/// Returns the per-branch phase decreases for the best offset.
fn match_step(prev: &[f64], next: &[f64], expected_drop: f64) -> Vec<f64> {
    let p = prev.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in 0..p {
        let dec: Vec<f64> = (0..p)
            .map(|i| wrap_pos(prev[i] - next[(i + r) % p]))
            .collect();
        let total: f64 = dec.iter().sum();
        let err = (total - expected_drop).abs();
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            best = Some((err, dec));
        }
    }
    best.unwrap().1
}

struct Scanner<'a> {
    omega: &'a IntervalUnion,
    b: &'a BoundaryMatrix,
    measure: f64,
}

impl Scanner<'_> {
    fn phases(&self, lambda: f64) -> Result<Vec<f64>, SpectrumError> {
        let sec = secular(self.omega, self.b, lambda)?;
        Ok(eigenphases(&sec)?.0)
    }

    /// Bisects the crossing of branch `idx` (position in the sorted phase
    /// vector at `lam_a`) inside `(lam_a, lam_b]` down to width `tol`.
    fn refine_root(
        &self,
        mut lam_a: f64,
        mut phases_a: Vec<f64>,
        mut idx: usize,
        mut lam_b: f64,
        tol: f64,
    ) -> Result<f64, SpectrumError> {
        let p = phases_a.len();
        while lam_b - lam_a > tol {
            let mid = 0.5 * (lam_a + lam_b);
            let q = self.phases(mid)?;
            let dec = match_step(&phases_a, &q, TAU * self.measure * (mid - lam_a));
            // Recover the offset realized by this matching to follow the branch.
            let target = wrap_pos(phases_a[idx] - dec[idx]);
            let mut new_idx = idx;
            let mut best = f64::INFINITY;
            for r in 0..p {
                let cand = (idx + r) % p;
                let d = (wrap_pos(q[cand]) - target).abs().min(TAU - (wrap_pos(q[cand]) - target).abs());
                if d < best {
                    best = d;
                    new_idx = cand;
                }
            }
            let phi_new = phases_a[idx] - dec[idx];
            if phi_new <= 0.0 {
                lam_b = mid;
            } else {
                lam_a = mid;
                phases_a = q;
                idx = new_idx;
            }
        }
        Ok(0.5 * (lam_a + lam_b))
    }

    /// Scans `[lo, hi]` for zero crossings; returns refined roots with
    /// `keep_lo <= lambda < keep_hi`.
    fn scan(
        &self,
        lo: f64,
        hi: f64,
        keep: (f64, f64),
        tol: f64,
    ) -> Result<Vec<f64>, SpectrumError> {
        let d_lambda = 1.0 / (8.0 * self.omega.max_length());
        let steps = ((hi - lo) / d_lambda).ceil().max(1.0) as usize;
        let mut roots = Vec::new();
        let mut lam_prev = lo;
        let mut prev = self.phases(lo)?;
        for j in 1..=steps {
            let lam = lo + (hi - lo) * (j as f64) / (steps as f64);
            let next = self.phases(lam)?;
            let dec = match_step(&prev, &next, TAU * self.measure * (lam - lam_prev));
            for (i, &w) in prev.iter().enumerate() {
                if w == 0.0 {
                    roots.push(lam_prev);
                } else if w > 0.0 && w - dec[i] <= 0.0 {
                    roots.push(self.refine_root(lam_prev, prev.clone(), i, lam, tol)?);
                }
            }
            lam_prev = lam;
            prev = next;
        }
        roots.retain(|&r| keep.0 <= r && r < keep.1);
        roots.sort_by(f64::total_cmp);
        Ok(roots)
    }
}

/// Clusters sorted roots within [`CLUSTER_TOL`] and extracts the
/// eigenspace of `M(lambda*)` for each cluster.
fn points_from_roots(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    roots: &[f64],
) -> Result<Vec<SpectrumPoint>, SpectrumError> {
    let p = omega.component_count();
    let mut points = Vec::new();
    let mut start = 0;
    while start < roots.len() {
        let mut end = start + 1;
        while end < roots.len() && roots[end] - roots[end - 1] <= CLUSTER_TOL {
            end += 1;
        }
        let cluster = end - start;
        let lambda = roots[start..end].iter().sum::<f64>() / cluster as f64;
        let sec = secular(omega, b, lambda)?;
        let (vals, vecs) = unitary_eig(&sec.s, EIG_RESIDUAL_TOL)?;
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| {
            (vals[i] - 1.0)
                .norm()
                .total_cmp(&(vals[j] - 1.0).norm())
        });
        // The multiplicity is the cluster size capped by the rank of the
        // 1-eigenspace; the cap discards duplicate detections of the same
        // root (e.g. one sitting exactly on a scan-partition edge).
        let rank = vals
            .iter()
            .filter(|&&v| (v - Complex64::new(1.0, 0.0)).norm() < EIGENVALUE_SELECT_TOL)
            .count()
            .max(1);
        let mult = cluster.min(rank);
        let selected: Vec<usize> = order.iter().copied().take(mult).collect();
        let mut coeff_vectors = Vec::with_capacity(selected.len());
        let mut residual = 0.0f64;
        for &col in &selected {
            let v = vecs.column(col);
            // 1-eigenvectors of M are the phase-corrected 1-eigenvectors of S.
            let c: Vec<Complex64> = (0..p)
                .map(|i| {
                    Complex64::from_polar(1.0, -TAU * lambda * omega.intervals()[i].alpha) * v[i]
                })
                .collect();
            let mc = sec.m.matvec(&c);
            let r: f64 = mc
                .iter()
                .zip(&c)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residual = residual.max(r);
            coeff_vectors.push(c);
        }
        points.push(SpectrumPoint {
            lambda,
            multiplicity: mult,
            coeff_vectors,
            residual,
        });
        start = end;
    }
    Ok(points)
}

/// Audits the root count against the winding of `det S`, which drops at
/// the exact rate `2 pi m(Omega)`. The audit grid refines the scan grid
/// by a factor `p` so the determinant phase moves less than `pi/4` per
/// step.
fn winding_audit(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
    found: usize,
) -> Result<f64, SpectrumError> {
    let p = omega.component_count();
    let d_lambda = 1.0 / (8.0 * omega.max_length() * p as f64);
    let steps = ((window.1 - window.0) / d_lambda).ceil().max(1.0) as usize;
    let mut total_drop = 0.0;
    let mut prev_arg = secular(omega, b, window.0)?.s.det().arg();
    for j in 1..=steps {
        let lam = window.0 + (window.1 - window.0) * (j as f64) / (steps as f64);
        let arg = secular(omega, b, lam)?.s.det().arg();
        total_drop += wrap_pos(prev_arg - arg);
        prev_arg = arg;
    }
    let winding = total_drop / TAU;
    // The window is closed, so roots sitting exactly on both edges can
    // exceed the winding integral by up to p; the extra 1e-6 absorbs the
    // quadrature roundoff of the integral itself.
    if (found as f64 - winding).abs() > p as f64 + 1e-6 {
        return Err(SpectrumError::WindingMismatch {
            found,
            winding,
            allowance: p,
        });
    }
    Ok(winding)
}

/// Computes the spectrum in `window` by eigenphase tracking; roots are
/// refined to `tol` in `lambda` and audited against the det winding.
pub fn find_spectrum(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
    tol: f64,
) -> Result<SpectrumSet, SpectrumError> {
    find_spectrum_threaded(omega, b, window, tol, 1)
}

/// Same as [`find_spectrum`] with the grid scan partitioned across
/// `threads` workers; the chunks own half-open lambda ranges, so the
/// merged result is independent of the partition.
pub fn find_spectrum_threaded(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
    tol: f64,
    threads: usize,
) -> Result<SpectrumSet, SpectrumError> {
    if !omega.is_bounded() {
        return Err(SpectrumError::UnboundedDomain);
    }
    let scanner = Scanner {
        omega,
        b,
        measure: omega.measure(),
    };
    let lo = window.0 - WINDOW_MARGIN;
    let hi = window.1 + WINDOW_MARGIN;
    let threads = threads.max(1).min(64);
    let mut edges = Vec::with_capacity(threads + 1);
    for k in 0..=threads {
        edges.push(lo + (hi - lo) * (k as f64) / (threads as f64));
    }
    let mut roots: Vec<f64> = if threads == 1 {
        scanner.scan(lo, hi, (lo, hi + 1.0), tol)?
    } else {
        let chunks: Vec<Result<Vec<f64>, SpectrumError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|k| {
                    let scanner = &scanner;
                    let (a, b) = (edges[k], edges[k + 1]);
                    let keep_hi = if k + 1 == threads { b + 1.0 } else { b };
                    scope.spawn(move || scanner.scan(a, b, (a, keep_hi), tol))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut all = Vec::new();
        for chunk in chunks {
            all.extend(chunk?);
        }
        all.sort_by(f64::total_cmp);
        all
    };
    roots.retain(|&r| r >= lo && r <= hi);
    let points = points_from_roots(omega, b, &roots)?;
    let set = SpectrumSet { window, points };
    winding_audit(omega, b, window, set.total_multiplicity())?;
    Ok(set)
}

/// Orthonormal eigenfunctions `E_{lambda,k} = sum_Gamma c_Gamma chi_Gamma e_lambda`.
///
/// The coefficient vectors are re-orthonormalized under the weighted
/// inner product `sum c conj(c') l_Gamma` so the returned functions are
/// orthonormal in `L^2(Omega)`.
pub fn eigenfunctions(point: &SpectrumPoint, omega: &IntervalUnion) -> Vec<PiecewiseExp> {
    let lengths = omega.lengths();
    let wip = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter()
            .zip(b)
            .zip(&lengths)
            .map(|((x, y), l)| x * y.conj() * l)
            .sum()
    };
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for c in &point.coeff_vectors {
        let mut v = c.clone();
        for u in &basis {
            let proj = wip(&v, u);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let n = wip(&v, &v).re.sqrt();
        if n < 1e-12 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= n;
        }
        basis.push(v);
    }
    basis
        .iter()
        .map(|c| {
            PiecewiseExp::from_pieces(
                omega
                    .intervals()
                    .iter()
                    .zip(c)
                    .map(|(iv, &ci)| Piece::new(iv.alpha, iv.beta, ci, point.lambda))
                    .collect(),
            )
        })
        .collect()
}

/// Max over sampled times and eigenfunctions of
/// `||U(t) E - e^{2 pi i lambda t} E||`.
pub fn verify_eigen(engine: &EvolutionEngine, point: &SpectrumPoint, t_samples: &[f64]) -> f64 {
    let funcs = eigenfunctions(point, engine.omega());
    let mut worst = 0.0f64;
    for f in &funcs {
        for &t in t_samples {
            let expect = f.scale(Complex64::from_polar(1.0, TAU * point.lambda * t));
            let got = engine.evolve(f, t);
            worst = worst.max(got.sub(&expect).norm());
        }
    }
    worst
}

/// Bessel/Parseval ratio `sum |<f, E>|^2 / ||f||^2` over the window.
pub fn parseval_check(set: &SpectrumSet, omega: &IntervalUnion, f: &PiecewiseExp) -> f64 {
    let norm_sqr = f.norm_sqr();
    if norm_sqr == 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for pt in &set.points {
        for e in eigenfunctions(pt, omega) {
            sum += f.inner_product(&e).norm_sqr();
        }
    }
    sum / norm_sqr
}

/// Minimum gap between consecutive distinct spectrum points.
pub fn separation(set: &SpectrumSet) -> Option<f64> {
    if set.points.len() < 2 {
        return None;
    }
    Some(
        set.points
            .windows(2)
            .map(|w| w[1].lambda - w[0].lambda)
            .fold(f64::INFINITY, f64::min),
    )
}

/// CSV rows: lambda, multiplicity, then `m * p` coefficient re/im pairs.
pub fn to_csv(set: &SpectrumSet) -> String {
    let mut out = String::from("lambda,multiplicity,coefficients_re_im...\n");
    for pt in &set.points {
        out.push_str(&format!("{:.17e},{}", pt.lambda, pt.multiplicity));
        for c in &pt.coeff_vectors {
            for z in c {
                out.push_str(&format!(",{:.17e},{:.17e}", z.re, z.im));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct PointRepr {
    lambda: f64,
    multiplicity: usize,
    #[serde(with = "crate::jsonc::mat")]
    coeff_vectors: Vec<Vec<Complex64>>,
    residual: f64,
}

impl Serialize for SpectrumPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PointRepr {
            lambda: self.lambda,
            multiplicity: self.multiplicity,
            coeff_vectors: self.coeff_vectors.clone(),
            residual: self.residual,
        }
        .serialize(s)
    }
}

impl Serialize for SpectrumSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            window: (f64, f64),
            points: &'a [SpectrumPoint],
        }
        Repr {
            window: self.window,
            points: &self.points,
        }
        .serialize(s)
    }
}
