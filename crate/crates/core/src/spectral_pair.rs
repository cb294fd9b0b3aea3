//! Desk-scale tests for candidate spectra and pair measures:
//! orthogonality of exponential families, truncated completeness
//! estimates, the all-ones eigenvector criterion, and lattice Parseval
//! checks.

use crate::geometry::{omega_hat, GeometryError, IntervalUnion};
use crate::pwexp::PiecewiseExp;
use crate::spectrum::SpectrumSet;
use crate::tiling::{dual_points_1d, Lattice, TilingError};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Calibration constant of the tail budget `C / half_width`, matching
/// the `O(1/N)` Fourier tail of indicator functions.
pub const TAIL_BUDGET_C: f64 = 2.0;

#[derive(Debug, Error)]
pub enum SpectralPairError {
    #[error("pair-measure check needs a full-rank lattice; use the product branch of tiling")]
    NotFullRank,
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Outcome of the pairwise orthogonality scan over a candidate set.
#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityReport {
    pub orthogonal: bool,
    pub max_offdiag: f64,
    pub tol: f64,
    /// Pair realizing the maximum off-diagonal magnitude.
    pub worst_pair: Option<(f64, f64)>,
}

/// Evaluates `|<e_lambda, e_gamma>| = |omega_hat(gamma - lambda)|` over
/// all pairs from `lambdas`.
pub fn orthogonality_test(
    omega: &IntervalUnion,
    lambdas: &[f64],
    tol: f64,
) -> Result<OrthogonalityReport, SpectralPairError> {
    let mut max_offdiag = 0.0f64;
    let mut worst_pair = None;
    for (i, &l) in lambdas.iter().enumerate() {
        for &g in &lambdas[i + 1..] {
            let v = omega_hat(omega, g - l)?.norm();
            if v > max_offdiag {
                max_offdiag = v;
                worst_pair = Some((l, g));
            }
        }
    }
    Ok(OrthogonalityReport {
        orthogonal: max_offdiag <= tol,
        max_offdiag,
        tol,
        worst_pair,
    })
}

/// Truncated Bessel ratio of `f` against the normalized exponentials
/// `e_lambda / sqrt(m(Omega))`, `lambda` from the candidate list.
pub fn completeness_ratio(omega: &IntervalUnion, lambdas: &[f64], f: &PiecewiseExp) -> f64 {
    let denom = omega.measure() * f.norm_sqr();
    if denom == 0.0 {
        return 1.0;
    }
    let sum: f64 = lambdas
        .iter()
        .map(|&l| {
            f.inner_product(&PiecewiseExp::exponential_on(omega, l))
                .norm_sqr()
        })
        .sum();
    sum / denom
}

/// Completeness estimate over seeded random trials. Truncation can never
/// certify completeness, so the verdict compares the worst ratio against
/// an explicit tail budget.
#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub min_ratio: f64,
    pub ratios: Vec<f64>,
    pub tail_budget: f64,
    /// True iff `min_ratio >= 1 - tail_budget`.
    pub consistent: bool,
}

pub fn completeness_estimate(
    omega: &IntervalUnion,
    lambdas: &[f64],
    trial_count: usize,
    seed: u64,
) -> CompletenessReport {
    let half_width = lambdas
        .iter()
        .fold(0.0f64, |m, &l| m.max(l.abs()))
        .max(1.0);
    let tail_budget = TAIL_BUDGET_C / half_width;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(trial_count);
    for _ in 0..trial_count {
        let f = random_trial_function(omega, &mut rng);
        ratios.push(completeness_ratio(omega, lambdas, &f));
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    CompletenessReport {
        min_ratio,
        ratios,
        tail_budget,
        consistent: min_ratio >= 1.0 - tail_budget,
    }
}

/// A random piecewise-exponential test function supported in `omega`:
/// amplitudes from the unit disk, frequencies in `[-5, 5]`, supports
/// uniform within components.
pub fn random_trial_function(omega: &IntervalUnion, rng: &mut ChaCha8Rng) -> PiecewiseExp {
    let mut pieces = Vec::new();
    for iv in omega.intervals() {
        let n = rng.gen_range(1..=2);
        for _ in 0..n {
            let w = rng.gen_range(0.2..0.9) * iv.length();
            let lo = iv.alpha + rng.gen_range(0.0..(iv.length() - w));
            let amp = Complex64::from_polar(
                rng.gen_range(0.1..1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let freq = rng.gen_range(-5.0..5.0);
            pieces.push(crate::pwexp::Piece::new(lo, lo + w, amp, freq));
        }
    }
    PiecewiseExp::from_pieces(pieces)
}

/// Outcome of the all-ones eigenvector criterion.
#[derive(Clone, Debug, Serialize)]
pub struct LocalTranslationCriterion {
    pub holds: bool,
    /// Worst distance of a coefficient vector from the span of the
    /// all-ones vector, over the whole window.
    pub worst_deviation: f64,
    pub multiplicities_ok: bool,
}

/// True iff every spectrum point has multiplicity 1 with coefficient
/// vector proportional to the all-ones vector (within 1e-8); exactly the
/// condition under which the group acts by local translations and the
/// pure exponentials `e_lambda` are orthogonal.
pub fn local_translation_criterion(set: &SpectrumSet) -> LocalTranslationCriterion {
    let mut worst = 0.0f64;
    let mut mult_ok = true;
    for pt in &set.points {
        if pt.multiplicity != 1 {
            mult_ok = false;
            continue;
        }
        let c = &pt.coeff_vectors[0];
        let p = c.len() as f64;
        // Distance from c to its projection onto 1/sqrt(p).
        let mean: Complex64 = c.iter().sum::<Complex64>() / p;
        let dev: f64 = c
            .iter()
            .map(|ci| (ci - mean).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(dev);
    }
    LocalTranslationCriterion {
        holds: mult_ok && worst <= 1e-8,
        worst_deviation: worst,
        multiplicities_ok: mult_ok,
    }
}

/// Relative Parseval defect of one function against the dual lattice
/// window `[-N, N]`:
/// `| ||f||^2 - |det A|^{-1} sum_{g* in T*, |g*|<=N} |f^(g*)|^2 | / ||f||^2`.
pub fn pair_measure_defect(
    omega: &IntervalUnion,
    lattice: &Lattice,
    f: &PiecewiseExp,
    window_n: f64,
) -> Result<f64, SpectralPairError> {
    if lattice.d2() > 0 {
        return Err(SpectralPairError::NotFullRank);
    }
    let norm_sqr = f.norm_sqr();
    if norm_sqr == 0.0 {
        return Ok(0.0);
    }
    let det_abs = lattice.det_abs_f64();
    let mut sum = 0.0;
    for gs in dual_points_1d(lattice, (-window_n, window_n))? {
        // f^(g*) = <f, e_{g*}> over the support of f.
        let e = PiecewiseExp::exponential_on(omega, gs);
        sum += f.inner_product(&e).norm_sqr();
    }
    Ok((norm_sqr - sum / det_abs).abs() / norm_sqr)
}

/// Max relative Parseval defect over `chi_Omega` and seeded random
/// trials.
pub fn pair_measure_check(
    omega: &IntervalUnion,
    lattice: &Lattice,
    window_n: f64,
    trials: usize,
    seed: u64,
) -> Result<f64, SpectralPairError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi: PiecewiseExp = PiecewiseExp::from_pieces(
        omega
            .intervals()
            .iter()
            .map(|iv| crate::pwexp::Piece::new(iv.alpha, iv.beta, Complex64::new(1.0, 0.0), 0.0))
            .collect(),
    );
    let mut worst = pair_measure_defect(omega, lattice, &chi, window_n)?;
    for _ in 0..trials {
        let f = random_trial_function(omega, &mut rng);
        worst = worst.max(pair_measure_defect(omega, lattice, &f, window_n)?);
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
    fn orthogonality_examples() {
        let r = orthogonality_test(&iu(&[(0.0, 1.0)]), &[0.0, 1.0, 2.0], 1e-10).unwrap();
        assert!(r.orthogonal);

        let r = orthogonality_test(&iu(&[(0.0, 1.0), (3.0, 4.0)]), &[0.0, 0.5, 1.0, 1.5], 1e-10)
            .unwrap();
        assert!(r.orthogonal, "max {}", r.max_offdiag);

        let r = orthogonality_test(&iu(&[(0.0, 1.0), (2.0, 3.0)]), &[0.0, 0.5], 1e-10).unwrap();
        assert!(!r.orthogonal);
        assert!((r.max_offdiag - 4.0 / std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(r.worst_pair, Some((0.0, 0.5)));
    }

    #[test]
    fn orthogonality_translation_invariance() {
        let omega = iu(&[(0.0, 1.0), (3.0, 4.0)]);
        let lambdas = [0.3, 0.7, 1.9];
        let a = orthogonality_test(&omega, &lambdas, 1e-10).unwrap();
        let shifted: Vec<f64> = lambdas.iter().map(|l| l + 5.37).collect();
        let b = orthogonality_test(&omega, &shifted, 1e-10).unwrap();
        assert!((a.max_offdiag - b.max_offdiag).abs() < 1e-12);
    }

    #[test]
    fn completeness_examples() {
        let omega = iu(&[(0.0, 1.0)]);
        // chi_(0,1) is e_0 itself: single term gives ratio 1.
        let full: Vec<f64> = (-20..=20).map(|n| n as f64).collect();
        let r = completeness_ratio(&omega, &full, &PiecewiseExp::indicator(0.0, 1.0));
        assert!((r - 1.0).abs() < 1e-12);

        // Half indicator: classical Fourier tail.
        let half = PiecewiseExp::indicator(0.0, 0.5);
        let r = completeness_ratio(&omega, &full, &half);
        assert!(r >= 0.95 && r <= 1.0 + 1e-9, "ratio {r}");

        // Half-density candidate bounded away from 1.
        let sparse: Vec<f64> = (-20..=20).map(|n| 2.0 * n as f64).collect();
        let r = completeness_ratio(&omega, &sparse, &half);
        assert!((r - 0.5).abs() < 1e-9, "ratio {r}");
    }

    #[test]
    fn completeness_estimate_consistency() {
        let omega = iu(&[(0.0, 1.0)]);
        let full: Vec<f64> = (-30..=30).map(|n| n as f64).collect();
        let rep = completeness_estimate(&omega, &full, 8, 5);
        assert!(rep.consistent, "min ratio {} budget {}", rep.min_ratio, rep.tail_budget);
        assert!(rep.ratios.iter().all(|&r| r <= 1.0 + 1e-9));

        let sparse: Vec<f64> = (-30..=30).map(|n| 2.0 * n as f64).collect();
        let rep = completeness_estimate(&omega, &sparse, 8, 5);
        assert!(!rep.consistent);
    }

    #[test]
    fn criterion_on_computed_spectra() {
        use crate::boundary::BoundaryMatrix;
        use crate::spectrum::find_spectrum;

        let omega = iu(&[(0.0, 1.0)]);
        let set = find_spectrum(&omega, &BoundaryMatrix::identity(1), (-2.5, 2.5), 1e-12).unwrap();
        assert!(local_translation_criterion(&set).holds);

        let omega = iu(&[(0.0, 1.0), (2.0, 3.0)]);
        let set =
            find_spectrum(&omega, &BoundaryMatrix::permutation(&[1, 0]), (-1.25, 1.25), 1e-12)
                .unwrap();
        let c = local_translation_criterion(&set);
        assert!(!c.holds);
        assert!(c.worst_deviation > 0.5);

        // The 2Z-tiling gluing of (0,1) u (3,4): all points carry c ∝ 1.
        let omega = iu(&[(0.0, 1.0), (3.0, 4.0)]);
        let set =
            find_spectrum(&omega, &BoundaryMatrix::permutation(&[1, 0]), (-1.25, 1.25), 1e-12)
                .unwrap();
        let c = local_translation_criterion(&set);
        assert!(c.holds, "deviation {}", c.worst_deviation);

        // Criterion true implies plain exponentials orthogonal.
        let r = orthogonality_test(&omega, &set.lambdas(), 1e-9).unwrap();
        assert!(r.orthogonal, "max {}", r.max_offdiag);
    }

    #[test]
    fn pair_measure_examples() {
        let omega = iu(&[(0.0, 1.0), (3.0, 4.0)]);
        let lat = Lattice::one_d(2.0).unwrap();
        let chi = PiecewiseExp::indicator(0.0, 1.0).add(&PiecewiseExp::indicator(3.0, 4.0));
        for n in [0.0, 5.0, 20.0] {
            let d = pair_measure_defect(&omega, &lat, &chi, n).unwrap();
            assert!(d < 1e-10, "defect {d} at N={n}");
        }

        let circle = iu(&[(0.0, 1.0)]);
        let z = Lattice::one_d(1.0).unwrap();
        let half = PiecewiseExp::indicator(0.0, 0.5);
        let d = pair_measure_defect(&circle, &z, &half, 20.0).unwrap();
        assert!(d <= 0.05, "defect {d}");

        // (0,1) u (2,3) overlaps itself mod 2Z: the dual exponentials
        // alias across components and the defect stays near 1.
        let bad_omega = iu(&[(0.0, 1.0), (2.0, 3.0)]);
        let bad = Lattice::one_d(2.0).unwrap();
        for n in [10.0, 20.0, 40.0] {
            let d = pair_measure_defect(&bad_omega, &bad, &chi_omega(&bad_omega), n).unwrap();
            assert!(d > 0.5, "defect {d} at N={n}");
        }
    }

    fn chi_omega(omega: &IntervalUnion) -> PiecewiseExp {
        PiecewiseExp::from_pieces(
            omega
                .intervals()
                .iter()
                .map(|iv| {
                    crate::pwexp::Piece::new(iv.alpha, iv.beta, Complex64::new(1.0, 0.0), 0.0)
                })
                .collect(),
        )
    }

    #[test]
    fn not_full_rank_routed() {
        let omega = iu(&[(0.0, 1.0)]);
        let lat = Lattice::from_f64(&[vec![1.0]], 0);
        // d1 = 0 in 1D means a continuous dual.
        let lat = lat.unwrap();
        let f = PiecewiseExp::indicator(0.0, 0.5);
        assert!(matches!(
            pair_measure_defect(&omega, &lat, &f, 5.0),
            Err(SpectralPairError::NotFullRank)
        ));
    }
}
