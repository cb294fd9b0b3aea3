//! Seeded property suites over random engine instances, shared by the
//! command-line `verify` subcommand and the acceptance tests. Each suite
//! returns a serializable report with per-check residuals and the first
//! counterexample's inputs.

use crate::boundary::{build_engine, check_local_translation, BoundaryMatrix, EvolutionEngine};
use crate::geometry::IntervalUnion;
use crate::linalg::CMat;
use crate::pwexp::PiecewiseExp;
use crate::spectral_pair::{pair_measure_defect, random_trial_function};
use crate::spectrum::{find_spectrum, parseval_check, verify_eigen};
use crate::tiling::{prut_group_check, tiles_by_intervals, tiling_evolve, Lattice};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

/// Report of one property suite run.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: usize,
    pub tol: f64,
    pub max_residual: f64,
    pub passed: bool,
    /// Inputs of the first check whose residual exceeded the tolerance.
    pub counterexample: Option<serde_json::Value>,
}

struct Recorder {
    suite: &'static str,
    seed: u64,
    tol: f64,
    checks: usize,
    max_residual: f64,
    counterexample: Option<serde_json::Value>,
}

impl Recorder {
    fn new(suite: &'static str, seed: u64, tol: f64) -> Self {
        Recorder {
            suite,
            seed,
            tol,
            checks: 0,
            max_residual: 0.0,
            counterexample: None,
        }
    }

    fn record(&mut self, residual: f64, witness: impl FnOnce() -> serde_json::Value) {
        self.checks += 1;
        let residual = if residual.is_finite() { residual } else { f64::INFINITY };
        if residual > self.max_residual {
            self.max_residual = residual;
        }
        if residual > self.tol && self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite.to_string(),
            seed: self.seed,
            checks: self.checks,
            tol: self.tol,
            max_residual: self.max_residual,
            passed: self.counterexample.is_none(),
            counterexample: self.counterexample,
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniforms.
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// Haar-style random unitary: QR (modified Gram-Schmidt) of a complex
/// Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(gauss(rng), gauss(rng)))
                .collect()
        })
        .collect();
    for j in 0..n {
        for k in 0..j {
            let proj: Complex64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..n {
                let d = proj * cols[k][i];
                cols[j][i] -= d;
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    let mut m = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = cols[j][i];
        }
    }
    m
}

/// A random bounded instance: `p <= max_p` components with commensurate
/// lengths `0.25 k` (so evolution steps stay large) and a random unitary
/// boundary matrix.
pub fn random_instance(rng: &mut ChaCha8Rng, max_p: usize) -> (IntervalUnion, BoundaryMatrix) {
    let p = rng.gen_range(1..=max_p);
    let mut pairs = Vec::with_capacity(p);
    let mut x = rng.gen_range(-3.0..3.0);
    for _ in 0..p {
        let len = 0.25 * rng.gen_range(2..=6) as f64;
        pairs.push((x, x + len));
        x += len + rng.gen_range(0.3..1.7);
    }
    let omega = IntervalUnion::new(&pairs).expect("random pairs are ordered");
    let idx: Vec<usize> = (0..p).collect();
    let b = BoundaryMatrix::new(random_unitary(p, rng), idx.clone(), idx)
        .expect("random unitary is a valid boundary matrix");
    (omega, b)
}

fn instance_json(omega: &IntervalUnion, b: &BoundaryMatrix) -> serde_json::Value {
    json!({ "omega": omega, "boundary": b })
}

/// Norm preservation, strong continuity, and support propagation on
/// `instances` random engines.
pub fn suite_unitarity(seed: u64, instances: usize) -> SuiteReport {
    let mut rec = Recorder::new("unitarity", seed, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..instances {
        let (omega, b) = random_instance(&mut rng, 5);
        let engine = build_engine(&omega, &b).expect("random instance is glueable");
        let f = random_trial_function(&omega, &mut rng);
        let nf = f.norm();

        // Norm preservation at a long and a short random time.
        for t in [rng.gen_range(-10.0..10.0), rng.gen_range(-1.0..1.0)] {
            let r = (engine.evolve(&f, t).norm() - nf).abs() / nf;
            rec.record(r, || {
                json!({ "check": "norm", "t": t, "f": f,
                        "instance": instance_json(&omega, &b) })
            });
        }

        strong_continuity_checks(&mut rec, &engine, &mut rng, &omega, &b);
        support_propagation_check(&mut rec, &engine, &mut rng, &omega, &b);
    }
    rec.finish()
}

/// Strong continuity realized exactly: for f supported strictly inside a
/// component and |h| below the margin, U(h) acts as plain translation, so
/// the residual is pure roundoff; additionally ||U(h)f - f|| must shrink
/// with h.
fn strong_continuity_checks(
    rec: &mut Recorder,
    engine: &EvolutionEngine,
    rng: &mut ChaCha8Rng,
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
) {
    let iv = &omega.intervals()[rng.gen_range(0..omega.component_count())];
    let len = iv.length();
    let f = PiecewiseExp::from_pieces(vec![crate::pwexp::Piece::new(
        iv.alpha + 0.3 * len,
        iv.alpha + 0.6 * len,
        Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)),
        rng.gen_range(-5.0..5.0),
    )]);
    let nf = f.norm();
    let margin = 0.3 * len;
    let h1 = 0.25 * margin;
    let h2 = margin / 64.0;
    for h in [h1, h2, -h1] {
        let r = engine.evolve(&f, h).sub(&f.translate(h)).norm() / nf;
        rec.record(r, || {
            json!({ "check": "continuity-exact", "h": h, "f": f,
                    "instance": instance_json(omega, b) })
        });
    }
    let d1 = engine.evolve(&f, h1).sub(&f).norm();
    let d2 = engine.evolve(&f, h2).sub(&f).norm();
    rec.record((d2 - d1).max(0.0), || {
        json!({ "check": "continuity-monotone", "h1": h1, "h2": h2, "f": f,
                "instance": instance_json(omega, b) })
    });
}

/// Mass leaving a finite left endpoint `alpha_i` after time `eps` lives in
/// the union of `[beta_k - eps, beta_k]` over columns with `b_{i,k} != 0`.
fn support_propagation_check(
    rec: &mut Recorder,
    engine: &EvolutionEngine,
    rng: &mut ChaCha8Rng,
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
) {
    let i = rng.gen_range(0..omega.component_count());
    let iv = &omega.intervals()[i];
    let eps = (0.2f64).min(engine.base_step());
    let f = PiecewiseExp::indicator(iv.alpha, iv.alpha + eps);
    let u = engine.evolve(&f, eps);
    let slack = 1e-12;
    let mut out_mass = 0.0f64;
    for piece in u.pieces() {
        let inside = omega.intervals().iter().enumerate().any(|(k, ivk)| {
            b.entry(i, k).norm() > 1e-14
                && piece.support.0 >= ivk.beta - eps - slack
                && piece.support.1 <= ivk.beta + slack
        });
        if !inside {
            out_mass += piece.amp.norm_sqr() * piece.len();
        }
    }
    let r = out_mass.sqrt() / f.norm() + (u.norm() - f.norm()).abs() / f.norm();
    rec.record(r, || {
        json!({ "check": "support", "component": i, "eps": eps,
                "instance": instance_json(omega, b) })
    });
}

/// Group law, inverse, and adjoint identities on random engines.
pub fn suite_grouplaw(seed: u64, instances: usize) -> SuiteReport {
    let mut rec = Recorder::new("grouplaw", seed, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..instances {
        let (omega, b) = random_instance(&mut rng, 5);
        let engine = build_engine(&omega, &b).expect("random instance is glueable");
        let f = random_trial_function(&omega, &mut rng);
        let g = random_trial_function(&omega, &mut rng);
        let (nf, ng) = (f.norm(), g.norm());
        let t1 = rng.gen_range(-5.0..5.0);
        let t2 = rng.gen_range(-5.0..5.0);

        let lhs = engine.evolve(&engine.evolve(&f, t2), t1);
        let rhs = engine.evolve(&f, t1 + t2);
        rec.record(lhs.sub(&rhs).norm() / nf, || {
            json!({ "check": "grouplaw", "t1": t1, "t2": t2, "f": f,
                    "instance": instance_json(&omega, &b) })
        });

        let back = engine.evolve(&engine.evolve(&f, t1), -t1);
        rec.record(back.sub(&f).norm() / nf, || {
            json!({ "check": "inverse", "t": t1, "f": f,
                    "instance": instance_json(&omega, &b) })
        });

        // <U(t) f, g> = <f, U(-t) g>.
        let a = engine.evolve(&f, t1).inner_product(&g);
        let c = f.inner_product(&engine.evolve(&g, -t1));
        rec.record((a - c).norm() / (nf * ng), || {
            json!({ "check": "adjoint", "t": t1, "f": f, "g": g,
                    "instance": instance_json(&omega, &b) })
        });
    }
    rec.finish()
}

/// Eigen-relation `U(t) E = e^{2 pi i lambda t} E` on the spectra of
/// random engines.
pub fn suite_eigen(seed: u64, instances: usize) -> SuiteReport {
    let mut rec = Recorder::new("eigen", seed, 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..instances {
        let (omega, b) = random_instance(&mut rng, 3);
        let engine = build_engine(&omega, &b).expect("random instance is glueable");
        let set = find_spectrum(&omega, &b, (-1.6, 1.6), 1e-12).expect("bounded instance");
        for pt in &set.points {
            let r = verify_eigen(&engine, pt, &[0.37, 1.0, -2.2]);
            rec.record(r, || {
                json!({ "check": "eigen", "lambda": pt.lambda,
                        "instance": instance_json(&omega, &b) })
            });
        }
    }
    rec.finish()
}

/// Truncated Parseval ratios on the two-interval swap fixture: within
/// `[0.95, 1 + 1e-9]` and monotone over nested windows; Bessel bound on
/// random trial functions.
pub fn suite_parseval(seed: u64) -> SuiteReport {
    let mut rec = Recorder::new("parseval", seed, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = IntervalUnion::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
    let b = BoundaryMatrix::permutation(&[1, 0]);
    let chi = PiecewiseExp::indicator(0.0, 1.0);
    let mut prev = 0.0f64;
    for half in [5.5, 10.5, 20.5] {
        let set = find_spectrum(&omega, &b, (-half, half), 1e-12).expect("swap fixture");
        let ratio = parseval_check(&set, &omega, &chi);
        rec.record((0.95 - ratio).max(0.0) + (ratio - 1.0).max(0.0), || {
            json!({ "check": "ratio-window", "half_width": half, "ratio": ratio })
        });
        rec.record((prev - ratio).max(0.0), || {
            json!({ "check": "monotone", "half_width": half, "ratio": ratio, "prev": prev })
        });
        prev = ratio;
        if half == 20.5 {
            for _ in 0..3 {
                let f = random_trial_function(&omega, &mut rng);
                let r = parseval_check(&set, &omega, &f);
                rec.record((r - 1.0).max(0.0), || {
                    json!({ "check": "bessel", "ratio": r, "f": f })
                });
            }
        }
    }
    rec.finish()
}

/// Local-translation predicate on a chosen engine.
pub fn suite_localtranslation(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    seed: u64,
) -> SuiteReport {
    let mut rec = Recorder::new("localtranslation", seed, 1e-9);
    match build_engine(omega, b) {
        Ok(engine) => {
            let report = check_local_translation(&engine, 60, 1e-9, seed);
            rec.record(report.max_discrepancy, || {
                json!({ "check": "local-translation", "witness": report.worst,
                        "instance": instance_json(omega, b) })
            });
        }
        Err(e) => {
            rec.record(f64::INFINITY, || {
                json!({ "check": "build-engine", "error": e.to_string(),
                        "instance": instance_json(omega, b) })
            });
        }
    }
    rec.finish()
}

/// Default fixture for the local-translation suite: the 2Z-tiling gluing
/// of (0,1) u (3,4), on which the predicate holds.
pub fn default_localtranslation_fixture() -> (IntervalUnion, BoundaryMatrix) {
    (
        IntervalUnion::new(&[(0.0, 1.0), (3.0, 4.0)]).unwrap(),
        BoundaryMatrix::permutation(&[1, 0]),
    )
}

/// Exact tiling fixtures, scale invariance, measure consistency, and the
/// tiling translation group law.
pub fn suite_tiling(seed: u64) -> SuiteReport {
    let mut rec = Recorder::new("tiling", seed, 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let good = IntervalUnion::new(&[(0.0, 1.0), (3.0, 4.0)]).unwrap();
    let two_z = Lattice::one_d(2.0).unwrap();
    let rep = tiles_by_intervals(&good, &two_z).expect("bounded fixture");
    let r = if rep.tiles { 0.0 } else { 1.0 } + rep.overlap_f64() + rep.uncovered_f64();
    rec.record(r, || json!({ "check": "tiles-good", "report": rep }));

    let bad = IntervalUnion::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
    let rep = tiles_by_intervals(&bad, &two_z).expect("bounded fixture");
    let r = if rep.tiles { 1.0 } else { 0.0 } + (rep.overlap_f64() - 1.0).abs();
    rec.record(r, || json!({ "check": "tiles-bad", "report": rep }));

    // Scale invariance on dyadic scales (exactly representable, so the
    // scaled endpoints stay rationally consistent).
    for _ in 0..10 {
        let num = rng.gen_range(1..=8) as f64;
        let den = (1u32 << rng.gen_range(0..=2)) as f64;
        let s = num / den;
        let scaled = IntervalUnion::new(&[(0.0, s), (3.0 * s, 4.0 * s)]).unwrap();
        let lat = Lattice::one_d(2.0 * s).unwrap();
        let rep = tiles_by_intervals(&scaled, &lat).expect("bounded fixture");
        let r = if rep.tiles { 0.0 } else { 1.0 } + rep.overlap_f64() + rep.uncovered_f64();
        rec.record(r, || json!({ "check": "scale-invariance", "scale": s, "report": rep }));
    }

    // Measure consistency: a split fundamental cell tiles by Z and has
    // measure exactly 1.
    for _ in 0..5 {
        let a = rng.gen_range(1..=7) as f64 / 8.0;
        let k = rng.gen_range(1..=3) as f64;
        let omega = IntervalUnion::new(&[(0.0, a), (a + k, 1.0 + k)]).unwrap();
        let z = Lattice::one_d(1.0).unwrap();
        let rep = tiles_by_intervals(&omega, &z).expect("bounded fixture");
        let r = if rep.tiles { 0.0 } else { 1.0 } + (omega.measure() - 1.0).abs();
        rec.record(r, || json!({ "check": "measure-consistency", "a": a, "k": k }));
    }

    // Prop 5.10 fixtures: exact Fourier multiplication law.
    let circle = IntervalUnion::new(&[(0.0, 1.0)]).unwrap();
    let z = Lattice::one_d(1.0).unwrap();
    let half = PiecewiseExp::indicator(0.0, 0.5);
    let r = prut_group_check(&circle, &z, &half, 0.5, (-2.0, 2.0)).expect("fixture");
    rec.record(r, || json!({ "check": "prut-circle" }));

    let chi = PiecewiseExp::indicator(0.0, 1.0).add(&PiecewiseExp::indicator(3.0, 4.0));
    let u2 = tiling_evolve(&good, &two_z, &chi, 2.0).expect("fixture");
    rec.record(u2.sub(&chi).norm(), || json!({ "check": "prut-lattice-identity" }));

    let f34 = PiecewiseExp::indicator(3.0, 4.0);
    let u1 = tiling_evolve(&good, &two_z, &f34, 1.0).expect("fixture");
    rec.record(u1.sub(&PiecewiseExp::indicator(0.0, 1.0)).norm(), || {
        json!({ "check": "prut-swap-cell" })
    });
    let r = prut_group_check(&good, &two_z, &f34, 1.0, (-3.0, 3.0)).expect("fixture");
    rec.record(r, || json!({ "check": "prut-fourier" }));

    // Group law and unitarity of the tiling translation on random data.
    for _ in 0..50 {
        let f = random_trial_function(&good, &mut rng);
        let t1 = rng.gen_range(-4.0..4.0);
        let t2 = rng.gen_range(-4.0..4.0);
        let one = tiling_evolve(&good, &two_z, &f, t2).expect("fixture");
        let lhs = tiling_evolve(&good, &two_z, &one, t1).expect("fixture");
        let rhs = tiling_evolve(&good, &two_z, &f, t1 + t2).expect("fixture");
        let r = lhs.sub(&rhs).norm() / f.norm()
            + (rhs.norm() - f.norm()).abs() / f.norm();
        rec.record(r, || json!({ "check": "prut-grouplaw", "t1": t1, "t2": t2, "f": f }));
    }
    rec.finish()
}

/// Lattice Parseval defects on the tiling and non-tiling fixtures.
pub fn suite_pairmeasure(seed: u64) -> SuiteReport {
    let mut rec = Recorder::new("pairmeasure", seed, 1e-9);
    let good = IntervalUnion::new(&[(0.0, 1.0), (3.0, 4.0)]).unwrap();
    let two_z = Lattice::one_d(2.0).unwrap();

    let chi = PiecewiseExp::indicator(0.0, 1.0).add(&PiecewiseExp::indicator(3.0, 4.0));
    let d = pair_measure_defect(&good, &two_z, &chi, 20.0).expect("full-rank fixture");
    rec.record(d, || json!({ "check": "chi-omega-defect", "defect": d }));

    let half = PiecewiseExp::indicator(0.0, 0.5);
    let d = pair_measure_defect(&good, &two_z, &half, 20.0).expect("full-rank fixture");
    rec.record((d - 0.05).max(0.0), || json!({ "check": "half-indicator-defect", "defect": d }));

    // Defect shrinks as the dual window grows (Fuglede direction).
    let d10 = pair_measure_defect(&good, &two_z, &half, 10.0).expect("full-rank fixture");
    let d40 = pair_measure_defect(&good, &two_z, &half, 40.0).expect("full-rank fixture");
    rec.record((d40 - d10).max(0.0), || {
        json!({ "check": "defect-decreasing", "d10": d10, "d40": d40 })
    });

    // Non-tiling union stays bounded away from Parseval.
    let bad = IntervalUnion::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
    let chi_bad = PiecewiseExp::indicator(0.0, 1.0).add(&PiecewiseExp::indicator(2.0, 3.0));
    let d = pair_measure_defect(&bad, &two_z, &chi_bad, 20.0).expect("full-rank fixture");
    rec.record((0.5 - d).max(0.0), || {
        json!({ "check": "non-tiling-defect-large", "defect": d })
    });

    let _ = seed;
    rec.finish()
}

/// Runs every suite with its default fixtures; used by the `report`
/// command.
pub fn all_suites(seed: u64, instances: usize) -> Vec<SuiteReport> {
    let (lt_omega, lt_b) = default_localtranslation_fixture();
    vec![
        suite_unitarity(seed, instances),
        suite_grouplaw(seed, instances),
        suite_eigen(seed, instances.min(12)),
        suite_parseval(seed),
        suite_localtranslation(&lt_omega, &lt_b, seed),
        suite_tiling(seed),
        suite_pairmeasure(seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            let u = random_unitary(n, &mut rng);
            let mut defect = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let dot: Complex64 = (0..n).map(|k| u[(k, i)].conj() * u[(k, j)]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    defect = defect.max((dot - Complex64::new(expect, 0.0)).norm());
                }
            }
            assert!(defect < 1e-12, "n={n} defect {defect}");
        }
    }

    #[test]
    fn unitarity_suite_small() {
        let rep = suite_unitarity(11, 10);
        assert!(rep.passed, "max residual {} ce {:?}", rep.max_residual, rep.counterexample);
    }

    #[test]
    fn grouplaw_suite_small() {
        let rep = suite_grouplaw(12, 10);
        assert!(rep.passed, "max residual {} ce {:?}", rep.max_residual, rep.counterexample);
    }

    #[test]
    fn eigen_suite_small() {
        let rep = suite_eigen(13, 4);
        assert!(rep.passed, "max residual {} ce {:?}", rep.max_residual, rep.counterexample);
    }

    #[test]
    fn parseval_suite() {
        let rep = suite_parseval(14);
        assert!(rep.passed, "max residual {} ce {:?}", rep.max_residual, rep.counterexample);
    }

    #[test]
    fn localtranslation_suite_fixtures() {
        let (omega, b) = default_localtranslation_fixture();
        let rep = suite_localtranslation(&omega, &b, 15);
        assert!(rep.passed, "max residual {}", rep.max_residual);

        // Identity gluing of separated intervals is not a local translation
        // across components: the suite must fail with a concrete witness.
        let omega = IntervalUnion::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let rep = suite_localtranslation(&omega, &BoundaryMatrix::identity(2), 15);
        assert!(!rep.passed);
        let ce = rep.counterexample.expect("witness required");
        assert!(ce.get("witness").is_some());
    }

    #[test]
    fn tiling_suite() {
        let rep = suite_tiling(16);
        assert!(rep.passed, "max residual {} ce {:?}", rep.max_residual, rep.counterexample);
    }

    #[test]
    fn pairmeasure_suite() {
        let rep = suite_pairmeasure(17);
        assert!(rep.passed, "max residual {} ce {:?}", rep.max_residual, rep.counterexample);
    }

    #[test]
    fn reports_serialize() {
        let rep = suite_pairmeasure(18);
        let s = serde_json::to_string(&rep).unwrap();
        assert!(s.contains("\"suite\":\"pairmeasure\""));
    }
}
