//! Piecewise-exponential functions: finite sums of `c * exp(2 pi i f x)`
//! on bounded open intervals.
//!
//! This class is closed under translation, restriction and the boundary
//! evolution, so every operator in the crate acts on it without
//! discretization error. Inner products reduce to `chi_hat` evaluations.

use crate::geometry::{chi_hat, IntervalUnion};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

/// Frequencies closer than this are treated as equal when merging pieces.
pub const FREQ_TOL: f64 = 1e-12;
/// Pieces shorter than this are clipping residue and get dropped.
pub const MIN_PIECE_LEN: f64 = 1e-14;
/// Support endpoints closer than this are identified during sweeps.
const ENDPOINT_TOL: f64 = 1e-13;
/// Relative amplitude below which a piece is treated as zero.
const AMP_REL_TOL: f64 = 1e-13;

/// One exponential piece `amp * exp(2 pi i freq x)` on the open interval
/// `support`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub support: (f64, f64),
    #[serde(with = "crate::jsonc")]
    pub amp: Complex64,
    pub freq: f64,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, amp: Complex64, freq: f64) -> Self {
        Piece {
            support: (lo, hi),
            amp,
            freq,
        }
    }

    pub fn len(&self) -> f64 {
        self.support.1 - self.support.0
    }
}

/// A finite sum of exponential pieces in canonical form: within each
/// frequency class supports are disjoint, sorted, and adjacent pieces with
/// equal amplitude are merged.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseExp {
    pieces: Vec<Piece>,
}

impl<'de> Deserialize<'de> for PiecewiseExp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            pieces: Vec<Piece>,
        }
        Ok(PiecewiseExp::from_pieces(Repr::deserialize(d)?.pieces))
    }
}

impl PiecewiseExp {
    pub fn zero() -> Self {
        PiecewiseExp { pieces: vec![] }
    }

    /// Indicator of a bounded interval.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::from_pieces(vec![Piece::new(lo, hi, Complex64::new(1.0, 0.0), 0.0)])
    }

    /// `exp(2 pi i freq x)` on a bounded interval.
    pub fn exponential(lo: f64, hi: f64, freq: f64) -> Self {
        Self::from_pieces(vec![Piece::new(lo, hi, Complex64::new(1.0, 0.0), freq)])
    }

    /// `e_freq` restricted to a bounded interval union.
    pub fn exponential_on(omega: &IntervalUnion, freq: f64) -> Self {
        Self::from_pieces(
            omega
                .intervals()
                .iter()
                .map(|iv| Piece::new(iv.alpha, iv.beta, Complex64::new(1.0, 0.0), freq))
                .collect(),
        )
    }

    /// Builds the canonical form from an arbitrary piece list; overlapping
    /// same-frequency pieces are summed.
    pub fn from_pieces(pieces: Vec<Piece>) -> Self {
        let mut live: Vec<Piece> = pieces
            .into_iter()
            .filter(|p| p.len() >= MIN_PIECE_LEN && p.support.0.is_finite() && p.support.1.is_finite())
            .collect();
        if live.is_empty() {
            return PiecewiseExp { pieces: vec![] };
        }
        let scale = live
            .iter()
            .map(|p| p.amp.norm())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);

        // Group into frequency classes.
        live.sort_by(|a, b| {
            a.freq
                .total_cmp(&b.freq)
                .then(a.support.0.total_cmp(&b.support.0))
        });
        let mut out: Vec<Piece> = Vec::with_capacity(live.len());
        let mut class_start = 0;
        while class_start < live.len() {
            let mut class_end = class_start + 1;
            while class_end < live.len()
                && (live[class_end].freq - live[class_end - 1].freq).abs() <= FREQ_TOL
            {
                class_end += 1;
            }
            let class = &live[class_start..class_end];
            let freq = class[0].freq;
            canonicalize_class(class, freq, scale, &mut out);
            class_start = class_end;
        }
        PiecewiseExp { pieces: out }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_pieces(
            self.pieces
                .iter()
                .map(|p| Piece::new(p.support.0, p.support.1, p.amp * factor, p.freq))
                .collect(),
        )
    }

    pub fn add(&self, other: &PiecewiseExp) -> Self {
        let mut all = self.pieces.clone();
        all.extend_from_slice(&other.pieces);
        Self::from_pieces(all)
    }

    pub fn sub(&self, other: &PiecewiseExp) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `T(t) f (x) = f(x + t)`: supports shift by `-t`, amplitudes pick up
    /// the phase `exp(2 pi i freq t)`.
    pub fn translate(&self, t: f64) -> Self {
        Self::from_pieces(
            self.pieces
                .iter()
                .map(|p| {
                    Piece::new(
                        p.support.0 - t,
                        p.support.1 - t,
                        p.amp * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * p.freq * t),
                        p.freq,
                    )
                })
                .collect(),
        )
    }

    /// Clips every piece to the components of `omega`.
    pub fn restrict(&self, omega: &IntervalUnion) -> Self {
        let mut clipped = Vec::new();
        for p in &self.pieces {
            for iv in omega.intervals() {
                let lo = p.support.0.max(iv.alpha);
                let hi = p.support.1.min(iv.beta);
                if lo < hi {
                    clipped.push(Piece::new(lo, hi, p.amp, p.freq));
                }
            }
        }
        Self::from_pieces(clipped)
    }

    /// Clips to a single bounded interval.
    pub fn restrict_to_interval(&self, lo: f64, hi: f64) -> Self {
        let mut clipped = Vec::new();
        for p in &self.pieces {
            let a = p.support.0.max(lo);
            let b = p.support.1.min(hi);
            if a < b {
                clipped.push(Piece::new(a, b, p.amp, p.freq));
            }
        }
        Self::from_pieces(clipped)
    }

    /// Exact `L^2` inner product `<f, g> = int f conj(g)`.
    pub fn inner_product(&self, other: &PiecewiseExp) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for p in &self.pieces {
            for q in &other.pieces {
                let lo = p.support.0.max(q.support.0);
                let hi = p.support.1.min(q.support.1);
                if lo < hi {
                    let xi = q.freq - p.freq;
                    let integral = chi_hat((lo, hi), xi).expect("bounded overlap");
                    sum += p.amp * q.amp.conj() * integral;
                }
            }
        }
        sum
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner_product(self).re.max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Pointwise value; endpoints of pieces are measure zero and resolve
    /// to whichever pieces strictly contain `x`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for p in &self.pieces {
            if p.support.0 < x && x < p.support.1 {
                v += p.amp * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * p.freq * x);
            }
        }
        v
    }

    /// Smallest interval containing the support.
    pub fn support_bounds(&self) -> Option<(f64, f64)> {
        if self.pieces.is_empty() {
            return None;
        }
        let lo = self
            .pieces
            .iter()
            .map(|p| p.support.0)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .pieces
            .iter()
            .map(|p| p.support.1)
            .fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }
}

/// Sweep-line canonicalization of one frequency class: split at all
/// endpoints, sum amplitudes on elementary intervals, re-merge runs with
/// equal amplitude.
fn canonicalize_class(class: &[Piece], freq: f64, scale: f64, out: &mut Vec<Piece>) {
    // Deduplicated breakpoints.
    let mut cuts: Vec<f64> = Vec::with_capacity(class.len() * 2);
    for p in class {
        cuts.push(p.support.0);
        cuts.push(p.support.1);
    }
    cuts.sort_by(f64::total_cmp);
    let mut reps: Vec<f64> = Vec::with_capacity(cuts.len());
    for &x in &cuts {
        match reps.last() {
            Some(&r) if x - r <= ENDPOINT_TOL => {}
            _ => reps.push(x),
        }
    }
    let rep_of = |x: f64| -> usize {
        match reps.binary_search_by(|r| r.total_cmp(&x)) {
            Ok(i) => i,
            Err(i) => {
                // Nearest representative; tolerance guarantees a hit.
                if i == 0 {
                    0
                } else if i == reps.len() {
                    reps.len() - 1
                } else if x - reps[i - 1] <= reps[i] - x {
                    i - 1
                } else {
                    i
                }
            }
        }
    };

    // Amplitude deltas at each representative point.
    let mut delta = vec![Complex64::new(0.0, 0.0); reps.len()];
    for p in class {
        let a = rep_of(p.support.0);
        let b = rep_of(p.support.1);
        if a == b {
            continue;
        }
        delta[a] += p.amp;
        delta[b] -= p.amp;
    }

    let amp_tol = AMP_REL_TOL * scale;
    let mut running = Complex64::new(0.0, 0.0);
    let mut current: Option<Piece> = None;
    for i in 0..reps.len() {
        running += delta[i];
        if i + 1 == reps.len() {
            break;
        }
        let (lo, hi) = (reps[i], reps[i + 1]);
        let amp = running;
        let alive = amp.norm() > amp_tol && hi - lo >= MIN_PIECE_LEN;
        current = match (current.take(), alive) {
            (Some(c), true) if (c.amp - amp).norm() <= amp_tol && (c.support.1 - lo).abs() <= ENDPOINT_TOL => {
                Some(Piece::new(c.support.0, hi, c.amp, freq))
            }
            (prev, alive) => {
                if let Some(c) = prev {
                    out.push(c);
                }
                if alive {
                    Some(Piece::new(lo, hi, amp, freq))
                } else {
                    None
                }
            }
        };
    }
    if let Some(c) = current {
        out.push(c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn indicator_norm() {
        let f = PiecewiseExp::indicator(0.0, 1.0);
        assert!((f.inner_product(&f) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn fourier_modes_orthogonal() {
        let e0 = PiecewiseExp::exponential(0.0, 1.0, 0.0);
        let e1 = PiecewiseExp::exponential(0.0, 1.0, 1.0);
        assert!(e0.inner_product(&e1).norm() < 1e-14);
    }

    #[test]
    fn indicator_against_half_frequency() {
        // <chi_(0,1), e_{1/2}> = chi_hat((0,1), 0.5) = -(2/pi) i.
        let f = PiecewiseExp::indicator(0.0, 1.0);
        let g = PiecewiseExp::exponential(0.0, 1.0, 0.5);
        let ip = f.inner_product(&g);
        assert!((ip - c(0.0, -2.0 / std::f64::consts::PI)).norm() < 1e-14);
    }

    #[test]
    fn translate_examples() {
        let f = PiecewiseExp::indicator(0.0, 1.0);
        assert_eq!(f.translate(0.0), f);
        let shifted = f.translate(1.0);
        assert_eq!(shifted.pieces()[0].support, (-1.0, 0.0));
        // e_1 translated by 1/2 picks up phase exp(pi i) = -1.
        let e1 = PiecewiseExp::exponential(0.0, 1.0, 1.0);
        let t = e1.translate(0.5);
        assert_eq!(t.pieces().len(), 1);
        let p = t.pieces()[0];
        assert!((p.support.0 + 0.5).abs() < 1e-15 && (p.support.1 - 0.5).abs() < 1e-15);
        assert!((p.amp - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn translate_preserves_norm() {
        let f = PiecewiseExp::from_pieces(vec![
            Piece::new(0.1, 0.7, c(0.3, -0.4), 1.7),
            Piece::new(1.2, 2.0, c(-0.9, 0.1), -2.3),
        ]);
        let n = f.norm();
        for t in [-3.3, -0.2, 0.0, 0.41, 5.0] {
            assert!((f.translate(t).norm() - n).abs() < 1e-12 * n.max(1.0));
        }
    }

    #[test]
    fn translate_composes() {
        let f = PiecewiseExp::from_pieces(vec![
            Piece::new(0.1, 0.7, c(0.3, -0.4), 1.7),
            Piece::new(0.8, 1.1, c(0.2, 0.9), 0.3),
        ]);
        let a = f.translate(0.3).translate(-1.1);
        let b = f.translate(0.3 - 1.1);
        assert!(a.sub(&b).norm() < 1e-12);
    }

    #[test]
    fn restrict_examples() {
        let omega = IntervalUnion::new(&[(0.0, 1.0)]).unwrap();
        let f = PiecewiseExp::indicator(-0.5, 0.5).restrict(&omega);
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.pieces()[0].support, (0.0, 0.5));

        let id = PiecewiseExp::indicator(0.0, 1.0).restrict(&omega);
        assert_eq!(id, PiecewiseExp::indicator(0.0, 1.0));

        let two = IntervalUnion::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let g = PiecewiseExp::indicator(0.5, 2.5).restrict(&two);
        assert_eq!(g.pieces().len(), 2);
        assert_eq!(g.pieces()[0].support, (0.5, 1.0));
        assert_eq!(g.pieces()[1].support, (2.0, 2.5));
    }

    #[test]
    fn overlapping_same_frequency_pieces_sum() {
        let f = PiecewiseExp::from_pieces(vec![
            Piece::new(0.0, 1.0, c(1.0, 0.0), 0.0),
            Piece::new(0.5, 1.5, c(1.0, 0.0), 0.0),
        ]);
        assert!((f.eval(0.25) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((f.eval(0.75) - c(2.0, 0.0)).norm() < 1e-14);
        assert!((f.eval(1.25) - c(1.0, 0.0)).norm() < 1e-14);
        // norm^2 = 0.5 + 4*0.5 + 0.5
        assert!((f.norm_sqr() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn cancellation_drops_pieces() {
        let f = PiecewiseExp::indicator(0.0, 1.0);
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn canonicalization_idempotent() {
        let f = PiecewiseExp::from_pieces(vec![
            Piece::new(0.0, 0.5, c(1.0, 0.0), 0.0),
            Piece::new(0.5, 1.0, c(1.0, 0.0), 0.0),
            Piece::new(2.0, 2.5, c(0.3, 0.1), 1.5),
        ]);
        // Touching equal pieces merged.
        assert_eq!(f.pieces().len(), 2);
        let again = PiecewiseExp::from_pieces(f.pieces().to_vec());
        assert_eq!(f, again);
    }

    #[test]
    fn cauchy_schwarz_on_samples() {
        let f = PiecewiseExp::from_pieces(vec![
            Piece::new(0.0, 0.9, c(0.2, 0.7), 1.1),
            Piece::new(1.0, 1.4, c(-0.5, 0.2), -0.4),
        ]);
        let g = PiecewiseExp::from_pieces(vec![Piece::new(0.4, 1.2, c(0.8, -0.1), 2.2)]);
        let lhs = f.inner_product(&g).norm_sqr();
        let rhs = f.norm_sqr() * g.norm_sqr();
        assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn json_round_trip() {
        let f = PiecewiseExp::from_pieces(vec![Piece::new(0.25, 0.75, c(0.5, -0.5), 2.0)]);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"support\""));
        assert!(json.contains("\"re\""));
        let back: PiecewiseExp = serde_json::from_str(&json).unwrap();
        assert!(f.sub(&back).norm() < 1e-15);
    }
}
