//! Interval unions in 1D, box unions in d dimensions, and closed-form
//! Fourier transforms of their indicators.
//!
//! All types are immutable after construction; touching intervals are
//! merged so component counts and endpoint lists are canonical.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Relative switch point below which `chi_hat` uses its Taylor form.
pub const CHI_HAT_TAYLOR_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("interval ({0}, {1}) is empty or inverted")]
    EmptyInterval(f64, f64),
    #[error("intervals overlap near {0}")]
    Overlap(f64),
    #[error("no intervals given")]
    NoIntervals,
    #[error("only the first interval may extend to -inf and only the last to +inf")]
    BadUnboundedPlacement,
    #[error("Fourier transform requested for an unbounded interval")]
    UnboundedTransform,
    #[error("boxes must all have dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("boxes overlap on a set of positive measure")]
    BoxOverlap,
    #[error("full-line axis {0} out of range")]
    BadFullAxis(usize),
}

/// One endpoint of an interval; `-inf`/`+inf` serialize as strings.
fn serialize_endpoint<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if *x < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("+inf")
    }
}

fn deserialize_endpoint<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Str(s) => match s.as_str() {
            "-inf" => Ok(f64::NEG_INFINITY),
            "+inf" | "inf" => Ok(f64::INFINITY),
            other => Err(D::Error::custom(format!("bad endpoint sentinel {other:?}"))),
        },
    }
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct EndpointVal(
    #[serde(
        serialize_with = "serialize_endpoint",
        deserialize_with = "deserialize_endpoint"
    )]
    f64,
);

/// A single open interval `(alpha, beta)`, possibly unbounded on either side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub alpha: f64,
    pub beta: f64,
}

impl Interval {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Interval { alpha, beta }
    }

    pub fn length(&self) -> f64 {
        self.beta - self.alpha
    }

    pub fn is_bounded(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite()
    }
}

/// A finite union of disjoint open intervals, ordered left to right.
///
/// Touching intervals are merged at construction, so `beta_i < alpha_{i+1}`
/// holds strictly for the stored components.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "IntervalUnionRepr")]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

/// Wire form: `{"intervals": [[a, b], ...]}`.
#[derive(Serialize, Deserialize)]
struct IntervalUnionRepr {
    intervals: Vec<(EndpointVal, EndpointVal)>,
}

impl From<IntervalUnion> for IntervalUnionRepr {
    fn from(u: IntervalUnion) -> Self {
        IntervalUnionRepr {
            intervals: u
                .intervals
                .iter()
                .map(|i| (EndpointVal(i.alpha), EndpointVal(i.beta)))
                .collect(),
        }
    }
}

impl<'de> Deserialize<'de> for IntervalUnion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = IntervalUnionRepr::deserialize(d)?;
        let pairs: Vec<(f64, f64)> = repr.intervals.iter().map(|i| (i.0 .0, i.1 .0)).collect();
        IntervalUnion::new(&pairs).map_err(D::Error::custom)
    }
}

impl IntervalUnion {
    /// Builds the union from endpoint pairs, sorting, validating and
    /// merging intervals that share an endpoint.
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self, GeometryError> {
        if pairs.is_empty() {
            return Err(GeometryError::NoIntervals);
        }
        let mut intervals: Vec<Interval> = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if !(a < b) || a.is_nan() || b.is_nan() || a == f64::INFINITY || b == f64::NEG_INFINITY
            {
                return Err(GeometryError::EmptyInterval(a, b));
            }
            intervals.push(Interval::new(a, b));
        }
        intervals.sort_by(|x, y| x.alpha.total_cmp(&y.alpha));
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv.alpha < last.beta => {
                    return Err(GeometryError::Overlap(iv.alpha));
                }
                Some(last) if iv.alpha == last.beta => {
                    last.beta = iv.beta;
                }
                _ => merged.push(iv),
            }
        }
        for (i, iv) in merged.iter().enumerate() {
            if iv.alpha == f64::NEG_INFINITY && i != 0 {
                return Err(GeometryError::BadUnboundedPlacement);
            }
            if iv.beta == f64::INFINITY && i + 1 != merged.len() {
                return Err(GeometryError::BadUnboundedPlacement);
            }
        }
        Ok(IntervalUnion { intervals: merged })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.intervals.iter().map(Interval::length).collect()
    }

    /// Shortest component length; `+inf` only if every component is unbounded.
    pub fn min_length(&self) -> f64 {
        self.intervals
            .iter()
            .map(Interval::length)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.intervals
            .iter()
            .map(Interval::length)
            .fold(0.0, f64::max)
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    /// Components with a finite left endpoint.
    pub fn finite_left_count(&self) -> usize {
        self.intervals
            .iter()
            .filter(|i| i.alpha.is_finite())
            .count()
    }

    /// Components with a finite right endpoint.
    pub fn finite_right_count(&self) -> usize {
        self.intervals
            .iter()
            .filter(|i| i.beta.is_finite())
            .count()
    }

    /// Lebesgue measure; `+inf` if any component is unbounded.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    /// True when some pair of consecutive components leaves a gap of
    /// positive length between them.
    pub fn has_positive_gap(&self) -> bool {
        self.intervals
            .windows(2)
            .any(|w| w[1].alpha > w[0].beta)
    }

    /// Index of the component containing `x`, if any.
    pub fn component_of(&self, x: f64) -> Option<usize> {
        self.intervals
            .iter()
            .position(|iv| iv.alpha < x && x < iv.beta)
    }
}

/// Fourier transform of the indicator of a bounded interval:
/// `chi_hat((a,b), xi) = int_a^b exp(-2 pi i xi x) dx`.
///
/// Near `xi = 0` the closed form cancels catastrophically, so below
/// `|xi| (b-a) < 1e-6` we switch to `(b-a) exp(-pi i xi (a+b)) sinc(pi xi (b-a))`
/// expanded to second order.
pub fn chi_hat(interval: (f64, f64), xi: f64) -> Result<Complex64, GeometryError> {
    let (a, b) = interval;
    if !a.is_finite() || !b.is_finite() {
        return Err(GeometryError::UnboundedTransform);
    }
    let len = b - a;
    if (xi * len).abs() < CHI_HAT_TAYLOR_THRESHOLD {
        let z = std::f64::consts::PI * xi * len;
        let sinc = 1.0 - z * z / 6.0;
        let phase = Complex64::from_polar(1.0, -std::f64::consts::PI * xi * (a + b));
        Ok(phase * (len * sinc))
    } else {
        let two_pi_xi = 2.0 * std::f64::consts::PI * xi;
        let ea = Complex64::from_polar(1.0, -two_pi_xi * a);
        let eb = Complex64::from_polar(1.0, -two_pi_xi * b);
        Ok((ea - eb) / Complex64::new(0.0, two_pi_xi))
    }
}

/// Fourier transform of the indicator of a bounded interval union.
pub fn omega_hat(omega: &IntervalUnion, xi: f64) -> Result<Complex64, GeometryError> {
    let mut sum = Complex64::new(0.0, 0.0);
    for iv in omega.intervals() {
        sum += chi_hat((iv.alpha, iv.beta), xi)?;
    }
    Ok(sum)
}

/// An axis-aligned open box, one `(a, b)` pair per axis.
pub type Box_ = Vec<(f64, f64)>;

/// A finite union of pairwise-disjoint axis-aligned boxes in `R^d`.
///
/// Axes listed in `full_axes` carry the full line in every box; such sets
/// are products `Omega_1 x R^{d2}` and are handled by stripping those axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxUnionRepr", into = "BoxUnionRepr")]
pub struct BoxUnion {
    dim: usize,
    boxes: Vec<Box_>,
    full_axes: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct BoxUnionRepr {
    dim: usize,
    boxes: Vec<Vec<(f64, f64)>>,
    #[serde(default)]
    full_axes: Vec<usize>,
}

impl From<BoxUnion> for BoxUnionRepr {
    fn from(b: BoxUnion) -> Self {
        BoxUnionRepr {
            dim: b.dim,
            boxes: b.boxes,
            full_axes: b.full_axes,
        }
    }
}

impl TryFrom<BoxUnionRepr> for BoxUnion {
    type Error = GeometryError;
    fn try_from(r: BoxUnionRepr) -> Result<Self, GeometryError> {
        BoxUnion::new(r.dim, r.boxes, r.full_axes)
    }
}

impl BoxUnion {
    pub fn new(
        dim: usize,
        boxes: Vec<Box_>,
        full_axes: Vec<usize>,
    ) -> Result<Self, GeometryError> {
        for ax in &full_axes {
            if *ax >= dim {
                return Err(GeometryError::BadFullAxis(*ax));
            }
        }
        for b in &boxes {
            if b.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    got: b.len(),
                });
            }
            for (j, &(a, bb)) in b.iter().enumerate() {
                if full_axes.contains(&j) {
                    continue;
                }
                if !(a < bb) || !a.is_finite() || !bb.is_finite() {
                    return Err(GeometryError::EmptyInterval(a, bb));
                }
            }
        }
        // Pairwise disjointness up to measure zero on the non-full axes.
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let overlap = (0..dim).all(|ax| {
                    if full_axes.contains(&ax) {
                        true
                    } else {
                        let (a1, b1) = boxes[i][ax];
                        let (a2, b2) = boxes[j][ax];
                        a1.max(a2) < b1.min(b2)
                    }
                });
                if overlap {
                    return Err(GeometryError::BoxOverlap);
                }
            }
        }
        Ok(BoxUnion {
            dim,
            boxes,
            full_axes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[Box_] {
        &self.boxes
    }

    pub fn full_axes(&self) -> &[usize] {
        &self.full_axes
    }

    /// Measure of the factor living on the non-full axes.
    pub fn factor_measure(&self) -> f64 {
        self.boxes
            .iter()
            .map(|b| {
                b.iter()
                    .enumerate()
                    .filter(|(j, _)| !self.full_axes.contains(j))
                    .map(|(_, &(a, bb))| bb - a)
                    .product::<f64>()
            })
            .sum()
    }

    /// Drops the full-line axes, returning the finite-dimensional factor.
    pub fn strip_full_axes(&self) -> Result<BoxUnion, GeometryError> {
        let keep: Vec<usize> = (0..self.dim)
            .filter(|j| !self.full_axes.contains(j))
            .collect();
        let boxes = self
            .boxes
            .iter()
            .map(|b| keep.iter().map(|&j| b[j]).collect())
            .collect();
        BoxUnion::new(keep.len(), boxes, vec![])
    }
}
