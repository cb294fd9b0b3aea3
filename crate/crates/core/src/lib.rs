//! Unitary groups on disconnected 1D domains and their atomic spectra.
//!
//! The toolkit works with finite unions of intervals glued at their
//! endpoints by a unitary boundary matrix. It builds the resulting
//! evolution group exactly on piecewise-exponential functions, solves the
//! secular equation for the atomic spectrum and its eigenbases, tests
//! orthogonality/completeness of exponential families, and certifies
//! lattice tilings with exact rational arithmetic.

pub mod boundary;
pub mod geometry;
pub mod jsonc;
pub mod linalg;
pub mod pwexp;
pub mod spectral_pair;
pub mod spectrum;
pub mod suites;
pub mod tiling;

pub use boundary::{BoundaryMatrix, EvolutionEngine, Gates};
pub use geometry::{BoxUnion, IntervalUnion};
pub use pwexp::PiecewiseExp;
pub use spectrum::{SpectrumPoint, SpectrumSet};
pub use tiling::Lattice;
