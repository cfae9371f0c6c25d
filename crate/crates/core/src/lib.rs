//! Spectral analysis of Sturm-Liouville operators with singular potentials on a
//! star-type graph with one cycle (the "lasso" or "flower" graph).
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] validates the geometry (exact rational edge lengths) and the
//!   piecewise-constant potential antiderivatives `σ_j`.
//! * [`integrator`] propagates the quasi-derivative system exactly across each
//!   constant-`σ` segment and returns the fundamental solutions at the edge end.
//! * [`charfn`] assembles the characteristic functions of `L(G)`, `L_j(G)`,
//!   the cycle and the star, and the Weyl functions.
//! * [`trig`] and [`spectrum`] handle the zero-potential trigonometric
//!   structure (period, base zeros) and the perturbed eigenvalue catalog.
//! * [`reconstruct`] rebuilds characteristic functions from spectra alone.
//! * [`oracle`] is an independent finite-difference discretization used for
//!   cross-validation.

pub mod charfn;
pub mod error;
pub mod graph;
pub mod integrator;
pub mod oracle;
pub mod reconstruct;
pub mod roots;
pub mod spectrum;
pub mod trig;

pub use charfn::{CharValue, Problem};
pub use error::{Error, Result};
pub use graph::{EdgeRole, EdgeSpec, GraphSpec, PotentialSpec, Rational, ValidatedGraph};
pub use integrator::{FundamentalSolution, StateMatrix};
pub use reconstruct::ReconstructionResult;
pub use spectrum::{AsymptoticFrame, SpectrumCatalog};
pub use trig::TrigPoly;
