//! Numerical laboratory for the self-similar (ODE) blowup of the radial
//! energy-critical wave equation on R^5: similarity coordinates, the
//! spectral/Green-function analysis of the linearized flow, semigroup
//! reconstruction by contour quadrature, and the nonlinear blowup-stability
//! diagnostic.

pub mod coords;
pub mod error;
pub mod evolve;
pub mod green;
pub mod grid;
pub mod harness;
pub mod oscquad;
pub mod quad;
pub mod radialwave;
pub mod rng;
pub mod semigroup;
pub mod specfun;
pub mod volterra;

pub use coords::{ConeConfig, NormSpec, RadialField, SimilarityPoint, StatePair};
pub use error::{Error, Result};
pub use evolve::{BlowupProfile, ExperimentConfig, StabilityReport, C5};
pub use green::{CutoffSpec, GreenKernel, ResolventRhs};
pub use grid::RadialGrid;
pub use semigroup::{ContourSpec, ProjectionData, Trajectory};
pub use specfun::{FreeSolutionKind, HypergeometricParams, SpectralParameter};
pub use volterra::{FundamentalPair, PotentialSpec, VolterraProblem};
