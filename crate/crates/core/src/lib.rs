//! Bifurcation analysis for small disease-dynamics models.
//!
//! The crate covers five planar/3-D vector fields (SIR with concave incidence,
//! SIR with saturating treatment, the in-host model with convex incidence, and
//! the reduced autoimmune models), their closed-form equilibria, fold and
//! transcritical thresholds, Hopf points with normal-form coefficients, and a
//! Dormand–Prince integrator with attractor classification.
//!
//! ```
//! use epibif::{Model, ParameterSet, InhostParams};
//! use epibif::equilibrium::infected_quadratic;
//!
//! let model = Model::new(ParameterSet::InhostConvex(InhostParams {
//!     a: 0.8, b: 0.036, c: 0.823, d: 0.057,
//! })).unwrap();
//! let q = infected_quadratic(&model);
//! assert_eq!(q.roots.len(), 2);
//! assert!((q.roots[1] - 0.8726886).abs() < 1e-5);
//! ```

pub mod equilibrium;
pub mod error;
pub mod incidence;
pub mod model;
pub mod normal_form;
pub mod numeric;
pub mod odesim;
pub mod report;
pub mod scalar;
pub mod scan;
pub mod spectral;

pub use equilibrium::{Branch, EquilibriumPoint, QuadraticBranch, Threshold, TurningPoint};
pub use error::{Error, Result};
pub use model::{
    AutoimmuneParams, Autoimmune3dParams, InhostParams, Model, ModelId, ParameterSet, SirParams,
    StateVector, TreatmentParams,
};
pub use normal_form::{Criticality, CycleStability, HopfClass, HopfData};
pub use odesim::{AttractorVerdict, IntegratorConfig, Trajectory};
pub use scan::{BifurcationKind, BifurcationPoint, BranchDiagram};
pub use spectral::{CharPoly, StabilityClass, StabilityReport};
