//! Hydrodynamic-type analysis of cubic and quartic polynomial first integrals
//! of geodesic flows on the 2-torus.

pub mod error;
pub mod exact;
pub mod expr;
pub mod flow;
pub mod hydro;
pub mod integral;
pub mod jet;
pub mod metric;
pub mod reducibility;
pub mod regions;
pub mod roots;

pub use error::{Error, Result};
pub use expr::Expr;
pub use jet::Jet;
pub use metric::{
    field_from_samples, liouville_conformal_factor, metric_positivity_scan, ConformalMetric, Lattice,
    LiouvilleSpec, Metric, Model, Profile, ScalarField, SemiGeodesicMetric, TorusPoint,
};
