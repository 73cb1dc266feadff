//! Scenario geometry, Rayleigh block-fading sampler and the distribution
//! catalog for the interference and product variables used by the analysis.

mod distributions;
mod fading;
mod geometry;

pub use distributions::{dist_gamma_ratio, dist_t, dist_v1, dist_v3, Density, InterferenceLaw, ProductLaw};
pub use fading::{sample_fading, sample_unit_fading, FadingRealization, PowerConfig};
pub use geometry::{derive_etas, DerivedEtas, GeometryError, PathGains, Point, ScenarioGeometry};
