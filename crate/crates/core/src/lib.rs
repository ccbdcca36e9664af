//! Hyperbolic components of quadratic rational maps with a periodic critical
//! point, and exact resolution of the curve singularities of the period-5
//! parameter space.

pub mod algebra;
pub mod classifier;
pub mod families;
pub mod presets;
pub mod render;
pub mod sphere;

pub use classifier::{classify, inspect, BasinGridConfig, Classification, Kind, Method, ParameterReport, ReportSummary};
pub use families::{ExcludedParameter, Family, ParamWindow};
pub use presets::Preset;
pub use sphere::{chordal_distance, detect_attraction, IterConfig, QuadMap, SpherePoint};
