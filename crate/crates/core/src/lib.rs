pub mod embedding;
pub mod error;
pub mod extended;
pub mod config;
pub mod curvature;
pub mod export;
pub mod field;
pub mod hilbert;
pub mod invariants;
pub mod length;
pub mod linalg;
pub mod lorentz;
pub mod reconstruction;
pub mod report;
pub mod scalar;
pub mod spacetime;
pub mod verify;

pub use error::{Error, Result};
pub use field::{l2_inner, Field};
pub use scalar::Real;
pub use spacetime::{Grid, Point, SpacetimeSpec, Tangent};

pub type Spec32 = SpacetimeSpec<f32>;
pub type Spec64 = SpacetimeSpec<f64>;
pub type Grid32 = Grid<f32>;
pub type Grid64 = Grid<f64>;
pub type Point32 = Point<f32>;
pub type Point64 = Point<f64>;
