//! Entanglement change of tripartite states when party C is measured and
//! replaced by a classical record.
//!
//! States live on `A (x) B (x) C` in row-major order. Entropies are in bits.

pub mod certify;
pub mod classicalize;
pub mod error;
pub mod matcore;
pub mod measures;
pub mod states;

pub use classicalize::{delta, delta_with_bounds, lower_bound, upper_bound, DeltaBounds, DeltaResult, GridResolution};
pub use error::{Error, Result};
pub use matcore::{Bipartition, DensityMatrix, PureState};
pub use measures::MeasureKind;
pub use states::StateSpec;
