//! Coresets for (k,z)-clustering built by group-based sensitivity sampling,
//! together with lower-bound instance generators and a distortion auditor.

pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod io;
pub mod lower_bounds;
pub mod metric;
pub mod par;
pub mod partition;
pub mod projection;
pub mod rng;
pub mod sampler;
pub mod seeding;
pub mod stats;
pub mod synth;

pub use error::{CoresetError, Result};
pub use metric::{PointSet, PowerParams, Solution, WeightedPoints};
pub use sampler::{build_coreset, SamplerConfig, WeightedCoreset};
