//! Two-wing hidden-variable models, locality checks, CHSH metrics and
//! local-polytope membership for the two-setting, two-outcome scenario.

pub mod behavior;
pub mod descriptor;
pub mod error;
pub mod hbt;
pub mod integrate;
pub mod locality;
pub mod metrics;
pub mod model;
pub mod polytope;
pub mod random;

pub use behavior::Behavior;
pub use descriptor::ModelDescriptor;
pub use error::{Error, Result};
pub use integrate::Integration;
pub use model::{ConditionalModel, HiddenSample, JointModel, JointTable, LocalModel, Model, Outcome, Setting, Source};
