//! Rendering, interpretation and verification of program instances.

pub mod interp;
pub mod render;
pub mod verify;

pub use interp::{interpret, ExecTrace, Fault, InterpConfig};
pub use render::{render_instance, InstanceBundle, RenderError};
pub use verify::{verify_instance, verify_negated, Expectation, Rejection, Verdict};
