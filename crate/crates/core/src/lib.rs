//! Generation of solver-verified program instances from annotated skeletons.

pub mod arith;
pub mod frontend;
pub mod instance;
pub mod normalize;
pub mod optimize;
pub mod pipeline;
pub mod quiz;
pub mod smt;
pub mod unwind;
pub mod value;
