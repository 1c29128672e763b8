//! Pseudothermal source, object masks and end-to-end frame simulation.

mod object;
mod simulate;
mod source;

pub use object::{apply_object, builtin_object, BuiltinObject, ObjectMask};
pub use simulate::{simulate_frame, FrameSimulator, SimulationGrid};
pub use source::{generate_source_frame, SourceMode, SourceSpec};
