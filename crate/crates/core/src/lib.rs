//! Monte Carlo simulation and reconstruction of two-photon interference
//! imaging with pseudothermal light.
//!
//! The crate covers the whole chain: speckle source synthesis, scalar
//! diffraction through the object, lens and beam splitter, photon-counting
//! detection, streaming fluctuation-correlation estimators, a closed-form
//! somb point-spread-function model, turbulence models, and image metrics.

pub mod analytic;
pub mod correlator;
pub mod error;
pub mod image;
pub mod metrics;
pub mod optics;
pub mod pipeline;
pub mod rng;
pub mod scene;
pub mod sensor;
pub mod turbulence;

pub use correlator::{BucketMode, CorrelatorState, Roi};
pub use error::{Error, Result};
pub use image::Image;
pub use metrics::{Method, MetricReport};
pub use optics::{ComplexField, OpticalLayout};
pub use pipeline::Pipeline;
pub use scene::{FrameSimulator, ObjectMask, SimulationGrid, SourceMode, SourceSpec};
pub use sensor::{Frame, FrameStack, NoiseModel};
pub use turbulence::{Refresh, TurbulenceModel, TurbulenceSpec};
