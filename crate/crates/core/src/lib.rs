//! Multidimensional sparse Fourier transforms by line projection.
//!
//! [`sft::fps_sft`] recovers exactly sparse, on-grid spectra. [`robust::rfps_sft`]
//! adds windowing, noise-aware detection and voting so that off-grid and noisy
//! signals yield the dominant frequency of every spectral cluster.

pub mod error;
pub mod oracle;
pub mod radar;
pub mod recovery;
pub mod rng;
pub mod robust;
pub mod sft;
pub mod signal;
pub mod window;

pub use error::{Error, Result};
pub use recovery::{Detection, RecoveryConfig, RecoveryResult};
pub use sft::{fps_sft, FpsConfig, GridSet, LineSpec};
pub use signal::{make_scene, Dims, SampleSource, Scene, SceneSpec, Sinusoid};
pub use window::WindowSpec;
