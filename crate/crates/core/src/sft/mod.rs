//! Line sampling, line DFTs, frequency projection and phase decoding.

pub mod decode;
pub mod dft;
pub mod fps;
pub mod line;
pub mod project;

pub use decode::{decode_bin, Reject};
pub use dft::{line_dft, line_idft, LineDft};
pub use fps::{fps_sft, FpsConfig};
pub use line::{always_collide, collision_offsets, draw_line, extract_line, gcd, lcm_length, LineSpec};
pub use project::{offset_turns, project_bin, project_set, subtract_recovered, GridSet, LineContext};
