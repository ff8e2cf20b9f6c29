//! AES-128 reference implementation, an exact cost model for an eleven-stage block
//! pipeline with optional intra-stage parallelism, a task-level discrete-event simulator,
//! and tooling to regenerate and audit the published timing tables.

pub mod aes;
pub mod cost;
pub mod error;
pub mod gf;
pub mod sim;
pub mod sweep;
pub mod tables;
pub mod time;

pub use aes::{decrypt_block, encrypt_block, key_expand, Block, KeySchedule, State};
pub use cost::{CostParams, Mode, PipelineConfig, StageKind, StageTimes};
pub use error::{Error, Result};
pub use time::{Rational, TimeQuantum};
