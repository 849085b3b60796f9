//! Audio watermarking toolkit.
//!
//! The crate has two halves that share one DSP core:
//!
//! - a classical **spectral patchwork watermark**: keyed embedding and
//!   detection of a 128-bit payload in STFT magnitudes, with per-utterance
//!   strength search and a multi-condition robustness harness;
//! - a desk-scale **collaborative training demo**: a tiny reverse-mode
//!   autograd engine, a toy vocoder-style generator and score-based
//!   detectors trained jointly under Discriminator / Observer /
//!   Collaborator roles, with differentiable time-stretch and additive
//!   noise augmentation, evaluated by equal error rate.
//!
//! See the guide under `book/` for a narrative walk-through; its code
//! snippets compile and run as doc-tests of this crate.

pub mod audio;
pub mod error;
pub mod lfcc;
pub mod matrix;
pub mod resample;
pub mod spectral;
pub mod wav;

pub use audio::AudioClip;
pub use error::{Error, Result};
