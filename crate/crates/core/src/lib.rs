//! Volumetric toolkit for weakly supervised lymph node segmentation.
//!
//! The crate covers everything around the network: volume I/O and
//! preprocessing ([`volgrid`]), binary morphology ([`morph3d`]), the
//! weak-annotation strategies that turn partial labels into training targets
//! and loss masks ([`weaklab`]), RECIST-style short-axis measurement
//! ([`measure`]), evaluation metrics and paired significance tests
//! ([`evalkit`]), and seeded synthetic phantoms ([`phantom`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod evalkit;
pub mod measure;
pub mod morph3d;
pub mod phantom;
pub mod report;
pub mod volgrid;
pub mod weaklab;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use morph3d::{Component, ComponentSet, Connectivity, Mask};
pub use volgrid::{Geometry, Index3, VolumeGrid, VolumeKind};
