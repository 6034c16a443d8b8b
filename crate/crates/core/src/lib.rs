//! Ridge orientation estimation for grayscale images, modeled on a fixed-width
//! hardware datapath.
//!
//! The estimator is pixel-based: for every pixel it sums the absolute gray
//! differences to `n` sample pixels along each of `N` quantized directions and
//! picks the direction of minimum total variation. Per-pixel directions are
//! then voted into a block direction image over 16×16 blocks. The crate also
//! provides:
//!
//! * a bit-exact model of the arithmetic units (AVD blocks, adder trees,
//!   comparator switch trees) in [`datapath`] and [`orientation`],
//! * a cycle-count model of the 4-stage estimation pipeline with its
//!   reservation table in [`pipeline`],
//! * an independent gradient-based estimator and angular error metrics in
//!   [`gradient`] for accuracy validation,
//! * synthetic oriented test patterns in [`synth`].

pub mod datapath;
pub mod geometry;
pub mod gradient;
pub mod image;
pub mod orientation;
pub mod pipeline;
pub mod synth;

pub use datapath::{avd, compute_sd_vector, sdcu, SdVector};
pub use geometry::{neighbor_address, DirectionSet, OffsetRom};
pub use gradient::{error_metric, gradient_orientation, quantize_field, AngleField, ErrorReport};
pub use image::{BlockGrid, Image};
pub use orientation::{
    estimate_orientation_field, maximum_tree, minimum_tree, pixel_direction, BlockDirectionImage,
    DirectionHistogram, DirectionIndex, SwitchPayload,
};
pub use pipeline::{
    address_stream, run_pipeline, run_pipeline_with_block_size, PipelineConfig, PipelineRun,
    ReservationTable,
};
