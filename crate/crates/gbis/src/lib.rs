//! Graph-based color image segmentation with interchangeable execution
//! strategies.
//!
//! The pipeline follows the classic region-merging scheme of Felzenszwalb
//! and Huttenlocher ("Efficient Graph-Based Image Segmentation"): the image
//! is smoothed, turned into a weighted pixel graph, and components are
//! agglomerated over a weight-sorted edge list, first by an adaptive
//! threshold criterion and then by a user-supplied minimum component size.
//!
//! Three strategies run that same pipeline:
//!
//! * [`engine::run_sequential`] — one stage after another, single-threaded.
//! * [`engine::run_pipelined`] — smoothing, edge construction and run
//!   sorting overlap in a band pipeline; output is identical to sequential.
//! * [`engine::run_hybrid`] — the image is split into tiles that are
//!   segmented independently in parallel, then merged by seam stitching
//!   before a whole-image minimum-size pass.
//!
//! All pixel math is generic over the floating-point sample type via
//! [`Real`]; the aliases below fix the default precision used by the CLI.

pub mod agglomerate;
pub mod engine;
pub mod forest;
pub mod graph;
pub mod imaging;
pub mod tiling;

mod error;

pub use error::{Error, Result};

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the segmentation math is generic over.
///
/// Implemented for `f32` and `f64` through the blanket impl.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Send + Sync + 'static
{
}

/// Default scalar type used by the CLI and the aliases below.
pub type Scalar = f64;

/// 8-bit RGB raster, the on-disk pixel format.
pub type Image8 = imaging::RasterImage<u8>;
/// Float RGB raster at the default precision (smoothed images).
pub type FloatImage = imaging::RasterImage<Scalar>;
/// Edge list at the default precision.
pub type Edges = graph::EdgeList<Scalar>;
/// Component forest at the default precision.
pub type Forest = forest::ComponentForest<Scalar>;
/// Segmentation parameters at the default precision.
pub type Params = agglomerate::SegParams<Scalar>;

pub(crate) fn real_from_f64<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 value representable in scalar type")
}

pub(crate) fn real_from_usize<T: Real>(x: usize) -> T {
    T::from_usize(x).expect("usize value representable in scalar type")
}
