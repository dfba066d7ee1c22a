use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors surfaced by the segmentation library.
#[derive(Debug, Error)]
pub enum Error {
    /// The stream does not start with the raw-PPM magic `P6`.
    #[error("ppm: unsupported magic at byte {offset} (expected \"P6\")")]
    PpmMagic { offset: usize },

    /// A header token (width, height, maxval) is missing or malformed.
    #[error("ppm: malformed {field} at byte {offset}")]
    PpmHeader { field: &'static str, offset: usize },

    /// Only 8-bit samples (maxval 255) are supported.
    #[error("ppm: unsupported maxval {maxval} at byte {offset} (expected 255)")]
    PpmMaxval { maxval: u64, offset: usize },

    /// The pixel payload ends before width*height*3 samples.
    #[error("ppm: truncated payload at byte {offset}: need {needed} bytes, found {available}")]
    PpmTruncated {
        offset: usize,
        needed: usize,
        available: usize,
    },

    /// A caller-supplied parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Agglomeration requires a weight-sorted edge list.
    #[error("edge list must be sorted before agglomeration")]
    UnsortedEdges,

    /// A union-find operation was called outside its contract.
    #[error("forest contract violation: {0}")]
    ForestContract(String),

    /// The requested tile count cannot split this image into tiles of at
    /// least 2x2 pixels.
    #[error("n too large: {n} tiles cannot split a {width}x{height} image into tiles of at least 2x2 pixels")]
    TilesTooLarge {
        n: usize,
        width: usize,
        height: usize,
    },
}
