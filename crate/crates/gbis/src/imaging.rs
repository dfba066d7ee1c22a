//! Raster images, raw PPM (P6) I/O, Gaussian pre-smoothing and label
//! recoloring.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{real_from_f64, Error, Real, Result};

/// Channels per pixel; the pipeline is RGB-only.
pub const CHANNELS: usize = 3;

/// A row-major RGB raster. `S` is `u8` for decoded images and a float type
/// for smoothed ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage<S> {
    width: usize,
    height: usize,
    data: Vec<S>,
}

impl<S> RasterImage<S> {
    /// Wraps raw samples. `data` must hold exactly `width * height * 3`
    /// values in row-major RGB order.
    pub fn new(width: usize, height: usize, data: Vec<S>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|p| p.checked_mul(CHANNELS))
            .ok_or_else(|| {
                Error::InvalidParameter(format!("image dimensions {width}x{height} overflow"))
            })?;
        if data.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "sample buffer holds {} values, expected {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    /// Index of the first sample of pixel (x, y).
    #[inline]
    pub fn sample_base(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * CHANNELS
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[S] {
        let stride = self.width * CHANNELS;
        &self.data[y * stride..(y + 1) * stride]
    }
}

impl<S: Copy> RasterImage<S> {
    /// Builds an image by evaluating `f(x, y, channel)` at every sample.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(width * height * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                for c in 0..CHANNELS {
                    data.push(f(x, y, c));
                }
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: S) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height * CHANNELS],
        }
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize, c: usize) -> S {
        self.data[self.sample_base(x, y) + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [S; 3] {
        let base = self.sample_base(x, y);
        [self.data[base], self.data[base + 1], self.data[base + 2]]
    }
}

impl RasterImage<u8> {
    /// Converts 8-bit samples to the float sample type, value-preserving.
    pub fn to_float<T: Real>(&self) -> RasterImage<T> {
        RasterImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&s| T::from_u8(s).expect("u8 fits any float"))
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// PPM (raw P6) codec
// ---------------------------------------------------------------------------

fn is_ppm_whitespace(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    /// Skips whitespace and `#` comments (comments run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if is_ppm_whitespace(b) {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Reads one ASCII decimal token.
    fn read_number(&mut self, field: &'static str) -> Result<(u64, usize)> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u64 = 0;
        let mut digits = 0usize;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(self.bytes[self.pos] - b'0')))
                .ok_or(Error::PpmHeader {
                    field,
                    offset: start,
                })?;
            self.pos += 1;
            digits += 1;
        }
        if digits == 0 {
            return Err(Error::PpmHeader {
                field,
                offset: self.pos.min(self.bytes.len()),
            });
        }
        Ok((value, start))
    }
}

/// Decodes a raw PPM (`P6`, maxval 255) byte stream.
pub fn read_ppm(bytes: &[u8]) -> Result<RasterImage<u8>> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(Error::PpmMagic { offset: 0 });
    }
    let mut cursor = HeaderCursor { bytes, pos: 2 };
    let (width, w_off) = cursor.read_number("width")?;
    let (height, h_off) = cursor.read_number("height")?;
    let (maxval, m_off) = cursor.read_number("maxval")?;
    if width == 0 {
        return Err(Error::PpmHeader {
            field: "width",
            offset: w_off,
        });
    }
    if height == 0 {
        return Err(Error::PpmHeader {
            field: "height",
            offset: h_off,
        });
    }
    if maxval != 255 {
        return Err(Error::PpmMaxval {
            maxval,
            offset: m_off,
        });
    }
    // Exactly one whitespace byte separates the header from the payload.
    if cursor.pos >= bytes.len() || !is_ppm_whitespace(bytes[cursor.pos]) {
        return Err(Error::PpmHeader {
            field: "header terminator",
            offset: cursor.pos.min(bytes.len()),
        });
    }
    let payload_start = cursor.pos + 1;

    let width = width as usize;
    let height = height as usize;
    let needed = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(CHANNELS))
        .ok_or(Error::PpmHeader {
            field: "width",
            offset: w_off,
        })?;
    let available = bytes.len() - payload_start;
    if available < needed {
        return Err(Error::PpmTruncated {
            offset: bytes.len(),
            needed,
            available,
        });
    }
    RasterImage::new(
        width,
        height,
        bytes[payload_start..payload_start + needed].to_vec(),
    )
}

/// Encodes as raw PPM: `P6\n{w} {h}\n255\n` followed by the samples.
pub fn write_ppm(img: &RasterImage<u8>) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

// ---------------------------------------------------------------------------
// Gaussian smoothing
// ---------------------------------------------------------------------------

/// Parameters for the pre-smoothing stage. The boundary rule is fixed to
/// symmetric reflection (edge sample repeated), which keeps the kernel mass
/// inside the frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    sigma: f64,
}

impl SmoothingParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and non-negative, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Normalized 1-D Gaussian taps with radius `ceil(3 * sigma)`.
///
/// Returns `(radius, taps)` where `taps.len() == 2 * radius + 1` and the
/// taps sum to 1 up to rounding. `sigma` must be positive.
pub fn gaussian_kernel(sigma: f64) -> (usize, Vec<f64>) {
    assert!(sigma > 0.0, "kernel needs positive sigma");
    let radius = (3.0 * sigma).ceil() as usize;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d * inv).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    (radius, taps)
}

/// Maps an out-of-range index into `[0, n)` by symmetric reflection with
/// the edge sample repeated: `-1 -> 0`, `-2 -> 1`, `n -> n-1`, ...
#[inline]
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    let period = 2 * n as isize;
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - 1 - m;
    }
    m as usize
}

/// Horizontal tap pass for one row; `out` receives `width * 3` samples.
///
/// Accumulation is centered on the output sample, so a constant input row
/// reproduces itself bit-for-bit regardless of kernel normalization error.
pub(crate) fn horizontal_pass_row<T: Real>(
    src: &RasterImage<u8>,
    taps: &[T],
    radius: usize,
    y: usize,
    out: &mut [T],
) {
    let w = src.width();
    let row = src.row(y);
    debug_assert_eq!(out.len(), w * CHANNELS);
    for x in 0..w {
        for c in 0..CHANNELS {
            let center = T::from_u8(row[x * CHANNELS + c]).expect("u8 fits any float");
            let mut acc = T::zero();
            for (j, &tap) in taps.iter().enumerate() {
                let sx = reflect_index(x as isize + j as isize - radius as isize, w);
                let s = T::from_u8(row[sx * CHANNELS + c]).expect("u8 fits any float");
                acc += tap * (s - center);
            }
            out[x * CHANNELS + c] = center + acc;
        }
    }
}

/// Vertical tap pass for one output row. `mid_row` returns the horizontal
/// pass result for an absolute row index.
pub(crate) fn vertical_pass_row<'a, T, F>(
    mid_row: F,
    taps: &[T],
    radius: usize,
    y: usize,
    height: usize,
    out: &mut [T],
) where
    T: Real,
    F: Fn(usize) -> &'a [T],
{
    let center_row = mid_row(y);
    debug_assert_eq!(out.len(), center_row.len());
    out.copy_from_slice(center_row);
    for (j, &tap) in taps.iter().enumerate() {
        let sy = reflect_index(y as isize + j as isize - radius as isize, height);
        let src_row = mid_row(sy);
        for (o, (&s, &center)) in out.iter_mut().zip(src_row.iter().zip(center_row.iter())) {
            *o += tap * (s - center);
        }
    }
}

/// Separable Gaussian smoothing, single-threaded.
pub fn gaussian_smooth<T: Real>(img: &RasterImage<u8>, params: &SmoothingParams) -> RasterImage<T> {
    gaussian_smooth_with_workers(img, params, 1)
}

/// Separable Gaussian smoothing with row-parallel passes. The result is
/// bitwise independent of `workers`.
pub fn gaussian_smooth_with_workers<T: Real>(
    img: &RasterImage<u8>,
    params: &SmoothingParams,
    workers: usize,
) -> RasterImage<T> {
    if params.sigma == 0.0 {
        return img.to_float();
    }
    let (radius, taps_f64) = gaussian_kernel(params.sigma);
    let taps: Vec<T> = taps_f64.iter().map(|&t| real_from_f64(t)).collect();

    let w = img.width();
    let h = img.height();
    let stride = w * CHANNELS;

    let mut mid = vec![T::zero(); stride * h];
    for_row_chunks(&mut mid, stride, workers, |first_row, rows| {
        for (i, out) in rows.chunks_mut(stride).enumerate() {
            horizontal_pass_row(img, &taps, radius, first_row + i, out);
        }
    });

    let mut out = vec![T::zero(); stride * h];
    for_row_chunks(&mut out, stride, workers, |first_row, rows| {
        for (i, out_row) in rows.chunks_mut(stride).enumerate() {
            let y = first_row + i;
            vertical_pass_row(
                |r| &mid[r * stride..(r + 1) * stride],
                &taps,
                radius,
                y,
                h,
                out_row,
            );
        }
    });

    RasterImage {
        width: w,
        height: h,
        data: out,
    }
}

/// Splits `data` into contiguous row chunks and processes them on scoped
/// threads. `f` receives the first row index of its chunk.
fn for_row_chunks<T, F>(data: &mut [T], stride: usize, workers: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    let rows = data.len() / stride;
    let workers = workers.max(1).min(rows.max(1));
    if workers <= 1 {
        f(0, data);
        return;
    }
    let rows_per = rows.div_ceil(workers);
    std::thread::scope(|scope| {
        let mut rest = data;
        let mut first_row = 0;
        while !rest.is_empty() {
            let take = (rows_per * stride).min(rest.len());
            let (chunk, tail) = rest.split_at_mut(take);
            rest = tail;
            let f = &f;
            scope.spawn(move || f(first_row, chunk));
            first_row += take / stride;
        }
    });
}

// ---------------------------------------------------------------------------
// Label recoloring
// ---------------------------------------------------------------------------

/// A seeded, injective mapping from root labels to RGB colors.
#[derive(Debug, Clone)]
pub struct Palette {
    seed: u64,
    map: HashMap<u32, [u8; 3]>,
}

impl Palette {
    /// Draws one distinct color per distinct label, in ascending label
    /// order, redrawing on collision so the mapping is injective.
    pub fn for_labels(seed: u64, labels: &[u32]) -> Self {
        let roots: BTreeSet<u32> = labels.iter().copied().collect();
        assert!(
            roots.len() <= 1 << 24,
            "cannot assign {} distinct RGB colors",
            roots.len()
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut used = HashSet::with_capacity(roots.len());
        let mut map = HashMap::with_capacity(roots.len());
        for root in roots {
            loop {
                let color: [u8; 3] = rng.random();
                if used.insert(color) {
                    map.insert(root, color);
                    break;
                }
            }
        }
        Self { seed, map }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn color_of(&self, label: u32) -> Option<[u8; 3]> {
        self.map.get(&label).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Paints every pixel with its label's palette color.
pub fn render_labels(
    labels: &[u32],
    width: usize,
    height: usize,
    palette: &Palette,
) -> RasterImage<u8> {
    assert_eq!(labels.len(), width * height, "one label per pixel");
    let mut data = Vec::with_capacity(labels.len() * CHANNELS);
    for &label in labels {
        let color = palette
            .color_of(label)
            .expect("palette covers every label present");
        data.extend_from_slice(&color);
    }
    RasterImage {
        width,
        height,
        data,
    }
}
