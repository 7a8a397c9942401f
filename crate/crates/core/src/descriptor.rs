//! Histogram-of-oriented-gradients descriptors for face and eye patches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grayscale image, row-major, intensities in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayPatch {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayPatch {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParams(format!(
                "patch must be non-empty, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidParams(format!(
                "{width}x{height} patch needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParams(format!(
                "pixel intensity {bad} outside [0, 1]"
            )));
        }
        Ok(GrayPatch {
            width,
            height,
            pixels,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        GrayPatch::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayPatch::new(width, height, pixels)
    }

    pub fn from_gray8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        GrayPatch::new(
            width,
            height,
            bytes.iter().map(|&b| f64::from(b) / 255.0).collect(),
        )
    }

    /// Converts interleaved RGB with luminance weights 0.299 / 0.587 / 0.114.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::InvalidParams(format!(
                "{width}x{height} RGB image needs {} bytes, got {}",
                width * height * 3,
                bytes.len()
            )));
        }
        let pixels = bytes
            .chunks_exact(3)
            .map(|c| {
                let l = 0.299 * f64::from(c[0]) + 0.587 * f64::from(c[1]) + 0.114 * f64::from(c[2]);
                (l / 255.0).clamp(0.0, 1.0)
            })
            .collect();
        GrayPatch::new(width, height, pixels)
    }

    /// 8-bit quantization, rounding to nearest.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|p| (p * 255.0).round() as u8)
            .collect()
    }

    /// Snaps every intensity to the nearest 8-bit level.
    pub fn quantized(&self) -> GrayPatch {
        GrayPatch {
            width: self.width,
            height: self.height,
            pixels: self
                .to_gray8()
                .into_iter()
                .map(|b| f64::from(b) / 255.0)
                .collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    fn clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HogParams {
    pub cell_size: usize,
    pub n_bins: usize,
    pub block_size: usize,
    pub clip_threshold: f64,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams {
            cell_size: 8,
            n_bins: 9,
            block_size: 2,
            clip_threshold: 0.2,
        }
    }
}

impl HogParams {
    pub fn validate(&self) -> Result<()> {
        if self.cell_size == 0 || self.n_bins == 0 || self.block_size == 0 {
            return Err(Error::InvalidParams(format!(
                "HoG cell size, bin count and block size must be >= 1: {self:?}"
            )));
        }
        if !(self.clip_threshold.is_finite() && self.clip_threshold > 0.0) {
            return Err(Error::InvalidParams(format!(
                "HoG clip threshold must be positive, got {}",
                self.clip_threshold
            )));
        }
        Ok(())
    }

    /// Layout produced for a `width` x `height` patch.
    pub fn layout_for(&self, width: usize, height: usize) -> Result<HogLayout> {
        self.validate()?;
        if !width.is_multiple_of(self.cell_size) || !height.is_multiple_of(self.cell_size) {
            return Err(Error::InvalidParams(format!(
                "{width}x{height} patch is not divisible into {0}x{0} cells",
                self.cell_size
            )));
        }
        let (cells_x, cells_y) = (width / self.cell_size, height / self.cell_size);
        if cells_x < self.block_size || cells_y < self.block_size {
            return Err(Error::InvalidParams(format!(
                "{cells_x}x{cells_y} cells cannot hold a {0}x{0} block",
                self.block_size
            )));
        }
        Ok(HogLayout {
            cells_x,
            cells_y,
            n_bins: self.n_bins,
            block_size: self.block_size,
        })
    }
}

/// Shape of a descriptor. Blocks overlap with a stride of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HogLayout {
    pub cells_x: usize,
    pub cells_y: usize,
    pub n_bins: usize,
    pub block_size: usize,
}

impl HogLayout {
    pub fn blocks_x(&self) -> usize {
        self.cells_x + 1 - self.block_size
    }

    pub fn blocks_y(&self) -> usize {
        self.cells_y + 1 - self.block_size
    }

    pub fn block_len(&self) -> usize {
        self.block_size * self.block_size * self.n_bins
    }

    pub fn len(&self) -> usize {
        self.blocks_x() * self.blocks_y() * self.block_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for HogLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{} cells, {} bins, {}x{} blocks",
            self.cells_x, self.cells_y, self.n_bins, self.block_size, self.block_size
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HogDescriptor {
    layout: HogLayout,
    values: Vec<f64>,
}

impl HogDescriptor {
    pub fn new(layout: HogLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::LayoutMismatch {
                expected: format!("{} values ({layout})", layout.len()),
                found: format!("{} values", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParams(
                "descriptor values must be finite and nonnegative".into(),
            ));
        }
        Ok(HogDescriptor { layout, values })
    }

    pub fn layout(&self) -> HogLayout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Normalized values of block `(bx, by)`.
    pub fn block(&self, bx: usize, by: usize) -> &[f64] {
        let n = self.layout.block_len();
        let start = (by * self.layout.blocks_x() + bx) * n;
        &self.values[start..start + n]
    }
}

/// Per-cell orientation histograms, `cells_y x cells_x x n_bins`, row-major.
fn cell_histograms(patch: &GrayPatch, params: &HogParams, layout: &HogLayout) -> Vec<f64> {
    let n_bins = params.n_bins;
    let bin_width = 180.0 / n_bins as f64;
    let mut hist = vec![0.0; layout.cells_x * layout.cells_y * n_bins];
    for y in 0..patch.height {
        for x in 0..patch.width {
            let (xi, yi) = (x as isize, y as isize);
            let gx = patch.clamped(xi + 1, yi) - patch.clamped(xi - 1, yi);
            let gy = patch.clamped(xi, yi + 1) - patch.clamped(xi, yi - 1);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            let pos = angle / bin_width;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo = (lo as usize) % n_bins;
            let hi = (lo + 1) % n_bins;
            let cell = (y / params.cell_size) * layout.cells_x + x / params.cell_size;
            hist[cell * n_bins + lo] += mag * (1.0 - frac);
            hist[cell * n_bins + hi] += mag * frac;
        }
    }
    hist
}

fn l2_hys(block: &mut [f64], clip: f64) {
    let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    for v in block.iter_mut() {
        *v = (*v / norm).min(clip);
    }
    let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in block.iter_mut() {
            *v /= norm;
        }
    }
}

/// Centered-difference gradients with replicated borders, linear
/// interpolation between neighboring unsigned orientation bins (bin `i`
/// centered at `i * 180 / n_bins` degrees), and L2-hys normalization over
/// overlapping blocks.
pub fn compute_hog(patch: &GrayPatch, params: &HogParams) -> Result<HogDescriptor> {
    let layout = params.layout_for(patch.width, patch.height)?;
    let hist = cell_histograms(patch, params, &layout);
    let n_bins = params.n_bins;
    let bs = params.block_size;

    let mut values = Vec::with_capacity(layout.len());
    let mut block = Vec::with_capacity(layout.block_len());
    for by in 0..layout.blocks_y() {
        for bx in 0..layout.blocks_x() {
            block.clear();
            for cy in by..by + bs {
                for cx in bx..bx + bs {
                    let cell = cy * layout.cells_x + cx;
                    block.extend_from_slice(&hist[cell * n_bins..(cell + 1) * n_bins]);
                }
            }
            l2_hys(&mut block, params.clip_threshold);
            values.extend_from_slice(&block);
        }
    }
    Ok(HogDescriptor { layout, values })
}

/// Euclidean distance between descriptors of the same layout.
pub fn descriptor_distance(a: &HogDescriptor, b: &HogDescriptor) -> Result<f64> {
    if a.layout != b.layout {
        return Err(Error::LayoutMismatch {
            expected: a.layout.to_string(),
            found: b.layout.to_string(),
        });
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchBox {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl PatchBox {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        PatchBox {
            x,
            y,
            width,
            height,
        }
    }

    pub fn full(patch: &GrayPatch) -> Self {
        PatchBox::new(0, 0, patch.width, patch.height)
    }
}

/// Canonical (width, height) of the resampled face and eye patches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSizes {
    pub face: (usize, usize),
    pub eyes: (usize, usize),
}

impl Default for RegionSizes {
    fn default() -> Self {
        RegionSizes {
            face: (64, 64),
            eyes: (64, 16),
        }
    }
}

/// Bilinear resampling of `region` to `out_w` x `out_h`, sampling at pixel
/// centers and replicating the region's border.
pub fn resample(
    image: &GrayPatch,
    region: PatchBox,
    out_w: usize,
    out_h: usize,
) -> Result<GrayPatch> {
    if region.width == 0
        || region.height == 0
        || region.x + region.width > image.width
        || region.y + region.height > image.height
    {
        return Err(Error::InvalidParams(format!(
            "box {region:?} outside {}x{} image",
            image.width, image.height
        )));
    }
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidParams("output size must be non-zero".into()));
    }
    let sx = region.width as f64 / out_w as f64;
    let sy = region.height as f64 / out_h as f64;
    let max_x = (region.width - 1) as f64;
    let max_y = (region.height - 1) as f64;
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for j in 0..out_h {
        let fy = ((j as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(region.height - 1);
        let ty = fy - y0 as f64;
        for i in 0..out_w {
            let fx = ((i as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(region.width - 1);
            let tx = fx - x0 as f64;
            let p = |x: usize, y: usize| image.get(region.x + x, region.y + y);
            let top = p(x0, y0) * (1.0 - tx) + p(x1, y0) * tx;
            let bottom = p(x0, y1) * (1.0 - tx) + p(x1, y1) * tx;
            pixels.push((top * (1.0 - ty) + bottom * ty).clamp(0.0, 1.0));
        }
    }
    GrayPatch::new(out_w, out_h, pixels)
}

/// Crops the face and eye regions and resamples each to its canonical size.
pub fn extract_regions(
    image: &GrayPatch,
    face_box: PatchBox,
    eye_box: PatchBox,
    sizes: RegionSizes,
) -> Result<(GrayPatch, GrayPatch)> {
    let face = resample(image, face_box, sizes.face.0, sizes.face.1)?;
    let eyes = resample(image, eye_box, sizes.eyes.0, sizes.eyes.1)?;
    Ok((face, eyes))
}
