use thiserror::Error;

use crate::geom::{distance_to_segment, PlanarPoint};
use crate::scalar::{lit, Real};

use super::{MapError, RoadMap, SegmentId};

/// Half the drawn road width, meters (= pixels).
const HALF_WIDTH: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("not a binary PGM (P5) image")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("PGM data truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
}

/// Row-major binary image; row 0 is the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.data[row * self.width + col] = value;
    }

    pub fn count_set(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }

    /// Every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.iter().zip(&other.data).all(|(a, b)| !*a || *b)
    }

    /// P5 encoding with maxval 255; set pixels are 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.data.iter().map(|&v| if v { 255u8 } else { 0 }));
        out
    }

    /// Decodes a P5 image; pixels at or above half of maxval are set.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self, PgmError> {
        if !bytes.starts_with(b"P5") {
            return Err(PgmError::BadMagic);
        }
        let mut pos = 2;
        let mut fields = [0usize; 3];
        for field in fields.iter_mut() {
            loop {
                match bytes.get(pos) {
                    Some(b'#') => {
                        while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                            pos += 1;
                        }
                    }
                    Some(b) if b.is_ascii_whitespace() => pos += 1,
                    _ => break,
                }
            }
            let start = pos;
            while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                pos += 1;
            }
            let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
            *field = text
                .parse()
                .map_err(|_| PgmError::BadHeader(format!("expected a number at byte {start}")))?;
        }
        let [width, height, maxval] = fields;
        if maxval == 0 || maxval > 255 {
            return Err(PgmError::BadHeader(format!("unsupported maxval {maxval}")));
        }
        if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(PgmError::BadHeader("missing separator before data".into()));
        }
        pos += 1;
        let expected = width * height;
        let body = &bytes[pos.min(bytes.len())..];
        if body.len() < expected {
            return Err(PgmError::Truncated {
                expected,
                got: body.len(),
            });
        }
        let threshold = maxval.div_ceil(2);
        Ok(Self {
            width,
            height,
            data: body[..expected]
                .iter()
                .map(|&v| v as usize >= threshold)
                .collect(),
        })
    }
}

/// Renders a `size` x `size` crop at 1 m per pixel around `center`, rotated
/// so that `heading` (radians counterclockwise from east) points up. Pixels
/// within 2 m of an included polyline are set. `route = None` draws every
/// segment.
pub fn rasterize_crop<T: Real>(
    map: &RoadMap<T>,
    center: PlanarPoint<T>,
    heading: T,
    route: Option<&[SegmentId]>,
    size: usize,
) -> Result<BinaryImage, MapError> {
    if size < 32 || !size.is_multiple_of(2) {
        return Err(MapError::InvalidInput(format!(
            "crop size must be even and at least 32, got {size}"
        )));
    }
    if !heading.is_finite() || !center.is_finite() {
        return Err(MapError::InvalidInput("crop pose must be finite".into()));
    }
    let mut img = BinaryImage::new(size, size);
    let (s, c) = heading.sin_cos();
    let half = lit::<T>(size as f64 / 2.0);
    let hw = lit::<T>(HALF_WIDTH);
    // Crop frame: u to the right, v forward, both relative to the center.
    let to_crop = |p: &PlanarPoint<T>| {
        let d = *p - center;
        PlanarPoint::new(d.x * s - d.y * c, d.x * c + d.y * s)
    };
    let limit = lit::<T>(size as f64);
    for (id, seg) in map.segments() {
        if route.is_some_and(|r| !r.contains(id)) {
            continue;
        }
        let pts: Vec<PlanarPoint<T>> = seg.polyline.iter().map(to_crop).collect();
        let n = pts.len().saturating_sub(1).max(1);
        for k in 0..n {
            let a = pts[k];
            let b = pts.get(k + 1).copied().unwrap_or(a);
            // Pixel (col,row) center sits at u = col + 0.5 - half, v = half - row - 0.5.
            let col_lo = (a.x.min(b.x) - hw + half - lit(0.5)).ceil();
            let col_hi = (a.x.max(b.x) + hw + half - lit(0.5)).floor();
            let row_lo = (half - lit(0.5) - a.y.max(b.y) - hw).ceil();
            let row_hi = (half - lit(0.5) - a.y.min(b.y) + hw).floor();
            if col_hi < T::zero() || row_hi < T::zero() || col_lo >= limit || row_lo >= limit {
                continue;
            }
            let clamp = |v: T| {
                v.max(T::zero())
                    .min(limit - T::one())
                    .to_usize()
                    .unwrap_or(0)
            };
            for row in clamp(row_lo)..=clamp(row_hi) {
                for col in clamp(col_lo)..=clamp(col_hi) {
                    if img.get(col, row) {
                        continue;
                    }
                    let u = lit::<T>(col as f64 + 0.5) - half;
                    let v = half - lit::<T>(row as f64 + 0.5);
                    if distance_to_segment(PlanarPoint::new(u, v), a, b) <= hw {
                        img.set(col, row, true);
                    }
                }
            }
        }
    }
    Ok(img)
}
