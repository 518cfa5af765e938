//! Axis-aligned integer boxes and intersection-over-union.

use crate::error::{CoreError, Result};

/// Axis-aligned rectangle in pixel coordinates, anchored at its top-left
/// corner. Covers columns `x..x+w` and rows `y..y+h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "[u32; 4]", into = "[u32; 4]"))]
pub struct BBox {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
}

impl BBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(CoreError::DegenerateBox { x, y, w, h });
        }
        if x.checked_add(w).is_none() || y.checked_add(h).is_none() {
            return Err(CoreError::InvalidParameter {
                name: "bbox",
                reason: alloc::format!("({x},{y},{w},{h}) overflows the coordinate range"),
            });
        }
        Ok(Self { x, y, w, h })
    }

    /// Box spanning the half-open ranges `x0..x1` and `y0..y1`.
    pub fn from_corners(x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self> {
        Self::new(x0, y0, x1.saturating_sub(x0), y1.saturating_sub(y0))
    }

    pub fn x(&self) -> u32 {
        self.x
    }

    pub fn y(&self) -> u32 {
        self.y
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    /// Exclusive right edge.
    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.right() <= width && self.bottom() <= height
    }

    /// Returns an error unless the box lies inside a `width`x`height` image.
    pub fn check_within(&self, width: u32, height: u32) -> Result<()> {
        if self.fits_within(width, height) {
            Ok(())
        } else {
            Err(CoreError::OutOfBounds {
                x: self.x,
                y: self.y,
                w: self.w,
                h: self.h,
                width,
                height,
            })
        }
    }

    pub fn contains_point(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x0 < x1 && y0 < y1 {
            Some(BBox {
                x: x0,
                y: y0,
                w: x1 - x0,
                h: y1 - y0,
            })
        } else {
            None
        }
    }

    pub fn intersection_area(&self, other: &BBox) -> u64 {
        self.intersection(other).map_or(0, |b| b.area())
    }

    /// Smallest box covering both.
    pub fn union_hull(&self, other: &BBox) -> BBox {
        let x0 = self.x.min(other.x);
        let y0 = self.y.min(other.y);
        BBox {
            x: x0,
            y: y0,
            w: self.right().max(other.right()) - x0,
            h: self.bottom().max(other.bottom()) - y0,
        }
    }

    /// The box shifted by `(dx, dy)`.
    pub fn translate(&self, dx: u32, dy: u32) -> Result<BBox> {
        BBox::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    pub fn to_array(&self) -> [u32; 4] {
        [self.x, self.y, self.w, self.h]
    }
}

impl TryFrom<[u32; 4]> for BBox {
    type Error = CoreError;

    fn try_from(v: [u32; 4]) -> Result<Self> {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [u32; 4] {
    fn from(b: BBox) -> Self {
        b.to_array()
    }
}

impl core::fmt::Display for BBox {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "({},{},{},{})", self.x, self.y, self.w, self.h)
    }
}

/// Intersection and union pixel counts of two boxes.
pub fn overlap_counts(a: &BBox, b: &BBox) -> (u64, u64) {
    let inter = a.intersection_area(b);
    (inter, a.area() + b.area() - inter)
}

/// Intersection over union using integer pixel areas.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let (inter, union) = overlap_counts(a, b);
    // union >= max(area) >= 1
    inter as f64 / union as f64
}
