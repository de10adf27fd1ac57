//! Detector output: boxes, scores and the optional per-detection features.

use crate::error::CostError;
use crate::geometry::linalg::{Vec2, Vec3};
use crate::geometry::polygon::ConvexPolygon2D;
use crate::scalar::Real;

/// Number of deformation coefficients in the shape model.
pub const SHAPE_BASIS_LEN: usize = 5;

/// Image box with top-left origin, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BBox<T> {
    pub x: T,
    pub y: T,
    pub w: T,
    pub h: T,
}

impl<T: Real> BBox<T> {
    pub fn new(x: T, y: T, w: T, h: T) -> Self {
        Self { x, y, w, h }
    }

    pub fn from_corners(left: T, top: T, right: T, bottom: T) -> Self {
        Self::new(left, top, right - left, bottom - top)
    }

    pub fn right(&self) -> T {
        self.x + self.w
    }

    pub fn bottom(&self) -> T {
        self.y + self.h
    }

    pub fn area(&self) -> T {
        self.w.max(T::zero()) * self.h.max(T::zero())
    }

    pub fn bottom_center(&self) -> Vec2<T> {
        Vec2::new(self.x + self.w * T::lit(0.5), self.bottom())
    }

    pub fn intersection_area(&self, o: &Self) -> T {
        let iw = self.right().min(o.right()) - self.x.max(o.x);
        let ih = self.bottom().min(o.bottom()) - self.y.max(o.y);
        iw.max(T::zero()) * ih.max(T::zero())
    }

    pub fn iou(&self, o: &Self) -> T {
        let inter = self.intersection_area(o);
        let union = self.area() + o.area() - inter;
        if union > T::zero() {
            inter / union
        } else {
            T::zero()
        }
    }

    pub fn to_polygon(&self) -> ConvexPolygon2D<T> {
        ConvexPolygon2D::rectangle(self.x, self.y, self.right(), self.bottom())
    }

    /// Box clipped to `[0, width] × [0, height]`; `None` if nothing remains.
    pub fn clip_to(&self, width: T, height: T) -> Option<Self> {
        let l = self.x.max(T::zero());
        let t = self.y.max(T::zero());
        let r = self.right().min(width);
        let b = self.bottom().min(height);
        (r > l && b > t).then(|| Self::from_corners(l, t, r, b))
    }
}

/// Outputs of the single-image shape and pose estimator for one detection.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectFeatures<T> {
    /// Appearance descriptor.
    pub psi: Vec<T>,
    /// Shape coefficients.
    pub lambda: [T; SHAPE_BASIS_LEN],
    /// Axis-angle pose in the camera frame.
    pub omega: Vec3<T>,
    /// Height, width, length (meters).
    pub dims: Vec3<T>,
}

impl<T: Real> ObjectFeatures<T> {
    pub fn validate(&self) -> Result<(), CostError> {
        let finite = self.psi.iter().chain(self.lambda.iter()).all(|v| v.is_finite())
            && self.omega.is_finite()
            && self.dims.is_finite();
        if !finite {
            return Err(CostError::InvalidFeatures("values must be finite"));
        }
        if !(self.dims.x > T::zero() && self.dims.y > T::zero() && self.dims.z > T::zero()) {
            return Err(CostError::InvalidFeatures("dimensions must be positive"));
        }
        Ok(())
    }

    pub fn height(&self) -> T {
        self.dims.x
    }

    pub fn width(&self) -> T {
        self.dims.y
    }

    pub fn length(&self) -> T {
        self.dims.z
    }

    /// Rotation about the vertical axis encoded by `omega`.
    pub fn yaw(&self) -> T {
        crate::geometry::linalg::Mat3::from_axis_angle(self.omega).yaw()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    pub frame: usize,
    pub bbox: BBox<T>,
    pub score: T,
    pub features: Option<ObjectFeatures<T>>,
}

impl<T: Real> Detection<T> {
    pub fn new(frame: usize, bbox: BBox<T>, score: T) -> Self {
        Self { frame, bbox, score, features: None }
    }

    pub fn with_features(mut self, features: ObjectFeatures<T>) -> Self {
        self.features = Some(features);
        self
    }
}
