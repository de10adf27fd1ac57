//! Linear deformable keypoint model of a car.

use crate::detection::SHAPE_BASIS_LEN;
use crate::error::ShapeError;
use crate::geometry::linalg::Vec3;

/// Mean keypoints plus a deformation basis; `S = S̄ + Σ λ_b V_b`.
///
/// Keypoints live in the object frame: X to the right, Y down with the
/// ground at `y = 0`, Z along the direction of travel.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeModel {
    pub mean_shape: Vec<Vec3<f64>>,
    pub basis: Vec<Vec<Vec3<f64>>>,
}

impl ShapeModel {
    pub fn new(mean_shape: Vec<Vec3<f64>>, basis: Vec<Vec<Vec3<f64>>>) -> Result<Self, ShapeError> {
        if basis.len() != SHAPE_BASIS_LEN {
            return Err(ShapeError::LengthMismatch { expected: SHAPE_BASIS_LEN, got: basis.len() });
        }
        if let Some(b) = basis.iter().find(|b| b.len() != mean_shape.len()) {
            return Err(ShapeError::LengthMismatch { expected: mean_shape.len(), got: b.len() });
        }
        Ok(Self { mean_shape, basis })
    }

    /// 14-keypoint sedan: wheels, lights, mirrors, roof corners. Basis
    /// elements stretch length, width and height, move the cabin
    /// backwards and raise the hood.
    pub fn default_car() -> Self {
        let v = Vec3::new;
        let mut mean = Vec::new();
        for (x, z) in [(-0.75, 1.3), (0.75, 1.3), (-0.75, -1.3), (0.75, -1.3)] {
            mean.push(v(x, -0.35, z));
        }
        mean.extend([v(-0.65, -0.7, 2.0), v(0.65, -0.7, 2.0), v(-0.65, -0.75, -2.0), v(0.65, -0.75, -2.0)]);
        mean.extend([v(-0.8, -1.0, 0.9), v(0.8, -1.0, 0.9)]);
        mean.extend([v(-0.6, -1.5, 0.6), v(0.6, -1.5, 0.6), v(-0.6, -1.5, -0.9), v(0.6, -1.5, -0.9)]);

        let length = mean.iter().map(|p| v(0.0, 0.0, 0.1 * p.z)).collect();
        let width = mean.iter().map(|p| v(0.1 * p.x, 0.0, 0.0)).collect();
        let height = mean.iter().map(|p| v(0.0, 0.1 * p.y, 0.0)).collect();
        let cabin = (0..mean.len()).map(|i| if i >= 10 { v(0.0, 0.0, -0.2) } else { Vec3::zeros() }).collect();
        let hood =
            (0..mean.len()).map(|i| if (4..6).contains(&i) { v(0.0, -0.1, 0.0) } else { Vec3::zeros() }).collect();
        Self::new(mean, vec![length, width, height, cabin, hood]).expect("consistent default model")
    }

    pub fn keypoint_count(&self) -> usize {
        self.mean_shape.len()
    }
}

pub fn reconstruct_shape(model: &ShapeModel, lambda: &[f64]) -> Result<Vec<Vec3<f64>>, ShapeError> {
    if lambda.len() != model.basis.len() {
        return Err(ShapeError::LengthMismatch { expected: model.basis.len(), got: lambda.len() });
    }
    let mut shape = model.mean_shape.clone();
    for (b, &l) in model.basis.iter().zip(lambda) {
        for (p, d) in shape.iter_mut().zip(b) {
            *p += *d * l;
        }
    }
    Ok(shape)
}

/// Height, width and length of a keypoint set standing on `y = 0`.
pub fn shape_dims(points: &[Vec3<f64>]) -> Vec3<f64> {
    let span = |f: fn(&Vec3<f64>) -> f64| {
        let (lo, hi) =
            points.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo
    };
    let height = -points.iter().map(|p| p.y).fold(0.0, f64::min);
    Vec3::new(height, span(|p| p.x), span(|p| p.z))
}
