//! Pairwise association costs and the gated cost matrix.
//!
//! Four cues are combined: image-plane overlap of the transported 3D region
//! with the candidate box (3D-2D), road-plane overlap of the transported
//! region with the candidate's own region (3D-3D), descriptor distance
//! (appearance), and shape-coefficient plus pose distance (shape/pose).
//! Each cue lies in `[0, 1]`; the combination is a weighted mean over the
//! cues available for a pair.

use crate::detection::{BBox, Detection, ObjectFeatures};
use crate::error::CostError;
use crate::geometry::camera::{CameraRig, RigidMotion};
use crate::geometry::polygon::{polygon_overlap, ConvexPolygon2D};
use crate::geometry::region::{build_region, project_region, transport_region, GatedRegion3D, DEFAULT_SIGMA0};
use crate::scalar::{clamp01, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights<T> {
    pub w_3d2d: T,
    pub w_3d3d: T,
    pub w_app: T,
    pub w_shape: T,
    pub eta_app: T,
    pub eta_s: T,
    pub eta_p: T,
    /// Combined costs above this value are gated out.
    pub gate_cost: T,
}

impl<T: Real> Default for CostWeights<T> {
    fn default() -> Self {
        Self {
            w_3d2d: T::lit(0.35),
            w_3d3d: T::lit(0.35),
            w_app: T::lit(0.2),
            w_shape: T::lit(0.1),
            eta_app: T::lit(0.1),
            eta_s: T::lit(0.25),
            eta_p: T::lit(0.2),
            gate_cost: T::lit(0.9),
        }
    }
}

impl<T: Real> CostWeights<T> {
    /// Default normalisation constants with the given cue weights.
    pub fn with_weights(w_3d2d: T, w_3d3d: T, w_app: T, w_shape: T) -> Result<Self, CostError> {
        let w = Self { w_3d2d, w_3d3d, w_app, w_shape, ..Self::default() };
        w.validate()?;
        Ok(w)
    }

    pub fn weights(&self) -> [T; 4] {
        [self.w_3d2d, self.w_3d3d, self.w_app, self.w_shape]
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let ws = self.weights();
        if ws.iter().any(|w| !(*w >= T::zero())) {
            return Err(CostError::InvalidWeights("weights must be non-negative"));
        }
        let sum: T = ws.iter().copied().sum();
        if (sum - T::one()).abs() > T::tolerance() {
            return Err(CostError::InvalidWeights("weights must sum to one"));
        }
        if !(self.eta_app > T::zero() && self.eta_s > T::zero() && self.eta_p > T::zero()) {
            return Err(CostError::InvalidWeights("normalisation constants must be positive"));
        }
        if !(self.gate_cost > T::zero() && self.gate_cost <= T::one()) {
            return Err(CostError::InvalidWeights("gate cost must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Geometric gating applies whenever a geometric cue is in use.
    pub fn uses_geometry(&self) -> bool {
        self.w_3d2d > T::zero() || self.w_3d3d > T::zero()
    }
}

/// Settings for building a cost matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostConfig<T> {
    pub weights: CostWeights<T>,
    /// Pixel standard deviation of a detection with score 1.
    pub sigma0: T,
}

impl<T: Real> Default for CostConfig<T> {
    fn default() -> Self {
        Self { weights: CostWeights::default(), sigma0: T::lit(DEFAULT_SIGMA0) }
    }
}

/// Rectangular matrix of combined costs; `None` marks a gated-out pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    values: Vec<Option<T>>,
}

impl<T: Real> CostMatrix<T> {
    pub fn gated(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![None; rows * cols] }
    }

    /// Dense matrix with every entry evaluated.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost matrix");
        Self { rows: rows.len(), cols, values: rows.iter().flat_map(|r| r.iter().map(|&v| Some(v))).collect() }
    }

    /// Matrix with explicit gating (`None` entries).
    pub fn from_options(rows: &[Vec<Option<T>>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost matrix");
        Self { rows: rows.len(), cols, values: rows.iter().flatten().copied().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Option<T> {
        self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Option<T>) {
        self.values[r * self.cols + c] = v;
    }

    pub fn is_gated(&self, r: usize, c: usize) -> bool {
        self.get(r, c).is_none()
    }

    /// Number of entries that were not gated out.
    pub fn evaluated_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// `1 − area(region ∩ box) / area(box)` for an already projected region.
pub fn image_overlap_cost<T: Real>(projected: &ConvexPolygon2D<T>, cand: &BBox<T>) -> T {
    let (inter, _, area_box) = polygon_overlap(projected, &cand.to_polygon());
    if area_box <= T::zero() {
        return T::one();
    }
    clamp01(T::one() - inter / area_box)
}

/// 3D-2D cost. `None` when the region cannot be projected into frame f′.
pub fn cost_3d2d<T: Real>(region_at_fprime: &GatedRegion3D<T>, cand: &Detection<T>, rig: &CameraRig<T>) -> Option<T> {
    let projected = project_region(region_at_fprime, rig).ok()?;
    Some(image_overlap_cost(&projected, &cand.bbox))
}

/// 3D-3D cost: one minus the IoU of the two road-plane footprints.
/// `None` when both footprints have zero area.
pub fn cost_3d3d<T: Real>(region_at_fprime: &GatedRegion3D<T>, cand_region: &GatedRegion3D<T>) -> Option<T> {
    let (inter, a, b) = polygon_overlap(&region_at_fprime.xz_footprint(), &cand_region.xz_footprint());
    let union = a + b - inter;
    if union <= T::zero() {
        return None;
    }
    Some(clamp01(T::one() - inter / union))
}

fn features_of<T>(f: Option<&ObjectFeatures<T>>) -> Result<&ObjectFeatures<T>, CostError> {
    f.ok_or(CostError::MissingFeatures)
}

/// `clamp(η_app · ‖ψ_a − ψ_b‖², 0, 1)`.
pub fn cost_appearance<T: Real>(
    a: Option<&ObjectFeatures<T>>,
    b: Option<&ObjectFeatures<T>>,
    eta_app: T,
) -> Result<T, CostError> {
    let (a, b) = (features_of(a)?, features_of(b)?);
    if a.psi.is_empty() || b.psi.is_empty() {
        return Err(CostError::MissingFeatures);
    }
    if a.psi.len() != b.psi.len() {
        return Err(CostError::DimensionMismatch(a.psi.len(), b.psi.len()));
    }
    let d2: T = a.psi.iter().zip(&b.psi).map(|(&x, &y)| (x - y) * (x - y)).sum();
    Ok(clamp01(eta_app * d2))
}

/// `clamp(η_s · ‖Λ_a − Λ_b‖² + η_p · ‖ω_a − ω_b‖², 0, 1)`.
pub fn cost_shape_pose<T: Real>(
    a: Option<&ObjectFeatures<T>>,
    b: Option<&ObjectFeatures<T>>,
    eta_s: T,
    eta_p: T,
) -> Result<T, CostError> {
    let (a, b) = (features_of(a)?, features_of(b)?);
    let shape: T = a.lambda.iter().zip(&b.lambda).map(|(&x, &y)| (x - y) * (x - y)).sum();
    let pose = (a.omega - b.omega).norm_squared();
    Ok(clamp01(eta_s * shape + eta_p * pose))
}

/// Weighted mean of the available cue values. Cues with zero weight or no
/// value are dropped and the remaining weights renormalised.
pub fn combine_costs<T: Real>(terms: &[(T, Option<T>)]) -> Option<T> {
    let mut wsum = T::zero();
    let mut acc = T::zero();
    for &(w, c) in terms {
        if let (true, Some(c)) = (w > T::zero(), c) {
            wsum = wsum + w;
            acc = acc + w * c;
        }
    }
    (wsum > T::zero()).then(|| clamp01(acc / wsum))
}

/// Per-row state computed once and reused across the columns.
struct RowGeometry<T> {
    region: GatedRegion3D<T>,
    projected: ConvexPolygon2D<T>,
}

enum RowState<T> {
    Geometric(RowGeometry<T>),
    /// No usable backprojection; only appearance and shape/pose apply.
    Fallback,
    /// Region left the camera's view.
    Lost,
}

/// Cost matrix between detections of frame f (rows) and frame f′ (columns)
/// under a single camera motion f → f′.
pub fn build_cost_matrix<T: Real>(
    dets_f: &[Detection<T>],
    dets_fprime: &[Detection<T>],
    motion: &RigidMotion<T>,
    rig: &CameraRig<T>,
    config: &CostConfig<T>,
) -> CostMatrix<T> {
    let rows: Vec<(&Detection<T>, RigidMotion<T>)> = dets_f.iter().map(|d| (d, *motion)).collect();
    build_cost_matrix_with_motions(&rows, dets_fprime, rig, config)
}

/// Like [`build_cost_matrix`] but each row carries its own motion into
/// frame f′, so rows may come from different earlier frames.
pub fn build_cost_matrix_with_motions<T: Real>(
    rows: &[(&Detection<T>, RigidMotion<T>)],
    cols: &[Detection<T>],
    rig: &CameraRig<T>,
    config: &CostConfig<T>,
) -> CostMatrix<T> {
    let w = &config.weights;
    let geometric = w.uses_geometry();
    let mut matrix = CostMatrix::gated(rows.len(), cols.len());

    let col_regions: Vec<Option<GatedRegion3D<T>>> = if w.w_3d3d > T::zero() {
        cols.iter().map(|d| build_region(d, rig, config.sigma0).ok()).collect()
    } else {
        vec![None; cols.len()]
    };

    for (r, (det, motion)) in rows.iter().enumerate() {
        let state = if geometric {
            match build_region(det, rig, config.sigma0) {
                Ok(region) => {
                    let moved = transport_region(&region, motion);
                    match project_region(&moved, rig) {
                        Ok(projected) => RowState::Geometric(RowGeometry { region: moved, projected }),
                        Err(_) => RowState::Lost,
                    }
                }
                Err(_) => RowState::Fallback,
            }
        } else {
            RowState::Fallback
        };
        if matches!(state, RowState::Lost) {
            continue;
        }

        for (c, cand) in cols.iter().enumerate() {
            let (c2d, c3d) = match &state {
                RowState::Geometric(g) => {
                    let c2d = image_overlap_cost(&g.projected, &cand.bbox);
                    // gate: candidate box must touch the expected image area
                    if c2d >= T::one() {
                        continue;
                    }
                    let c3d = match &col_regions[c] {
                        Some(cr) => match cost_3d3d(&g.region, cr) {
                            Some(v) => Some(v),
                            None => continue,
                        },
                        None => None,
                    };
                    (Some(c2d), c3d)
                }
                _ => (None, None),
            };
            let app = if w.w_app > T::zero() {
                cost_appearance(det.features.as_ref(), cand.features.as_ref(), w.eta_app).ok()
            } else {
                None
            };
            let shape = if w.w_shape > T::zero() {
                cost_shape_pose(det.features.as_ref(), cand.features.as_ref(), w.eta_s, w.eta_p).ok()
            } else {
                None
            };
            let value = combine_costs(&[(w.w_3d2d, c2d), (w.w_3d3d, c3d), (w.w_app, app), (w.w_shape, shape)]);
            if let Some(v) = value.filter(|v| *v <= w.gate_cost) {
                matrix.set(r, c, Some(v));
            }
        }
    }
    matrix
}
