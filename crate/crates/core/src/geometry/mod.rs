//! Camera model, ground-plane backprojection, uncertainty regions and
//! planar overlap.

pub mod camera;
pub mod linalg;
pub mod polygon;
pub mod region;

pub use camera::{apply_motion, backproject_ground, backprojection_jacobian, project, CameraRig, RigidMotion};
pub use linalg::{Mat3, Vec2, Vec3};
pub use polygon::{polygon_overlap, ConvexPolygon2D};
pub use region::{build_region, project_region, transport_region, GatedRegion3D};
