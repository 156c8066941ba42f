//! Pinhole camera on the trailing vehicle, lead-vehicle bounding boxes and
//! the bearing read back from a box.
//!
//! Frames: world is z-up; the vehicle body frame has x forward, y left,
//! z up with its origin on the ground; the camera frame is the usual optical
//! frame with x right, y down, z along the optical axis.

use nalgebra::{Isometry3, Matrix3, Point2, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};

use crate::vehicle::VehicleState;

/// Default detector input size (square).
pub const DEFAULT_IMAGE_SIZE: u32 = 416;
pub const DEFAULT_FOV_DEG: f64 = 70.0;
pub const DEFAULT_MOUNT_HEIGHT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Body frame to camera frame.
    pub camera_from_body: Isometry3<f64>,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self::from_fov(
            DEFAULT_IMAGE_SIZE,
            DEFAULT_IMAGE_SIZE,
            DEFAULT_FOV_DEG.to_radians(),
            DEFAULT_MOUNT_HEIGHT,
        )
    }
}

impl CameraModel {
    /// Square-pixel camera centered in the image, looking straight ahead
    /// from `mount_height` above the body origin.
    pub fn from_fov(width: u32, height: u32, fov: f64, mount_height: f64) -> Self {
        let fx = width as f64 / 2.0 / (fov / 2.0).tan();
        Self {
            fx,
            fy: fx,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
            camera_from_body: forward_mount(Vector3::new(0.0, 0.0, mount_height)),
        }
    }

    /// Horizontal field of view [rad].
    pub fn fov(&self) -> f64 {
        2.0 * (self.width as f64 / (2.0 * self.fx)).atan()
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Camera-frame point to pixel; `None` when not in front of the camera.
    pub fn project_camera_point(&self, p: &Point3<f64>) -> Option<Point2<f64>> {
        if p.z <= 0.0 {
            return None;
        }
        Some(Point2::new(
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        ))
    }

    /// Inverse of [`Self::project_camera_point`] at a given depth.
    pub fn unproject(&self, pixel: &Point2<f64>, depth: f64) -> Point3<f64> {
        Point3::new(
            (pixel.x - self.cx) / self.fx * depth,
            (pixel.y - self.cy) / self.fy * depth,
            depth,
        )
    }

    /// Camera frame from world frame for a camera riding on `pose`.
    pub fn camera_from_world(&self, pose: &VehicleState) -> Isometry3<f64> {
        self.camera_from_body * body_from_world(pose)
    }
}

/// Camera mounted at `offset` in the body frame with its optical axis along
/// body +x.
pub fn forward_mount(offset: Vector3<f64>) -> Isometry3<f64> {
    // Rows map body axes into optical axes: x_c = -y_b, y_c = -z_b, z_c = x_b.
    let rot = Rotation3::from_matrix_unchecked(Matrix3::new(
        0.0, -1.0, 0.0, //
        0.0, 0.0, -1.0, //
        1.0, 0.0, 0.0,
    ));
    let rotation = UnitQuaternion::from_rotation_matrix(&rot);
    let translation = Translation3::from(-(rotation * offset));
    Isometry3::from_parts(translation, rotation)
}

pub fn body_from_world(pose: &VehicleState) -> Isometry3<f64> {
    world_from_body(pose).inverse()
}

pub fn world_from_body(pose: &VehicleState) -> Isometry3<f64> {
    Isometry3::new(Vector3::new(pose.x, pose.y, 0.0), Vector3::z() * pose.psi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pixel(Point2<f64>),
    BehindCamera,
}

/// Projects a world point into the camera riding on `trailing_pose`.
pub fn project_world_point(
    cam: &CameraModel,
    trailing_pose: &VehicleState,
    q_world: &Point3<f64>,
) -> Projection {
    let q_cam = cam.camera_from_world(trailing_pose) * q_world;
    match cam.project_camera_point(&q_cam) {
        Some(px) => Projection::Pixel(px),
        None => Projection::BehindCamera,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center_x(&self) -> f64 {
        (self.x_min + self.x_max) / 2.0
    }

    pub fn csv_header() -> &'static str {
        "x_min,y_min,x_max,y_max"
    }

    pub fn to_csv_row(&self) -> String {
        format!("{},{},{},{}", self.x_min, self.y_min, self.x_max, self.y_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Visibility {
    Visible {
        bbox: BoundingBox,
        /// Some corner was behind the camera or outside the image, so the box
        /// was clipped.
        truncated: bool,
    },
    NotVisible,
}

impl Visibility {
    pub fn bbox(&self) -> Option<BoundingBox> {
        match self {
            Visibility::Visible { bbox, .. } => Some(*bbox),
            Visibility::NotVisible => None,
        }
    }

    pub fn fully_in_frame(&self) -> bool {
        matches!(self, Visibility::Visible { truncated: false, .. })
    }
}

// Near-plane depth for clipping box edges that cross behind the camera.
const NEAR_PLANE: f64 = 1e-3;

/// Axis-aligned image box around the projected corners of the lead
/// vehicle's oriented 3-D box (`dims` = length, width, height, resting on
/// the ground and centered on the lead pose).
pub fn bounding_box_from_pose(
    cam: &CameraModel,
    trailing_pose: &VehicleState,
    lead_pose: &VehicleState,
    dims: (f64, f64, f64),
) -> Visibility {
    let (l, w, h) = dims;
    let cam_from_lead = cam.camera_from_world(trailing_pose) * world_from_body(lead_pose);
    let mut corners = [Point3::origin(); 8];
    for (k, c) in corners.iter_mut().enumerate() {
        let sx = if k & 1 == 0 { -0.5 } else { 0.5 };
        let sy = if k & 2 == 0 { -0.5 } else { 0.5 };
        let z = if k & 4 == 0 { 0.0 } else { h };
        *c = cam_from_lead * Point3::new(sx * l, sy * w, z);
    }

    let mut clipped = corners.iter().any(|c| c.z <= NEAR_PLANE);
    let mut visible: Vec<Point3<f64>> = corners.iter().filter(|c| c.z > NEAR_PLANE).copied().collect();
    if visible.is_empty() {
        return Visibility::NotVisible;
    }
    if clipped {
        // Edges join corners differing in exactly one index bit.
        for a in 0..8 {
            for bit in [1, 2, 4] {
                let b = a ^ bit;
                if a < b {
                    let (pa, pb) = (corners[a], corners[b]);
                    if (pa.z > NEAR_PLANE) != (pb.z > NEAR_PLANE) {
                        let t = (NEAR_PLANE - pa.z) / (pb.z - pa.z);
                        visible.push(pa + (pb - pa) * t);
                    }
                }
            }
        }
    }

    let (mut x_min, mut y_min) = (f64::INFINITY, f64::INFINITY);
    let (mut x_max, mut y_max) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &visible {
        let px = cam.fx * p.x / p.z + cam.cx;
        let py = cam.fy * p.y / p.z + cam.cy;
        x_min = x_min.min(px);
        x_max = x_max.max(px);
        y_min = y_min.min(py);
        y_max = y_max.max(py);
    }
    let (wd, ht) = (cam.width as f64, cam.height as f64);
    if x_max < 0.0 || x_min > wd || y_max < 0.0 || y_min > ht {
        return Visibility::NotVisible;
    }
    if x_min < 0.0 || y_min < 0.0 || x_max > wd || y_max > ht {
        clipped = true;
    }
    Visibility::Visible {
        bbox: BoundingBox {
            x_min: x_min.clamp(0.0, wd),
            y_min: y_min.clamp(0.0, ht),
            x_max: x_max.clamp(0.0, wd),
            y_max: y_max.clamp(0.0, ht),
        },
        truncated: clipped,
    }
}

/// Bearing to the box center as a linear map of its column offset onto the
/// half field of view; positive when the box is left of the image center.
pub fn bearing_from_bbox(bbox: &BoundingBox, cam: &CameraModel) -> f64 {
    let half_width = cam.width as f64 / 2.0;
    (half_width - bbox.center_x()) / half_width * (cam.fov() / 2.0)
}
