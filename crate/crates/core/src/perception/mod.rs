//! Feature-input extraction: the near/far visual angles fed to the driver
//! model, from three sources.
//!
//! * [`ground_truth_angles`]: pose plus the known centerline.
//! * [`render_cost_map`] + [`costmap_angles`]: a synthetic top-down lane
//!   cost map, read row by row.
//! * [`bounding_box_from_pose`] + [`bearing_from_bbox`]: a lead vehicle's
//!   projected bounding box in the forward camera.
//!
//! All angles are CCW-positive: a point left of the heading gives a positive
//! angle.

mod camera;
mod costmap;
mod ground_truth;

pub use camera::{
    bearing_from_bbox, bounding_box_from_pose, project_world_point, BoundingBox, CameraModel,
    Projection, Visibility, DEFAULT_FOV_DEG, DEFAULT_IMAGE_SIZE, DEFAULT_MOUNT_HEIGHT,
};
pub use costmap::{
    costmap_angles, lane_cost, render_cost_map, render_cost_map_sized, CostMapGrid, FAR_ROWS,
    NEAR_ROWS,
};
pub use ground_truth::{ground_truth_angles, FAR_DISTANCE, NEAR_DISTANCE};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureAngles {
    pub theta_near: f64,
    pub theta_far: f64,
}
