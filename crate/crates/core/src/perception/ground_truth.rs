use crate::error::PerceptionError;
use crate::geometry::{heading_vector, wrap_angle};
use crate::track::Track;
use crate::vehicle::VehicleState;

use super::FeatureAngles;

/// Near probe distance along the heading axis [m].
pub const NEAR_DISTANCE: f64 = 1.0;
/// Far probe distance along the heading axis [m].
pub const FAR_DISTANCE: f64 = 3.0;

/// Angles from the vehicle pose and the recorded centerline.
///
/// For each probe distance a point is placed that far ahead on the heading
/// axis, its nearest centerline neighbour is found, and the angle is the
/// body-frame bearing from the vehicle to that neighbour.
pub fn ground_truth_angles(
    track: &Track,
    pose: &VehicleState,
    near: f64,
    far: f64,
) -> Result<FeatureAngles, PerceptionError> {
    if !(near > 0.0 && far > near) {
        return Err(PerceptionError::InvalidProbe { near, far });
    }
    let here = track.nearest_centerline_point(&pose.position());
    let limit = 2.0 * track.half_width();
    if here.signed_error.abs() > limit {
        return Err(PerceptionError::OffTrack {
            lateral_error: here.signed_error,
            limit,
        });
    }

    let origin = pose.position();
    let heading = heading_vector(pose.psi);
    let bearing = |distance: f64| {
        let probe = origin + heading * distance;
        let nn = track.nearest_near(&probe, here.nn_index, window(track, distance)).nn_point;
        wrap_angle((nn.y - origin.y).atan2(nn.x - origin.x) - pose.psi)
    };
    Ok(FeatureAngles {
        theta_near: bearing(near),
        theta_far: bearing(far),
    })
}

// Index window wide enough to cover the probe distance plus the lane.
fn window(track: &Track, distance: f64) -> usize {
    (((distance + 4.0 * track.half_width()) / track.spacing()).ceil() as usize).max(8)
}
