//! Top-down lane cost map: the ego vehicle sits at the bottom-center pixel
//! facing up the image, and cost grows quadratically with distance from the
//! lane centerline.

use std::io::Write;

use crate::error::PerceptionError;
use crate::geometry::{heading_vector, Point};
use crate::track::Track;
use crate::vehicle::VehicleState;

use super::FeatureAngles;

pub const DEFAULT_WIDTH: usize = 160;
pub const DEFAULT_HEIGHT: usize = 128;
pub const DEFAULT_PX_PER_M: f64 = 15.0;

/// Rows above the bottom row used for the near point (1 m at 15 px/m).
pub const NEAR_ROWS: usize = 15;
/// Rows above the bottom row used for the far point (3 m at 15 px/m).
pub const FAR_ROWS: usize = 45;

#[derive(Debug, Clone, PartialEq)]
pub struct CostMapGrid {
    width: usize,
    height: usize,
    px_per_m: f64,
    /// Row-major, row 0 at the top of the image.
    values: Vec<f64>,
}

impl CostMapGrid {
    /// Grid of the given size filled with `fill`.
    pub fn filled(width: usize, height: usize, px_per_m: f64, fill: f64) -> Self {
        Self {
            width,
            height,
            px_per_m,
            values: vec![fill; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn px_per_m(&self) -> f64 {
        self.px_per_m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.width + col] = value.clamp(0.0, 1.0);
    }

    /// Row counted from the bottom (the ego row is 0).
    pub fn row_from_bottom(&self, rows_up: usize) -> &[f64] {
        let row = self.height - 1 - rows_up;
        &self.values[row * self.width..(row + 1) * self.width]
    }

    /// Column of the ego vehicle.
    pub fn center_col(&self) -> usize {
        self.width / 2
    }

    /// Body-frame `(forward, left)` offset of a pixel center in meters.
    pub fn pixel_to_body(&self, row: usize, col: usize) -> (f64, f64) {
        let rows_up = (self.height - 1 - row) as f64;
        let cols_left = self.center_col() as f64 - col as f64;
        (rows_up / self.px_per_m, cols_left / self.px_per_m)
    }

    /// Binary 8-bit PGM (P5), row 0 first, cost 1.0 rendered white.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .values
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        w.write_all(&bytes)
    }
}

/// Cost of a point `distance` meters from the centerline.
pub fn lane_cost(distance: f64, half_width: f64) -> f64 {
    (distance / half_width).powi(2).min(1.0)
}

/// Renders the exact-geometry cost map for `pose`:
/// `cost = min((d / half_width)^2, 1)` with `d` the distance from the
/// pixel's world point to the centerline polyline.
pub fn render_cost_map(track: &Track, pose: &VehicleState) -> CostMapGrid {
    render_cost_map_sized(track, pose, DEFAULT_WIDTH, DEFAULT_HEIGHT, DEFAULT_PX_PER_M)
}

pub fn render_cost_map_sized(
    track: &Track,
    pose: &VehicleState,
    width: usize,
    height: usize,
    px_per_m: f64,
) -> CostMapGrid {
    let mut grid = CostMapGrid::filled(width, height, px_per_m, 1.0);
    let origin = pose.position();
    let forward = heading_vector(pose.psi);
    let left = nalgebra::Vector2::new(-forward.y, forward.x);
    let hw = track.half_width();
    let world = |grid: &CostMapGrid, row: usize, col: usize| -> Point {
        let (f, l) = grid.pixel_to_body(row, col);
        origin + forward * f + left * l
    };

    // Each pixel's nearest vertex is found by descending from its neighbour's,
    // starting every row at the center column and sweeping outward.
    let mut row_hint = track.nearest_centerline_point(&origin).nn_index;
    let center = grid.center_col();
    for row in (0..height).rev() {
        let (d, idx) = track.polyline_distance(&world(&grid, row, center), row_hint);
        row_hint = idx;
        grid.values[row * width + center] = lane_cost(d, hw);
        for cols in [
            Box::new((0..center).rev()) as Box<dyn Iterator<Item = usize>>,
            Box::new(center + 1..width),
        ] {
            let mut hint = row_hint;
            for col in cols {
                let (d, idx) = track.polyline_distance(&world(&grid, row, col), hint);
                hint = idx;
                grid.values[row * width + col] = lane_cost(d, hw);
            }
        }
    }
    grid
}

/// Column of minimum cost in a row. Ties go to the column nearest the image
/// center, then to the lower index. `None` when the whole row is at max cost.
fn row_argmin(row: &[f64], center: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (col, &v) in row.iter().enumerate() {
        best = match best {
            None => Some((col, v)),
            Some((bc, bv)) => {
                let closer = col.abs_diff(center) < bc.abs_diff(center);
                if v < bv || (v == bv && closer) {
                    Some((col, v))
                } else {
                    Some((bc, bv))
                }
            }
        };
    }
    best.filter(|&(_, v)| v < 1.0).map(|(c, _)| c)
}

/// Reads the near and far angles from a cost map: the minimum-cost column
/// `col` at `rows` above the bottom gives `atan((W/2 - col) / rows)`.
pub fn costmap_angles(
    grid: &CostMapGrid,
    near_rows: usize,
    far_rows: usize,
) -> Result<FeatureAngles, PerceptionError> {
    let angle = |rows_up: usize| -> Result<f64, PerceptionError> {
        if rows_up == 0 || rows_up >= grid.height() {
            return Err(PerceptionError::RowOutOfRange {
                row_from_bottom: rows_up,
                height: grid.height(),
            });
        }
        let col = row_argmin(grid.row_from_bottom(rows_up), grid.center_col()).ok_or(
            PerceptionError::NoLaneInRow {
                row_from_bottom: rows_up,
            },
        )?;
        let lateral_px = grid.width() as f64 / 2.0 - col as f64;
        Ok((lateral_px / rows_up as f64).atan())
    };
    Ok(FeatureAngles {
        theta_near: angle(near_rows)?,
        theta_far: angle(far_rows)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn grid_with_min(near_col: usize, far_col: usize) -> CostMapGrid {
        let mut g = CostMapGrid::filled(160, 128, 15.0, 1.0);
        for (rows_up, col) in [(NEAR_ROWS, near_col), (FAR_ROWS, far_col)] {
            let row = 127 - rows_up;
            for c in 0..160usize {
                let d = c.abs_diff(col) as f64 / 30.0;
                g.set(row, c, (d * d).min(1.0));
            }
        }
        g
    }

    #[test]
    fn centered_minimum_gives_zero() {
        let a = costmap_angles(&grid_with_min(80, 80), NEAR_ROWS, FAR_ROWS).unwrap();
        assert_eq!(a.theta_near, 0.0);
        assert_eq!(a.theta_far, 0.0);
    }

    #[test]
    fn forty_five_degree_points() {
        let a = costmap_angles(&grid_with_min(65, 35), NEAR_ROWS, FAR_ROWS).unwrap();
        assert!((a.theta_near - FRAC_PI_4).abs() < 1e-15);
        assert!((a.theta_far - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn right_of_center_is_negative() {
        let a = costmap_angles(&grid_with_min(95, 125), NEAR_ROWS, FAR_ROWS).unwrap();
        assert!((a.theta_near + FRAC_PI_4).abs() < 1e-15);
        assert!((a.theta_far + FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn empty_row_is_extraction_failure() {
        let g = CostMapGrid::filled(160, 128, 15.0, 1.0);
        assert_eq!(
            costmap_angles(&g, NEAR_ROWS, FAR_ROWS),
            Err(PerceptionError::NoLaneInRow {
                row_from_bottom: NEAR_ROWS
            })
        );
        assert!(matches!(
            costmap_angles(&grid_with_min(80, 80), NEAR_ROWS, 200),
            Err(PerceptionError::RowOutOfRange { .. })
        ));
    }

    #[test]
    fn argmin_ties_prefer_center_then_lower_index() {
        let mut row = vec![1.0; 160];
        row[70] = 0.0;
        row[90] = 0.0;
        assert_eq!(row_argmin(&row, 80), Some(70));
        row[85] = 0.0;
        assert_eq!(row_argmin(&row, 80), Some(85));
        assert_eq!(row_argmin(&[1.0; 4], 2), None);
    }

    #[test]
    fn cost_formula_boundaries() {
        assert_eq!(lane_cost(0.0, 1.5), 0.0);
        assert_eq!(lane_cost(1.5, 1.5), 1.0);
        assert_eq!(lane_cost(0.75, 1.5), 0.25);
        assert_eq!(lane_cost(4.0, 1.5), 1.0);
    }

    #[test]
    fn rendered_costs_follow_quadratic_profile() {
        let track = Track::build_oval(30.0, 1.0, 1.5, 0.05).unwrap();
        let (p, tan) = track.point_at(0.0);
        let pose = VehicleState::new(p.x, p.y, tan.y.atan2(tan.x), 4.0);
        let g = render_cost_map(&track, &pose);
        assert_eq!((g.width(), g.height()), (160, 128));
        assert!(g.get(127, 80) < 1e-9);
        assert!(g.values().iter().all(|v| (0.0..=1.0).contains(v)));

        // Ego row: world points lie on the radial line, so d is the column
        // offset in meters exactly (up to chord sag of the polyline).
        let sag = 0.05f64.powi(2) / (8.0 * 13.5);
        for (col, d) in [(80 - 11, 11.0 / 15.0), (80 + 15, 1.0), (80 - 30, 2.0)] {
            let expect = lane_cost(d, 1.5);
            let tol = 2.0 * sag / 1.5;
            assert!((g.get(127, col) - expect).abs() < tol, "col {col}: {} vs {expect}", g.get(127, col));
        }
    }

    #[test]
    fn pgm_header_and_size() {
        let g = CostMapGrid::filled(160, 128, 15.0, 0.5);
        let mut buf = Vec::new();
        g.write_pgm(&mut buf).unwrap();
        let header = b"P5\n160 128\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 160 * 128);
        assert_eq!(buf[header.len()], 128);
    }
}
