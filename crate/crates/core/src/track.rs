//! Closed oval track: a counter-clockwise centerline point cloud and a lane
//! half-width.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use nalgebra::Vector2;

use crate::error::TrackError;
use crate::geometry::{cross, point_segment_distance, Point};

/// Largest allowed distance between consecutive centerline points.
pub const MAX_SPACING: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    centerline: Vec<Point>,
    tangents: Vec<Vector2<f64>>,
    arc_length: Vec<f64>,
    length: f64,
    half_width: f64,
    spacing: f64,
}

/// Result of a nearest-centerline query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralSample {
    pub nn_point: Point,
    pub nn_index: usize,
    /// Positive when the query is left of the direction of travel.
    pub signed_error: f64,
}

impl Track {
    /// Ellipse centered at the origin, traversed counter-clockwise from
    /// `(semi_major, 0)`, resampled at equal arc length no coarser than
    /// `spacing`.
    pub fn build_oval(
        outer_diameter: f64,
        aspect_ratio: f64,
        half_width: f64,
        spacing: f64,
    ) -> Result<Self, TrackError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(TrackError::Degenerate(format!(
                "half_width must be > 0, got {half_width}"
            )));
        }
        if !(outer_diameter.is_finite() && outer_diameter > 4.0 * half_width) {
            return Err(TrackError::Degenerate(format!(
                "outer_diameter {outer_diameter} must exceed 4*half_width = {}",
                4.0 * half_width
            )));
        }
        if !(aspect_ratio > 0.0 && aspect_ratio <= 1.0) {
            return Err(TrackError::Degenerate(format!(
                "aspect_ratio must be in (0, 1], got {aspect_ratio}"
            )));
        }
        if !(spacing > 0.0 && spacing <= MAX_SPACING) {
            return Err(TrackError::Degenerate(format!(
                "spacing must be in (0, {MAX_SPACING}], got {spacing}"
            )));
        }
        let semi_major = outer_diameter / 2.0 - half_width;
        let semi_minor = semi_major * aspect_ratio;
        if semi_minor <= half_width {
            return Err(TrackError::Degenerate(format!(
                "semi-minor axis {semi_minor} m leaves no infield inside a {half_width} m half-width lane"
            )));
        }

        let points = resample_ellipse(semi_major, semi_minor, spacing);
        Self::from_points(points, half_width)
    }

    /// Builds a track from an ordered, counter-clockwise, closed centerline.
    pub fn from_points(centerline: Vec<Point>, half_width: f64) -> Result<Self, TrackError> {
        let n = centerline.len();
        if n < 3 {
            return Err(TrackError::Degenerate(format!(
                "centerline needs at least 3 points, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(TrackError::Degenerate(format!(
                "half_width must be > 0, got {half_width}"
            )));
        }
        let mut arc_length = Vec::with_capacity(n);
        let mut acc = 0.0;
        let mut spacing: f64 = 0.0;
        for i in 0..n {
            arc_length.push(acc);
            let step = (centerline[(i + 1) % n] - centerline[i]).norm();
            if step == 0.0 || !step.is_finite() {
                return Err(TrackError::Degenerate(format!(
                    "centerline points {i} and {} coincide or are not finite",
                    (i + 1) % n
                )));
            }
            spacing = spacing.max(step);
            acc += step;
        }
        if spacing > MAX_SPACING + 1e-9 {
            return Err(TrackError::Degenerate(format!(
                "centerline spacing {spacing:.4} m exceeds {MAX_SPACING} m (loop must also be closed)"
            )));
        }
        let tangents = (0..n)
            .map(|i| {
                let d = centerline[(i + 1) % n] - centerline[(i + n - 1) % n];
                d / d.norm()
            })
            .collect();
        Ok(Self {
            centerline,
            tangents,
            arc_length,
            length: acc,
            half_width,
            spacing,
        })
    }

    pub fn centerline(&self) -> &[Point] {
        &self.centerline
    }

    pub fn len(&self) -> usize {
        self.centerline.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centerline.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Largest gap between consecutive centerline points.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total centerline length [m].
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Unit tangent (direction of travel) at a centerline index.
    pub fn tangent(&self, index: usize) -> Vector2<f64> {
        self.tangents[index % self.len()]
    }

    /// Arc length from point 0 to `index`.
    pub fn arc_length_at(&self, index: usize) -> f64 {
        self.arc_length[index % self.len()]
    }

    /// Point and unit tangent at arc length `s` (wrapped onto the loop),
    /// linearly interpolated between centerline samples.
    pub fn point_at(&self, s: f64) -> (Point, Vector2<f64>) {
        let s = s.rem_euclid(self.length);
        let i = match self
            .arc_length
            .binary_search_by(|probe| probe.total_cmp(&s))
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let j = (i + 1) % self.len();
        let a = self.centerline[i];
        let b = self.centerline[j];
        let seg = b - a;
        let t = (s - self.arc_length[i]) / seg.norm();
        (a + seg * t, seg / seg.norm())
    }

    /// Exhaustive nearest-neighbour query. Ties go to the lowest index.
    pub fn nearest_centerline_point(&self, p: &Point) -> LateralSample {
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (i, c) in self.centerline.iter().enumerate() {
            let d2 = (p - c).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        self.sample_at(p, best)
    }

    /// Nearest-neighbour query that scans `hint ± window` first and falls
    /// back to the exhaustive scan when the minimum sits on the window edge.
    pub fn nearest_near(&self, p: &Point, hint: usize, window: usize) -> LateralSample {
        let n = self.len();
        if 2 * window + 1 >= n {
            return self.nearest_centerline_point(p);
        }
        let mut best_offset = 0;
        let mut best_d2 = f64::INFINITY;
        for offset in 0..=2 * window {
            let i = (hint + n - window + offset) % n;
            let d2 = (p - self.centerline[i]).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                best_offset = offset;
            }
        }
        if best_offset == 0 || best_offset == 2 * window {
            return self.nearest_centerline_point(p);
        }
        self.sample_at(p, (hint + n - window + best_offset) % n)
    }

    /// Walks downhill in point distance from `hint`. Only valid where the
    /// distance along the loop has a single local minimum around the query,
    /// i.e. for points much closer to this part of the track than to any
    /// other part.
    pub fn descend(&self, p: &Point, hint: usize) -> usize {
        let n = self.len();
        let d2 = |i: usize| (p - self.centerline[i]).norm_squared();
        let mut i = hint % n;
        let mut di = d2(i);
        let fwd = d2((i + 1) % n);
        let bwd = d2((i + n - 1) % n);
        let step = if fwd < di {
            1
        } else if bwd < di {
            n - 1
        } else {
            return i;
        };
        loop {
            let j = (i + step) % n;
            let dj = d2(j);
            if dj < di {
                i = j;
                di = dj;
            } else {
                return i;
            }
        }
    }

    /// Distance from `p` to the centerline polyline, searched from `hint`.
    /// Returns the distance and the nearest vertex index.
    pub fn polyline_distance(&self, p: &Point, hint: usize) -> (f64, usize) {
        let n = self.len();
        let i = self.descend(p, hint);
        let c = &self.centerline;
        let d = point_segment_distance(p, &c[(i + n - 1) % n], &c[i])
            .min(point_segment_distance(p, &c[i], &c[(i + 1) % n]));
        (d, i)
    }

    pub fn inside_lane(&self, p: &Point) -> bool {
        self.nearest_centerline_point(p).signed_error.abs() <= self.half_width
    }

    fn sample_at(&self, p: &Point, index: usize) -> LateralSample {
        let nn = self.centerline[index];
        let r = p - nn;
        let dist = r.norm();
        let side = cross(&self.tangents[index], &r);
        LateralSample {
            nn_point: nn,
            nn_index: index,
            signed_error: if side < 0.0 { -dist } else { dist },
        }
    }

    /// Writes the centerline as `x,y` lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for p in &self.centerline {
            writeln!(w, "{},{}", p.x, p.y)?;
        }
        Ok(())
    }

    /// Reads `x,y` lines (blank lines and `#` comments skipped).
    pub fn read_csv<R: BufRead>(r: R, half_width: f64) -> Result<Self, TrackError> {
        let mut points = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let (Some(xs), Some(ys), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(TrackError::Csv {
                    line: lineno + 1,
                    reason: "expected exactly two fields `x,y`".into(),
                });
            };
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| TrackError::Csv {
                    line: lineno + 1,
                    reason: format!("`{s}`: {e}"),
                })
            };
            points.push(Point::new(parse(xs)?, parse(ys)?));
        }
        Self::from_points(points, half_width)
    }
}

/// Equal-arc-length samples of an ellipse, counter-clockwise from `(a, 0)`.
fn resample_ellipse(a: f64, b: f64, spacing: f64) -> Vec<Point> {
    // Dense parametric table, then invert arc length by interpolation.
    let dense = 200_000;
    let param = |k: usize| TAU * k as f64 / dense as f64;
    let at = |t: f64| Point::new(a * t.cos(), b * t.sin());
    let mut cumulative = Vec::with_capacity(dense + 1);
    cumulative.push(0.0);
    let mut prev = at(0.0);
    for k in 1..=dense {
        let p = at(param(k));
        let last = *cumulative.last().unwrap();
        cumulative.push(last + (p - prev).norm());
        prev = p;
    }
    let perimeter = cumulative[dense];
    let count = (perimeter / spacing).ceil() as usize;
    // Chord spacing is slightly below arc spacing, so this stays <= spacing.
    let step = perimeter / count as f64;

    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    for i in 0..count {
        let s = i as f64 * step;
        while cumulative[k + 1] < s {
            k += 1;
        }
        let frac = (s - cumulative[k]) / (cumulative[k + 1] - cumulative[k]);
        let t = param(k) + frac * (param(k + 1) - param(k));
        out.push(at(t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> Track {
        Track::build_oval(30.0, 1.0, 1.5, 0.05).unwrap()
    }

    #[test]
    fn unit_aspect_gives_circle_of_inner_radius() {
        let t = circle();
        for p in t.centerline() {
            assert!((p.coords.norm() - 13.5).abs() < 1e-6);
        }
        assert!(t.len() >= 1696);
        assert!(t.spacing() <= 0.05);
    }

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(Track::build_oval(30.0, 0.0, 1.5, 0.05).is_err());
        assert!(Track::build_oval(30.0, 1.2, 1.5, 0.05).is_err());
        assert!(Track::build_oval(6.0, 1.0, 1.5, 0.05).is_err());
        assert!(Track::build_oval(30.0, 1.0, 0.0, 0.05).is_err());
        assert!(Track::build_oval(30.0, 1.0, 1.5, 0.2).is_err());
    }

    #[test]
    fn travels_counter_clockwise() {
        let t = circle();
        let tan = t.tangent(0);
        // At (r, 0) a CCW loop heads +y.
        assert!(tan.y > 0.999);
    }

    #[test]
    fn signed_error_positive_inside_ccw_loop() {
        let t = circle();
        let inside = t.nearest_centerline_point(&Point::new(0.0, 13.0));
        assert!((inside.signed_error - 0.5).abs() <= t.spacing() / 2.0);
        let outside = t.nearest_centerline_point(&Point::new(0.0, 14.0));
        assert!((outside.signed_error + 0.5).abs() <= t.spacing() / 2.0);
        let on = t.nearest_centerline_point(&t.centerline()[100]);
        assert_eq!(on.signed_error, 0.0);
        assert_eq!(on.nn_index, 100);
    }

    #[test]
    fn lane_membership_is_boundary_inclusive() {
        let t = circle();
        // Query along the ray through a centerline vertex so the distance is exact.
        let dir = t.centerline()[0].coords.normalize();
        let at = |r: f64| Point::from(dir * r);
        assert!(t.inside_lane(&at(13.5)));
        assert!(t.inside_lane(&at(13.5 - 1.5)));
        assert!(t.inside_lane(&at(13.5 + 1.5)));
        assert!(!t.inside_lane(&at(13.5 + 1.6)));
        assert!(!t.inside_lane(&at(13.5 - 1.6)));
    }

    #[test]
    fn windowed_query_agrees_with_full_scan() {
        let t = Track::build_oval(30.0, 0.75, 1.5, 0.05).unwrap();
        for (k, hint) in [(0usize, 5usize), (400, 380), (1200, 30)] {
            let p = t.centerline()[k] + Vector2::new(0.3, -0.2);
            let full = t.nearest_centerline_point(&p);
            let near = t.nearest_near(&p, hint, 40);
            assert_eq!(full.nn_index, near.nn_index);
        }
    }

    #[test]
    fn point_at_wraps_arc_length() {
        let t = circle();
        let (p0, _) = t.point_at(0.0);
        let (p1, _) = t.point_at(t.length());
        assert!((p0 - p1).norm() < 1e-9);
        let (q, tan) = t.point_at(t.length() / 4.0);
        assert!((q - Point::new(0.0, 13.5)).norm() < 1e-3);
        assert!(tan.x < -0.999);
    }

    #[test]
    fn csv_round_trip_preserves_points() {
        let t = Track::build_oval(30.0, 0.75, 1.5, 0.05).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Track::read_csv(buf.as_slice(), 1.5).unwrap();
        assert_eq!(back.len(), t.len());
        for (a, b) in back.centerline().iter().zip(t.centerline()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn csv_reports_bad_lines() {
        let err = Track::read_csv("1,2\nfoo,3\n".as_bytes(), 1.5).unwrap_err();
        assert!(matches!(err, TrackError::Csv { line: 2, .. }));
    }
}
