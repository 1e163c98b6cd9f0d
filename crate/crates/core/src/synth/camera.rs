use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole camera without roll plus single-coefficient radial distortion.
/// World frame: pitch on `z = 0`, `x` along the length, `y` across, `z` up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Camera {
    /// Optical center in meters.
    pub position: [f64; 3],
    /// Heading of the optical axis around `z` (radians, 0 = +x).
    pub pan: f64,
    /// Downward inclination of the optical axis (radians).
    pub tilt: f64,
    /// Focal length in pixels.
    pub focal: f64,
    /// Radial coefficient on normalized coordinates: `x_d = x (1 + k1 r²)`.
    pub k1: f64,
    pub width: usize,
    pub height: usize,
}

/// Points closer than this to the image plane are treated as behind the camera.
const NEAR: f64 = 0.5;

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Camera {
    /// Camera at `position` aimed at `target`.
    pub fn looking_at(position: [f64; 3], target: [f64; 3], focal: f64, k1: f64, width: usize, height: usize) -> Result<Self> {
        let d = [target[0] - position[0], target[1] - position[1], target[2] - position[2]];
        let horiz = d[0].hypot(d[1]);
        if horiz <= 1e-9 {
            return Err(Error::Camera("optical axis must not be vertical".into()));
        }
        let cam = Self {
            position,
            pan: d[1].atan2(d[0]),
            tilt: (-d[2]).atan2(horiz),
            focal,
            k1,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal > 0.0) || self.width == 0 || self.height == 0 {
            return Err(Error::Camera("focal length and image size must be positive".into()));
        }
        if !(self.tilt.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Camera("tilt must be within (-90°, 90°)".into()));
        }
        if self.position[2] <= 0.0 {
            return Err(Error::Camera("camera must be above the pitch".into()));
        }
        Ok(())
    }

    /// Forward, right and down unit vectors.
    pub fn axes(&self) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let (st, ct) = self.tilt.sin_cos();
        let (sp, cp) = self.pan.sin_cos();
        let forward = [ct * cp, ct * sp, -st];
        let right = [sp, -cp, 0.0];
        let down = cross(forward, right);
        (forward, right, down)
    }

    fn principal(&self) -> (f64, f64) {
        ((self.height as f64 - 1.0) / 2.0, (self.width as f64 - 1.0) / 2.0)
    }

    /// Depth of a world point along the optical axis.
    pub fn depth(&self, p: [f64; 3]) -> f64 {
        let (f, _, _) = self.axes();
        dot(f, [p[0] - self.position[0], p[1] - self.position[1], p[2] - self.position[2]])
    }

    /// Distorted image position `(row, col)` of a world point, if in front.
    pub fn project(&self, p: [f64; 3]) -> Option<(f64, f64)> {
        let (f, r, d) = self.axes();
        let v = [p[0] - self.position[0], p[1] - self.position[1], p[2] - self.position[2]];
        let z = dot(f, v);
        if z < NEAR {
            return None;
        }
        let (xn, yn) = (dot(r, v) / z, dot(d, v) / z);
        let r2 = xn * xn + yn * yn;
        // Beyond this radius barrel distortion folds back into the frame.
        if self.k1 < 0.0 && r2 >= -1.0 / (3.0 * self.k1) {
            return None;
        }
        let s = 1.0 + self.k1 * r2;
        let (cr, cc) = self.principal();
        Some((cr + self.focal * yn * s, cc + self.focal * xn * s))
    }

    /// Ground-plane point `(x, y)` seen at pixel `(row, col)`, if the ray hits it.
    pub fn ground_point(&self, row: f64, col: f64) -> Option<(f64, f64)> {
        let (cr, cc) = self.principal();
        let (xd, yd) = ((col - cc) / self.focal, (row - cr) / self.focal);
        // Invert the radial model by fixed-point iteration.
        let (mut xn, mut yn) = (xd, yd);
        for _ in 0..30 {
            let s = 1.0 + self.k1 * (xn * xn + yn * yn);
            if s <= 0.1 {
                return None;
            }
            xn = xd / s;
            yn = yd / s;
        }
        let (f, r, d) = self.axes();
        let ray = [
            f[0] + xn * r[0] + yn * d[0],
            f[1] + xn * r[1] + yn * d[1],
            f[2] + xn * r[2] + yn * d[2],
        ];
        if ray[2] >= -1e-9 {
            return None;
        }
        let t = -self.position[2] / ray[2];
        Some((self.position[0] + t * ray[0], self.position[1] + t * ray[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam(k1: f64) -> Camera {
        Camera::looking_at([0.0, -60.0, 18.0], [0.0, 0.0, 0.0], 400.0, k1, 480, 270).unwrap()
    }

    #[test]
    fn target_projects_to_center() {
        let c = cam(0.0);
        let (r, col) = c.project([0.0, 0.0, 0.0]).unwrap();
        assert!((r - 134.5).abs() < 1e-9 && (col - 239.5).abs() < 1e-9);
        let (_, right, _) = c.axes();
        assert!(right[2].abs() < 1e-15, "no roll");
    }

    #[test]
    fn ground_point_inverts_projection() {
        for k1 in [0.0, -0.12] {
            let c = cam(k1);
            for p in [[10.0, 5.0], [-30.0, 20.0], [0.0, -30.0]] {
                let (r, col) = c.project([p[0], p[1], 0.0]).unwrap();
                let (x, y) = c.ground_point(r, col).unwrap();
                assert!((x - p[0]).abs() < 1e-6 && (y - p[1]).abs() < 1e-6, "{k1} {p:?} {x} {y}");
            }
        }
    }

    #[test]
    fn behind_and_sky() {
        let c = cam(0.0);
        assert!(c.project([0.0, -80.0, 0.0]).is_none());
        assert!(c.ground_point(0.0, 240.0).is_none() || c.ground_point(0.0, 240.0).unwrap().1 > 0.0);
        assert!(Camera::looking_at([0.0, 0.0, 10.0], [0.0, 0.0, 0.0], 400.0, 0.0, 10, 10).is_err());
    }

    #[test]
    fn points_past_the_distortion_fold_are_rejected() {
        let c = cam(-0.12);
        // Far off-axis point: normalized radius well beyond 1/sqrt(3 |k1|).
        assert!(c.project([300.0, -50.0, 0.0]).is_none());
        assert!(cam(0.0).project([300.0, -50.0, 0.0]).is_some());
    }

    #[test]
    fn straight_lines_bend_with_distortion() {
        let straight = cam(0.0);
        let bent = cam(-0.12);
        let line = |c: &Camera| -> Vec<(f64, f64)> {
            (0..=20).filter_map(|i| c.project([-40.0 + 4.0 * i as f64, 30.0, 0.0])).collect()
        };
        let dev = |pts: &[(f64, f64)]| {
            let (a, b) = (pts[0], *pts.last().unwrap());
            pts.iter()
                .map(|p| ((p.0 - a.0) * (b.1 - a.1) - (p.1 - a.1) * (b.0 - a.0)).abs() / (b.0 - a.0).hypot(b.1 - a.1))
                .fold(0.0, f64::max)
        };
        assert!(dev(&line(&straight)) < 1e-9);
        assert!(dev(&line(&bent)) > 0.5);
    }
}
