//! Orthogonal (equal-variance Deming) line regression and direct
//! least-squares ellipse fitting.
//!
//! Points are `(row, col)` pairs. Ellipses are expressed in image `(x, y) =
//! (col, row)` coordinates as the conic `A x² + B xy + C y² + D x + E y + F = 0`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Line `{p : normal · p = offset}` with `p = (row, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StraightLine {
    /// Unit normal `(n_row, n_col)`.
    pub normal: [f64; 2],
    /// Signed distance from the origin along `normal`, canonicalized `>= 0`.
    pub offset: f64,
    /// Root-mean-square orthogonal distance of the fitted points, in pixels.
    pub rmse: f64,
}

impl StraightLine {
    pub fn from_normal_offset(normal: [f64; 2], offset: f64) -> Self {
        let n = normal[0].hypot(normal[1]);
        let (mut nr, mut nc, mut d) = (normal[0] / n, normal[1] / n, offset / n);
        if d < 0.0 || (d == 0.0 && (nr < 0.0 || (nr == 0.0 && nc < 0.0))) {
            nr = -nr;
            nc = -nc;
            d = -d;
        }
        Self {
            normal: [nr + 0.0, nc + 0.0],
            offset: d + 0.0,
            rmse: 0.0,
        }
    }

    /// Signed distance of `(row, col)` from the line.
    pub fn signed_distance(&self, row: f64, col: f64) -> f64 {
        self.normal[0] * row + self.normal[1] * col - self.offset
    }

    pub fn distance(&self, row: f64, col: f64) -> f64 {
        self.signed_distance(row, col).abs()
    }

    /// Unit direction along the line, `(d_row, d_col)`.
    pub fn direction(&self) -> [f64; 2] {
        [-self.normal[1], self.normal[0]]
    }

    /// Root-mean-square distance of `points` to this line.
    pub fn rmse_of(&self, points: &[(f64, f64)]) -> f64 {
        rms(points.iter().map(|&(r, c)| self.distance(r, c)))
    }

    /// Extent of `points` projected on the line, as two points on it.
    pub fn endpoints(&self, points: &[(f64, f64)]) -> Option<[(f64, f64); 2]> {
        let dir = self.direction();
        let foot = (self.normal[0] * self.offset, self.normal[1] * self.offset);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(r, c) in points {
            let t = dir[0] * r + dir[1] * c;
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() {
            return None;
        }
        let at = |t: f64| (foot.0 + dir[0] * t, foot.1 + dir[1] * t);
        Some([at(lo), at(hi)])
    }
}

pub(crate) fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v * v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// First and second moments of a point set; additive, so unions of regions
/// can be scored without touching their pixels.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: f64,
    pub sr: f64,
    pub sc: f64,
    pub srr: f64,
    pub scc: f64,
    pub src: f64,
}

impl Moments {
    pub fn of(points: &[(f64, f64)]) -> Self {
        let mut m = Moments::default();
        for &(r, c) in points {
            m.n += 1.0;
            m.sr += r;
            m.sc += c;
            m.srr += r * r;
            m.scc += c * c;
            m.src += r * c;
        }
        m
    }

    pub fn merged(&self, other: &Moments) -> Moments {
        Moments {
            n: self.n + other.n,
            sr: self.sr + other.sr,
            sc: self.sc + other.sc,
            srr: self.srr + other.srr,
            scc: self.scc + other.scc,
            src: self.src + other.src,
        }
    }

    /// Total-least-squares line of the moments.
    pub fn line(&self) -> Result<StraightLine> {
        if self.n < 2.0 {
            return Err(Error::NoFit("line fit needs at least 2 points"));
        }
        let mr = self.sr / self.n;
        let mc = self.sc / self.n;
        let vrr = (self.srr / self.n - mr * mr).max(0.0);
        let vcc = (self.scc / self.n - mc * mc).max(0.0);
        let vrc = self.src / self.n - mr * mc;
        line_from_covariance(mr, mc, vrr, vcc, vrc)
    }
}

fn line_from_covariance(mr: f64, mc: f64, vrr: f64, vcc: f64, vrc: f64) -> Result<StraightLine> {
    let trace = vrr + vcc;
    if trace <= 1e-18 * (1.0 + mr * mr + mc * mc) {
        return Err(Error::NoFit("all points coincide"));
    }
    // Principal (largest-variance) direction in (row, col), normal is perpendicular.
    let phi = 0.5 * (2.0 * vrc).atan2(vrr - vcc);
    let normal = [-phi.sin(), phi.cos()];
    let disc = ((vrr - vcc) * (vrr - vcc) / 4.0 + vrc * vrc).sqrt();
    let lambda_min = (trace / 2.0 - disc).max(0.0);
    let mut line = StraightLine::from_normal_offset(normal, normal[0] * mr + normal[1] * mc);
    line.rmse = lambda_min.sqrt();
    Ok(line)
}

/// Deming regression with equal error variances, i.e. the orthogonal
/// (total least squares) line through the centroid.
pub fn fit_line(points: &[(f64, f64)]) -> Result<StraightLine> {
    if points.len() < 2 {
        return Err(Error::NoFit("line fit needs at least 2 points"));
    }
    let n = points.len() as f64;
    let mr = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mc = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut vrr, mut vcc, mut vrc) = (0.0, 0.0, 0.0);
    for &(r, c) in points {
        let (dr, dc) = (r - mr, c - mc);
        vrr += dr * dr;
        vcc += dc * dc;
        vrc += dr * dc;
    }
    let mut line = line_from_covariance(mr, mc, vrr / n, vcc / n, vrc / n)?;
    line.rmse = line.rmse_of(points);
    Ok(line)
}

/// Conic-based ellipse with derived geometric parameters, in `(x, y) = (col, row)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    /// `(A, B, C, D, E, F)` with unit Euclidean norm and `A + C > 0`.
    pub conic: [f64; 6],
    /// Center `(x0, y0)`.
    pub center: [f64; 2],
    /// Semi-axes `(a, b)`, `a >= b > 0`.
    pub axes: [f64; 2],
    /// Orientation of the major axis in `[0, pi)`, measured from +x towards +y.
    pub theta: f64,
    /// Root-mean-square Sampson distance of the fitted points, in pixels.
    pub rmse: f64,
}

impl Ellipse {
    /// Builds an ellipse from conic coefficients; fails unless the conic is a
    /// real, non-degenerate ellipse.
    pub fn from_conic(conic: [f64; 6]) -> Result<Self> {
        let norm = conic.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NoFit("zero conic"));
        }
        let mut k = conic.map(|v| v / norm);
        if k[0] + k[2] < 0.0 {
            k = k.map(|v| -v);
        }
        let [a, b, c, d, e, f] = k;
        let det = 4.0 * a * c - b * b;
        if !(det > 0.0) {
            return Err(Error::NoFit("conic is not an ellipse"));
        }
        let x0 = (b * e - 2.0 * c * d) / det;
        let y0 = (b * d - 2.0 * a * e) / det;
        let f0 = a * x0 * x0 + b * x0 * y0 + c * y0 * y0 + d * x0 + e * y0 + f;
        let mean = (a + c) / 2.0;
        let half = (((a - c) / 2.0).powi(2) + (b / 2.0).powi(2)).sqrt();
        let (l_small, l_large) = (mean - half, mean + half);
        if !(f0 < 0.0) || !(l_small > 0.0) {
            return Err(Error::NoFit("imaginary ellipse"));
        }
        let major = (-f0 / l_small).sqrt();
        let minor = (-f0 / l_large).sqrt();
        let theta = if half <= 1e-14 * mean {
            0.0
        } else {
            (0.5 * b.atan2(a - c) + std::f64::consts::FRAC_PI_2).rem_euclid(std::f64::consts::PI)
        };
        Ok(Self {
            conic: k,
            center: [x0, y0],
            axes: [major, minor],
            theta: if theta >= std::f64::consts::PI { 0.0 } else { theta },
            rmse: 0.0,
        })
    }

    /// Conic from geometric parameters.
    pub fn from_geometry(center: [f64; 2], axes: [f64; 2], theta: f64) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        let (a2, b2) = (axes[0] * axes[0], axes[1] * axes[1]);
        let qa = c * c / a2 + s * s / b2;
        let qb = 2.0 * c * s * (1.0 / a2 - 1.0 / b2);
        let qc = s * s / a2 + c * c / b2;
        let [x0, y0] = center;
        let qd = -2.0 * qa * x0 - qb * y0;
        let qe = -qb * x0 - 2.0 * qc * y0;
        let qf = qa * x0 * x0 + qb * x0 * y0 + qc * y0 * y0 - 1.0;
        Self::from_conic([qa, qb, qc, qd, qe, qf])
    }

    /// Point on the ellipse at parameter `t`, as `(row, col)`.
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let (u, v) = (self.axes[0] * t.cos(), self.axes[1] * t.sin());
        let x = self.center[0] + u * c - v * s;
        let y = self.center[1] + u * s + v * c;
        (y, x)
    }

    /// Algebraic value of the conic at `(row, col)`.
    pub fn algebraic(&self, row: f64, col: f64) -> f64 {
        let [a, b, c, d, e, f] = self.conic;
        let (x, y) = (col, row);
        a * x * x + b * x * y + c * y * y + d * x + e * y + f
    }

    /// Sampson distance: algebraic residual over gradient norm.
    pub fn distance(&self, row: f64, col: f64) -> f64 {
        let [a, b, c, d, e, _] = self.conic;
        let (x, y) = (col, row);
        let gx = 2.0 * a * x + b * y + d;
        let gy = b * x + 2.0 * c * y + e;
        let g = gx.hypot(gy);
        let q = self.algebraic(row, col).abs();
        if g <= f64::MIN_POSITIVE {
            return if q == 0.0 { 0.0 } else { f64::INFINITY };
        }
        q / g
    }

    pub fn rmse_of(&self, points: &[(f64, f64)]) -> f64 {
        rms(points.iter().map(|&(r, c)| self.distance(r, c)))
    }
}

/// Direct least-squares ellipse fit with the ellipse-specific constraint
/// `4AC - B² = 1`, solved through the reduced 3x3 eigenproblem on centered
/// and scaled coordinates.
pub fn fit_ellipse(points: &[(f64, f64)]) -> Result<Ellipse> {
    if points.len() < 6 {
        return Err(Error::NoFit("ellipse fit needs at least 6 points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.1).sum::<f64>() / n;
    let my = points.iter().map(|p| p.0).sum::<f64>() / n;
    let spread = (points
        .iter()
        .map(|p| (p.1 - mx).powi(2) + (p.0 - my).powi(2))
        .sum::<f64>()
        / (2.0 * n))
        .sqrt();
    if !(spread > 0.0) {
        return Err(Error::NoFit("all points coincide"));
    }

    // Scatter blocks: quadratic terms [x², xy, y²] and linear terms [x, y, 1].
    let mut s1 = Matrix3::<f64>::zeros();
    let mut s2 = Matrix3::<f64>::zeros();
    let mut s3 = Matrix3::<f64>::zeros();
    for &(row, col) in points {
        let x = (col - mx) / spread;
        let y = (row - my) / spread;
        let q = Vector3::new(x * x, x * y, y * y);
        let l = Vector3::new(x, y, 1.0);
        s1 += q * q.transpose();
        s2 += q * l.transpose();
        s3 += l * l.transpose();
    }
    let s3_inv = s3
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or(Error::NoFit("degenerate scatter (collinear points)"))?;
    // Condition check: collinear points make s3 numerically singular.
    let s3_scale = s3.abs().max();
    if s3.determinant().abs() <= 1e-12 * s3_scale.powi(3) {
        return Err(Error::NoFit("degenerate scatter (collinear points)"));
    }
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;
    // Premultiply by the inverse of the 3x3 constraint block [[0,0,2],[0,-1,0],[2,0,0]].
    let reduced = Matrix3::from_rows(&[
        (m.row(2) / 2.0).into_owned(),
        (-m.row(1)).into_owned(),
        (m.row(0) / 2.0).into_owned(),
    ]);

    let mut best: Option<(f64, Vector3<f64>)> = None;
    let eig = reduced.complex_eigenvalues();
    let scale = reduced.abs().max().max(f64::MIN_POSITIVE);
    for lambda in eig.iter() {
        if lambda.im.abs() > 1e-9 * scale {
            continue;
        }
        let Some(v) = null_vector(&(reduced - Matrix3::identity() * lambda.re)) else {
            continue;
        };
        let cond = 4.0 * v[0] * v[2] - v[1] * v[1];
        if cond <= 0.0 {
            continue;
        }
        // Algebraic cost normalized by the constraint.
        let cost = (v.transpose() * m * v)[0] / cond;
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, v));
        }
    }
    let (_, a1) = best.ok_or(Error::NoFit("no eigenvector satisfies the ellipse constraint"))?;
    let a2 = t * a1;
    let (a, b, c, d, e, f) = (a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]);

    // Undo x = (X - mx) / s, y = (Y - my) / s.
    let s = spread;
    let s2 = s * s;
    let big_a = a / s2;
    let big_b = b / s2;
    let big_c = c / s2;
    let big_d = (-2.0 * a * mx - b * my) / s2 + d / s;
    let big_e = (-2.0 * c * my - b * mx) / s2 + e / s;
    let big_f = (a * mx * mx + b * mx * my + c * my * my) / s2 - (d * mx + e * my) / s + f;
    let mut ellipse = Ellipse::from_conic([big_a, big_b, big_c, big_d, big_e, big_f])?;
    ellipse.rmse = ellipse.rmse_of(points);
    if !ellipse.rmse.is_finite() {
        return Err(Error::NoFit("non-finite ellipse residual"));
    }
    Ok(ellipse)
}

/// Null vector of a rank-2 3x3 matrix via the best-conditioned row cross product.
fn null_vector(m: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let rows = [
        m.row(0).transpose(),
        m.row(1).transpose(),
        m.row(2).transpose(),
    ];
    let candidates = [
        rows[0].cross(&rows[1]),
        rows[0].cross(&rows[2]),
        rows[1].cross(&rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))?;
    let norm = best.norm();
    (norm > 0.0 && norm.is_finite()).then(|| best / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Orthogonal RMS minimized by scanning normal angles on a fine grid.
    fn brute_force_line(points: &[(f64, f64)], steps: usize) -> (f64, f64) {
        let n = points.len() as f64;
        let mr = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mc = points.iter().map(|p| p.1).sum::<f64>() / n;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..steps {
            let a = PI * i as f64 / steps as f64;
            let (s, c) = a.sin_cos();
            let e = points
                .iter()
                .map(|p| ((p.0 - mr) * c + (p.1 - mc) * s).powi(2))
                .sum::<f64>()
                / n;
            if e < best.0 {
                best = (e, a);
            }
        }
        (best.0.sqrt(), best.1)
    }

    fn normal_angle(l: &StraightLine) -> f64 {
        l.normal[1].atan2(l.normal[0]).rem_euclid(PI)
    }

    fn angle_diff(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(PI);
        d.min(PI - d)
    }

    #[test]
    fn horizontal_points() {
        let l = fit_line(&[(3.0, 0.0), (3.0, 5.0), (3.0, 9.0)]).unwrap();
        assert!((l.normal[0] - 1.0).abs() < 1e-12 && l.normal[1].abs() < 1e-12);
        assert!((l.offset - 3.0).abs() < 1e-12);
        assert!(l.rmse < 1e-12);
        let v = fit_line(&[(0.0, 4.0), (7.0, 4.0)]).unwrap();
        assert!((v.normal[1] - 1.0).abs() < 1e-12 && (v.offset - 4.0).abs() < 1e-12);
    }

    #[test]
    fn identical_points_fail() {
        assert!(fit_line(&[(1.0, 1.0); 5]).is_err());
        assert!(fit_line(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn diagonal_with_symmetric_jitter() {
        let eps = 0.3;
        // Every point of y = x shifted perpendicularly by +eps and by -eps.
        let pts: Vec<_> = (0..200)
            .flat_map(|i| {
                let t = i as f64;
                [eps, -eps].map(|s| (t + s / 2f64.sqrt(), t - s / 2f64.sqrt()))
            })
            .collect();
        let l = fit_line(&pts).unwrap();
        let (brute_rmse, brute_angle) = brute_force_line(&pts, 1_000_000);
        assert!(angle_diff(normal_angle(&l), brute_angle) < 1e-5);
        assert!((l.rmse - brute_rmse).abs() < 1e-6);
        assert!((l.rmse - eps).abs() < 1e-9);
        assert!((normal_angle(&l) - 3.0 * PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn moments_agree_with_direct_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pts: Vec<_> = (0..80)
            .map(|i| (10.0 + 0.4 * i as f64 + rng.random::<f64>(), 300.0 + i as f64))
            .collect();
        let direct = fit_line(&pts).unwrap();
        let (a, b) = pts.split_at(30);
        let merged = Moments::of(a).merged(&Moments::of(b)).line().unwrap();
        assert!((direct.offset - merged.offset).abs() < 1e-6);
        assert!((direct.rmse - merged.rmse).abs() < 1e-6);
    }

    fn sample_ellipse(center: [f64; 2], axes: [f64; 2], theta: f64, n: usize, arc: f64) -> Vec<(f64, f64)> {
        let e = Ellipse::from_geometry(center, axes, theta).unwrap();
        (0..n).map(|i| e.point_at(arc * i as f64 / n as f64)).collect()
    }

    #[test]
    fn exact_circle() {
        let pts = sample_ellipse([50.0, 50.0], [20.0, 20.0], 0.0, 36, 2.0 * PI);
        let e = fit_ellipse(&pts).unwrap();
        assert!((e.center[0] - 50.0).abs() < 1e-6 && (e.center[1] - 50.0).abs() < 1e-6);
        assert!((e.axes[0] - 20.0).abs() < 1e-6 && (e.axes[1] - 20.0).abs() < 1e-6);
        assert!(e.rmse < 1e-6);
    }

    #[test]
    fn exact_rotated_ellipse() {
        let pts = sample_ellipse([200.0, 150.0], [120.0, 45.0], 0.5, 40, 2.0 * PI);
        let e = fit_ellipse(&pts).unwrap();
        assert!((e.center[0] - 200.0).abs() < 1e-6);
        assert!((e.center[1] - 150.0).abs() < 1e-6);
        assert!((e.axes[0] - 120.0).abs() < 1e-6);
        assert!((e.axes[1] - 45.0).abs() < 1e-6);
        assert!((e.theta - 0.5).abs() < 1e-6);
        assert!(e.rmse < 1e-6);
        // Coefficients vanish on the samples by direct substitution.
        for (r, c) in &pts {
            assert!(e.algebraic(*r, *c).abs() < 1e-9);
        }
        let reference = Ellipse::from_geometry([200.0, 150.0], [120.0, 45.0], 0.5).unwrap();
        for (a, b) in e.conic.iter().zip(reference.conic) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn collinear_points_do_not_fit() {
        let pts: Vec<_> = (0..20).map(|i| (2.0 * i as f64 + 1.0, 3.0 * i as f64)).collect();
        assert!(fit_ellipse(&pts).is_err());
        assert!(fit_ellipse(&pts[..5]).is_err());
    }

    #[test]
    fn partial_arc_is_recovered() {
        let pts = sample_ellipse([80.0, 60.0], [150.0, 60.0], 2.0, 60, PI / 2.0);
        let e = fit_ellipse(&pts).unwrap();
        assert!((e.axes[0] - 150.0).abs() < 1e-5);
        assert!((e.axes[1] - 60.0).abs() < 1e-5);
        assert!((e.theta - 2.0).abs() < 1e-6);
    }

    #[test]
    fn sampson_matches_geometric_distance_near_circle() {
        let e = Ellipse::from_geometry([0.0, 0.0], [50.0, 50.0], 0.0).unwrap();
        // Point 1 px outside the circle.
        let d = e.distance(0.0, 51.0);
        assert!((d - 1.0).abs() < 0.02, "{d}");
    }

    #[test]
    fn coefficient_scaling_and_order_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts: Vec<_> = sample_ellipse([30.0, 40.0], [25.0, 12.0], 1.0, 50, 2.0 * PI)
            .into_iter()
            .map(|(r, c)| (r + rng.random::<f64>() - 0.5, c + rng.random::<f64>() - 0.5))
            .collect();
        let e = fit_ellipse(&pts).unwrap();
        let scaled = Ellipse {
            conic: e.conic.map(|v| v * -37.5),
            ..e
        };
        assert!((scaled.rmse_of(&pts) - e.rmse).abs() < 1e-12);
        pts.reverse();
        pts.rotate_left(17);
        let f = fit_ellipse(&pts).unwrap();
        for (a, b) in e.conic.iter().zip(f.conic) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((e.rmse - f.rmse).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn line_is_rigid_motion_equivariant(seed in any::<u64>(), angle in 0.0f64..(2.0 * PI),
                                           tr in -500.0f64..500.0, tc in -500.0f64..500.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let slope = rng.random::<f64>() * 4.0 - 2.0;
            let pts: Vec<_> = (0..30)
                .map(|i| (slope * i as f64 + rng.random::<f64>() * 2.0, i as f64 * 1.5))
                .collect();
            let l = fit_line(&pts).unwrap();
            let (s, c) = angle.sin_cos();
            let mv = |(r, q): (f64, f64)| (c * r - s * q + tr, s * r + c * q + tc);
            let moved: Vec<_> = pts.iter().map(|p| mv(*p)).collect();
            let lm = fit_line(&moved).unwrap();
            prop_assert!((l.rmse - lm.rmse).abs() < 1e-9);
            // Transformed points keep their distances to the transformed fit.
            for (p, q) in pts.iter().zip(&moved) {
                prop_assert!((l.signed_distance(p.0, p.1).abs() - lm.distance(q.0, q.1)).abs() < 1e-9);
            }
        }

        #[test]
        fn line_is_axis_swap_equivariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<_> = (0..25)
                .map(|_| (rng.random::<f64>() * 50.0, rng.random::<f64>() * 50.0 + 3.0))
                .collect();
            let l = fit_line(&pts).unwrap();
            let swapped: Vec<_> = pts.iter().map(|(r, c)| (*c, *r)).collect();
            let ls = fit_line(&swapped).unwrap();
            prop_assert!((l.offset - ls.offset).abs() < 1e-9);
            prop_assert!((l.rmse - ls.rmse).abs() < 1e-9);
            prop_assert!((l.normal[0] - ls.normal[1]).abs() < 1e-9);
            prop_assert!((l.normal[1] - ls.normal[0]).abs() < 1e-9);
        }

        #[test]
        fn line_rmse_postcondition(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<_> = (0..40)
                .map(|_| (rng.random::<f64>() * 9.0, rng.random::<f64>() * 70.0))
                .collect();
            let l = fit_line(&pts).unwrap();
            prop_assert!(l.rmse >= 0.0);
            prop_assert!((l.normal[0].hypot(l.normal[1]) - 1.0).abs() < 1e-12);
            prop_assert!(l.offset >= 0.0);
            // Optimality: no small rotation about the centroid does better.
            let (bf, _) = brute_force_line(&pts, 3600);
            prop_assert!(l.rmse <= bf + 1e-12);
        }
    }
}
