use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::PitchScene;
use crate::error::{Error, Result};
use crate::eval::{DatasetItem, GtPrimitive, ItemMetadata, PrimitiveKind};
use crate::imaging::{BinaryMask, RasterImage};

/// Largest image-space step between consecutive curve samples.
const MAX_STEP_PX: f64 = 0.25;
/// Samples may fall this far outside the frame and still be drawn.
const FRAME_MARGIN: f64 = 12.0;
const PAINT: [f64; 3] = [0.93, 0.93, 0.91];
/// Relative brightness loss from the stroke center to its edge.
const CREST: f64 = 0.2;

/// A marking projected into the image: dense distorted samples `(row, col)`
/// plus the stroke half-width at each sample. Consecutive samples closer than
/// a pixel belong to the same visible run; `runs` holds their index ranges.
#[derive(Clone, Debug)]
pub struct ProjectedCurve {
    pub name: String,
    pub kind: PrimitiveKind,
    pub points: Vec<(f64, f64)>,
    pub half_widths: Vec<f64>,
    pub runs: Vec<std::ops::Range<usize>>,
}

impl ProjectedCurve {
    /// Samples whose rounded pixel lies inside the frame.
    pub fn inside(&self, h: usize, w: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().filter(move |&(r, c)| {
            let (rr, cc) = (r.round(), c.round());
            rr >= 0.0 && cc >= 0.0 && (rr as usize) < h && (cc as usize) < w
        })
    }

    /// Largest distance of in-frame samples from the chord joining the ends
    /// of their contiguous in-frame stretch.
    pub fn sagitta(&self, h: usize, w: usize) -> f64 {
        let inside = |&(r, c): &(f64, f64)| {
            let (rr, cc) = (r.round(), c.round());
            rr >= 0.0 && cc >= 0.0 && (rr as usize) < h && (cc as usize) < w
        };
        let mut best: f64 = 0.0;
        for run in &self.runs {
            for stretch in self.points[run.clone()].split(|p| !inside(p)) {
                let (Some(&a), Some(&b)) = (stretch.first(), stretch.last()) else { continue };
                let len = (b.0 - a.0).hypot(b.1 - a.1);
                if len < 1e-9 {
                    continue;
                }
                for p in stretch {
                    best = best.max(((p.0 - a.0) * (b.1 - a.1) - (p.1 - a.1) * (b.0 - a.0)).abs() / len);
                }
            }
        }
        best
    }
}

fn in_frame(p: (f64, f64), h: usize, w: usize, margin: f64) -> bool {
    p.0 >= -margin && p.1 >= -margin && p.0 <= h as f64 - 1.0 + margin && p.1 <= w as f64 - 1.0 + margin
}

/// Projects every marking with adaptive sampling so that consecutive
/// in-frame samples are at most a quarter pixel apart.
pub fn project_markings(scene: &PitchScene) -> Vec<ProjectedCurve> {
    let cam = &scene.camera;
    let (h, w) = (cam.height, cam.width);
    scene
        .pitch
        .markings
        .iter()
        .map(|m| {
            let coarse = 512usize;
            let proj = |t: f64| cam.project(m.curve.point(t));
            let mut max_step: f64 = 0.0;
            let mut prev = proj(0.0);
            for i in 1..=coarse {
                let cur = proj(i as f64 / coarse as f64);
                if let (Some(a), Some(b)) = (prev, cur) {
                    if in_frame(a, h, w, 4.0 * FRAME_MARGIN) || in_frame(b, h, w, 4.0 * FRAME_MARGIN) {
                        max_step = max_step.max((a.0 - b.0).hypot(a.1 - b.1));
                    }
                }
                prev = cur;
            }
            let n = ((coarse as f64 * max_step / MAX_STEP_PX).ceil() as usize).clamp(coarse, 400_000);
            let mut points = Vec::new();
            let mut half_widths = Vec::new();
            let mut runs = Vec::new();
            let mut start = None::<usize>;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                let q = m.curve.point(t);
                match cam.project(q).filter(|&p| in_frame(p, h, w, FRAME_MARGIN)) {
                    Some(p) => {
                        if start.is_none() {
                            start = Some(points.len());
                        }
                        let width = (scene.line_width * cam.focal / cam.depth(q)).clamp(3.0, 9.0);
                        points.push(p);
                        half_widths.push(width / 2.0);
                    }
                    None => {
                        if let Some(s) = start.take() {
                            runs.push(s..points.len());
                        }
                    }
                }
            }
            if let Some(s) = start {
                runs.push(s..points.len());
            }
            ProjectedCurve {
                name: m.name.clone(),
                kind: m.curve.kind(),
                points,
                half_widths,
                runs,
            }
        })
        .collect()
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dr, dc) = (b.0 - a.0, b.1 - a.1);
    let len2 = dr * dr + dc * dc;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dr + (p.1 - a.1) * dc) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - t * dr).hypot(p.1 - a.1 - t * dc)
}

/// Paint opacity per pixel: anti-aliased stroke coverage times a slight
/// crest so that strokes peak along their centerline.
fn paint_alpha(curves: &[ProjectedCurve], h: usize, w: usize) -> Vec<f64> {
    let mut alpha = vec![0.0f64; h * w];
    for curve in curves {
        for run in &curve.runs {
            for i in run.start..run.end {
                let j = if i + 1 < run.end { i + 1 } else { i };
                let (a, b) = (curve.points[i], curve.points[j]);
                let hw = 0.5 * (curve.half_widths[i] + curve.half_widths[j]);
                let reach = hw + 1.0;
                let r0 = (a.0.min(b.0) - reach).floor().max(0.0) as usize;
                let c0 = (a.1.min(b.1) - reach).floor().max(0.0) as usize;
                let r1 = (a.0.max(b.0) + reach).ceil().min(h as f64 - 1.0);
                let c1 = (a.1.max(b.1) + reach).ceil().min(w as f64 - 1.0);
                if r1 < 0.0 || c1 < 0.0 {
                    continue;
                }
                for r in r0..=r1 as usize {
                    for c in c0..=c1 as usize {
                        let d = point_segment_distance((r as f64, c as f64), a, b);
                        let cover = (hw + 0.5 - d).clamp(0.0, 1.0);
                        if cover > 0.0 {
                            let x = (d / hw).min(1.0);
                            let v = cover * (1.0 - CREST * x * x);
                            let slot = &mut alpha[r * w + c];
                            *slot = slot.max(v);
                        }
                    }
                }
            }
        }
    }
    alpha
}

/// Even-odd point-in-polygon test on `(row, col)` vertices.
fn in_polygon(p: (f64, f64), poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + n - 1) % n]);
        if (a[0] > p.0) != (b[0] > p.0) {
            let c = a[1] + (p.0 - a[0]) * (b[1] - a[1]) / (b[0] - a[0]);
            if p.1 < c {
                inside = !inside;
            }
        }
    }
    inside
}

/// Thin 8-connected digitization of the curve, as in a 1-px polyline
/// annotation. A pixel is taken wherever the curve crosses an integer row or
/// column (the crossing coordinate exact, the other rounded), so every pixel
/// lies within half a pixel of the curve and consecutive ones touch; a pixel
/// is then dropped when its neighbors on the curve already touch.
fn centerline_pixels(curve: &ProjectedCurve, field: &BinaryMask) -> Vec<(usize, usize)> {
    let (h, w) = field.dims();
    let touch = |a: (usize, usize), b: (usize, usize)| a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1;
    let mut chain: Vec<(usize, usize)> = Vec::new();
    let mut crossings: Vec<(f64, f64, f64)> = Vec::new();
    for run in &curve.runs {
        for pair in curve.points[run.clone()].windows(2) {
            let (a, b) = (pair[0], pair[1]);
            crossings.clear();
            for (axis, x0, x1) in [(0, a.0, b.0), (1, a.1, b.1)] {
                if x0 == x1 {
                    continue;
                }
                // Integers in (x0, x1] along the direction of travel.
                let (lo, hi) = if x1 > x0 { (x0.floor() + 1.0, x1.floor()) } else { (x1.ceil(), x0.ceil() - 1.0) };
                let mut k = lo;
                while k <= hi {
                    let t = (k - x0) / (x1 - x0);
                    let (r, c) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
                    // Snap the crossing coordinate exactly.
                    let (r, c) = if axis == 0 { (k, c) } else { (r, k) };
                    crossings.push((t, r, c));
                    k += 1.0;
                }
            }
            crossings.sort_by(|x, y| x.0.total_cmp(&y.0));
            for &(_, r, c) in &crossings {
                let (rr, cc) = (r.round(), c.round());
                if rr < 0.0 || cc < 0.0 || rr as usize >= h || cc as usize >= w {
                    continue;
                }
                let p = (rr as usize, cc as usize);
                if chain.last() == Some(&p) {
                    continue;
                }
                chain.push(p);
                let n = chain.len();
                if n >= 3 && touch(chain[n - 3], chain[n - 1]) {
                    chain.remove(n - 2);
                }
            }
        }
    }
    let mut pixels: Vec<_> = chain.into_iter().filter(|p| field.get(p.0, p.1)).collect();
    pixels.sort_unstable();
    pixels.dedup();
    pixels
}

/// Renders the scene: RGB image, field mask, 1-px centerline ground truth
/// and typed primitives. Occluders, lighting and noise never alter the
/// ground truth.
pub fn render(scene: &PitchScene) -> Result<DatasetItem> {
    scene.validate()?;
    let cam = &scene.camera;
    let (h, w) = (cam.height, cam.width);
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);

    let ground: Vec<Option<(f64, f64)>> = (0..h * w)
        .map(|i| cam.ground_point((i / w) as f64, (i % w) as f64))
        .collect();
    let field = BinaryMask::from_fn(h, w, |r, c| ground[r * w + c].is_some_and(|(x, y)| scene.pitch.on_field(x, y)));
    if field.is_empty() {
        return Err(Error::Camera("the pitch is not visible from this camera".into()));
    }

    let curves = project_markings(scene);
    let primitives: Vec<GtPrimitive> = curves
        .iter()
        .map(|c| GtPrimitive {
            kind: c.kind,
            name: c.name.clone(),
            pixels: centerline_pixels(c, &field),
        })
        .filter(|p| !p.pixels.is_empty())
        .collect();
    let mut lines = BinaryMask::new(h, w);
    for p in &primitives {
        for &(r, c) in &p.pixels {
            lines.set(r, c, true);
        }
    }
    let alpha = paint_alpha(&curves, h, w);

    let stripe_w = scene.pitch.length / scene.stripes.max(1) as f64;
    let mut samples = vec![0.0; h * w * 3];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let base: [f64; 3] = if field.get(r, c) {
                let (x, _) = ground[i].unwrap_or_default();
                let band = ((x + scene.pitch.length / 2.0) / stripe_w).floor() as i64;
                let f = if band.rem_euclid(2) == 0 { 1.0 + scene.stripe_contrast } else { 1.0 - scene.stripe_contrast };
                scene.grass.map(|v| v * f)
            } else {
                // Crowd: coarse random speckle.
                let g: f64 = rng.random_range(0.08..0.45);
                [g * rng.random_range(0.8..1.2), g * rng.random_range(0.8..1.2), g * rng.random_range(0.8..1.2)]
            };
            let a = if field.get(r, c) { alpha[i] } else { 0.0 };
            for k in 0..3 {
                samples[3 * i + k] = base[k] * (1.0 - a) + PAINT[k] * a;
            }
        }
    }

    for occ in &scene.occluders {
        let [cr, cc] = occ.center;
        let [rr, rc] = occ.radii;
        let r0 = (cr - rr).floor().max(0.0) as usize;
        let r1 = ((cr + rr).ceil().max(0.0) as usize).min(h - 1);
        let c0 = (cc - rc).floor().max(0.0) as usize;
        let c1 = ((cc + rc).ceil().max(0.0) as usize).min(w - 1);
        for r in r0..=r1 {
            for c in c0..=c1 {
                let (dr, dc) = ((r as f64 - cr) / rr, (c as f64 - cc) / rc);
                if dr * dr + dc * dc <= 1.0 {
                    // Lower third in the darker "shorts" color.
                    let color = if dr > 0.33 { occ.color.map(|v| v * 0.35) } else { occ.color };
                    samples[3 * (r * w + c)..3 * (r * w + c) + 3].copy_from_slice(&color);
                }
            }
        }
    }

    let ill = &scene.illumination;
    let noise = Normal::new(0.0, scene.noise_sigma.max(0.0)).map_err(|e| Error::invalid(e.to_string()))?;
    for r in 0..h {
        for c in 0..w {
            let u = (r as f64 / h as f64 - 0.5, c as f64 / w as f64 - 0.5);
            let mut gain = 1.0 + ill.gradient[0] * u.0 + ill.gradient[1] * u.1;
            if ill.shadow.len() >= 3 && in_polygon((r as f64, c as f64), &ill.shadow) {
                gain *= ill.shadow_ratio;
            }
            for k in 0..3 {
                let s = &mut samples[3 * (r * w + c) + k];
                let n = if scene.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                *s = ((*s * gain + n).clamp(0.0, 1.0) * 255.0).round() / 255.0;
            }
        }
    }

    Ok(DatasetItem {
        match_name: scene.match_name.clone(),
        image_name: scene.name.clone(),
        image: RasterImage::new(h, w, 3, samples)?,
        field,
        lines,
        primitives,
        metadata: ItemMetadata {
            stadium: scene.stadium.clone(),
            camera: "synthetic".into(),
            zoom: scene.zoom.clone(),
        },
    })
}
