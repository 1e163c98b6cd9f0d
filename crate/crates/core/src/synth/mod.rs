//! Deterministic synthetic pitch images with exact ground truth: perspective
//! camera with radial distortion, anti-aliased markings, mowing stripes,
//! lighting gradients and shadows, player-like occluders and sensor noise.

mod camera;
mod pitch;
mod render;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use camera::Camera;
pub use pitch::{Curve, Marking, PitchModel};
pub use render::{project_markings, render, ProjectedCurve};

use crate::error::{Error, Result};

pub const IMAGE_WIDTH: usize = 960;
pub const IMAGE_HEIGHT: usize = 540;

/// Focal lengths below are given for a 480-px-wide frame.
const FOCAL_SCALE: f64 = IMAGE_WIDTH as f64 / 480.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Illumination {
    /// Relative gain change across the image along (rows, cols).
    pub gradient: [f64; 2],
    /// Image-space polygon `(row, col)` in shadow; empty for none.
    pub shadow: Vec<[f64; 2]>,
    /// Brightness of shadowed pixels relative to sunlit ones.
    pub shadow_ratio: f64,
}

impl Default for Illumination {
    fn default() -> Self {
        Self { gradient: [0.0, 0.0], shadow: Vec::new(), shadow_ratio: 1.0 }
    }
}

/// Elliptic colored blob standing in for a player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occluder {
    /// `(row, col)` center.
    pub center: [f64; 2],
    /// Half-extent along rows and columns.
    pub radii: [f64; 2],
    pub color: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PitchScene {
    pub name: String,
    pub match_name: String,
    pub stadium: String,
    pub zoom: String,
    pub pitch: PitchModel,
    pub camera: Camera,
    /// Painted width in meters, converted to pixels by depth and clamped to 3..9 px.
    pub line_width: f64,
    pub grass: [f64; 3],
    pub stripes: usize,
    pub stripe_contrast: f64,
    pub illumination: Illumination,
    pub occluders: Vec<Occluder>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl PitchScene {
    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        if !(self.line_width > 0.0) || !(0.0..1.0).contains(&self.stripe_contrast) {
            return Err(Error::invalid("line width must be positive and stripe contrast in [0, 1)"));
        }
        if !(self.noise_sigma >= 0.0) || !(self.illumination.shadow_ratio > 0.0) {
            return Err(Error::invalid("noise sigma must be >= 0 and shadow ratio > 0"));
        }
        if self.occluders.iter().any(|o| !(o.radii[0] > 0.0 && o.radii[1] > 0.0)) {
            return Err(Error::invalid("occluder radii must be positive"));
        }
        Ok(())
    }

    /// Plain scene from a camera looking at `target` from `position`.
    pub fn new(name: &str, zoom: &str, position: [f64; 3], target: [f64; 2], focal: f64, k1: f64, seed: u64) -> Result<Self> {
        let camera = Camera::looking_at(position, [target[0], target[1], 0.0], focal, k1, IMAGE_WIDTH, IMAGE_HEIGHT)?;
        Ok(Self {
            name: name.into(),
            match_name: "synthetic".into(),
            stadium: "synthetic".into(),
            zoom: zoom.into(),
            pitch: PitchModel::standard(),
            camera,
            line_width: 0.3,
            grass: [0.2, 0.46, 0.17],
            stripes: 18,
            stripe_contrast: 0.06,
            illumination: Illumination::default(),
            occluders: Vec::new(),
            noise_sigma: 0.0,
            seed,
        })
    }

    /// Scatters `n` players, preferring spots on visible markings so that
    /// they actually interrupt lines.
    pub fn add_players(&mut self, n: usize, rng: &mut impl Rng) {
        const SHIRTS: [[f64; 3]; 6] = [
            [0.85, 0.12, 0.1],
            [0.1, 0.2, 0.75],
            [0.95, 0.8, 0.1],
            [0.15, 0.15, 0.15],
            [0.95, 0.5, 0.1],
            [0.45, 0.7, 0.95],
        ];
        let (h, w) = (self.camera.height, self.camera.width);
        let anchors: Vec<(f64, f64)> = project_markings(self)
            .iter()
            .flat_map(|c| c.inside(h, w).step_by(97).collect::<Vec<_>>())
            .collect();
        let scale = (self.camera.focal / (600.0 * FOCAL_SCALE)).clamp(0.6, 1.6) * FOCAL_SCALE;
        for i in 0..n {
            let center = if i % 2 == 0 && !anchors.is_empty() {
                let a = anchors[rng.random_range(0..anchors.len())];
                [a.0 - rng.random_range(0.0..10.0) * scale, a.1]
            } else {
                [rng.random_range(0.3..0.95) * h as f64, rng.random_range(0.0..1.0) * w as f64]
            };
            self.occluders.push(Occluder {
                center,
                radii: [rng.random_range(14.0..20.0) * scale, rng.random_range(6.0..8.0) * scale],
                color: SHIRTS[rng.random_range(0..SHIRTS.len())],
            });
        }
    }

    /// Number of primitives of each kind with at least `min_px` ground-truth pixels.
    pub fn visible_counts(&self, min_px: usize) -> Result<(usize, usize)> {
        let item = render(self)?;
        let count = |k| item.primitives.iter().filter(|p| p.kind == k && p.pixels.len() >= min_px).count();
        Ok((count(crate::eval::PrimitiveKind::Line), count(crate::eval::PrimitiveKind::Ellipse)))
    }

    /// Largest chord deviation among the projected straight markings.
    pub fn max_line_sagitta(&self) -> f64 {
        let (h, w) = (self.camera.height, self.camera.width);
        project_markings(self)
            .iter()
            .filter(|c| c.kind == crate::eval::PrimitiveKind::Line)
            .map(|c| c.sagitta(h, w))
            .fold(0.0, f64::max)
    }
}

/// Main-stand camera position: behind the near touchline at `x`.
fn main_stand(x: f64, back: f64, height: f64) -> [f64; 3] {
    [x, -34.0 - back, height]
}

fn jitter(rng: &mut ChaCha8Rng, v: f64, amount: f64) -> f64 {
    v + rng.random_range(-amount..=amount)
}

/// Suite scene split between direct sun and stand shadow.
pub const SUNLIT_SHADOW_SCENE: &str = "sunlit_shadow";

/// The 20-scene evaluation suite: wide, medium and tight views of both pitch
/// ends and the center, with and without lens distortion, a sunlit/shadow
/// split, a night match, and up to 8 players.
pub fn standard_suite(master_seed: u64) -> Result<Vec<PitchScene>> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    // (name, zoom, camera x, back, height, target, focal, k1, players)
    #[rustfmt::skip]
    let plan: [(&str, &str, f64, f64, f64, [f64; 2], f64, f64, usize); 20] = [
        ("wide_center", "wide", 0.0, 30.0, 24.0, [0.0, 0.0], 420.0, 0.0, 0),
        ("wide_center_distorted", "wide", 0.0, 30.0, 24.0, [0.0, 2.0], 420.0, -0.1, 4),
        ("wide_left", "wide", -15.0, 28.0, 24.0, [-30.0, 0.0], 440.0, 0.0, 2),
        ("wide_right", "wide", 15.0, 28.0, 24.0, [30.0, 0.0], 440.0, -0.1, 3),
        ("medium_left_box", "medium", -25.0, 25.0, 16.0, [-40.0, 0.0], 560.0, 0.0, 3),
        ("medium_right_box", "medium", 25.0, 25.0, 16.0, [40.0, 0.0], 560.0, -0.08, 5),
        ("medium_center_circle", "medium", 0.0, 25.0, 16.0, [0.0, 0.0], 620.0, 0.0, 2),
        ("medium_halfway", "medium", 5.0, 25.0, 16.0, [0.0, -15.0], 600.0, -0.06, 6),
        ("tight_left_arc", "tight", -30.0, 22.0, 15.0, [-37.0, 0.0], 950.0, 0.0, 1),
        ("tight_right_goal_area", "tight", 35.0, 22.0, 15.0, [46.0, 2.0], 900.0, 0.0, 2),
        ("tight_center", "tight", 0.0, 22.0, 15.0, [0.0, 4.0], 950.0, -0.05, 3),
        ("tight_box_corner", "tight", 30.0, 22.0, 15.0, [38.0, -18.0], 900.0, 0.0, 8),
        ("shadow_wide", "wide", 0.0, 30.0, 24.0, [0.0, 0.0], 420.0, 0.0, 0),
        ("sunlit_shadow", "medium", 25.0, 25.0, 16.0, [38.0, 0.0], 730.0, 0.0, 2),
        ("distorted_touchline", "wide", 0.0, 20.0, 14.0, [0.0, -10.0], 330.0, -0.12, 0),
        ("night_center", "medium", -5.0, 25.0, 16.0, [-5.0, 0.0], 520.0, -0.05, 4),
        ("medium_left_players", "medium", -20.0, 25.0, 16.0, [-35.0, -5.0], 600.0, 0.0, 8),
        ("wide_far_side", "wide", 10.0, -98.0, 24.0, [10.0, 0.0], 420.0, 0.0, 2),
        ("behind_goal", "medium", -80.0, -34.0, 12.0, [-30.0, 0.0], 420.0, 0.0, 1),
        ("tight_halfway_distorted", "tight", 0.0, 22.0, 15.0, [0.0, -12.0], 900.0, -0.1, 5),
    ];
    let mut scenes = Vec::with_capacity(plan.len());
    for (i, &(name, zoom, x, back, height, target, focal, k1, players)) in plan.iter().enumerate() {
        let position = main_stand(jitter(&mut rng, x, 2.0), back, jitter(&mut rng, height, 1.0));
        let target = [jitter(&mut rng, target[0], 1.0), jitter(&mut rng, target[1], 1.0)];
        let focal = FOCAL_SCALE * focal * rng.random_range(0.97..1.03);
        let mut s = PitchScene::new(name, zoom, position, target, focal, k1, master_seed ^ ((i as u64 + 1) << 32))?;
        s.match_name = format!("match_{}", i % 4);
        s.stadium = format!("stadium_{}", i % 4);
        s.noise_sigma = rng.random_range(0.008..0.02);
        s.illumination.gradient = [rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15)];
        s.grass = [jitter(&mut rng, 0.2, 0.03), jitter(&mut rng, 0.46, 0.05), jitter(&mut rng, 0.17, 0.03)];
        if name.contains("shadow") {
            // Stand shadow over the left part of the frame; the sunlit/shadow
            // split scene gets the harsher contrast of direct sun.
            let (h, w) = (IMAGE_HEIGHT as f64, IMAGE_WIDTH as f64);
            s.illumination.shadow = vec![[-1.0, -1.0], [-1.0, 0.55 * w], [h, 0.35 * w], [h, -1.0]];
            s.illumination.shadow_ratio = if name == SUNLIT_SHADOW_SCENE { 0.3 } else { 0.4 };
            s.grass = [0.24, 0.55, 0.2];
        }
        if name.starts_with("night") {
            s.grass = [0.12, 0.3, 0.11];
            s.illumination.gradient = [0.0, 0.3];
            s.noise_sigma = 0.025;
        }
        s.add_players(players, &mut rng);
        scenes.push(s);
    }
    Ok(scenes)
}

/// Tight view of the near corner of a penalty area showing three straight
/// markings: goal line, penalty-area side and goal-area side.
pub fn three_line_scene(seed: u64) -> Result<PitchScene> {
    let mut s = PitchScene::new("three_lines", "tight", main_stand(36.0, 22.0, 15.0), [44.0, -21.0], FOCAL_SCALE * 1200.0, 0.0, seed)?;
    s.noise_sigma = 0.01;
    Ok(s)
}

/// Wide view of one half showing ten straight markings, the center circle
/// and a penalty arc.
pub fn ten_line_scene(seed: u64) -> Result<PitchScene> {
    let mut s = PitchScene::new("ten_lines", "wide", main_stand(22.0, 22.0, 15.0), [30.0, -6.0], FOCAL_SCALE * 400.0, 0.0, seed)?;
    s.noise_sigma = 0.01;
    Ok(s)
}
