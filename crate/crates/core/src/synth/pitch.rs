use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eval::PrimitiveKind;

/// A painted marking on the ground plane (meters).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Curve {
    Segment { from: [f64; 2], to: [f64; 2] },
    /// Circle arc from angle `start` to `end` (radians, counter-clockwise).
    Arc { center: [f64; 2], radius: f64, start: f64, end: f64 },
}

impl Curve {
    pub fn kind(&self) -> PrimitiveKind {
        match self {
            Curve::Segment { .. } => PrimitiveKind::Line,
            Curve::Arc { .. } => PrimitiveKind::Ellipse,
        }
    }

    /// Point at parameter `t` in `[0, 1]`.
    pub fn point(&self, t: f64) -> [f64; 3] {
        match *self {
            Curve::Segment { from, to } => [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1]), 0.0],
            Curve::Arc { center, radius, start, end } => {
                let a = start + t * (end - start);
                [center[0] + radius * a.cos(), center[1] + radius * a.sin(), 0.0]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Marking {
    pub name: String,
    pub curve: Curve,
}

/// Pitch geometry: markings plus the grass extent used for the field mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PitchModel {
    pub length: f64,
    pub width: f64,
    /// Grass run-off beyond the touch and goal lines.
    pub margin: f64,
    pub markings: Vec<Marking>,
}

impl PitchModel {
    /// 105 x 68 m pitch with touch/goal/halfway lines, both penalty and goal
    /// areas, the center circle and both penalty arcs.
    pub fn standard() -> Self {
        let (hl, hw) = (52.5, 34.0);
        let mut m = Vec::new();
        let mut seg = |name: String, a: [f64; 2], b: [f64; 2]| m.push(Marking { name, curve: Curve::Segment { from: a, to: b } });
        seg("touchline_near".into(), [-hl, -hw], [hl, -hw]);
        seg("touchline_far".into(), [-hl, hw], [hl, hw]);
        seg("halfway_line".into(), [0.0, -hw], [0.0, hw]);
        for (side, s) in [("left", -1.0), ("right", 1.0)] {
            seg(format!("goal_line_{side}"), [s * hl, -hw], [s * hl, hw]);
            for (area, depth, half) in [("penalty", 16.5, 20.16), ("goal", 5.5, 9.16)] {
                let x = s * (hl - depth);
                seg(format!("{area}_front_{side}"), [x, -half], [x, half]);
                seg(format!("{area}_near_{side}"), [x, -half], [s * hl, -half]);
                seg(format!("{area}_far_{side}"), [x, half], [s * hl, half]);
            }
        }
        m.push(Marking {
            name: "center_circle".into(),
            curve: Curve::Arc { center: [0.0, 0.0], radius: 9.15, start: 0.0, end: 2.0 * PI },
        });
        // Part of the 9.15 m circle around each penalty spot outside the area.
        let half_angle = ((hl - 16.5 - (hl - 11.0)) / 9.15f64).abs().acos();
        for (side, s) in [("left", -1.0), ("right", 1.0)] {
            let center = [s * (hl - 11.0), 0.0];
            let (start, end) = if s < 0.0 { (-half_angle, half_angle) } else { (PI - half_angle, PI + half_angle) };
            m.push(Marking {
                name: format!("penalty_arc_{side}"),
                curve: Curve::Arc { center, radius: 9.15, start, end },
            });
        }
        Self { length: 2.0 * hl, width: 2.0 * hw, margin: 2.5, markings: m }
    }

    /// Whether a ground point lies on the grass (pitch plus run-off).
    pub fn on_field(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.length / 2.0 + self.margin && y.abs() <= self.width / 2.0 + self.margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_inventory() {
        let p = PitchModel::standard();
        let lines = p.markings.iter().filter(|m| m.curve.kind() == PrimitiveKind::Line).count();
        let arcs = p.markings.len() - lines;
        assert_eq!((lines, arcs), (17, 3));
        let names: std::collections::HashSet<_> = p.markings.iter().map(|m| &m.name).collect();
        assert_eq!(names.len(), p.markings.len());
    }

    #[test]
    fn penalty_arcs_end_on_the_area_front() {
        let p = PitchModel::standard();
        for m in p.markings.iter().filter(|m| m.name.starts_with("penalty_arc")) {
            for t in [0.0, 1.0] {
                let q = m.curve.point(t);
                assert!((q[0].abs() - 36.0).abs() < 1e-9, "{q:?}");
            }
            // Midpoint bulges towards the halfway line.
            assert!(m.curve.point(0.5)[0].abs() < 36.0);
        }
    }
}
