use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::fit::{fit_ellipse, fit_line, Ellipse, Moments, StraightLine};
use super::regions::{bbox_of, extract_regions_with_skeleton, to_points, Region};
#[cfg(test)]
use super::regions::extract_regions;
use super::{
    Action, AuditEntry, ClassificationResult, ClassifyConfig, EllipsePrimitive, LinePrimitive,
    PixelLabel, Stage,
};
use crate::error::Result;
use crate::imaging::BinaryMask;

/// Chain index at which a chain that does not fit one line is cut: the
/// farthest pixel from the chord joining its ends (from its first pixel for
/// closed loops).
fn cut_index(chain: &[(usize, usize)]) -> usize {
    let n = chain.len();
    let (a, b) = (chain[0], chain[n - 1]);
    let (ar, ac) = (a.0 as f64, a.1 as f64);
    let (dr, dc) = (b.0 as f64 - ar, b.1 as f64 - ac);
    let chord = dr.hypot(dc);
    let score = |p: &(usize, usize)| {
        let (pr, pc) = (p.0 as f64 - ar, p.1 as f64 - ac);
        if chord >= 2.0 {
            (pr * dc - pc * dr).abs() / chord
        } else {
            pr.hypot(pc)
        }
    };
    let mut best = (f64::NEG_INFINITY, n / 2);
    for (i, p) in chain.iter().enumerate().take(n - 1).skip(1) {
        let s = score(p);
        if s > best.0 {
            best = (s, i);
        }
    }
    best.1.clamp(1, n - 1)
}

fn split_ranges(chain: &[(usize, usize)], lo: usize, hi: usize, rmse_max: f64, min_size: usize, out: &mut Vec<(usize, usize)>) {
    let part = &chain[lo..hi];
    if part.len() < min_size.max(2) {
        out.push((lo, hi));
        return;
    }
    let fits = fit_line(&to_points(part)).map_or(true, |l| l.rmse <= rmse_max);
    if fits {
        out.push((lo, hi));
        return;
    }
    let k = lo + cut_index(part);
    split_ranges(chain, lo, k, rmse_max, min_size, out);
    split_ranges(chain, k, hi, rmse_max, min_size, out);
}

/// Recursive bisection of a region's chain until every piece fits a line
/// within `rmse_max` or is smaller than `min_size`. Pieces keep the parent id.
pub fn split_region(region: &Region, rmse_max: f64, min_size: usize) -> Vec<Region> {
    let mut ranges = Vec::new();
    split_ranges(&region.chain, 0, region.chain.len(), rmse_max, min_size, &mut ranges);
    ranges
        .into_iter()
        .map(|(lo, hi)| Region {
            id: region.id,
            chain: region.chain[lo..hi].to_vec(),
        })
        .collect()
}

fn line_rmse(pixels: &[(usize, usize)]) -> f64 {
    fit_line(&to_points(pixels)).map_or(if pixels.len() <= 1 { 0.0 } else { f64::INFINITY }, |l| l.rmse)
}

fn line_over(pixels: &[(usize, usize)]) -> Option<StraightLine> {
    fit_line(&to_points(pixels)).ok()
}

enum Verdict {
    Small,
    Ellipse(Ellipse),
    Lines(Vec<Region>),
}

/// Ellipse fit that passes the size and flatness plausibility limits.
fn plausible_ellipse(pts: &[(f64, f64)], cfg: &ClassifyConfig, dims: (usize, usize)) -> Option<Ellipse> {
    let diag = (dims.0 as f64).hypot(dims.1 as f64);
    fit_ellipse(pts)
        .ok()
        .filter(|e| e.axes[0] <= cfg.ellipse_max_axis * diag && e.axes[1] >= cfg.ellipse_min_ratio * e.axes[0])
}

/// Assigns each region of at least `min_region` pixels to the model with the
/// smaller rmse: its own ellipse fit, or the lines of its split pieces.
pub fn initial_classify(mask: &BinaryMask, regions: Vec<Region>, cfg: &ClassifyConfig) -> ClassificationResult {
    let verdicts: Vec<Verdict> = regions
        .par_iter()
        .map(|reg| {
            if reg.size() < cfg.min_region {
                return Verdict::Small;
            }
            let pts = reg.points();
            let ellipse = plausible_ellipse(&pts, cfg, mask.dims());
            let whole = line_rmse(&reg.chain);
            let pieces = if whole <= cfg.rmse_line {
                vec![reg.clone()]
            } else {
                split_region(reg, cfg.rmse_line, cfg.min_region)
            };
            let pooled = (pieces
                .iter()
                .map(|p| p.size() as f64 * line_rmse(&p.chain).powi(2))
                .sum::<f64>()
                / reg.size() as f64)
                .sqrt();
            match ellipse {
                Some(e) if e.rmse + cfg.ellipse_margin < pooled => Verdict::Ellipse(e),
                _ => Verdict::Lines(pieces),
            }
        })
        .collect();

    let mut next_id = regions.iter().map(|r| r.id + 1).max().unwrap_or(0);
    let mut out_regions = Vec::new();
    let mut lines = Vec::new();
    let mut ellipses = Vec::new();
    let mut audit = Vec::new();
    let mut note = |region, stage, action| audit.push(AuditEntry { region, stage, action });
    for (reg, verdict) in regions.into_iter().zip(verdicts) {
        match verdict {
            Verdict::Small => {
                note(reg.id, Stage::Initial, Action::Unassigned);
                out_regions.push(reg);
            }
            Verdict::Ellipse(ellipse) => {
                note(reg.id, Stage::Initial, Action::AssignedEllipse);
                ellipses.push(EllipsePrimitive {
                    ellipse,
                    support: vec![reg.id],
                    pixels: reg.chain.clone(),
                });
                out_regions.push(reg);
            }
            Verdict::Lines(mut pieces) => {
                if pieces.len() > 1 {
                    for p in &mut pieces {
                        p.id = next_id;
                        next_id += 1;
                    }
                    note(reg.id, Stage::Split, Action::Split {
                        into: pieces.iter().map(|p| p.id).collect(),
                    });
                }
                for p in pieces {
                    match line_over(&p.chain).filter(|_| p.size() >= cfg.min_region) {
                        Some(line) => {
                            note(p.id, Stage::Initial, Action::AssignedLine);
                            lines.push(LinePrimitive {
                                line,
                                support: vec![p.id],
                                pixels: p.chain.clone(),
                            });
                        }
                        None => note(p.id, Stage::Initial, Action::Unassigned),
                    }
                    out_regions.push(p);
                }
            }
        }
    }
    out_regions.sort_by_key(|r| r.id);
    let mut result = ClassificationResult {
        labels: Vec::new(),
        mask: mask.clone(),
        regions: out_regions,
        lines,
        ellipses,
        audit,
    };
    relabel(&mut result, cfg);
    result
}

fn bbox_gap(a: &[usize; 4], b: &[usize; 4]) -> f64 {
    let gr = a[0].saturating_sub(b[2]).max(b[0].saturating_sub(a[2]));
    let gc = a[1].saturating_sub(b[3]).max(b[1].saturating_sub(a[3]));
    (gr as f64).hypot(gc as f64)
}

fn bbox_union(a: &[usize; 4], b: &[usize; 4]) -> [usize; 4] {
    [a[0].min(b[0]), a[1].min(b[1]), a[2].max(b[2]), a[3].max(b[3])]
}

fn window(result: &ClassificationResult, cfg: &ClassifyConfig) -> f64 {
    let (h, w) = result.dims();
    cfg.merge_window * (h as f64).hypot(w as f64)
}

fn region_lookup(regions: &[Region]) -> HashMap<usize, &Region> {
    regions.iter().map(|r| (r.id, r)).collect()
}

fn assigned_ids(result: &ClassificationResult) -> BTreeSet<usize> {
    result
        .lines
        .iter()
        .flat_map(|p| p.support.iter())
        .chain(result.ellipses.iter().flat_map(|p| p.support.iter()))
        .copied()
        .collect()
}

fn gather(lookup: &HashMap<usize, &Region>, support: &[usize]) -> Vec<(usize, usize)> {
    support.iter().flat_map(|id| lookup[id].chain.iter().copied()).collect()
}

struct LineGroup {
    units: Vec<usize>,
    moments: Moments,
    bbox: [usize; 4],
    is_line: bool,
    version: usize,
    alive: bool,
}

/// Greedy best-first merging of line primitives with each other and with
/// unassigned regions while the joint line fits within `rmse_merge`.
pub fn merge_lines(mut result: ClassificationResult, cfg: &ClassifyConfig) -> ClassificationResult {
    let regions = std::mem::take(&mut result.regions);
    let lookup = region_lookup(&regions);
    let assigned = assigned_ids(&result);
    let mut groups: Vec<LineGroup> = result
        .lines
        .iter()
        .map(|p| (p.support.clone(), true))
        .chain(
            regions
                .iter()
                .filter(|r| !assigned.contains(&r.id))
                .map(|r| (vec![r.id], false)),
        )
        .map(|(units, is_line)| {
            let px = gather(&lookup, &units);
            LineGroup {
                moments: Moments::of(&to_points(&px)),
                bbox: bbox_of(&px),
                units,
                is_line,
                version: 0,
                alive: true,
            }
        })
        .collect();
    let reach = window(&result, cfg);
    // Two unassigned groups must pass the stricter initial line test.
    let joint = |a: &LineGroup, b: &LineGroup| -> Option<f64> {
        if bbox_gap(&a.bbox, &b.bbox) > reach {
            return None;
        }
        let limit = if a.is_line || b.is_line { cfg.rmse_merge } else { cfg.rmse_line };
        let l = a.moments.merged(&b.moments).line().ok()?;
        (l.rmse <= limit).then_some(l.rmse)
    };
    // (rmse, i, j, version_i, version_j)
    let mut pairs = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            if let Some(e) = joint(&groups[i], &groups[j]) {
                pairs.push((e, i, j, 0, 0));
            }
        }
    }
    let mut new_audit = Vec::new();
    loop {
        pairs.retain(|&(_, i, j, vi, vj)| {
            groups[i].alive && groups[j].alive && groups[i].version == vi && groups[j].version == vj
        });
        let Some(&(_, i, j, _, _)) = pairs
            .iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))))
        else {
            break;
        };
        let taken = std::mem::take(&mut groups[j].units);
        let (m, bb) = (groups[j].moments, groups[j].bbox);
        groups[j].alive = false;
        let g = &mut groups[i];
        g.units.extend(&taken);
        g.units.sort_unstable();
        g.moments = g.moments.merged(&m);
        g.bbox = bbox_union(&g.bbox, &bb);
        g.is_line = g.is_line || g.moments.n >= cfg.min_region as f64;
        g.version += 1;
        for &u in &g.units {
            new_audit.push(AuditEntry {
                region: u,
                stage: Stage::MergeLines,
                action: Action::MergedLine { with: g.units.clone() },
            });
        }
        for k in 0..groups.len() {
            if k != i && groups[k].alive {
                if let Some(e) = joint(&groups[i], &groups[k]) {
                    let (a, b) = (i.min(k), i.max(k));
                    pairs.push((e, a, b, groups[a].version, groups[b].version));
                }
            }
        }
    }
    let lines = groups
        .iter()
        .filter(|g| g.alive && g.is_line)
        .filter_map(|g| {
            let pixels = gather(&lookup, &g.units);
            line_over(&pixels).map(|line| LinePrimitive {
                line,
                support: g.units.clone(),
                pixels,
            })
        })
        .collect();
    result.lines = lines;
    result.audit.extend(new_audit);
    drop(lookup);
    result.regions = regions;
    relabel(&mut result, cfg);
    result
}

/// Factor by which a joint ellipse must undercut both line rmses to turn a
/// pair of lines into an ellipse.
const ARC_SEED_GAIN: f64 = 0.5;

struct EllipseGroup {
    units: Vec<usize>,
    ellipse: Ellipse,
    /// Rmse when the group was formed; the slack is measured from here so
    /// that repeated absorptions cannot ratchet the fit quality down.
    base_rmse: f64,
    bbox: [usize; 4],
    version: usize,
    alive: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Owner {
    Free,
    Line(usize),
    Ellipse(usize),
}

/// Greedy best-first growth of ellipse primitives by other ellipses,
/// unassigned regions and regions currently supporting lines.
pub fn merge_ellipses(mut result: ClassificationResult, cfg: &ClassifyConfig) -> ClassificationResult {
    let regions = std::mem::take(&mut result.regions);
    let lookup = region_lookup(&regions);
    let reach = window(&result, cfg);
    let mut owner: HashMap<usize, Owner> = regions.iter().map(|r| (r.id, Owner::Free)).collect();
    let mut lines: Vec<Option<LinePrimitive>> = result.lines.drain(..).map(Some).collect();
    for (k, l) in lines.iter().enumerate() {
        for u in &l.as_ref().unwrap().support {
            owner.insert(*u, Owner::Line(k));
        }
    }
    let mut groups: Vec<EllipseGroup> = result
        .ellipses
        .drain(..)
        .enumerate()
        .map(|(k, p)| {
            for u in &p.support {
                owner.insert(*u, Owner::Ellipse(k));
            }
            EllipseGroup {
                bbox: bbox_of(&p.pixels),
                base_rmse: p.ellipse.rmse,
                units: p.support,
                ellipse: p.ellipse,
                version: 0,
                alive: true,
            }
        })
        .collect();
    let unit_bbox: HashMap<usize, [usize; 4]> = regions.iter().map(|r| (r.id, r.bbox())).collect();
    let dims = result.dims();
    let joint_fit = |a: &[usize], b: &[usize]| -> Option<Ellipse> {
        let mut px = gather(&lookup, a);
        px.extend(gather(&lookup, b));
        plausible_ellipse(&to_points(&px), cfg, dims)
    };
    let mut unit_cache: HashMap<(usize, usize, usize), Option<f64>> = HashMap::new();
    let mut pair_cache: HashMap<(usize, usize, usize, usize), Option<f64>> = HashMap::new();
    let mut new_audit = Vec::new();
    let unit_ids: Vec<usize> = regions.iter().map(|r| r.id).collect();
    // Gentle arcs of large ellipses split into line primitives; a pair of
    // lines seeds an ellipse when one conic at least halves both line errors.
    let line_boxes: Vec<[usize; 4]> = lines.iter().map(|l| bbox_of(&l.as_ref().unwrap().pixels)).collect();
    let mut seeds = Vec::new();
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let (la, lb) = (lines[a].as_ref().unwrap(), lines[b].as_ref().unwrap());
            if bbox_gap(&line_boxes[a], &line_boxes[b]) > reach {
                continue;
            }
            if let Some(e) = joint_fit(&la.support, &lb.support) {
                if e.rmse <= ARC_SEED_GAIN * la.line.rmse.min(lb.line.rmse) {
                    seeds.push((e.rmse, a, b, e));
                }
            }
        }
    }
    seeds.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    for (_, a, b, ellipse) in seeds {
        if lines[a].is_none() || lines[b].is_none() {
            continue;
        }
        let mut units = lines[a].take().unwrap().support;
        units.extend(lines[b].take().unwrap().support);
        units.sort_unstable();
        let k = groups.len();
        for &u in &units {
            owner.insert(u, Owner::Ellipse(k));
            new_audit.push(AuditEntry {
                region: u,
                stage: Stage::MergeEllipses,
                action: Action::MergedEllipse { with: units.clone() },
            });
        }
        groups.push(EllipseGroup {
            bbox: bbox_of(&gather(&lookup, &units)),
            base_rmse: ellipse.rmse,
            units,
            ellipse,
            version: 0,
            alive: true,
        });
    }
    loop {
        // Candidate: (joint rmse, ellipse index, other) with other = Ok(unit) | Err(ellipse).
        let mut best: Option<(f64, usize, std::result::Result<usize, usize>)> = None;
        let mut consider = |e: f64, a: usize, other: std::result::Result<usize, usize>| {
            let better = match &best {
                None => true,
                Some((be, ba, bo)) => e < *be || (e == *be && (a, other) < (*ba, *bo)),
            };
            if better {
                best = Some((e, a, other));
            }
        };
        for a in 0..groups.len() {
            if !groups[a].alive {
                continue;
            }
            let (ga, va) = (&groups[a], groups[a].version);
            for b in a + 1..groups.len() {
                let gb = &groups[b];
                if !gb.alive || bbox_gap(&ga.bbox, &gb.bbox) > reach {
                    continue;
                }
                let key = (a, va, b, gb.version);
                let joint = *pair_cache
                    .entry(key)
                    .or_insert_with(|| joint_fit(&ga.units, &gb.units).map(|e| e.rmse));
                if let Some(e) = joint {
                    if e <= cfg.rmse_merge && e <= ga.base_rmse.min(gb.base_rmse) + cfg.ellipse_slack {
                        consider(e, a, Err(b));
                    }
                }
            }
            for &u in &unit_ids {
                let current = match owner[&u] {
                    Owner::Ellipse(_) => continue,
                    Owner::Free => f64::INFINITY,
                    Owner::Line(k) => lines[k].as_ref().map_or(f64::INFINITY, |l| l.line.rmse),
                };
                if bbox_gap(&ga.bbox, &unit_bbox[&u]) > reach {
                    continue;
                }
                // The region must already follow the current ellipse, or the
                // refit must not get worse; a lenient refit alone would let
                // the conic bend onto a line.
                let joint = *unit_cache.entry((a, va, u)).or_insert_with(|| {
                    let predicted = ga.ellipse.rmse_of(&lookup[&u].points());
                    joint_fit(&ga.units, &[u])
                        .map(|e| e.rmse)
                        .filter(|&e| predicted <= cfg.rmse_line || e <= ga.base_rmse)
                });
                if let Some(e) = joint {
                    if e <= cfg.rmse_merge && e <= ga.base_rmse.min(current) + cfg.ellipse_slack {
                        consider(e, a, Ok(u));
                    }
                }
            }
        }
        let Some((_, a, other)) = best else {
            break;
        };
        let absorbed: Vec<usize> = match other {
            Err(b) => {
                groups[b].alive = false;
                groups[a].base_rmse = groups[a].base_rmse.min(groups[b].base_rmse);
                std::mem::take(&mut groups[b].units)
            }
            Ok(u) => {
                if let Owner::Line(k) = owner[&u] {
                    let remaining: Vec<usize> = lines[k]
                        .as_ref()
                        .map(|l| l.support.iter().copied().filter(|&x| x != u).collect())
                        .unwrap_or_default();
                    let pixels = gather(&lookup, &remaining);
                    lines[k] = if remaining.is_empty() {
                        None
                    } else {
                        let old = lines[k].as_ref().unwrap().line;
                        let line = line_over(&pixels).unwrap_or(StraightLine {
                            rmse: old.rmse_of(&to_points(&pixels)),
                            ..old
                        });
                        Some(LinePrimitive {
                            line,
                            support: remaining,
                            pixels,
                        })
                    };
                }
                vec![u]
            }
        };
        let g = &mut groups[a];
        g.units.extend(&absorbed);
        g.units.sort_unstable();
        let px = gather(&lookup, &g.units);
        if let Some(e) = plausible_ellipse(&to_points(&px), cfg, dims) {
            g.ellipse = e;
        }
        g.bbox = bbox_of(&px);
        g.version += 1;
        for &u in &g.units {
            owner.insert(u, Owner::Ellipse(a));
        }
        for &u in &absorbed {
            new_audit.push(AuditEntry {
                region: u,
                stage: Stage::MergeEllipses,
                action: Action::MergedEllipse { with: g.units.clone() },
            });
        }
    }
    result.lines = lines.into_iter().flatten().collect();
    result.ellipses = groups
        .into_iter()
        .filter(|g| g.alive)
        .map(|g| EllipsePrimitive {
            pixels: gather(&lookup, &g.units),
            ellipse: g.ellipse,
            support: g.units,
        })
        .collect();
    result.audit.extend(new_audit);
    drop(lookup);
    result.regions = regions;
    relabel(&mut result, cfg);
    result
}

/// One prune-and-refit pass: support pixels farther than `dist_max` from the
/// model are discarded, the model is refitted on the rest, and primitives
/// left with fewer than `min_region` pixels are dropped.
pub fn refine(mut result: ClassificationResult, cfg: &ClassifyConfig) -> ClassificationResult {
    let mut audit = Vec::new();
    let mut note_drop = |support: &[usize], action: Action| {
        for &u in support {
            audit.push(AuditEntry {
                region: u,
                stage: Stage::Refine,
                action: action.clone(),
            });
        }
    };
    let mut lines = Vec::new();
    for mut p in std::mem::take(&mut result.lines) {
        let before = p.pixels.len();
        p.pixels.retain(|&(r, c)| p.line.distance(r as f64, c as f64) <= cfg.dist_max);
        if p.pixels.len() < cfg.min_region {
            note_drop(&p.support, Action::Dropped);
            continue;
        }
        if p.pixels.len() < before {
            note_drop(&p.support, Action::Pruned { pixels: before - p.pixels.len() });
        }
        let pts = to_points(&p.pixels);
        p.line = match fit_line(&pts) {
            Ok(l) if l.rmse <= cfg.rmse_merge => l,
            _ => StraightLine {
                rmse: p.line.rmse_of(&pts),
                ..p.line
            },
        };
        lines.push(p);
    }
    let dims = result.dims();
    let mut ellipses = Vec::new();
    for mut p in std::mem::take(&mut result.ellipses) {
        let before = p.pixels.len();
        p.pixels.retain(|&(r, c)| p.ellipse.distance(r as f64, c as f64) <= cfg.dist_max);
        if p.pixels.len() < cfg.min_region {
            note_drop(&p.support, Action::Dropped);
            continue;
        }
        if p.pixels.len() < before {
            note_drop(&p.support, Action::Pruned { pixels: before - p.pixels.len() });
        }
        let pts = to_points(&p.pixels);
        p.ellipse = match plausible_ellipse(&pts, cfg, dims) {
            Some(e) if e.rmse <= cfg.rmse_merge => e,
            _ => Ellipse {
                rmse: p.ellipse.rmse_of(&pts),
                ..p.ellipse
            },
        };
        ellipses.push(p);
    }
    result.lines = lines;
    result.ellipses = ellipses;
    result.audit.extend(audit);
    relabel(&mut result, cfg);
    result
}

/// Labels every mask pixel with the primitive whose support passes within
/// `label_radius` and whose model is nearest, if that model is within
/// `dist_max`; other mask pixels are discarded.
fn relabel(result: &mut ClassificationResult, cfg: &ClassifyConfig) {
    let (h, w) = result.dims();
    let n_lines = result.lines.len();
    let mut owner = vec![u32::MAX; h * w];
    for (k, p) in result.lines.iter().enumerate() {
        for &(r, c) in &p.pixels {
            owner[r * w + c] = k as u32;
        }
    }
    for (k, p) in result.ellipses.iter().enumerate() {
        for &(r, c) in &p.pixels {
            owner[r * w + c] = (n_lines + k) as u32;
        }
    }
    let model_distance = |k: usize, r: usize, c: usize| {
        if k < n_lines {
            result.lines[k].line.distance(r as f64, c as f64)
        } else {
            result.ellipses[k - n_lines].ellipse.distance(r as f64, c as f64)
        }
    };
    let model_rmse = |k: usize| {
        if k < n_lines {
            result.lines[k].line.rmse
        } else {
            result.ellipses[k - n_lines].ellipse.rmse
        }
    };
    let rad = cfg.label_radius;
    let reach = rad.floor() as isize;
    let mask = &result.mask;
    let labels: Vec<PixelLabel> = (0..h * w)
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / w, i % w);
            if !mask.get(r, c) {
                return PixelLabel::Background;
            }
            let mut best: Option<(f64, usize)> = None;
            for dr in -reach..=reach {
                for dc in -reach..=reach {
                    let (nr, nc) = (r as isize + dr, c as isize + dc);
                    if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                        continue;
                    }
                    if ((dr * dr + dc * dc) as f64) > rad * rad {
                        continue;
                    }
                    let k = owner[nr as usize * w + nc as usize];
                    if k == u32::MAX {
                        continue;
                    }
                    let k = k as usize;
                    let d = model_distance(k, r, c);
                    if best.is_none_or(|(bd, bk)| d < bd || (d == bd && k < bk)) {
                        best = Some((d, k));
                    }
                }
            }
            match best {
                Some((d, k)) if d <= cfg.label_radius.max(2.0 * model_rmse(k)).min(cfg.dist_max) => {
                    if k < n_lines {
                        PixelLabel::Line
                    } else {
                        PixelLabel::Ellipse
                    }
                }
                _ => PixelLabel::Discarded,
            }
        })
        .collect();
    result.labels = labels;
}

/// Region extraction, initial classification, line merging, ellipse merging
/// and refinement, in that order.
pub fn classify_pipeline(mask: &BinaryMask, cfg: &ClassifyConfig) -> Result<ClassificationResult> {
    cfg.validate()?;
    let (regions, _) = extract_regions_with_skeleton(mask, cfg.gap_radius, cfg.spur_length);
    let draft = initial_classify(mask, regions, cfg);
    let merged = merge_ellipses(merge_lines(draft, cfg), cfg);
    Ok(refine(merged, cfg))
}
