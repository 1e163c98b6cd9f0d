use serde::{Deserialize, Serialize};

use crate::imaging::BinaryMask;

/// Clockwise from north: N, NE, E, SE, S, SW, W, NW.
const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// A connected 1-px curve of the skeleton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    /// Pixels `(row, col)` in traversal order; consecutive entries are 8-neighbors.
    pub chain: Vec<(usize, usize)>,
}

impl Region {
    pub fn size(&self) -> usize {
        self.chain.len()
    }

    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.chain
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        to_points(&self.chain)
    }

    /// `(row_min, col_min, row_max, col_max)`.
    pub fn bbox(&self) -> [usize; 4] {
        bbox_of(&self.chain)
    }
}

pub(crate) fn to_points(pixels: &[(usize, usize)]) -> Vec<(f64, f64)> {
    pixels.iter().map(|&(r, c)| (r as f64, c as f64)).collect()
}

pub(crate) fn bbox_of(pixels: &[(usize, usize)]) -> [usize; 4] {
    let mut b = [usize::MAX, usize::MAX, 0, 0];
    for &(r, c) in pixels {
        b[0] = b[0].min(r);
        b[1] = b[1].min(c);
        b[2] = b[2].max(r);
        b[3] = b[3].max(c);
    }
    b
}

fn ring_bits(mask: &BinaryMask, r: usize, c: usize) -> [bool; 8] {
    RING.map(|(dr, dc)| mask.get_signed(r as isize + dr, c as isize + dc))
}

/// Topology-preserving thinning to a 1-px, 8-connected skeleton: border
/// pixels are peeled one direction at a time (N, S, E, W); within a pass every
/// border pixel that is not an end point and whose neighbors stay 8-connected
/// is removed at once.
pub fn thin(mask: &BinaryMask) -> BinaryMask {
    let mut out = mask.clone();
    loop {
        let mut changed = false;
        for side in [0usize, 4, 2, 6] {
            let doomed: Vec<_> = out
                .pixels()
                .filter(|&(r, c)| {
                    let p = ring_bits(&out, r, c);
                    !p[side] && p.iter().filter(|v| **v).count() >= 2 && connected_ring(&p)
                })
                .collect();
            for &(r, c) in &doomed {
                out.set(r, c, false);
            }
            changed |= !doomed.is_empty();
        }
        if !changed {
            return out;
        }
    }
}

fn neighbor_count(mask: &BinaryMask, r: usize, c: usize) -> usize {
    ring_bits(mask, r, c).iter().filter(|v| **v).count()
}

/// Removes corner pixels of diagonal staircases, which would otherwise look
/// like 3-neighbor junctions. A pixel goes when it is not an end point, its
/// set neighbors form one 8-connected arc, and two perpendicular 4-neighbors
/// are both set.
fn remove_staircases(mask: &mut BinaryMask) {
    let pixels: Vec<_> = mask.pixels().collect();
    for (r, c) in pixels {
        let p = ring_bits(mask, r, c);
        let b = p.iter().filter(|v| **v).count();
        if b < 2 {
            continue;
        }
        let corner = (0..4).any(|k| p[2 * k] && p[(2 * k + 2) % 8]);
        if !corner {
            continue;
        }
        if connected_ring(&p) {
            mask.set(r, c, false);
        }
    }
}

/// Whether the set ring positions are 8-connected to each other without the
/// center pixel.
fn connected_ring(p: &[bool; 8]) -> bool {
    // Ring cells as offsets; adjacency is 8-connectivity between offsets.
    let set: Vec<usize> = (0..8).filter(|&i| p[i]).collect();
    let Some(&start) = set.first() else {
        return true;
    };
    let mut seen = [false; 8];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(i) = stack.pop() {
        for &j in &set {
            let (a, b) = (RING[i], RING[j]);
            if !seen[j] && (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    set.iter().all(|&j| seen[j])
}

/// Thinned skeleton with staircase corners removed.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let mut skel = thin(mask);
    remove_staircases(&mut skel);
    skel
}

/// Skeleton with every pixel of more than two skeleton neighbors deleted.
pub fn remove_junctions(skel: &BinaryMask) -> BinaryMask {
    let mut out = skel.clone();
    for (r, c) in skel.pixels() {
        if neighbor_count(skel, r, c) > 2 {
            out.set(r, c, false);
        }
    }
    out
}

/// Dilation by a `(2 radius + 1)`-square. Thinning the result recovers the
/// curves with breaks of up to `2 radius` pixels bridged.
pub fn bridge_gaps(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let r = radius as isize;
    let at = |m: &BinaryMask, row: isize, col: isize| row >= 0 && col >= 0 && row < h as isize && col < w as isize && m.get(row as usize, col as usize);
    let rows = BinaryMask::from_fn(h, w, |row, col| (-r..=r).any(|d| at(mask, row as isize, col as isize + d)));
    BinaryMask::from_fn(h, w, |row, col| (-r..=r).any(|d| at(&rows, row as isize + d, col as isize)))
}

/// Skeleton with short end branches deleted: walking from an end point
/// through 2-neighbor pixels, a branch that reaches a junction within
/// `max_len` pixels is removed (junction kept). All branches are judged on
/// the input skeleton, so the result does not depend on visiting order.
pub fn prune_spurs(skel: &BinaryMask, max_len: usize) -> BinaryMask {
    let mut out = skel.clone();
    if max_len == 0 {
        return out;
    }
    for (r0, c0) in skel.pixels() {
        if neighbor_count(skel, r0, c0) != 1 {
            continue;
        }
        let mut branch = vec![(r0, c0)];
        let mut prev = (r0, c0);
        let mut cur = neighbors(skel, r0, c0).next().expect("end point has a neighbor");
        loop {
            let degree = neighbor_count(skel, cur.0, cur.1);
            if degree >= 3 {
                for &(r, c) in &branch {
                    out.set(r, c, false);
                }
                break;
            }
            if degree != 2 || branch.len() >= max_len {
                break;
            }
            branch.push(cur);
            let next = neighbors(skel, cur.0, cur.1).find(|&q| q != prev);
            match next {
                Some(q) => (prev, cur) = (cur, q),
                None => break,
            }
        }
    }
    out
}

/// 8-connected components of a junction-free skeleton, each with an ordered
/// chain. Ids follow the raster order of each component's first pixel.
pub fn trace_regions(curves: &BinaryMask) -> Vec<Region> {
    let (h, w) = curves.dims();
    let mut seen = vec![false; h * w];
    let mut regions = Vec::new();
    let mut component = Vec::new();
    for (r0, c0) in curves.pixels() {
        if seen[r0 * w + c0] {
            continue;
        }
        // Flood the component to find an end point.
        component.clear();
        let mut stack = vec![(r0, c0)];
        seen[r0 * w + c0] = true;
        while let Some((r, c)) = stack.pop() {
            component.push((r, c));
            for q in neighbors(curves, r, c) {
                if !seen[q.0 * w + q.1] {
                    seen[q.0 * w + q.1] = true;
                    stack.push(q);
                }
            }
        }
        component.sort_unstable();
        let start = component
            .iter()
            .copied()
            .find(|&(r, c)| neighbor_count(curves, r, c) <= 1)
            .unwrap_or(component[0]);
        let chain = walk(curves, start, component.len());
        regions.push(Region {
            id: regions.len(),
            chain,
        });
    }
    regions
}

fn neighbors(mask: &BinaryMask, r: usize, c: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    RING.iter().filter_map(move |&(dr, dc)| {
        let (nr, nc) = (r as isize + dr, c as isize + dc);
        mask.get_signed(nr, nc).then_some((nr as usize, nc as usize))
    })
}

fn walk(mask: &BinaryMask, start: (usize, usize), len: usize) -> Vec<(usize, usize)> {
    let mut chain = Vec::with_capacity(len);
    let mut visited = std::collections::HashSet::with_capacity(len);
    let mut cur = start;
    loop {
        chain.push(cur);
        visited.insert(cur);
        // Prefer 4-neighbors so that corners are not skipped.
        let next = neighbors(mask, cur.0, cur.1)
            .filter(|q| !visited.contains(q))
            .min_by_key(|q| (q.0 != cur.0 && q.1 != cur.1, *q));
        match next {
            Some(q) => cur = q,
            None => break,
        }
    }
    chain
}

/// Gap closing, thinning, spur pruning, junction deletion and component
/// tracing. Returns the regions and the pruned skeleton they were cut from
/// (before junction deletion). With gap closing the skeleton may run up to
/// `gap_radius` pixels off the mask.
pub fn extract_regions_with_skeleton(mask: &BinaryMask, gap_radius: usize, spur_length: usize) -> (Vec<Region>, BinaryMask) {
    let mut skel = skeletonize(&bridge_gaps(mask, gap_radius));
    if spur_length > 0 {
        // Pruning can leave corner pixels that were branch points before.
        skel = prune_spurs(&skel, spur_length);
        remove_staircases(&mut skel);
    }
    let curves = remove_junctions(&skel);
    (trace_regions(&curves), skel)
}

/// Regions without gap closing or spur pruning.
pub fn extract_regions(mask: &BinaryMask) -> Vec<Region> {
    extract_regions_with_skeleton(mask, 0, 0).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn is_8_adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
        a != b && a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1
    }

    /// Union-find connected components with 8-adjacency over pixel pairs.
    fn component_oracle(mask: &BinaryMask) -> usize {
        let pts: Vec<_> = mask.pixels().collect();
        let mut parent: Vec<usize> = (0..pts.len()).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            let mut i = i;
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if is_8_adjacent(pts[i], pts[j]) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        (0..pts.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    fn check_region_invariants(mask: &BinaryMask, regions: &[Region]) {
        let mut all = std::collections::HashSet::new();
        for reg in regions {
            for w in reg.chain.windows(2) {
                assert!(is_8_adjacent(w[0], w[1]), "chain jump {:?}", w);
            }
            for &p in &reg.chain {
                assert!(mask.get(p.0, p.1));
                assert!(all.insert(p), "pixel visited twice");
                let n = reg.chain.iter().filter(|q| is_8_adjacent(p, **q)).count();
                assert!(n <= 2);
            }
        }
    }

    #[test]
    fn bridge_gaps_is_a_square_dilation() {
        let m = BinaryMask::from_fn(12, 15, |r, c| (r * 7 + c * 3) % 11 == 0);
        for radius in 0..3 {
            let out = bridge_gaps(&m, radius);
            let rad = radius as isize;
            for (r, c) in (0..12).flat_map(|r| (0..15).map(move |c| (r, c))) {
                let oracle = (-rad..=rad).any(|dr| (-rad..=rad).any(|dc| m.get_signed(r as isize + dr, c as isize + dc)));
                assert_eq!(out.get(r, c), oracle, "radius {radius} at ({r}, {c})");
            }
        }
    }

    #[test]
    fn bridge_gaps_joins_a_broken_line() {
        let m = BinaryMask::from_fn(9, 40, |r, c| r == 4 && c != 20 && c != 21 && (5..35).contains(&c));
        assert_eq!(extract_regions(&m).len(), 2);
        assert_eq!(extract_regions_with_skeleton(&m, 1, 0).0.len(), 1);
    }

    #[test]
    fn prune_spurs_cuts_short_branches_only() {
        // Horizontal bar with a 3-px spur and a 12-px branch hanging off it.
        let m = BinaryMask::from_fn(30, 60, |r, c| {
            (r == 5 && (5..55).contains(&c)) || (c == 15 && (6..9).contains(&r)) || (c == 40 && (6..18).contains(&r))
        });
        let out = prune_spurs(&m, 6);
        assert!(out.is_subset_of(&m));
        // The spur pixel touching the bar is itself a junction and stays.
        assert!((7..9).all(|r| !out.get(r, 15)));
        assert!((6..18).all(|r| out.get(r, 40)));
        assert_eq!(out.count(), m.count() - 2);
        // Free-standing segments have no junction to reach.
        let seg = BinaryMask::from_fn(10, 10, |r, c| r == 2 && c < 4);
        assert_eq!(prune_spurs(&seg, 6), seg);
        assert_eq!(prune_spurs(&m, 0), m);
    }

    #[test]
    fn empty_mask() {
        assert!(extract_regions(&BinaryMask::new(10, 10)).is_empty());
    }

    #[test]
    fn plus_sign_gives_four_arms() {
        let m = BinaryMask::from_fn(41, 41, |r, c| (r == 20 && (5..36).contains(&c)) || (c == 20 && (5..36).contains(&r)));
        let regions = extract_regions(&m);
        assert_eq!(regions.len(), 4);
        assert!(regions.iter().all(|r| !r.chain.contains(&(20, 20))));
        check_region_invariants(&m, &regions);
    }

    #[test]
    fn straight_segment_chain_runs_end_to_end() {
        let m = BinaryMask::from_fn(10, 60, |r, c| r == 4 && (10..50).contains(&c));
        let regions = extract_regions(&m);
        assert_eq!(regions.len(), 1);
        let ch = &regions[0].chain;
        assert_eq!(ch.len(), 40);
        assert_eq!(ch[0], (4, 10));
        assert_eq!(*ch.last().unwrap(), (4, 49));
    }

    #[test]
    fn thick_bar_thins_to_one_curve() {
        let m = BinaryMask::from_fn(20, 80, |r, c| (8..11).contains(&r) && (5..75).contains(&c));
        let skel = skeletonize(&m);
        assert!(skel.is_subset_of(&m));
        let regions = extract_regions(&m);
        assert_eq!(regions.len(), 1);
        assert!(regions[0].size() >= 60);
        check_region_invariants(&skel, &regions);
    }

    #[test]
    fn diagonal_staircase_is_not_a_junction() {
        // 4-connected staircase: (i,i) and (i,i+1).
        let m = BinaryMask::from_fn(50, 50, |r, c| c == r || c == r + 1);
        let regions = extract_regions(&m);
        assert_eq!(regions.len(), 1);
        assert!(regions[0].size() >= 45);
    }

    #[test]
    fn closed_ring_is_one_loop() {
        let m = BinaryMask::from_fn(60, 60, |r, c| {
            let d = ((r as f64 - 30.0).powi(2) + (c as f64 - 30.0).powi(2)).sqrt();
            (19.0..21.5).contains(&d)
        });
        let regions = extract_regions(&m);
        assert_eq!(regions.len(), 1);
        let ch = &regions[0].chain;
        assert!(is_8_adjacent(ch[0], *ch.last().unwrap()));
        check_region_invariants(&m, &regions);
    }

    #[test]
    fn pitch_card_region_count_matches_oracle() {
        // Touchline, halfway line and center circle drawn 2 px wide.
        let m = BinaryMask::from_fn(120, 200, |r, c| {
            let d = ((r as f64 - 60.0).powi(2) + (c as f64 - 100.0).powi(2)).sqrt();
            (10..12).contains(&r) && (5..195).contains(&c)
                || (99..101).contains(&c) && (10..115).contains(&r)
                || (24.0..26.0).contains(&d)
        });
        let skel = skeletonize(&m);
        let curves = remove_junctions(&skel);
        let regions = trace_regions(&curves);
        assert_eq!(regions.len(), component_oracle(&curves));
        assert!(regions.len() >= 6);
        check_region_invariants(&curves, &regions);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn regions_are_simple_chains(bits in proptest::collection::vec(any::<bool>(), 14 * 14)) {
            let m = BinaryMask::from_bits(14, 14, bits).unwrap();
            let skel = skeletonize(&m);
            prop_assert!(skel.is_subset_of(&m));
            let curves = remove_junctions(&skel);
            let regions = trace_regions(&curves);
            prop_assert_eq!(regions.len(), component_oracle(&curves));
            prop_assert_eq!(regions.iter().map(|r| r.size()).sum::<usize>(), curves.count());
            check_region_invariants(&curves, &regions);
        }
    }
}
