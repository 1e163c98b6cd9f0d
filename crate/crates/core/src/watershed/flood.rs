use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::SeedSet;
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, RasterImage};

/// Label of a watershed-line pixel.
pub const LINE: i32 = -1;
/// Label of a pixel never reached by any flood (enclosed by line pixels).
pub const UNREACHED: i32 = 0;

#[inline]
fn neighbors4(idx: usize, h: usize, w: usize) -> impl Iterator<Item = usize> {
    let r = idx / w;
    let c = idx % w;
    let up = (r > 0).then(|| idx - w);
    let left = (c > 0).then(|| idx - 1);
    let right = (c + 1 < w).then(|| idx + 1);
    let down = (r + 1 < h).then(|| idx + w);
    [up, left, right, down].into_iter().flatten()
}

/// Sorted, deduplicated 0-based linear indices of the seeds.
pub(crate) fn seed_indices(gray: &RasterImage, seeds: &SeedSet) -> Result<Vec<usize>> {
    let (h, w) = gray.dims();
    let mut idx = Vec::with_capacity(seeds.seeds.len());
    for &(r, c) in &seeds.seeds {
        if r == 0 || c == 0 || r > h || c > w {
            return Err(Error::invalid(format!(
                "seed ({r}, {c}) outside [1, {h}] x [1, {w}]"
            )));
        }
        idx.push((r - 1) * w + (c - 1));
    }
    idx.sort_unstable();
    idx.dedup();
    if idx.is_empty() {
        return Err(Error::invalid("seeded watershed needs at least one seed"));
    }
    Ok(idx)
}

#[inline]
fn key(v: f64) -> u64 {
    // Non-negative doubles order like their bit patterns; `+ 0.0` folds -0.0.
    (v + 0.0).to_bits()
}

/// Images with at most this many distinct intensities are flooded with a
/// bucket queue; others with a binary heap. Both pop in the same order.
const MAX_BUCKETS: usize = 1 << 12;

/// Flooding priorities of an image: each pixel's rank among the distinct
/// intensities, or `None` when there are too many levels for buckets.
/// Computed once and shared by every flooding of the same image.
#[derive(Clone, Debug)]
pub struct FloodLevels {
    keys: Vec<u64>,
    ranks: Option<(Vec<u32>, usize)>,
}

impl FloodLevels {
    pub fn of(gray: &RasterImage) -> Result<Self> {
        gray.require_channels(1)?;
        let keys: Vec<u64> = gray.samples().iter().map(|&v| key(v)).collect();
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let ranks = (distinct.len() <= MAX_BUCKETS).then(|| {
            let ranks = keys.iter().map(|k| distinct.binary_search(k).expect("key present") as u32).collect();
            (ranks, distinct.len())
        });
        Ok(Self { keys, ranks })
    }
}

/// Priority queue ordered by `(intensity, insertion sequence)`.
enum Queue<'a> {
    Heap { keys: &'a [u64], heap: BinaryHeap<Reverse<(u64, u64, u32)>>, seq: u64 },
    Buckets { ranks: &'a [u32], buckets: Vec<VecDeque<u32>>, lowest: usize, len: usize },
}

impl<'a> Queue<'a> {
    fn new(levels: &'a FloodLevels, capacity: usize) -> Self {
        match &levels.ranks {
            Some((ranks, n)) => Queue::Buckets { ranks, buckets: vec![VecDeque::new(); *n], lowest: *n, len: 0 },
            None => Queue::Heap { keys: &levels.keys, heap: BinaryHeap::with_capacity(capacity), seq: 0 },
        }
    }

    fn push(&mut self, p: usize) {
        match self {
            Queue::Heap { keys, heap, seq } => {
                heap.push(Reverse((keys[p], *seq, p as u32)));
                *seq += 1;
            }
            Queue::Buckets { ranks, buckets, lowest, len } => {
                let r = ranks[p] as usize;
                buckets[r].push_back(p as u32);
                *lowest = (*lowest).min(r);
                *len += 1;
            }
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Queue::Heap { heap, .. } => heap.pop().map(|Reverse((_, _, p))| p as usize),
            Queue::Buckets { buckets, lowest, len, .. } => {
                if *len == 0 {
                    return None;
                }
                while buckets[*lowest].is_empty() {
                    *lowest += 1;
                }
                *len -= 1;
                buckets[*lowest].pop_front().map(|p| p as usize)
            }
        }
    }
}

/// Meyer flooding from markers with 4-connectivity.
///
/// Returns one label per pixel: basin labels `1..=K` numbered by the
/// row-major order of the distinct seed pixels, [`LINE`] where two basins
/// meet, [`UNREACHED`] for pixels walled off by line pixels. The queue is
/// ordered by `(intensity, insertion sequence)`.
pub fn watershed_labels(gray: &RasterImage, seeds: &SeedSet) -> Result<Vec<i32>> {
    watershed_labels_with(gray, &FloodLevels::of(gray)?, seeds)
}

/// [`watershed_labels`] with precomputed levels of `gray`.
pub fn watershed_labels_with(gray: &RasterImage, levels: &FloodLevels, seeds: &SeedSet) -> Result<Vec<i32>> {
    gray.require_channels(1)?;
    let (h, w) = gray.dims();
    if levels.keys.len() != h * w {
        return Err(Error::invalid("flood levels belong to an image of another size"));
    }
    let markers = seed_indices(gray, seeds)?;

    let mut labels = vec![UNREACHED; h * w];
    let mut queued = vec![false; h * w];
    for (k, &p) in markers.iter().enumerate() {
        labels[p] = k as i32 + 1;
        queued[p] = true;
    }
    let mut queue = Queue::new(levels, h * w / 4);
    for &p in &markers {
        for nb in neighbors4(p, h, w) {
            if !queued[nb] {
                queued[nb] = true;
                queue.push(nb);
            }
        }
    }

    while let Some(p) = queue.pop() {
        let mut label = UNREACHED;
        let mut conflict = false;
        for nb in neighbors4(p, h, w) {
            let l = labels[nb];
            if l > 0 {
                if label == UNREACHED {
                    label = l;
                } else if label != l {
                    conflict = true;
                }
            }
        }
        if conflict {
            labels[p] = LINE;
            continue;
        }
        debug_assert!(label > 0, "queued pixel without a labeled neighbor");
        labels[p] = label;
        for nb in neighbors4(p, h, w) {
            if !queued[nb] {
                queued[nb] = true;
                queue.push(nb);
            }
        }
    }
    Ok(labels)
}

/// Watershed-line mask of a marker-controlled flooding.
pub fn seeded_watershed(gray: &RasterImage, seeds: &SeedSet) -> Result<BinaryMask> {
    let labels = watershed_labels(gray, seeds)?;
    BinaryMask::from_bits(
        gray.height(),
        gray.width(),
        labels.iter().map(|l| *l == LINE).collect(),
    )
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Reference flooding: an explicit pending list scanned linearly for the
    /// minimum `(intensity, sequence)` entry on every step.
    pub(crate) fn flood_oracle(gray: &RasterImage, seeds: &[(usize, usize)]) -> Vec<i32> {
        let (h, w) = gray.dims();
        let v = |i: usize| gray.samples()[i];
        let mut pts: Vec<usize> = seeds.iter().map(|(r, c)| (r - 1) * w + (c - 1)).collect();
        pts.sort();
        pts.dedup();
        let mut labels = vec![0i32; h * w];
        let mut seen = vec![false; h * w];
        for (k, p) in pts.iter().enumerate() {
            labels[*p] = k as i32 + 1;
            seen[*p] = true;
        }
        let nbrs = |i: usize| {
            let (r, c) = ((i / w) as isize, (i % w) as isize);
            [(-1, 0), (0, -1), (0, 1), (1, 0)]
                .iter()
                .map(move |(dr, dc)| (r + dr, c + dc))
                .filter(|(a, b)| *a >= 0 && *b >= 0 && (*a as usize) < h && (*b as usize) < w)
                .map(|(a, b)| a as usize * w + b as usize)
                .collect::<Vec<_>>()
        };
        let mut pending: Vec<(f64, usize, usize)> = Vec::new();
        let mut seq = 0;
        for p in &pts {
            for n in nbrs(*p) {
                if !seen[n] {
                    seen[n] = true;
                    pending.push((v(n), seq, n));
                    seq += 1;
                }
            }
        }
        while !pending.is_empty() {
            let mut best = 0;
            for i in 1..pending.len() {
                let (a, b) = (pending[i], pending[best]);
                if a.0 < b.0 || (a.0 == b.0 && a.1 < b.1) {
                    best = i;
                }
            }
            let (_, _, p) = pending.remove(best);
            let found: Vec<i32> = nbrs(p).iter().map(|n| labels[*n]).filter(|l| *l > 0).collect();
            if found.iter().any(|l| *l != found[0]) {
                labels[p] = -1;
                continue;
            }
            labels[p] = found[0];
            for n in nbrs(p) {
                if !seen[n] {
                    seen[n] = true;
                    pending.push((v(n), seq, n));
                    seq += 1;
                }
            }
        }
        labels
    }

    fn set(seeds: Vec<(usize, usize)>) -> SeedSet {
        SeedSet {
            experiment_index: 0,
            seeds,
        }
    }

    #[test]
    fn ridge_separates_two_seeds() {
        let img = RasterImage::from_fn_gray(10, 11, |_, c| if c == 5 { 1.0 } else { 0.2 }).unwrap();
        let mask = seeded_watershed(&img, &set(vec![(3, 2), (8, 10)])).unwrap();
        for r in 0..10 {
            for c in 0..11 {
                assert_eq!(mask.get(r, c), c == 5, "({r},{c})");
            }
        }
    }

    #[test]
    fn single_seed_has_no_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let img = RasterImage::from_fn_gray(12, 12, |_, _| rng.random()).unwrap();
        let labels = watershed_labels(&img, &set(vec![(4, 4), (4, 4)])).unwrap();
        assert!(labels.iter().all(|l| *l == 1));
    }

    #[test]
    fn empty_or_out_of_range_seeds_fail() {
        let img = RasterImage::filled(4, 4, 1, 0.0).unwrap();
        assert!(seeded_watershed(&img, &set(vec![])).is_err());
        assert!(seeded_watershed(&img, &set(vec![(0, 1)])).is_err());
        assert!(seeded_watershed(&img, &set(vec![(1, 5)])).is_err());
        let rgb = RasterImage::filled(4, 4, 3, 0.0).unwrap();
        assert!(seeded_watershed(&rgb, &set(vec![(1, 1)])).is_err());
    }

    #[test]
    fn matches_oracle_on_8x8_three_seeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let img = RasterImage::from_fn_gray(8, 8, |_, _| rng.random()).unwrap();
            let seeds: Vec<_> = (0..3)
                .map(|_| (rng.random_range(1..=8), rng.random_range(1..=8)))
                .collect();
            let fast = watershed_labels(&img, &set(seeds.clone())).unwrap();
            assert_eq!(fast, flood_oracle(&img, &seeds));
        }
    }

    #[test]
    fn heap_and_bucket_queues_agree_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // 70 x 70 continuous values exceed the bucket limit; quantized ones do not.
        let smooth = RasterImage::from_fn_gray(70, 70, |_, _| rng.random()).unwrap();
        let coarse = RasterImage::from_fn_gray(70, 70, |_, _| (rng.random::<f64>() * 6.0).floor() / 6.0).unwrap();
        assert!(FloodLevels::of(&smooth).unwrap().ranks.is_none());
        assert!(FloodLevels::of(&coarse).unwrap().ranks.is_some());
        for img in [&smooth, &coarse] {
            let seeds: Vec<_> = (0..12).map(|_| (rng.random_range(1..=70), rng.random_range(1..=70))).collect();
            assert_eq!(watershed_labels(img, &set(seeds.clone())).unwrap(), flood_oracle(img, &seeds));
        }
    }

    #[test]
    fn levels_of_another_image_rejected() {
        let a = RasterImage::filled(4, 4, 1, 0.0).unwrap();
        let b = RasterImage::filled(4, 5, 1, 0.0).unwrap();
        let levels = FloodLevels::of(&a).unwrap();
        assert!(watershed_labels_with(&b, &levels, &set(vec![(1, 1)])).is_err());
    }

    #[test]
    fn distinct_basins_never_touch() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (h, w) = (30, 30);
        let img = RasterImage::from_fn_gray(h, w, |_, _| rng.random()).unwrap();
        let seeds: Vec<_> = (0..20)
            .map(|_| (rng.random_range(1..=h), rng.random_range(1..=w)))
            .collect();
        let labels = watershed_labels(&img, &set(seeds.clone())).unwrap();
        let seed_px: Vec<usize> = seeds.iter().map(|(r, c)| (r - 1) * w + c - 1).collect();
        for p in 0..h * w {
            if labels[p] <= 0 || seed_px.contains(&p) {
                continue;
            }
            for n in neighbors4(p, h, w) {
                assert!(labels[n] <= 0 || labels[n] == labels[p] || seed_px.contains(&n));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn invariant_to_seed_order(seed in any::<u64>(), n in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = RasterImage::from_fn_gray(12, 10, |_, _| (rng.random::<f64>() * 4.0).floor() / 4.0).unwrap();
            let mut seeds: Vec<_> = (0..n)
                .map(|_| (rng.random_range(1..=12), rng.random_range(1..=10)))
                .collect();
            let a = seeded_watershed(&img, &set(seeds.clone())).unwrap();
            seeds.reverse();
            seeds.rotate_left(n / 2);
            let b = seeded_watershed(&img, &set(seeds)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
