use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};

/// Marker coordinates of one experiment, 1-based `(row, col)` in `[1,H] x [1,W]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedSet {
    pub experiment_index: usize,
    pub seeds: Vec<(usize, usize)>,
}

/// `N` independent uniform draws over the whole image.
pub fn gen_uniform_seeds<R: Rng + ?Sized>(
    height: usize,
    width: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if count == 0 || height == 0 || width == 0 {
        return Err(Error::invalid("uniform seeding needs N >= 1 on a non-empty image"));
    }
    Ok((0..count)
        .map(|_| (rng.random_range(1..=height), rng.random_range(1..=width)))
        .collect())
}

/// Cell boundaries `round(j * len / parts)` for `j = 0..=parts`.
pub fn lattice_bounds(len: usize, parts: usize) -> Vec<usize> {
    (0..=parts).map(|j| (2 * j * len + parts) / (2 * parts)).collect()
}

/// Where the seeding lattice is anchored in each experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LatticeOrigin {
    /// Fresh uniform origin inside the first cell, per experiment.
    #[default]
    Random,
    /// Same 0-based origin for every experiment.
    Fixed(usize, usize),
}

/// One uniform seed in each of the `rows x cols` cells of a wrap-around lattice.
pub fn gen_windowed_seeds<R: Rng + ?Sized>(
    height: usize,
    width: usize,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    gen_windowed_seeds_with_origin(height, width, rows, cols, LatticeOrigin::Random, rng)
}

pub fn gen_windowed_seeds_with_origin<R: Rng + ?Sized>(
    height: usize,
    width: usize,
    rows: usize,
    cols: usize,
    origin: LatticeOrigin,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("windowed seeding needs N_r, N_c >= 1"));
    }
    if rows > height || cols > width {
        return Err(Error::invalid(format!(
            "{rows}x{cols} lattice does not fit a {height}x{width} image"
        )));
    }
    let rb = lattice_bounds(height, rows);
    let cb = lattice_bounds(width, cols);
    let (r0, c0) = match origin {
        LatticeOrigin::Random => (rng.random_range(0..rb[1]), rng.random_range(0..cb[1])),
        LatticeOrigin::Fixed(r, c) => (r % height, c % width),
    };
    let mut seeds = Vec::with_capacity(rows * cols);
    for j in 0..rows {
        for k in 0..cols {
            let dr = rng.random_range(0..rb[j + 1] - rb[j]);
            let dc = rng.random_range(0..cb[k + 1] - cb[k]);
            let r = (r0 + rb[j] + dr) % height;
            let c = (c0 + cb[k] + dc) % width;
            seeds.push((r + 1, c + 1));
        }
    }
    Ok(seeds)
}

/// Dumps seed sets as `experiment,row,col` CSV (1-based coordinates).
pub fn write_seed_csv<W: Write>(sets: &[SeedSet], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::invalid(format!("seed csv: {e}"));
    wtr.write_record(["experiment", "row", "col"]).map_err(to_err)?;
    for set in sets {
        for (r, c) in &set.seeds {
            wtr.write_record([
                set.experiment_index.to_string(),
                r.to_string(),
                c.to_string(),
            ])
            .map_err(to_err)?;
        }
    }
    wtr.flush()
        .map_err(|e| Error::invalid(format!("seed csv: {e}")))?;
    Ok(())
}
