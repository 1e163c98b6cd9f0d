//! Marker-controlled watershed, random seed generation and the stochastic
//! watershed that averages many seeded runs into a line-probability image.

mod flood;
mod seeds;
mod stochastic;

pub use flood::{seeded_watershed, watershed_labels, watershed_labels_with, FloodLevels, LINE, UNREACHED};
pub use seeds::{
    gen_uniform_seeds, gen_windowed_seeds, gen_windowed_seeds_with_origin, lattice_bounds,
    write_seed_csv, LatticeOrigin, SeedSet,
};
pub use stochastic::{
    binarize_lines, experiment_rng, experiment_seeds, stochastic_watershed, ProbabilityImage,
    SeedingMode, StochasticConfig,
};

