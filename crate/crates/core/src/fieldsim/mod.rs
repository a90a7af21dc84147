//! Torus simulation of isotropic Gaussian fields and their critical points, used to
//! cross-check the Kac-Rice predictions.

mod finder;
mod pairs;
mod run;
mod spectral;

pub use finder::{classify, find_critical_points, torus_delta, CriticalPoint, CriticalPoints, FinderConfig, DEGENERATE_DET};
pub use pairs::{pair_counts, poisson_points, PairBin, PairHistogram};
pub use run::{mean_se, SampleSummary, Simulation, SimulationResult};
pub use spectral::{
    rms_wavenumber, spectral_measure, Jet, Mode, SpectralMeasure, SpectralSampler, TorusField, DEFAULT_MODE_BUDGET, MAX_TRUNCATED_MASS,
};
