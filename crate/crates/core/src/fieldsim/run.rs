//! Many independent samples: counts, type fractions and pooled pair histograms.

use alloc::vec::Vec;
use num_traits::Float;

use super::finder::{find_critical_points, CriticalPoint, FinderConfig};
use super::pairs::{pair_counts, PairHistogram};
use super::spectral::{rms_wavenumber, SpectralSampler};
use crate::kacrice::BatchRunner;
use crate::types::{PointType, TypePair};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub sampler: SpectralSampler,
    pub n_samples: usize,
    /// Defaults to [`FinderConfig::for_field`].
    pub finder: Option<FinderConfig>,
    pub edges: Vec<f64>,
    pub typed: Option<TypePair>,
    pub keep_points: bool,
}

/// Per-sample bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub index: usize,
    /// Counts of minima, maxima and saddles.
    pub counts: [usize; 3],
    pub newton_failures: usize,
    pub degenerate: usize,
    pub pair_counts: Vec<u64>,
    pub points: Vec<CriticalPoint>,
}

impl SampleSummary {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts[0] as i64 + self.counts[1] as i64 - self.counts[2] as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub side: f64,
    pub n_modes: usize,
    pub truncated_mass: f64,
    pub rms_wavenumber: f64,
    pub finder: FinderConfig,
    pub samples: Vec<SampleSummary>,
    pub histogram: PairHistogram,
}

/// Mean and standard error of a list of values.
pub fn mean_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    if n == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SimulationResult {
    /// Critical points per unit area with its standard error across samples.
    pub fn density(&self) -> (f64, f64) {
        let area = self.side * self.side;
        mean_se(self.samples.iter().map(|s| s.total() as f64 / area))
    }

    /// Fraction of points of the given type, pooled over samples.
    pub fn type_fraction(&self, kind: PointType) -> f64 {
        let total: usize = self.samples.iter().map(|s| s.total()).sum();
        let k: usize = self.samples.iter().map(|s| s.counts[kind.index()]).sum();
        k as f64 / total as f64
    }

    /// Fraction of samples satisfying `#min + #max = #saddle`.
    pub fn morse_fraction(&self) -> f64 {
        self.samples.iter().filter(|s| s.euler_characteristic() == 0).count() as f64 / self.samples.len() as f64
    }

    pub fn newton_failures(&self) -> usize {
        self.samples.iter().map(|s| s.newton_failures).sum()
    }
}

impl Simulation {
    pub fn new(sampler: SpectralSampler, n_samples: usize, edges: Vec<f64>) -> Self {
        Simulation { sampler, n_samples, finder: None, edges, typed: None, keep_points: false }
    }

    /// Runs every sample as an independent job; results are reduced in sample order.
    pub fn run<R: BatchRunner + ?Sized>(&self, runner: &R) -> Result<SimulationResult> {
        let measure = self.sampler.measure()?;
        let side = self.sampler.side;
        let mut histogram = PairHistogram::new(self.edges.clone(), side)?;
        let rms = rms_wavenumber(&measure);
        let finder = self.finder.unwrap_or_else(|| FinderConfig::for_field(side, rms));
        let job = |i: usize| {
            let field = self.sampler.sample(&measure, i as u64);
            let cp = find_critical_points(&field, &finder);
            let labelled: Vec<([f64; 2], PointType)> = cp.points.iter().map(|p| (p.position, p.kind)).collect();
            SampleSummary {
                index: i,
                counts: PointType::ALL.map(|t| cp.count(t)),
                newton_failures: cp.newton_failures,
                degenerate: cp.degenerate,
                pair_counts: pair_counts(&labelled, &self.edges, side, self.typed),
                points: if self.keep_points { cp.points } else { Vec::new() },
            }
        };
        let samples = runner.run(self.n_samples, &job);
        for s in &samples {
            histogram.add_counts(&s.pair_counts);
        }
        Ok(SimulationResult {
            side,
            n_modes: measure.modes.len(),
            truncated_mass: measure.truncated_mass,
            rms_wavenumber: rms,
            finder,
            samples,
            histogram,
        })
    }
}
