use super::accumulator::{Cause, IndexAccumulator, Scope};
use crate::card_io::ReliabilityIndex;

/// Default number of histogram bins.
pub const DEFAULT_BINS: usize = 20;
/// Granularity of the unserved-energy bin width.
pub const EUE_BIN_STEP_MWH: f64 = 50.0;

/// Year counts for integer outcomes `0..=n_bins`, then one row for years
/// above `n_bins`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountHistogram {
    pub counts: Vec<u64>,
}

/// Unserved-energy histogram. Row 0 holds years with no unserved energy;
/// row k ≥ 1 holds years with energy in `(limit[k-1], limit[k]]`. The last row
/// is an overflow row and stays empty by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyHistogram {
    pub width_mwh: f64,
    pub limits_mwh: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AreaDistribution {
    pub scope: Scope,
    pub loss_days: CountHistogram,
    pub loss_hours: CountHistogram,
    pub energy: EnergyHistogram,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionTable {
    pub n_years: usize,
    pub n_bins: usize,
    /// One entry per area, then the pool.
    pub areas: Vec<AreaDistribution>,
}

fn probabilities(counts: &[u64], n: usize) -> Vec<f64> {
    counts.iter().map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 }).collect()
}

impl CountHistogram {
    pub fn build(values: impl Iterator<Item = u32>, n_bins: usize) -> Self {
        let mut counts = vec![0u64; n_bins + 2];
        for v in values {
            counts[(v as usize).min(n_bins + 1)] += 1;
        }
        CountHistogram { counts }
    }

    pub fn probabilities(&self, n: usize) -> Vec<f64> {
        probabilities(&self.counts, n)
    }
}

/// Equal bin width covering the largest observation, rounded up to a multiple
/// of 50 MWh.
pub fn energy_bin_width(max_mwh: f64, n_bins: usize) -> f64 {
    let raw = (max_mwh / n_bins as f64).ceil();
    ((raw / EUE_BIN_STEP_MWH).ceil() * EUE_BIN_STEP_MWH).max(EUE_BIN_STEP_MWH)
}

impl EnergyHistogram {
    pub fn build(values: &[f64], n_bins: usize) -> Self {
        let max = values.iter().copied().fold(0.0, f64::max);
        let width = energy_bin_width(max, n_bins);
        let limits_mwh: Vec<f64> = (0..n_bins + 2).map(|k| k as f64 * width).collect();
        let mut counts = vec![0u64; n_bins + 2];
        for &v in values {
            let row = if v <= 0.0 { 0 } else { ((v / width).ceil() as usize).clamp(1, n_bins + 1) };
            counts[row] += 1;
        }
        EnergyHistogram { width_mwh: width, limits_mwh, counts }
    }

    pub fn probabilities(&self, n: usize) -> Vec<f64> {
        probabilities(&self.counts, n)
    }
}

/// Histograms of yearly GT loss days, loss hours and unserved energy for
/// every area and the pool.
pub fn bin_distributions(acc: &IndexAccumulator, n_bins: usize) -> DistributionTable {
    let scopes = (0..acc.n_areas).map(Scope::Area).chain(std::iter::once(Scope::Pool));
    let areas = scopes
        .map(|scope| {
            let t = |y: &super::YearSample| *y.tally(scope, Cause::Gt);
            AreaDistribution {
                scope,
                loss_days: CountHistogram::build(acc.years.iter().map(|y| t(y).loss_days), n_bins),
                loss_hours: CountHistogram::build(acc.years.iter().map(|y| t(y).loss_hours), n_bins),
                energy: EnergyHistogram::build(&acc.samples(scope, ReliabilityIndex::Eue, Cause::Gt), n_bins),
            }
        })
        .collect();
    DistributionTable { n_years: acc.n_years(), n_bins, areas }
}
