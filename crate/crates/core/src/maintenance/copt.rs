use super::MaintenanceError;
use crate::card_io::GenUnit;

/// One row of a capacity outage probability table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoptEntry {
    pub outage_mw: f64,
    /// Probability that at least `outage_mw` is out.
    pub cum_probability: f64,
}

/// Capacity outage probability table of one area. Only outage levels that
/// carry probability mass are listed; the first entry is always 0 MW with
/// cumulative probability 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Copt {
    pub area: usize,
    pub resolution_mw: f64,
    pub entries: Vec<CoptEntry>,
}

impl Copt {
    /// `P[outage ≥ x]`.
    pub fn prob_at_least(&self, x: f64) -> f64 {
        self.entries.iter().find(|e| e.outage_mw >= x - 1e-9).map_or(0.0, |e| e.cum_probability)
    }
}

/// Convolve the outage distributions of independent two- or three-state units.
///
/// Capacities are rounded to the nearest multiple of `resolution_mw`; each
/// unit contributes outages `{0, derated, full}` with probabilities
/// `{1 − FOR − DFOR, DFOR, FOR}` using its capacity in `season`.
pub fn build_copt<'a, I>(units: I, area: usize, season: usize, resolution_mw: f64) -> Result<Copt, MaintenanceError>
where
    I: IntoIterator<Item = &'a GenUnit>,
{
    assert!(resolution_mw > 0.0, "COPT resolution must be positive");
    let mut dist = vec![1.0];
    let mut any = false;
    for u in units {
        any = true;
        let cap = u.cap_by_season[season];
        let full = (cap / resolution_mw).round() as usize;
        let der = (cap * u.der_pct / 100.0 / resolution_mw).round() as usize;
        let p_up = 1.0 - u.for_rate - u.dfor;
        let mut next = vec![0.0; dist.len() + full];
        for (k, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            next[k] += p_up * p;
            next[k + der] += u.dfor * p;
            next[k + full] += u.for_rate * p;
        }
        dist = next;
    }
    if !any {
        return Err(MaintenanceError::EmptyArea(area));
    }
    let mut entries = Vec::new();
    let mut cum = 0.0;
    for (k, &p) in dist.iter().enumerate().rev() {
        cum += p;
        if p > 0.0 || k == 0 {
            entries.push(CoptEntry { outage_mw: k as f64 * resolution_mw, cum_probability: cum });
        }
    }
    entries.reverse();
    entries[0].cum_probability = 1.0;
    // rounding can make the running sum creep above an earlier value
    for i in 1..entries.len() {
        entries[i].cum_probability = entries[i].cum_probability.min(entries[i - 1].cum_probability);
    }
    Ok(Copt { area, resolution_mw, entries })
}

/// Slope parameter of the COPT: `M = −1 / slope` of the least-squares line
/// through `(x, ln P[outage ≥ x])` for the entries with `lo ≤ x ≤ hi`.
pub fn fit_slope_m(copt: &Copt, fit_range: (f64, f64)) -> Result<f64, MaintenanceError> {
    let pts: Vec<(f64, f64)> = copt
        .entries
        .iter()
        .filter(|e| e.outage_mw >= fit_range.0 && e.outage_mw <= fit_range.1 && e.cum_probability > 0.0)
        .map(|e| (e.outage_mw, e.cum_probability.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(MaintenanceError::DegenerateFit(format!("{} point(s) in fit range", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(MaintenanceError::DegenerateFit("no spread in outage capacity".into()));
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(MaintenanceError::DegenerateFit(format!("non-negative slope {slope}")));
    }
    Ok(-1.0 / slope)
}

/// `EC = C − M ln R` with `R = 1 − FOR (1 − e^{−C/M})`.
pub fn effective_capacity(c_mw: f64, for_rate: f64, m: f64) -> Result<f64, MaintenanceError> {
    assert!(m > 0.0, "slope parameter must be positive");
    let r = 1.0 - for_rate * (1.0 - (-c_mw / m).exp());
    if !(r > 0.0) {
        return Err(MaintenanceError::NonpositiveR { c_mw, for_rate, m });
    }
    Ok(c_mw - m * r.ln())
}
