//! Compute binning, Pareto-frontier extraction, power-law fitting, and
//! extrapolation, plus the distributed-training efficiency metric.
//!
//! The pipeline mirrors how scaling trends are read off a compute/error
//! scatter plot: total compute budgets of trained models are not exactly
//! aligned, so the compute scale is divided into log-spaced bins, the best
//! (lowest-error) model is selected from each bin, and a power law
//! `E = beta * C^alpha` is fitted to that frontier by ordinary least squares
//! in log-log space. Extrapolation past the fitted domain is permitted but
//! always flagged; predictions far outside the observed range should be
//! treated with caution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{
    ArchRegistry, ComputePoint, ErrorConvention, ExperimentRecord, Family, to_points,
};
use crate::util::kahan_sum;

/// Equal-width binning of the log10 compute axis, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub num_bins: usize,
    /// Lower bound, log10 GMAC.
    pub lo: f64,
    /// Upper bound, log10 GMAC.
    pub hi: f64,
}

/// Default bin count when spanning a data range.
pub const DEFAULT_NUM_BINS: usize = 8;

impl BinSpec {
    pub fn new(num_bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if num_bins == 0 {
            return Err(Error::Range("num_bins must be >= 1".into()));
        }
        if lo >= hi || lo.is_nan() || hi.is_nan() || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Range(format!(
                "bin bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { num_bins, lo, hi })
    }

    /// Spec spanning the log10 range of `points`. A single distinct compute
    /// value gets a unit-width interval centred on it.
    pub fn covering(points: &[ComputePoint], num_bins: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Range("cannot cover an empty point set".into()));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in points {
            if p.compute_gmac <= 0.0 || p.compute_gmac.is_nan() {
                return Err(Error::Range(format!(
                    "non-positive compute {} at point {}",
                    p.compute_gmac, p.source
                )));
            }
            let x = p.compute_gmac.log10();
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        Self::new(num_bins, lo, hi)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.num_bins as f64
    }

    /// Bin index for a compute value, or a range error if it falls outside
    /// [lo, hi]. The point with log10 C = hi goes to the last bin.
    pub fn index_of(&self, compute_gmac: f64) -> Result<usize> {
        if compute_gmac <= 0.0 || compute_gmac.is_nan() {
            return Err(Error::Range(format!(
                "non-positive compute {compute_gmac}"
            )));
        }
        let x = compute_gmac.log10();
        if x < self.lo || x > self.hi {
            return Err(Error::Range(format!(
                "log10 compute {x} outside bin range [{}, {}]",
                self.lo, self.hi
            )));
        }
        let idx = ((x - self.lo) / (self.hi - self.lo) * self.num_bins as f64).floor() as usize;
        Ok(idx.min(self.num_bins - 1))
    }
}

/// Groups points into bins; empty bins are omitted. Point order within a bin
/// follows input order.
pub fn bin_compute(
    points: &[ComputePoint],
    spec: &BinSpec,
) -> Result<Vec<(usize, Vec<ComputePoint>)>> {
    let mut bins: Vec<Vec<ComputePoint>> = vec![Vec::new(); spec.num_bins];
    for p in points {
        let idx = spec.index_of(p.compute_gmac).map_err(|e| {
            Error::Range(format!("point {} (C = {}): {e}", p.source, p.compute_gmac))
        })?;
        bins[idx].push(p.clone());
    }
    Ok(bins
        .into_iter()
        .enumerate()
        .filter(|(_, pts)| !pts.is_empty())
        .collect())
}

/// Best (lowest-error) point from each non-empty bin. Ties are broken by
/// smaller compute, then by input order.
pub fn pareto_frontier(binned: &[(usize, Vec<ComputePoint>)]) -> Result<Vec<ComputePoint>> {
    if binned.iter().all(|(_, pts)| pts.is_empty()) {
        return Err(Error::Domain("no non-empty bins".into()));
    }
    let mut frontier = Vec::new();
    for (_, pts) in binned {
        let Some(mut best) = pts.first() else {
            continue;
        };
        for p in &pts[1..] {
            if p.error_percent < best.error_percent
                || (p.error_percent == best.error_percent && p.compute_gmac < best.compute_gmac)
            {
                best = p;
            }
        }
        frontier.push(best.clone());
    }
    Ok(frontier)
}

/// Fitted power law `E = beta * C^alpha` with log-log fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Exponent (slope in log-log space).
    pub alpha: f64,
    /// Coefficient (10^intercept), always positive.
    pub beta: f64,
    pub n_points: usize,
    /// Coefficient of determination of the log-log regression.
    pub r_squared: f64,
    /// [min C, max C] over the fitted points, in GMACs.
    pub fit_domain: [f64; 2],
}

/// Ordinary least squares on (log10 C, log10 E).
pub fn fit_power_law(frontier: &[ComputePoint]) -> Result<PowerLawFit> {
    if frontier.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 points, got {}",
            frontier.len()
        )));
    }
    let mut xs = Vec::with_capacity(frontier.len());
    let mut ys = Vec::with_capacity(frontier.len());
    let mut c_min = f64::INFINITY;
    let mut c_max = f64::NEG_INFINITY;
    for p in frontier {
        if p.compute_gmac <= 0.0 || p.compute_gmac.is_nan() {
            return Err(Error::Domain(format!(
                "non-positive compute {} at point {}",
                p.compute_gmac, p.source
            )));
        }
        if p.error_percent <= 0.0 || p.error_percent.is_nan() {
            return Err(Error::Domain(format!(
                "error {} at point {} is not positive; log is undefined",
                p.error_percent, p.source
            )));
        }
        xs.push(p.compute_gmac.log10());
        ys.push(p.error_percent.log10());
        c_min = c_min.min(p.compute_gmac);
        c_max = c_max.max(p.compute_gmac);
    }
    let n = xs.len() as f64;
    let x_mean = kahan_sum(xs.iter().copied()) / n;
    let y_mean = kahan_sum(ys.iter().copied()) / n;
    let sxx = kahan_sum(xs.iter().map(|x| (x - x_mean) * (x - x_mean)));
    let sxy = kahan_sum(xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)));
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(
            "all points share one compute value".into(),
        ));
    }
    let alpha = sxy / sxx;
    let intercept = y_mean - alpha * x_mean;
    let beta = 10f64.powf(intercept);
    if !beta.is_finite() || beta <= 0.0 {
        // Near-vertical fits (nearly coincident computes) push the intercept
        // outside the representable range.
        return Err(Error::Numeric(format!(
            "fit coefficient 10^{intercept} is not representable"
        )));
    }
    let ss_res = kahan_sum(
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| {
                let r = y - (intercept + alpha * x);
                r * r
            }),
    );
    let ss_tot = kahan_sum(ys.iter().map(|y| (y - y_mean) * (y - y_mean)));
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        // All errors identical: the horizontal fit is exact.
        1.0
    };
    Ok(PowerLawFit {
        alpha,
        beta,
        n_points: frontier.len(),
        r_squared,
        fit_domain: [c_min, c_max],
    })
}

/// Model performance predicted at one compute budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub compute_gmac: f64,
    pub predicted_error: f64,
    pub predicted_metric: f64,
    /// True when the compute lies outside the fitted domain.
    pub extrapolated: bool,
}

/// Evaluates the fitted power law at a compute budget.
pub fn predict_error(fit: &PowerLawFit, compute_gmac: f64) -> Result<Prediction> {
    if compute_gmac <= 0.0 || compute_gmac.is_nan() {
        return Err(Error::Domain(format!(
            "compute must be positive, got {compute_gmac}"
        )));
    }
    let predicted_error = fit.beta * compute_gmac.powf(fit.alpha);
    Ok(Prediction {
        compute_gmac,
        predicted_error,
        predicted_metric: 100.0 - predicted_error,
        extrapolated: compute_gmac < fit.fit_domain[0] || compute_gmac > fit.fit_domain[1],
    })
}

/// One measured throughput sample of data-parallel training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSample {
    pub n_gpus: u32,
    /// Total measured throughput in images/second across all workers.
    pub throughput: f64,
}

impl ThroughputSample {
    pub fn new(n_gpus: u32, throughput: f64) -> Result<Self> {
        if n_gpus == 0 {
            return Err(Error::Range("n_gpus must be >= 1".into()));
        }
        if throughput <= 0.0 || throughput.is_nan() {
            return Err(Error::Range(format!(
                "throughput must be positive, got {throughput}"
            )));
        }
        Ok(Self { n_gpus, throughput })
    }
}

/// Scaling efficiency per sample, in percent of ideal linear scaling:
/// `E(N) = 100 * T(N) / ((N / b) * T(b))` for baseline unit `b`.
///
/// With `baseline = None` the smallest n_gpus present is used. The baseline
/// sample itself is normalized to exactly 100.
pub fn scaling_efficiency(
    samples: &[ThroughputSample],
    baseline: Option<u32>,
) -> Result<Vec<(u32, f64)>> {
    let base_n = match baseline {
        Some(b) => b,
        None => samples
            .iter()
            .map(|s| s.n_gpus)
            .min()
            .ok_or_else(|| Error::Range("empty throughput sample list".into()))?,
    };
    let base = samples
        .iter()
        .find(|s| s.n_gpus == base_n)
        .ok_or(Error::MissingBaseline(base_n))?;
    Ok(samples
        .iter()
        .map(|s| {
            let eff =
                (100.0 * s.throughput) / ((s.n_gpus as f64 / base_n as f64) * base.throughput);
            (s.n_gpus, eff)
        })
        .collect())
}

/// One bin in a fit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub index: usize,
    pub log10_lo: f64,
    pub log10_hi: f64,
    pub n_points: usize,
    pub frontier_compute_gmac: f64,
    pub frontier_error: f64,
}

/// One prediction row in a fit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub arch: String,
    pub samples_seen: u64,
    pub compute_gmac: f64,
    pub metric: f64,
    pub extrapolated: bool,
}

/// Machine-readable fit report; field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub task: String,
    pub family: Family,
    pub alpha: f64,
    pub beta: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub fit_domain: [f64; 2],
    pub bins: Vec<BinSummary>,
    pub predictions: Vec<PredictionEntry>,
}

/// Runs the full pipeline (points, bins over the data range, frontier, fit)
/// for one (task, family) selection and optionally evaluates predictions for
/// `(arch, samples_seen)` targets.
pub fn build_fit_report(
    records: &[ExperimentRecord],
    task: &str,
    family: Family,
    registry: &ArchRegistry,
    num_bins: usize,
    targets: &[(String, u64)],
) -> Result<FitReport> {
    let points = to_points(records, task, family, registry, ErrorConvention::default())?;
    if points.is_empty() {
        return Err(Error::Domain(format!(
            "no points for task `{task}`, family `{family}`"
        )));
    }
    let spec = BinSpec::covering(&points, num_bins)?;
    let binned = bin_compute(&points, &spec)?;
    let frontier = pareto_frontier(&binned)?;
    let fit = fit_power_law(&frontier)?;
    let bins = binned
        .iter()
        .zip(&frontier)
        .map(|((index, pts), best)| BinSummary {
            index: *index,
            log10_lo: spec.lo + *index as f64 * spec.width(),
            log10_hi: spec.lo + (*index as f64 + 1.0) * spec.width(),
            n_points: pts.len(),
            frontier_compute_gmac: best.compute_gmac,
            frontier_error: best.error_percent,
        })
        .collect();
    let mut predictions = Vec::new();
    for (arch, samples_seen) in targets {
        let spec = registry.lookup(arch)?;
        let compute = spec.gmacs_per_sample * *samples_seen as f64;
        let p = predict_error(&fit, compute)?;
        predictions.push(PredictionEntry {
            arch: arch.clone(),
            samples_seen: *samples_seen,
            compute_gmac: compute,
            metric: p.predicted_metric,
            extrapolated: p.extrapolated,
        });
    }
    Ok(FitReport {
        task: task.to_string(),
        family,
        alpha: fit.alpha,
        beta: fit.beta,
        r_squared: fit.r_squared,
        n_points: fit.n_points,
        fit_domain: fit.fit_domain,
        bins,
        predictions,
    })
}
