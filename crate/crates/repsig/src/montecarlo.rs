//! Discrete-event Monte Carlo oracle for the repairable model.
//!
//! Every replication draws from its own counter-based ChaCha8 stream keyed by
//! (master seed, replication index), and all reductions are integer counts,
//! so a run is bit-reproducible for a fixed (seed, replications, grid)
//! regardless of how many workers execute it or how the work is batched.
//! With the `parallel` feature the batches run on the rayon pool; without it
//! they run sequentially and produce the same bytes.

use crate::distributions::{xi_exponential, ErlangSumParams, Rates};
use crate::error::{Error, Result};
use crate::reliability::{reliability_curve, RepairableSpec, Topology};
use crate::signature::Truncation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Replications per work item. Results never depend on this; it only
/// amortizes scheduling overhead.
const BATCH_SIZE: u64 = 4096;

/// A replication that survives this many inter-failure gaps is aborted and
/// counted as capped instead of looping forever when ξ ≈ 1.
pub const GAP_CAP: u64 = 1_000_000;

/// How the first inter-failure time of the parallel pair is drawn.
///
/// The analytic model treats every gap as Exp(λ). `RacingFirstGap` instead
/// draws the first gap as the minimum of two fresh component lifetimes,
/// i.e. Exp(2λ), leaving later gaps untouched; it is provided for
/// exploration only and no analytic value in this crate asserts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapModel {
    #[default]
    PaperIid,
    RacingFirstGap,
}

/// Inputs of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    rates: Rates,
    replications: u64,
    seed: u64,
    time_grid: Vec<f64>,
    gap_model: GapModel,
}

impl SimConfig {
    pub fn new(rates: Rates, replications: u64, seed: u64, time_grid: Vec<f64>) -> Result<Self> {
        if replications < 1 {
            return Err(Error::InvalidParameter(
                "at least one replication is required".into(),
            ));
        }
        for pair in time_grid.windows(2) {
            if pair[1] < pair[0] {
                return Err(Error::InvalidParameter(
                    "time grid must be sorted ascending".into(),
                ));
            }
        }
        if let Some(&first) = time_grid.first() {
            if first < 0.0 {
                return Err(Error::NegativeTime(first));
            }
        }
        Ok(Self {
            rates,
            replications,
            seed,
            time_grid,
            gap_model: GapModel::default(),
        })
    }

    pub fn with_gap_model(mut self, gap_model: GapModel) -> Self {
        self.gap_model = gap_model;
        self
    }

    pub fn rates(&self) -> Rates {
        self.rates
    }

    pub fn replications(&self) -> u64 {
        self.replications
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    pub fn gap_model(&self) -> GapModel {
        self.gap_model
    }
}

/// Point estimates with standard errors on the configured grid, plus the
/// histogram of the failure index N for the system simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub grid: Vec<f64>,
    pub survival: Vec<f64>,
    pub std_err: Vec<f64>,
    /// `failure_index_counts[n]` replications died at failure number n.
    /// Empty for raw-distribution simulations.
    pub failure_index_counts: Vec<u64>,
    pub replications: u64,
    pub capped: u64,
    pub seed: u64,
}

impl SimEstimate {
    pub fn effective_replications(&self) -> u64 {
        self.replications - self.capped
    }

    /// Mean of the failure index N over non-capped replications.
    pub fn mean_failure_index(&self) -> Option<f64> {
        let (count, sum, _) = self.index_moments()?;
        Some(sum as f64 / count as f64)
    }

    /// Standard error of the mean failure index.
    pub fn failure_index_se(&self) -> Option<f64> {
        let (count, sum, sum_sq) = self.index_moments()?;
        if count < 2 {
            return None;
        }
        let n = count as f64;
        let mean = sum as f64 / n;
        let var = (sum_sq as f64 - n * mean * mean) / (n - 1.0);
        Some((var.max(0.0) / n).sqrt())
    }

    /// Fraction of non-capped replications with failure index `n`.
    pub fn index_frequency(&self, n: usize) -> f64 {
        let count = self.failure_index_counts.get(n).copied().unwrap_or(0);
        count as f64 / self.effective_replications() as f64
    }

    fn index_moments(&self) -> Option<(u64, u128, u128)> {
        if self.failure_index_counts.is_empty() {
            return None;
        }
        let mut count = 0u64;
        let mut sum = 0u128;
        let mut sum_sq = 0u128;
        for (n, &c) in self.failure_index_counts.iter().enumerate() {
            let n = n as u128;
            count += c;
            sum += n * c as u128;
            sum_sq += n * n * c as u128;
        }
        Some((count, sum, sum_sq))
    }
}

/// Scalar probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiEstimate {
    pub value: f64,
    pub std_err: f64,
    pub replications: u64,
    pub seed: u64,
}

fn replication_rng(base: &ChaCha8Rng, replication: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(replication);
    rng
}

fn exp_draw<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

fn batch_ranges(replications: u64) -> Vec<Range<u64>> {
    let mut ranges = Vec::with_capacity((replications / BATCH_SIZE + 1) as usize);
    let mut start = 0;
    while start < replications {
        let end = (start + BATCH_SIZE).min(replications);
        ranges.push(start..end);
        start = end;
    }
    ranges
}

#[cfg(feature = "parallel")]
fn run_batches<A, F, M, I>(replications: u64, batch: F, identity: I, merge: M) -> A
where
    A: Send,
    F: Fn(Range<u64>) -> A + Send + Sync,
    I: Fn() -> A + Send + Sync,
    M: Fn(A, A) -> A + Send + Sync,
{
    batch_ranges(replications)
        .into_par_iter()
        .map(batch)
        .reduce(identity, merge)
}

#[cfg(not(feature = "parallel"))]
fn run_batches<A, F, M, I>(replications: u64, batch: F, identity: I, merge: M) -> A
where
    A: Send,
    F: Fn(Range<u64>) -> A + Sync,
    I: Fn() -> A + Send + Sync,
    M: Fn(A, A) -> A + Send + Sync,
{
    batch_ranges(replications)
        .into_iter()
        .map(batch)
        .fold(identity(), merge)
}

fn add_vectors(mut a: Vec<u64>, b: &[u64]) -> Vec<u64> {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (dst, &src) in a.iter_mut().zip(b) {
        *dst += src;
    }
    a
}

/// `positions[p]` counts outcomes whose value exceeds exactly the first p
/// grid points; converts to per-point exceedance counts.
fn survival_counts(positions: &[u64], grid_len: usize) -> Vec<u64> {
    let mut counts = vec![0u64; grid_len];
    let mut running = 0u64;
    for p in (1..=grid_len).rev() {
        running += positions[p];
        counts[p - 1] = running;
    }
    counts
}

fn estimates_from_counts(counts: &[u64], effective: u64) -> (Vec<f64>, Vec<f64>) {
    let n = effective as f64;
    let mut survival = Vec::with_capacity(counts.len());
    let mut std_err = Vec::with_capacity(counts.len());
    for &c in counts {
        let p = c as f64 / n;
        survival.push(p);
        std_err.push((p * (1.0 - p) / n).sqrt());
    }
    (survival, std_err)
}

struct SystemAcc {
    positions: Vec<u64>,
    index_counts: Vec<u64>,
    capped: u64,
}

/// Simulates the two-component parallel system: gaps T_1, T_2, … ~ Exp(λ)
/// race the repairs Y_1, Y_2, … ~ Exp(μ); the system dies at the first
/// failure index N >= 2 with T_N < Y_{N-1}, after lifetime T_1 + … + T_N.
///
/// Per replication the draw order is fixed as T_1, then (Y_{j-1}, T_j) pairs,
/// which together with the per-replication streams pins the output exactly.
pub fn simulate_parallel2(cfg: &SimConfig) -> Result<SimEstimate> {
    let lambda = cfg.rates.lambda();
    let mu = cfg.rates.mu();
    let first_rate = match cfg.gap_model {
        GapModel::PaperIid => lambda,
        GapModel::RacingFirstGap => 2.0 * lambda,
    };
    let grid = cfg.time_grid.clone();
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    let acc = run_batches(
        cfg.replications,
        |range: Range<u64>| {
            let mut acc = SystemAcc {
                positions: vec![0u64; grid.len() + 1],
                index_counts: Vec::new(),
                capped: 0,
            };
            for rep in range {
                let mut rng = replication_rng(&base, rep);
                let mut lifetime = exp_draw(&mut rng, first_rate);
                let mut failures: u64 = 1;
                let outcome = loop {
                    if failures >= GAP_CAP {
                        break None;
                    }
                    let repair = exp_draw(&mut rng, mu);
                    let gap = exp_draw(&mut rng, lambda);
                    failures += 1;
                    lifetime += gap;
                    if gap < repair {
                        break Some((lifetime, failures));
                    }
                };
                match outcome {
                    Some((lifetime, index)) => {
                        let p = grid.partition_point(|&g| g < lifetime);
                        acc.positions[p] += 1;
                        let i = index as usize;
                        if i >= acc.index_counts.len() {
                            acc.index_counts.resize(i + 1, 0);
                        }
                        acc.index_counts[i] += 1;
                    }
                    None => acc.capped += 1,
                }
            }
            acc
        },
        || SystemAcc {
            positions: vec![0u64; grid.len() + 1],
            index_counts: Vec::new(),
            capped: 0,
        },
        |a, b| SystemAcc {
            positions: add_vectors(a.positions, &b.positions),
            index_counts: add_vectors(a.index_counts, &b.index_counts),
            capped: a.capped + b.capped,
        },
    );

    let effective = cfg.replications - acc.capped;
    if effective == 0 {
        return Err(Error::InvalidParameter(
            "every replication hit the gap cap; xi is too close to 1".into(),
        ));
    }
    let counts = survival_counts(&acc.positions, grid.len());
    let (survival, std_err) = estimates_from_counts(&counts, effective);
    Ok(SimEstimate {
        grid,
        survival,
        std_err,
        failure_index_counts: acc.index_counts,
        replications: cfg.replications,
        capped: acc.capped,
        seed: cfg.seed,
    })
}

/// Samples Erlang(k, λ) + Erlang(m, μ) directly (k draws at rate λ followed
/// by m draws at rate μ) and estimates its survival on the grid. The rates
/// come from `params`; `cfg` contributes replications, seed, and grid.
pub fn simulate_erlang_sum(params: ErlangSumParams, cfg: &SimConfig) -> Result<SimEstimate> {
    let k = params.first().shape();
    let lambda = params.first().rate();
    let m = params.second_shape();
    let mu = params.second_rate();
    let grid = cfg.time_grid.clone();
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    let positions = run_batches(
        cfg.replications,
        |range: Range<u64>| {
            let mut positions = vec![0u64; grid.len() + 1];
            for rep in range {
                let mut rng = replication_rng(&base, rep);
                let mut total = 0.0;
                for _ in 0..k {
                    total += exp_draw(&mut rng, lambda);
                }
                for _ in 0..m {
                    total += exp_draw(&mut rng, mu);
                }
                positions[grid.partition_point(|&g| g < total)] += 1;
            }
            positions
        },
        || vec![0u64; grid.len() + 1],
        |a, b| add_vectors(a, &b),
    );

    let counts = survival_counts(&positions, grid.len());
    let (survival, std_err) = estimates_from_counts(&counts, cfg.replications);
    Ok(SimEstimate {
        grid,
        survival,
        std_err,
        failure_index_counts: Vec::new(),
        replications: cfg.replications,
        capped: 0,
        seed: cfg.seed,
    })
}

/// Estimates the serial-with-spare repair-race probability
/// Pr{X₂ outlasts the repair} · Pr{Y outlasts the repair} = (μ/(λ+μ))²,
/// with X₂, Y ~ Exp(λ) and the repair clocks ~ Exp(μ).
///
/// The closed form multiplies two marginal race probabilities, so each
/// comparison draws its own repair clock; a single shared clock would
/// couple the events and estimate μ/(μ+2λ) instead.
pub fn estimate_serial_xi(rates: Rates, cfg: &SimConfig) -> Result<XiEstimate> {
    let lambda = rates.lambda();
    let mu = rates.mu();
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    let successes = run_batches(
        cfg.replications,
        |range: Range<u64>| {
            let mut hits = 0u64;
            for rep in range {
                let mut rng = replication_rng(&base, rep);
                let x2 = exp_draw(&mut rng, lambda);
                let z1 = exp_draw(&mut rng, mu);
                let y = exp_draw(&mut rng, lambda);
                let z2 = exp_draw(&mut rng, mu);
                if x2 > z1 && y > z2 {
                    hits += 1;
                }
            }
            hits
        },
        || 0u64,
        |a, b| a + b,
    );

    let n = cfg.replications as f64;
    let p = successes as f64 / n;
    Ok(XiEstimate {
        value: p,
        std_err: (p * (1.0 - p) / n).sqrt(),
        replications: cfg.replications,
        seed: cfg.seed,
    })
}

/// One grid point of the empirical-vs-analytic comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub empirical: f64,
    pub std_err: f64,
    pub analytic: f64,
    pub delta: f64,
}

/// One failure-index histogram row with its geometric-law expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramRow {
    /// First failure index covered by this row.
    pub index: u64,
    /// True when the row aggregates every index >= `index`.
    pub open_ended: bool,
    pub observed: u64,
    pub expected: f64,
}

/// Side-by-side diagnostic of the simulated system lifetime against the
/// truncated analytic mixture. Reports deviations and fit statistics without
/// passing judgment: the analytic mixture is not claimed to equal the exact
/// process law, and the truncation alone depresses it by up to `tail_mass`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub lambda: f64,
    pub mu: f64,
    pub xi: f64,
    pub replications: u64,
    pub capped: u64,
    pub seed: u64,
    pub retained_terms: usize,
    pub tail_mass: f64,
    pub rows: Vec<ComparisonRow>,
    pub max_abs_delta: f64,
    pub max_abs_delta_t: Option<f64>,
    pub mean_failure_index: f64,
    pub mean_failure_index_se: f64,
    pub expected_mean_index: f64,
    pub histogram: Vec<HistogramRow>,
    pub chi_square: f64,
    pub chi_square_df: usize,
    pub chi_square_crit_99: f64,
}

/// Runs the system simulation and tabulates it against the analytic mixture
/// on the same grid.
pub fn compare_analytic(cfg: &SimConfig, truncation: &Truncation) -> Result<ComparisonReport> {
    let estimate = simulate_parallel2(cfg)?;
    let spec = RepairableSpec::new(Topology::Parallel2, cfg.rates)?;
    let curve = reliability_curve(&spec, &cfg.time_grid, truncation)?;
    let xi = xi_exponential(cfg.rates);

    let mut rows = Vec::with_capacity(cfg.time_grid.len());
    let mut max_abs_delta = 0.0f64;
    let mut max_abs_delta_t = None;
    for (i, &t) in cfg.time_grid.iter().enumerate() {
        let delta = estimate.survival[i] - curve.values()[i];
        if delta.abs() > max_abs_delta {
            max_abs_delta = delta.abs();
            max_abs_delta_t = Some(t);
        }
        rows.push(ComparisonRow {
            t,
            empirical: estimate.survival[i],
            std_err: estimate.std_err[i],
            analytic: curve.values()[i],
            delta,
        });
    }

    let effective = estimate.effective_replications();
    let (histogram, chi_square, df) = geometric_fit(&estimate.failure_index_counts, effective, xi);

    Ok(ComparisonReport {
        lambda: cfg.rates.lambda(),
        mu: cfg.rates.mu(),
        xi,
        replications: cfg.replications,
        capped: estimate.capped,
        seed: cfg.seed,
        retained_terms: curve.retained_terms(),
        tail_mass: curve.tail_mass(),
        rows,
        max_abs_delta,
        max_abs_delta_t,
        mean_failure_index: estimate.mean_failure_index().unwrap_or(f64::NAN),
        mean_failure_index_se: estimate.failure_index_se().unwrap_or(f64::NAN),
        expected_mean_index: 2.0 + xi / (1.0 - xi),
        histogram,
        chi_square,
        chi_square_df: df,
        chi_square_crit_99: chi_square_critical_99(df),
    })
}

/// Bins the failure-index counts against Geometric(1-ξ) on {2, 3, …}:
/// individual bins while the expected count stays >= 5 (at most 40 of them),
/// then one open-ended bin. Returns (rows, chi-square statistic, degrees of
/// freedom).
fn geometric_fit(counts: &[u64], effective: u64, xi: f64) -> (Vec<HistogramRow>, f64, usize) {
    let n = effective as f64;
    let mut rows = Vec::new();
    let mut chi = 0.0f64;
    let mut observed_rest: u64 = counts.iter().sum();
    let mut index = 2u64;
    loop {
        let p = (1.0 - xi) * xi.powi(index as i32 - 2);
        let expected = n * p;
        let tail_expected = n * xi.powi(index as i32 - 2);
        if expected < 5.0 || rows.len() >= 40 {
            let row = HistogramRow {
                index,
                open_ended: true,
                observed: observed_rest,
                expected: tail_expected,
            };
            if tail_expected > 0.0 {
                chi += (row.observed as f64 - tail_expected).powi(2) / tail_expected;
            }
            rows.push(row);
            break;
        }
        let observed = counts.get(index as usize).copied().unwrap_or(0);
        observed_rest -= observed;
        chi += (observed as f64 - expected).powi(2) / expected;
        rows.push(HistogramRow {
            index,
            open_ended: false,
            observed,
            expected,
        });
        index += 1;
    }
    let df = rows.len().saturating_sub(1).max(1);
    (rows, chi, df)
}

/// Wilson-Hilferty approximation of the chi-square 0.99 quantile.
pub(crate) fn chi_square_critical_99(df: usize) -> f64 {
    let k = df as f64;
    let z = 2.3263478740408408; // standard normal 0.99 quantile
    let base = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * base.powi(3)
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "repairable parallel-2: simulation vs analytic mixture")?;
        writeln!(
            f,
            "lambda {:.6}  mu {:.6}  xi {:.6}",
            self.lambda, self.mu, self.xi
        )?;
        writeln!(
            f,
            "replications {}  capped {}  seed {}",
            self.replications, self.capped, self.seed
        )?;
        writeln!(
            f,
            "retained terms {}  tail mass {:.6}",
            self.retained_terms, self.tail_mass
        )?;
        writeln!(
            f,
            "{:>10} {:>11} {:>11} {:>11} {:>11}",
            "t", "empirical", "std_err", "analytic", "delta"
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:>10.3} {:>11.6} {:>11.6} {:>11.6} {:>11.6}",
                row.t, row.empirical, row.std_err, row.analytic, row.delta
            )?;
        }
        match self.max_abs_delta_t {
            Some(t) => writeln!(f, "max |delta| {:.6} at t {:.3}", self.max_abs_delta, t)?,
            None => writeln!(f, "max |delta| n/a (empty grid)")?,
        }
        writeln!(
            f,
            "failure index: mean {:.6} (se {:.6})  expected {:.6}",
            self.mean_failure_index, self.mean_failure_index_se, self.expected_mean_index
        )?;
        writeln!(f, "failure-index histogram vs Geometric(1-xi):")?;
        writeln!(f, "{:>10} {:>11} {:>13}", "N", "observed", "expected")?;
        for row in &self.histogram {
            let label = if row.open_ended {
                format!(">={}", row.index)
            } else {
                row.index.to_string()
            };
            writeln!(
                f,
                "{label:>10} {:>11} {:>13.2}",
                row.observed, row.expected
            )?;
        }
        writeln!(
            f,
            "chi-square {:.3} on {} df (0.99 quantile {:.2})",
            self.chi_square, self.chi_square_df, self.chi_square_crit_99
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(lambda: f64, mu: f64) -> Rates {
        Rates::new(lambda, mu).unwrap()
    }

    fn grid_1_to(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64).collect()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(rates(0.1, 0.2), 0, 1, vec![]).is_err());
        assert!(SimConfig::new(rates(0.1, 0.2), 10, 1, vec![2.0, 1.0]).is_err());
        assert!(SimConfig::new(rates(0.1, 0.2), 10, 1, vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn same_seed_reproduces_exactly() {
        let cfg = SimConfig::new(rates(0.1, 0.2), 20_000, 7, grid_1_to(10)).unwrap();
        let a = simulate_parallel2(&cfg).unwrap();
        let b = simulate_parallel2(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = SimConfig::new(rates(0.1, 0.2), 30_000, 11, grid_1_to(20)).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_parallel2(&cfg).unwrap());
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate_parallel2(&cfg).unwrap());
        assert_eq!(one, four);
    }

    #[test]
    fn failure_index_mean_matches_geometric_law() {
        // E[N] = 2 + xi/(1-xi) = 4 at (0.1, 0.2).
        let cfg = SimConfig::new(rates(0.1, 0.2), 100_000, 2024, vec![]).unwrap();
        let est = simulate_parallel2(&cfg).unwrap();
        let mean = est.mean_failure_index().unwrap();
        let se = est.failure_index_se().unwrap();
        assert!(
            (mean - 4.0).abs() <= 3.0 * se,
            "mean {mean}, se {se}"
        );
        // P{N = k} = (1-xi) xi^{k-2}
        let xi: f64 = 2.0 / 3.0;
        for k in 2..=8usize {
            let expected = (1.0 - xi) * xi.powi(k as i32 - 2);
            let freq = est.index_frequency(k);
            let se_k = (expected * (1.0 - expected) / est.effective_replications() as f64).sqrt();
            assert!(
                (freq - expected).abs() <= 3.0 * se_k,
                "k={k}: freq {freq}, expected {expected}"
            );
        }
    }

    #[test]
    fn tiny_repair_rate_always_dies_at_second_failure() {
        let cfg = SimConfig::new(rates(0.1, 1e-12), 5_000, 5, vec![]).unwrap();
        let est = simulate_parallel2(&cfg).unwrap();
        assert_eq!(est.failure_index_counts.get(2).copied(), Some(5_000));
        assert_eq!(est.effective_replications(), 5_000);
    }

    #[test]
    fn gap_cap_flags_pathological_streams() {
        // xi close enough to 1 that roughly half the replications exceed the
        // cap while the other half finish.
        let cfg = SimConfig::new(rates(1.0, 1.5e6), 16, 3, vec![]).unwrap();
        let est = simulate_parallel2(&cfg).unwrap();
        assert!(est.capped > 0, "expected some capped replications");
        assert!(est.capped < 16, "expected some finished replications");
        assert_eq!(est.effective_replications(), 16 - est.capped);
    }

    #[test]
    fn racing_first_gap_changes_lifetimes_not_indices() {
        let cfg = SimConfig::new(rates(0.1, 0.2), 20_000, 13, grid_1_to(10)).unwrap();
        let paper = simulate_parallel2(&cfg).unwrap();
        let racing =
            simulate_parallel2(&cfg.clone().with_gap_model(GapModel::RacingFirstGap)).unwrap();
        // Same streams: the first draw is only rescaled, so N is untouched
        // while lifetimes shrink.
        assert_eq!(paper.failure_index_counts, racing.failure_index_counts);
        assert!(racing.survival[0] <= paper.survival[0]);
        assert_ne!(paper.survival, racing.survival);
    }

    #[test]
    fn erlang_sum_simulation_matches_exponential() {
        let params = ErlangSumParams::new(1, 0.1, 0, 0.2).unwrap();
        let cfg = SimConfig::new(rates(0.1, 0.2), 100_000, 31, grid_1_to(30)).unwrap();
        let est = simulate_erlang_sum(params, &cfg).unwrap();
        for (i, &t) in est.grid.iter().enumerate() {
            let expected = (-0.1 * t).exp();
            let tol = 3.0 * est.std_err[i].max(1e-5);
            assert!(
                (est.survival[i] - expected).abs() <= tol,
                "t={t}: {} vs {expected}",
                est.survival[i]
            );
        }
    }

    #[test]
    fn erlang_sum_simulation_matches_quadrature_value() {
        let params = ErlangSumParams::new(2, 0.1, 1, 0.2).unwrap();
        let cfg = SimConfig::new(rates(0.1, 0.2), 100_000, 37, vec![0.0, 1.0]).unwrap();
        let est = simulate_erlang_sum(params, &cfg).unwrap();
        // Sums of positive draws always exceed t = 0.
        assert_eq!(est.survival[0], 1.0);
        let expected = 0.99969823668517;
        let tol = 3.0 * est.std_err[1].max(3.0 / 100_000.0);
        assert!((est.survival[1] - expected).abs() <= tol);
    }

    #[test]
    fn serial_xi_estimate_matches_closed_form() {
        let cfg = SimConfig::new(rates(0.1, 0.2), 200_000, 41, vec![]).unwrap();
        let est = estimate_serial_xi(rates(0.1, 0.2), &cfg).unwrap();
        assert!(
            (est.value - 4.0 / 9.0).abs() <= 3.0 * est.std_err,
            "value {}, se {}",
            est.value,
            est.std_err
        );
        let sym = estimate_serial_xi(rates(0.3, 0.3), &cfg).unwrap();
        assert!((sym.value - 0.25).abs() <= 3.0 * sym.std_err);
    }

    #[test]
    fn serial_xi_is_scale_exact_at_fixed_seed() {
        // Scaling both rates rescales every draw by the same factor, so the
        // comparison outcome of each replication is bit-identical.
        let cfg = SimConfig::new(rates(0.1, 0.2), 50_000, 43, vec![]).unwrap();
        let a = estimate_serial_xi(rates(0.1, 0.2), &cfg).unwrap();
        let b = estimate_serial_xi(rates(0.2, 0.4), &cfg).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn standard_errors_shrink_like_root_n() {
        let grid = vec![20.0];
        let small = SimConfig::new(rates(0.1, 0.2), 10_000, 53, grid.clone()).unwrap();
        let large = SimConfig::new(rates(0.1, 0.2), 1_000_000, 53, grid).unwrap();
        let se_small = simulate_parallel2(&small).unwrap().std_err[0];
        let se_large = simulate_parallel2(&large).unwrap().std_err[0];
        let ratio = se_small / se_large;
        assert!(
            (8.0..=12.0).contains(&ratio),
            "se ratio {ratio}, expected 10 +/- 20%"
        );
    }

    #[test]
    fn geometric_fit_passes_chi_square_at_one_percent() {
        for (lambda, mu, seed) in [(0.1, 0.2, 59u64), (0.2, 0.3, 61u64)] {
            let cfg = SimConfig::new(rates(lambda, mu), 100_000, seed, vec![]).unwrap();
            let est = simulate_parallel2(&cfg).unwrap();
            let xi = xi_exponential(rates(lambda, mu));
            let (_, chi, df) =
                geometric_fit(&est.failure_index_counts, est.effective_replications(), xi);
            let crit = chi_square_critical_99(df);
            assert!(
                chi < crit,
                "lambda={lambda} mu={mu}: chi {chi} on {df} df >= {crit}"
            );
        }
    }

    #[test]
    fn comparison_report_at_time_zero() {
        let cfg = SimConfig::new(rates(0.1, 0.2), 30_000, 67, vec![0.0]).unwrap();
        let tr = Truncation::by_count(9).unwrap();
        let report = compare_analytic(&cfg, &tr).unwrap();
        // Empirical survival at 0 is exactly 1; analytic is the retained
        // mass, so the deviation equals the discarded tail.
        assert_eq!(report.rows[0].empirical, 1.0);
        assert!((report.rows[0].delta - report.tail_mass).abs() < 1e-12);
    }

    #[test]
    fn comparison_report_is_deterministic_text() {
        let cfg = SimConfig::new(rates(0.1, 0.2), 10_000, 71, grid_1_to(5)).unwrap();
        let tr = Truncation::by_count(9).unwrap();
        let a = compare_analytic(&cfg, &tr).unwrap().to_string();
        let b = compare_analytic(&cfg, &tr).unwrap().to_string();
        assert_eq!(a, b);
        assert!(a.contains("max |delta|"));
    }

    #[test]
    fn chi_square_quantiles_are_close_to_reference() {
        // Exact 0.99 quantiles: df=5 -> 15.086, df=10 -> 23.209, df=20 -> 37.566.
        assert!((chi_square_critical_99(5) - 15.086).abs() < 0.1);
        assert!((chi_square_critical_99(10) - 23.209).abs() < 0.1);
        assert!((chi_square_critical_99(20) - 37.566).abs() < 0.1);
    }
}
