//! Time-dependent system reliability assembled from a signature and the
//! epoch survival functions:
//!
//!   R(t) = Σ_k s_k · P{U_k > t}
//!
//! summed over the retained signature terms. The sum is deliberately not
//! renormalized after truncation — R(0+) equals the retained mass, and the
//! discarded tail mass is reported alongside so callers can bracket the
//! untruncated value by R(t) + tail_mass.

use crate::distributions::Rates;
use crate::error::{Error, Result};
use crate::failure_epochs::EpochTable;
use crate::numeric::CompensatedSum;
use crate::signature::{
    parallel2_signature, parallel_n_signature, remark5_signature, serial2_xi, Signature,
    Truncation,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// System topologies with known repairable signatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    /// Two components in parallel.
    Parallel2,
    /// n components in parallel.
    ParallelN(usize),
    /// Two serial components plus one spare.
    Serial2Spare,
    /// A parallel pair in series with a third component that kills the
    /// system outright with probability q.
    SeriesParallel { q: f64 },
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::Parallel2 => "parallel2",
            Topology::ParallelN(_) => "paralleln",
            Topology::Serial2Spare => "serial2spare",
            Topology::SeriesParallel { .. } => "remark5",
        }
    }
}

/// A repairable system: its topology plus the failure/repair rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairableSpec {
    topology: Topology,
    rates: Rates,
}

impl RepairableSpec {
    pub fn new(topology: Topology, rates: Rates) -> Result<Self> {
        match topology {
            Topology::ParallelN(n) if n < 2 => {
                return Err(Error::InvalidParameter(format!(
                    "parallel system needs n >= 2 components, got {n}"
                )))
            }
            Topology::SeriesParallel { q } if !(0.0..=1.0).contains(&q) => {
                return Err(Error::InvalidParameter(format!(
                    "q must lie in [0, 1], got {q}"
                )))
            }
            _ => {}
        }
        Ok(Self { topology, rates })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn rates(&self) -> Rates {
        self.rates
    }

    /// The repair-race probability governing this topology's geometric tail.
    pub fn xi(&self) -> f64 {
        match self.topology {
            Topology::Serial2Spare => serial2_xi(self.rates),
            _ => crate::distributions::xi_exponential(self.rates),
        }
    }

    pub fn signature(&self) -> Result<Signature> {
        let xi = self.xi();
        match self.topology {
            Topology::Parallel2 => parallel2_signature(xi),
            Topology::ParallelN(n) => parallel_n_signature(n, xi),
            Topology::Serial2Spare => parallel2_signature(xi),
            Topology::SeriesParallel { q } => remark5_signature(q, xi),
        }
    }
}

/// A single reliability evaluation plus its truncation accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityPoint {
    pub value: f64,
    pub tail_mass: f64,
}

impl ReliabilityPoint {
    /// Upper bracket for the untruncated mixture: every discarded epoch
    /// survival is at most 1.
    pub fn upper_bound(&self) -> f64 {
        (self.value + self.tail_mass).min(1.0)
    }
}

/// Reliability of a system with signature `signature` at time `t`.
pub fn system_reliability(
    signature: &Signature,
    rates: Rates,
    t: f64,
    truncation: &Truncation,
) -> Result<ReliabilityPoint> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let retained = signature.truncate(truncation)?;
    let table = EpochTable::new(retained.max_index() as u32, rates)?;
    let survivals = table.survivals(t)?;
    Ok(ReliabilityPoint {
        value: mix(&retained.terms, &survivals),
        tail_mass: retained.tail_mass,
    })
}

fn mix(terms: &[(usize, f64)], epoch_survivals: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &(k, s_k) in terms {
        acc.add(s_k * epoch_survivals[k - 1]);
    }
    acc.total().clamp(0.0, 1.0)
}

/// Reliability curve on a time grid, with truncation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityCurve {
    topology: Topology,
    rates: Rates,
    grid: Vec<f64>,
    values: Vec<f64>,
    retained_terms: usize,
    tail_mass: f64,
}

impl ReliabilityCurve {
    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn rates(&self) -> Rates {
        self.rates
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of signature terms retained by the truncation.
    pub fn retained_terms(&self) -> usize {
        self.retained_terms
    }

    /// Signature mass discarded by the truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }
}

/// Evaluates the reliability mixture on an ascending, nonnegative grid.
///
/// The signature is truncated once and the epoch mixtures are shared across
/// grid points; with the `parallel` feature the points are evaluated on the
/// rayon pool (the result does not depend on the degree of parallelism).
pub fn reliability_curve(
    spec: &RepairableSpec,
    grid: &[f64],
    truncation: &Truncation,
) -> Result<ReliabilityCurve> {
    for pair in grid.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::InvalidParameter(
                "time grid must be sorted ascending".into(),
            ));
        }
    }
    if let Some(&first) = grid.first() {
        if first < 0.0 {
            return Err(Error::NegativeTime(first));
        }
    }

    let retained = spec.signature()?.truncate(truncation)?;
    let values = if retained.terms.is_empty() || grid.is_empty() {
        vec![0.0; grid.len()]
    } else {
        let table = EpochTable::new(retained.max_index() as u32, spec.rates())?;
        evaluate_grid(grid, &|t| Ok(mix(&retained.terms, &table.survivals(t)?)))?
    };

    Ok(ReliabilityCurve {
        topology: spec.topology(),
        rates: spec.rates(),
        grid: grid.to_vec(),
        values,
        retained_terms: retained.terms.len(),
        tail_mass: retained.tail_mass,
    })
}

#[cfg(feature = "parallel")]
fn evaluate_grid(grid: &[f64], eval: &(dyn Fn(f64) -> Result<f64> + Sync)) -> Result<Vec<f64>> {
    grid.par_iter().map(|&t| eval(t)).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_grid(grid: &[f64], eval: &dyn Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    grid.iter().map(|&t| eval(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_spec() -> RepairableSpec {
        RepairableSpec::new(Topology::Parallel2, Rates::new(0.1, 0.2).unwrap()).unwrap()
    }

    fn nine_terms() -> Truncation {
        Truncation::by_count(9).unwrap()
    }

    #[test]
    fn reliability_anchors_high_precision() {
        // Frozen from a 50-digit evaluation of the K=9 mixture.
        let spec = table1_spec();
        let cases = [
            (1.0, 0.950085091867),
            (20.0, 0.568790441769),
            (40.0, 0.274563240943),
        ];
        for (t, expected) in cases {
            let p = system_reliability(&spec.signature().unwrap(), spec.rates(), t, &nine_terms())
                .unwrap();
            assert!(
                (p.value - expected).abs() < 1e-9,
                "t={t}: {} vs {expected}",
                p.value
            );
        }
    }

    #[test]
    fn reliability_at_zero_equals_retained_mass() {
        let spec = table1_spec();
        let sig = spec.signature().unwrap();
        let p = system_reliability(&sig, spec.rates(), 0.0, &nine_terms()).unwrap();
        let retained = sig.truncate(&nine_terms()).unwrap().retained_mass();
        assert!((p.value - retained).abs() < 1e-13);
        assert!((p.tail_mass - (2.0f64 / 3.0).powi(9)).abs() < 1e-13);
        assert!((p.upper_bound() - (p.value + p.tail_mass)).abs() < 1e-15);
    }

    #[test]
    fn curve_is_monotone_and_bounded() {
        let spec = table1_spec();
        let grid: Vec<f64> = (0..=80).map(|i| i as f64 * 0.5).collect();
        let curve = reliability_curve(&spec, &grid, &nine_terms()).unwrap();
        let mut prev = 1.0;
        for (&t, &v) in curve.grid().iter().zip(curve.values()) {
            assert!((0.0..=1.0).contains(&v), "t={t}");
            assert!(v <= prev + 1e-12, "t={t}");
            prev = v;
        }
        assert_eq!(curve.retained_terms(), 9);
    }

    #[test]
    fn scaling_law_holds() {
        // R(t; c lambda, c mu) = R(ct; lambda, mu)
        let base = table1_spec();
        for &c in &[0.5, 2.0] {
            let scaled = RepairableSpec::new(
                Topology::Parallel2,
                base.rates().scaled(c).unwrap(),
            )
            .unwrap();
            for t in 1..=40 {
                let t = t as f64;
                let a = system_reliability(
                    &scaled.signature().unwrap(),
                    scaled.rates(),
                    t,
                    &nine_terms(),
                )
                .unwrap();
                let b = system_reliability(
                    &base.signature().unwrap(),
                    base.rates(),
                    c * t,
                    &nine_terms(),
                )
                .unwrap();
                assert!(
                    (a.value - b.value).abs() < 1e-9,
                    "c={c} t={t}: {} vs {}",
                    a.value,
                    b.value
                );
            }
        }
    }

    #[test]
    fn more_terms_never_decrease_reliability() {
        let spec = table1_spec();
        let sig = spec.signature().unwrap();
        let coarse = Truncation::by_count(4).unwrap();
        let fine = Truncation::by_count(12).unwrap();
        let mass_gap = sig.truncate(&fine).unwrap().retained_mass()
            - sig.truncate(&coarse).unwrap().retained_mass();
        for t in [0.0, 1.0, 10.0, 40.0] {
            let lo = system_reliability(&sig, spec.rates(), t, &coarse).unwrap();
            let hi = system_reliability(&sig, spec.rates(), t, &fine).unwrap();
            assert!(hi.value >= lo.value - 1e-13, "t={t}");
            assert!(hi.value - lo.value <= mass_gap + 1e-13, "t={t}");
        }
    }

    fn eps_curve(lambda: f64, mu: f64, grid: &[f64]) -> ReliabilityCurve {
        let spec =
            RepairableSpec::new(Topology::Parallel2, Rates::new(lambda, mu).unwrap()).unwrap();
        reliability_curve(&spec, grid, &Truncation::by_mass(1e-12).unwrap()).unwrap()
    }

    #[test]
    fn faster_failure_rate_never_helps() {
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 * 8.0).collect();
        for &(lo, hi) in &[(0.05, 0.1), (0.1, 0.2), (0.2, 0.4)] {
            let better = eps_curve(lo, 0.2, &grid);
            let worse = eps_curve(hi, 0.2, &grid);
            for ((&t, &a), &b) in grid.iter().zip(better.values()).zip(worse.values()) {
                assert!(b <= a + 1e-12, "lambda {lo}->{hi} at t={t}: {a} -> {b}");
            }
        }
    }

    #[test]
    fn faster_repair_helps_at_early_times() {
        // The mixture is monotone in mu while the geometric mass shift
        // dominates, i.e. at early times.
        let grid: Vec<f64> = (1..=8).map(|i| i as f64 * 2.0).collect();
        for &(lo, hi) in &[(0.05, 0.1), (0.1, 0.2), (0.2, 0.4)] {
            let worse = eps_curve(0.1, lo, &grid);
            let better = eps_curve(0.1, hi, &grid);
            for ((&t, &a), &b) in grid.iter().zip(worse.values()).zip(better.values()) {
                assert!(b >= a - 1e-12, "mu {lo}->{hi} at t={t}: {a} -> {b}");
            }
        }
    }

    #[test]
    fn faster_repair_can_hurt_at_late_times() {
        // Counterexample pinned on purpose: the mixture's epoch components
        // Erlang(j, lambda) + Erlang(j-1, mu) stretch when repairs are slow,
        // so at large t a slower repair rate can overstate reliability and
        // R(t) is not globally monotone in mu. The exact process is monotone;
        // this is an artifact of the unconditioned epoch model.
        let grid = vec![40.0];
        let slow = eps_curve(0.1, 0.1, &grid);
        let fast = eps_curve(0.1, 0.11, &grid);
        assert!(
            fast.values()[0] < slow.values()[0],
            "expected the documented non-monotonicity: {} vs {}",
            fast.values()[0],
            slow.values()[0]
        );
    }

    #[test]
    fn empty_grid_gives_empty_curve() {
        let curve = reliability_curve(&table1_spec(), &[], &nine_terms()).unwrap();
        assert!(curve.grid().is_empty());
        assert!(curve.values().is_empty());
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        let r = reliability_curve(&table1_spec(), &[2.0, 1.0], &nine_terms());
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
        let r = reliability_curve(&table1_spec(), &[-1.0, 1.0], &nine_terms());
        assert!(matches!(r, Err(Error::NegativeTime(_))));
    }

    #[test]
    fn other_topologies_produce_valid_curves() {
        let rates = Rates::new(0.1, 0.2).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 4.0).collect();
        let topologies = [
            Topology::ParallelN(3),
            Topology::Serial2Spare,
            Topology::SeriesParallel { q: 0.3 },
        ];
        for topology in topologies {
            let spec = RepairableSpec::new(topology, rates).unwrap();
            let curve = reliability_curve(&spec, &grid, &Truncation::default()).unwrap();
            let mut prev = 1.0;
            for &v in curve.values() {
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev + 1e-12);
                prev = v;
            }
        }
        let serial = RepairableSpec::new(Topology::Serial2Spare, rates).unwrap();
        assert!((serial.xi() - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn spec_constructor_validation() {
        let rates = Rates::new(0.1, 0.2).unwrap();
        assert!(RepairableSpec::new(Topology::ParallelN(1), rates).is_err());
        assert!(RepairableSpec::new(Topology::SeriesParallel { q: 1.5 }, rates).is_err());
    }
}
