//! System signatures of repairable systems.
//!
//! A repairable signature has infinitely many entries: the probability that
//! the j-th component failure brings the system down stays positive for every
//! j because repairs can keep the system alive indefinitely. All the
//! topologies handled here produce a finite prefix followed by an exact
//! geometric tail s_j = c·ξ^{j-j0}, so the signature is stored as
//! (prefix, c, ξ) rather than as a long truncated array.

use crate::distributions::{xi_exponential, Rates};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

const MASS_TOL: f64 = 1e-12;

/// An infinite signature: prefix entries s_1..s_{j0-1} followed by the
/// geometric tail s_j = c·ξ^{j-j0} for j >= j0 = prefix.len() + 1.
///
/// With ξ = 0 the tail degenerates to the single term c at index j0.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    prefix: Vec<f64>,
    tail_coefficient: f64,
    tail_ratio: f64,
}

impl Signature {
    /// Builds a signature and checks that the total mass is 1 within 1e-12.
    pub fn new(prefix: Vec<f64>, tail_coefficient: f64, tail_ratio: f64) -> Result<Self> {
        for (i, &s) in prefix.iter().enumerate() {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidParameter(format!(
                    "signature entry s_{} = {s} outside [0, 1]",
                    i + 1
                )));
            }
        }
        if !(0.0..1.0).contains(&tail_ratio) {
            return Err(Error::InvalidParameter(format!(
                "tail ratio must lie in [0, 1), got {tail_ratio}"
            )));
        }
        if !tail_coefficient.is_finite() || tail_coefficient < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tail coefficient must be nonnegative, got {tail_coefficient}"
            )));
        }
        let sig = Self {
            prefix,
            tail_coefficient,
            tail_ratio,
        };
        let mass = sig.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidParameter(format!(
                "signature mass is {mass}, expected 1"
            )));
        }
        Ok(sig)
    }

    /// Entries before the geometric tail, i.e. s_1..s_{tail_start - 1}.
    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn tail_coefficient(&self) -> f64 {
        self.tail_coefficient
    }

    pub fn tail_ratio(&self) -> f64 {
        self.tail_ratio
    }

    /// Index of the first tail term.
    pub fn tail_start(&self) -> usize {
        self.prefix.len() + 1
    }

    /// ξ^offset with the 0^0 = 1 convention, safe for any offset.
    fn tail_power(&self, offset: usize) -> f64 {
        if self.tail_ratio == 0.0 {
            return if offset == 0 { 1.0 } else { 0.0 };
        }
        if offset < 1_000 {
            self.tail_ratio.powi(offset as i32)
        } else {
            self.tail_ratio.powf(offset as f64)
        }
    }

    /// The j-th signature entry, 1-based.
    pub fn term(&self, j: usize) -> f64 {
        assert!(j >= 1, "signature indices are 1-based");
        if j <= self.prefix.len() {
            self.prefix[j - 1]
        } else {
            self.tail_coefficient * self.tail_power(j - self.tail_start())
        }
    }

    /// Σ prefix + c/(1-ξ); equals 1 for a valid signature.
    pub fn total_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for &s in &self.prefix {
            acc.add(s);
        }
        acc.add(self.tail_coefficient / (1.0 - self.tail_ratio));
        acc.total()
    }

    /// Mass of all entries with index >= j, in closed form.
    pub fn mass_from(&self, j: usize) -> f64 {
        assert!(j >= 1, "signature indices are 1-based");
        let j0 = self.tail_start();
        if j <= self.prefix.len() {
            let mut acc = CompensatedSum::new();
            for &s in &self.prefix[j - 1..] {
                acc.add(s);
            }
            acc.add(self.tail_coefficient / (1.0 - self.tail_ratio));
            acc.total()
        } else {
            self.tail_coefficient * self.tail_power(j - j0) / (1.0 - self.tail_ratio)
        }
    }

    /// Retains terms according to `truncation` and reports the exact
    /// discarded mass (closed form, never a 1-minus-sum difference).
    pub fn truncate(&self, truncation: &Truncation) -> Result<TruncatedSignature> {
        const RETENTION_CAP: usize = 1_000_000;
        let mut terms = Vec::new();
        let mut j = 1usize;
        loop {
            if j > RETENTION_CAP {
                return Err(Error::TruncationLimit { terms: RETENTION_CAP });
            }
            let s_j = self.term(j);
            if s_j > 0.0 {
                terms.push((j, s_j));
            }
            let remaining = self.mass_from(j + 1);
            let done = match truncation.mode {
                TruncationMode::ByCount(k) => terms.len() == k,
                TruncationMode::ByMass(eps) => !terms.is_empty() && remaining <= eps,
            };
            if done || remaining == 0.0 {
                return Ok(TruncatedSignature {
                    terms,
                    tail_mass: remaining,
                });
            }
            j += 1;
        }
    }
}

/// Retention policy: keep a fixed number of nonzero terms, or keep terms
/// until the discarded tail mass drops to ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMode {
    ByCount(usize),
    ByMass(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    mode: TruncationMode,
}

impl Truncation {
    /// Keep exactly `count` nonzero terms (fewer if the signature runs out).
    pub fn by_count(count: usize) -> Result<Self> {
        if count < 1 {
            return Err(Error::InvalidParameter(
                "truncation must retain at least one term".into(),
            ));
        }
        Ok(Self {
            mode: TruncationMode::ByCount(count),
        })
    }

    /// Keep terms until the discarded mass is at most `eps`. At least one
    /// term is always retained, even for the boundary value eps = 1.
    pub fn by_mass(eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 || eps > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "mass tolerance must lie in (0, 1], got {eps}"
            )));
        }
        Ok(Self {
            mode: TruncationMode::ByMass(eps),
        })
    }

    pub fn mode(&self) -> TruncationMode {
        self.mode
    }
}

impl Default for Truncation {
    /// By-mass retention at ε = 1e-9.
    fn default() -> Self {
        Truncation::by_mass(1e-9).expect("default tolerance is valid")
    }
}

/// Outcome of truncating a signature: the retained (index, mass) pairs and
/// the exact discarded mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSignature {
    pub terms: Vec<(usize, f64)>,
    pub tail_mass: f64,
}

impl TruncatedSignature {
    pub fn retained_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for &(_, s) in &self.terms {
            acc.add(s);
        }
        acc.total()
    }

    pub fn max_index(&self) -> usize {
        self.terms.last().map_or(0, |&(j, _)| j)
    }
}

fn check_xi(xi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::InvalidParameter(format!(
            "xi must lie in [0, 1), got {xi}"
        )));
    }
    Ok(xi)
}

/// Signature of the two-component parallel system under repair:
/// s_1 = 0, s_j = (1-ξ)ξ^{j-2} for j >= 2.
pub fn parallel2_signature(xi: f64) -> Result<Signature> {
    let xi = check_xi(xi)?;
    Signature::new(vec![0.0], 1.0 - xi, xi)
}

/// Two-component parallel signature with a gap-dependent sequence ξ_2..ξ_J:
/// s_1 = 0, s_j = (1-ξ_j)·ξ_2⋯ξ_{j-1}. The unresolved product ξ_2⋯ξ_J is
/// reported as a single residual lump at index J+1, so the stored mass is
/// exact.
pub fn parallel2_signature_general(xis: &[f64]) -> Result<Signature> {
    if xis.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one xi value is required".into(),
        ));
    }
    for &xi in xis {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::InvalidParameter(format!(
                "xi must lie in [0, 1], got {xi}"
            )));
        }
    }
    let mut prefix = Vec::with_capacity(xis.len() + 1);
    prefix.push(0.0);
    let mut product = 1.0;
    for &xi in xis {
        prefix.push((1.0 - xi) * product);
        product *= xi;
    }
    Signature::new(prefix, product, 0.0)
}

/// Signature of the n-component parallel system under repair:
/// s_j = 0 for j < n, s_j = (1-ξ)ξ^{j-n} for j >= n.
pub fn parallel_n_signature(n: usize, xi: f64) -> Result<Signature> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "parallel system needs n >= 2 components, got {n}"
        )));
    }
    let xi = check_xi(xi)?;
    Signature::new(vec![0.0; n - 1], 1.0 - xi, xi)
}

/// Repair-race probability for the two-component serial system with a spare:
/// both the working component and the replacement must outlast the repair,
/// giving ξ = (μ/(λ+μ))².
pub fn serial2_xi(rates: Rates) -> f64 {
    let xi = xi_exponential(rates);
    xi * xi
}

/// Signature of min(max(X1, X2), X3): the series component kills the system
/// first with probability q, otherwise the parallel pair behaves like the
/// two-component repairable system.
/// s_1 = q, s_j = (1-q)(1-ξ)ξ^{j-2} for j >= 2.
pub fn remark5_signature(q: f64, xi: f64) -> Result<Signature> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in [0, 1], got {q}"
        )));
    }
    let xi = check_xi(xi)?;
    Signature::new(vec![q], (1.0 - q) * (1.0 - xi), xi)
}
