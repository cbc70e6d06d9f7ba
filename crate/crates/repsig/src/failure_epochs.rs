//! Survival of the k-th failure epoch of the two-component repairable system.
//!
//! By the k-th failure, each of the earlier k-1 failures hit either component
//! with probability 1/2, so j-1 of them landed on the component that fails
//! now (binomial weights). A component on its j-th failure has accumulated j
//! working periods at rate λ and j-1 repairs at rate μ, giving the mixture
//!
//!   P{U_k > t} = Σ_{j=1..k} C(k-1, j-1)/2^{k-1} · P{Erlang(j, λ) + Erlang(j-1, μ) > t}.

use crate::distributions::{erlang_sum_survival, ErlangSumParams, Rates};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorials, CompensatedSum};

/// Binomial epoch weights (C(k-1, j-1)/2^{k-1})_{j=1..k}.
///
/// Built by the multiplicative Pascal recurrence; rows for very large k are
/// evaluated per-entry in log space so no binomial ever overflows.
pub fn epoch_weights(k: u32) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!(
            "epoch index must be >= 1, got {k}"
        )));
    }
    let k = k as usize;
    let mut weights = Vec::with_capacity(k);
    if k <= 1_000 {
        let mut w = 0.5f64.powi(k as i32 - 1);
        for j in 1..=k {
            weights.push(w);
            w *= (k - j) as f64 / j as f64;
        }
    } else {
        let ln_fact = ln_factorials(k - 1);
        let ln_half = 0.5f64.ln();
        for j in 1..=k {
            let ln_w = ln_fact[k - 1] - ln_fact[j - 1] - ln_fact[k - j]
                + (k as f64 - 1.0) * ln_half;
            weights.push(ln_w.exp());
        }
    }
    Ok(weights)
}

/// The mixture representing P{U_k > t}: binomial weights over Erlang-sum
/// components Erlang(j, λ) + Erlang(j-1, μ), j = 1..k.
#[derive(Debug, Clone)]
pub struct EpochMixture {
    index: u32,
    weights: Vec<f64>,
    components: Vec<ErlangSumParams>,
    rates: Rates,
}

impl EpochMixture {
    pub fn new(index: u32, rates: Rates) -> Result<Self> {
        let weights = epoch_weights(index)?;
        let components = (1..=index)
            .map(|j| ErlangSumParams::new(j, rates.lambda(), j - 1, rates.mu()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            index,
            weights,
            components,
            rates,
        })
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ErlangSumParams] {
        &self.components
    }

    pub fn rates(&self) -> Rates {
        self.rates
    }

    /// P{U_k > t}.
    pub fn survival(&self, t: f64) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for (w, p) in self.weights.iter().zip(&self.components) {
            acc.add(w * erlang_sum_survival(*p, t)?);
        }
        Ok(acc.total().clamp(0.0, 1.0))
    }
}

/// P{U_k > t} without keeping the mixture around.
pub fn epoch_survival(k: u32, rates: Rates, t: f64) -> Result<f64> {
    EpochMixture::new(k, rates)?.survival(t)
}

/// Weight table for epochs 1..=max_index with a shared evaluation pass.
///
/// All epochs mix the same Erlang-sum components, so a grid evaluation
/// computes each component survival once per time point and reuses it for
/// every epoch. Read-only after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct EpochTable {
    rates: Rates,
    max_index: u32,
    weight_rows: Vec<Vec<f64>>,
    components: Vec<ErlangSumParams>,
}

impl EpochTable {
    pub fn new(max_index: u32, rates: Rates) -> Result<Self> {
        if max_index < 1 {
            return Err(Error::InvalidParameter(
                "epoch table needs at least one epoch".into(),
            ));
        }
        let weight_rows = (1..=max_index)
            .map(epoch_weights)
            .collect::<Result<Vec<_>>>()?;
        let components = (1..=max_index)
            .map(|j| ErlangSumParams::new(j, rates.lambda(), j - 1, rates.mu()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rates,
            max_index,
            weight_rows,
            components,
        })
    }

    pub fn max_index(&self) -> u32 {
        self.max_index
    }

    pub fn rates(&self) -> Rates {
        self.rates
    }

    /// P{U_k > t} for every k = 1..=max_index; element k-1 is epoch k.
    pub fn survivals(&self, t: f64) -> Result<Vec<f64>> {
        let component_survival = self
            .components
            .iter()
            .map(|&p| erlang_sum_survival(p, t))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(self.max_index as usize);
        for row in &self.weight_rows {
            let mut acc = CompensatedSum::new();
            for (w, s) in row.iter().zip(&component_survival) {
                acc.add(w * s);
            }
            out.push(acc.total().clamp(0.0, 1.0));
        }
        Ok(out)
    }
}
