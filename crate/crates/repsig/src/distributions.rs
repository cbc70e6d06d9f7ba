//! Survival functions for exponential, Erlang, and Erlang-sum lifetimes,
//! plus the repair-race probability ξ.
//!
//! The Erlang-sum variable is the convolution Erlang(k, λ) + Erlang(m, μ):
//! a chain of k exponential stages at rate λ followed by m stages at rate μ.
//! Its survival is evaluated by a closed-form partial-fraction expansion when
//! the rates are well separated, falling back to a uniformized transient
//! solve of the stage chain when the expansion would cancel catastrophically.

use crate::error::{Error, Result};
use crate::numeric::{ln_factorials, CompensatedSum};

/// Shape/rate parameters of an Erlang distribution (sum of `shape`
/// independent exponentials with the given rate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangParams {
    shape: u32,
    rate: f64,
}

impl ErlangParams {
    pub fn new(shape: u32, rate: f64) -> Result<Self> {
        if shape < 1 {
            return Err(Error::InvalidParameter("Erlang shape must be >= 1".into()));
        }
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Erlang rate must be positive and finite, got {rate}"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> u32 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Parameters of the independent sum Erlang(k, λ) + Erlang(m, μ).
///
/// `second_shape` may be zero, in which case the second block is absent and
/// the distribution degenerates to the first Erlang block alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangSumParams {
    first: ErlangParams,
    second_shape: u32,
    second_rate: f64,
}

impl ErlangSumParams {
    pub fn new(first_shape: u32, first_rate: f64, second_shape: u32, second_rate: f64) -> Result<Self> {
        let first = ErlangParams::new(first_shape, first_rate)?;
        if !second_rate.is_finite() || second_rate <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "second-block rate must be positive and finite, got {second_rate}"
            )));
        }
        Ok(Self {
            first,
            second_shape,
            second_rate,
        })
    }

    pub fn first(&self) -> ErlangParams {
        self.first
    }

    pub fn second_shape(&self) -> u32 {
        self.second_shape
    }

    pub fn second_rate(&self) -> f64 {
        self.second_rate
    }
}

/// Failure rate λ and repair rate μ of the repairable model, per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    lambda: f64,
    mu: f64,
}

impl Rates {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "failure rate lambda must be positive and finite, got {lambda}"
            )));
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "repair rate mu must be positive and finite, got {mu}"
            )));
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Same rate ratio scaled by `c`; useful for scale-invariance checks.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Rates::new(self.lambda * c, self.mu * c)
    }
}

/// Survival P{Erlang(shape, rate) > t} = Σ_{i<shape} e^{-rt} (rt)^i / i!.
///
/// Accumulated by term recurrence in linear space, switching to per-term
/// log-space evaluation when rt is large enough that e^{-rt} underflows;
/// stable for shape·rate·t well past 10^3.
pub fn erlang_survival(p: ErlangParams, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let x = p.rate * t;
    if x == 0.0 {
        return Ok(1.0);
    }
    let sums = poisson_prefix_sums(x, p.shape as usize);
    Ok(sums[p.shape as usize - 1].clamp(0.0, 1.0))
}

/// Prefix sums S_i = Σ_{r<i} e^{-x} x^r / r! for i = 1..=n, with x > 0.
fn poisson_prefix_sums(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut acc = CompensatedSum::new();
    if x < 700.0 {
        let mut term = (-x).exp();
        for i in 0..n {
            if i > 0 {
                term *= x / i as f64;
            }
            acc.add(term);
            out.push(acc.total());
        }
    } else {
        // e^{-x} underflows; evaluate each term as exp(-x + i ln x - ln i!)
        let ln_x = x.ln();
        for (i, ln_fact) in ln_factorials(n.saturating_sub(1)).into_iter().enumerate() {
            let ln_term = -x + i as f64 * ln_x - ln_fact;
            acc.add(ln_term.exp());
            out.push(acc.total());
        }
    }
    out
}

/// Survival P{Erlang(k, λ) + Erlang(m, μ) > t}, absolute error <= 1e-10.
///
/// Dispatch: degenerate second block -> plain Erlang survival; equal (or
/// nearly indistinguishable) rates -> merged Erlang(k+m) closed form;
/// otherwise the partial-fraction expansion, replaced by the uniformized
/// stage-chain solve whenever the expansion's cancellation guard trips.
pub fn erlang_sum_survival(p: ErlangSumParams, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let k = p.first.shape;
    let lam = p.first.rate;
    let m = p.second_shape;
    let mu = p.second_rate;
    if m == 0 {
        return erlang_survival(p.first, t);
    }
    if lam == mu || (lam - mu).abs() * t < 1e-6 {
        // Partial fractions are singular here; the stage chain collapses to a
        // single Erlang block at the midpoint rate.
        let merged = ErlangParams::new(k + m, 0.5 * (lam + mu))?;
        return erlang_survival(merged, t);
    }
    match survival_partial_fractions(k, lam, m, mu, t) {
        Some(v) => Ok(v),
        None => Ok(survival_uniformized(k, lam, m, mu, t)),
    }
}

/// Closed-form expansion of the two-rate hypoexponential survival:
///
/// S(t) = Σ_{i=1..k} A_i S_E(i, λ, t) + Σ_{j=1..m} B_j S_E(j, μ, t)
///
/// with S_E the Erlang survival, A_{k-n} = (-1)^n C(m+n-1, n) (λ/Δ)^n (μ/Δ)^m,
/// B_{m-n} = (-1)^n C(k+n-1, n) (μ/-Δ)^n (λ/-Δ)^k, Δ = μ - λ.
///
/// Returns `None` when the alternating terms grow large enough that the
/// compensated sum can no longer deliver ~1e-11 absolute accuracy.
fn survival_partial_fractions(k: u32, lam: f64, m: u32, mu: f64, t: f64) -> Option<f64> {
    let delta = mu - lam;
    let erl_lam = poisson_prefix_sums(lam * t, k as usize);
    let erl_mu = poisson_prefix_sums(mu * t, m as usize);

    let mut acc = CompensatedSum::new();
    let mut magnitude = 0.0f64;

    let mut coef = (mu / delta).powi(m as i32);
    for n in 0..k {
        let i = (k - n) as usize;
        let term = coef * erl_lam[i - 1];
        magnitude = magnitude.max(term.abs());
        acc.add(term);
        coef *= -(((m + n) as f64) / ((n + 1) as f64)) * (lam / delta);
    }

    let mut coef = (lam / -delta).powi(k as i32);
    for n in 0..m {
        let j = (m - n) as usize;
        let term = coef * erl_mu[j - 1];
        magnitude = magnitude.max(term.abs());
        acc.add(term);
        coef *= -(((k + n) as f64) / ((n + 1) as f64)) * (mu / -delta);
    }

    let result = acc.total();
    let roundoff = magnitude * 2.5e-16;
    if !result.is_finite() || roundoff > 5e-12 || !(-1e-9..=1.0 + 1e-9).contains(&result) {
        return None;
    }
    Some(result.clamp(0.0, 1.0))
}

/// Transient solve of the k+m stage chain by uniformization.
///
/// The chain jumps at the uniform rate max(λ, μ); survival is the
/// Poisson-weighted probability of not having reached absorption. All terms
/// are nonnegative, so no cancellation occurs; the Poisson tail is cut at
/// 1e-14.
fn survival_uniformized(k: u32, lam: f64, m: u32, mu: f64, t: f64) -> f64 {
    let big = lam.max(mu);
    let x = big * t;
    let n_states = (k + m) as usize;
    let p_lam = lam / big;
    let p_mu = mu / big;
    let jump = |state: usize| if state < k as usize { p_lam } else { p_mu };

    let mut occupancy = vec![0.0f64; n_states];
    occupancy[0] = 1.0;
    let mut alive = 1.0f64;

    let ln_x = x.ln();
    let mut ln_weight = -x;
    let mut weight_sum = 0.0f64;
    let mut acc = CompensatedSum::new();
    let step_cap = (x + 12.0 * (x + 100.0).sqrt() + 200.0) as usize;

    for step in 0..=step_cap {
        if step > 0 {
            ln_weight += ln_x - (step as f64).ln();
        }
        let weight = ln_weight.exp();
        weight_sum += weight;
        acc.add(weight * alive);
        if weight_sum >= 1.0 - 1e-14 || alive < 1e-18 {
            break;
        }
        let absorbed = occupancy[n_states - 1] * jump(n_states - 1);
        for i in (1..n_states).rev() {
            occupancy[i] = occupancy[i] * (1.0 - jump(i)) + occupancy[i - 1] * jump(i - 1);
        }
        occupancy[0] *= 1.0 - jump(0);
        alive -= absorbed;
    }
    acc.total().clamp(0.0, 1.0)
}

/// Probability that an Exp(λ) lifetime outlasts an independent Exp(μ) repair:
/// ξ = μ / (λ + μ).
pub fn xi_exponential(r: Rates) -> f64 {
    r.mu / (r.lambda + r.mu)
}

/// ξ for arbitrary laws: the Stieltjes integral ∫ S_T(y) dG(y) of a
/// nonincreasing lifetime survival S_T against a repair-time CDF G on [0, ∞).
///
/// Evaluated by adaptive bisection of the Stieltjes sum with absolute
/// tolerance 1e-10. The upper limit doubles until both the lifetime survival
/// and the remaining repair mass fall below 1e-14; point masses of G
/// (including one at zero) are captured exactly up to the cell-width floor.
pub fn xi_general<S, G>(lifetime_survival: S, repair_distribution: G) -> Result<f64>
where
    S: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    const ABS_TOL: f64 = 1e-10;
    const ENVELOPE: f64 = 1e-14;
    const RANGE_SLACK: f64 = 1e-9;
    const MAX_CELLS: usize = 4_000_000;

    let sample = |f: &dyn Fn(f64) -> f64, y: f64, what: &str| -> Result<f64> {
        let v = f(y);
        if !v.is_finite() || !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{what} evaluated at {y} is outside [0, 1]: {v}"
            )));
        }
        Ok(v)
    };

    let s0 = sample(&lifetime_survival, 0.0, "lifetime survival")?;
    let g0 = sample(&repair_distribution, 0.0, "repair distribution")?;

    let mut upper = 1.0f64;
    let mut doublings = 0u32;
    loop {
        let s_u = sample(&lifetime_survival, upper, "lifetime survival")?;
        let g_u = sample(&repair_distribution, upper, "repair distribution")?;
        if s_u.min(1.0 - g_u) <= ENVELOPE {
            break;
        }
        upper *= 2.0;
        doublings += 1;
        if doublings > 1100 {
            return Err(Error::QuadratureDidNotConverge { upper_limit: upper });
        }
    }

    // Atom of G at zero, then the Stieltjes sum over (0, upper].
    let mut acc = CompensatedSum::new();
    acc.add(s0 * g0);

    let s_up = sample(&lifetime_survival, upper, "lifetime survival")?;
    let g_up = sample(&repair_distribution, upper, "repair distribution")?;
    // (a, S(a), G(a), b, S(b), G(b), bisection level)
    let mut stack = vec![(0.0f64, s0, g0, upper, s_up, g_up, 0u32)];
    let mut cells = 0usize;
    let width_floor = 1e-13 * upper.max(1.0);
    // Coarse/fine estimates can agree by accident on wide cells, so the
    // difference-based acceptance only applies after a few forced splits.
    const MIN_LEVEL: u32 = 6;

    while let Some((a, s_a, g_a, b, s_b, g_b, level)) = stack.pop() {
        cells += 1;
        if cells > MAX_CELLS {
            return Err(Error::QuadratureDidNotConverge { upper_limit: upper });
        }
        if s_b > s_a + RANGE_SLACK {
            return Err(Error::NonMonotoneInput { at: b });
        }
        if g_b < g_a - RANGE_SLACK {
            return Err(Error::NonMonotoneInput { at: b });
        }

        let mid = 0.5 * (a + b);
        let s_m = sample(&lifetime_survival, mid, "lifetime survival")?;
        let g_m = sample(&repair_distribution, mid, "repair distribution")?;

        let coarse = 0.5 * (s_a + s_b) * (g_b - g_a);
        let fine = 0.5 * (s_a + s_m) * (g_m - g_a) + 0.5 * (s_m + s_b) * (g_b - g_m);
        let richardson = (fine - coarse).abs();
        // Hard Stieltjes bound for monotone inputs: the cell estimate cannot
        // be off by more than the product of both variations.
        let hard_bound = 0.5 * (s_a - s_b).abs() * (g_b - g_a).abs();
        let budget = 0.5 * ABS_TOL * ((g_b - g_a).abs() + (b - a) / upper);

        let accept = hard_bound <= budget
            || (level >= MIN_LEVEL && richardson <= 0.5 * budget)
            || (b - a) < width_floor;
        if accept {
            acc.add(fine);
        } else {
            stack.push((mid, s_m, g_m, b, s_b, g_b, level + 1));
            stack.push((a, s_a, g_a, mid, s_m, g_m, level + 1));
        }
    }

    Ok(acc.total().clamp(0.0, 1.0))
}
