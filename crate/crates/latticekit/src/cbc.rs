//! Component-by-component construction for a fixed n, the embedded
//! mini-max construction over n = p^m ranges, and evaluators for the
//! worst-case error bounds attached to the constructed vectors.

use rayon::prelude::*;

use crate::criterion::{s_criterion, CandidateTables, CbcSweep, CriterionContext, TIE_RELATIVE};
use crate::error::{LatticeError, Result};
use crate::korobov::{cardinality_constant, truncation_constant, SpaceParams};
use crate::weights::{sqrt_half_transform, subset_sums};
use crate::zeta::riemann_zeta;

// --- small number-theory helpers -----------------------------------------

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of a modulo n when gcd(a, n) = 1.
pub fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(n as i128) as u64)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Euler's totient φ(n) by trial-division factorization.
pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1);
    let mut phi = n;
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            phi -= phi / p;
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        phi -= phi / m;
    }
    phi
}

/// 𝕌_n = {1 ≤ z ≤ n-1 : gcd(z, n) = 1}, ascending.
pub fn units(n: usize) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(LatticeError::InvalidParameter(format!("units need n ≥ 2, got {n}")));
    }
    Ok((1..n).filter(|&z| gcd(z as u64, n as u64) == 1).collect())
}

// --- fixed-n CBC ----------------------------------------------------------

/// A constructed generating vector with the criterion components attained
/// at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingVector {
    pub n: usize,
    pub d: usize,
    pub z: Vec<usize>,
    pub t_values: Vec<f64>,
}

impl GeneratingVector {
    /// S = Σ_s T_s for the recorded components.
    pub fn s_value(&self) -> f64 {
        self.t_values.iter().sum()
    }
}

const PAR_THRESHOLD: usize = 1 << 18;

fn eval_candidates(ctx: &CriterionContext, tables: &CandidateTables, candidates: &[usize]) -> Vec<f64> {
    if candidates.len() * ctx.n >= PAR_THRESHOLD {
        candidates.par_iter().map(|&z| tables.eval(ctx, z)).collect()
    } else {
        candidates.iter().map(|&z| tables.eval(ctx, z)).collect()
    }
}

/// Smallest candidate whose value ties the minimum within 1e-13 relative.
fn argmin_tie_smallest(candidates: &[usize], values: &[f64]) -> (usize, f64) {
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let window = vmin + TIE_RELATIVE * vmin.abs();
    for (&z, &v) in candidates.iter().zip(values.iter()) {
        if v <= window {
            return (z, v);
        }
    }
    (candidates[0], values[0])
}

/// Greedy per-dimension minimization of T_{n,d,s}: for each s with the
/// prefix fixed, pick the unit z_s minimizing the component, ties broken
/// by the smallest candidate.
pub fn cbc_construct(ctx: &CriterionContext, d: usize) -> Result<GeneratingVector> {
    let candidates = units(ctx.n)?;
    let mut sweep = CbcSweep::new(ctx, d)?;
    let mut z = Vec::with_capacity(d);
    let mut t_values = Vec::with_capacity(d);
    for _s in 1..=d {
        let tables = sweep.prepare()?;
        let values = eval_candidates(ctx, &tables, &candidates);
        let (zs, val) = argmin_tie_smallest(&candidates, &values);
        z.push(zs);
        t_values.push(val);
        sweep.accept(zs)?;
    }
    Ok(GeneratingVector { n: ctx.n, d, z, t_values })
}

// --- embedded CBC ---------------------------------------------------------

/// Output of the embedded mini-max construction over n = p^m, m1 ≤ m ≤ m2.
#[derive(Debug, Clone)]
pub struct EmbeddedResult {
    pub p: u64,
    pub m1: u32,
    pub m2: u32,
    pub d: usize,
    /// Components in 𝕌_{p^{m2}}.
    pub z_emb: Vec<usize>,
    /// Per-m baseline vectors z^{(m)} with their T tables, index m - m1.
    pub baselines: Vec<GeneratingVector>,
    /// Attained ratios X_1..X_d.
    pub x_values: Vec<f64>,
    /// T components of z_emb per modulus: t_emb[m - m1][s - 1].
    pub t_emb: Vec<Vec<f64>>,
}

impl EmbeddedResult {
    pub fn s_emb(&self, m: u32) -> f64 {
        self.t_emb[(m - self.m1) as usize].iter().sum()
    }

    pub fn s_baseline(&self, m: u32) -> f64 {
        self.baselines[(m - self.m1) as usize].s_value()
    }

    pub fn max_x(&self) -> f64 {
        self.x_values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Algorithm: first run the fixed-n construction for every n = p^m and
/// store the baselines; then choose each z_s ∈ 𝕌_{p^{m2}} minimizing
/// X_s = max_m T_{p^m,s}(prefix, z_s) / T_{p^m,s}(z^{(m)}_{1:s}).
/// T_{p^m} sees z_s only through z_s mod p^m, so candidate values are
/// computed once per residue class.
pub fn cbc_construct_embedded(
    p: u64,
    m1: u32,
    m2: u32,
    params: &SpaceParams,
) -> Result<EmbeddedResult> {
    if !is_prime(p) {
        return Err(LatticeError::InvalidParameter(format!("p = {p} is not prime")));
    }
    if m1 < 1 || m2 <= m1 {
        return Err(LatticeError::InvalidParameter(format!(
            "need m2 > m1 ≥ 1, got m1 = {m1}, m2 = {m2}"
        )));
    }
    let n_top = (p as u128).pow(m2);
    if n_top > (1u128 << 34) {
        return Err(LatticeError::Capacity(format!("p^m2 = {n_top} is too large")));
    }
    let d = params.d;
    let moduli: Vec<usize> = (m1..=m2).map(|m| (p as usize).pow(m)).collect();
    let contexts: Vec<CriterionContext> = moduli
        .iter()
        .map(|&n| CriterionContext::new(n, params.clone()))
        .collect::<Result<_>>()?;
    let baselines: Vec<GeneratingVector> = contexts
        .iter()
        .map(|ctx| cbc_construct(ctx, d))
        .collect::<Result<_>>()?;
    for b in &baselines {
        if b.t_values.iter().any(|&t| t <= 0.0) {
            return Err(LatticeError::DegenerateWeights(format!(
                "baseline T table for n = {} contains a non-positive component",
                b.n
            )));
        }
    }

    let candidates = units(moduli[moduli.len() - 1])?;
    let mut sweeps: Vec<CbcSweep> = contexts
        .iter()
        .map(|ctx| CbcSweep::new(ctx, d))
        .collect::<Result<_>>()?;
    let mut z_emb = Vec::with_capacity(d);
    let mut x_values = Vec::with_capacity(d);
    let mut t_emb = vec![Vec::with_capacity(d); moduli.len()];

    for s in 1..=d {
        // Candidate values per modulus, keyed by residue class.
        let mut residue_vals: Vec<Vec<f64>> = Vec::with_capacity(moduli.len());
        for (i, sweep) in sweeps.iter().enumerate() {
            let n_m = moduli[i];
            let tables = sweep.prepare()?;
            let mut vals = vec![f64::NAN; n_m];
            let res_units = units(n_m)?;
            let computed = eval_candidates(&contexts[i], &tables, &res_units);
            for (&r, &v) in res_units.iter().zip(computed.iter()) {
                vals[r] = v;
            }
            residue_vals.push(vals);
        }
        let ratios: Vec<f64> = candidates
            .iter()
            .map(|&z| {
                let mut x = f64::NEG_INFINITY;
                for (i, vals) in residue_vals.iter().enumerate() {
                    let t = vals[z % moduli[i]];
                    let denom = baselines[i].t_values[s - 1];
                    x = x.max(t / denom);
                }
                x
            })
            .collect();
        let (zs, x) = argmin_tie_smallest(&candidates, &ratios);
        z_emb.push(zs);
        x_values.push(x);
        for (i, sweep) in sweeps.iter_mut().enumerate() {
            let r = zs % moduli[i];
            t_emb[i].push(residue_vals[i][r]);
            sweep.accept(r)?;
        }
    }
    Ok(EmbeddedResult { p, m1, m2, d, z_emb, baselines, x_values, t_emb })
}

// --- bound evaluators -------------------------------------------------------

/// Exponent/parameter bundle for the bound evaluators.
#[derive(Debug, Clone, Copy)]
pub struct BoundParams {
    pub lambda: f64,
    pub tau: f64,
    pub q: f64,
}

impl BoundParams {
    pub fn validate(&self, alpha: f64) -> Result<()> {
        let inv = 1.0 / alpha;
        if !(self.lambda > inv && self.lambda <= 1.0) {
            return Err(LatticeError::InvalidParameter(format!(
                "λ must lie in (1/α, 1] = ({inv}, 1], got {}",
                self.lambda
            )));
        }
        if !(self.tau > inv && self.tau < 1.0) {
            return Err(LatticeError::InvalidParameter(format!(
                "τ must lie in (1/α, 1) = ({inv}, 1), got {}",
                self.tau
            )));
        }
        if !(self.q > inv) {
            return Err(LatticeError::InvalidParameter(format!(
                "q must exceed 1/α = {inv}, got {}",
                self.q
            )));
        }
        Ok(())
    }
}

/// The guaranteed bound on S for a CBC-constructed vector:
/// [ (κ/φ(n)) (Σ_{∅≠u} |u| γ_u^λ [2ζ(αλ)]^{|u|}) (Σ_u γ_u^λ [2ζ(αλ)]^{|u|}) ]^{1/λ}
/// with κ = 2^{2αλ+1} + 1.
pub fn suapp_bound(params: &SpaceParams, n: usize, lambda: f64) -> Result<f64> {
    let alpha = params.alpha;
    if !(lambda > 1.0 / alpha && lambda <= 1.0) {
        return Err(LatticeError::InvalidParameter(format!(
            "λ must lie in (1/α, 1], got {lambda}"
        )));
    }
    let kappa = 2.0f64.powf(2.0 * alpha * lambda + 1.0) + 1.0;
    let c = 2.0 * riemann_zeta(alpha * lambda);
    let (plain, sized) = subset_sums(&params.weights, params.d, lambda, c)?;
    let phi = euler_phi(n as u64) as f64;
    Ok((kappa / phi * sized * plain).powf(1.0 / lambda))
}

/// λ grid log-spaced in (1/α, 1] minimizing `suapp_bound`.
pub fn best_suapp_bound(params: &SpaceParams, n: usize) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for i in 1..=20 {
        let lambda = (1.0 / params.alpha).powf((20 - i) as f64 / 20.0);
        let b = suapp_bound(params, n, lambda)?;
        if best.is_none_or(|(_, bb)| b < bb) {
            best = Some((lambda, b));
        }
    }
    Ok(best.unwrap())
}

/// M = S^{-1/2} and the resulting worst-case L2 bound √2 S^{1/4}
/// (equal to (1/M + M·S)^{1/2} at the balancing M).
pub fn l2_error_bound(s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(LatticeError::InvalidParameter(format!(
            "L2 bound needs S > 0, got {s}"
        )));
    }
    Ok((s.powf(-0.5), std::f64::consts::SQRT_2 * s.powf(0.25)))
}

/// An L∞ bound together with the index-set threshold it balances at.
#[derive(Debug, Clone, Copy)]
pub struct LinfBound {
    pub m: f64,
    pub bound: f64,
    pub tau: f64,
    /// The criterion value the bound was formed from (S, or the halved
    /// variant for the high-smoothness form).
    pub criterion: f64,
}

/// First L∞ bound: q = τ, M = ((C₂/(3C₁)) S^{-1})^{ατ/(ατ²+ατ-τ+1)} and
/// bound = √2 (3 C₂^{ατ(1+τ)/(1-τ)} C₁ S)^{(1-τ)/(2(1-τ+ατ+ατ²))}.
pub fn linf_error_bound_v1(ctx: &CriterionContext, z: &[usize], tau: f64) -> Result<LinfBound> {
    let params = &ctx.params;
    let alpha = params.alpha;
    if !(tau > 1.0 / alpha && tau < 1.0) {
        return Err(LatticeError::InvalidParameter(format!(
            "τ must lie in (1/α, 1), got {tau}"
        )));
    }
    let s = s_criterion(ctx, z)?.total;
    if !(s > 0.0) {
        return Err(LatticeError::DegenerateWeights("criterion S is not positive".into()));
    }
    let c1 = cardinality_constant(params, tau)?;
    let c2 = truncation_constant(params, tau)?;
    let m = (c2 / (3.0 * c1) / s).powf(alpha * tau / (alpha * tau * tau + alpha * tau - tau + 1.0));
    if m < 1.0 {
        return Err(LatticeError::NotApplicable(format!(
            "balancing M = {m:.6e} < 1; n is not large enough for this τ"
        )));
    }
    let d_exp = 1.0 - tau + alpha * tau + alpha * tau * tau;
    let bound = std::f64::consts::SQRT_2
        * (3.0 * c2.powf(alpha * tau * (1.0 + tau) / (1.0 - tau)) * c1 * s)
            .powf((1.0 - tau) / (2.0 * d_exp));
    Ok(LinfBound { m, bound, tau, criterion: s })
}

/// Second L∞ bound for α > 2, built on the halved space (α/2, √γ):
/// M = ((1/3) C₂ S̃^{-2})^{ατ/(ατ-τ+1)} and
/// bound = √2 (3 C₂^{ατ/(1-τ)} S̃²)^{(1-τ)/(2(1-τ+ατ))}.
pub fn linf_error_bound_v2(ctx: &CriterionContext, z: &[usize], tau: f64) -> Result<LinfBound> {
    let params = &ctx.params;
    let alpha = params.alpha;
    if alpha <= 2.0 {
        return Err(LatticeError::InvalidParameter(format!(
            "the halved-space bound needs α > 2, got {alpha}"
        )));
    }
    if !(tau > 1.0 / alpha && tau < 0.5) {
        return Err(LatticeError::InvalidParameter(format!(
            "τ must lie in (1/α, 1/2), got {tau}"
        )));
    }
    let (half_weights, half_alpha) = sqrt_half_transform(&params.weights, alpha)?;
    let half_params = SpaceParams::new(params.d, half_alpha, half_weights)?;
    let half_ctx = CriterionContext::new(ctx.n, half_params)?;
    let s_tilde = s_criterion(&half_ctx, z)?.total;
    if !(s_tilde > 0.0) {
        return Err(LatticeError::DegenerateWeights("halved criterion S̃ is not positive".into()));
    }
    let c2 = truncation_constant(params, tau)?;
    let m = (c2 / 3.0 / (s_tilde * s_tilde)).powf(alpha * tau / (alpha * tau - tau + 1.0));
    if m < 1.0 {
        return Err(LatticeError::NotApplicable(format!(
            "balancing M = {m:.6e} < 1; n is not large enough for this τ"
        )));
    }
    let d_exp = 1.0 - tau + alpha * tau;
    let bound = std::f64::consts::SQRT_2
        * (3.0 * c2.powf(alpha * tau / (1.0 - tau)) * s_tilde * s_tilde)
            .powf((1.0 - tau) / (2.0 * d_exp));
    Ok(LinfBound { m, bound, tau, criterion: s_tilde })
}

/// Coarse grid search over 20 log-spaced τ minimizing an L∞ bound.
fn best_linf<F>(alpha: f64, hi: f64, eval: F) -> Result<LinfBound>
where
    F: Fn(f64) -> Result<LinfBound>,
{
    let lo = (1.0 / alpha) * 1.02;
    let mut best: Option<LinfBound> = None;
    for i in 0..20 {
        let tau = lo * (hi / lo).powf(i as f64 / 19.0);
        match eval(tau) {
            Ok(b) => {
                if best.as_ref().is_none_or(|bb| b.bound < bb.bound) {
                    best = Some(b);
                }
            }
            Err(LatticeError::NotApplicable(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| {
        LatticeError::NotApplicable("no τ in the grid yields an applicable bound".into())
    })
}

pub fn best_linf_v1(ctx: &CriterionContext, z: &[usize]) -> Result<LinfBound> {
    best_linf(ctx.params.alpha, 0.99, |tau| linf_error_bound_v1(ctx, z, tau))
}

pub fn best_linf_v2(ctx: &CriterionContext, z: &[usize]) -> Result<LinfBound> {
    best_linf(ctx.params.alpha, 0.4999, |tau| linf_error_bound_v2(ctx, z, tau))
}

/// Order bound on the embedded penalty max_s X_s:
/// ((p/(p-1)) Σ_{m=m1}^{m2} (p^{αλ-1})^m)^{1/λ}.
pub fn embedded_penalty_bound(p: u64, m1: u32, m2: u32, alpha: f64, lambda: f64) -> Result<f64> {
    if !is_prime(p) {
        return Err(LatticeError::InvalidParameter(format!("p = {p} is not prime")));
    }
    if m2 < m1 {
        return Err(LatticeError::InvalidParameter(format!("need m2 ≥ m1, got {m1}..{m2}")));
    }
    if !(lambda > 1.0 / alpha && lambda <= 1.0) {
        return Err(LatticeError::InvalidParameter(format!(
            "λ must lie in (1/α, 1], got {lambda}"
        )));
    }
    let pf = p as f64;
    let base = pf.powf(alpha * lambda - 1.0);
    let sum: f64 = (m1..=m2).map(|m| base.powi(m as i32)).sum();
    Ok((pf / (pf - 1.0) * sum).powf(1.0 / lambda))
}

/// Everything the `bounds` report carries for one vector.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub s: f64,
    pub m_l2: f64,
    pub l2_bound: f64,
    pub lambda: f64,
    pub suapp: f64,
    pub linf_v1: Option<LinfBound>,
    pub linf_v2: Option<LinfBound>,
}

/// Assemble the full report: S, the balancing M with the L2 bound, the
/// construction guarantee at λ, and both L∞ bounds where applicable.
pub fn bound_report(ctx: &CriterionContext, z: &[usize], bp: &BoundParams) -> Result<BoundReport> {
    bp.validate(ctx.params.alpha)?;
    let s = s_criterion(ctx, z)?.total;
    let (m_l2, l2_bound) = l2_error_bound(s)?;
    let suapp = suapp_bound(&ctx.params, ctx.n, bp.lambda)?;
    let linf_v1 = match linf_error_bound_v1(ctx, z, bp.tau) {
        Ok(b) => Some(b),
        Err(LatticeError::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    let linf_v2 = if ctx.params.alpha > 2.0 {
        // the halved-space form needs τ < 1/2; fall back to the midpoint
        // of its range when the requested τ is outside (the report carries
        // the τ actually used)
        let tau2 = if bp.tau < 0.5 { bp.tau } else { (1.0 / ctx.params.alpha + 0.5) / 2.0 };
        match linf_error_bound_v2(ctx, z, tau2) {
            Ok(b) => Some(b),
            Err(LatticeError::NotApplicable(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(BoundReport { s, m_l2, l2_bound, lambda: bp.lambda, suapp, linf_v1, linf_v2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::korobov::truncation_tail_bound;
    use crate::weights::{paper_weight_family, PaperFamily, WeightModel};

    #[test]
    fn phi_and_units() {
        assert_eq!(euler_phi(8), 4);
        assert_eq!(units(6).unwrap(), vec![1, 5]);
        assert_eq!(euler_phi(1009), 1008);
        assert_eq!(units(7).unwrap().len(), euler_phi(7) as usize);
        assert_eq!(euler_phi(1), 1);
    }

    #[test]
    fn phi_lower_bound_up_to_million() {
        // linear-sieve totient as the independent oracle
        let n_max = 1_000_000usize;
        let mut phi: Vec<u32> = (0..=n_max as u32).collect();
        for i in 2..=n_max {
            if phi[i] == i as u32 {
                let mut j = i;
                while j <= n_max {
                    phi[j] -= phi[j] / i as u32;
                    j += i;
                }
            }
        }
        for n in 2..=n_max {
            assert!(1.0 / (phi[n] as f64) < 9.0 / n as f64, "n = {n}");
        }
        for &n in &[12u64, 97, 1009, 65536, 999983] {
            assert_eq!(euler_phi(n), phi[n as usize] as u64);
        }
    }

    #[test]
    fn mod_inverse_works() {
        for n in 2..50u64 {
            for a in 1..n {
                if gcd(a, n) == 1 {
                    let inv = mod_inverse(a, n).unwrap();
                    assert_eq!(a * inv % n, 1, "a={a} n={n}");
                } else {
                    assert!(mod_inverse(a, n).is_none());
                }
            }
        }
    }

    fn product_ctx(n: usize, d: usize, alpha: f64) -> CriterionContext {
        let w = paper_weight_family(PaperFamily::Product, d, alpha).unwrap();
        CriterionContext::new(n, SpaceParams::new(d, alpha, w).unwrap()).unwrap()
    }

    #[test]
    fn cbc_first_component_is_one() {
        let ctx = product_ctx(16, 3, 2.0);
        let v = cbc_construct(&ctx, 3).unwrap();
        assert_eq!(v.z[0], 1);
        assert_eq!(v.z.len(), 3);
        for &zj in &v.z {
            assert_eq!(gcd(zj as u64, 16), 1);
        }
    }

    #[test]
    fn cbc_matches_exhaustive_small() {
        // n = 4, d = 2, α = 2, γ_j = j^{-3}: exhaustive argmin over 𝕌_4.
        let w = WeightModel::new_product(vec![1.0, 0.125]).unwrap();
        let ctx = CriterionContext::new(4, SpaceParams::new(2, 2.0, w).unwrap()).unwrap();
        let v = cbc_construct(&ctx, 2).unwrap();
        let mut best = Vec::new();
        for s in 1..=2usize {
            let mut z = best.clone();
            z.push(0);
            let cands = units(4).unwrap();
            let values: Vec<f64> = cands
                .iter()
                .map(|&c| {
                    z[s - 1] = c;
                    crate::criterion::t_component(&ctx, 2, &z).unwrap()
                })
                .collect();
            let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
            let pick = cands
                .iter()
                .zip(values.iter())
                .find(|(_, &v)| v <= vmin + TIE_RELATIVE * vmin.abs())
                .map(|(&c, _)| c)
                .unwrap();
            best.push(pick);
        }
        assert_eq!(v.z, best);
    }

    #[test]
    fn suapp_plugin_value() {
        // d=1, γ=1, α=2, λ=1, n=3: κ = 33, bound = (33/2)·2ζ(2)·(1+2ζ(2))
        let w = WeightModel::new_product(vec![1.0]).unwrap();
        let p = SpaceParams::new(1, 2.0, w).unwrap();
        let z2 = 2.0 * riemann_zeta(2.0);
        let expect = 33.0 / 2.0 * z2 * (1.0 + z2);
        let b = suapp_bound(&p, 3, 1.0).unwrap();
        assert!((b - expect).abs() < 1e-12 * expect);
        assert!(suapp_bound(&p, 3, 0.5).is_err());
        assert!(suapp_bound(&p, 3, 1.5).is_err());
    }

    #[test]
    fn suapp_phi_scaling() {
        let w = paper_weight_family(PaperFamily::Product, 4, 2.0).unwrap();
        let p = SpaceParams::new(4, 2.0, w).unwrap();
        for &lambda in &[0.6, 0.75, 1.0] {
            let b10 = suapp_bound(&p, 1 << 10, lambda).unwrap();
            let b11 = suapp_bound(&p, 1 << 11, lambda).unwrap();
            let ratio = b10 / b11;
            let expect = 2.0f64.powf(1.0 / lambda);
            assert!((ratio - expect).abs() < 1e-12 * expect, "λ={lambda}: {ratio} vs {expect}");
        }
    }

    #[test]
    fn suapp_dominates_constructed_s() {
        for &n in &[4usize, 9, 16] {
            let ctx = product_ctx(n, 3, 2.0);
            let v = cbc_construct(&ctx, 3).unwrap();
            let s = s_criterion(&ctx, &v.z).unwrap().total;
            for &lambda in &[0.55, 0.75, 1.0] {
                let b = suapp_bound(&ctx.params, n, lambda).unwrap();
                assert!(s <= b, "n={n} λ={lambda}: S = {s} > bound = {b}");
            }
        }
    }

    #[test]
    fn l2_bound_examples() {
        let (m, b) = l2_error_bound(4.0).unwrap();
        assert_eq!(m, 0.5);
        assert!((b - 2.0).abs() < 1e-15);
        let (m1, b1) = l2_error_bound(1.0).unwrap();
        assert_eq!(m1, 1.0);
        assert!((b1 - std::f64::consts::SQRT_2).abs() < 1e-15);
        for &s in &[0.037, 1.0, 17.25, 4096.0] {
            let (m, b) = l2_error_bound(s).unwrap();
            let direct = (1.0 / m + m * s).sqrt();
            assert!((direct - b).abs() < 1e-14 * b);
        }
        assert!(l2_error_bound(0.0).is_err());
    }

    #[test]
    fn linf_v1_reproduces_two_term_form() {
        let ctx = product_ctx(64, 2, 2.0);
        let v = cbc_construct(&ctx, 2).unwrap();
        let b = linf_error_bound_v1(&ctx, &v.z, 0.8).unwrap();
        let c1 = cardinality_constant(&ctx.params, 0.8).unwrap();
        let tail = truncation_tail_bound(&ctx.params, b.m, 0.8).unwrap();
        let two_term = (tail + 3.0 * b.m.powf(1.8) * c1 * b.criterion).sqrt();
        assert!(
            (two_term - b.bound).abs() < 1e-12 * b.bound,
            "{two_term} vs {}",
            b.bound
        );
    }

    #[test]
    fn linf_v2_reproduces_two_term_form() {
        let w = WeightModel::new_product(vec![1.0]).unwrap();
        let ctx = CriterionContext::new(128, SpaceParams::new(1, 4.0, w).unwrap()).unwrap();
        let v = cbc_construct(&ctx, 1).unwrap();
        let b = linf_error_bound_v2(&ctx, &v.z, 0.3).unwrap();
        let tail = truncation_tail_bound(&ctx.params, b.m, 0.3).unwrap();
        let two_term = (tail + 3.0 * b.m * b.criterion * b.criterion).sqrt();
        assert!(
            (two_term - b.bound).abs() < 1e-12 * b.bound,
            "{two_term} vs {}",
            b.bound
        );
        assert!(linf_error_bound_v2(&ctx, &v.z, 0.6).is_err());
        let ctx2 = product_ctx(8, 1, 2.0);
        assert!(linf_error_bound_v2(&ctx2, &[1], 0.3).is_err());
    }

    #[test]
    fn embedded_penalty_values() {
        // p=2, α=2, λ=1, m=1..2: (2 (2 + 4))^1 = 12
        let b = embedded_penalty_bound(2, 1, 2, 2.0, 1.0).unwrap();
        assert!((b - 12.0).abs() < 1e-12);
        // single term: ((p/(p-1)) p^{(αλ-1) m1})^{1/λ}
        let b1 = embedded_penalty_bound(3, 2, 2, 2.0, 1.0).unwrap();
        assert!((b1 - 1.5 * 9.0).abs() < 1e-12 * b1);
        assert!(embedded_penalty_bound(4, 1, 2, 2.0, 1.0).is_err());
    }

    #[test]
    fn embedded_small_run() {
        let w = paper_weight_family(PaperFamily::Product, 3, 2.0).unwrap();
        let params = SpaceParams::new(3, 2.0, w).unwrap();
        let res = cbc_construct_embedded(2, 2, 4, &params).unwrap();
        assert_eq!(res.z_emb.len(), 3);
        assert_eq!(res.x_values[0], 1.0);
        for m in 2..=4u32 {
            let s_emb = res.s_emb(m);
            let bound = res.max_x() * res.s_baseline(m);
            assert!(
                s_emb <= bound * (1.0 + 1e-12),
                "m={m}: S_emb = {s_emb} > max_s X_s · S_base = {bound}"
            );
        }
        for &z in &res.z_emb {
            assert_eq!(z % 2, 1);
        }
    }
}
