//! The function-space layer: decay function r, the one-dimensional kernel
//! sum ω, the reproducing kernel K_d, and the index set A_d(M).
//!
//! Convention note: the smoothness parameter α here is the exponent on
//! |h_j| in the decay function, so α > 1 and the kernel sum uses |h|^{-α}.
//! Some references write 2α where we write α; all interfaces in this crate
//! fix the present convention.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{LatticeError, Result};
use crate::weights::{self, WeightModel, SUBSET_ENUM_CAP};
use crate::zeta::{bernoulli_poly_coeffs, poly_eval, riemann_zeta};

/// Default cap on enumerated index-set size.
pub const INDEX_SET_CAP: usize = 10_000_000;

/// A frequency index h ∈ Z^d.
pub type FrequencyIndex = Vec<i64>;

/// supp(h) as 1-based coordinates, strictly increasing.
pub fn support(h: &[i64]) -> Vec<usize> {
    h.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Fractional part mapped into [0, 1).
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Space parameters: dimension, smoothness, weights.
#[derive(Debug, Clone)]
pub struct SpaceParams {
    pub d: usize,
    pub alpha: f64,
    pub weights: WeightModel,
}

impl SpaceParams {
    pub fn new(d: usize, alpha: f64, weights: WeightModel) -> Result<Self> {
        if d < 1 {
            return Err(LatticeError::InvalidParameter("d must be ≥ 1".into()));
        }
        if !(alpha > 1.0) {
            return Err(LatticeError::InvalidParameter(format!(
                "α must be > 1, got {alpha}"
            )));
        }
        if weights.dimension() < d {
            return Err(LatticeError::InvalidParameter(format!(
                "weight model covers {} coordinates but d = {d}",
                weights.dimension()
            )));
        }
        Ok(SpaceParams { d, alpha, weights })
    }
}

/// r(h) = (1/γ_supp(h)) ∏_{j∈supp(h)} |h_j|^α, with +∞ when γ_supp = 0.
pub fn r_value(params: &SpaceParams, h: &[i64]) -> f64 {
    let w = weights::weight_of(&params.weights, &support(h)).expect("support within d");
    if w == 0.0 {
        return f64::INFINITY;
    }
    let prod: f64 = h
        .iter()
        .filter(|&&v| v != 0)
        .map(|&v| (v.unsigned_abs() as f64).powf(params.alpha))
        .product();
    prod / w
}

/// 1/r(h) assembled as γ_supp(h) ∏ |h_j|^{-α}; never divides by a weight.
pub fn r_reciprocal(params: &SpaceParams, h: &[i64]) -> f64 {
    let w = weights::weight_of(&params.weights, &support(h)).expect("support within d");
    if w == 0.0 {
        return 0.0;
    }
    let prod: f64 = h
        .iter()
        .filter(|&&v| v != 0)
        .map(|&v| (v.unsigned_abs() as f64).powf(-params.alpha))
        .product();
    w * prod
}

/// Largest even α handled by the Bernoulli closed form before coefficient
/// growth degrades f64 accuracy.
const OMEGA_CLOSED_FORM_MAX: u32 = 40;
/// Cap on series length for non-even α.
const OMEGA_SERIES_CAP: f64 = 2e8;
const OMEGA_SERIES_EPS: f64 = 1e-12;

fn omega_poly(alpha_even: u32) -> &'static [f64] {
    static CACHE: OnceLock<Mutex<HashMap<u32, &'static [f64]>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(alpha_even).or_insert_with(|| {
        // ω(2m, x) = (-1)^{m-1} (2π)^{2m} B_{2m}(x) / (2m)!
        let m = alpha_even / 2;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let mut scale = sign;
        for k in 1..=alpha_even {
            scale *= 2.0 * std::f64::consts::PI / k as f64;
        }
        let coeffs: Vec<f64> = bernoulli_poly_coeffs(alpha_even as usize)
            .into_iter()
            .map(|c| c * scale)
            .collect();
        Box::leak(coeffs.into_boxed_slice())
    })
}

fn even_alpha(alpha: f64) -> Option<u32> {
    if alpha.fract() == 0.0 && alpha >= 2.0 && alpha <= OMEGA_CLOSED_FORM_MAX as f64 {
        let a = alpha as u32;
        if a % 2 == 0 {
            return Some(a);
        }
    }
    None
}

/// ω(α, x) = Σ_{h≠0} e^{2πi h x} / |h|^α = 2 Σ_{h≥1} cos(2πhx)/h^α.
///
/// Even integer α uses the degree-α Bernoulli polynomial closed form.
/// Other α use a truncated cosine series with the certified tail bound
/// 2 Σ_{h>H} h^{-α} ≤ 2 H^{1-α}/(α-1) ≤ 1e-12.
pub fn omega(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(LatticeError::InvalidParameter(format!(
            "ω requires α > 1, got {alpha}"
        )));
    }
    let x = frac(x);
    if let Some(a) = even_alpha(alpha) {
        return Ok(poly_eval(omega_poly(a), x));
    }
    let h_max = (2.0 / (OMEGA_SERIES_EPS * (alpha - 1.0))).powf(1.0 / (alpha - 1.0));
    if h_max > OMEGA_SERIES_CAP {
        return Err(LatticeError::Capacity(format!(
            "cosine series for α = {alpha} needs {h_max:.3e} terms for a 1e-12 tail"
        )));
    }
    let h_max = h_max.ceil() as u64;
    let two_pi_x = 2.0 * std::f64::consts::PI * x;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for h in 1..=h_max {
        let term = (two_pi_x * h as f64).cos() * (h as f64).powf(-alpha);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    Ok(2.0 * (sum + comp))
}

/// K_d(x, y) = Σ_u γ_u ∏_{j∈u} ω(α, {x_j - y_j}).
///
/// Product weights use the factored form ∏_j (1 + γ_j ω_j); other weight
/// families enumerate subsets and are guarded at d ≤ 20.
pub fn kernel_value(params: &SpaceParams, x: &[f64], y: &[f64]) -> Result<f64> {
    let d = params.d;
    assert_eq!(x.len(), d);
    assert_eq!(y.len(), d);
    let mut omegas = Vec::with_capacity(d);
    for j in 0..d {
        omegas.push(omega(params.alpha, frac(x[j] - y[j]))?);
    }
    if let WeightModel::Product { gamma } = &params.weights {
        return Ok((0..d).map(|j| 1.0 + gamma[j] * omegas[j]).product());
    }
    if d > SUBSET_ENUM_CAP {
        return Err(LatticeError::Capacity(format!(
            "kernel for non-product weights needs d ≤ {SUBSET_ENUM_CAP}, got {d}"
        )));
    }
    // ω products over subsets via the lowest-set-bit recurrence.
    let mut prod = vec![0.0f64; 1 << d];
    prod[0] = 1.0;
    let mut total = 0.0f64;
    let mut subset = Vec::with_capacity(d);
    for mask in 0..(1u64 << d) {
        if mask > 0 {
            let low = mask.trailing_zeros() as usize;
            prod[mask as usize] = prod[(mask & (mask - 1)) as usize] * omegas[low];
        }
        subset.clear();
        subset.extend((0..d).filter(|j| mask >> j & 1 == 1).map(|j| j + 1));
        let w = weights::weight_of(&params.weights, &subset)?;
        total += w * prod[mask as usize];
    }
    Ok(total)
}

/// The index set A_d(M) = {h : r(h) ≤ M} in canonical lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    pub m: f64,
    pub entries: Vec<FrequencyIndex>,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, h: &[i64]) -> bool {
        self.entries.binary_search_by(|e| e.as_slice().cmp(h)).is_ok()
    }
}

/// Exact A_d(M), depth-first over subsets u with γ_u·M ≥ 1 and positive
/// vectors under the budget ∏ |h_j|^α ≤ γ_u·M, then sign expansion.
pub fn enumerate_index_set(params: &SpaceParams, m: f64) -> Result<IndexSet> {
    enumerate_index_set_with_cap(params, m, INDEX_SET_CAP)
}

pub fn enumerate_index_set_with_cap(params: &SpaceParams, m: f64, cap: usize) -> Result<IndexSet> {
    if !m.is_finite() {
        return Err(LatticeError::InvalidParameter("M must be finite".into()));
    }
    let d = params.d;
    let mut entries: Vec<FrequencyIndex> = Vec::new();
    if m >= 1.0 {
        entries.push(vec![0i64; d]); // r(0) = 1
    }
    let is_product = matches!(params.weights, WeightModel::Product { .. });
    if !is_product && d > SUBSET_ENUM_CAP {
        return Err(LatticeError::Capacity(format!(
            "index-set enumeration for non-product weights needs d ≤ {SUBSET_ENUM_CAP}, got {d}"
        )));
    }
    // Optimistic per-suffix growth factors prune the subset search when
    // weights can only shrink by adding further coordinates.
    let suffix_best: Vec<f64> = match &params.weights {
        WeightModel::Product { gamma } => {
            let mut sb = vec![1.0f64; d + 1];
            for j in (0..d).rev() {
                sb[j] = sb[j + 1] * gamma[j].max(1.0);
            }
            sb
        }
        _ => vec![f64::INFINITY; d + 1],
    };
    let mut subset: Vec<usize> = Vec::new();
    enumerate_subsets(params, m, cap, 0, 1.0, &suffix_best, &mut subset, &mut entries)?;
    entries.sort_unstable();
    Ok(IndexSet { m, entries })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_subsets(
    params: &SpaceParams,
    m: f64,
    cap: usize,
    next: usize,
    gamma_partial: f64,
    suffix_best: &[f64],
    subset: &mut Vec<usize>,
    entries: &mut Vec<FrequencyIndex>,
) -> Result<()> {
    let d = params.d;
    for j in next..d {
        // Even the most favourable completion cannot reach γ_u·M ≥ 1.
        if matches!(params.weights, WeightModel::Product { .. }) {
            let gj = match &params.weights {
                WeightModel::Product { gamma } => gamma[j],
                _ => unreachable!(),
            };
            if gamma_partial * gj * suffix_best[j + 1] * m < 1.0 {
                continue;
            }
            subset.push(j + 1);
            let gu = gamma_partial * gj;
            if gu * m >= 1.0 {
                emit_subset_vectors(params, m, cap, subset, gu, entries)?;
            }
            enumerate_subsets(params, m, cap, j + 1, gu, suffix_best, subset, entries)?;
            subset.pop();
        } else {
            subset.push(j + 1);
            let gu = weights::weight_of(&params.weights, subset)?;
            if gu * m >= 1.0 {
                emit_subset_vectors(params, m, cap, subset, gu, entries)?;
            }
            // Non-product weights are not monotone in u; recurse regardless.
            enumerate_subsets(params, m, cap, j + 1, gamma_partial, suffix_best, subset, entries)?;
            subset.pop();
        }
    }
    Ok(())
}

/// All h with supp(h) = u and r(h) ≤ M, via positive vectors plus signs.
fn emit_subset_vectors(
    params: &SpaceParams,
    m: f64,
    cap: usize,
    subset: &[usize],
    gamma_u: f64,
    entries: &mut Vec<FrequencyIndex>,
) -> Result<()> {
    let budget = gamma_u * m; // ∏ h_j^α ≤ budget
    let mut mags = vec![1u64; subset.len()];
    emit_positive(params, cap, subset, budget, 0, 1.0, &mut mags, m, entries)
}

#[allow(clippy::too_many_arguments)]
fn emit_positive(
    params: &SpaceParams,
    cap: usize,
    subset: &[usize],
    budget: f64,
    pos: usize,
    prod_so_far: f64,
    mags: &mut Vec<u64>,
    m: f64,
    entries: &mut Vec<FrequencyIndex>,
) -> Result<()> {
    let alpha = params.alpha;
    if pos == subset.len() {
        // Sign expansion; membership decided by r_value for bit-exact
        // agreement with a dense scan.
        let k = subset.len();
        let mut h = vec![0i64; params.d];
        for signs in 0..(1u64 << k) {
            for (i, &j) in subset.iter().enumerate() {
                let v = mags[i] as i64;
                h[j - 1] = if signs >> i & 1 == 1 { -v } else { v };
            }
            if r_value(params, &h) <= m {
                if entries.len() >= cap {
                    return Err(LatticeError::Capacity(format!(
                        "index set exceeds cap of {cap} entries (partial count {})",
                        entries.len()
                    )));
                }
                entries.push(h.clone());
            }
        }
        return Ok(());
    }
    let remaining = budget / prod_so_far;
    if remaining < 1.0 * (1.0 - 1e-12) {
        return Ok(());
    }
    // Loose upper bound on |h_j|; exact membership is re-checked above.
    let h_hi = remaining.powf(1.0 / alpha) * (1.0 + 1e-12) + 1.0;
    let h_hi = h_hi.min(9.2e18) as u64;
    for v in 1..=h_hi {
        let p = prod_so_far * (v as f64).powf(alpha);
        if p > budget * (1.0 + 1e-9) {
            break;
        }
        mags[pos] = v;
        emit_positive(params, cap, subset, budget, pos + 1, p, mags, m, entries)?;
    }
    Ok(())
}

/// Bounds on |A_d(M)|: upper M^q Σ_u γ_u^q [2ζ(αq)]^{|u|} for q > 1/α,
/// lower (γ_{1} M)^{1/α} when M ≥ 1 (0 otherwise).
pub fn cardinality_bounds(params: &SpaceParams, m: f64, q: f64) -> Result<(f64, f64)> {
    if q <= 1.0 / params.alpha {
        return Err(LatticeError::InvalidParameter(format!(
            "cardinality bound needs q > 1/α = {}, got {q}",
            1.0 / params.alpha
        )));
    }
    let c1 = cardinality_constant(params, q)?;
    let upper = m.powf(q) * c1;
    let lower = if m >= 1.0 {
        let g1 = weights::weight_of(&params.weights, &[1])?;
        (g1 * m).powf(1.0 / params.alpha)
    } else {
        0.0
    };
    Ok((lower, upper))
}

/// C_{1,d,q,α,γ} = Σ_u γ_u^q [2ζ(αq)]^{|u|}.
pub fn cardinality_constant(params: &SpaceParams, q: f64) -> Result<f64> {
    if q <= 1.0 / params.alpha {
        return Err(LatticeError::InvalidParameter(format!(
            "C₁ needs q > 1/α = {}, got {q}",
            1.0 / params.alpha
        )));
    }
    let c = 2.0 * riemann_zeta(params.alpha * q);
    Ok(weights::subset_sums(&params.weights, params.d, q, c)?.0)
}

/// C_{2,d,τ,α,γ} = γ_{1}^{(τ-1)/(ατ)} (τ/(1-τ)) (Σ_u γ_u^τ [2ζ(ατ)]^{|u|})^{1/τ}.
pub fn truncation_constant(params: &SpaceParams, tau: f64) -> Result<f64> {
    if tau <= 1.0 / params.alpha || tau >= 1.0 {
        return Err(LatticeError::InvalidParameter(format!(
            "truncation bound needs τ ∈ (1/α, 1), got {tau}"
        )));
    }
    let g1 = weights::weight_of(&params.weights, &[1])?;
    let c = 2.0 * riemann_zeta(params.alpha * tau);
    let sum = weights::subset_sums(&params.weights, params.d, tau, c)?.0;
    Ok(g1.powf((tau - 1.0) / (params.alpha * tau)) * tau / (1.0 - tau) * sum.powf(1.0 / tau))
}

/// Tail bound Σ_{h∉A_d(M)} 1/r(h) ≤ C₂ M^{-(1-τ)/(ατ)} for M ≥ 1.
pub fn truncation_tail_bound(params: &SpaceParams, m: f64, tau: f64) -> Result<f64> {
    if m < 1.0 {
        return Err(LatticeError::InvalidParameter(format!(
            "truncation tail bound requires M ≥ 1, got {m}"
        )));
    }
    let c2 = truncation_constant(params, tau)?;
    Ok(c2 * m.powf(-(1.0 - tau) / (params.alpha * tau)))
}
