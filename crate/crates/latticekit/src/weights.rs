//! Weight systems γ_u over coordinate subsets.
//!
//! Four families are supported: explicit tables, product weights,
//! product-and-order-dependent (POD) weights, and smoothness-driven POD
//! (SPOD) weights. Subsets are given as strictly increasing slices of
//! 1-based coordinate indices; the empty subset always carries weight 1.
//!
//! Zero weights are allowed. Quantities of the form 1/r(h) are always
//! assembled as γ_supp(h) · ∏ |h_j|^{-α}, so a zero weight contributes 0
//! and no division by a weight ever happens.

use std::collections::BTreeMap;

use crate::error::{LatticeError, Result};
use crate::zeta::ln_factorial;

/// Maximum dimension for paths that enumerate all 2^d coordinate subsets.
pub const SUBSET_ENUM_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightModel {
    /// Direct table u ↦ γ_u. Must contain ∅ ↦ 1.
    Explicit {
        d: usize,
        table: BTreeMap<Vec<usize>, f64>,
    },
    /// γ_u = ∏_{j∈u} γ_j.
    Product { gamma: Vec<f64> },
    /// γ_u = Γ_{|u|} ∏_{j∈u} γ_j with Γ_0 = 1.
    Pod { order: Vec<f64>, gamma: Vec<f64> },
    /// γ_u = Σ_{ν_u ∈ {1:σ}^{|u|}} Γ_{|ν_u|} ∏_{j∈u} γ_{j,ν_j} with Γ_0 = 1.
    Spod {
        sigma: usize,
        order: Vec<f64>,
        /// `gamma[j-1][ν-1]` holds γ_{j,ν}.
        gamma: Vec<Vec<f64>>,
    },
}

fn check_nonneg_finite(vals: &[f64], what: &str) -> Result<()> {
    for &v in vals {
        if !v.is_finite() || v < 0.0 {
            return Err(LatticeError::InvalidParameter(format!(
                "{what} must be nonnegative and finite, got {v}"
            )));
        }
    }
    Ok(())
}

impl WeightModel {
    pub fn new_explicit(d: usize, table: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        match table.get(&Vec::new()) {
            Some(&1.0) => {}
            _ => {
                return Err(LatticeError::InvalidParameter(
                    "explicit weight table must map the empty subset to 1".into(),
                ))
            }
        }
        for (u, &v) in &table {
            if !v.is_finite() || v < 0.0 {
                return Err(LatticeError::InvalidParameter(format!(
                    "weight of {u:?} must be nonnegative and finite, got {v}"
                )));
            }
            for (i, &j) in u.iter().enumerate() {
                if j < 1 || j > d {
                    return Err(LatticeError::OutOfRange { coord: j, dim: d });
                }
                if i > 0 && u[i - 1] >= j {
                    return Err(LatticeError::InvalidParameter(format!(
                        "subset {u:?} is not strictly increasing"
                    )));
                }
            }
        }
        Ok(WeightModel::Explicit { d, table })
    }

    pub fn new_product(gamma: Vec<f64>) -> Result<Self> {
        check_nonneg_finite(&gamma, "product weight")?;
        Ok(WeightModel::Product { gamma })
    }

    pub fn new_pod(order: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        check_nonneg_finite(&order, "POD order factor")?;
        check_nonneg_finite(&gamma, "POD coordinate weight")?;
        if order.len() != gamma.len() + 1 {
            return Err(LatticeError::InvalidParameter(format!(
                "POD needs order factors for 0..=d: got {} factors for d = {}",
                order.len(),
                gamma.len()
            )));
        }
        if order[0] != 1.0 {
            return Err(LatticeError::InvalidParameter("POD requires Γ_0 = 1".into()));
        }
        Ok(WeightModel::Pod { order, gamma })
    }

    pub fn new_spod(sigma: usize, order: Vec<f64>, gamma: Vec<Vec<f64>>) -> Result<Self> {
        if sigma == 0 {
            return Err(LatticeError::InvalidParameter("SPOD requires σ ≥ 1".into()));
        }
        check_nonneg_finite(&order, "SPOD order factor")?;
        let d = gamma.len();
        // Shorter order arrays are an error, not implicit zeros.
        if order.len() != sigma * d + 1 {
            return Err(LatticeError::InvalidParameter(format!(
                "SPOD needs order factors for 0..=σ·d = {}: got {}",
                sigma * d,
                order.len()
            )));
        }
        if order[0] != 1.0 {
            return Err(LatticeError::InvalidParameter("SPOD requires Γ_0 = 1".into()));
        }
        for (j, row) in gamma.iter().enumerate() {
            check_nonneg_finite(row, "SPOD coordinate weight")?;
            if row.len() != sigma {
                return Err(LatticeError::InvalidParameter(format!(
                    "SPOD coordinate {} needs σ = {sigma} degrees, got {}",
                    j + 1,
                    row.len()
                )));
            }
        }
        Ok(WeightModel::Spod { sigma, order, gamma })
    }

    /// Number of coordinates the model carries parameters for.
    pub fn dimension(&self) -> usize {
        match self {
            WeightModel::Explicit { d, .. } => *d,
            WeightModel::Product { gamma } => gamma.len(),
            WeightModel::Pod { gamma, .. } => gamma.len(),
            WeightModel::Spod { gamma, .. } => gamma.len(),
        }
    }
}

fn validate_subset(u: &[usize], d: usize) -> Result<()> {
    for (i, &j) in u.iter().enumerate() {
        if j < 1 || j > d {
            return Err(LatticeError::OutOfRange { coord: j, dim: d });
        }
        if i > 0 && u[i - 1] >= j {
            return Err(LatticeError::InvalidParameter(format!(
                "subset {u:?} is not strictly increasing"
            )));
        }
    }
    Ok(())
}

/// γ_u for a strictly increasing subset u of 1-based coordinates.
pub fn weight_of(model: &WeightModel, u: &[usize]) -> Result<f64> {
    validate_subset(u, model.dimension())?;
    if u.is_empty() {
        return Ok(1.0);
    }
    match model {
        WeightModel::Explicit { table, .. } => table
            .get(u)
            .copied()
            .ok_or_else(|| LatticeError::MissingWeight(u.to_vec())),
        WeightModel::Product { gamma } => Ok(u.iter().map(|&j| gamma[j - 1]).product()),
        WeightModel::Pod { order, gamma } => {
            Ok(order[u.len()] * u.iter().map(|&j| gamma[j - 1]).product::<f64>())
        }
        WeightModel::Spod { sigma, order, gamma } => {
            // Coefficients of ∏_{j∈u} (Σ_ν γ_{j,ν} x^ν), then contract with Γ.
            let mut poly = vec![1.0f64];
            for &j in u {
                let row = &gamma[j - 1];
                let mut next = vec![0.0f64; poly.len() + sigma];
                for (a, &pa) in poly.iter().enumerate() {
                    if pa == 0.0 {
                        continue;
                    }
                    for (nu, &g) in row.iter().enumerate() {
                        next[a + nu + 1] += pa * g;
                    }
                }
                poly = next;
            }
            Ok(poly
                .iter()
                .enumerate()
                .skip(u.len()) // total degree is at least |u|
                .map(|(l, &c)| order[l] * c)
                .sum())
        }
    }
}

/// Paper weight-family kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaperFamily {
    Product,
    Pod,
    Spod,
}

/// The three weight families used in the reference experiments:
/// product γ_j = j^{-1.5α}; POD Γ_ℓ = ℓ!/a^ℓ, γ_j = a·j^{-1.5α};
/// SPOD σ = α/2, Γ_ℓ = ℓ!/a^ℓ, γ_{j,ν} = a·(2 j^{-1.5α})^ν;
/// all with the rescaling a = (d!)^{1/d}.
pub fn paper_weight_family(kind: PaperFamily, d: usize, alpha: f64) -> Result<WeightModel> {
    if d < 1 {
        return Err(LatticeError::InvalidParameter("d must be ≥ 1".into()));
    }
    if alpha <= 0.0 || alpha.fract() != 0.0 || (alpha as u64) % 2 != 0 {
        return Err(LatticeError::InvalidParameter(format!(
            "paper weight families need an even integer α, got {alpha}"
        )));
    }
    // a = (d!)^{1/d}, in log space so d = 100+ stays finite.
    let a = (ln_factorial(d) / d as f64).exp();
    let decay = |j: usize| (j as f64).powf(-1.5 * alpha);
    match kind {
        PaperFamily::Product => WeightModel::new_product((1..=d).map(decay).collect()),
        PaperFamily::Pod => {
            let order = (0..=d)
                .map(|l| (ln_factorial(l) - l as f64 * a.ln()).exp())
                .collect();
            WeightModel::new_pod(order, (1..=d).map(|j| a * decay(j)).collect())
        }
        PaperFamily::Spod => {
            let sigma = (alpha / 2.0) as usize;
            let order = (0..=sigma * d)
                .map(|l| (ln_factorial(l) - l as f64 * a.ln()).exp())
                .collect();
            let gamma = (1..=d)
                .map(|j| (1..=sigma).map(|nu| a * (2.0 * decay(j)).powi(nu as i32)).collect())
                .collect();
            WeightModel::new_spod(sigma, order, gamma)
        }
    }
}

/// All 2^d subsets of {1..d} as sorted index vectors, by bitmask order.
fn subsets_of(d: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..(1u64 << d)).map(move |mask| {
        (1..=d).filter(|j| mask >> (j - 1) & 1 == 1).collect::<Vec<_>>()
    })
}

/// Materialize any model as an Explicit table over its full dimension.
/// Guarded: enumerates 2^d subsets.
pub fn materialize_explicit(model: &WeightModel) -> Result<WeightModel> {
    let d = model.dimension();
    if d > SUBSET_ENUM_CAP {
        return Err(LatticeError::Capacity(format!(
            "cannot enumerate 2^{d} subsets (cap is d ≤ {SUBSET_ENUM_CAP})"
        )));
    }
    let mut table = BTreeMap::new();
    for u in subsets_of(d) {
        let w = weight_of(model, &u)?;
        table.insert(u, w);
    }
    WeightModel::new_explicit(d, table)
}

/// Replace (α, γ_u) by (α/2, √γ_u). Product models stay product; POD and
/// SPOD lose their structure under the square root and are materialized as
/// explicit tables.
pub fn sqrt_half_transform(model: &WeightModel, alpha: f64) -> Result<(WeightModel, f64)> {
    if alpha <= 2.0 {
        return Err(LatticeError::InvalidParameter(format!(
            "α/2-transform needs α > 2 so the halved space is valid, got {alpha}"
        )));
    }
    let transformed = match model {
        WeightModel::Product { gamma } => {
            WeightModel::new_product(gamma.iter().map(|g| g.sqrt()).collect())?
        }
        WeightModel::Explicit { d, table } => {
            let table = table.iter().map(|(u, &w)| (u.clone(), w.sqrt())).collect();
            WeightModel::new_explicit(*d, table)?
        }
        WeightModel::Pod { .. } | WeightModel::Spod { .. } => {
            let explicit = materialize_explicit(model)?;
            match explicit {
                WeightModel::Explicit { d, table } => {
                    let table = table.into_iter().map(|(u, w)| (u, w.sqrt())).collect();
                    WeightModel::new_explicit(d, table)?
                }
                _ => unreachable!(),
            }
        }
    };
    Ok((transformed, alpha / 2.0))
}

/// (Σ_u γ_u^λ c^{|u|}, Σ_u |u| γ_u^λ c^{|u|}) over u ⊆ {1..d}.
///
/// Product weights use the factored identities
/// Σ_u γ_u^λ c^{|u|} = ∏_j (1 + γ_j^λ c) and its |u|-weighted derivative
/// form; other families enumerate subsets (d ≤ 20).
pub fn subset_sums(model: &WeightModel, d: usize, lambda: f64, c: f64) -> Result<(f64, f64)> {
    if d > model.dimension() {
        return Err(LatticeError::OutOfRange { coord: d, dim: model.dimension() });
    }
    if let WeightModel::Product { gamma } = model {
        let mut plain = 1.0f64;
        let mut sized = 0.0f64; // Σ |u| γ^λ c^{|u|} / plain, accumulated as Σ t_j/(1+t_j)
        for &g in gamma.iter().take(d) {
            let t = g.powf(lambda) * c;
            plain *= 1.0 + t;
            sized += t / (1.0 + t);
        }
        return Ok((plain, plain * sized));
    }
    if d > SUBSET_ENUM_CAP {
        return Err(LatticeError::Capacity(format!(
            "subset sums for non-product weights need d ≤ {SUBSET_ENUM_CAP}, got {d}"
        )));
    }
    let mut plain = 0.0f64;
    let mut sized = 0.0f64;
    for u in subsets_of(d) {
        let w = weight_of(model, &u)?;
        let term = w.powf(lambda) * c.powi(u.len() as i32);
        plain += term;
        sized += u.len() as f64 * term;
    }
    Ok((plain, sized))
}
