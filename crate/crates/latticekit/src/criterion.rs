//! Search-criterion evaluation: θ, the dimension components T_s, the
//! criterion S and its index-set companion E.
//!
//! The pair sums are evaluated through the character identity
//! [ℓ·z ≡ 0 mod n] = (1/n) Σ_{k=0}^{n-1} e^{2πik ℓ·z/n}, which turns the
//! congruence-restricted double sum into (1/n) Σ_k D_k² with
//! D_k = Σ_u β_u ∏_{j∈u} ω((k z_j mod n)/n). Each weight family gets a
//! specialized D_k: a running product for product weights, an
//! elementary-symmetric recurrence for POD, polynomial coefficients for
//! SPOD, and subset enumeration for explicit tables.
//!
//! `brute_force_s` is the independent check: it evaluates the same pair
//! sum by grouping frequencies into residue classes of h·z mod n, with
//! one-dimensional partial sums continued by an Euler–Maclaurin tail whose
//! remainder is certified and reported.

use crate::cbc::{gcd, mod_inverse};
use crate::error::{LatticeError, Result};
use crate::korobov::{enumerate_index_set_with_cap, r_reciprocal, SpaceParams};
use crate::weights::{self, WeightModel, SUBSET_ENUM_CAP};
use crate::zeta::{hurwitz_zeta_with_bound, riemann_zeta};

/// Fixed-order compensated (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        self.comp += if self.sum.abs() >= term.abs() {
            (self.sum - t) + term
        } else {
            (term - t) + self.sum
        };
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Relative window inside which candidate criterion values count as ties.
pub const TIE_RELATIVE: f64 = 1e-13;
/// Validation-scale caps for the index-set criterion E.
const E_CRITERION_SET_CAP: usize = 100_000;
const E_CRITERION_DIM_CAP: usize = 3;
const BRUTE_FORCE_DIM_CAP: usize = 3;

/// Precomputed evaluation context: the ω grid over multiples of 1/n and
/// the cached 2ζ(2α). Immutable; share freely across threads. Mutable
/// per-construction state lives in [`CbcSweep`].
#[derive(Debug, Clone)]
pub struct CriterionContext {
    pub n: usize,
    pub params: SpaceParams,
    pub omega_table: Vec<f64>,
    pub zeta2a: f64,
}

impl CriterionContext {
    pub fn new(n: usize, params: SpaceParams) -> Result<Self> {
        if n < 2 {
            return Err(LatticeError::InvalidParameter(format!("n must be ≥ 2, got {n}")));
        }
        let alpha = params.alpha;
        let mut omega_table = vec![0.0f64; n];
        // ω(0) pinned to 2ζ(α); upper half mirrored so the palindrome
        // symmetry ω_i = ω_{n-i} holds exactly as stored.
        omega_table[0] = 2.0 * riemann_zeta(alpha);
        for i in 1..=n / 2 {
            omega_table[i] = crate::korobov::omega(alpha, i as f64 / n as f64)?;
        }
        for i in n / 2 + 1..n {
            omega_table[i] = omega_table[n - i];
        }
        let zeta2a = 2.0 * riemann_zeta(2.0 * alpha);
        Ok(CriterionContext { n, params, omega_table, zeta2a })
    }

    fn check_vector(&self, z: &[usize]) -> Result<()> {
        for &zj in z {
            if zj < 1 || zj >= self.n || gcd(zj as u64, self.n as u64) != 1 {
                return Err(LatticeError::InvalidParameter(format!(
                    "component {zj} is not a unit mod {}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// A sequence of subset weights β_u over u ⊆ {1:s}, in the structured
/// forms the evaluation paths exploit. Views are produced from a weight
/// model together with a fixed tail set w, giving β_u = γ_{u∪w}.
#[derive(Debug, Clone)]
pub enum BetaView {
    /// β indexed by bitmask over coordinates 1..s.
    Explicit { beta: Vec<f64> },
    /// β_u = scale ∏_{j∈u} factors_j.
    Product { factors: Vec<f64>, scale: f64 },
    /// β_u = scale · order_{|u|} ∏_{j∈u} factors_j (order has s+1 entries
    /// and at least one spare so the s-forced shift stays in range).
    Pod { order: Vec<f64>, factors: Vec<f64>, scale: f64 },
    /// β_u = Σ_L order_L [x^L] (prefactor(x) ∏_{j∈u} g_j(x)) with
    /// g_j(x) = Σ_ν `per_coord[j][ν-1]` x^ν.
    Spod { order: Vec<f64>, per_coord: Vec<Vec<f64>>, prefactor: Vec<f64> },
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0f64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// g_j(x) = Σ_{ν=1}^{σ} γ_{j,ν} x^ν as ascending coefficients.
fn spod_coord_poly(row: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0f64];
    g.extend_from_slice(row);
    g
}

impl BetaView {
    /// The view {γ_{u∪w}}_{u⊆{1:s}} for a tail set w ⊆ {s+1..d}.
    pub fn from_model(model: &WeightModel, s: usize, w: &[usize]) -> Result<Self> {
        match model {
            WeightModel::Product { gamma } => {
                let mut scale = 1.0;
                for &j in w {
                    scale *= gamma[j - 1];
                }
                Ok(BetaView::Product { factors: gamma[..s].to_vec(), scale })
            }
            WeightModel::Pod { order, gamma } => {
                let mut scale = 1.0;
                for &j in w {
                    scale *= gamma[j - 1];
                }
                let shift = w.len();
                // carry Γ_{shift} .. Γ_{shift+s+1} so one forced shift fits
                let hi = (shift + s + 1).min(order.len() - 1);
                let mut ord = order[shift..=hi].to_vec();
                while ord.len() < s + 2 {
                    ord.push(0.0); // beyond Γ_d only |u| = s with forced shift; unused
                }
                Ok(BetaView::Pod { order: ord, factors: gamma[..s].to_vec(), scale })
            }
            WeightModel::Spod { order, gamma, .. } => {
                let mut prefactor = vec![1.0f64];
                for &j in w {
                    prefactor = poly_mul(&prefactor, &spod_coord_poly(&gamma[j - 1]));
                }
                Ok(BetaView::Spod {
                    order: order.clone(),
                    per_coord: gamma[..s].to_vec(),
                    prefactor,
                })
            }
            WeightModel::Explicit { .. } => {
                if s > SUBSET_ENUM_CAP {
                    return Err(LatticeError::Capacity(format!(
                        "explicit β view needs s ≤ {SUBSET_ENUM_CAP}, got {s}"
                    )));
                }
                let mut beta = Vec::with_capacity(1 << s);
                let mut subset = Vec::with_capacity(s + w.len());
                for mask in 0..(1u64 << s) {
                    subset.clear();
                    subset.extend((0..s).filter(|j| mask >> j & 1 == 1).map(|j| j + 1));
                    subset.extend_from_slice(w);
                    beta.push(weights::weight_of(model, &subset)?);
                }
                Ok(BetaView::Explicit { beta })
            }
        }
    }

    /// Number of leading coordinates the view covers.
    pub fn len(&self) -> usize {
        match self {
            BetaView::Explicit { beta } => beta.len().trailing_zeros() as usize,
            BetaView::Product { factors, .. } => factors.len(),
            BetaView::Pod { factors, .. } => factors.len(),
            BetaView::Spod { per_coord, .. } => per_coord.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// β_∅.
    pub fn beta_empty(&self) -> f64 {
        match self {
            BetaView::Explicit { beta } => beta[0],
            BetaView::Product { scale, .. } => *scale,
            BetaView::Pod { order, scale, .. } => scale * order[0],
            BetaView::Spod { order, prefactor, .. } => {
                prefactor.iter().enumerate().map(|(l, &c)| order[l] * c).sum()
            }
        }
    }

    /// β_u for a bitmask over the covered coordinates (bit j-1 ↔ coord j).
    pub fn beta_of_mask(&self, mask: u64) -> f64 {
        match self {
            BetaView::Explicit { beta } => beta[mask as usize],
            BetaView::Product { factors, scale } => {
                let mut b = *scale;
                for (j, &f) in factors.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        b *= f;
                    }
                }
                b
            }
            BetaView::Pod { order, factors, scale } => {
                let mut b = *scale;
                let mut card = 0usize;
                for (j, &f) in factors.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        b *= f;
                        card += 1;
                    }
                }
                b * order[card]
            }
            BetaView::Spod { order, per_coord, prefactor } => {
                let mut poly = prefactor.clone();
                for (j, row) in per_coord.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        poly = poly_mul(&poly, &spod_coord_poly(row));
                    }
                }
                poly.iter().enumerate().map(|(l, &c)| order[l] * c).sum()
            }
        }
    }

    /// The view restricted to u ⊆ {1:s-1}.
    pub fn restrict(&self) -> Self {
        match self {
            BetaView::Explicit { beta } => {
                BetaView::Explicit { beta: beta[..beta.len() / 2].to_vec() }
            }
            BetaView::Product { factors, scale } => BetaView::Product {
                factors: factors[..factors.len() - 1].to_vec(),
                scale: *scale,
            },
            BetaView::Pod { order, factors, scale } => BetaView::Pod {
                order: order.clone(),
                factors: factors[..factors.len() - 1].to_vec(),
                scale: *scale,
            },
            BetaView::Spod { order, per_coord, prefactor } => BetaView::Spod {
                order: order.clone(),
                per_coord: per_coord[..per_coord.len() - 1].to_vec(),
                prefactor: prefactor.clone(),
            },
        }
    }

    /// The view {β_{u∪{s}}}_{u⊆{1:s-1}} with the last coordinate forced in.
    pub fn force_last(&self) -> Self {
        match self {
            BetaView::Explicit { beta } => {
                let half = beta.len() / 2;
                BetaView::Explicit { beta: beta[half..].to_vec() }
            }
            BetaView::Product { factors, scale } => {
                let s = factors.len();
                BetaView::Product {
                    factors: factors[..s - 1].to_vec(),
                    scale: scale * factors[s - 1],
                }
            }
            BetaView::Pod { order, factors, scale } => {
                let s = factors.len();
                BetaView::Pod {
                    order: order[1..].to_vec(),
                    factors: factors[..s - 1].to_vec(),
                    scale: scale * factors[s - 1],
                }
            }
            BetaView::Spod { order, per_coord, prefactor } => {
                let s = per_coord.len();
                BetaView::Spod {
                    order: order.clone(),
                    per_coord: per_coord[..s - 1].to_vec(),
                    prefactor: poly_mul(prefactor, &spod_coord_poly(&per_coord[s - 1])),
                }
            }
        }
    }

    /// D_k = Σ_u β_u ∏_{j∈u} ω_j for one vector of per-coordinate ω values.
    fn d_value(&self, omegas: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match self {
            BetaView::Product { factors, scale } => {
                let mut d = *scale;
                for (j, &f) in factors.iter().enumerate() {
                    d *= 1.0 + f * omegas[j];
                }
                d
            }
            BetaView::Pod { order, factors, scale } => {
                let s = factors.len();
                scratch.clear();
                scratch.resize(s + 1, 0.0);
                scratch[0] = 1.0;
                for (j, &f) in factors.iter().enumerate() {
                    let t = f * omegas[j];
                    for l in (1..=j + 1).rev() {
                        scratch[l] += t * scratch[l - 1];
                    }
                }
                scale
                    * scratch
                        .iter()
                        .zip(order.iter())
                        .map(|(&e, &g)| e * g)
                        .sum::<f64>()
            }
            BetaView::Spod { order, per_coord, prefactor } => {
                // coefficients of prefactor(x) ∏_j (1 + ω_j g_j(x))
                let sigma = per_coord.first().map_or(0, |r| r.len());
                let deg = prefactor.len() - 1 + sigma * per_coord.len();
                scratch.clear();
                scratch.resize(deg + 1, 0.0);
                scratch[..prefactor.len()].copy_from_slice(prefactor);
                let mut top = prefactor.len() - 1;
                for (j, row) in per_coord.iter().enumerate() {
                    let w = omegas[j];
                    for l in (0..=top).rev() {
                        let c = scratch[l];
                        if c == 0.0 {
                            continue;
                        }
                        for (nu, &g) in row.iter().enumerate() {
                            scratch[l + nu + 1] += w * g * c;
                        }
                    }
                    top += row.len();
                }
                scratch
                    .iter()
                    .zip(order.iter())
                    .map(|(&c, &g)| c * g)
                    .sum()
            }
            BetaView::Explicit { beta } => {
                let s = self.len();
                scratch.clear();
                scratch.resize(1 << s, 0.0);
                scratch[0] = 1.0;
                let mut d = beta[0];
                for mask in 1..(1usize << s) {
                    let low = mask.trailing_zeros() as usize;
                    let prev = mask & (mask - 1);
                    scratch[mask] = scratch[prev] * omegas[low];
                    d += beta[mask] * scratch[mask];
                }
                d
            }
        }
    }
}

/// The unrestricted pair sum Σ_{h,m∈Z^s, (m-h)·z≡_n 0} β β / (r' r'),
/// evaluated as (1/n) Σ_k D_k².
pub fn full_pair(ctx: &CriterionContext, z: &[usize], view: &BetaView) -> Result<f64> {
    ctx.check_vector(z)?;
    let s = z.len();
    if view.len() != s {
        return Err(LatticeError::Consistency(format!(
            "view covers {} coordinates, z has {s}",
            view.len()
        )));
    }
    if s == 0 {
        let b = view.beta_empty();
        return Ok(b * b);
    }
    if matches!(view, BetaView::Explicit { .. }) && s > SUBSET_ENUM_CAP {
        return Err(LatticeError::Capacity(format!(
            "explicit path needs s ≤ {SUBSET_ENUM_CAP}, got {s}"
        )));
    }
    let n = ctx.n;
    let mut acc = CompensatedSum::new();
    let mut omegas = vec![0.0f64; s];
    let mut scratch: Vec<f64> = Vec::new();
    for k in 0..n {
        for (j, &zj) in z.iter().enumerate() {
            omegas[j] = ctx.omega_table[(k * zj) % n];
        }
        let d = view.d_value(&omegas, &mut scratch);
        acc.add(d * d);
    }
    Ok(acc.value() / n as f64)
}

/// θ: the pair sum restricted to ℓ_s ≠ 0, obtained from the full pair sum
/// by removing the ℓ_s = 0 pairs (h_s = m_s = 0 gives the restricted view;
/// h_s = m_s ≠ 0 gives the s-forced view times Σ_{c≠0}|c|^{-2α} = 2ζ(2α)).
///
/// With A_k the restricted-view D and B_k the s-forced-view D, the full
/// D is A_k + ω B_k, so the three pair sums combine per k into
/// ω (2 A_k B_k + ω B_k²) - 2ζ(2α) B_k²; one compensated pass keeps the
/// cancellation local instead of differencing three large sums.
pub fn theta(ctx: &CriterionContext, z: &[usize], view: &BetaView) -> Result<f64> {
    let s = z.len();
    if s == 0 {
        return Err(LatticeError::InvalidParameter("θ needs s ≥ 1".into()));
    }
    ctx.check_vector(z)?;
    if view.len() != s {
        return Err(LatticeError::Consistency(format!(
            "view covers {} coordinates, z has {s}",
            view.len()
        )));
    }
    if matches!(view, BetaView::Explicit { .. }) && s > SUBSET_ENUM_CAP {
        return Err(LatticeError::Capacity(format!(
            "explicit path needs s ≤ {SUBSET_ENUM_CAP}, got {s}"
        )));
    }
    let n = ctx.n;
    let head = &z[..s - 1];
    let z_s = z[s - 1];
    let restricted = view.restrict();
    let forced = view.force_last();
    let mut acc = CompensatedSum::new();
    let mut mag = 0.0f64;
    let mut omegas = vec![0.0f64; s - 1];
    let mut scratch_a: Vec<f64> = Vec::new();
    let mut scratch_b: Vec<f64> = Vec::new();
    for k in 0..n {
        for (j, &zj) in head.iter().enumerate() {
            omegas[j] = ctx.omega_table[(k * zj) % n];
        }
        let a = restricted.d_value(&omegas, &mut scratch_a);
        let b = forced.d_value(&omegas, &mut scratch_b);
        let w = ctx.omega_table[(k * z_s) % n];
        let g = w * (2.0 * a * b + w * b * b) - ctx.zeta2a * b * b;
        acc.add(g);
        mag += g.abs();
    }
    let th = acc.value() / n as f64;
    Ok(clamp_theta(th, mag / n as f64))
}

fn clamp_theta(th: f64, scale: f64) -> f64 {
    if th >= 0.0 {
        return th;
    }
    if th < -1e-12 * scale.abs() {
        log::warn!("θ clamped from {th:.3e} (beyond rounding residue at scale {scale:.3e})");
    }
    0.0
}

/// T_{n,d,s} = Σ_{w⊆{s+1:d}} [2ζ(2α)]^{|w|} θ(z_1..z_s; {γ_{u∪w}}).
///
/// Product weights factor the w-sum out of the quadratic θ; POD groups w
/// by cardinality with shifted order factors; SPOD and explicit tables
/// enumerate w (guarded at d-s ≤ 20).
pub fn t_component(ctx: &CriterionContext, d: usize, z: &[usize]) -> Result<f64> {
    let s = z.len();
    if s < 1 || s > d {
        return Err(LatticeError::InvalidParameter(format!("need 1 ≤ s ≤ d, got s={s}, d={d}")));
    }
    if d > ctx.params.d {
        return Err(LatticeError::InvalidParameter(format!(
            "d={d} exceeds the context dimension {}",
            ctx.params.d
        )));
    }
    let model = &ctx.params.weights;
    match model {
        WeightModel::Product { gamma } => {
            let th = theta(ctx, z, &BetaView::from_model(model, s, &[])?)?;
            let tail: f64 = gamma[s..d].iter().map(|&g| 1.0 + ctx.zeta2a * g * g).product();
            Ok(th * tail)
        }
        WeightModel::Pod { gamma, .. } => {
            // Σ_m (2ζ(2α))^m e_m(γ²_{s+1..d}) θ with Γ shifted by m.
            let esym = elementary_symmetric(&gamma[s..d].iter().map(|&g| g * g).collect::<Vec<_>>());
            let mut total = CompensatedSum::new();
            let mut par = 1.0f64;
            for (m, &em) in esym.iter().enumerate() {
                if em != 0.0 {
                    let view = pod_shifted_view(model, s, m)?;
                    total.add(par * em * theta(ctx, z, &view)?);
                }
                par *= ctx.zeta2a;
            }
            Ok(total.value())
        }
        WeightModel::Spod { .. } | WeightModel::Explicit { .. } => {
            if d - s > SUBSET_ENUM_CAP {
                return Err(LatticeError::Capacity(format!(
                    "w-enumeration needs d-s ≤ {SUBSET_ENUM_CAP}, got {}",
                    d - s
                )));
            }
            let mut total = CompensatedSum::new();
            let mut w = Vec::with_capacity(d - s);
            for wm in 0..(1u64 << (d - s)) {
                w.clear();
                w.extend((0..d - s).filter(|t| wm >> t & 1 == 1).map(|t| s + 1 + t));
                let view = BetaView::from_model(model, s, &w)?;
                let c = ctx.zeta2a.powi(w.len() as i32);
                total.add(c * theta(ctx, z, &view)?);
            }
            Ok(total.value())
        }
    }
}

/// View {Γ_{|u|+m} γ_w ∏γ_j} with the w-product folded elsewhere: the POD
/// θ is quadratic, so the (∏_{j∈w} γ_j)² of every |w| = m set is summed
/// into e_m by the caller and the view keeps scale 1.
fn pod_shifted_view(model: &WeightModel, s: usize, m: usize) -> Result<BetaView> {
    match model {
        WeightModel::Pod { order, gamma } => {
            let hi = (m + s + 1).min(order.len() - 1);
            let mut ord = order[m..=hi].to_vec();
            while ord.len() < s + 2 {
                ord.push(0.0);
            }
            Ok(BetaView::Pod { order: ord, factors: gamma[..s].to_vec(), scale: 1.0 })
        }
        _ => Err(LatticeError::Consistency("POD view from non-POD model".into())),
    }
}

/// e_0..e_k of the given values.
fn elementary_symmetric(vals: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0f64; vals.len() + 1];
    e[0] = 1.0;
    for (j, &v) in vals.iter().enumerate() {
        for l in (1..=j + 1).rev() {
            e[l] += v * e[l - 1];
        }
    }
    e
}

/// S with its per-dimension breakdown T_1..T_d.
#[derive(Debug, Clone)]
pub struct CriterionBreakdown {
    pub total: f64,
    pub t_values: Vec<f64>,
}

/// S = Σ_{s=1}^d T_s.
pub fn s_criterion(ctx: &CriterionContext, z: &[usize]) -> Result<CriterionBreakdown> {
    ctx.check_vector(z)?;
    let d = z.len();
    let mut t_values = Vec::with_capacity(d);
    let mut total = CompensatedSum::new();
    for s in 1..=d {
        let t = t_component(ctx, d, &z[..s])?;
        t_values.push(t);
        total.add(t);
    }
    Ok(CriterionBreakdown { total: total.value(), t_values })
}

/// Residue-class sums W_c = Σ_{h : h·z ≡_n c} γ_supp(h) ∏|h_j|^{-α},
/// with a certified bound on the truncation error. Shared by
/// `brute_force_s` and `e_criterion`.
struct ResidueSums {
    w: Vec<f64>,
    err_l1: f64,
}

fn residue_sums(ctx: &CriterionContext, z: &[usize], radius: usize) -> Result<ResidueSums> {
    let n = ctx.n;
    let d = z.len();
    let alpha = ctx.params.alpha;
    // One-sided class sums over positive h ≡ b (mod n), b = 1..=n:
    // explicit terms up to `radius`, Euler–Maclaurin continuation beyond.
    let mut one_sided = vec![0.0f64; n + 1];
    let mut one_err = vec![0.0f64; n + 1];
    for b in 1..=n {
        let mut acc = CompensatedSum::new();
        let mut h = b;
        while h <= radius {
            acc.add((h as f64).powf(-alpha));
            h += n;
        }
        let (tail, rem) = hurwitz_zeta_with_bound(alpha, h as f64 / n as f64);
        let scale = (n as f64).powf(-alpha);
        one_sided[b] = acc.value() + scale * tail;
        one_err[b] = scale * rem + 1e-15 * one_sided[b];
    }
    // U_b = Σ_{h≠0, h≡b} |h|^{-α}; V per coordinate via the unit z_j.
    let per_coord: Vec<(Vec<f64>, f64)> = z
        .iter()
        .map(|&zj| {
            let zinv = mod_inverse(zj as u64, n as u64).expect("unit");
            let mut v = vec![0.0f64; n];
            let mut err = 0.0f64;
            for (a, slot) in v.iter_mut().enumerate() {
                let b = (a as u64 * zinv % n as u64) as usize;
                let bpos = if b == 0 { n } else { b };
                let bneg = n - b; // |h| ≡ n-b for negative h ≡ b
                let bneg = if bneg == 0 { n } else { bneg };
                *slot = one_sided[bpos] + one_sided[bneg];
                err += one_err[bpos] + one_err[bneg];
            }
            (v, err)
        })
        .collect();
    // W = Σ_u γ_u (⊛_{j∈u} V^{(j)}), empty set contributing δ_0.
    let mut w = vec![0.0f64; n];
    w[0] = 1.0;
    let mut err_l1 = 0.0f64;
    let mut subset = Vec::with_capacity(d);
    for mask in 1..(1u64 << d) {
        subset.clear();
        subset.extend((0..d).filter(|j| mask >> j & 1 == 1).map(|j| j + 1));
        let gu = weights::weight_of(&ctx.params.weights, &subset)?;
        if gu == 0.0 {
            continue;
        }
        let mut conv = vec![0.0f64; n];
        conv[0] = 1.0;
        let mut norm = 1.0f64;
        let mut err = 0.0f64;
        for j in 0..d {
            if mask >> j & 1 == 0 {
                continue;
            }
            let (vj, vj_err) = &per_coord[j];
            let mut next = vec![0.0f64; n];
            for (a, &ca) in conv.iter().enumerate() {
                if ca == 0.0 {
                    continue;
                }
                for (b, &vb) in vj.iter().enumerate() {
                    next[(a + b) % n] += ca * vb;
                }
            }
            let vj_norm: f64 = vj.iter().sum();
            err = err * (vj_norm + vj_err) + norm * vj_err;
            norm *= vj_norm;
            conv = next;
        }
        for (slot, &c) in w.iter_mut().zip(conv.iter()) {
            *slot += gu * c;
        }
        err_l1 += gu * (err + 1e-15 * norm * d as f64);
    }
    Ok(ResidueSums { w, err_l1 })
}

/// Result of the direct pair-sum evaluation, with the certified bound on
/// everything the truncation/continuation may have missed.
#[derive(Debug, Clone, Copy)]
pub struct BruteForceValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Direct evaluation of the criterion S by residue classes:
/// S = Σ_c W_c² − Σ_h (1/r(h))², the second term in closed form
/// Σ_u γ_u² (2ζ(2α))^{|u|}. Independent of the character-sum paths.
pub fn brute_force_s(ctx: &CriterionContext, z: &[usize], radius: usize) -> Result<BruteForceValue> {
    ctx.check_vector(z)?;
    let d = z.len();
    if d > BRUTE_FORCE_DIM_CAP {
        return Err(LatticeError::Capacity(format!(
            "brute-force evaluation is limited to d ≤ {BRUTE_FORCE_DIM_CAP}, got {d}"
        )));
    }
    if radius < ctx.n {
        return Err(LatticeError::InvalidParameter(format!(
            "radius must be ≥ n = {}, got {radius}",
            ctx.n
        )));
    }
    let ResidueSums { w, err_l1 } = residue_sums(ctx, z, radius)?;
    let mut squares = CompensatedSum::new();
    let mut w_max = 0.0f64;
    for &wc in &w {
        squares.add(wc * wc);
        w_max = w_max.max(wc.abs());
    }
    // diagonal Σ_h w(h)²  (pairs with q = h are excluded from S)
    let diag = weights::subset_sums(&ctx.params.weights, d, 2.0, ctx.zeta2a)?.0;
    let value = squares.value() - diag;
    let tail_bound = 2.0 * w_max * err_l1 + err_l1 * err_l1 + 1e-15 * (squares.value() + diag);
    Ok(BruteForceValue { value, tail_bound })
}

/// E = Σ_{h∈A_d(M)} Σ_{ℓ≠0, ℓ·z≡_n 0} 1/r(h+ℓ), evaluated per h as the
/// residue-class sum at h·z minus the h term itself. Validation scale only.
pub fn e_criterion(ctx: &CriterionContext, z: &[usize], m: f64) -> Result<f64> {
    ctx.check_vector(z)?;
    let d = z.len();
    if d > E_CRITERION_DIM_CAP {
        return Err(LatticeError::Capacity(format!(
            "E is evaluated at validation scale only (d ≤ {E_CRITERION_DIM_CAP}), got {d}"
        )));
    }
    let params = SpaceParams::new(d, ctx.params.alpha, ctx.params.weights.clone())?;
    let set = enumerate_index_set_with_cap(&params, m, E_CRITERION_SET_CAP)?;
    let sums = residue_sums(ctx, z, 4 * ctx.n)?;
    let mut total = CompensatedSum::new();
    for h in &set.entries {
        let c = h
            .iter()
            .zip(z.iter())
            .fold(0i64, |acc, (&hj, &zj)| (acc + hj.rem_euclid(ctx.n as i64) * zj as i64) % ctx.n as i64)
            .rem_euclid(ctx.n as i64) as usize;
        total.add(sums.w[c] - r_reciprocal(&params, h));
    }
    Ok(total.value())
}

// ---------------------------------------------------------------------------
// Incremental per-k state for the CBC construction.
// ---------------------------------------------------------------------------

/// Per-dimension candidate evaluator. For every weight family the
/// component reduces to
///   T_s(z_s) = (1/n) Σ_k [ ω_{k z_s} (2 p_k + r_k ω_{k z_s}) - 2ζ(2α) r_k ],
/// with z_s-independent tables p, r assembled from the per-k state.
pub struct CandidateTables {
    zeta2a: f64,
    p: Vec<f64>,
    r: Vec<f64>,
    /// Dimension 1: the tables are constant in k, the value is candidate-
    /// independent, and it is evaluated once in canonical index order so
    /// every candidate sees the identical float.
    uniform_value: Option<f64>,
}

impl CandidateTables {
    pub fn eval(&self, ctx: &CriterionContext, z_s: usize) -> f64 {
        if let Some(v) = self.uniform_value {
            return v;
        }
        let n = ctx.n;
        let mut acc = CompensatedSum::new();
        for k in 0..n {
            let w = ctx.omega_table[(k * z_s) % n];
            let r = self.r[k];
            acc.add(w * (2.0 * self.p[k] + r * w) - self.zeta2a * r);
        }
        acc.value() / n as f64
    }
}

enum SweepState {
    Product { prod: Vec<f64> },
    /// e_{l,k} laid out as rows esym[l][k], l = 0..=s-1.
    Pod { esym: Vec<Vec<f64>> },
    /// Polynomial coefficients c_{L,k} as rows poly[L][k], L = 0..σ(s-1).
    Spod { poly: Vec<Vec<f64>> },
    /// Ω_{u,k} as rows omega_prod[mask][k] over masks of {1..s-1}.
    Explicit { omega_prod: Vec<Vec<f64>>, beta_full: Vec<f64> },
}

/// Per-construction mutable state: the running per-k quantities that make
/// a candidate evaluation O(n). One owner updates it between dimensions;
/// the produced [`CandidateTables`] are read-only and safe to share.
pub struct CbcSweep<'a> {
    ctx: &'a CriterionContext,
    d: usize,
    s_placed: usize,
    state: SweepState,
}

/// Cap on per-k explicit-state entries (masks × n).
const EXPLICIT_STATE_CAP: usize = 1 << 24;

impl<'a> CbcSweep<'a> {
    pub fn new(ctx: &'a CriterionContext, d: usize) -> Result<Self> {
        if d < 1 || d > ctx.params.d {
            return Err(LatticeError::InvalidParameter(format!(
                "sweep dimension {d} outside 1..={}",
                ctx.params.d
            )));
        }
        let n = ctx.n;
        let state = match &ctx.params.weights {
            WeightModel::Product { .. } => SweepState::Product { prod: vec![1.0; n] },
            WeightModel::Pod { .. } => SweepState::Pod { esym: vec![vec![1.0; n]] },
            WeightModel::Spod { .. } => SweepState::Spod { poly: vec![vec![1.0; n]] },
            WeightModel::Explicit { .. } => {
                if d > SUBSET_ENUM_CAP {
                    return Err(LatticeError::Capacity(format!(
                        "explicit sweep needs d ≤ {SUBSET_ENUM_CAP}, got {d}"
                    )));
                }
                if (1usize << (d - 1)) * n > EXPLICIT_STATE_CAP {
                    return Err(LatticeError::Capacity(format!(
                        "explicit sweep state 2^{} × {n} exceeds the cap",
                        d - 1
                    )));
                }
                let mut beta_full = Vec::with_capacity(1 << d);
                let mut subset = Vec::with_capacity(d);
                for mask in 0..(1u64 << d) {
                    subset.clear();
                    subset.extend((0..d).filter(|j| mask >> j & 1 == 1).map(|j| j + 1));
                    beta_full.push(weights::weight_of(&ctx.params.weights, &subset)?);
                }
                SweepState::Explicit { omega_prod: vec![vec![1.0; n]], beta_full }
            }
        };
        Ok(CbcSweep { ctx, d, s_placed: 0, state })
    }

    /// Dimension currently being constructed (1-based).
    pub fn current_dimension(&self) -> usize {
        self.s_placed + 1
    }

    /// Assemble the candidate tables for dimension s = s_placed + 1.
    pub fn prepare(&self) -> Result<CandidateTables> {
        let ctx = self.ctx;
        let n = ctx.n;
        let d = self.d;
        let s = self.s_placed + 1;
        let zeta2a = ctx.zeta2a;
        let mut p = vec![0.0f64; n];
        let mut r = vec![0.0f64; n];
        match (&self.state, &ctx.params.weights) {
            (SweepState::Product { prod }, WeightModel::Product { gamma }) => {
                let gs = gamma[s - 1];
                let tail: f64 = gamma[s..d].iter().map(|&g| 1.0 + zeta2a * g * g).product();
                for k in 0..n {
                    let p2 = prod[k] * prod[k];
                    p[k] = tail * gs * p2;
                    r[k] = tail * gs * gs * p2;
                }
            }
            (SweepState::Pod { esym }, WeightModel::Pod { order, gamma }) => {
                let gs = gamma[s - 1];
                let tail_sq: Vec<f64> = gamma[s..d].iter().map(|&g| g * g).collect();
                let em = elementary_symmetric(&tail_sq);
                let mut a = vec![0.0f64; n];
                let mut b = vec![0.0f64; n];
                let mut cw = 1.0f64; // (2ζ(2α))^m
                for (m, &e_m) in em.iter().enumerate() {
                    let c = cw * e_m;
                    cw *= zeta2a;
                    if c == 0.0 {
                        continue;
                    }
                    a.iter_mut().for_each(|x| *x = 0.0);
                    b.iter_mut().for_each(|x| *x = 0.0);
                    for (l, row) in esym.iter().enumerate() {
                        let ga = order[l + m];
                        let gb = gs * order[l + m + 1];
                        for k in 0..n {
                            a[k] += ga * row[k];
                            b[k] += gb * row[k];
                        }
                    }
                    for k in 0..n {
                        p[k] += c * a[k] * b[k];
                        r[k] += c * b[k] * b[k];
                    }
                }
            }
            (SweepState::Spod { poly }, WeightModel::Spod { order, gamma, .. }) => {
                if d - s > SUBSET_ENUM_CAP {
                    return Err(LatticeError::Capacity(format!(
                        "w-enumeration needs d-s ≤ {SUBSET_ENUM_CAP}, got {}",
                        d - s
                    )));
                }
                let g_s = spod_coord_poly(&gamma[s - 1]);
                let state_deg = poly.len() - 1;
                let mut a = vec![0.0f64; n];
                let mut b = vec![0.0f64; n];
                for wm in 0..(1u64 << (d - s)) {
                    let mut pre = vec![1.0f64];
                    let mut c = 1.0f64;
                    for t in 0..d - s {
                        if wm >> t & 1 == 1 {
                            pre = poly_mul(&pre, &spod_coord_poly(&gamma[s + t]));
                            c *= zeta2a;
                        }
                    }
                    let pre_forced = poly_mul(&pre, &g_s);
                    // correlators Γ against the prefactors
                    let ca: Vec<f64> = (0..=state_deg)
                        .map(|l| {
                            pre.iter().enumerate().map(|(t, &g)| g * order[l + t]).sum::<f64>()
                        })
                        .collect();
                    let cb: Vec<f64> = (0..=state_deg)
                        .map(|l| {
                            pre_forced
                                .iter()
                                .enumerate()
                                .map(|(t, &g)| g * order[l + t])
                                .sum::<f64>()
                        })
                        .collect();
                    a.iter_mut().for_each(|x| *x = 0.0);
                    b.iter_mut().for_each(|x| *x = 0.0);
                    for (l, row) in poly.iter().enumerate() {
                        let (ga, gb) = (ca[l], cb[l]);
                        for k in 0..n {
                            a[k] += ga * row[k];
                            b[k] += gb * row[k];
                        }
                    }
                    for k in 0..n {
                        p[k] += c * a[k] * b[k];
                        r[k] += c * b[k] * b[k];
                    }
                }
            }
            (SweepState::Explicit { omega_prod, beta_full }, _) => {
                if d - s > SUBSET_ENUM_CAP {
                    return Err(LatticeError::Capacity(format!(
                        "w-enumeration needs d-s ≤ {SUBSET_ENUM_CAP}, got {}",
                        d - s
                    )));
                }
                let u_count = 1usize << (s - 1);
                let mut a = vec![0.0f64; n];
                let mut b = vec![0.0f64; n];
                for wm in 0..(1usize << (d - s)) {
                    let wbits = wm << s;
                    let c = zeta2a.powi(wm.count_ones() as i32);
                    a.iter_mut().for_each(|x| *x = 0.0);
                    b.iter_mut().for_each(|x| *x = 0.0);
                    for (u, row) in omega_prod.iter().enumerate().take(u_count) {
                        let ga = beta_full[u | wbits];
                        let gb = beta_full[u | wbits | (1 << (s - 1))];
                        if ga != 0.0 {
                            for k in 0..n {
                                a[k] += ga * row[k];
                            }
                        }
                        if gb != 0.0 {
                            for k in 0..n {
                                b[k] += gb * row[k];
                            }
                        }
                    }
                    for k in 0..n {
                        p[k] += c * a[k] * b[k];
                        r[k] += c * b[k] * b[k];
                    }
                }
            }
            _ => unreachable!("state/weights mismatch"),
        }
        let uniform_value = if s == 1 {
            let mut acc = CompensatedSum::new();
            for i in 0..n {
                let w = ctx.omega_table[i];
                acc.add(w * (2.0 * p[0] + r[0] * w) - zeta2a * r[0]);
            }
            Some(acc.value() / n as f64)
        } else {
            None
        };
        Ok(CandidateTables { zeta2a, p, r, uniform_value })
    }

    /// Fold the accepted component into the per-k state.
    pub fn accept(&mut self, z_s: usize) -> Result<()> {
        let ctx = self.ctx;
        let n = ctx.n;
        let s = self.s_placed + 1;
        if s > self.d {
            return Err(LatticeError::Consistency("all dimensions already placed".into()));
        }
        ctx.check_vector(&[z_s])?;
        match (&mut self.state, &ctx.params.weights) {
            (SweepState::Product { prod }, WeightModel::Product { gamma }) => {
                let gs = gamma[s - 1];
                for (k, slot) in prod.iter_mut().enumerate() {
                    *slot *= 1.0 + gs * ctx.omega_table[(k * z_s) % n];
                }
            }
            (SweepState::Pod { esym }, WeightModel::Pod { gamma, .. }) => {
                let gs = gamma[s - 1];
                esym.push(vec![0.0f64; n]);
                for l in (1..esym.len()).rev() {
                    let (lower, upper) = esym.split_at_mut(l);
                    let prev = &lower[l - 1];
                    let cur = &mut upper[0];
                    for k in 0..n {
                        cur[k] += gs * ctx.omega_table[(k * z_s) % n] * prev[k];
                    }
                }
            }
            (SweepState::Spod { poly }, WeightModel::Spod { gamma, .. }) => {
                let g_s = spod_coord_poly(&gamma[s - 1]);
                let sigma = g_s.len() - 1;
                let old_deg = poly.len() - 1;
                for _ in 0..sigma {
                    poly.push(vec![0.0f64; n]);
                }
                // c ← c + ω (c ⊛ g_s), in place from the top degree down
                for l in (0..=old_deg).rev() {
                    for nu in (1..=sigma).rev() {
                        let g = g_s[nu];
                        if g == 0.0 {
                            continue;
                        }
                        let (lower, upper) = poly.split_at_mut(l + 1);
                        let src = &lower[l];
                        let dst = &mut upper[nu - 1];
                        for k in 0..n {
                            dst[k] += g * ctx.omega_table[(k * z_s) % n] * src[k];
                        }
                    }
                }
            }
            (SweepState::Explicit { omega_prod, .. }, _) => {
                let masks = omega_prod.len();
                for u in 0..masks {
                    let mut row = vec![0.0f64; n];
                    for k in 0..n {
                        row[k] = omega_prod[u][k] * ctx.omega_table[(k * z_s) % n];
                    }
                    omega_prod.push(row);
                }
            }
            _ => unreachable!("state/weights mismatch"),
        }
        self.s_placed += 1;
        Ok(())
    }
}
