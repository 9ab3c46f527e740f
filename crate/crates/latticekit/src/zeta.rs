//! Zeta-function and Bernoulli-polynomial numerics.
//!
//! Everything here is evaluated by direct summation plus Euler–Maclaurin
//! tail correction, with an explicit bound on the neglected remainder, so
//! callers can certify their own truncation errors. No external
//! special-function dependency.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Number of explicitly summed terms in the Euler–Maclaurin evaluation.
const EM_TERMS: usize = 48;
/// Number of Bernoulli correction terms (uses B_2 .. B_{2*EM_ORDER}).
const EM_ORDER: usize = 10;

/// Bernoulli numbers B_0 .. B_n (B_1 = -1/2 convention).
pub fn bernoulli_numbers(n: usize) -> Vec<f64> {
    // B_m = -1/(m+1) * sum_{k<m} C(m+1,k) B_k
    let mut b = vec![0.0f64; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        let mut acc = 0.0f64;
        let mut binom = 1.0f64; // C(m+1, 0)
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += binom * bk;
            binom *= (m + 1 - k) as f64 / (k + 1) as f64;
        }
        b[m] = -acc / (m as f64 + 1.0);
    }
    b
}

fn em_bernoulli() -> &'static [f64] {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    CACHE.get_or_init(|| bernoulli_numbers(2 * EM_ORDER + 2))
}

/// Hurwitz zeta ζ(s, a) = Σ_{k≥0} (k+a)^{-s} for s > 1 and a > 0,
/// together with a certified bound on the Euler–Maclaurin remainder.
pub fn hurwitz_zeta_with_bound(s: f64, a: f64) -> (f64, f64) {
    assert!(s > 1.0, "hurwitz_zeta requires s > 1, got {s}");
    assert!(a > 0.0, "hurwitz_zeta requires a > 0, got {a}");
    let bern = em_bernoulli();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 0..EM_TERMS {
        let term = (k as f64 + a).powf(-s);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    let x = EM_TERMS as f64 + a;
    let mut total = sum + comp + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Correction terms B_{2j}/(2j)! * s(s+1)...(s+2j-2) * x^{-s-2j+1}.
    let mut rising = s; // running product s (s+1) ... (s+2j-2)
    let mut fact = 2.0f64; // (2j)!
    let mut xpow = x.powf(-s - 1.0);
    for j in 1..=EM_ORDER {
        total += bern[2 * j] / fact * rising * xpow;
        // advance to order j+1
        rising *= (s + 2.0 * j as f64 - 1.0) * (s + 2.0 * j as f64);
        fact *= (2.0 * j as f64 + 1.0) * (2.0 * j as f64 + 2.0);
        xpow /= x * x;
    }
    // For real s > 1 the remainder is bounded by the first omitted term;
    // the reported bound doubles it.
    let rem = 2.0 * (bern[2 * EM_ORDER + 2] / fact * rising * xpow).abs();
    (total, rem)
}

/// Hurwitz zeta ζ(s, a), s > 1, a > 0.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    hurwitz_zeta_with_bound(s, a).0
}

/// Riemann zeta ζ(s) for s > 1. Values are cached keyed on the bits of s:
/// criterion evaluation asks for the same handful of exponents repeatedly.
pub fn riemann_zeta(s: f64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&s.to_bits()) {
        return v;
    }
    let v = hurwitz_zeta(s, 1.0);
    cache.lock().unwrap().insert(s.to_bits(), v);
    v
}

/// Coefficients of the Bernoulli polynomial B_n(x), ascending powers of x.
pub fn bernoulli_poly_coeffs(n: usize) -> Vec<f64> {
    let b = bernoulli_numbers(n);
    // B_n(x) = sum_k C(n,k) B_{n-k} x^k
    let mut coeffs = vec![0.0f64; n + 1];
    let mut binom = 1.0f64; // C(n, 0)
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c = binom * b[n - k];
        binom *= (n - k) as f64 / (k + 1) as f64;
    }
    coeffs
}

/// Evaluate a polynomial given ascending coefficients (Horner).
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// ln n! via the log-gamma style product; exact enough for n ≤ a few hundred.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
