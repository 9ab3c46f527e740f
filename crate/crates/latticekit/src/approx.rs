//! The lattice approximation operator, its DFT-based coefficient
//! extraction over an index set, and the kernel interpolant obtained from
//! the circulant Gram system at the lattice nodes.

use std::collections::BTreeMap;

pub use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{LatticeError, Result};
use crate::korobov::{
    enumerate_index_set, kernel_value, r_value, FrequencyIndex, IndexSet, SpaceParams,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Rank-1 lattice nodes t_k = {k z / n}, k = 0..n-1 (the k = 0..n-1
/// indexing is a relabeling of 1..n since t_n = t_0 = 0).
#[derive(Debug, Clone)]
pub struct LatticeSampler {
    pub n: usize,
    pub z: Vec<usize>,
    pub points: Vec<Vec<f64>>,
}

pub fn lattice_points(n: usize, z: &[usize]) -> LatticeSampler {
    let points = (0..n)
        .map(|k| z.iter().map(|&zj| ((k * zj) % n) as f64 / n as f64).collect())
        .collect();
    LatticeSampler { n, z: z.to_vec(), points }
}

/// Approximated Fourier coefficients over an index set, aligned with
/// `index_set.entries`.
#[derive(Debug, Clone)]
pub struct Approximant {
    pub index_set: IndexSet,
    pub coefficients: Vec<Complex64>,
    pub d: usize,
}

impl Approximant {
    pub fn coefficient(&self, h: &[i64]) -> Option<Complex64> {
        self.index_set
            .entries
            .binary_search_by(|e| e.as_slice().cmp(h))
            .ok()
            .map(|i| self.coefficients[i])
    }
}

fn dft_forward(data: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(data.len()).process(data);
}

fn dft_inverse_normalized(data: &mut [Complex64]) {
    let n = data.len() as f64;
    FftPlanner::new().plan_fft_inverse(data.len()).process(data);
    data.iter_mut().for_each(|v| *v /= n);
}

fn bin_of(h: &[i64], z: &[usize], n: usize) -> usize {
    let nn = n as i64;
    h.iter()
        .zip(z.iter())
        .fold(0i64, |acc, (&hj, &zj)| (acc + hj.rem_euclid(nn) * zj as i64).rem_euclid(nn))
        as usize
}

/// One pass of (1/n)·DFT over the samples, then a bin lookup per index:
/// the coefficient at h is the DFT bin at h·z mod n, matching the sign
/// convention (1/n) Σ_k f(t_k) e^{-2πi h·t_k}.
pub fn approximate(
    samples: &[Complex64],
    params: &SpaceParams,
    z: &[usize],
    m: f64,
) -> Result<Approximant> {
    let n = samples.len();
    if n == 0 || z.len() != params.d {
        return Err(LatticeError::InvalidParameter(
            "need n ≥ 1 samples and len(z) = d".into(),
        ));
    }
    let index_set = enumerate_index_set(params, m)?;
    let mut spectrum = samples.to_vec();
    dft_forward(&mut spectrum);
    let scale = 1.0 / n as f64;
    let coefficients = index_set
        .entries
        .iter()
        .map(|h| spectrum[bin_of(h, z, n)] * scale)
        .collect();
    Ok(Approximant { index_set, coefficients, d: params.d })
}

/// Real-sample convenience wrapper.
pub fn approximate_real(
    samples: &[f64],
    params: &SpaceParams,
    z: &[usize],
    m: f64,
) -> Result<Approximant> {
    let complex: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    approximate(&complex, params, z, m)
}

/// Σ_{h∈A} f̂ᵃ(h) e^{2πi h·x}.
pub fn evaluate(approx: &Approximant, x: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (h, &c) in approx.index_set.entries.iter().zip(approx.coefficients.iter()) {
        let phase: f64 = h.iter().zip(x.iter()).map(|(&hj, &xj)| hj as f64 * xj).sum();
        acc += c * Complex64::from_polar(1.0, TWO_PI * phase);
    }
    acc
}

/// Real-part evaluation; valid only when the coefficient set is
/// conjugate-symmetric so the imaginary residue stays below 1e-10.
pub fn evaluate_real(approx: &Approximant, x: &[f64]) -> Result<f64> {
    let v = evaluate(approx, x);
    let scale: f64 = 1.0 + approx.coefficients.iter().map(|c| c.norm()).sum::<f64>();
    if v.im.abs() > 1e-10 * scale {
        return Err(LatticeError::Consistency(format!(
            "imaginary residue {:.3e} exceeds tolerance; coefficients are not conjugate-symmetric",
            v.im
        )));
    }
    Ok(v.re)
}

/// Interpolant A(x) = Σ_k a_k K_d(x, t_k) through the lattice nodes.
#[derive(Debug, Clone)]
pub struct KernelInterpolant {
    pub a: Vec<f64>,
    pub sampler: LatticeSampler,
    pub params: SpaceParams,
}

/// The Gram matrix G[k,k'] = K_d(t_k, t_{k'}) is circulant in (k - k')
/// mod n, so the solve is a length-n DFT of its first column.
pub fn kernel_interpolant(
    params: &SpaceParams,
    sampler: &LatticeSampler,
    samples: &[f64],
) -> Result<KernelInterpolant> {
    let n = sampler.n;
    if samples.len() != n {
        return Err(LatticeError::InvalidParameter(format!(
            "expected {n} samples, got {}",
            samples.len()
        )));
    }
    let t0 = &sampler.points[0];
    let mut col0 = Vec::with_capacity(n);
    for k in 0..n {
        col0.push(Complex64::new(kernel_value(params, &sampler.points[k], t0)?, 0.0));
    }
    let mut eigs = col0;
    dft_forward(&mut eigs);
    let max_eig = eigs.iter().map(|e| e.norm()).fold(0.0f64, f64::max);
    if eigs.iter().any(|e| e.norm() <= 1e-12 * max_eig) {
        return Err(LatticeError::NearSingular(
            "a circulant eigenvalue fell below 1e-12 of the largest".into(),
        ));
    }
    let mut rhs: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_forward(&mut rhs);
    for (r, e) in rhs.iter_mut().zip(eigs.iter()) {
        *r /= e;
    }
    dft_inverse_normalized(&mut rhs);
    let a = rhs.iter().map(|c| c.re).collect();
    Ok(KernelInterpolant { a, sampler: sampler.clone(), params: params.clone() })
}

impl KernelInterpolant {
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (k, ak) in self.a.iter().enumerate() {
            acc += ak * kernel_value(&self.params, x, &self.sampler.points[k])?;
        }
        Ok(acc)
    }
}

/// Exact L2 error of an approximant against a trigonometric polynomial
/// with known coefficients, by Parseval over the union of supports.
pub fn measure_l2_error_parseval(
    f_coeffs: &BTreeMap<FrequencyIndex, Complex64>,
    approx: &Approximant,
) -> f64 {
    let mut err2 = 0.0f64;
    for (h, &fh) in f_coeffs {
        let ah = approx.coefficient(h).unwrap_or_else(|| Complex64::new(0.0, 0.0));
        err2 += (fh - ah).norm_sqr();
    }
    for (h, &ah) in approx.index_set.entries.iter().zip(approx.coefficients.iter()) {
        if !f_coeffs.contains_key(h) {
            err2 += ah.norm_sqr();
        }
    }
    err2.sqrt()
}

/// Tensor-grid estimate of the L2 error for a sampleable function; returns
/// the estimate together with the grid actually used per axis.
pub fn measure_l2_error_quadrature(
    f: &dyn Fn(&[f64]) -> f64,
    approx: &Approximant,
    grid: usize,
) -> Result<(f64, usize)> {
    let d = approx.d;
    let total = (grid as f64).powi(d as i32);
    if grid < 1 || total > 1e7 {
        return Err(LatticeError::Capacity(format!(
            "quadrature grid {grid}^{d} is out of range"
        )));
    }
    let mut x = vec![0.0f64; d];
    let mut idx = vec![0usize; d];
    let mut acc = 0.0f64;
    loop {
        for j in 0..d {
            x[j] = idx[j] as f64 / grid as f64;
        }
        let diff = f(&x) - evaluate(approx, &x).re;
        acc += diff * diff;
        let mut j = 0;
        loop {
            if j == d {
                return Ok(((acc / total).sqrt(), grid));
            }
            idx[j] += 1;
            if idx[j] < grid {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Korobov norm of a trigonometric polynomial: (Σ |f̂(h)|² r(h))^{1/2}.
pub fn korobov_norm(params: &SpaceParams, coeffs: &BTreeMap<FrequencyIndex, Complex64>) -> f64 {
    coeffs
        .iter()
        .map(|(h, c)| c.norm_sqr() * r_value(params, h))
        .sum::<f64>()
        .sqrt()
}
