//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured margin. Tolerances are pinned in the asserts.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use latticekit::approx::{
    approximate_real, evaluate, kernel_interpolant, korobov_norm, lattice_points,
    measure_l2_error_parseval, Complex64,
};
use latticekit::cbc::{
    cbc_construct, cbc_construct_embedded, l2_error_bound, linf_error_bound_v1,
    linf_error_bound_v2, suapp_bound, units,
};
use latticekit::criterion::{
    brute_force_s, s_criterion, t_component, CriterionContext, TIE_RELATIVE,
};
use latticekit::korobov::{
    cardinality_constant, enumerate_index_set, kernel_value, truncation_tail_bound, SpaceParams,
};
use latticekit::weights::{materialize_explicit, paper_weight_family, PaperFamily, WeightModel};
use latticekit_cli::{cmd_experiment_rates, default_rate_grid, RunConfig};

const GRID_N: [usize; 8] = [2, 3, 4, 6, 8, 9, 12, 16];
const GRID_D: [usize; 3] = [1, 2, 3];
const GRID_ALPHA: [f64; 2] = [2.0, 4.0];

fn random_product_model(rng: &mut ChaCha8Rng, d: usize) -> WeightModel {
    let gamma: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05f64..1.0)).collect();
    WeightModel::new_product(gamma).unwrap()
}

fn random_explicit_model(rng: &mut ChaCha8Rng, d: usize) -> WeightModel {
    let mut table = BTreeMap::from([(vec![], 1.0f64)]);
    for mask in 1u64..(1 << d) {
        let u: Vec<usize> = (1..=d).filter(|j| mask >> (j - 1) & 1 == 1).collect();
        table.insert(u, rng.gen_range(0.05f64..1.0));
    }
    WeightModel::new_explicit(d, table).unwrap()
}

fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<usize> {
    let us = units(n).unwrap();
    (0..d).map(|_| us[rng.gen_range(0..us.len())]).collect()
}

/// Weight draws for one (n, d, alpha) cell of the criterion-1 grid.
fn grid_models(rng: &mut ChaCha8Rng, d: usize) -> Vec<WeightModel> {
    let mut models = Vec::new();
    for _ in 0..5 {
        models.push(random_product_model(rng, d));
    }
    for _ in 0..2 {
        models.push(random_explicit_model(rng, d));
    }
    models
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let mut cases = 0usize;
    let mut worst_rel = 0.0f64;
    for &n in &GRID_N {
        for &d in &GRID_D {
            for &alpha in &GRID_ALPHA {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    0xACCE_0001 ^ (n as u64) << 20 ^ (d as u64) << 8 ^ alpha as u64,
                );
                for model in grid_models(&mut rng, d) {
                    let params = SpaceParams::new(d, alpha, model).unwrap();
                    let ctx = CriterionContext::new(n, params).unwrap();
                    let z = random_unit_vector(&mut rng, n, d);
                    let fast = s_criterion(&ctx, &z).unwrap().total;
                    let mut radius = 4 * n;
                    let oracle = loop {
                        let o = brute_force_s(&ctx, &z, radius).unwrap();
                        if o.tail_bound < 1e-8 * o.value {
                            break o;
                        }
                        radius *= 2;
                        assert!(radius < 1 << 22, "certified tail will not shrink");
                    };
                    let rel = (fast - oracle.value).abs() / oracle.value;
                    assert!(
                        rel <= 1e-6,
                        "n={n} d={d} α={alpha} z={z:?}: rel {rel:.3e} (fast {fast:.12e}, oracle {:.12e})",
                        oracle.value
                    );
                    worst_rel = worst_rel.max(rel);
                    cases += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs <= 120.0, "oracle grid took {secs:.1} s > 2 min");
    println!(
        "[PASS] criterion 1: oracle equivalence on {cases} cases, worst rel {worst_rel:.3e}, {secs:.1} s"
    );
}

#[test]
fn criterion_02_path_equivalence() {
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for &d in &[2usize, 5, 8] {
        for &n in &[8usize, 27, 32] {
            let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0002 ^ (d as u64) << 8 ^ n as u64);
            let z_full = random_unit_vector(&mut rng, n, d);
            for (kind, alpha) in [
                (PaperFamily::Product, 2.0),
                (PaperFamily::Product, 4.0),
                (PaperFamily::Pod, 2.0),
                (PaperFamily::Pod, 4.0),
                (PaperFamily::Spod, 2.0),
                (PaperFamily::Spod, 4.0),
            ] {
                let model = paper_weight_family(kind, d, alpha).unwrap();
                let explicit = materialize_explicit(&model).unwrap();
                let ctx =
                    CriterionContext::new(n, SpaceParams::new(d, alpha, model).unwrap()).unwrap();
                let ctx_e = CriterionContext::new(n, SpaceParams::new(d, alpha, explicit).unwrap())
                    .unwrap();
                for s in 1..=d {
                    let fast = t_component(&ctx, d, &z_full[..s]).unwrap();
                    let reference = t_component(&ctx_e, d, &z_full[..s]).unwrap();
                    let rel = (fast - reference).abs() / reference.abs().max(1e-300);
                    assert!(
                        rel <= 1e-10,
                        "{kind:?} α={alpha} n={n} d={d} s={s}: rel {rel:.3e}"
                    );
                    worst = worst.max(rel);
                    checked += 1;
                }
            }
        }
    }
    println!("[PASS] criterion 2: {checked} fast-vs-explicit T_s agreements, worst rel {worst:.3e}");
}

#[test]
fn criterion_03_cbc_minimality() {
    let d = 4usize;
    let mut runs = 0usize;
    for n in 2..=32usize {
        for kind in [PaperFamily::Product, PaperFamily::Pod] {
            let model = paper_weight_family(kind, d, 2.0).unwrap();
            let ctx = CriterionContext::new(n, SpaceParams::new(d, 2.0, model).unwrap()).unwrap();
            let constructed = cbc_construct(&ctx, d).unwrap();
            // exhaustive per-dimension argmin with the smallest-tie rule:
            // global minimum, then the smallest candidate within the window
            let mut prefix: Vec<usize> = Vec::new();
            for s in 1..=d {
                let cands = units(n).unwrap();
                let mut z = prefix.clone();
                z.push(0);
                let values: Vec<f64> = cands
                    .iter()
                    .map(|&cand| {
                        z[s - 1] = cand;
                        t_component(&ctx, d, &z).unwrap()
                    })
                    .collect();
                let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
                let window = vmin + TIE_RELATIVE * vmin.abs();
                let best_z = cands
                    .iter()
                    .zip(values.iter())
                    .find(|(_, &v)| v <= window)
                    .map(|(&c, _)| c)
                    .unwrap();
                prefix.push(best_z);
            }
            assert_eq!(
                constructed.z, prefix,
                "n={n} {kind:?}: construction {:?} vs exhaustive {:?}",
                constructed.z, prefix
            );
            runs += 1;
        }
    }
    println!("[PASS] criterion 3: CBC equals exhaustive argmin on {runs} runs (n ≤ 32, d = {d})");
}

#[test]
fn criterion_04_suapp_domination() {
    let mut checked = 0usize;
    let mut tightest = f64::INFINITY;
    for &n in &GRID_N {
        for &d in &GRID_D {
            for &alpha in &GRID_ALPHA {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    0xACCE_0001 ^ (n as u64) << 20 ^ (d as u64) << 8 ^ alpha as u64,
                );
                for model in grid_models(&mut rng, d) {
                    let _ = random_unit_vector(&mut rng, n, d); // keep draws aligned
                    let params = SpaceParams::new(d, alpha, model).unwrap();
                    let ctx = CriterionContext::new(n, params.clone()).unwrap();
                    let v = cbc_construct(&ctx, d).unwrap();
                    let s = s_criterion(&ctx, &v.z).unwrap().total;
                    for lambda in [1.0 / alpha + 0.05, 0.5, 1.0] {
                        if lambda <= 1.0 / alpha {
                            continue; // λ must exceed 1/α
                        }
                        let bound = suapp_bound(&params, n, lambda).unwrap();
                        assert!(
                            s <= bound,
                            "n={n} d={d} α={alpha} λ={lambda}: S {s:.6e} > bound {bound:.6e}"
                        );
                        tightest = tightest.min(bound / s.max(1e-300));
                        checked += 1;
                    }
                }
            }
        }
    }
    println!(
        "[PASS] criterion 4: constructed S ≤ theoretical bound in {checked} checks (tightest ×{tightest:.2})"
    );
}

fn rates_config(kind: &str, d: usize, alpha: f64, model: WeightModel) -> RunConfig {
    RunConfig {
        weights: latticekit::io::WeightConfig { model, d, alpha },
        n: Some(64),
        embedded: None,
        out: std::env::temp_dir().join(format!("latticekit-acceptance-rates-{kind}.csv")),
        tau: None,
        lambda: None,
        full_scale: false,
    }
}

#[test]
fn criterion_05_empirical_rates() {
    let start = Instant::now();
    let desk = default_rate_grid(false);
    let short: Vec<usize> = desk.iter().copied().filter(|&n| n <= 1 << 11).collect();

    let prod2 = paper_weight_family(PaperFamily::Product, 10, 2.0).unwrap();
    let fit = cmd_experiment_rates(&rates_config("prod2", 10, 2.0, prod2), &desk).unwrap().fit;
    assert!(
        (-1.70..=-1.30).contains(&fit.slope),
        "product α=2 slope {} outside [-1.70, -1.30]",
        fit.slope
    );
    let s_prod2 = fit.slope;

    let pod2 = paper_weight_family(PaperFamily::Pod, 10, 2.0).unwrap();
    let fit = cmd_experiment_rates(&rates_config("pod2", 10, 2.0, pod2), &desk).unwrap().fit;
    assert!(
        (-1.50..=-1.10).contains(&fit.slope),
        "POD α=2 slope {} outside [-1.50, -1.10]",
        fit.slope
    );
    let s_pod2 = fit.slope;

    let prod4 = paper_weight_family(PaperFamily::Product, 10, 4.0).unwrap();
    let fit = cmd_experiment_rates(&rates_config("prod4", 10, 4.0, prod4), &short).unwrap().fit;
    assert!(
        (-3.80..=-3.00).contains(&fit.slope),
        "product α=4 slope {} outside [-3.80, -3.00]",
        fit.slope
    );
    let s_prod4 = fit.slope;

    // SPOD at d ≤ 8 through the explicit path, POD windows
    let spod = paper_weight_family(PaperFamily::Spod, 8, 2.0).unwrap();
    let spod_explicit = materialize_explicit(&spod).unwrap();
    let fit =
        cmd_experiment_rates(&rates_config("spod2", 8, 2.0, spod_explicit), &desk).unwrap().fit;
    assert!(
        (-1.50..=-1.10).contains(&fit.slope),
        "SPOD α=2 slope {} outside [-1.50, -1.10]",
        fit.slope
    );
    let s_spod2 = fit.slope;

    let secs = start.elapsed().as_secs_f64();
    assert!(secs <= 1800.0, "rate experiments took {secs:.0} s > 30 min");
    println!(
        "[PASS] criterion 5: slopes product α2 {s_prod2:.3}, POD α2 {s_pod2:.3}, product α4 {s_prod4:.3}, SPOD α2 {s_spod2:.3} in {secs:.1} s"
    );
}

#[test]
fn criterion_06_prime_composite_coincidence() {
    let d = 10usize;
    let model = paper_weight_family(PaperFamily::Product, d, 2.0).unwrap();
    let params = SpaceParams::new(d, 2.0, model).unwrap();
    let s_pow2 = {
        let ctx = CriterionContext::new(1 << 10, params.clone()).unwrap();
        cbc_construct(&ctx, d).unwrap().s_value()
    };
    let s_prime = {
        let ctx = CriterionContext::new(1009, params).unwrap();
        cbc_construct(&ctx, d).unwrap().s_value()
    };
    let ratio = (s_pow2 / s_prime).max(s_prime / s_pow2);
    assert!(ratio <= 2.0, "S(2^10) = {s_pow2:.6e} vs S(1009) = {s_prime:.6e}: ratio {ratio:.3}");
    println!("[PASS] criterion 6: S(2^10)/S(1009) within factor {ratio:.4} ≤ 2");
}

#[test]
fn criterion_07_embedded_construction() {
    let d = 8usize;
    let model = paper_weight_family(PaperFamily::Product, d, 2.0).unwrap();
    let params = SpaceParams::new(d, 2.0, model).unwrap();
    let res = cbc_construct_embedded(2, 4, 8, &params).unwrap();
    assert_eq!(res.x_values[0].to_bits(), 1.0f64.to_bits(), "X_1 must be exactly 1");
    let max_x = res.max_x();
    for m in 4..=8u32 {
        let s_emb = res.s_emb(m);
        let s_base = res.s_baseline(m);
        assert!(
            s_emb <= max_x * s_base * (1.0 + 1e-12),
            "m={m}: S_emb {s_emb:.6e} > max_s X_s · S_base {:.6e}",
            max_x * s_base
        );
        assert!(
            s_emb <= 4.0 * s_base,
            "m={m}: S_emb {s_emb:.6e} > 4 × S_base {s_base:.6e}"
        );
    }
    println!("[PASS] criterion 7: embedded run p=2 m=4..8 d=8, X_1 = 1, max_s X_s = {max_x:.4} ≤ 4");
}

fn eval_modes(modes: &BTreeMap<Vec<i64>, Complex64>, x: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (h, c) in modes {
        let phase: f64 = h.iter().zip(x).map(|(&hj, &xj)| hj as f64 * xj).sum();
        acc += c * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase);
    }
    acc
}

/// Random real trig polynomial over the given support (conjugate pairs).
fn random_real_poly(
    rng: &mut ChaCha8Rng,
    support: &[Vec<i64>],
) -> BTreeMap<Vec<i64>, Complex64> {
    let mut modes: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
    for h in support {
        if modes.contains_key(h) {
            continue;
        }
        let neg: Vec<i64> = h.iter().map(|v| -v).collect();
        if h.iter().all(|&v| v == 0) {
            modes.insert(h.clone(), Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        } else {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            modes.insert(h.clone(), c);
            modes.insert(neg, c.conj());
        }
    }
    modes
}

#[test]
fn criterion_08_aliasing_exactness() {
    let d = 2usize;
    let n = 128usize;
    let model = paper_weight_family(PaperFamily::Product, d, 2.0).unwrap();
    let params = SpaceParams::new(d, 2.0, model).unwrap();
    let ctx = CriterionContext::new(n, params.clone()).unwrap();
    let v = cbc_construct(&ctx, d).unwrap();
    let m = 16.0;
    let set = enumerate_index_set(&params, m).unwrap();
    // collision-free bins are a precondition for exact reproduction
    let mut bins: Vec<usize> = set
        .entries
        .iter()
        .map(|h| {
            h.iter()
                .zip(v.z.iter())
                .fold(0i64, |acc, (&hj, &zj)| {
                    (acc + hj.rem_euclid(n as i64) * zj as i64).rem_euclid(n as i64)
                }) as usize
        })
        .collect();
    bins.sort_unstable();
    let collision_free = bins.windows(2).all(|w| w[0] != w[1]);
    assert!(collision_free, "bins collide for n={n}, z={:?}, M={m}", v.z);

    let sampler = lattice_points(n, &v.z);
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0008);
    let mut worst = 0.0f64;
    for _trial in 0..20 {
        let modes = random_real_poly(&mut rng, &set.entries);
        let samples: Vec<f64> = sampler.points.iter().map(|t| eval_modes(&modes, t).re).collect();
        let approx = approximate_real(&samples, &params, &v.z, m).unwrap();
        for _ in 0..100 {
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let got = evaluate(&approx, &x).re;
            let want = eval_modes(&modes, &x).re;
            let err = (got - want).abs();
            assert!(err <= 1e-10, "reproduction error {err:.3e} at x = {x:?}");
            worst = worst.max(err);
        }
    }

    // colliding modes: h1 = h0 + ℓ with ℓ·z ≡ 0 lands in the same bin, and
    // the approximated coefficient is the sum over the congruent modes
    let z = &v.z;
    let zinv0 = (1..n).find(|&a| a * z[0] % n == 1).unwrap() as i64;
    let ell = [(-(z[1] as i64) * zinv0).rem_euclid(n as i64), 1];
    let dot = (ell[0] * z[0] as i64 + ell[1] * z[1] as i64).rem_euclid(n as i64);
    assert_eq!(dot, 0, "constructed ℓ not in the dual lattice");
    let mut worst_alias = 0.0f64;
    for h0 in [[1i64, 0], [0, 1], [2, -1]] {
        let h1 = vec![h0[0] + ell[0], h0[1] + ell[1]];
        let modes = BTreeMap::from([
            (h0.to_vec(), Complex64::new(0.7, 0.2)),
            (h1.clone(), Complex64::new(-0.3, 0.5)),
        ]);
        let samples: Vec<Complex64> =
            sampler.points.iter().map(|t| eval_modes(&modes, t)).collect();
        let approx = latticekit::approx::approximate(&samples, &params, z, m).unwrap();
        for (h, &got) in approx.index_set.entries.iter().zip(approx.coefficients.iter()) {
            let mut want = Complex64::new(0.0, 0.0);
            for (hm, &c) in &modes {
                let diff_dot: i64 = hm
                    .iter()
                    .zip(h.iter())
                    .zip(z.iter())
                    .map(|((&a, &b), &zj)| (a - b) * zj as i64)
                    .sum();
                if diff_dot.rem_euclid(n as i64) == 0 {
                    want += c;
                }
            }
            let err = (got - want).norm();
            assert!(err <= 1e-12, "aliasing identity off by {err:.3e} at h = {h:?}");
            worst_alias = worst_alias.max(err);
        }
    }
    println!(
        "[PASS] criterion 8: exact reproduction (worst {worst:.2e} ≤ 1e-10), aliasing identity (worst {worst_alias:.2e} ≤ 1e-12)"
    );
}

/// Dense solve with partial pivoting, for the circulant cross-check.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let diag = a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / diag;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

#[test]
fn criterion_09_kernel_interpolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0009);
    let mut worst_residual = 0.0f64;
    for &(n, d) in &[(64usize, 2usize), (256, 5), (1024, 10)] {
        let model = paper_weight_family(PaperFamily::Product, d, 2.0).unwrap();
        let params = SpaceParams::new(d, 2.0, model).unwrap();
        let ctx = CriterionContext::new(n, params.clone()).unwrap();
        let v = cbc_construct(&ctx, d).unwrap();
        let sampler = lattice_points(n, &v.z);
        let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let ki = kernel_interpolant(&params, &sampler, &samples).unwrap();
        for k in 0..n {
            let r = (ki.evaluate(&sampler.points[k]).unwrap() - samples[k]).abs();
            assert!(r <= 1e-9, "n={n} d={d} node {k}: residual {r:.3e}");
            worst_residual = worst_residual.max(r);
        }
    }
    // circulant vs dense for n ≤ 64
    let mut worst_rel = 0.0f64;
    for &n in &[16usize, 64] {
        let d = 3usize;
        let model = paper_weight_family(PaperFamily::Product, d, 2.0).unwrap();
        let params = SpaceParams::new(d, 2.0, model).unwrap();
        let ctx = CriterionContext::new(n, params.clone()).unwrap();
        let v = cbc_construct(&ctx, d).unwrap();
        let sampler = lattice_points(n, &v.z);
        let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let ki = kernel_interpolant(&params, &sampler, &samples).unwrap();
        let mut gram = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] =
                    kernel_value(&params, &sampler.points[i], &sampler.points[j]).unwrap();
            }
        }
        let dense = dense_solve(gram, samples.clone());
        let scale: f64 = dense.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: f64 =
            ki.a.iter().zip(dense.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let rel = diff / scale;
        assert!(rel <= 1e-8, "n={n}: circulant vs dense rel {rel:.3e}");
        worst_rel = worst_rel.max(rel);
    }
    println!(
        "[PASS] criterion 9: node residuals ≤ {worst_residual:.2e} (cap 1e-9), circulant-vs-dense rel ≤ {worst_rel:.2e} (cap 1e-8)"
    );
}

#[test]
fn criterion_10_bound_self_consistency() {
    // (a) L∞ v1 against its unequated two-term form
    let mut worst_v1 = 0.0f64;
    for &(n, d, alpha, tau) in &[(64usize, 2usize, 2.0, 0.8), (64, 2, 2.0, 0.6), (128, 3, 2.0, 0.75)]
    {
        let model = paper_weight_family(PaperFamily::Product, d, alpha).unwrap();
        let params = SpaceParams::new(d, alpha, model).unwrap();
        let ctx = CriterionContext::new(n, params.clone()).unwrap();
        let v = cbc_construct(&ctx, d).unwrap();
        let b = linf_error_bound_v1(&ctx, &v.z, tau).unwrap();
        let c1 = cardinality_constant(&params, tau).unwrap();
        let tail = truncation_tail_bound(&params, b.m, tau).unwrap();
        let two_term = (tail + 3.0 * b.m.powf(tau + 1.0) * c1 * b.criterion).sqrt();
        let rel = (two_term - b.bound).abs() / b.bound;
        assert!(rel <= 1e-12, "v1 n={n} τ={tau}: {rel:.3e}");
        worst_v1 = worst_v1.max(rel);
    }
    // (b) L∞ v2 against its unequated two-term form (α > 2)
    let mut worst_v2 = 0.0f64;
    for &(n, d, tau) in &[(128usize, 1usize, 0.3), (64, 2, 0.35), (128, 2, 0.45)] {
        let model = paper_weight_family(PaperFamily::Product, d, 4.0).unwrap();
        let params = SpaceParams::new(d, 4.0, model).unwrap();
        let ctx = CriterionContext::new(n, params.clone()).unwrap();
        let v = cbc_construct(&ctx, d).unwrap();
        let b = linf_error_bound_v2(&ctx, &v.z, tau).unwrap();
        let tail = truncation_tail_bound(&params, b.m, tau).unwrap();
        let two_term = (tail + 3.0 * b.m * b.criterion * b.criterion).sqrt();
        let rel = (two_term - b.bound).abs() / b.bound;
        assert!(rel <= 1e-12, "v2 n={n} τ={tau}: {rel:.3e}");
        worst_v2 = worst_v2.max(rel);
    }
    // (c) the L2 balance identity
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0010);
    for _ in 0..200 {
        let s = 10f64.powf(rng.gen_range(-8.0..4.0));
        let (m, bound) = l2_error_bound(s).unwrap();
        let direct = (1.0 / m + m * s).sqrt();
        assert!((direct - bound).abs() <= 1e-14 * bound, "S = {s:.3e}");
    }
    // (d) measured L2 error within the worst-case envelope, zero violations
    let d = 2usize;
    let n = 64usize;
    let model = paper_weight_family(PaperFamily::Product, d, 2.0).unwrap();
    let params = SpaceParams::new(d, 2.0, model).unwrap();
    let ctx = CriterionContext::new(n, params.clone()).unwrap();
    let v = cbc_construct(&ctx, d).unwrap();
    let s = s_criterion(&ctx, &v.z).unwrap().total;
    let (m, l2_bound_unit) = l2_error_bound(s).unwrap();
    let sampler = lattice_points(n, &v.z);
    let mut worst_margin = 0.0f64;
    for _trial in 0..30 {
        // modes inside and outside A_d(M)
        let support: Vec<Vec<i64>> = (0..10)
            .map(|_| vec![rng.gen_range(-6i64..=6), rng.gen_range(-6i64..=6)])
            .collect();
        let modes = random_real_poly(&mut rng, &support);
        let samples: Vec<f64> = sampler.points.iter().map(|t| eval_modes(&modes, t).re).collect();
        let approx = approximate_real(&samples, &params, &v.z, m).unwrap();
        let err = measure_l2_error_parseval(&modes, &approx);
        let norm = korobov_norm(&params, &modes);
        let cap = l2_bound_unit * norm;
        assert!(
            err <= cap * (1.0 + 1e-10),
            "measured {err:.6e} > √2 S^¼ ‖f‖ = {cap:.6e}"
        );
        worst_margin = worst_margin.max(err / cap);
    }
    println!(
        "[PASS] criterion 10: v1/v2 two-term rel ≤ {worst_v1:.2e}/{worst_v2:.2e}, L2 identity to 1e-14, measured/bound ≤ {worst_margin:.3}"
    );
}
