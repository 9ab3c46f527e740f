//! Command implementations behind the `latticekit` binary: configuration
//! resolution, the construct/bounds/approximate commands, and the
//! experiment harness that emits CSV for external plotting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use latticekit::cbc::{
    self, bound_report, cbc_construct, cbc_construct_embedded, embedded_penalty_bound,
    BoundParams, EmbeddedResult, GeneratingVector,
};
use latticekit::criterion::{s_criterion, CriterionContext};
use latticekit::error::{LatticeError, Result};
use latticekit::io::{
    self, criterion_csv, embedded_file_to_string, fmt_real, parse_vector_file,
    parse_weight_config, vector_file_to_string, verify_weight_hash, WeightConfig,
};
use latticekit::korobov::SpaceParams;
use latticekit::weights::{paper_weight_family, PaperFamily};

/// Exit codes: 0 success, 2 validation, 3 capacity, 4 numerical.
pub fn exit_code_for(err: &LatticeError) -> i32 {
    match err {
        LatticeError::Capacity(_) => 3,
        LatticeError::NearSingular(_)
        | LatticeError::DegenerateWeights(_)
        | LatticeError::NotApplicable(_) => 4,
        _ => 2,
    }
}

/// How the weight system was named on the command line.
#[derive(Debug, Clone)]
pub enum WeightSpec {
    ProductPaper,
    PodPaper,
    SpodPaper,
    File(PathBuf),
}

impl WeightSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "product-paper" => Ok(WeightSpec::ProductPaper),
            "pod-paper" => Ok(WeightSpec::PodPaper),
            "spod-paper" => Ok(WeightSpec::SpodPaper),
            other => match other.strip_prefix("file:") {
                Some(path) => Ok(WeightSpec::File(PathBuf::from(path))),
                None => Err(LatticeError::InvalidParameter(format!(
                    "weights must be product-paper|pod-paper|spod-paper|file:<path>, got {other:?}"
                ))),
            },
        }
    }

    /// Resolve against the command-line d/alpha. File configs own their
    /// d/alpha; explicit flags must agree when both are present.
    pub fn resolve(&self, d: Option<usize>, alpha: Option<f64>) -> Result<WeightConfig> {
        match self {
            WeightSpec::File(path) => {
                let text = fs::read_to_string(path)?;
                let cfg = parse_weight_config(&text)?;
                if let Some(dd) = d {
                    if dd != cfg.d {
                        return Err(LatticeError::InvalidParameter(format!(
                            "--d {dd} conflicts with d = {} from {path:?}",
                            cfg.d
                        )));
                    }
                }
                if let Some(a) = alpha {
                    if a != cfg.alpha {
                        return Err(LatticeError::InvalidParameter(format!(
                            "--alpha {a} conflicts with alpha = {} from {path:?}",
                            cfg.alpha
                        )));
                    }
                }
                Ok(cfg)
            }
            named => {
                let d = d.ok_or_else(|| {
                    LatticeError::InvalidParameter("paper weight families need --d".into())
                })?;
                let alpha = alpha.ok_or_else(|| {
                    LatticeError::InvalidParameter("paper weight families need --alpha".into())
                })?;
                let kind = match named {
                    WeightSpec::ProductPaper => PaperFamily::Product,
                    WeightSpec::PodPaper => PaperFamily::Pod,
                    WeightSpec::SpodPaper => PaperFamily::Spod,
                    WeightSpec::File(_) => unreachable!(),
                };
                Ok(WeightConfig { model: paper_weight_family(kind, d, alpha)?, d, alpha })
            }
        }
    }
}

/// Validated run configuration for one command invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub weights: WeightConfig,
    /// Fixed point count; mutually exclusive with `embedded`.
    pub n: Option<usize>,
    /// (p, m1, m2) for embedded runs.
    pub embedded: Option<(u64, u32, u32)>,
    pub out: PathBuf,
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
    pub full_scale: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match (self.n, self.embedded) {
            (Some(n), None) => {
                if n < 2 {
                    return Err(LatticeError::InvalidParameter(format!("n must be ≥ 2, got {n}")));
                }
            }
            (None, Some((p, m1, m2))) => {
                if !cbc::is_prime(p) {
                    return Err(LatticeError::InvalidParameter(format!("p = {p} is not prime")));
                }
                if m1 < 1 || m2 <= m1 {
                    return Err(LatticeError::InvalidParameter(format!(
                        "need m2 > m1 ≥ 1, got {m1}, {m2}"
                    )));
                }
            }
            _ => {
                return Err(LatticeError::InvalidParameter(
                    "exactly one of --n and (--p, --m1, --m2) must be given".into(),
                ))
            }
        }
        Ok(())
    }

    fn space_params(&self) -> Result<SpaceParams> {
        SpaceParams::new(self.weights.d, self.weights.alpha, self.weights.model.clone())
    }
}

fn write_out(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// `construct`: build the vector, write the vector file and the criterion
/// CSV next to it.
pub fn cmd_construct(cfg: &RunConfig) -> Result<ConstructOutput> {
    cfg.validate()?;
    let n = cfg.n.ok_or_else(|| {
        LatticeError::InvalidParameter("construct needs --n (use construct-embedded for ranges)".into())
    })?;
    let params = cfg.space_params()?;
    let ctx = CriterionContext::new(n, params)?;
    let vector = cbc_construct(&ctx, cfg.weights.d)?;
    let file_text = vector_file_to_string(&vector, &cfg.weights);
    write_out(&cfg.out, &file_text)?;
    let csv = criterion_csv(n, cfg.weights.d, &vector.t_values);
    let csv_path = with_suffix(&cfg.out, ".criterion.csv");
    write_out(&csv_path, &csv)?;
    Ok(ConstructOutput { vector, vector_path: cfg.out.clone(), csv_path })
}

pub struct ConstructOutput {
    pub vector: GeneratingVector,
    pub vector_path: PathBuf,
    pub csv_path: PathBuf,
}

/// `construct-embedded`: embedded vector file plus the X-ratio CSV and the
/// per-m criterion comparison CSV.
pub fn cmd_construct_embedded(cfg: &RunConfig) -> Result<EmbeddedOutput> {
    cfg.validate()?;
    let (p, m1, m2) = cfg.embedded.ok_or_else(|| {
        LatticeError::InvalidParameter("construct-embedded needs --p, --m1, --m2".into())
    })?;
    let params = cfg.space_params()?;
    let result = cbc_construct_embedded(p, m1, m2, &params)?;
    write_out(&cfg.out, &embedded_file_to_string(&result, &cfg.weights))?;

    let mut x_csv = String::from("s,x_s\n");
    for (s, &x) in result.x_values.iter().enumerate() {
        let _ = writeln!(x_csv, "{},{}", s + 1, fmt_real(x));
    }
    let x_path = with_suffix(&cfg.out, ".x.csv");
    write_out(&x_path, &x_csv)?;

    let mut s_csv = String::from("m,n,s_embedded,s_baseline\n");
    for m in m1..=m2 {
        let n = (p as usize).pow(m);
        let _ = writeln!(
            s_csv,
            "{m},{n},{},{}",
            fmt_real(result.s_emb(m)),
            fmt_real(result.s_baseline(m))
        );
    }
    let s_path = with_suffix(&cfg.out, ".s.csv");
    write_out(&s_path, &s_csv)?;
    Ok(EmbeddedOutput { result, file_path: cfg.out.clone(), x_csv_path: x_path, s_csv_path: s_path })
}

pub struct EmbeddedOutput {
    pub result: EmbeddedResult,
    pub file_path: PathBuf,
    pub x_csv_path: PathBuf,
    pub s_csv_path: PathBuf,
}

fn load_vector(path: &Path, weights: &WeightConfig) -> Result<io::VectorFile> {
    let text = fs::read_to_string(path)?;
    let file = parse_vector_file(&text)?;
    verify_weight_hash(&file, weights)?;
    Ok(file)
}

/// `criterion`: evaluate T_s and S for a stored vector; CSV out.
pub fn cmd_criterion(vector_path: &Path, weights: &WeightConfig, out: &Path) -> Result<f64> {
    let file = load_vector(vector_path, weights)?;
    let params = SpaceParams::new(weights.d, weights.alpha, weights.model.clone())?;
    let ctx = CriterionContext::new(file.n, params)?;
    let breakdown = s_criterion(&ctx, &file.z)?;
    write_out(out, &criterion_csv(file.n, file.d, &breakdown.t_values))?;
    Ok(breakdown.total)
}

/// `bounds`: the full bound report for a stored vector; CSV out.
pub fn cmd_bounds(
    vector_path: &Path,
    weights: &WeightConfig,
    lambda: Option<f64>,
    tau: Option<f64>,
    out: &Path,
) -> Result<String> {
    let file = load_vector(vector_path, weights)?;
    let params = SpaceParams::new(weights.d, weights.alpha, weights.model.clone())?;
    let ctx = CriterionContext::new(file.n, params)?;
    let alpha = weights.alpha;
    let lambda = lambda.unwrap_or(1.0f64.min(1.0 / alpha + 0.5));
    let tau = tau.unwrap_or((1.0 / alpha + 1.0) / 2.0);
    let bp = BoundParams { lambda, tau, q: tau };
    let report = bound_report(&ctx, &file.z, &bp)?;
    let mut csv = String::from("quantity,value,parameter\n");
    let _ = writeln!(csv, "s,{},", fmt_real(report.s));
    let _ = writeln!(csv, "m_l2,{},", fmt_real(report.m_l2));
    let _ = writeln!(csv, "l2_bound,{},", fmt_real(report.l2_bound));
    let _ = writeln!(csv, "suapp_bound,{},lambda={}", fmt_real(report.suapp), fmt_real(lambda));
    if let Some(b) = &report.linf_v1 {
        let _ = writeln!(csv, "linf1_m,{},tau={}", fmt_real(b.m), fmt_real(b.tau));
        let _ = writeln!(csv, "linf1_bound,{},tau={}", fmt_real(b.bound), fmt_real(b.tau));
    }
    if let Some(b) = &report.linf_v2 {
        let _ = writeln!(csv, "linf2_m,{},tau={}", fmt_real(b.m), fmt_real(b.tau));
        let _ = writeln!(csv, "linf2_bound,{},tau={}", fmt_real(b.bound), fmt_real(b.tau));
    }
    if let Some(e) = &file.embedded {
        let pen = embedded_penalty_bound(e.p, e.m1, e.m2, alpha, lambda)?;
        let _ = writeln!(csv, "embedded_penalty_bound,{},lambda={}", fmt_real(pen), fmt_real(lambda));
    }
    write_out(out, &csv)?;
    Ok(csv)
}

/// `approximate`: read samples (one per line, k = 0..n-1 in sampler
/// order), extract coefficients over A_d(M), write the approximant CSV.
pub fn cmd_approximate(
    vector_path: &Path,
    weights: &WeightConfig,
    m: f64,
    samples_path: &Path,
    out: &Path,
) -> Result<usize> {
    let file = load_vector(vector_path, weights)?;
    let text = fs::read_to_string(samples_path)?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        samples.push(line.parse::<f64>().map_err(|_| LatticeError::Parse {
            line: i + 1,
            msg: format!("expected a real sample, got {line:?}"),
        })?);
    }
    if samples.len() != file.n {
        return Err(LatticeError::InvalidParameter(format!(
            "vector has n = {}, samples file has {} values",
            file.n,
            samples.len()
        )));
    }
    let params = SpaceParams::new(weights.d, weights.alpha, weights.model.clone())?;
    let approx = latticekit::approx::approximate_real(&samples, &params, &file.z, m)?;
    write_out(out, &io::approximant_csv(&approx))?;
    Ok(approx.index_set.len())
}

// --- experiments -------------------------------------------------------------

/// Least-squares fit of log S against log n.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

impl RateFit {
    /// Fit from (n, S) pairs; needs at least 3 points.
    pub fn fit(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < 3 {
            return Err(LatticeError::InvalidParameter(format!(
                "a rate fit needs ≥ 3 points, got {}",
                pairs.len()
            )));
        }
        let points: Vec<(f64, f64)> = pairs.iter().map(|&(n, s)| (n.ln(), s.ln())).collect();
        let k = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        let intercept = (sy - slope * sx) / k;
        let residual = points
            .iter()
            .map(|&(x, y)| {
                let e = y - slope * x - intercept;
                e * e
            })
            .sum::<f64>()
            .sqrt();
        Ok(RateFit { points, slope, intercept, residual })
    }
}

/// Prime point counts used by the reference experiments for the
/// prime-vs-composite comparison.
pub const PRIME_POINT_COUNTS: [usize; 9] =
    [503, 1009, 2003, 4001, 8009, 16007, 32003, 64007, 128021];

/// Point-count grids for the rate experiment.
pub fn default_rate_grid(full_scale: bool) -> Vec<usize> {
    let (lo, hi) = if full_scale { (9u32, 17u32) } else { (6, 13) };
    (lo..=hi).map(|m| 1usize << m).collect()
}

pub struct RatesOutput {
    pub pairs: Vec<(usize, f64)>,
    pub fit: RateFit,
    pub csv_path: PathBuf,
}

/// `experiment rates`: construct a vector per n, record S, fit the slope
/// of log S against log n, write points and fit.
pub fn cmd_experiment_rates(cfg: &RunConfig, n_list: &[usize]) -> Result<RatesOutput> {
    let params = cfg.space_params()?;
    let mut pairs = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let ctx = CriterionContext::new(n, params.clone())?;
        let v = cbc_construct(&ctx, cfg.weights.d)?;
        pairs.push((n, v.s_value()));
    }
    let fit = RateFit::fit(&pairs.iter().map(|&(n, s)| (n as f64, s)).collect::<Vec<_>>())?;
    let mut csv = String::from("n,s\n");
    for &(n, s) in &pairs {
        let _ = writeln!(csv, "{n},{}", fmt_real(s));
    }
    let _ = writeln!(
        csv,
        "# fit slope={} intercept={} residual={}",
        fmt_real(fit.slope),
        fmt_real(fit.intercept),
        fmt_real(fit.residual)
    );
    write_out(&cfg.out, &csv)?;
    Ok(RatesOutput { pairs, fit, csv_path: cfg.out.clone() })
}

pub struct XRatioOutput {
    pub x_values: Vec<f64>,
    pub max_x: f64,
    pub csv_path: PathBuf,
}

/// `experiment xratio`: the embedded penalty ratios X_s against s.
pub fn cmd_experiment_xratio(cfg: &RunConfig) -> Result<XRatioOutput> {
    cfg.validate()?;
    let (p, m1, m2) = cfg.embedded.ok_or_else(|| {
        LatticeError::InvalidParameter("xratio needs --p, --m1, --m2".into())
    })?;
    let params = cfg.space_params()?;
    let result = cbc_construct_embedded(p, m1, m2, &params)?;
    let mut csv = String::from("s,x_s\n");
    for (s, &x) in result.x_values.iter().enumerate() {
        let _ = writeln!(csv, "{},{}", s + 1, fmt_real(x));
    }
    let _ = writeln!(csv, "# max_x={}", fmt_real(result.max_x()));
    write_out(&cfg.out, &csv)?;
    Ok(XRatioOutput { x_values: result.x_values.clone(), max_x: result.max_x(), csv_path: cfg.out.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_fit_recovers_exact_power_law() {
        let pairs: Vec<(f64, f64)> =
            (6..=13).map(|m| ((1u64 << m) as f64, ((1u64 << m) as f64).powi(-2))).collect();
        let fit = RateFit::fit(&pairs).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12, "slope = {}", fit.slope);
        assert!(fit.residual < 1e-12);
        assert!(RateFit::fit(&pairs[..2]).is_err());
    }

    #[test]
    fn weight_spec_parsing() {
        assert!(matches!(WeightSpec::parse("product-paper"), Ok(WeightSpec::ProductPaper)));
        assert!(matches!(WeightSpec::parse("file:w.cfg"), Ok(WeightSpec::File(_))));
        assert!(WeightSpec::parse("unknown").is_err());
    }

    #[test]
    fn run_config_exclusivity() {
        let weights = WeightSpec::parse("product-paper")
            .unwrap()
            .resolve(Some(2), Some(2.0))
            .unwrap();
        let both = RunConfig {
            weights: weights.clone(),
            n: Some(8),
            embedded: Some((2, 1, 3)),
            out: PathBuf::from("x"),
            tau: None,
            lambda: None,
            full_scale: false,
        };
        assert!(both.validate().is_err());
        let neither = RunConfig { n: None, embedded: None, ..both.clone() };
        assert!(neither.validate().is_err());
        let good = RunConfig { n: Some(8), embedded: None, ..both };
        good.validate().unwrap();
    }
}
