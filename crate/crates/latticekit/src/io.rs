//! Text formats: generating-vector files, embedded-sequence files, weight
//! configuration blocks, and the CSV/text exports for index sets,
//! approximants and criterion reports.
//!
//! Integers are written bit-exactly; reals are printed with 17 significant
//! digits so every f64 round-trips.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::approx::Approximant;
use crate::cbc::{EmbeddedResult, GeneratingVector};
use crate::error::{LatticeError, Result};
use crate::korobov::IndexSet;
use crate::weights::WeightModel;

pub const VECTOR_HEADER: &str = "latticekit-vector v1";

/// 17-significant-digit decimal form of a real (round-trip safe).
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| LatticeError::Parse {
        line,
        msg: format!("expected a real number, got {s:?}"),
    })
}

fn parse_int(s: &str, line: usize) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| LatticeError::Parse {
        line,
        msg: format!("expected an integer, got {s:?}"),
    })
}

fn reals_csv(vals: &[f64]) -> String {
    vals.iter().map(|&v| fmt_real(v)).collect::<Vec<_>>().join(",")
}

fn parse_reals_csv(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_real(p, line))
        .collect()
}

// --- weight configuration --------------------------------------------------

/// A parsed weight configuration: the model plus the space parameters the
/// block declares.
#[derive(Debug, Clone)]
pub struct WeightConfig {
    pub model: WeightModel,
    pub d: usize,
    pub alpha: f64,
}

/// Canonical text form. Paper-family references are materialized into
/// their parameters first, so equal weights hash equally regardless of how
/// they were specified.
pub fn weight_config_to_string(cfg: &WeightConfig) -> String {
    let mut out = String::new();
    match &cfg.model {
        WeightModel::Product { gamma } => {
            out.push_str("kind=product\n");
            let _ = writeln!(out, "d={}", cfg.d);
            let _ = writeln!(out, "alpha={}", fmt_real(cfg.alpha));
            let _ = writeln!(out, "gamma={}", reals_csv(gamma));
        }
        WeightModel::Pod { order, gamma } => {
            out.push_str("kind=pod\n");
            let _ = writeln!(out, "d={}", cfg.d);
            let _ = writeln!(out, "alpha={}", fmt_real(cfg.alpha));
            let _ = writeln!(out, "Gamma={}", reals_csv(order));
            let _ = writeln!(out, "gamma={}", reals_csv(gamma));
        }
        WeightModel::Spod { sigma, order, gamma } => {
            out.push_str("kind=spod\n");
            let _ = writeln!(out, "d={}", cfg.d);
            let _ = writeln!(out, "alpha={}", fmt_real(cfg.alpha));
            let _ = writeln!(out, "sigma={sigma}");
            let _ = writeln!(out, "Gamma={}", reals_csv(order));
            for row in gamma {
                let _ = writeln!(out, "gamma={}", reals_csv(row));
            }
        }
        WeightModel::Explicit { d, table } => {
            out.push_str("kind=explicit\n");
            let _ = writeln!(out, "d={d}");
            let _ = writeln!(out, "alpha={}", fmt_real(cfg.alpha));
            for (u, w) in table {
                let subset = u.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",");
                let _ = writeln!(out, "u={subset}:{}", fmt_real(*w));
            }
        }
    }
    out
}

/// Parse the canonical block (also accepts the `*-paper` family kinds).
pub fn parse_weight_config(text: &str) -> Result<WeightConfig> {
    use crate::weights::{paper_weight_family, PaperFamily};
    let mut kind: Option<String> = None;
    let mut d: Option<usize> = None;
    let mut alpha: Option<f64> = None;
    let mut sigma: Option<usize> = None;
    let mut order: Option<Vec<f64>> = None;
    let mut gamma_rows: Vec<Vec<f64>> = Vec::new();
    let mut table: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| LatticeError::Parse {
            line: lineno,
            msg: format!("expected key=value, got {line:?}"),
        })?;
        match key.trim() {
            "kind" => kind = Some(value.trim().to_string()),
            "d" => d = Some(parse_int(value, lineno)?),
            "alpha" => alpha = Some(parse_real(value, lineno)?),
            "sigma" => sigma = Some(parse_int(value, lineno)?),
            "Gamma" => order = Some(parse_reals_csv(value, lineno)?),
            "gamma" => gamma_rows.push(parse_reals_csv(value, lineno)?),
            "u" => {
                let (subset, w) = value.split_once(':').ok_or_else(|| LatticeError::Parse {
                    line: lineno,
                    msg: "explicit entry needs u=<subset>:<weight>".into(),
                })?;
                let u: Vec<usize> = subset
                    .split(',')
                    .filter(|p| !p.trim().is_empty())
                    .map(|p| parse_int(p, lineno))
                    .collect::<Result<_>>()?;
                table.insert(u, parse_real(w, lineno)?);
            }
            other => {
                return Err(LatticeError::Parse {
                    line: lineno,
                    msg: format!("unknown key {other:?}"),
                })
            }
        }
    }
    let kind = kind.ok_or_else(|| LatticeError::Parse { line: 0, msg: "missing kind".into() })?;
    let d = d.ok_or_else(|| LatticeError::Parse { line: 0, msg: "missing d".into() })?;
    let alpha =
        alpha.ok_or_else(|| LatticeError::Parse { line: 0, msg: "missing alpha".into() })?;
    let model = match kind.as_str() {
        "product-paper" => paper_weight_family(PaperFamily::Product, d, alpha)?,
        "pod-paper" => paper_weight_family(PaperFamily::Pod, d, alpha)?,
        "spod-paper" => paper_weight_family(PaperFamily::Spod, d, alpha)?,
        "product" => {
            let g = gamma_rows.pop().ok_or_else(|| LatticeError::Parse {
                line: 0,
                msg: "product weights need a gamma= line".into(),
            })?;
            WeightModel::new_product(g)?
        }
        "pod" => {
            let g = gamma_rows.pop().ok_or_else(|| LatticeError::Parse {
                line: 0,
                msg: "pod weights need a gamma= line".into(),
            })?;
            let o = order.ok_or_else(|| LatticeError::Parse {
                line: 0,
                msg: "pod weights need a Gamma= line".into(),
            })?;
            WeightModel::new_pod(o, g)?
        }
        "spod" => {
            let s = sigma.ok_or_else(|| LatticeError::Parse {
                line: 0,
                msg: "spod weights need sigma=".into(),
            })?;
            let o = order.ok_or_else(|| LatticeError::Parse {
                line: 0,
                msg: "spod weights need a Gamma= line".into(),
            })?;
            WeightModel::new_spod(s, o, gamma_rows)?
        }
        "explicit" => WeightModel::new_explicit(d, table)?,
        other => {
            return Err(LatticeError::Parse {
                line: 0,
                msg: format!("unknown weight kind {other:?}"),
            })
        }
    };
    Ok(WeightConfig { model, d, alpha })
}

/// 16-hex-character digest of the canonical weight configuration.
pub fn weight_hash(cfg: &WeightConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(weight_config_to_string(cfg).as_bytes());
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

// --- generating-vector files -------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFile {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub weights_hash: String,
    pub z: Vec<usize>,
    /// Present for embedded-sequence files.
    pub embedded: Option<EmbeddedHeader>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedHeader {
    pub p: u64,
    pub m1: u32,
    pub m2: u32,
    pub x_values: Vec<f64>,
}

pub fn vector_file_to_string(v: &GeneratingVector, cfg: &WeightConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{VECTOR_HEADER}");
    let _ = writeln!(
        out,
        "n={} d={} alpha={} weights={}",
        v.n,
        v.d,
        fmt_real(cfg.alpha),
        weight_hash(cfg)
    );
    for &zj in &v.z {
        let _ = writeln!(out, "{zj}");
    }
    out
}

pub fn embedded_file_to_string(r: &EmbeddedResult, cfg: &WeightConfig) -> String {
    let n_top = (r.p as usize).pow(r.m2);
    let mut out = String::new();
    let _ = writeln!(out, "{VECTOR_HEADER}");
    let _ = writeln!(
        out,
        "n={} d={} alpha={} weights={}",
        n_top,
        r.d,
        fmt_real(cfg.alpha),
        weight_hash(cfg)
    );
    let _ = writeln!(out, "p={} m1={} m2={}", r.p, r.m1, r.m2);
    for &zj in &r.z_emb {
        let _ = writeln!(out, "{zj}");
    }
    let _ = writeln!(out, "X");
    for &x in &r.x_values {
        let _ = writeln!(out, "{}", fmt_real(x));
    }
    out
}

pub fn parse_vector_file(text: &str) -> Result<VectorFile> {
    let mut lines = text.lines().enumerate();
    let (i, header) = lines.next().ok_or(LatticeError::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    if header.trim() != VECTOR_HEADER {
        return Err(LatticeError::Parse {
            line: i + 1,
            msg: format!("expected header {VECTOR_HEADER:?}, got {header:?}"),
        });
    }
    let (i, meta) = lines.next().ok_or(LatticeError::Parse {
        line: 2,
        msg: "missing metadata line".into(),
    })?;
    let mut n = None;
    let mut d = None;
    let mut alpha = None;
    let mut hash = None;
    for field in meta.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| LatticeError::Parse {
            line: i + 1,
            msg: format!("bad metadata field {field:?}"),
        })?;
        match k {
            "n" => n = Some(parse_int(v, i + 1)?),
            "d" => d = Some(parse_int(v, i + 1)?),
            "alpha" => alpha = Some(parse_real(v, i + 1)?),
            "weights" => hash = Some(v.to_string()),
            _ => {
                return Err(LatticeError::Parse {
                    line: i + 1,
                    msg: format!("unknown metadata key {k:?}"),
                })
            }
        }
    }
    let (n, d, alpha, weights_hash) = match (n, d, alpha, hash) {
        (Some(n), Some(d), Some(a), Some(h)) => (n, d, a, h),
        _ => {
            return Err(LatticeError::Parse {
                line: i + 1,
                msg: "metadata must contain n=, d=, alpha=, weights=".into(),
            })
        }
    };
    // optional embedded line
    let mut rest: Vec<(usize, &str)> = lines.collect();
    let mut embedded_meta: Option<(u64, u32, u32)> = None;
    if let Some(&(j, line)) = rest.first() {
        if line.trim_start().starts_with("p=") {
            let mut p = None;
            let mut m1 = None;
            let mut m2 = None;
            for field in line.split_whitespace() {
                let (k, v) = field.split_once('=').ok_or_else(|| LatticeError::Parse {
                    line: j + 1,
                    msg: format!("bad field {field:?}"),
                })?;
                match k {
                    "p" => p = Some(parse_int(v, j + 1)? as u64),
                    "m1" => m1 = Some(parse_int(v, j + 1)? as u32),
                    "m2" => m2 = Some(parse_int(v, j + 1)? as u32),
                    _ => {
                        return Err(LatticeError::Parse {
                            line: j + 1,
                            msg: format!("unknown key {k:?}"),
                        })
                    }
                }
            }
            embedded_meta = Some((
                p.ok_or(LatticeError::Parse { line: j + 1, msg: "missing p=".into() })?,
                m1.ok_or(LatticeError::Parse { line: j + 1, msg: "missing m1=".into() })?,
                m2.ok_or(LatticeError::Parse { line: j + 1, msg: "missing m2=".into() })?,
            ));
            rest.remove(0);
        }
    }
    let mut z = Vec::with_capacity(d);
    let mut x_values = Vec::new();
    let mut in_x = false;
    for (j, line) in rest {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "X" {
            in_x = true;
            continue;
        }
        if in_x {
            x_values.push(parse_real(line, j + 1)?);
        } else {
            z.push(parse_int(line, j + 1)?);
        }
    }
    if z.len() != d {
        return Err(LatticeError::Parse {
            line: 0,
            msg: format!("expected {d} components, found {}", z.len()),
        });
    }
    let embedded = match embedded_meta {
        Some((p, m1, m2)) => Some(EmbeddedHeader { p, m1, m2, x_values }),
        None => {
            if in_x {
                return Err(LatticeError::Parse {
                    line: 0,
                    msg: "X block present without p=/m1=/m2= metadata".into(),
                });
            }
            None
        }
    };
    Ok(VectorFile { n, d, alpha, weights_hash, z, embedded })
}

/// Check a loaded file against the weight configuration it is used with.
pub fn verify_weight_hash(file: &VectorFile, cfg: &WeightConfig) -> Result<()> {
    let expect = weight_hash(cfg);
    if file.weights_hash != expect {
        return Err(LatticeError::Consistency(format!(
            "weight hash mismatch: file has {}, configuration hashes to {expect}",
            file.weights_hash
        )));
    }
    Ok(())
}

// --- text/CSV exports ---------------------------------------------------------

/// One index per line, d whitespace-separated integers, lexicographic order.
pub fn index_set_to_text(set: &IndexSet) -> String {
    let mut out = String::new();
    for h in &set.entries {
        let row = h.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{row}");
    }
    out
}

/// CSV with columns n, d, s, t_s, cumulative_s.
pub fn criterion_csv(n: usize, d: usize, t_values: &[f64]) -> String {
    let mut out = String::from("n,d,s,t_s,cumulative_s\n");
    let mut cum = 0.0f64;
    for (i, &t) in t_values.iter().enumerate() {
        cum += t;
        let _ = writeln!(out, "{n},{d},{},{},{}", i + 1, fmt_real(t), fmt_real(cum));
    }
    out
}

/// CSV with columns h_1..h_d, re, im.
pub fn approximant_csv(approx: &Approximant) -> String {
    let mut out = String::new();
    let heads: Vec<String> = (1..=approx.d).map(|j| format!("h_{j}")).collect();
    let _ = writeln!(out, "{},re,im", heads.join(","));
    for (h, c) in approx.index_set.entries.iter().zip(approx.coefficients.iter()) {
        let row = h.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{row},{},{}", fmt_real(c.re), fmt_real(c.im));
    }
    out
}
