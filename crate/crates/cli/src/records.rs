//! Run persistence: CSV tables plus a JSON summary.
//!
//! CSV output is byte-deterministic: comma separated, LF line endings,
//! exact quantities as decimal integers, reals at 17 significant digits.
//! Wall-clock and other non-reproducible metadata go only to the JSON
//! summary, never the CSV.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// One CSV table with a fixed header.
pub struct Table {
    pub name: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl Table {
    pub fn new(name: &str, header: &str) -> Self {
        Table {
            name: name.to_string(),
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: String) {
        self.rows.push(row);
    }
}

/// Everything one experiment run persists.
pub struct RunRecord {
    pub tables: Vec<Table>,
    pub summary: Value,
}

impl RunRecord {
    pub fn write(&self, out_dir: &Path, stem: &str, config_echo: &Value) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating {}", out_dir.display()))?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = out_dir.join(format!("{stem}_{}.csv", t.name));
            let mut buf = String::with_capacity(64 * (t.rows.len() + 1));
            buf.push_str(&t.header);
            buf.push('\n');
            for r in &t.rows {
                buf.push_str(r);
                buf.push('\n');
            }
            fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        let summary = json!({
            "config": config_echo,
            "config_hash": fnv1a_hex(config_echo.to_string().as_bytes()),
            "git": git_describe(),
            "wall_clock_seconds": self.summary.get("wall_clock_seconds"),
            "summary": self.summary,
        });
        let path = out_dir.join(format!("{stem}_summary.json"));
        fs::write(&path, serde_json::to_string_pretty(&summary)?)
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(written)
    }
}

fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// FNV-1a over bytes, as a 16-hex-digit configuration fingerprint.
pub fn fnv1a_hex(data: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in data {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Median of an unsorted slice (mean of the middle pair when even).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Ordinary least squares y = a + b x: returns (slope, intercept,
/// slope standard error).
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(n >= 2.0, "regression needs at least two points");
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if xs.len() > 2 {
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let e = y - intercept - slope * x;
                e * e
            })
            .sum();
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, se)
}

/// Area under the ROC curve for "higher score means positive", computed
/// as the Mann-Whitney statistic with average ranks on ties.
pub fn auc(positives: &[f64], negatives: &[f64]) -> f64 {
    assert!(!positives.is_empty() && !negatives.is_empty());
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for item in &all[i..=j] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let np = positives.len() as f64;
    let nn = negatives.len() as f64;
    (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn)
}

/// Accuracy of the best single-threshold classifier on scores (higher
/// means positive).
pub fn best_threshold_accuracy(positives: &[f64], negatives: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total = all.len() as f64;
    // Sweep thresholds between consecutive scores; predicting positive
    // above the cut. Start with the cut below everything.
    let mut pos_above = positives.len() as f64;
    let mut neg_above = negatives.len() as f64;
    let mut best = (pos_above + (negatives.len() as f64 - neg_above)) / total;
    for (_, is_pos) in &all {
        if *is_pos {
            pos_above -= 1.0;
        } else {
            neg_above -= 1.0;
        }
        let acc = (pos_above + (negatives.len() as f64 - neg_above)) / total;
        best = best.max(acc);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn ols_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (slope, intercept, se) = ols(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
        assert!(se < 1e-9);
    }

    #[test]
    fn auc_perfect_and_random() {
        assert_eq!(auc(&[2.0, 3.0], &[0.0, 1.0]), 1.0);
        assert_eq!(auc(&[0.0, 1.0], &[2.0, 3.0]), 0.0);
        assert_eq!(auc(&[1.0, 2.0], &[1.0, 2.0]), 0.5);
    }

    #[test]
    fn threshold_accuracy() {
        let acc = best_threshold_accuracy(&[2.0, 3.0], &[0.0, 1.0]);
        assert_eq!(acc, 1.0);
        let acc = best_threshold_accuracy(&[0.0, 3.0], &[1.0, 2.0]);
        assert_eq!(acc, 0.75);
    }

    #[test]
    fn real_formatting_is_fixed_width_scientific() {
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_real(-0.5), "-5.0000000000000000e-1");
    }
}
