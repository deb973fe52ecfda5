//! Rank-based comparison of several models over several datasets.
//!
//! Average ranks use mid-ranks for ties, the Friedman statistic is corrected
//! to the Iman–Davenport F form, and pairwise differences are judged with
//! the Nemenyi critical difference.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::beta::checked_beta_reg;

use crate::error::{argument, Error, Result};

/// Accuracies (percent), one row per dataset and one column per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub models: Vec<String>,
    pub datasets: Vec<String>,
    pub accuracy: Vec<Vec<Option<f64>>>,
    /// Per-cell standard deviations when the source provides them.
    pub std_devs: Option<Vec<Vec<Option<f64>>>>,
}

impl AccuracyTable {
    pub fn new(models: Vec<String>, datasets: Vec<String>, accuracy: Vec<Vec<f64>>) -> Result<Self> {
        if accuracy.len() != datasets.len() || accuracy.iter().any(|row| row.len() != models.len()) {
            return argument("accuracy table shape does not match its labels");
        }
        Ok(Self {
            models,
            datasets,
            accuracy: accuracy.into_iter().map(|r| r.into_iter().map(Some).collect()).collect(),
            std_devs: None,
        })
    }

    /// Reads either a results file (`dataset`, `model`, `mean_accuracy`
    /// columns, optional `std_dev`) or a wide table whose first column names
    /// the dataset and whose other columns are models.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let parse = |row: usize, column: usize, s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row,
                column,
                message: format!("'{s}' is not a number"),
            })
        };
        if let (Some(dc), Some(mc), Some(ac)) = (col("dataset"), col("model"), col("mean_accuracy")) {
            let sc = col("std_dev");
            let mut models: Vec<String> = Vec::new();
            let mut datasets: Vec<String> = Vec::new();
            let mut cells: BTreeMap<(usize, usize), (Option<f64>, Option<f64>)> = BTreeMap::new();
            for (i, rec) in reader.records().enumerate() {
                let rec = rec?;
                let get = |c: usize| rec.get(c).unwrap_or("");
                let d = index_of(&mut datasets, get(dc));
                let m = index_of(&mut models, get(mc));
                let acc = parse(i + 2, ac + 1, get(ac))?;
                let sd = match sc {
                    Some(c) => parse(i + 2, c + 1, get(c))?,
                    None => None,
                };
                cells.insert((d, m), (acc, sd));
            }
            let grid = |pick: fn(&(Option<f64>, Option<f64>)) -> Option<f64>| {
                (0..datasets.len())
                    .map(|d| (0..models.len()).map(|m| cells.get(&(d, m)).and_then(pick)).collect())
                    .collect::<Vec<Vec<Option<f64>>>>()
            };
            let accuracy = grid(|c| c.0);
            let std_devs = sc.map(|_| grid(|c| c.1));
            return Ok(Self { models, datasets, accuracy, std_devs });
        }
        if headers.len() < 2 {
            return Err(Error::Data(format!("{}: need a dataset column and at least one model", path.display())));
        }
        let models = headers[1..].to_vec();
        let mut datasets = Vec::new();
        let mut accuracy = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            datasets.push(rec.get(0).unwrap_or("").to_string());
            let row = (1..headers.len())
                .map(|j| parse(i + 2, j + 1, rec.get(j).unwrap_or("")))
                .collect::<Result<Vec<_>>>()?;
            accuracy.push(row);
        }
        Ok(Self { models, datasets, accuracy, std_devs: None })
    }

    /// `dataset/model` labels of every empty cell.
    pub fn missing_cells(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (d, row) in self.accuracy.iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                if v.is_none() {
                    out.push(format!("{}/{}", self.datasets[d], self.models[m]));
                }
            }
        }
        out
    }

    fn complete(&self) -> Result<Vec<Vec<f64>>> {
        let missing = self.missing_cells();
        if !missing.is_empty() {
            return Err(Error::Data(format!("accuracy table has missing cells: {}", missing.join(", "))));
        }
        if self.datasets.is_empty() || self.models.is_empty() {
            return Err(Error::Data("accuracy table is empty".into()));
        }
        Ok(self
            .accuracy
            .iter()
            .map(|r| r.iter().map(|v| v.expect("checked complete")).collect())
            .collect())
    }

    pub fn average_accuracy(&self) -> Result<Vec<f64>> {
        let acc = self.complete()?;
        Ok(column_means(&acc, self.models.len()))
    }

    pub fn average_std_dev(&self) -> Option<Vec<f64>> {
        let sds = self.std_devs.as_ref()?;
        let full: Option<Vec<Vec<f64>>> = sds.iter().map(|r| r.iter().copied().collect()).collect();
        full.map(|f| column_means(&f, self.models.len()))
    }
}

fn index_of(items: &mut Vec<String>, key: &str) -> usize {
    match items.iter().position(|k| k == key) {
        Some(i) => i,
        None => {
            items.push(key.to_string());
            items.len() - 1
        }
    }
}

fn column_means(rows: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut sums = vec![0.0; n];
    for row in rows {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    sums.iter().map(|s| s / rows.len() as f64).collect()
}

/// Ranks within one dataset: 1 for the highest accuracy, tied values share
/// the mean of their positions.
pub fn rank_row(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    ranks
}

pub fn average_ranks(t: &AccuracyTable) -> Result<Vec<f64>> {
    let acc = t.complete()?;
    let ranks: Vec<Vec<f64>> = acc.iter().map(|r| rank_row(r)).collect();
    Ok(column_means(&ranks, t.models.len()))
}

/// Upper-tail critical value of the F distribution with `(d1, d2)` degrees
/// of freedom at significance `alpha`.
pub fn f_critical(alpha: f64, d1: f64, d2: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(d1 > 0.0) || !(d2 > 0.0) {
        return argument(format!("invalid F quantile request alpha={alpha}, dof=({d1}, {d2})"));
    }
    let upper = |x: f64| -> Result<f64> {
        let t = d1 * x / (d1 * x + d2);
        checked_beta_reg(d1 / 2.0, d2 / 2.0, t)
            .map(|cdf| 1.0 - cdf)
            .map_err(|e| Error::Numeric(format!("incomplete beta: {e}")))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while upper(hi)? > alpha {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numeric("F quantile search diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper(mid)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

// q_α for k = 2..=20 models: the studentized range quantile with infinite
// degrees of freedom divided by √2.
const Q_05: [f64; 19] = [
    1.960, 2.344, 2.569, 2.728, 2.850, 2.948, 3.031, 3.102, 3.164, 3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458,
    3.489, 3.517, 3.544,
];
const Q_10: [f64; 19] = [
    1.645, 2.052, 2.291, 2.460, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978, 3.030, 3.077, 3.120, 3.159, 3.196, 3.230,
    3.261, 3.291, 3.319,
];

pub fn nemenyi_q(s: usize, alpha_level: f64) -> Result<f64> {
    let table = if (alpha_level - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha_level - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return argument(format!("Nemenyi table covers alpha 0.05 and 0.10, not {alpha_level}"));
    };
    if !(2..=20).contains(&s) {
        return argument(format!("Nemenyi table covers 2 to 20 models, not {s}"));
    }
    Ok(table[s - 2])
}

/// `q_α √(S(S+1) / (6R))`.
pub fn nemenyi_cd(s: usize, r: usize, alpha_level: f64) -> Result<f64> {
    if r == 0 {
        return argument("need at least one dataset");
    }
    let q = nemenyi_q(s, alpha_level)?;
    Ok(q * ((s * (s + 1)) as f64 / (6.0 * r as f64)).sqrt())
}

/// `m[a][b]` is true when model `a` ranks better than `b` by at least `cd`.
pub fn pairwise_verdicts(avg_ranks: &[f64], cd: f64) -> Result<Vec<Vec<bool>>> {
    if !(cd > 0.0) {
        return argument(format!("critical difference must be positive, got {cd}"));
    }
    Ok(avg_ranks
        .iter()
        .map(|&ra| avg_ranks.iter().map(|&rb| rb - ra >= cd).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanReport {
    pub avg_ranks: Vec<f64>,
    pub n_models: usize,
    pub n_datasets: usize,
    pub alpha_level: f64,
    pub chi2: f64,
    pub ff: f64,
    pub dof: (usize, usize),
    pub critical_f: f64,
    pub reject: bool,
    /// `R(S−1) − χ²_F ≤ 0`; `ff` is then infinite and the null is rejected.
    pub degenerate: bool,
    pub nemenyi_cd: Option<f64>,
    pub pairwise: Option<Vec<Vec<bool>>>,
}

pub fn friedman_chi2(ranks: &[f64], r: usize) -> f64 {
    let s = ranks.len() as f64;
    let r = r as f64;
    let sum_sq: f64 = ranks.iter().map(|x| x * x).sum();
    12.0 * r / (s * (s + 1.0)) * (sum_sq - s * (s + 1.0).powi(2) / 4.0)
}

pub fn friedman(ranks: &[f64], s: usize, r: usize, alpha_level: f64) -> Result<FriedmanReport> {
    if s < 2 || r < 2 {
        return argument(format!("Friedman test needs at least 2 models and 2 datasets, got {s} and {r}"));
    }
    if ranks.len() != s {
        return argument(format!("{} ranks for {s} models", ranks.len()));
    }
    let chi2 = friedman_chi2(ranks, r).max(0.0);
    let denom = (r * (s - 1)) as f64 - chi2;
    let degenerate = denom <= 0.0;
    let ff = if degenerate { f64::INFINITY } else { (r - 1) as f64 * chi2 / denom };
    let dof = (s - 1, (r - 1) * (s - 1));
    let critical_f = f_critical(alpha_level, dof.0 as f64, dof.1 as f64)?;
    let nemenyi = nemenyi_cd(s, r, alpha_level).ok();
    let pairwise = match nemenyi {
        Some(cd) => Some(pairwise_verdicts(ranks, cd)?),
        None => None,
    };
    Ok(FriedmanReport {
        avg_ranks: ranks.to_vec(),
        n_models: s,
        n_datasets: r,
        alpha_level,
        chi2,
        ff,
        dof,
        critical_f,
        reject: degenerate || ff > critical_f,
        degenerate,
        nemenyi_cd: nemenyi,
        pairwise,
    })
}

/// Everything `stats` prints: summary rows plus the test outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub schema_version: u32,
    pub models: Vec<String>,
    pub datasets: Vec<String>,
    pub average_accuracy: Vec<f64>,
    pub average_rank: Vec<f64>,
    pub average_std_dev: Option<Vec<f64>>,
    /// Absent with fewer than two datasets or models.
    pub friedman: Option<FriedmanReport>,
}

pub const STATS_SCHEMA_VERSION: u32 = 1;

pub fn compare(t: &AccuracyTable, alpha_level: f64) -> Result<StatsReport> {
    let average_rank = average_ranks(t)?;
    let (s, r) = (t.models.len(), t.datasets.len());
    let friedman = if s >= 2 && r >= 2 {
        Some(friedman(&average_rank, s, r, alpha_level)?)
    } else {
        None
    };
    Ok(StatsReport {
        schema_version: STATS_SCHEMA_VERSION,
        models: t.models.clone(),
        datasets: t.datasets.clone(),
        average_accuracy: t.average_accuracy()?,
        average_rank,
        average_std_dev: t.average_std_dev(),
        friedman,
    })
}

impl StatsReport {
    pub fn render_text(&self) -> String {
        let width = self.models.iter().map(|m| m.len()).max().unwrap_or(0).max(9) + 2;
        let mut out = String::new();
        let _ = write!(out, "{:<18}", "Metric");
        for m in &self.models {
            let _ = write!(out, "{m:>width$}");
        }
        out.push('\n');
        let mut row = |name: &str, vals: &[f64]| {
            let _ = write!(out, "{name:<18}");
            for v in vals {
                let _ = write!(out, "{:>width$}", format!("{v:.4}"));
            }
            out.push('\n');
        };
        row("Average Accuracy", &self.average_accuracy);
        row("Average Rank", &self.average_rank);
        if let Some(sd) = &self.average_std_dev {
            row("Average Std. Dev.", sd);
        }
        let _ = writeln!(out, "\nmodels S = {}, datasets R = {}", self.models.len(), self.datasets.len());
        match &self.friedman {
            None => out.push_str("Friedman test skipped: needs at least 2 models and 2 datasets\n"),
            Some(f) => {
                let _ = writeln!(out, "Friedman chi2_F = {:.4}", f.chi2);
                let _ = writeln!(
                    out,
                    "Iman-Davenport F_F = {:.4}{}, critical F({}, {}) at {} = {:.4}",
                    f.ff,
                    if f.degenerate { " (degenerate)" } else { "" },
                    f.dof.0,
                    f.dof.1,
                    f.alpha_level,
                    f.critical_f
                );
                let _ = writeln!(
                    out,
                    "null hypothesis {}",
                    if f.reject { "rejected" } else { "not rejected" }
                );
                match (f.nemenyi_cd, &f.pairwise) {
                    (Some(cd), Some(pw)) => {
                        let _ = writeln!(out, "Nemenyi C.D. = {cd:.4}");
                        for (a, row) in pw.iter().enumerate() {
                            let beaten: Vec<&str> = row
                                .iter()
                                .enumerate()
                                .filter(|(_, &b)| b)
                                .map(|(j, _)| self.models[j].as_str())
                                .collect();
                            if !beaten.is_empty() {
                                let _ = writeln!(out, "  {} significantly better than {}", self.models[a], beaten.join(", "));
                            }
                        }
                    }
                    _ => out.push_str("Nemenyi C.D. unavailable for this model count or level\n"),
                }
            }
        }
        out
    }
}
