//! Environment-attenuation calibration.
//!
//! A bright source is measured through stacks of neutral-density filters.
//! In base-10 log space each measurement is the source level minus the sum
//! of the optical densities present, so the whole set forms a linear system
//! whose least-squares solution recovers the source level and every filter
//! OD at once. The chamber attenuation and the resulting darkness estimate
//! follow by division with first-order error propagation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use crate::math::positive;

#[derive(Debug, Error)]
pub enum EaError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("system is rank deficient; unresolvable columns: {0:?}")]
    RankDeficient(Vec<String>),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("CSV error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// A value with a one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertain {
    pub value: f64,
    pub sd: f64,
}

impl Uncertain {
    pub fn new(value: f64, sd: f64) -> Self {
        Uncertain { value, sd }
    }
}

/// One filter-stack measurement in log10 counts per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackMeasurement {
    pub led_on: bool,
    pub filters: Vec<bool>,
    pub log10_rate: f64,
    pub log10_sd: f64,
}

/// The full set of stack measurements plus the saturation cutoff in linear
/// counts per second; rows whose linear-scale mean exceeds the cutoff are
/// excluded before solving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationSystem {
    pub rows: Vec<StackMeasurement>,
    pub saturation_cutoff: f64,
}

pub const DEFAULT_SATURATION_CUTOFF: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Plain least squares; the stated measurement spreads are ignored.
    Unweighted,
    /// Inverse-variance weighting, exposed for sensitivity checks.
    InverseVariance,
}

/// Least-squares solution of the log-domain system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsSolution {
    pub log10_source: f64,
    /// Leave-one-filter-out spread of the source estimate.
    pub log10_source_err: f64,
    pub od: Vec<f64>,
    pub od_err: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    pub rows_used: usize,
    pub rows_dropped_saturated: usize,
}

impl AttenuationSystem {
    pub fn new(rows: Vec<StackMeasurement>) -> Self {
        AttenuationSystem {
            rows,
            saturation_cutoff: DEFAULT_SATURATION_CUTOFF,
        }
    }

    fn n_filters(&self) -> Result<usize, EaError> {
        let n_f = self
            .rows
            .first()
            .map(|r| r.filters.len())
            .ok_or_else(|| EaError::InvalidSystem("no rows".into()))?;
        if self.rows.iter().any(|r| r.filters.len() != n_f) {
            return Err(EaError::InvalidSystem(
                "rows disagree on the number of filters".into(),
            ));
        }
        Ok(n_f)
    }

    /// Read the CSV form `led,f1..fn,log10_rate,log10_sd` with 0/1 flags.
    pub fn read_csv_str(text: &str) -> Result<AttenuationSystem, EaError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(EaError::Csv {
            line: 1,
            msg: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 3
            || cols[0] != "led"
            || cols[cols.len() - 2] != "log10_rate"
            || cols[cols.len() - 1] != "log10_sd"
        {
            return Err(EaError::Csv {
                line: 1,
                msg: format!("expected header `led,f1..fn,log10_rate,log10_sd`, found `{header}`"),
            });
        }
        let n_f = cols.len() - 3;
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n_f + 3 {
                return Err(EaError::Csv {
                    line: lineno,
                    msg: format!("expected {} fields, found {}", n_f + 3, fields.len()),
                });
            }
            let flag = |s: &str, what: &str| -> Result<bool, EaError> {
                match s.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(EaError::Csv {
                        line: lineno,
                        msg: format!("invalid {what} flag `{other}` (expected 0 or 1)"),
                    }),
                }
            };
            let led_on = flag(fields[0], "led")?;
            let mut filters = Vec::with_capacity(n_f);
            for (j, s) in fields[1..1 + n_f].iter().enumerate() {
                filters.push(flag(s, &format!("f{}", j + 1))?);
            }
            let parse = |s: &str, what: &str| -> Result<f64, EaError> {
                s.trim().parse().map_err(|_| EaError::Csv {
                    line: lineno,
                    msg: format!("invalid {what} `{s}`"),
                })
            };
            let log10_rate = parse(fields[n_f + 1], "log10_rate")?;
            let log10_sd = parse(fields[n_f + 2], "log10_sd")?;
            if !led_on && filters.iter().all(|&f| !f) {
                return Err(EaError::Csv {
                    line: lineno,
                    msg: "row has neither LED nor any filter set".into(),
                });
            }
            rows.push(StackMeasurement {
                led_on,
                filters,
                log10_rate,
                log10_sd,
            });
        }
        if rows.is_empty() {
            return Err(EaError::InvalidSystem("no data rows".into()));
        }
        Ok(AttenuationSystem::new(rows))
    }

    pub fn read_csv_file<P: AsRef<Path>>(path: P) -> Result<AttenuationSystem, EaError> {
        let text = fs::read_to_string(path)?;
        Self::read_csv_str(&text)
    }
}

/// Solve the calibration system with plain least squares.
pub fn solve_ls(system: &AttenuationSystem) -> Result<LsSolution, EaError> {
    solve_ls_weighted(system, WeightMode::Unweighted)
}

/// Solve with an explicit weighting mode.
pub fn solve_ls_weighted(
    system: &AttenuationSystem,
    mode: WeightMode,
) -> Result<LsSolution, EaError> {
    let n_f = system.n_filters()?;
    let kept: Vec<&StackMeasurement> = system
        .rows
        .iter()
        .filter(|r| 10f64.powf(r.log10_rate) <= system.saturation_cutoff)
        .collect();
    let dropped = system.rows.len() - kept.len();
    if kept.is_empty() {
        return Err(EaError::InvalidSystem(
            "all rows exceed the saturation cutoff".into(),
        ));
    }

    let x = fit(&kept, n_f, mode)?;

    // Component errors come from refits each leaving one filter (its column
    // and its rows) out; the spread across those refits is the reported
    // uncertainty. With fewer than two covering refits the spread is zero.
    let mut source_estimates = Vec::new();
    let mut od_estimates: Vec<Vec<f64>> = vec![Vec::new(); n_f];
    for leave_out in 0..n_f {
        let sub_rows: Vec<&StackMeasurement> = kept
            .iter()
            .copied()
            .filter(|r| !r.filters[leave_out])
            .collect();
        if sub_rows.is_empty() {
            continue;
        }
        let reduced: Vec<StackMeasurement> = sub_rows
            .iter()
            .map(|r| {
                let mut filters = r.filters.clone();
                filters.remove(leave_out);
                StackMeasurement {
                    led_on: r.led_on,
                    filters,
                    log10_rate: r.log10_rate,
                    log10_sd: r.log10_sd,
                }
            })
            .collect();
        let refs: Vec<&StackMeasurement> = reduced.iter().collect();
        let Ok(sub_x) = fit(&refs, n_f - 1, mode) else {
            continue;
        };
        source_estimates.push(sub_x[0]);
        let mut sub_j = 1;
        for (j, bucket) in od_estimates.iter_mut().enumerate() {
            if j == leave_out {
                continue;
            }
            bucket.push(sub_x[sub_j]);
            sub_j += 1;
        }
    }
    let spread = |vals: &[f64]| -> f64 {
        if vals.len() < 2 {
            return 0.0;
        }
        let (_, var) = crate::math::sample_mean_var(vals);
        var.sqrt()
    };

    let residuals: Vec<f64> = kept
        .iter()
        .map(|r| {
            let mut pred = if r.led_on { x[0] } else { 0.0 };
            for (j, &present) in r.filters.iter().enumerate() {
                if present {
                    pred -= x[1 + j];
                }
            }
            r.log10_rate - pred
        })
        .collect();
    let residual_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();

    Ok(LsSolution {
        log10_source: x[0],
        log10_source_err: spread(&source_estimates),
        od: x[1..].to_vec(),
        od_err: (0..n_f).map(|j| spread(&od_estimates[j])).collect(),
        residuals,
        residual_norm,
        rows_used: kept.len(),
        rows_dropped_saturated: dropped,
    })
}

/// Normal-equations fit of the (optionally weighted) log-domain system.
fn fit(rows: &[&StackMeasurement], n_f: usize, mode: WeightMode) -> Result<Vec<f64>, EaError> {
    let k = 1 + n_f;
    let design_row = |r: &StackMeasurement| -> Vec<f64> {
        let mut a = vec![0.0; k];
        a[0] = if r.led_on { 1.0 } else { 0.0 };
        for (j, &present) in r.filters.iter().enumerate() {
            if present {
                a[1 + j] = -1.0;
            }
        }
        a
    };
    let weight = |r: &StackMeasurement| -> Result<f64, EaError> {
        match mode {
            WeightMode::Unweighted => Ok(1.0),
            WeightMode::InverseVariance => {
                if !positive(r.log10_sd) {
                    Err(EaError::Domain(format!(
                        "inverse-variance weighting needs positive log10_sd, got {}",
                        r.log10_sd
                    )))
                } else {
                    Ok(1.0 / (r.log10_sd * r.log10_sd))
                }
            }
        }
    };

    let mut m = vec![vec![0.0f64; k]; k];
    let mut v = vec![0.0f64; k];
    for r in rows {
        let a = design_row(r);
        let w = weight(r)?;
        for i in 0..k {
            if a[i] == 0.0 {
                continue;
            }
            v[i] += w * a[i] * r.log10_rate;
            for j in 0..k {
                m[i][j] += w * a[i] * a[j];
            }
        }
    }

    solve_symmetric(&mut m, &mut v).map_err(|_| rank_report(rows, n_f))
}

/// Gaussian elimination with partial pivoting on the normal equations.
fn solve_symmetric(m: &mut [Vec<f64>], v: &mut [f64]) -> Result<Vec<f64>, ()> {
    let k = v.len();
    let scale: f64 = m
        .iter()
        .flat_map(|row| row.iter().map(|x| x.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    for col in 0..k {
        let (pivot_row, pivot) = (col..k)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pivot < 1e-12 * scale {
            return Err(());
        }
        m.swap(col, pivot_row);
        v.swap(col, pivot_row);
        let (upper, lower) = m.split_at_mut(col + 1);
        let pivot_vec = &upper[col];
        for (r, row) in lower.iter_mut().enumerate() {
            let factor = row[col] / pivot_vec[col];
            if factor == 0.0 {
                continue;
            }
            for (x, p) in row[col..].iter_mut().zip(&pivot_vec[col..]) {
                *x -= factor * p;
            }
            v[col + 1 + r] -= factor * v[col];
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut s = v[col];
        for c in col + 1..k {
            s -= m[col][c] * x[c];
        }
        x[col] = s / m[col][col];
    }
    Ok(x)
}

/// Identify which columns cannot be resolved, for the rank-deficiency error.
fn rank_report(rows: &[&StackMeasurement], n_f: usize) -> EaError {
    let k = 1 + n_f;
    let names: Vec<String> = std::iter::once("led".to_string())
        .chain((1..=n_f).map(|j| format!("f{j}")))
        .collect();
    // Modified Gram-Schmidt over the design columns; a column whose residual
    // collapses is dependent on (or missing from) the ones before it.
    let mut cols: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            rows.iter()
                .map(|r| {
                    if j == 0 {
                        if r.led_on {
                            1.0
                        } else {
                            0.0
                        }
                    } else if r.filters[j - 1] {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut bad = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (j, col) in cols.iter_mut().enumerate() {
        let orig_norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        for b in &basis {
            let dot: f64 = col.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in col.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-9 * orig_norm.max(1.0) {
            bad.push(names[j].clone());
        } else {
            for x in col.iter_mut() {
                *x /= norm;
            }
            basis.push(col.clone());
        }
    }
    EaError::RankDeficient(bad)
}

/// Chamber attenuation: linear source level over the closed-chamber rate,
/// with first-order propagation of both uncertainties.
pub fn attenuation(log10_source: Uncertain, closed_rate: Uncertain) -> Result<Uncertain, EaError> {
    if !positive(closed_rate.value) {
        return Err(EaError::Domain(format!(
            "closed-chamber rate must be positive, got {}",
            closed_rate.value
        )));
    }
    let source = 10f64.powf(log10_source.value);
    let a = source / closed_rate.value;
    let ln10 = std::f64::consts::LN_10;
    let rel_sq = (ln10 * log10_source.sd).powi(2)
        + (closed_rate.sd / closed_rate.value).powi(2);
    Ok(Uncertain::new(a, a * rel_sq.sqrt()))
}

/// Darkness estimate: ambient rate divided by the chamber attenuation.
pub fn ea_estimate(lab_rate: Uncertain, a_c: Uncertain) -> Result<Uncertain, EaError> {
    if !positive(a_c.value) {
        return Err(EaError::Domain(format!(
            "attenuation must be positive, got {}",
            a_c.value
        )));
    }
    let value = lab_rate.value / a_c.value;
    let sd = if lab_rate.value == 0.0 {
        lab_rate.sd / a_c.value
    } else {
        value.abs()
            * ((lab_rate.sd / lab_rate.value).powi(2) + (a_c.sd / a_c.value).powi(2)).sqrt()
    };
    Ok(Uncertain::new(value, sd))
}
