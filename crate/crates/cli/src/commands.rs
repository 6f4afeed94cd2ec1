//! The work behind each subcommand, kept free of argument parsing and I/O
//! so tests can drive it directly.

use std::collections::HashMap;
use std::fs;
use std::sync::Arc;

use finikey_core::bounds::{
    achievability_expansion, converse_expansion, efficiency, exact_converse, exact_converse_optimized, BoundQuery,
    DEFAULT_DELTA_GRID,
};
use finikey_core::fit::{apply_floor, fit_leak, FitPoint};
use finikey_core::ldpc::node_degrees;
use finikey_core::sim::{sweep_eps, sweep_q, EfficiencyPoint, FerEstimate, TrialConfig};
use finikey_core::{DegreeDistribution, ParityCheckMatrix, RateAdaptedCode};

use crate::table::{num, Table};

pub const BOUNDS_HEADER: &[&str] = &["n", "eps", "q", "xi", "conv", "ach", "exact", "exact_opt"];
pub const FER_HEADER: &[&str] = &["n_var", "n_pay", "rate", "q", "trials", "errors", "fer", "ci_lo", "ci_hi", "leak_bits"];
pub const EFF_HEADER: &[&str] = &["n_pay", "q", "eps_target", "fer", "ci_lo", "ci_hi", "leak_bits", "f"];
pub const FIT_HEADER: &[&str] = &["group", "xi1", "xi2", "rss", "max_resid", "n_points"];

/// Columns of the bounds table to compute; the rest stay empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundsFlags {
    pub exact: bool,
    pub expansion: bool,
    pub optimized: bool,
    /// Include the explicit Berry–Esseen constant in `conv`.
    pub constant: bool,
}

impl Default for BoundsFlags {
    fn default() -> Self {
        Self {
            exact: true,
            expansion: true,
            optimized: true,
            constant: false,
        }
    }
}

pub fn bounds_table(ns: &[u64], eps_list: &[f64], q_list: &[f64], flags: BoundsFlags) -> Table {
    let mut t = Table::new(BOUNDS_HEADER);
    for &q in q_list {
        for &eps in eps_list {
            for &n in ns {
                let mut row = vec![n.to_string(), num(eps), num(q)];
                let query = match BoundQuery::new(n, eps, q) {
                    Ok(query) => query,
                    Err(e) => {
                        row.resize(BOUNDS_HEADER.len(), String::new());
                        t.push(row);
                        t.flag(format!("n={n} eps={eps} q={q}: {e}"));
                        continue;
                    }
                };
                let mut failed = Vec::new();
                row.push(num(efficiency(&query)));
                if flags.expansion {
                    match converse_expansion(&query, flags.constant) {
                        Ok(r) => row.push(num(r.total)),
                        Err(e) => {
                            row.push(String::new());
                            failed.push(format!("conv: {e}"));
                        }
                    }
                    row.push(num(achievability_expansion(&query).total));
                } else {
                    row.extend([String::new(), String::new()]);
                }
                if flags.exact {
                    match exact_converse(&query) {
                        Ok(v) => row.push(num(v)),
                        Err(e) => {
                            row.push(String::new());
                            failed.push(format!("exact: {e}"));
                        }
                    }
                } else {
                    row.push(String::new());
                }
                if flags.optimized {
                    row.push(num(exact_converse_optimized(&query, DEFAULT_DELTA_GRID).value));
                } else {
                    row.push(String::new());
                }
                t.push(row);
                if !failed.is_empty() {
                    t.flag(format!("n={n} eps={eps} q={q}: {}", failed.join("; ")));
                }
            }
        }
    }
    t
}

/// A built-in name (`lambda1`…`lambda3`) or a file holding a polynomial.
pub fn lambda_from_arg(arg: &str) -> Result<DegreeDistribution, String> {
    if let Some(l) = DegreeDistribution::by_name(arg) {
        return Ok(l);
    }
    let text = fs::read_to_string(arg).map_err(|e| format!("{arg}: not a built-in polynomial and unreadable ({e})"))?;
    DegreeDistribution::parse_polynomial(&text).map_err(|e| format!("{arg}: {e}"))
}

/// `degree count target` per variable-degree class, then check degrees.
pub fn histogram_summary(h: &ParityCheckMatrix, lambda: &DegreeDistribution) -> String {
    let mut count: HashMap<usize, usize> = HashMap::new();
    for d in h.variable_degrees() {
        *count.entry(d).or_default() += 1;
    }
    let mut out = format!(
        "n_var={} n_chk={} edges={} design_rate={}\nvariable degree  count  target\n",
        h.n_var(),
        h.n_chk(),
        h.edge_count(),
        num(h.design_rate())
    );
    let target = node_degrees(lambda, h.n_var(), h.n_chk()).ok();
    for (d, frac) in lambda.node_fractions() {
        let want = target
            .as_ref()
            .map(|t| t.var_degrees.iter().filter(|&&x| x == d).count().to_string())
            .unwrap_or_else(|| format!("{:.1}", frac * h.n_var() as f64));
        out.push_str(&format!("{d:>15}  {:>5}  {want:>6}\n", count.get(&d).copied().unwrap_or(0)));
    }
    let cd = h.check_degrees();
    let (lo, hi) = (cd.iter().min().copied().unwrap_or(0), cd.iter().max().copied().unwrap_or(0));
    out.push_str(&format!("check degrees in [{lo}, {hi}]\n"));
    out
}

fn effective_rate(code: &RateAdaptedCode) -> f64 {
    1.0 - code.leak_bits() as f64 / code.n_payload() as f64
}

pub fn fer_row(code: &RateAdaptedCode, q: f64, est: Option<&FerEstimate>) -> Vec<String> {
    let mut row = vec![
        code.base().n_var().to_string(),
        code.n_payload().to_string(),
        num(effective_rate(code)),
        num(q),
    ];
    match est {
        Some(e) => row.extend([
            e.trials.to_string(),
            e.errors.to_string(),
            num(e.fer),
            num(e.ci_low),
            num(e.ci_high),
        ]),
        None => row.extend(std::iter::repeat_n(String::new(), 5)),
    }
    row.push(code.leak_bits().to_string());
    row
}

pub fn fer_table(code: &RateAdaptedCode, q_list: &[f64], cfg: &TrialConfig) -> Table {
    let mut t = Table::new(FER_HEADER);
    append_fer_rows(&mut t, code, q_list, cfg);
    t
}

pub fn append_fer_rows(t: &mut Table, code: &RateAdaptedCode, q_list: &[f64], cfg: &TrialConfig) {
    for (q, res) in sweep_q(code, q_list, cfg) {
        match res {
            Ok(est) => t.push(fer_row(code, q, Some(&est))),
            Err(e) => {
                t.push(fer_row(code, q, None));
                t.flag(format!("n_var={} q={q}: {e}", code.base().n_var()));
            }
        }
    }
}

/// The converse evaluated at the upper confidence limit of the point's FER;
/// `None` where the bound is undefined (ε + δ ≥ 1).
pub fn converse_at_ci_high(p: &EfficiencyPoint) -> Option<f64> {
    let query = BoundQuery::new(p.n_pay as u64, p.estimate.ci_high, p.q).ok()?;
    exact_converse(&query).ok()
}

pub fn eff_row(p: &EfficiencyPoint) -> Vec<String> {
    vec![
        p.n_pay.to_string(),
        num(p.q),
        num(p.eps_target),
        num(p.eps),
        num(p.estimate.ci_low),
        num(p.estimate.ci_high),
        p.leak_bits.to_string(),
        num(p.f),
    ]
}

pub fn append_eff_rows(
    t: &mut Table,
    base: &Arc<ParityCheckMatrix>,
    q: f64,
    eps_targets: &[f64],
    cfg: &TrialConfig,
) -> Vec<EfficiencyPoint> {
    let mut points = Vec::new();
    for (&target, res) in eps_targets.iter().zip(sweep_eps(base, q, eps_targets, cfg)) {
        match res {
            Ok(p) => {
                t.push(eff_row(&p));
                if let Some(bound) = converse_at_ci_high(&p) {
                    if (p.leak_bits as f64) < bound - 1e-6 {
                        t.flag(format!(
                            "n_pay={} q={q} eps_target={target}: leak {} beats the converse {bound}",
                            p.n_pay, p.leak_bits
                        ));
                    }
                }
                points.push(p);
            }
            Err(e) => {
                let mut row = vec![String::new(), num(q), num(target)];
                row.resize(EFF_HEADER.len(), String::new());
                t.push(row);
                t.flag(format!("n_var={} q={q} eps_target={target}: {e}", base.n_var()));
            }
        }
    }
    points
}

pub fn eff_table(base: &Arc<ParityCheckMatrix>, q_list: &[f64], eps_targets: &[f64], cfg: &TrialConfig) -> Table {
    let mut t = Table::new(EFF_HEADER);
    for &q in q_list {
        append_eff_rows(&mut t, base, q, eps_targets, cfg);
    }
    t
}

/// One simulated operating point read back from a fer or eff CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRecord {
    pub n_pay: f64,
    pub q: f64,
    pub eps_target: Option<f64>,
    pub fer: f64,
    pub leak_bits: f64,
}

/// Parses fer.csv or eff.csv text (manifest comments allowed). Rows with
/// empty cells, i.e. flagged failures, are skipped.
pub fn read_points(text: &str) -> Result<Vec<PointRecord>, String> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let is_eff = header == EFF_HEADER;
    if !is_eff && header != FER_HEADER {
        return Err(format!("unrecognised header {header:?}"));
    }
    let col = |name: &str| header.iter().position(|h| h == name).expect("known schema");
    let (i_n, i_q, i_fer, i_leak) = (col("n_pay"), col("q"), col("fer"), col("leak_bits"));
    let i_target = is_eff.then(|| col("eps_target"));
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.iter().any(|c| c.is_empty()) {
            continue;
        }
        let get = |i: usize| -> Result<f64, String> {
            rec[i].parse().map_err(|_| format!("row {}: bad number {:?}", line + 1, &rec[i]))
        };
        out.push(PointRecord {
            n_pay: get(i_n)?,
            q: get(i_q)?,
            eps_target: i_target.map(get).transpose()?,
            fer: get(i_fer)?,
            leak_bits: get(i_leak)?,
        });
    }
    Ok(out)
}

/// Grouping keys of the fit table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    /// Fixed Q: one code calibrated across ε.
    Q,
    /// Fixed (Q, ε target): one curve across block lengths.
    QEps,
    /// Fixed leak: one code swept across Q.
    Leak,
}

impl std::str::FromStr for GroupBy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "q" => Ok(Self::Q),
            "q-eps" => Ok(Self::QEps),
            "leak" => Ok(Self::Leak),
            _ => Err(format!("group must be q, q-eps or leak, got {s:?}")),
        }
    }
}

fn group_key(r: &PointRecord, by: GroupBy) -> String {
    match by {
        GroupBy::Q => format!("q={}", num(r.q)),
        GroupBy::QEps => format!("q={};eps={}", num(r.q), r.eps_target.map(num).unwrap_or_default()),
        GroupBy::Leak => format!("leak={}", r.leak_bits),
    }
}

/// Fits each group, in order of first appearance. Points outside the open
/// interval (0, 1) in FER or below `floor` are dropped first.
pub fn fit_table(records: &[PointRecord], floor: f64, by: GroupBy) -> Table {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<FitPoint>> = HashMap::new();
    for r in records {
        let key = group_key(r, by);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        let entry = groups.entry(key).or_default();
        if let Ok(p) = FitPoint::new(r.n_pay, r.q, r.fer, r.leak_bits) {
            entry.push(p);
        }
    }
    let mut t = Table::new(FIT_HEADER);
    for key in order {
        let pts = apply_floor(&groups[&key], floor);
        match fit_leak(&pts) {
            Ok(f) => t.push(vec![
                key,
                num(f.xi1),
                num(f.xi2),
                num(f.rss),
                num(f.max_abs_residual),
                f.n_points.to_string(),
            ]),
            Err(e) => {
                let mut row = vec![key.clone()];
                row.resize(FIT_HEADER.len() - 1, String::new());
                row.push(pts.len().to_string());
                t.push(row);
                t.flag(format!("group {key}: {e}"));
            }
        }
    }
    t
}
