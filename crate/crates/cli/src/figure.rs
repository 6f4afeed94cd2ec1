//! Figure-reproduction pipelines. Each returns its CSVs (and optional SVGs)
//! in memory; writing them out is the caller's business.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use finikey_core::bounds::binary_entropy;
use finikey_core::ldpc::{peg_construct, DEFAULT_MAX_ITER};
use finikey_core::sim::{sweep_q, FerEstimate, TrialConfig, DEFAULT_MAX_TRIALS, DEFAULT_STOP_ERRORS};
use finikey_core::{DegreeDistribution, ParityCheckMatrix, RateAdaptedCode};

use crate::commands::{
    append_eff_rows, bounds_table, fer_row, fit_table, read_points, BoundsFlags, GroupBy, EFF_HEADER, FER_HEADER,
};
use crate::manifest::RunManifest;
use crate::svg::{Chart, Series};
use crate::table::{num, Table};

pub const RATES: [f64; 3] = [0.6, 0.7, 0.8];
/// FER level whose crossing point orders the waterfalls.
pub const CROSS_LEVEL: f64 = 1e-2;
pub const CROSS_HEADER: &[&str] = &["n_var", "rate", "q_cross"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

impl std::str::FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            _ => Err(format!("scale must be desk or full, got {s:?}")),
        }
    }
}

impl std::fmt::Display for Scale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Desk => "desk",
            Self::Full => "full",
        })
    }
}

/// Simulation budget shared by every point of a pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub stop_errors: u64,
    pub max_trials: u64,
    pub max_iter: usize,
}

impl Budget {
    fn config(&self, q: f64, seed: u64) -> TrialConfig {
        TrialConfig {
            stop_errors: self.stop_errors,
            max_trials: self.max_trials,
            max_iter: self.max_iter,
            ..TrialConfig::new(q, seed)
        }
    }

    fn stamp(&self, m: RunManifest) -> RunManifest {
        m.param("stop_errors", self.stop_errors)
            .param("max_trials", self.max_trials)
            .param("max_iter", self.max_iter)
    }
}

/// Degree distribution paired with each design rate.
pub fn lambda_for_rate(rate: f64) -> DegreeDistribution {
    if rate >= 0.75 {
        DegreeDistribution::lambda3()
    } else if rate >= 0.65 {
        DegreeDistribution::lambda2()
    } else {
        DegreeDistribution::lambda1()
    }
}

/// Highest design rate leaving a 25% margin over the Slepian–Wolf limit;
/// the lowest rate when none does.
pub fn rate_for_q(q: f64) -> f64 {
    let ceiling = 1.0 - 1.25 * binary_entropy(q).unwrap_or(1.0);
    RATES.iter().rev().copied().find(|&r| r <= ceiling).unwrap_or(RATES[0])
}

/// Builds each (n, rate) code once per pipeline.
struct Codes {
    seed: u64,
    cache: BTreeMap<(usize, u64), Arc<ParityCheckMatrix>>,
}

impl Codes {
    fn new(seed: u64) -> Self {
        Self { seed, cache: BTreeMap::new() }
    }

    fn get(&mut self, n: usize, rate: f64) -> Result<Arc<ParityCheckMatrix>, String> {
        let key = (n, (rate * 1000.0).round() as u64);
        if let Some(h) = self.cache.get(&key) {
            return Ok(h.clone());
        }
        let h = peg_construct(n, rate, &lambda_for_rate(rate), self.seed)
            .map_err(|e| format!("n={n} rate={rate}: {e}"))?;
        let h = Arc::new(h);
        self.cache.insert(key, h.clone());
        Ok(h)
    }
}

/// Q at which the FER curve first reaches `level`, interpolating log FER
/// linearly in Q. Zero-error points count as half an error. `None` when the
/// first point is already at or above `level` or the curve never gets there.
pub fn crossing(points: &[(f64, FerEstimate)], level: f64) -> Option<f64> {
    let log_fer = |e: &FerEstimate| e.fer.max(0.5 / e.trials.max(1) as f64).ln();
    let i = points.iter().position(|(_, e)| e.fer >= level)?;
    if i == 0 {
        return None;
    }
    let (q0, e0) = &points[i - 1];
    let (q1, e1) = &points[i];
    let (y0, y1, y) = (log_fer(e0), log_fer(e1), level.ln());
    if y1 <= y0 {
        return Some(*q1);
    }
    Some(q0 + (q1 - q0) * (y - y0) / (y1 - y0))
}

/// One CSV produced by a pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureFile {
    pub name: String,
    pub table: Table,
    pub manifest: RunManifest,
}

impl FigureFile {
    pub fn csv(&self) -> String {
        self.table.to_csv(&self.manifest)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureOutput {
    pub files: Vec<FigureFile>,
    pub svgs: Vec<(String, String)>,
}

impl FigureOutput {
    pub fn flagged(&self) -> usize {
        self.files.iter().map(|f| f.table.flagged).sum()
    }

    pub fn notes(&self) -> impl Iterator<Item = &str> {
        self.files.iter().flat_map(|f| f.table.notes.iter().map(String::as_str))
    }

    pub fn file(&self, name: &str) -> Option<&FigureFile> {
        self.files.iter().find(|f| f.name == name)
    }

    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for f in &self.files {
            let path = dir.join(&f.name);
            fs::write(&path, f.csv())?;
            written.push(path);
        }
        for (name, text) in &self.svgs {
            let path = dir.join(name);
            fs::write(&path, text)?;
            written.push(path);
        }
        Ok(written)
    }

    fn push(&mut self, name: &str, table: Table, manifest: RunManifest) {
        self.files.push(FigureFile { name: name.to_string(), table, manifest });
    }
}

/// One stderr line per finished simulation unit; desk runs take minutes.
fn progress(figure: &str, what: &str, start: Instant) {
    eprintln!("{figure}: {what} done in {:.1}s", start.elapsed().as_secs_f64());
}

fn append(into: &mut Table, other: Table) {
    into.rows.extend(other.rows);
    into.flagged += other.flagged;
    into.notes.extend(other.notes);
}

fn fit_from(table: &Table, floor: f64, by: GroupBy) -> Table {
    // Round-trip through the CSV text so the fit sees exactly what was written.
    let text = table.to_csv(&RunManifest::new("internal", 0));
    let records = read_points(&text).expect("pipeline tables use the known schemas");
    fit_table(&records, floor, by)
}

fn column(table: &Table, name: &str) -> usize {
    table.header.iter().position(|h| *h == name).expect("known column")
}

/// (x, y) pairs from two numeric columns of the rows matching `keep`.
fn series_of(table: &Table, x: &str, y: &str, keep: impl Fn(&[String]) -> bool) -> Vec<(f64, f64)> {
    let (ix, iy) = (column(table, x), column(table, y));
    table
        .rows
        .iter()
        .filter(|r| keep(r))
        .filter_map(|r| Some((r[ix].parse().ok()?, r[iy].parse().ok()?)))
        .collect()
}

// ---------------------------------------------------------------------------

/// Efficiency against block length: bound curves plus calibrated LDPC points.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Plan {
    /// (Q, ε) per curve.
    pub curves: Vec<(f64, f64)>,
    pub bound_ns: Vec<u64>,
    /// Block lengths of the simulated points, each with its own budget.
    pub points: Vec<(usize, Budget)>,
    pub floor: f64,
}

impl Fig1Plan {
    pub fn for_scale(scale: Scale) -> Self {
        let curves = vec![(0.01, 1e-2), (0.025, 1e-2), (0.05, 1e-2), (0.05, 1e-1)];
        let bound_ns = log_grid(1e2, 1e6, 25);
        let budget = |stop_errors, max_trials| Budget { stop_errors, max_trials, max_iter: DEFAULT_MAX_ITER };
        let points = match scale {
            // A 10^4 decode near ε = 10⁻² costs ~40 ms on one core; 20 errors
            // keep each calibration to a few minutes.
            Scale::Desk => vec![(1_000, budget(DEFAULT_STOP_ERRORS, 100_000)), (10_000, budget(20, 100_000))],
            Scale::Full => vec![
                (1_000, budget(DEFAULT_STOP_ERRORS, DEFAULT_MAX_TRIALS)),
                (10_000, budget(DEFAULT_STOP_ERRORS, DEFAULT_MAX_TRIALS)),
                (100_000, budget(DEFAULT_STOP_ERRORS, 1_000_000)),
            ],
        };
        Self { curves, bound_ns, points, floor: finikey_core::fit::DEFAULT_FLOOR }
    }
}

fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<u64> {
    let (a, b) = (lo.log10(), hi.log10());
    let mut out: Vec<u64> = (0..k)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64).round() as u64)
        .collect();
    out.dedup();
    out
}

pub fn figure1(plan: &Fig1Plan, seed: u64) -> FigureOutput {
    let curves_desc: Vec<String> = plan.curves.iter().map(|(q, e)| format!("{q}/{e}")).collect();
    let base = |cmd: &str| {
        RunManifest::new(cmd, seed)
            .param("curves", curves_desc.join(","))
            .param("protocol", "code-rate=largest-R<=1-1.25h(Q)")
    };

    let mut bounds = Table::new(crate::commands::BOUNDS_HEADER);
    for &(q, eps) in &plan.curves {
        append(&mut bounds, bounds_table(&plan.bound_ns, &[eps], &[q], BoundsFlags::default()));
    }

    let mut codes = Codes::new(seed);
    let mut eff = Table::new(EFF_HEADER);
    for &(q, eps) in &plan.curves {
        for &(n, budget) in &plan.points {
            let rate = rate_for_q(q);
            match codes.get(n, rate) {
                Ok(h) => {
                    let start = Instant::now();
                    append_eff_rows(&mut eff, &h, q, &[eps], &budget.config(q, seed));
                    progress("figure1", &format!("n={n} q={q} eps={eps}"), start);
                }
                Err(e) => {
                    let mut row = vec![String::new(), num(q), num(eps)];
                    row.resize(EFF_HEADER.len(), String::new());
                    eff.push(row);
                    eff.flag(e);
                }
            }
        }
    }
    let fit = fit_from(&eff, plan.floor, GroupBy::QEps);

    let mut out = FigureOutput::default();
    let svg = fig1_chart(plan, &bounds, &eff).render();
    let budgets: Vec<String> = plan
        .points
        .iter()
        .map(|(n, b)| format!("{n}/{}/{}/{}", b.stop_errors, b.max_trials, b.max_iter))
        .collect();
    out.push("fig1_bounds.csv", bounds, base("figure1-bounds"));
    out.push(
        "fig1_points.csv",
        eff,
        base("figure1-points").param("n/stop_errors/max_trials/max_iter", budgets.join(",")),
    );
    out.push(
        "fig1_fit.csv",
        fit,
        base("figure1-fit").param("group_by", "q-eps").param("floor", plan.floor),
    );
    out.svgs.push(("fig1.svg".into(), svg));
    out
}

fn same(cell: &str, v: f64) -> bool {
    cell.parse::<f64>().map(|c| c == v).unwrap_or(false)
}

fn fig1_chart(plan: &Fig1Plan, bounds: &Table, eff: &Table) -> Chart {
    let mut series = Vec::new();
    for &(q, eps) in &plan.curves {
        let (iq, ie) = (column(bounds, "q"), column(bounds, "eps"));
        series.push(Series {
            label: format!("bound Q={q} e={eps}"),
            points: series_of(bounds, "n", "xi", |r| same(&r[iq], q) && same(&r[ie], eps)),
            markers: false,
        });
        let (iq, ie) = (column(eff, "q"), column(eff, "eps_target"));
        series.push(Series {
            label: format!("LDPC Q={q} e={eps}"),
            points: series_of(eff, "n_pay", "f", |r| same(&r[iq], q) && same(&r[ie], eps)),
            markers: true,
        });
    }
    Chart {
        title: "Efficiency vs block length".into(),
        x_label: "n".into(),
        y_label: "f".into(),
        log_x: true,
        log_y: false,
        series,
    }
}

// ---------------------------------------------------------------------------

/// FER against Q for unmodulated codes of each rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Plan {
    pub ns: Vec<usize>,
    pub rates: Vec<f64>,
    pub qs: Vec<f64>,
    pub budget: Budget,
    pub floor: f64,
}

impl Fig2Plan {
    pub fn for_scale(scale: Scale) -> Self {
        let qs = (1..=16).map(|i| i as f64 / 200.0).collect();
        match scale {
            Scale::Desk => Self {
                ns: vec![1_000],
                rates: RATES.to_vec(),
                qs,
                budget: Budget { stop_errors: DEFAULT_STOP_ERRORS, max_trials: 10_000, max_iter: DEFAULT_MAX_ITER },
                floor: finikey_core::fit::DEFAULT_FLOOR,
            },
            Scale::Full => Self {
                ns: vec![1_000, 10_000],
                rates: RATES.to_vec(),
                qs,
                budget: Budget { stop_errors: DEFAULT_STOP_ERRORS, max_trials: DEFAULT_MAX_TRIALS, max_iter: DEFAULT_MAX_ITER },
                floor: finikey_core::fit::DEFAULT_FLOOR,
            },
        }
    }
}

pub fn figure2(plan: &Fig2Plan, seed: u64) -> FigureOutput {
    let qs: Vec<String> = plan.qs.iter().map(|q| num(*q)).collect();
    let base = |cmd: &str| RunManifest::new(cmd, seed).param("q", qs.join(","));

    let mut codes = Codes::new(seed);
    let mut fer = Table::new(FER_HEADER);
    let mut cross = Table::new(CROSS_HEADER);
    let mut chart = Chart {
        title: "Block error rate vs Q".into(),
        x_label: "Q".into(),
        y_label: "FER".into(),
        log_x: false,
        log_y: true,
        series: Vec::new(),
    };
    for &n in &plan.ns {
        for &rate in &plan.rates {
            let h = match codes.get(n, rate) {
                Ok(h) => h,
                Err(e) => {
                    cross.push(vec![n.to_string(), num(rate), String::new()]);
                    cross.flag(e);
                    continue;
                }
            };
            let code = RateAdaptedCode::unmodulated(h);
            let start = Instant::now();
            let mut curve = Vec::new();
            for (q, res) in sweep_q(&code, &plan.qs, &plan.budget.config(plan.qs[0], seed)) {
                match res {
                    Ok(est) => {
                        fer.push(fer_row(&code, q, Some(&est)));
                        curve.push((q, est));
                    }
                    Err(e) => {
                        fer.push(fer_row(&code, q, None));
                        fer.flag(format!("n_var={n} rate={rate} q={q}: {e}"));
                    }
                }
            }
            progress("figure2", &format!("n={n} rate={rate}"), start);
            let q_cross = crossing(&curve, CROSS_LEVEL);
            cross.push(vec![n.to_string(), num(rate), q_cross.map(num).unwrap_or_default()]);
            if q_cross.is_none() {
                cross.flag(format!("n_var={n} rate={rate}: FER never crosses {CROSS_LEVEL} inside the Q grid"));
            }
            chart.series.push(Series {
                label: format!("n={n} R={rate}"),
                points: curve.iter().map(|(q, e)| (*q, e.fer)).collect(),
                markers: true,
            });
        }
    }
    let fit = fit_from(&fer, plan.floor, GroupBy::Leak);

    let mut out = FigureOutput::default();
    let ns: Vec<String> = plan.ns.iter().map(|n| n.to_string()).collect();
    let rates: Vec<String> = plan.rates.iter().map(|r| num(*r)).collect();
    let stamp = |m: RunManifest| plan.budget.stamp(m.param("n_var", ns.join(",")).param("rate", rates.join(",")));
    out.push("fig2_fer.csv", fer, stamp(base("figure2-fer")));
    out.push("fig2_cross.csv", cross, stamp(base("figure2-cross")).param("level", CROSS_LEVEL));
    out.push(
        "fig2_fit.csv",
        fit,
        base("figure2-fit").param("group_by", "leak").param("floor", plan.floor),
    );
    out.svgs.push(("fig2.svg".into(), chart.render()));
    out
}

// ---------------------------------------------------------------------------

/// One code/Q pairing calibrated across ε targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Case {
    pub n: usize,
    pub rate: f64,
    pub q: f64,
}

/// Efficiency against target FER.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Plan {
    pub cases: Vec<Fig3Case>,
    pub eps_targets: Vec<f64>,
    pub bound_eps: Vec<f64>,
    pub budget: Budget,
    pub floor: f64,
}

impl Fig3Plan {
    pub fn for_scale(scale: Scale) -> Self {
        let mut cases = vec![
            Fig3Case { n: 1_000, rate: 0.8, q: 0.015 },
            Fig3Case { n: 1_000, rate: 0.7, q: 0.03 },
        ];
        if scale == Scale::Full {
            cases.push(Fig3Case { n: 10_000, rate: 0.7, q: 0.025 });
            cases.push(Fig3Case { n: 10_000, rate: 0.6, q: 0.04 });
        }
        let bound_eps = (0..=12).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)).collect();
        Self {
            cases,
            eps_targets: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            bound_eps,
            budget: Budget { stop_errors: DEFAULT_STOP_ERRORS, max_trials: 1_000_000, max_iter: DEFAULT_MAX_ITER },
            floor: finikey_core::fit::DEFAULT_FLOOR,
        }
    }
}

pub fn figure3(plan: &Fig3Plan, seed: u64) -> FigureOutput {
    let cases: Vec<String> = plan.cases.iter().map(|c| format!("{}/{}/{}", c.n, c.rate, c.q)).collect();
    let targets: Vec<String> = plan.eps_targets.iter().map(|e| num(*e)).collect();
    let base = |cmd: &str| RunManifest::new(cmd, seed).param("cases", cases.join(","));

    let mut bounds = Table::new(crate::commands::BOUNDS_HEADER);
    let mut codes = Codes::new(seed);
    let mut eff = Table::new(EFF_HEADER);
    for c in &plan.cases {
        append(&mut bounds, bounds_table(&[c.n as u64], &plan.bound_eps, &[c.q], BoundsFlags::default()));
        match codes.get(c.n, c.rate) {
            Ok(h) => {
                let start = Instant::now();
                append_eff_rows(&mut eff, &h, c.q, &plan.eps_targets, &plan.budget.config(c.q, seed));
                progress("figure3", &format!("n={} rate={} q={}", c.n, c.rate, c.q), start);
            }
            Err(e) => eff.flag(e),
        }
    }
    let fit = fit_from(&eff, plan.floor, GroupBy::Q);

    let mut chart = Chart {
        title: "Efficiency vs block error rate".into(),
        x_label: "FER".into(),
        y_label: "f".into(),
        log_x: true,
        log_y: false,
        series: Vec::new(),
    };
    for c in &plan.cases {
        let (bn, bq) = (column(&bounds, "n"), column(&bounds, "q"));
        chart.series.push(Series {
            label: format!("bound n={} Q={}", c.n, c.q),
            points: series_of(&bounds, "eps", "xi", |r| same(&r[bn], c.n as f64) && same(&r[bq], c.q)),
            markers: false,
        });
        let eq = column(&eff, "q");
        chart.series.push(Series {
            label: format!("LDPC n={} Q={}", c.n, c.q),
            points: series_of(&eff, "fer", "f", |r| same(&r[eq], c.q)),
            markers: true,
        });
    }

    let mut out = FigureOutput::default();
    out.push("fig3_bounds.csv", bounds, base("figure3-bounds"));
    out.push(
        "fig3_points.csv",
        eff,
        plan.budget.stamp(base("figure3-points").param("eps_targets", targets.join(","))),
    );
    out.push(
        "fig3_fit.csv",
        fit,
        base("figure3-fit").param("group_by", "q").param("floor", plan.floor),
    );
    out.svgs.push(("fig3.svg".into(), chart.render()));
    out
}
