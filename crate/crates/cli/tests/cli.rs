//! End-to-end checks of the subcommands, through the library and the binary.

use std::process::Command;

use finikey_cli::commands::{bounds_table, fit_table, read_points, BoundsFlags, GroupBy, BOUNDS_HEADER, EFF_HEADER};
use finikey_cli::figure::{figure1, figure3, Budget, Fig1Plan, Fig3Case, Fig3Plan};
use finikey_cli::range::{parse_counts, parse_reals};
use finikey_core::bounds::{exact_converse, BoundQuery};
use finikey_core::fit::features;
use finikey_core::ParityCheckMatrix;

fn finikey(args: &[&str], threads: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_finikey"));
    cmd.args(args).env("SOURCE_DATE_EPOCH", "1700000000");
    if let Some(t) = threads {
        cmd.env("FINIKEY_THREADS", t);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn col(csv: &str, name: &str) -> Vec<String> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv.as_bytes());
    let i = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[i].to_string()).collect()
}

#[test]
fn bounds_grid_has_25_decreasing_rows() {
    let (code, out, _) = finikey(&["bounds", "--n", "1e2:1e6:log25", "--eps", "1e-2", "--q", "0.025"], None);
    assert_eq!(code, 0);
    assert!(out.starts_with("# manifest: command=bounds"));
    assert_eq!(out.lines().nth(1).unwrap(), BOUNDS_HEADER.join(","));
    let xi: Vec<f64> = col(&out, "xi").iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!(xi.len(), 25);
    assert!(xi.windows(2).all(|w| w[1] < w[0]), "{xi:?}");
}

#[test]
fn bounds_special_rows() {
    let t = bounds_table(&parse_counts("1e2:1e6:log9").unwrap(), &[0.5], &[0.025], BoundsFlags::default());
    assert!(t.rows.iter().all(|r| r[3] == "1.0"));
    let t = bounds_table(&[10_000], &[1e-2], &[0.025], BoundsFlags::default());
    assert!(t.rows[0][3].parse::<f64>().unwrap() > 1.1);
}

#[test]
fn bad_parameters_exit_nonzero() {
    let (code, _, err) = finikey(&["bounds", "--n", "1e3", "--eps", "1.5", "--q", "0.1"], None);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = finikey(&["bounds", "--n", "x", "--eps", "0.1", "--q", "0.1"], None);
    assert_eq!(code, 2);
    let (code, _, _) = finikey(&["figure", "4"], None);
    assert_ne!(code, 0);
}

#[test]
fn build_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.alist"), dir.path().join("b.alist"));
    for p in [&a, &b] {
        let (code, out, _) = finikey(
            &["build", "--n", "500", "--rate", "0.6", "--lambda", "lambda1", "--seed", "4", "--out", p.to_str().unwrap()],
            None,
        );
        assert_eq!(code, 0);
        assert!(out.contains("variable degree"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let h = ParityCheckMatrix::from_alist(&text).unwrap();
    assert_eq!(h.to_alist(), text);
    assert_eq!((h.n_var(), h.n_chk()), (500, 200));
}

#[test]
fn simulate_is_thread_invariant_and_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("c.alist");
    let code = code.to_str().unwrap();
    finikey(&["build", "--n", "300", "--rate", "0.6", "--seed", "2", "--out", code], None);
    let args = ["simulate", "--code", code, "--q", "0.02:0.1:lin5", "--stop-errors", "30", "--max-trials", "600"];
    let (c1, one, _) = finikey(&args, Some("1"));
    let (c3, three, _) = finikey(&args, Some("3"));
    assert_eq!((c1, c3), (0, 0));
    assert_eq!(one, three);
    let lo: Vec<f64> = col(&one, "ci_lo").iter().map(|x| x.parse().unwrap()).collect();
    let hi: Vec<f64> = col(&one, "ci_hi").iter().map(|x| x.parse().unwrap()).collect();
    // nondecreasing within CI overlap
    for i in 1..lo.len() {
        assert!(hi[i] >= lo[i - 1], "{one}");
    }
}

#[test]
fn simulate_eps_rows_respect_the_converse() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("c.alist");
    let code = code.to_str().unwrap();
    finikey(&["build", "--n", "400", "--rate", "0.7", "--seed", "2", "--out", code], None);
    let (status, out, err) = finikey(
        &["simulate", "--code", code, "--q", "0.02", "--eps", "0.2,0.05", "--stop-errors", "40", "--max-trials", "20000"],
        None,
    );
    assert_eq!(out.lines().nth(1).unwrap(), EFF_HEADER.join(","));
    assert_eq!(status, 0, "{err}");
    let ci_hi = col(&out, "ci_hi");
    for (p, hi) in read_points(&out).unwrap().into_iter().zip(ci_hi) {
        let hi: f64 = hi.parse().unwrap();
        let bound = exact_converse(&BoundQuery::new(p.n_pay as u64, hi, p.q).unwrap()).unwrap();
        assert!(p.leak_bits >= bound - 1e-6);
    }
}

#[test]
fn fit_recovers_planted_coefficients_per_group() {
    let mut csv = String::from("# manifest: synthetic\n");
    csv.push_str(&EFF_HEADER.join(","));
    csv.push('\n');
    for (q, xi1, xi2) in [(0.02, 1.1, 1.5), (0.04, 1.2, 2.0)] {
        for n in [1000.0, 4000.0, 16000.0] {
            for eps in [1e-3, 1e-2, 1e-1] {
                let (a, b) = features(n, q, eps).unwrap();
                let leak = xi1 * a + xi2 * b;
                csv.push_str(&format!("{n},{q},{eps},{eps},{eps},{eps},{leak},1\n"));
            }
        }
    }
    let t = fit_table(&read_points(&csv).unwrap(), 1e-5, GroupBy::Q);
    assert_eq!(t.flagged, 0);
    let got: Vec<(String, f64, f64)> =
        t.rows.iter().map(|r| (r[0].clone(), r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert_eq!(got[0].0, "q=0.02");
    assert!((got[0].1 - 1.1).abs() < 1e-9 && (got[0].2 - 1.5).abs() < 1e-9);
    assert!((got[1].1 - 1.2).abs() < 1e-9 && (got[1].2 - 2.0).abs() < 1e-9);
    // fixed (Q, ε) groups still span the plane through n: a ∝ n, b ∝ √n
    let t = fit_table(&read_points(&csv).unwrap(), 1e-5, GroupBy::QEps);
    assert_eq!((t.rows.len(), t.flagged), (6, 0));
    assert_eq!(t.rows[4][0], "q=0.04;eps=0.01");
    assert!((t.rows[4][1].parse::<f64>().unwrap() - 1.2).abs() < 1e-9);
    // a single n per fixed (Q, ε): one feature direction, flagged
    let first: String = csv.lines().take(5).map(|l| format!("{l}\n")).collect();
    let t = fit_table(&read_points(&first).unwrap(), 1e-5, GroupBy::QEps);
    assert_eq!((t.rows.len(), t.flagged), (3, 3));
    // through the binary
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eff.csv");
    std::fs::write(&path, &csv).unwrap();
    let (code, out, _) = finikey(&["fit", "--points", path.to_str().unwrap(), "--group-by", "q"], None);
    assert_eq!(code, 0);
    assert_eq!(col(&out, "group"), vec!["q=0.02", "q=0.04"]);
}

#[test]
fn figure_schemas_are_stable() {
    let budget = Budget { stop_errors: 10, max_trials: 2_000, max_iter: 50 };
    let fig1 = figure1(
        &Fig1Plan {
            curves: vec![(0.05, 1e-1)],
            bound_ns: vec![100, 1000],
            points: vec![(200, budget)],
            floor: 1e-5,
        },
        1,
    );
    let names: Vec<&str> = fig1.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["fig1_bounds.csv", "fig1_points.csv", "fig1_fit.csv"]);
    assert_eq!(fig1.svgs.len(), 1);
    assert_eq!(fig1.files[1].table.header, EFF_HEADER);

    let fig3 = figure3(
        &Fig3Plan {
            cases: vec![Fig3Case { n: 300, rate: 0.7, q: 0.02 }],
            eps_targets: vec![0.3, 0.1],
            bound_eps: parse_reals("1e-3:1e-1:log3").unwrap(),
            budget,
            floor: 1e-5,
        },
        1,
    );
    let dir = tempfile::tempdir().unwrap();
    let written = fig3.write(dir.path()).unwrap();
    assert_eq!(written.len(), 4);
    let pts = std::fs::read_to_string(dir.path().join("fig3_points.csv")).unwrap();
    assert!(pts.starts_with("# manifest: command=figure3-points"));
    assert_eq!(pts.lines().nth(1).unwrap(), EFF_HEADER.join(","));
    assert_eq!(col(&pts, "eps_target"), vec!["0.3", "0.1"]);
}
