//! End-to-end checks of the `multical` binary: exit codes, report
//! consistency, and the documented flag behaviors.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use multical_cli::report::{read_toml, ReportDocument};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multical"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

#[test]
fn synth_rejects_even_q_with_validation_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let oracle = dir.path().join("o.toml");
    let output = run(&[
        "synth",
        "--q",
        "4",
        "--output",
        out.to_str().unwrap(),
        "--oracle-out",
        oracle.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("odd"), "stderr: {stderr}");
}

#[test]
fn missing_input_file_exits_with_io_code() {
    let output = run(&["metrics", "--input", "/nonexistent/data.csv", "--ell", "0"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn malformed_csv_exits_with_validation_code_and_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    write(&input, "score,response\n0.5,1\noops,0\n");
    let output = run(&["metrics", "--input", input.to_str().unwrap(), "--ell", "0"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn single_row_report_has_kuiper_equal_to_absolute_residual() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.csv");
    let report_path = dir.path().join("report.toml");
    write(&input, "score,response\n0.3,1\n");
    let output = run(&[
        "metrics",
        "--input",
        input.to_str().unwrap(),
        "--ell",
        "0",
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let document: ReportDocument = read_toml(&report_path).unwrap();
    assert_eq!(document.runs.len(), 1);
    assert_eq!(document.runs[0].summary.kuiper, 0.7);
    assert_eq!(document.runs[0].summary.multical, 0.7);
    assert_eq!(document.runs[0].summary.multi_ablate, 0.7);
    assert_eq!(document.runs[0].generated, 0);
}

#[test]
fn seed_sweep_with_generator_disabled_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    let report_path = dir.path().join("report.toml");
    write(
        &input,
        "score,response,x\n0.1,0,1\n0.4,1,2\n0.6,0,3\n0.9,1,4\n",
    );
    let output = run(&[
        "metrics",
        "--input",
        input.to_str().unwrap(),
        "--ell",
        "0",
        "--seed",
        "1",
        "--seed",
        "2",
        "--seed",
        "3",
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let document: ReportDocument = read_toml(&report_path).unwrap();
    assert_eq!(document.seeds, vec![1, 2, 3]);
    let aggregate = document.aggregate.expect("3 seeds aggregate");
    assert_eq!(aggregate.multical.twice_sem, 0.0);
    assert_eq!(aggregate.multi_ablate.twice_sem, 0.0);
    assert_eq!(aggregate.expectation.twice_sem, 0.0);
}

#[test]
fn summary_is_recomputable_from_subpopulation_records() {
    let dir = tempfile::tempdir().unwrap();
    let pop_path = dir.path().join("pop.csv");
    let oracle_path = dir.path().join("oracle.toml");
    let report_path = dir.path().join("report.toml");
    assert!(run(&[
        "synth",
        "--q",
        "9",
        "--output",
        pop_path.to_str().unwrap(),
        "--oracle-out",
        oracle_path.to_str().unwrap(),
    ])
    .status
    .success());
    assert!(run(&[
        "metrics",
        "--input",
        pop_path.to_str().unwrap(),
        "--ell",
        "17",
        "--min-size",
        "4",
        "--seed",
        "11",
        "--output",
        report_path.to_str().unwrap(),
    ])
    .status
    .success());
    let document: ReportDocument = read_toml(&report_path).unwrap();
    let run_report = &document.runs[0];

    // Recompute M, multi-ablate, and both argmaxes from the records alone;
    // they must agree with the summary exactly.
    let records = &run_report.subpops;
    assert_eq!(records[0].label, 0);
    let sigma0 = records[0].sigma;
    let guard = 1e-12;
    let mut multical = records[0].kuiper;
    let mut argmax = 0usize;
    for record in &records[1..] {
        let term = if record.sigma <= guard {
            0.0
        } else {
            record.kuiper * sigma0 / record.sigma
        };
        if term > multical {
            multical = term;
            argmax = record.label;
        }
    }
    assert_eq!(multical, run_report.summary.multical);
    assert_eq!(argmax, run_report.summary.argmax_multical);

    let mut ablate = records[0].kuiper;
    let mut argmax_ablate = 0usize;
    for record in &records[1..] {
        if record.kuiper > ablate {
            ablate = record.kuiper;
            argmax_ablate = record.label;
        }
    }
    assert_eq!(ablate, run_report.summary.multi_ablate);
    assert_eq!(argmax_ablate, run_report.summary.argmax_ablate);

    // Paths of generated subpopulations must name the split covariate.
    assert!(records[1..].iter().all(|r| r.path.contains("index")));
}

#[test]
fn curve_output_starts_at_origin_and_ends_at_total_weight() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    let curve_path = dir.path().join("curve.csv");
    write(&input, "score,response\n0.2,1\n0.5,0\n0.9,1\n");
    assert!(run(&[
        "metrics",
        "--input",
        input.to_str().unwrap(),
        "--ell",
        "0",
        "--curve-out",
        curve_path.to_str().unwrap(),
    ])
    .status
    .success());
    let table = multical_cli::csv_io::read_table(&curve_path).unwrap();
    assert_eq!(
        table.headers,
        vec!["cumulative_weight_fraction", "cumulative_difference"]
    );
    assert_eq!(table.rows.len(), 4);
    assert_eq!(table.rows[0], vec![0.0, 0.0]);
    assert_eq!(table.rows[3][0], 1.0);
    assert!((table.rows[1][1] - 0.8 / 3.0).abs() < 1e-15);
}

#[test]
fn weighting_flag_applies_the_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    let with_scheme = dir.path().join("a.toml");
    let baseline = dir.path().join("b.toml");
    write(&input, "score,response\n0.1,1\n0.5,0\n0.8,1\n");
    assert!(run(&[
        "metrics",
        "--input",
        input.to_str().unwrap(),
        "--ell",
        "0",
        "--weighting",
        "proportional",
        "--output",
        with_scheme.to_str().unwrap(),
    ])
    .status
    .success());
    assert!(run(&[
        "metrics",
        "--input",
        input.to_str().unwrap(),
        "--ell",
        "0",
        "--output",
        baseline.to_str().unwrap(),
    ])
    .status
    .success());
    let a: ReportDocument = read_toml(&with_scheme).unwrap();
    let b: ReportDocument = read_toml(&baseline).unwrap();
    assert_eq!(a.weighting, "proportional");
    assert_eq!(a.runs[0].subpops[0].total_weight, 10.0 + 2.0 + 1.25);
    assert_eq!(b.weighting, "uniform");
    assert_ne!(a.runs[0].summary.kuiper, b.runs[0].summary.kuiper);

    let bad = run(&[
        "metrics",
        "--input",
        input.to_str().unwrap(),
        "--ell",
        "0",
        "--weighting",
        "proportional-clamped",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn augment_without_eval_responses_prints_a_notice() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let eval = dir.path().join("eval.csv");
    let out = dir.path().join("out.csv");
    let mut train_rows = String::from("score,response,x\n");
    for i in 0..40 {
        let x = (i as f64 - 19.5) / 20.0;
        train_rows.push_str(&format!("0.5,{},{}\n", u8::from(x > 0.0), x));
    }
    write(&train, &train_rows);
    write(&eval, "score,x\n0.5,-0.7\n0.5,0.7\n");
    let output = run(&[
        "augment",
        "--train",
        train.to_str().unwrap(),
        "--eval",
        eval.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--rounds",
        "2",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("Kuiper summary omitted"), "stdout: {stdout}");
    let table = multical_cli::csv_io::read_table(&out).unwrap();
    assert_eq!(table.headers, vec!["score", "x", "final_score"]);
    assert!(table.rows[0][2] < 0.5); // x = -0.7 scores low
    assert!(table.rows[1][2] > 0.5);
}

#[test]
fn augment_rejects_zero_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let eval = dir.path().join("eval.csv");
    write(&train, "score,response,x\n0.5,1,1\n0.5,0,-1\n");
    write(&eval, "score,x\n0.5,1\n");
    let output = run(&[
        "augment",
        "--train",
        train.to_str().unwrap(),
        "--eval",
        eval.to_str().unwrap(),
        "--output",
        train.to_str().unwrap(),
        "--rounds",
        "0",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("rounds"));
}

#[test]
fn synth_then_metrics_reproduces_the_oracle_for_every_odd_q() {
    use multical_cli::commands::{cmd_metrics, cmd_synth, MetricsOptions, SynthOptions};
    use multical_cli::report::OracleDocument;
    use multical_cli::schema::InputSchema;

    let dir = tempfile::tempdir().unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    for q in (1u32..=99).step_by(2) {
        let pop_path = dir.path().join(format!("pop{q}.csv"));
        let oracle_path = dir.path().join(format!("oracle{q}.toml"));
        cmd_synth(&SynthOptions {
            q,
            output: pop_path.clone(),
            oracle_out: oracle_path.clone(),
        })
        .unwrap();
        let document = cmd_metrics(&MetricsOptions {
            input: pop_path,
            output: None,
            schema: InputSchema::default(),
            mode: multical::Mode::Bernoulli,
            ell: 0,
            min_size: 10,
            seeds: vec![0],
            weighting: None,
            curve_out: None,
            synthetic_subpops: true,
        })
        .unwrap();
        let exact: OracleDocument = read_toml(&oracle_path).unwrap();
        let summary = &document.runs[0].summary;
        assert!(rel(summary.kuiper, exact.d0) < 1e-10, "q={q}");
        assert!(rel(summary.multical, exact.m) < 1e-10, "q={q}");
        assert!(rel(summary.multi_ablate, exact.multi_ablate) < 1e-10, "q={q}");
        assert!(rel(summary.expectation, exact.expectation) < 1e-10, "q={q}");
        assert_eq!(summary.argmax_multical, exact.argmax, "q={q}");
        for (k, record) in document.runs[0].subpops.iter().enumerate() {
            assert!(rel(record.sigma, exact.sigma[k]) < 1e-10, "q={q} k={k}");
            if k >= 1 {
                assert!(rel(record.kuiper, exact.dk[k - 1]) < 1e-10, "q={q} k={k}");
            }
        }
    }
}

#[test]
fn regression_mode_reports_without_classification_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("reg.csv");
    let report_path = dir.path().join("report.toml");
    write(
        &input,
        "score,response\n0.1,0.3\n0.4,-0.2\n0.6,0.9\n0.9,1.4\n",
    );
    let output = run(&[
        "metrics",
        "--input",
        input.to_str().unwrap(),
        "--mode",
        "regression",
        "--ell",
        "0",
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let document: ReportDocument = read_toml(&report_path).unwrap();
    assert_eq!(document.mode, "regression");
    assert_eq!(document.runs[0].summary.error, None);
    // Non-binary responses are rejected in the default bernoulli mode.
    let bad = run(&["metrics", "--input", input.to_str().unwrap(), "--ell", "0"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn augment_prints_a_kuiper_improvement_on_a_separable_pair() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let eval = dir.path().join("eval.csv");
    let out = dir.path().join("out.csv");
    let make_rows = |n: usize, offset: f64| {
        let mut rows = String::from("score,response,x\n");
        for i in 0..n {
            let x = (i as f64 - n as f64 / 2.0 + offset) / n as f64;
            rows.push_str(&format!("0.5,{},{}\n", u8::from(x > 0.0), x));
        }
        rows
    };
    write(&train, &make_rows(200, 0.25));
    write(&eval, &make_rows(100, 0.75));
    let output = run(&[
        "augment",
        "--train",
        train.to_str().unwrap(),
        "--eval",
        eval.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--rounds",
        "3",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    let value_of = |marker: &str| -> f64 {
        stdout
            .lines()
            .find(|line| line.contains(marker))
            .and_then(|line| line.rsplit(' ').next())
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| panic!("missing '{marker}' in:\n{stdout}"))
    };
    let before = value_of("before augmentation");
    let after = value_of("after  augmentation");
    assert!(after < before, "after {after} vs before {before}");
}

#[test]
fn synthetic_subpops_flag_requires_a_synthetic_shape() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write(&input, "score,response\n0.2,1\n0.5,0\n0.9,1\n");
    let output = run(&[
        "metrics",
        "--input",
        input.to_str().unwrap(),
        "--synthetic-subpops",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("synthetic"));
}
