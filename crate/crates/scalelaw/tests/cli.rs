//! End-to-end tests of the command-line surface: exit codes, output schemas,
//! and agreement with the library on the same inputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scalelaw::dedup::{box_blur3, phash, pnm, synth};
use scalelaw::records::{parse_records, write_records_json, ArchRegistry, Family, RecordFormat};
use scalelaw::scaling::FitReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scalelaw"))
}

fn fixtures() -> String {
    format!("{}/fixtures", env!("CARGO_MANIFEST_DIR"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).expect("write fixture");
}

/// Registry with a single 1-GMAC architecture, so compute == samples seen.
const UNIT_ARCHS: &str = "name,image_width,text_width,embed_dim,image_depth,text_depth,params_millions,gmacs_per_sample\n\
     unit,1,1,1,1,1,1,1.0\n";

#[test]
fn fit_two_point_exact_power_law_has_r2_one() {
    let dir = tempfile::tempdir().unwrap();
    let archs = dir.path().join("archs.csv");
    write(&archs, UNIT_ARCHS);
    let records = dir.path().join("records.csv");
    // errors 0.2 at C=100 and 0.02 at C=10000: exactly E = 2 C^-0.5
    write(
        &records,
        "arch,family,pretrain_dataset,samples_seen,task,metric_percent\n\
         unit,openclip-laion,demo,100,t,99.8\n\
         unit,openclip-laion,demo,10000,t,99.98\n",
    );
    let report_path = dir.path().join("fit.json");
    run_ok(bin().args([
        "fit",
        "--records",
        records.to_str().unwrap(),
        "--archs",
        archs.to_str().unwrap(),
        "--task",
        "t",
        "--family",
        "openclip-laion",
        "--out",
        report_path.to_str().unwrap(),
    ]));
    let report: FitReport =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!((report.alpha + 0.5).abs() < 1e-12);
    assert!((report.beta - 2.0).abs() < 1e-12);
    assert!(report.r_squared > 1.0 - 1e-12);
}

#[test]
fn fit_report_keys_are_in_declared_order() {
    let out_path = std::env::temp_dir().join(format!("scalelaw-keys-{}.json", std::process::id()));
    run_ok(bin().args([
        "fit",
        "--records",
        &format!("{}/results.csv", fixtures()),
        "--archs",
        &format!("{}/architectures.csv", fixtures()),
        "--task",
        "imagenet-zeroshot",
        "--family",
        "openclip-laion",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&out_path).unwrap();
    fs::remove_file(&out_path).ok();
    let keys = [
        "\"task\"",
        "\"family\"",
        "\"alpha\"",
        "\"beta\"",
        "\"r_squared\"",
        "\"n_points\"",
        "\"fit_domain\"",
        "\"bins\"",
        "\"predictions\"",
    ];
    let mut last = 0;
    for key in keys {
        let pos = text.find(key).unwrap_or_else(|| panic!("missing key {key}"));
        assert!(pos > last, "{key} out of order");
        last = pos;
    }
    // Valid instance of the declared schema.
    let _: FitReport = serde_json::from_str(&text).unwrap();
}

#[test]
fn fit_empty_selection_reports_no_points() {
    let out = bin()
        .args([
            "fit",
            "--records",
            &format!("{}/results.csv", fixtures()),
            "--archs",
            &format!("{}/architectures.csv", fixtures()),
            "--task",
            "no-such-task",
            "--family",
            "openclip-laion",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no points"), "stderr: {stderr}");
}

#[test]
fn predict_unknown_arch_fails() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("fit.json");
    run_ok(bin().args([
        "fit",
        "--records",
        &format!("{}/results.csv", fixtures()),
        "--archs",
        &format!("{}/architectures.csv", fixtures()),
        "--task",
        "imagenet-zeroshot",
        "--family",
        "openclip-laion",
        "--out",
        report_path.to_str().unwrap(),
    ]));
    let out = bin()
        .args([
            "predict",
            "--fit",
            report_path.to_str().unwrap(),
            "--archs",
            &format!("{}/architectures.csv", fixtures()),
            "--arch",
            "ViT-Z/1",
            "--samples",
            "1000",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown architecture"));
}

#[test]
fn plotdata_row_counts_and_frontier_flags() {
    let dir = tempfile::tempdir().unwrap();
    let archs = dir.path().join("archs.csv");
    write(&archs, UNIT_ARCHS);
    let records = dir.path().join("records.csv");
    write(
        &records,
        "arch,family,pretrain_dataset,samples_seen,task,metric_percent\n\
         unit,openclip-laion,demo,100,t,60.0\n\
         unit,openclip-laion,demo,2000,t,70.0\n\
         unit,openclip-laion,demo,40000,t,80.0\n",
    );
    let out_path = dir.path().join("plot.csv");
    run_ok(bin().args([
        "plotdata",
        "--records",
        records.to_str().unwrap(),
        "--archs",
        archs.to_str().unwrap(),
        "--task",
        "t",
        "--family",
        "openclip-laion",
        "--bins",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "log10_compute,error,is_frontier,fitted_error");
    assert_eq!(lines.len(), 1 + 3 + 64, "3 point rows + 64 curve rows");

    // Frontier flags agree with the library on the same input.
    use scalelaw::records::{to_points, ErrorConvention};
    use scalelaw::scaling::{bin_compute, pareto_frontier, BinSpec};
    let recs = parse_records(
        fs::read_to_string(&records).unwrap().as_bytes(),
        RecordFormat::Csv,
    )
    .unwrap();
    let registry = ArchRegistry::from_csv(UNIT_ARCHS.as_bytes()).unwrap();
    let points = to_points(
        &recs,
        "t",
        Family::OpenClipLaion,
        &registry,
        ErrorConvention::default(),
    )
    .unwrap();
    let spec = BinSpec::covering(&points, 3).unwrap();
    let frontier = pareto_frontier(&bin_compute(&points, &spec).unwrap()).unwrap();
    for (i, line) in lines[1..=3].iter().enumerate() {
        let is_frontier = line.split(',').nth(2).unwrap();
        let expected = frontier.iter().any(|f| f.source == i);
        assert_eq!(is_frontier, if expected { "true" } else { "false" });
    }
    // Every point is its own bin here, so all three are frontier members.
    assert_eq!(frontier.len(), 3);
}

fn write_matrix(path: &Path, rows: &[&[f64]]) {
    let mut text = format!("{} {}\n", rows.len(), rows[0].len());
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    write(path, &text);
}

#[test]
fn eval_zeroshot_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images.txt");
    let labels = dir.path().join("labels.txt");
    let truth = dir.path().join("truth.csv");
    write_matrix(&labels, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
    write_matrix(
        &images,
        &[&[0.9, 0.1, 0.0], &[0.0, 1.0, 0.0], &[0.1, 0.0, 0.8], &[1.0, 0.0, 0.0]],
    );
    write(&truth, "query_index,candidate_index\n0,0\n1,1\n2,2\n3,0\n");
    let out_path = dir.path().join("zs.json");
    let out = run_ok(bin().args([
        "eval-zeroshot",
        "--images",
        images.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]));
    assert!(String::from_utf8_lossy(&out.stdout).contains("100.00%"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["accuracy"], 100.0);
    assert_eq!(json["predictions"], serde_json::json!([0, 1, 2, 0]));
}

#[test]
fn eval_retrieval_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let queries = dir.path().join("queries.txt");
    let truth = dir.path().join("truth.csv");
    write_matrix(
        &queries,
        &[&[1.0, 0.0], &[0.0, 1.0], &[0.7, 0.7], &[-1.0, 0.0]],
    );
    write(&truth, "0,0\n1,1\n2,2\n3,3\n");
    let out_path = dir.path().join("retrieval.json");
    run_ok(bin().args([
        "eval-retrieval",
        "--queries",
        queries.to_str().unwrap(),
        "--candidates",
        queries.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
        "--k",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["recall"], 100.0);
    assert_eq!(json["k"], 1);
}

#[test]
fn probe_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("features.txt");
    let labels = dir.path().join("labels.csv");
    let eval = dir.path().join("eval.txt");
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let sign = if i < 10 { -1.0 } else { 1.0 };
            vec![sign * (1.0 + 0.02 * (i % 10) as f64), 0.1 * (i % 10) as f64]
        })
        .collect();
    let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    write_matrix(&features, &row_refs);
    let mut label_text = String::new();
    for i in 0..20 {
        label_text.push_str(&format!("{i},{}\n", if i < 10 { 0 } else { 1 }));
    }
    write(&labels, &label_text);
    write(&eval, "0\n5\n10\n15\n");
    let out_path = dir.path().join("probe.json");
    run_ok(bin().args([
        "probe",
        "--features",
        features.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--eval",
        eval.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["train_accuracy"], 100.0);
    assert_eq!(json["eval_accuracy"], 100.0);
}

#[test]
fn dedup_from_images_and_from_hash_csvs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let dir_a = dir.path().join("a");
    let dir_b = dir.path().join("b");
    fs::create_dir_all(&dir_a).unwrap();
    fs::create_dir_all(&dir_b).unwrap();
    for seed in 0..4u64 {
        let image = synth::structured_image(seed, 48, 48);
        let mut buf = Vec::new();
        pnm::write(&mut buf, &image).unwrap();
        fs::write(dir_a.join(format!("a{seed}.pgm")), &buf).unwrap();
    }
    // B: blurred copies of a0 and a1, plus an unrelated image.
    for (name, image) in [
        ("b0.pgm", box_blur3(&synth::structured_image(0, 48, 48))),
        ("b1.pgm", box_blur3(&synth::structured_image(1, 48, 48))),
        ("b2.pgm", synth::structured_image(999, 48, 48)),
    ] {
        let mut buf = Vec::new();
        pnm::write(&mut buf, &image).unwrap();
        fs::write(dir_b.join(name), &buf).unwrap();
    }
    let report_images = dir.path().join("report-images.json");
    let hashes_a = dir.path().join("hashes-a.csv");
    let hashes_b = dir.path().join("hashes-b.csv");
    let out = run_ok(bin().args([
        "dedup",
        "--a",
        dir_a.to_str().unwrap(),
        "--b",
        dir_b.to_str().unwrap(),
        "--threshold",
        "12",
        "--hashes-out-a",
        hashes_a.to_str().unwrap(),
        "--hashes-out-b",
        hashes_b.to_str().unwrap(),
        "--out",
        report_images.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("b0.pgm ~ a0.pgm"), "stdout: {stdout}");

    // Same report when feeding the hash CSVs back in.
    let report_csv = dir.path().join("report-csv.json");
    run_ok(bin().args([
        "dedup",
        "--a",
        hashes_a.to_str().unwrap(),
        "--b",
        hashes_b.to_str().unwrap(),
        "--threshold",
        "12",
        "--out",
        report_csv.to_str().unwrap(),
    ]));
    assert_eq!(
        fs::read_to_string(&report_images).unwrap(),
        fs::read_to_string(&report_csv).unwrap()
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_images).unwrap()).unwrap();
    assert_eq!(json["total_b"], 3);
    assert!(json["matched_b"].as_u64().unwrap() >= 2);
    // Sanity: the hash of a bundled image matches the library.
    let first_hash = fs::read_to_string(&hashes_a)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .to_string();
    assert_eq!(first_hash, phash(&synth::structured_image(0, 48, 48)).to_hex());
}

#[test]
fn efficiency_end_to_end() {
    let out_path =
        std::env::temp_dir().join(format!("scalelaw-eff-{}.json", std::process::id()));
    run_ok(bin().args([
        "efficiency",
        "--samples",
        &format!("{}/throughput.csv", fixtures()),
        "--out",
        out_path.to_str().unwrap(),
    ]));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    fs::remove_file(&out_path).ok();
    let rows = json.as_array().unwrap();
    assert_eq!(rows[0]["efficiency_percent"], 100.0);
    let last = rows.last().unwrap();
    assert_eq!(last["n_gpus"], 256);
    assert_eq!(last["efficiency_percent"], 90.0);
}

#[test]
fn csv_and_json_records_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let records = parse_records(
        include_str!("../fixtures/results.csv").as_bytes(),
        RecordFormat::Csv,
    )
    .unwrap();
    let json_path: PathBuf = dir.path().join("results.json");
    let mut buf = Vec::new();
    write_records_json(&mut buf, &records).unwrap();
    fs::write(&json_path, &buf).unwrap();

    let mut reports = Vec::new();
    for records_path in [
        format!("{}/results.csv", fixtures()),
        json_path.to_str().unwrap().to_string(),
    ] {
        let out_path = dir.path().join(format!(
            "report-{}.json",
            Path::new(&records_path)
                .extension()
                .unwrap()
                .to_str()
                .unwrap()
        ));
        run_ok(bin().args([
            "fit",
            "--records",
            &records_path,
            "--archs",
            &format!("{}/architectures.csv", fixtures()),
            "--task",
            "flickr30k-image-r5",
            "--family",
            "openclip-laion",
            "--out",
            out_path.to_str().unwrap(),
        ]));
        reports.push(fs::read_to_string(&out_path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}
