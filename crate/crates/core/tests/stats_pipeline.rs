mod common;

use synthvid_core::config::Level;
use synthvid_core::io::dataset::generate_dataset;
use synthvid_core::stats::analyze::{read_accuracy_csv, DiskDataset};
use synthvid_core::stats::features::{read_features, write_features};
use synthvid_core::stats::{analyze_dataset, AnalysisOptions, FeatureMatrix, FeatureSource, StatsReport};
use synthvid_core::Generator;

const VIDEOS: usize = 16;

fn options() -> AnalysisOptions {
    AnalysisOptions { seed: 5, videos: VIDEOS, frames_per_video: 12, frame_samples: 24, pixels_per_frame: 256, ..Default::default() }
}

#[test]
fn disk_datasets_to_report_with_correlations() {
    let dir = tempfile::tempdir().unwrap();
    let levels = [
        ("static", Level::StaticCircles),
        ("moving", Level::MovingCircles),
        ("shapes", Level::MovingShapes),
        ("accel", Level::AcceleratingShapes),
    ];
    let mut reports = Vec::new();
    for (i, (label, level)) in levels.into_iter().enumerate() {
        let cfg = common::small_config(level, 32, (14, 18), 600 + i as u64);
        let out = dir.path().join(label);
        generate_dataset(&Generator::new(cfg).unwrap(), &out, VIDEOS as u64).unwrap();
        reports.push(analyze_dataset(&DiskDataset::open(&out).unwrap(), &options()).unwrap());
    }
    let reference = reports[0].as_reference();
    let with_ref = AnalysisOptions { reference: Some(reference), ..options() };
    let moving = analyze_dataset(&DiskDataset::open(dir.path().join("moving")).unwrap(), &with_ref).unwrap();
    assert_eq!(moving.reference.as_deref(), Some("static"));
    assert!(moving.metric("color_symmetric_kl").unwrap() > 0.0);
    assert!(moving.metric("frechet_distance").unwrap() > 0.0);

    let acc_path = dir.path().join("acc.csv");
    std::fs::write(&acc_path, "dataset,accuracy\nstatic,67.8\nmoving,80.1\nshapes,84.0\naccel,86.2\nunrelated,1.0\n").unwrap();
    let accuracies = read_accuracy_csv(&acc_path).unwrap();
    let mut report = StatsReport::new(reports);
    report.correlate(&accuracies).unwrap();
    assert!(report.correlations.iter().all(|c| c.n == 4 && (-1.0..=1.0).contains(&c.r)));
    assert!(report.correlations.iter().any(|c| c.metric == "diversity_logdet"));

    let json = dir.path().join("report.json");
    let csv = report.save(&json).unwrap();
    let back: StatsReport = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(back.datasets.len(), 4);
    assert_eq!(back.correlations, report.correlations);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("dataset,metric,value\n"));
    assert!(text.lines().any(|l| l.starts_with("static,spectrum_alpha,")));
    assert!(text.lines().any(|l| l.starts_with("pearson_r,diversity_logdet,")));
}

#[test]
fn external_features_replace_the_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let g = Generator::new(common::small_config(Level::MovingShapes, 32, (14, 18), 9)).unwrap();
    let out = dir.path().join("d");
    generate_dataset(&g, &out, VIDEOS as u64).unwrap();

    // 40 rows in 3-D, unit-variance uniform, so the log-det is near zero
    let mut rng = synthvid_core::RngStream::new(1);
    let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.uniform(-3f64.sqrt(), 3f64.sqrt())).collect()).collect();
    let m = FeatureMatrix::from_rows(rows, FeatureSource::Builtin).unwrap();
    let path = dir.path().join("feat.sfea");
    write_features(&m, &path).unwrap();
    let features = read_features(&path).unwrap();
    assert_eq!(features.source, FeatureSource::External(path.clone()));

    let report = analyze_dataset(&DiskDataset::open(&out).unwrap(), &AnalysisOptions { features: Some(features), ..options() }).unwrap();
    assert_eq!(report.feature_rows, 40);
    assert_eq!(report.diversity.dim, 3);
    assert!(report.metric("diversity_logdet").unwrap().abs() < 2.0);
}
