use std::path::Path;

use collinsim::report::{
    export_heatmap_grid, format_sig, read_metadata_json, read_results_csv, write_metadata_json, write_results_csv,
    write_run_outputs, HeatmapMetric, RESULTS_HEADER,
};
use collinsim::runner::{run_grid, GridConfig};
use collinsim::Error;

fn small() -> GridConfig {
    GridConfig {
        n_grid: vec![100, 400],
        vif_grid: vec![1.0, 2.5, 10.0],
        n_sims: 60,
        ..GridConfig::default()
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn results_csv_round_trip() {
    let run = run_grid(&small(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    write_results_csv(&run.results, &path).unwrap();
    let rows = read_results_csv(&path).unwrap();
    assert_eq!(rows.len(), run.results.len());
    for (row, r) in rows.iter().zip(&run.results) {
        assert_eq!((row.n, row.vif, row.structure, row.p), (r.n, r.vif, r.structure, r.p));
        assert_eq!(row.n_sims, 60);
        let m = &r.metrics;
        let expect = [
            m.coverage,
            m.bias,
            m.mae,
            m.precision_assurance,
            m.power_traditional,
            m.mean_ci_width,
            m.mean_se,
        ]
        .iter()
        .flat_map(|e| [e.value, e.mc_se])
        .collect::<Vec<_>>();
        for (got, want) in row.values.iter().zip(&expect) {
            assert!((got - want).abs() <= 1e-5 * want.abs().max(1e-12), "{got} vs {want}");
            assert_eq!(format_sig(*got, 6), format_sig(*want, 6));
        }
    }
    let text = read(&path);
    assert_eq!(text.lines().next().unwrap(), RESULTS_HEADER.join(","));
    assert_eq!(RESULTS_HEADER.len(), 22);
}

#[test]
fn omit_column_round_trips() {
    let g = GridConfig {
        structure: collinsim::corrstruct::Structure::Equicorrelated,
        omit: [4].into(),
        ..small()
    };
    let run = run_grid(&g, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    write_results_csv(&run.results, &path).unwrap();
    assert!(read(&path).lines().nth(1).unwrap().contains(",equi,6,2,"));
    assert!(read(&path).lines().nth(1).unwrap().contains(",x4,"));
    assert!(read_results_csv(&path).unwrap().iter().all(|r| r.omit == [4]));
}

#[test]
fn reruns_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut manifests = Vec::new();
    for dir in &dirs {
        let run = run_grid(&small(), Some(2)).unwrap();
        write_run_outputs(&run, &HeatmapMetric::ALL, dir.path()).unwrap();
        manifests.push(read_metadata_json(&dir.path().join("manifest.json")).unwrap());
    }
    for name in [
        "results.csv",
        "heatmap_pa.csv",
        "heatmap_power.csv",
        "heatmap_coverage.csv",
        "heatmap_mae.csv",
    ] {
        assert_eq!(
            read(&dirs[0].path().join(name)),
            read(&dirs[1].path().join(name)),
            "{name}"
        );
    }
    let (mut a, mut b) = (manifests[0].clone(), manifests[1].clone());
    a.timestamp = 0;
    b.timestamp = 0;
    assert_eq!(a, b);
}

#[test]
fn default_grid_file_shapes() {
    // Two replicates keep this quick; the shapes do not depend on n_sims.
    let g = GridConfig {
        n_sims: 2,
        ..GridConfig::default()
    };
    let run = run_grid(&g, None).unwrap();
    assert!(run.is_complete());
    let dir = tempfile::tempdir().unwrap();
    let written = write_run_outputs(&run, &HeatmapMetric::ALL, dir.path()).unwrap();
    assert_eq!(written.len(), 6);
    assert_eq!(read(&dir.path().join("results.csv")).lines().count(), 575);
    for m in HeatmapMetric::ALL {
        let text = read(&dir.path().join(format!("heatmap_{}.csv", m.name())));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8, "{}", m.name());
        assert!(lines.iter().all(|l| l.split(',').count() == 83));
        assert!(lines[0].starts_with("n/vif,1,1.1,1.2,"));
        assert!(lines[0].ends_with(",45,50"));
        assert!(lines[7].starts_with("100000,"));
    }
    let manifest = read_metadata_json(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.scenarios.len(), 574);
    assert_eq!(manifest.config_hash, g.hash());
}

#[test]
fn heatmap_cells_equal_results_table() {
    let run = run_grid(&small(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run_outputs(&run, &HeatmapMetric::ALL, dir.path()).unwrap();
    let table = read(&dir.path().join("results.csv"));
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for (metric, col) in [("pa", 14), ("power", 16), ("coverage", 8), ("mae", 12)] {
        let text = read(&dir.path().join(format!("heatmap_{metric}.csv")));
        let mut lines = text.lines();
        let vifs: Vec<&str> = lines.next().unwrap().split(',').skip(1).collect();
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            for (vif, cell) in vifs.iter().zip(&cells[1..]) {
                let row = rows
                    .iter()
                    .find(|r| r[0] == cells[0] && r[1] == *vif)
                    .expect("cell present in table");
                assert_eq!(row[col], *cell, "{metric} n={} vif={vif}", cells[0]);
            }
        }
    }
}

#[test]
fn ragged_grid_is_rejected() {
    let mut run = run_grid(&small(), None).unwrap();
    run.results.remove(4);
    let dir = tempfile::tempdir().unwrap();
    let err = export_heatmap_grid(&run.results, HeatmapMetric::Pa, &dir.path().join("h.csv")).unwrap_err();
    match err {
        Error::RaggedGrid { missing } => assert_eq!(missing, vec![(400, 2.5)]),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn mixed_structures_are_rejected() {
    let mut a = run_grid(&small(), None).unwrap();
    let b = run_grid(
        &GridConfig {
            structure: collinsim::corrstruct::Structure::Equicorrelated,
            ..small()
        },
        None,
    )
    .unwrap();
    a.results.extend(b.results);
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        export_heatmap_grid(&a.results, HeatmapMetric::Mae, &dir.path().join("h.csv")),
        Err(Error::Domain(_))
    ));
}

#[test]
fn sweep_writes_one_heatmap_per_beta() {
    let g = GridConfig {
        beta_main_sweep: Some(vec![0.0, 0.5]),
        ..small()
    };
    let run = run_grid(&g, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run_outputs(&run, &[HeatmapMetric::Power], dir.path()).unwrap();
    assert!(dir.path().join("heatmap_power_beta0.csv").is_file());
    assert!(dir.path().join("heatmap_power_beta0.5.csv").is_file());
    assert_eq!(read(&dir.path().join("results.csv")).lines().count(), 13);
}

#[test]
fn manifest_round_trip_and_missing_directory() {
    let run = run_grid(&small(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.json");
    write_metadata_json(&run.manifest, &path).unwrap();
    let back = read_metadata_json(&path).unwrap();
    assert_eq!(back, run.manifest);
    assert_eq!(back.scenarios[0].first_seed, 0);
    assert_eq!(back.scenarios[0].last_seed, 59);
    assert!(back.config.contains("n_sims = 60"));

    let missing = dir.path().join("nope");
    assert!(matches!(
        write_run_outputs(&run, &HeatmapMetric::ALL, &missing),
        Err(Error::Io(_))
    ));
    assert!(write_results_csv(&[], &dir.path().join("empty.csv")).is_err());
}
