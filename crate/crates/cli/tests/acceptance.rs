//! Acceptance gate for the command-line interface: every artifact it
//! writes must be byte-identical across two runs with the same
//! configuration and seed.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str], dir: &Path) {
    let out = Command::new(env!("CARGO_BIN_EXE_isacsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "`isacsim {}` failed:\n{}{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
}

/// Criterion: rerunning each subcommand with an identical config and seed
/// reproduces every output file byte for byte.
#[test]
fn criterion_6_cli_artifacts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        r#"{
            "schema_version": 1,
            "seed": 99,
            "trials": 30,
            "noiseless": false,
            "sweep": { "axis": "subcarriers", "values": [64, 128] },
            "ofdm": {
                "carrier_hz": 2.6e9,
                "subcarrier_spacing_hz": 30e3,
                "symbol_period_s": 3.5714285714285714e-5,
                "num_subcarriers": 64,
                "num_symbols": 16,
                "num_antennas": 4
            },
            "detector": { "aoa_step_rad": 0.0349 }
        }"#,
    )
    .unwrap();
    let config = config_path.to_str().unwrap();

    let artifacts: &[(&str, &[&str])] = &[
        ("rmse.csv", &["rmse", "--config", config, "--out"]),
        ("snr_map.csv", &["snr-map", "--config", config, "--mode", "multistatic", "--out"]),
        ("single_shot.json", &["single-shot", "--config", config, "--seed", "7", "--out"]),
    ];

    let mut checked = Vec::new();
    for (name, args) in artifacts {
        let first = dir.path().join(format!("first_{name}"));
        let second = dir.path().join(format!("second_{name}"));
        for out in [&first, &second] {
            let mut full: Vec<&str> = args.to_vec();
            let out_str = out.to_str().unwrap();
            full.push(out_str);
            run(&full, dir.path());
        }
        let a = std::fs::read(&first).unwrap();
        let b = std::fs::read(&second).unwrap();
        assert!(!a.is_empty(), "{name} must not be empty");
        assert_eq!(a, b, "{name} differs between identical runs");
        checked.push(format!("{name} ({} bytes)", a.len()));
    }

    println!(
        "ACCEPTANCE 6-cli-artifacts-byte-identical: PASS ({})",
        checked.join(", ")
    );
}
