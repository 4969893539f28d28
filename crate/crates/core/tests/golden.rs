//! Frozen formats. Set `FIBERWALK_BLESS=1` to rewrite the golden outputs.

use std::fs;
use std::path::{Path, PathBuf};

use fiberwalk::io::{grid_csv, heatmap_pgm, parse_config, read_config, InitialSpec, Preset, RunConfig};
use fiberwalk::{evolve_recorded, Amp, GridKind, PhaseProfile, Spinor, Gradient};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check_bytes(name: &str, bytes: &[u8]) {
    let path = golden(name);
    if std::env::var_os("FIBERWALK_BLESS").is_some() {
        fs::write(&path, bytes).unwrap();
    }
    let want = fs::read(&path).unwrap();
    assert!(want == bytes, "{name} differs from golden file");
}

#[test]
fn preset_configs() {
    for p in Preset::ALL {
        let c = read_config(&golden(&format!("{}.toml", p.name()))).unwrap();
        assert_eq!(c, RunConfig::preset(p), "{}", p.name());
    }
}

#[test]
fn full_config() {
    let c = read_config(&golden("full.toml")).unwrap();
    assert_eq!(c.steps, 6);
    assert_eq!(c.record_every, 2);
    assert_eq!(c.outputs.len(), 6);
    assert_eq!(c.series.len(), 5);
    assert_eq!(
        c.initial,
        InitialSpec::Site {
            position: -1,
            spinor: Spinor::new(Amp::new(0.0, 0.0), Amp::new(1.0, 0.0))
        }
    );
    assert_eq!(c.phase, PhaseProfile::symmetric(Gradient::rational(1, 5).unwrap()));
    assert!(c.coin.is_balanced());
}

#[test]
fn every_line_of_the_full_config_matters() {
    // Dropping a required key or misspelling any key is an error.
    let text = fs::read_to_string(golden("full.toml")).unwrap();
    for key in ["steps", "position", "mode", "q", "p"] {
        let without: String = text
            .lines()
            .filter(|l| !l.starts_with(&format!("{key} =")))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(parse_config(&without).is_err(), "{key}");
    }
    for key in ["record_every", "split", "entries", "spinor"] {
        let typo = text.replacen(&format!("{key} ="), &format!("{key}x ="), 1);
        assert!(parse_config(&typo).is_err(), "{key}");
    }
}

#[test]
fn output_formats() {
    let c = read_config(&golden("full.toml")).unwrap();
    let traj = evolve_recorded(&c.initial_state().unwrap(), c.steps, &c.coin, &c.phase, c.record_every)
        .unwrap();
    let v = traj.grid(GridKind::V);
    check_bytes("full_grid_v.csv", grid_csv(&v).as_bytes());
    check_bytes("full_heatmap_v.pgm", &heatmap_pgm(&v));
    let t = traj.grid(GridKind::Total);
    check_bytes("full_grid_total.csv", grid_csv(&t).as_bytes());
}
