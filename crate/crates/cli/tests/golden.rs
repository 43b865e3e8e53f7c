//! Golden scenarios: stored reports, determinism and round trips.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the stored reports.

use std::path::{Path, PathBuf};

use entropy_cli::run::{run, RunOptions};
use entropy_cli::scenario::parse_scenario;

pub const GOLDEN: [&str; 5] = ["minimal_sft", "x_plus_one", "universal_cover", "covers", "algebraic"];

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn report_text(name: &str) -> String {
    let text = std::fs::read_to_string(dir().join(format!("{name}.scn"))).unwrap();
    let sc = parse_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    run(&sc, &RunOptions::default()).to_string()
}

#[test]
fn reports_match_stored_files() {
    for name in GOLDEN {
        let got = report_text(name);
        let path = dir().join(format!("{name}.txt"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(got, want, "{name} differs from its stored report");
    }
}

#[test]
fn scenarios_round_trip() {
    for name in GOLDEN {
        let text = std::fs::read_to_string(dir().join(format!("{name}.scn"))).unwrap();
        let sc = parse_scenario(&text).unwrap();
        let again = parse_scenario(&sc.to_string()).unwrap_or_else(|e| panic!("{name}: {e}\n{sc}"));
        assert_eq!(again, sc, "{name}");
        assert_eq!(again.to_string(), sc.to_string());
    }
}

#[test]
fn parallel_runs_keep_file_order() {
    let text = std::fs::read_to_string(dir().join("algebraic.scn")).unwrap();
    let sc = parse_scenario(&text).unwrap();
    let serial = run(&sc, &RunOptions::default());
    let parallel = run(&sc, &RunOptions { jobs: 4, ..RunOptions::default() });
    assert_eq!(serial.to_string(), parallel.to_string());
    assert_eq!(serial.to_json(), parallel.to_json());
}

#[test]
fn json_mirrors_text() {
    let text = std::fs::read_to_string(dir().join("universal_cover.scn")).unwrap();
    let report = run(&parse_scenario(&text).unwrap(), &RunOptions::default());
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    let tasks = json["tasks"].as_array().unwrap();
    assert_eq!(tasks.len(), report.tasks.len());
    for (t, j) in report.tasks.iter().zip(tasks) {
        assert_eq!(j["id"], t.id.as_str());
        assert_eq!(j["items"].as_array().unwrap().len(), t.items.len());
        for item in j["items"].as_array().unwrap() {
            if item["type"] == "value" {
                let tag = item["tag"].as_str().unwrap();
                assert!(["certified", "NUMERIC", "declared"].contains(&tag), "{tag}");
            }
        }
    }
}
