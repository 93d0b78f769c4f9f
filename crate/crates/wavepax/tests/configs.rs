//! The example configurations shipped in `configs/` parse, validate and
//! describe the spectra their names promise.

use std::path::{Path, PathBuf};
use wavepax::harness::{analyze, resonance_analyze, AnalysisConfig, RunConfig};
use wavepax::resonance::Classification;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load_run(name: &str) -> RunConfig {
    let c = RunConfig::load(&configs_dir().join(name)).unwrap();
    c.validate().unwrap();
    c
}

fn class_of(name: &str) -> Classification {
    let c = AnalysisConfig::load(&configs_dir().join(name)).unwrap();
    analyze(&c, None).unwrap().report.classification
}

#[test]
fn every_shipped_config_loads() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let name = path.file_name().unwrap().to_str().unwrap();
        if name.starts_with("resonance_") {
            AnalysisConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        } else {
            let c = RunConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
            c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            // run configurations double as analysis inputs
            AnalysisConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        seen += 1;
    }
    assert!(seen >= 9, "only {seen} configurations found");
}

#[test]
fn analysis_examples_classify_as_named() {
    assert_eq!(
        class_of("resonance_counterprop.json"),
        Classification::UniversallyInvariant
    );
    assert!(matches!(
        class_of("resonance_second_harmonic.json"),
        Classification::ConditionallyInvariant { .. }
    ));
    assert!(matches!(
        class_of("resonance_third_harmonic.json"),
        Classification::ConditionallyInvariant { .. }
    ));
}

#[test]
fn experiment_examples_have_invariant_spectra() {
    for name in [
        "preservation.json",
        "superposition.json",
        "positions.json",
        "averaging.json",
        "simulate_counterprop.json",
    ] {
        let c = load_run(name);
        assert_eq!(
            resonance_analyze(&c).unwrap().classification,
            Classification::UniversallyInvariant,
            "{name}"
        );
    }
    let soliton = load_run("soliton.json");
    assert!(soliton.soliton.is_some());
    assert_eq!(soliton.packets.len(), 1);
}

#[test]
fn sweeps_expand_as_documented() {
    assert_eq!(
        load_run("preservation.json").points(),
        vec![(0.1, 0.01), (0.05, 0.0025)]
    );
    assert_eq!(load_run("averaging.json").points().len(), 3);
    assert_eq!(load_run("positions.json").points(), vec![(0.1, 0.01)]);
}
