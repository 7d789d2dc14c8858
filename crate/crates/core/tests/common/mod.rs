#![allow(dead_code)]

use std::path::PathBuf;

use cosmic_bell::bellstats::TableInput;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn run_tables(run: u32) -> TableInput {
    TableInput::load(fixtures().join(format!("run{run}/tables.json"))).expect("run fixture")
}

pub fn run_config(run: u32) -> cosmic_bell::config::RunConfig {
    cosmic_bell::config::RunConfig::load(fixtures().join(format!("run{run}/config.json")), &[]).expect("run config")
}
