use std::path::PathBuf;

use serde::Serialize;

/// Fully resolved settings of one invocation, echoed to stderr as JSON.
#[derive(Debug, Serialize)]
pub struct RunConfig<T: Serialize> {
    pub subcommand: &'static str,
    pub threads: Option<usize>,
    pub data_dir: PathBuf,
    pub settings: T,
}

impl<T: Serialize> RunConfig<T> {
    pub fn log(&self) {
        match serde_json::to_string(self) {
            Ok(json) => eprintln!("config {json}"),
            Err(e) => eprintln!("config unavailable: {e}"),
        }
    }
}

pub fn data_dir() -> PathBuf {
    std::env::var_os("DBAR_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}
