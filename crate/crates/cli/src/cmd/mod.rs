pub mod figure1;
pub mod fock;
pub mod pair;
pub mod sqrt;
pub mod verify;

use serde::Serialize;

use crate::config::Loaded;
use crate::report::{Conventions, Output, Report, Status, TOOL};
use crate::RunError;

/// A validated command, ready to run.
pub trait Plan {
    fn run(&self, loaded: &Loaded, out: &Output) -> Result<Status, RunError>;
}

pub type Planned = Result<Box<dyn Plan>, RunError>;

#[allow(clippy::too_many_arguments)]
pub(crate) fn write_report<T: Serialize>(
    out: &Output,
    file: &str,
    command: &'static str,
    loaded: &Loaded,
    dimension: Option<usize>,
    status: Status,
    warnings: Vec<String>,
    results: T,
) -> Result<(), RunError> {
    let report = Report {
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        command,
        status,
        conventions: Conventions::new(dimension),
        config: &loaded.config,
        warnings,
        results,
    };
    out.json(file, &report)
}
