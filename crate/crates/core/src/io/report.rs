//! Evaluation report file: the serialized [`EvalReport`].

use super::{check_version, from_json, to_json, IoError};
use crate::eval::EvalReport;

pub fn write_report(report: &EvalReport) -> String {
    to_json(report)
}

pub fn parse_report(bytes: &[u8]) -> Result<EvalReport, IoError> {
    let report: EvalReport = from_json(bytes)?;
    check_version(report.format_version)?;
    Ok(report)
}
