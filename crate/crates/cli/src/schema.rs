//! JSON Schemas (draft 2020-12) for every document the CLI reads or writes.
//! The files live in `crates/cli/schema/`.

pub const PAIR_DOCUMENT: &str = include_str!("../schema/pair_document.schema.json");
pub const INSTANCE_DOCUMENT: &str = include_str!("../schema/instance_document.schema.json");
pub const REFERENCE_DOCUMENT: &str = include_str!("../schema/reference_document.schema.json");
pub const INTERVAL_REPORT: &str = include_str!("../schema/interval_report.schema.json");
pub const SDC_REPORT: &str = include_str!("../schema/sdc_report.schema.json");
pub const GTRS_OUTCOME: &str = include_str!("../schema/gtrs_outcome.schema.json");
pub const VERIFY_REPORT: &str = include_str!("../schema/verify_report.schema.json");
pub const SCAN_REPORT: &str = include_str!("../schema/scan_report.schema.json");
pub const GEN_REPORT: &str = include_str!("../schema/gen_report.schema.json");
pub const ERROR: &str = include_str!("../schema/error.schema.json");

/// Schema of the `--json` document a successful `command` prints. `gen`
/// prints an instance without `--out` and a [`GEN_REPORT`] with it.
pub fn for_command(command: &str, with_out: bool) -> Option<&'static str> {
    Some(match command {
        "interval" => INTERVAL_REPORT,
        "sdc" => SDC_REPORT,
        "solve" => GTRS_OUTCOME,
        "verify" => VERIFY_REPORT,
        "scan" => SCAN_REPORT,
        "gen" if with_out => GEN_REPORT,
        "gen" => INSTANCE_DOCUMENT,
        _ => return None,
    })
}
