//! File formats: CSV datasets, group specs, key=value configs, and the
//! versioned JSON documents of the command-line tool.

pub mod config;
pub mod group_spec;
pub mod report;
pub mod table;

pub use config::{
    direction_from_config, parse_config, scenario_from_config, schedule_from_config,
    study_kind_from_config, sweep_from_config, ConfigMap,
};
pub use group_spec::{parse_group_spec, parse_inline_groups, GroupAssignment};
pub use report::{
    to_json_string, FitDiagnostics, FitDocument, GroupReport, RunManifest, ScheduleDocument,
    StudyDocument, TruthDocument, SCHEMA_VERSION,
};
pub use table::{design_from_table, format_float, parse_csv_bytes, write_csv, NumericTable};
