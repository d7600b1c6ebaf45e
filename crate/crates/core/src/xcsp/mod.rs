//! Reader and writer for the XCSP3-core document subset.

mod emit;
mod parse;
mod profile;
pub mod text;

pub use emit::{constraint_xml, emit_instance};
pub use parse::{parse_instance, parse_instance_report, parse_intension_in, ParseDiagnostic, ParseOutcome};
pub use profile::{Profile, MINI_ELEMENTS};
pub use text::{parse_condition, parse_intension, TextError};
