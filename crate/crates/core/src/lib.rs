//! Meta-reputation trust scoring for vehicular networks.
//!
//! - [`message`]: attribute domains, message records, ground-truth labels
//! - [`pipeline`]: the trust-formation pipeline and TScore regions
//! - [`sim`]: deterministic generator / broadcast / consumer simulation
//! - [`report`]: classification reports and the result CSV format
//! - [`risk`]: OWASP Risk Rating calculator

pub mod decimal;
pub mod message;
pub mod pipeline;
pub mod report;
pub mod risk;
pub mod sim;

pub use decimal::Score;
pub use message::{attribute_catalog, derive_trust_label, Attributes, Message, TrustLabel};
pub use pipeline::{classify_region, compute_tscore, Region, ScoreBreakdown, ScoringTables};
pub use report::{build_report, report_per_generator, ClassificationReport};
pub use risk::{assess, RiskAssessment, ThreatRating};
pub use sim::{run_simulation, GeneratorKind, ScoredRecord, SimConfig};
