//! OWASP Risk Rating arithmetic.
//!
//! Sixteen factors, each in `1..=9`, are averaged into a likelihood (threat
//! agent + vulnerability factors) and two impacts (technical, business).
//! Means are exact rationals; levels are binned on the exact value with
//! boundaries falling into the lower bin (3 is LOW, 6 is MEDIUM). Displayed
//! means use two decimals with ties to even.

use std::fmt;
use std::io;
use std::str::FromStr;

use csv::{ReaderBuilder, Terminator, WriterBuilder};
use num_rational::Ratio;
use thiserror::Error;

use crate::decimal::{format_fixed, Rounding};

pub type Mean = Ratio<i64>;

pub const FACTOR_MIN: u8 = 1;
pub const FACTOR_MAX: u8 = 9;

/// Worked threat ratings shipped with the crate (input schema).
pub const GOLDEN_RATINGS_CSV: &str = include_str!("../data/threat-ratings.csv");
/// The same ratings with their published assessment columns appended.
pub const GOLDEN_EXPECTED_CSV: &str = include_str!("../data/threat-ratings-expected.csv");

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("row {row} ({id}): {factor} = {value} is outside 1..=9")]
    FactorOutOfRange {
        row: u64,
        id: String,
        factor: Factor,
        value: i64,
    },
    #[error("value {0} is outside 0..=9")]
    OutOfRange(Mean),
    #[error("no child ratings to aggregate")]
    NoChildren,
    #[error("no ratings in input")]
    Empty,
    #[error("row {row}: {reason}")]
    Schema { row: u64, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

macro_rules! factors {
    ($($variant:ident => $col:literal),+ $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Factor { $($variant),+ }

        impl Factor {
            pub const ALL: [Factor; 16] = [$(Factor::$variant),+];

            /// CSV column name.
            pub fn column(self) -> &'static str {
                match self { $(Factor::$variant => $col),+ }
            }
        }
    };
}

factors! {
    SkillLevel => "skill_level",
    Motive => "motive",
    Opportunity => "opportunity",
    Size => "size",
    EaseOfDiscovery => "ease_of_discovery",
    EaseOfExploit => "ease_of_exploit",
    Awareness => "awareness",
    IntrusionDetection => "intrusion_detection",
    LossConfidentiality => "loss_confidentiality",
    LossIntegrity => "loss_integrity",
    LossAvailability => "loss_availability",
    LossAccountability => "loss_accountability",
    FinancialDamage => "financial_damage",
    ReputationDamage => "reputation_damage",
    NonCompliance => "non_compliance",
    PrivacyViolation => "privacy_violation",
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// The 16 factor values in [`Factor::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FactorVector([u8; 16]);

impl FactorVector {
    pub fn new(values: [u8; 16]) -> Result<Self, RiskError> {
        for (factor, v) in Factor::ALL.iter().zip(values) {
            if !(FACTOR_MIN..=FACTOR_MAX).contains(&v) {
                return Err(RiskError::FactorOutOfRange {
                    row: 0,
                    id: String::new(),
                    factor: *factor,
                    value: i64::from(v),
                });
            }
        }
        Ok(FactorVector(values))
    }

    pub fn get(&self, factor: Factor) -> u8 {
        self.0[factor as usize]
    }

    pub fn values(&self) -> [u8; 16] {
        self.0
    }

    fn mean(&self, range: std::ops::Range<usize>) -> Mean {
        let n = range.len() as i64;
        let sum: i64 = self.0[range].iter().map(|&v| i64::from(v)).sum();
        Ratio::new(sum, n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreatRating {
    pub id: String,
    pub description: String,
    pub factors: FactorVector,
}

impl ThreatRating {
    pub fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        values: [u8; 16],
    ) -> Result<Self, RiskError> {
        let id = id.into();
        let factors = FactorVector::new(values).map_err(|e| match e {
            RiskError::FactorOutOfRange { factor, value, .. } => RiskError::FactorOutOfRange {
                row: 0,
                id: id.clone(),
                factor,
                value,
            },
            other => other,
        })?;
        Ok(ThreatRating {
            id,
            description: description.into(),
            factors,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn name(self) -> &'static str {
        match self {
            Level::Low => "LOW",
            Level::Medium => "MEDIUM",
            Level::High => "HIGH",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown level {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Note,
    Low,
    Medium,
    High,
    Critical,
}

impl Severity {
    pub const ALL: [Severity; 5] = [
        Severity::Note,
        Severity::Low,
        Severity::Medium,
        Severity::High,
        Severity::Critical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Severity::Note => "Note",
            Severity::Low => "Low",
            Severity::Medium => "Medium",
            Severity::High => "High",
            Severity::Critical => "Critical",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Severity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Severity::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown severity {s:?}"))
    }
}

/// Mean of the four threat-agent and four vulnerability factors.
pub fn likelihood(r: &ThreatRating) -> Mean {
    r.factors.mean(0..8)
}

pub fn technical_impact(r: &ThreatRating) -> Mean {
    r.factors.mean(8..12)
}

pub fn business_impact(r: &ThreatRating) -> Mean {
    r.factors.mean(12..16)
}

pub fn level_of(x: Mean) -> Result<Level, RiskError> {
    if x < Ratio::from_integer(0) || x > Ratio::from_integer(9) {
        return Err(RiskError::OutOfRange(x));
    }
    Ok(if x <= Ratio::from_integer(3) {
        Level::Low
    } else if x <= Ratio::from_integer(6) {
        Level::Medium
    } else {
        Level::High
    })
}

/// Overall severity matrix, rows by impact, columns by likelihood.
pub fn overall(impact: Level, likelihood: Level) -> Severity {
    use Severity::*;
    const MATRIX: [[Severity; 3]; 3] = [
        [Note, Low, Medium],
        [Low, Medium, High],
        [Medium, High, Critical],
    ];
    MATRIX[impact as usize][likelihood as usize]
}

/// Two decimals, ties to even.
pub fn format_mean(x: Mean) -> String {
    format_fixed(x, 2, Rounding::HalfEven)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RiskAssessment {
    pub likelihood: Mean,
    pub technical_impact: Mean,
    pub business_impact: Mean,
    pub likelihood_level: Level,
    pub technical_level: Level,
    pub business_level: Level,
    pub overall_technical: Severity,
    pub overall_business: Severity,
}

impl RiskAssessment {
    /// The eight output columns as displayed.
    pub fn columns(&self) -> [String; 8] {
        [
            format_mean(self.likelihood),
            self.likelihood_level.to_string(),
            format_mean(self.technical_impact),
            self.technical_level.to_string(),
            format_mean(self.business_impact),
            self.business_level.to_string(),
            self.overall_technical.to_string(),
            self.overall_business.to_string(),
        ]
    }
}

pub const ASSESSMENT_COLUMNS: [&str; 8] = [
    "likelihood",
    "likelihood_level",
    "technical_impact",
    "technical_level",
    "business_impact",
    "business_level",
    "overall_technical",
    "overall_business",
];

pub fn assess(r: &ThreatRating) -> RiskAssessment {
    let l = likelihood(r);
    let t = technical_impact(r);
    let b = business_impact(r);
    // factors are validated to 1..=9, so every mean is in range
    let level = |x| level_of(x).expect("mean of in-range factors");
    let (ll, tl, bl) = (level(l), level(t), level(b));
    RiskAssessment {
        likelihood: l,
        technical_impact: t,
        business_impact: b,
        likelihood_level: ll,
        technical_level: tl,
        business_level: bl,
        overall_technical: overall(tl, ll),
        overall_business: overall(bl, ll),
    }
}

/// Rates a parent node from its children by taking the element-wise maximum
/// of every factor.
pub fn aggregate_children(children: &[ThreatRating]) -> Result<FactorVector, RiskError> {
    let (first, rest) = children.split_first().ok_or(RiskError::NoChildren)?;
    let mut out = first.factors.values();
    for child in rest {
        for (slot, v) in out.iter_mut().zip(child.factors.values()) {
            *slot = (*slot).max(v);
        }
    }
    Ok(FactorVector(out))
}

fn input_header() -> Vec<&'static str> {
    let mut h = vec!["id", "description"];
    h.extend(Factor::ALL.iter().map(|f| f.column()));
    h
}

/// Reads the 18-column rating CSV (`id`, `description`, then the 16 factor
/// columns). Extra trailing columns are ignored, so an assessed file can be
/// read back.
pub fn read_ratings<R: io::Read>(source: R) -> Result<Vec<ThreatRating>, RiskError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(h) => h?,
        None => return Err(RiskError::Empty),
    };
    let expected = input_header();
    if header.len() < expected.len() || header.iter().zip(&expected).any(|(a, b)| a != *b) {
        return Err(RiskError::Schema {
            row: 1,
            reason: format!("header must start with {}", expected.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() < expected.len() {
            return Err(RiskError::Schema {
                row: line,
                reason: format!("expected {} columns, found {}", expected.len(), row.len()),
            });
        }
        let id = row[0].to_owned();
        let mut values = [0u8; 16];
        for (i, factor) in Factor::ALL.iter().enumerate() {
            let text = row[i + 2].trim();
            let value: i64 = text.parse().map_err(|_| RiskError::Schema {
                row: line,
                reason: format!("{factor} is not an integer: {text:?}"),
            })?;
            if !(i64::from(FACTOR_MIN)..=i64::from(FACTOR_MAX)).contains(&value) {
                return Err(RiskError::FactorOutOfRange {
                    row: line,
                    id,
                    factor: *factor,
                    value,
                });
            }
            values[i] = value as u8;
        }
        out.push(ThreatRating {
            id,
            description: row[1].to_owned(),
            factors: FactorVector(values),
        });
    }
    if out.is_empty() {
        return Err(RiskError::Empty);
    }
    Ok(out)
}

/// Writes the input columns followed by the eight assessment columns.
pub fn write_assessments<W: io::Write>(
    ratings: &[ThreatRating],
    sink: W,
) -> Result<(), RiskError> {
    let mut w = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(sink);
    let mut header = input_header();
    header.extend(ASSESSMENT_COLUMNS);
    w.write_record(&header)?;
    for r in ratings {
        let mut row = vec![r.id.clone(), r.description.clone()];
        row.extend(r.factors.values().iter().map(|v| v.to_string()));
        row.extend(assess(r).columns());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rating(values: [u8; 16]) -> ThreatRating {
        ThreatRating::new("t", "test", values).unwrap()
    }

    const FIRST: [u8; 16] = [3, 9, 5, 2, 7, 3, 6, 8, 1, 1, 1, 7, 7, 9, 7, 1];

    #[test]
    fn means() {
        let r = rating(FIRST);
        assert_eq!(likelihood(&r), Ratio::new(43, 8));
        assert_eq!(format_mean(likelihood(&r)), "5.38");
        assert_eq!(format_mean(technical_impact(&r)), "2.50");
        assert_eq!(format_mean(business_impact(&r)), "6.00");

        let r = rating([6, 9, 9, 7, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 7, 1]);
        assert_eq!(likelihood(&r), Ratio::new(67, 8));
        assert_eq!(format_mean(likelihood(&r)), "8.38");
        assert_eq!(format_mean(business_impact(&r)), "6.50");

        let ones = rating([1; 16]);
        assert_eq!(format_mean(likelihood(&ones)), "1.00");
    }

    #[test]
    fn levels() {
        assert_eq!(level_of(Ratio::from_integer(3)).unwrap(), Level::Low);
        assert_eq!(level_of(Ratio::new(25, 8)).unwrap(), Level::Medium);
        assert_eq!(level_of(Ratio::from_integer(6)).unwrap(), Level::Medium);
        assert_eq!(level_of(Ratio::new(13, 2)).unwrap(), Level::High);
        assert_eq!(level_of(Ratio::from_integer(0)).unwrap(), Level::Low);
        assert_eq!(level_of(Ratio::from_integer(9)).unwrap(), Level::High);
        assert!(level_of(Ratio::new(-1, 8)).is_err());
        assert!(level_of(Ratio::new(73, 8)).is_err());
    }

    #[test]
    fn matrix() {
        assert_eq!(overall(Level::High, Level::High), Severity::Critical);
        assert_eq!(overall(Level::Low, Level::Low), Severity::Note);
        assert_eq!(overall(Level::Medium, Level::High), Severity::High);
        assert_eq!(overall(Level::High, Level::Low), Severity::Medium);
        assert_eq!(overall(Level::Low, Level::High), Severity::Medium);
    }

    #[test]
    fn assess_examples() {
        let a = assess(&rating(FIRST));
        assert_eq!(
            a.columns(),
            ["5.38", "MEDIUM", "2.50", "LOW", "6.00", "MEDIUM", "Low", "Medium"]
        );
        let a = assess(&rating([9, 1, 8, 9, 7, 5, 9, 9, 1, 1, 9, 9, 1, 1, 1, 1]));
        assert_eq!(
            a.columns(),
            ["7.12", "HIGH", "5.00", "MEDIUM", "1.00", "LOW", "High", "Medium"]
        );
        let a = assess(&rating([1; 16]));
        assert_eq!(
            a.columns(),
            ["1.00", "LOW", "1.00", "LOW", "1.00", "LOW", "Note", "Note"]
        );
    }

    #[test]
    fn out_of_range_factor() {
        let mut v = FIRST;
        v[4] = 0;
        let err = ThreatRating::new("x", "", v).unwrap_err();
        assert!(matches!(
            err,
            RiskError::FactorOutOfRange {
                factor: Factor::EaseOfDiscovery,
                value: 0,
                ..
            }
        ));
        v[4] = 10;
        assert!(ThreatRating::new("x", "", v).is_err());
    }

    #[test]
    fn aggregation() {
        assert!(matches!(aggregate_children(&[]), Err(RiskError::NoChildren)));
        let a = rating(FIRST);
        assert_eq!(aggregate_children(std::slice::from_ref(&a)).unwrap(), a.factors);
        let mut v = FIRST;
        v[0] = 8;
        let b = rating(v);
        let agg = aggregate_children(&[a.clone(), b]).unwrap();
        assert_eq!(agg.get(Factor::SkillLevel), 8);
        assert_eq!(agg.get(Factor::Motive), 9);
        let mut low = FIRST;
        low[0] = 1;
        let agg = aggregate_children(&[a, rating(low)]).unwrap();
        assert_eq!(agg.get(Factor::SkillLevel), 3);
    }

    #[test]
    fn csv_schema_errors() {
        assert!(matches!(read_ratings("".as_bytes()), Err(RiskError::Empty)));
        let header = input_header().join(",");
        assert!(matches!(
            read_ratings(format!("{header}\n").as_bytes()),
            Err(RiskError::Empty)
        ));
        assert!(matches!(
            read_ratings("id,desc\n".as_bytes()),
            Err(RiskError::Schema { row: 1, .. })
        ));
        let bad = format!("{header}\n7,x,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,0\n");
        match read_ratings(bad.as_bytes()) {
            Err(RiskError::FactorOutOfRange { row, id, factor, value }) => {
                assert_eq!((row, id.as_str(), factor, value), (2, "7", Factor::PrivacyViolation, 0));
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{header}\n7,x,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,abc\n");
        assert!(matches!(read_ratings(text.as_bytes()), Err(RiskError::Schema { row: 2, .. })));
    }

    #[test]
    fn write_then_read() {
        let ratings = read_ratings(GOLDEN_RATINGS_CSV.as_bytes()).unwrap();
        assert_eq!(ratings.len(), 49);
        let mut buf = Vec::new();
        write_assessments(&ratings, &mut buf).unwrap();
        let back = read_ratings(buf.as_slice()).unwrap();
        assert_eq!(back, ratings);
    }
}
