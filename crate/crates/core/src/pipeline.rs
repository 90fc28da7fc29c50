//! Trust-formation pipeline: per-stage partial trust scores and their
//! combination into a single TScore in `[0, 1]`.
//!
//! Stages run in the order Context, Role, Identity, Experience, Information.
//! The Identity and Information stages add one unit of denominator weight
//! per zero-valued partial, which pushes the combined score further down
//! whenever a check fails outright. Role zeros carry no extra weight and the
//! Experience stage is an explicit "not available" slot.
//!
//! All arithmetic is exact ([`Score`] is a rational); rounding happens only
//! when rendering.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::decimal::Score;
use crate::message::{
    AppIdentity, Attribute, Attributes, ChannelType, InfoState, LinkLayer, MacIdentity,
    NetworkAddress, Role,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("tscore {0} is outside [0, 1]")]
    OutOfRange(Score),
    #[error("table {table} entry {key:?} = {value} is not one of 0, 0.25, 0.5, 0.75, 1")]
    OffLattice {
        table: &'static str,
        key: String,
        value: Score,
    },
    #[error("pipeline has no contributing stage")]
    NoContribution,
}

const fn q(quarters: i64) -> Score {
    Ratio::new_raw(quarters, 4)
}

const fn whole(n: i64) -> Score {
    Ratio::new_raw(n, 1)
}

// Reduced forms of the five discrete trust values.
const ZERO: Score = whole(0);
const QUARTER: Score = q(1);
const HALF: Score = Ratio::new_raw(1, 2);
const THREE_QUARTERS: Score = q(3);
const ONE: Score = whole(1);

/// Discrete lookup tables backing the stages. Arrays are indexed by the
/// attribute enums' declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoringTables {
    pub context_l1: [Score; 2],
    pub context_l2type: [Score; 3],
    /// `role_id[role][identity]`
    pub role_id: [[Score; 6]; 5],
    pub identity_l2mac: [Score; 3],
    pub identity_l3: [Score; 4],
    pub identity_infoid: [Score; 6],
    pub info_state: [Score; 3],
}

impl Default for ScoringTables {
    fn default() -> Self {
        // identity columns: weak valid, weak invalid, mid valid, mid invalid,
        // strong valid, strong invalid
        let service = [QUARTER, ZERO, HALF, ZERO, ONE, ZERO];
        let infrastructure = [ZERO, ZERO, THREE_QUARTERS, ZERO, ONE, ZERO];
        let vehicle = [QUARTER, ZERO, THREE_QUARTERS, ZERO, ONE, ZERO];
        let mobile = [QUARTER, ZERO, HALF, ZERO, ONE, ZERO];
        ScoringTables {
            context_l1: [THREE_QUARTERS, HALF],
            context_l2type: [HALF, HALF, THREE_QUARTERS],
            // service role, RSU, vehicle, mobile, emergency vehicle
            role_id: [service, infrastructure, vehicle, mobile, infrastructure],
            identity_l2mac: [HALF, ONE, ZERO],
            identity_l3: [ONE, ZERO, THREE_QUARTERS, ZERO],
            identity_infoid: [HALF, ZERO, THREE_QUARTERS, ZERO, ONE, ZERO],
            // valid, invalid, not verifiable
            info_state: [ONE, ZERO, HALF],
        }
    }
}

impl ScoringTables {
    pub fn context_l1(&self, v: LinkLayer) -> Score {
        self.context_l1[v as usize]
    }

    pub fn context_l2type(&self, v: ChannelType) -> Score {
        self.context_l2type[v as usize]
    }

    pub fn role_id(&self, role: Role, id: AppIdentity) -> Score {
        self.role_id[role as usize][id as usize]
    }

    pub fn identity_l2mac(&self, v: MacIdentity) -> Score {
        self.identity_l2mac[v as usize]
    }

    pub fn identity_l3(&self, v: NetworkAddress) -> Score {
        self.identity_l3[v as usize]
    }

    pub fn identity_infoid(&self, v: AppIdentity) -> Score {
        self.identity_infoid[v as usize]
    }

    pub fn info_state(&self, v: InfoState) -> Score {
        self.info_state[v as usize]
    }

    /// Checks that every entry is one of the five discrete trust values.
    pub fn validate(&self) -> Result<(), PipelineError> {
        fn check<A: Attribute>(
            table: &'static str,
            values: &[Score],
        ) -> Result<(), PipelineError> {
            for (key, value) in A::ALL.iter().zip(values) {
                if !is_lattice(*value) {
                    return Err(PipelineError::OffLattice {
                        table,
                        key: key.name().to_owned(),
                        value: *value,
                    });
                }
            }
            Ok(())
        }
        check::<LinkLayer>("context_l1", &self.context_l1)?;
        check::<ChannelType>("context_l2type", &self.context_l2type)?;
        for (role, row) in Role::ALL.iter().zip(&self.role_id) {
            for (id, value) in AppIdentity::ALL.iter().zip(row) {
                if !is_lattice(*value) {
                    return Err(PipelineError::OffLattice {
                        table: "role_id",
                        key: format!("{role}/{id}"),
                        value: *value,
                    });
                }
            }
        }
        check::<MacIdentity>("identity_l2mac", &self.identity_l2mac)?;
        check::<NetworkAddress>("identity_l3", &self.identity_l3)?;
        check::<AppIdentity>("identity_infoid", &self.identity_infoid)?;
        check::<InfoState>("info_state", &self.info_state)?;
        Ok(())
    }
}

fn is_lattice(v: Score) -> bool {
    [ZERO, QUARTER, HALF, THREE_QUARTERS, ONE].contains(&v)
}

/// Raw partial scores before any stage-level combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partials {
    pub context: [Score; 2],
    pub role: Score,
    /// link identity, network identity, application identity
    pub identity: [Score; 3],
    /// information state, type consistency, position consistency
    pub information: [Score; 3],
}

impl Partials {
    pub fn of(attrs: &Attributes, tables: &ScoringTables) -> Self {
        let indicator = |b: bool| if b { ONE } else { ZERO };
        Partials {
            context: [
                tables.context_l1(attrs.meta_l1),
                tables.context_l2type(attrs.meta_l2_type),
            ],
            role: tables.role_id(attrs.info_role, attrs.info_id),
            identity: [
                tables.identity_l2mac(attrs.meta_l2_mac),
                tables.identity_l3(attrs.meta_l3_addr),
                tables.identity_infoid(attrs.info_id),
            ],
            information: [
                tables.info_state(attrs.info_state),
                indicator(attrs.meta_l2_type == attrs.info_type),
                indicator(attrs.info_position == attrs.meta_l1_sig_str),
            ],
        }
    }

    pub fn combine(&self) -> ScoreBreakdown {
        let ts_context = (self.context[0] + self.context[1]) / 2;
        let (ts_identity, identity_weight) = penalized_mean(&self.identity);
        let (ts_information, info_weight) = penalized_mean(&self.information);
        let numerator = ts_context + self.role + ts_identity + ts_information;
        let tscore = numerator / i64::from(4 + identity_weight + info_weight);
        ScoreBreakdown {
            ts_context,
            ts_role: self.role,
            ts_identity,
            ts_experience: None,
            ts_information,
            identity_weight,
            info_weight,
            tscore,
        }
    }
}

/// Sum of partials over (count + number of zero partials).
fn penalized_mean(partials: &[Score]) -> (Score, u32) {
    let zeros = partials.iter().filter(|p| p.is_zero()).count() as u32;
    let sum: Score = partials.iter().sum();
    (sum / (partials.len() as i64 + i64::from(zeros)), zeros)
}

/// Per-stage scores, zero-penalty weights, and the combined TScore.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreBreakdown {
    pub ts_context: Score,
    pub ts_role: Score,
    pub ts_identity: Score,
    /// Always `None` in the standard pipeline.
    pub ts_experience: Option<Score>,
    pub ts_information: Score,
    pub identity_weight: u32,
    pub info_weight: u32,
    pub tscore: Score,
}

impl ScoreBreakdown {
    /// Recomputes the TScore from the stored stage fields.
    pub fn recombined(&self) -> Score {
        (self.ts_context + self.ts_role + self.ts_identity + self.ts_information)
            / i64::from(4 + self.identity_weight + self.info_weight)
    }
}

pub fn score_context(attrs: &Attributes, tables: &ScoringTables) -> Score {
    (tables.context_l1(attrs.meta_l1) + tables.context_l2type(attrs.meta_l2_type)) / 2
}

pub fn score_role(attrs: &Attributes, tables: &ScoringTables) -> Score {
    tables.role_id(attrs.info_role, attrs.info_id)
}

/// Identity score and its zero count.
pub fn score_identity(attrs: &Attributes, tables: &ScoringTables) -> (Score, u32) {
    penalized_mean(&Partials::of(attrs, tables).identity)
}

/// Information score and its zero count.
pub fn score_information(attrs: &Attributes, tables: &ScoringTables) -> (Score, u32) {
    penalized_mean(&Partials::of(attrs, tables).information)
}

pub fn compute_tscore(attrs: &Attributes, tables: &ScoringTables) -> ScoreBreakdown {
    Partials::of(attrs, tables).combine()
}

/// TScore bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// `[0, 0.5)`
    NoTrust,
    /// `[0.5, 0.65]`
    Unclear,
    /// `(0.65, 1]`
    Trust,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::NoTrust, Region::Unclear, Region::Trust];

    pub fn name(self) -> &'static str {
        match self {
            Region::NoTrust => "no-trust",
            Region::Unclear => "unclear",
            Region::Trust => "trust",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const UNCLEAR_LOWER: Score = HALF;
pub const UNCLEAR_UPPER: Score = Ratio::new_raw(13, 20);

pub fn classify_region(tscore: Score) -> Result<Region, PipelineError> {
    if tscore < Score::zero() || tscore > Score::one() {
        return Err(PipelineError::OutOfRange(tscore));
    }
    Ok(if tscore < UNCLEAR_LOWER {
        Region::NoTrust
    } else if tscore <= UNCLEAR_UPPER {
        Region::Unclear
    } else {
        Region::Trust
    })
}

/// What one stage contributes to the combination: a score added to the
/// numerator (or nothing), and extra denominator weight on top of the
/// stage's own unit weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageOutcome {
    pub score: Option<Score>,
    pub extra_weight: u32,
}

impl StageOutcome {
    pub fn not_available() -> Self {
        StageOutcome {
            score: None,
            extra_weight: 0,
        }
    }

    fn weight(&self) -> i64 {
        if self.score.is_some() {
            1 + i64::from(self.extra_weight)
        } else {
            i64::from(self.extra_weight)
        }
    }
}

/// A pluggable verifier in the trust-formation pipeline.
pub trait Stage: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, attrs: &Attributes) -> StageOutcome;
}

struct ContextStage(ScoringTables);
struct RoleStage(ScoringTables);
struct IdentityStage(ScoringTables);
struct ExperienceStage;
struct InformationStage(ScoringTables);

impl Stage for ContextStage {
    fn name(&self) -> &str {
        "context"
    }
    fn evaluate(&self, attrs: &Attributes) -> StageOutcome {
        StageOutcome {
            score: Some(score_context(attrs, &self.0)),
            extra_weight: 0,
        }
    }
}

impl Stage for RoleStage {
    fn name(&self) -> &str {
        "role"
    }
    fn evaluate(&self, attrs: &Attributes) -> StageOutcome {
        StageOutcome {
            score: Some(score_role(attrs, &self.0)),
            extra_weight: 0,
        }
    }
}

impl Stage for IdentityStage {
    fn name(&self) -> &str {
        "identity"
    }
    fn evaluate(&self, attrs: &Attributes) -> StageOutcome {
        let (score, zeros) = score_identity(attrs, &self.0);
        StageOutcome {
            score: Some(score),
            extra_weight: zeros,
        }
    }
}

impl Stage for ExperienceStage {
    fn name(&self) -> &str {
        "experience"
    }
    fn evaluate(&self, _attrs: &Attributes) -> StageOutcome {
        StageOutcome::not_available()
    }
}

impl Stage for InformationStage {
    fn name(&self) -> &str {
        "information"
    }
    fn evaluate(&self, attrs: &Attributes) -> StageOutcome {
        let (score, zeros) = score_information(attrs, &self.0);
        StageOutcome {
            score: Some(score),
            extra_weight: zeros,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageResult {
    pub stage: String,
    pub outcome: StageOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineResult {
    pub stages: Vec<StageResult>,
    pub tscore: Score,
}

/// An ordered sequence of stages combined as
/// `sum(scores) / sum(weights)`.
pub struct Pipeline {
    stages: Vec<Box<dyn Stage>>,
}

impl Pipeline {
    pub fn empty() -> Self {
        Pipeline { stages: Vec::new() }
    }

    /// Context, Role, Identity, Experience (not available), Information.
    pub fn standard(tables: ScoringTables) -> Self {
        Pipeline::empty()
            .with_stage(ContextStage(tables))
            .with_stage(RoleStage(tables))
            .with_stage(IdentityStage(tables))
            .with_stage(ExperienceStage)
            .with_stage(InformationStage(tables))
    }

    pub fn with_stage(mut self, stage: impl Stage + 'static) -> Self {
        self.stages.push(Box::new(stage));
        self
    }

    pub fn stage_names(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.name()).collect()
    }

    pub fn evaluate(&self, attrs: &Attributes) -> Result<PipelineResult, PipelineError> {
        let stages: Vec<StageResult> = self
            .stages
            .iter()
            .map(|s| StageResult {
                stage: s.name().to_owned(),
                outcome: s.evaluate(attrs),
            })
            .collect();
        let numerator: Score = stages.iter().filter_map(|s| s.outcome.score).sum();
        let weight: i64 = stages.iter().map(|s| s.outcome.weight()).sum();
        if weight == 0 {
            return Err(PipelineError::NoContribution);
        }
        Ok(PipelineResult {
            stages,
            tscore: numerator / weight,
        })
    }
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pipeline")
            .field("stages", &self.stage_names())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::SignalClass;

    fn r(n: i64, d: i64) -> Score {
        Ratio::new(n, d)
    }

    fn baseline() -> Attributes {
        Attributes {
            meta_l1: LinkLayer::AdHoc,
            meta_l1_sig_str: SignalClass::Same,
            meta_l2_type: ChannelType::Safety,
            meta_l2_mac: MacIdentity::Valid,
            meta_l3_addr: NetworkAddress::ValidAddr,
            info_role: Role::Vehicle,
            info_id: AppIdentity::StrongValid,
            info_position: SignalClass::Same,
            info_type: ChannelType::Safety,
            info_state: InfoState::Valid,
        }
    }

    #[test]
    fn default_tables_are_on_lattice() {
        ScoringTables::default().validate().unwrap();
        let mut t = ScoringTables::default();
        t.role_id[2][4] = r(1, 3);
        assert!(matches!(
            t.validate(),
            Err(PipelineError::OffLattice { table: "role_id", .. })
        ));
    }

    #[test]
    fn context_examples() {
        let t = ScoringTables::default();
        let a = baseline();
        assert_eq!(score_context(&a, &t), r(5, 8));
        let b = Attributes {
            meta_l1: LinkLayer::Cellular,
            meta_l2_type: ChannelType::Central,
            ..a
        };
        assert_eq!(score_context(&b, &t), r(5, 8));
        let c = Attributes {
            meta_l2_type: ChannelType::Service,
            ..a
        };
        assert_eq!(score_context(&c, &t), r(1, 2));
    }

    #[test]
    fn role_examples() {
        let t = ScoringTables::default();
        let a = baseline();
        let rsu_weak = Attributes {
            info_role: Role::Rsu,
            info_id: AppIdentity::WeakValid,
            ..a
        };
        assert_eq!(score_role(&rsu_weak, &t), r(0, 1));
        assert_eq!(score_role(&a, &t), r(1, 1));
        let mobile_mid = Attributes {
            info_role: Role::Mobile,
            info_id: AppIdentity::MidValid,
            ..a
        };
        assert_eq!(score_role(&mobile_mid, &t), r(1, 2));
        let emergency_mid = Attributes {
            info_role: Role::EmergencyVehicle,
            info_id: AppIdentity::MidValid,
            ..a
        };
        assert_eq!(score_role(&emergency_mid, &t), r(3, 4));
        let service_weak = Attributes {
            info_role: Role::ServiceRole,
            info_id: AppIdentity::WeakValid,
            ..a
        };
        assert_eq!(score_role(&service_weak, &t), r(1, 4));
    }

    #[test]
    fn identity_examples() {
        let t = ScoringTables::default();
        let a = baseline();
        assert_eq!(score_identity(&a, &t), (r(11, 12), 0));
        let bad_mac = Attributes {
            meta_l2_mac: MacIdentity::Invalid,
            ..a
        };
        assert_eq!(score_identity(&bad_mac, &t), (r(7, 16), 1));
        let all_bad = Attributes {
            meta_l2_mac: MacIdentity::Invalid,
            meta_l3_addr: NetworkAddress::InvalidAddr,
            info_id: AppIdentity::WeakInvalid,
            ..a
        };
        assert_eq!(score_identity(&all_bad, &t), (r(0, 1), 3));
    }

    #[test]
    fn information_examples() {
        let t = ScoringTables::default();
        let a = baseline();
        assert_eq!(score_information(&a, &t), (r(1, 1), 0));
        let nv = Attributes {
            info_state: InfoState::NotVerifiable,
            ..a
        };
        assert_eq!(score_information(&nv, &t), (r(5, 6), 0));
        let all_bad = Attributes {
            info_state: InfoState::Invalid,
            info_type: ChannelType::Service,
            info_position: SignalClass::Min,
            ..a
        };
        assert_eq!(score_information(&all_bad, &t), (r(0, 1), 3));
    }

    #[test]
    fn tscore_examples() {
        let t = ScoringTables::default();
        let a = baseline();
        // (5/8 + 1 + 11/12 + 1) / 4
        let b = compute_tscore(&a, &t);
        assert_eq!(b.tscore, r(85, 96));
        assert_eq!(b.ts_experience, None);
        assert_eq!(classify_region(b.tscore), Ok(Region::Trust));

        let bad_mac = Attributes {
            meta_l2_mac: MacIdentity::Invalid,
            ..a
        };
        let b = compute_tscore(&bad_mac, &t);
        assert_eq!(b.identity_weight, 1);
        assert_eq!(b.tscore, r(49, 80));

        let rsu = Attributes {
            meta_l2_type: ChannelType::Service,
            meta_l2_mac: MacIdentity::NotAvailable,
            info_role: Role::Rsu,
            info_id: AppIdentity::WeakValid,
            info_type: ChannelType::Service,
            info_state: InfoState::NotVerifiable,
            ..a
        };
        let b = compute_tscore(&rsu, &t);
        assert_eq!(b.tscore, r(23, 48));
        assert_eq!(classify_region(b.tscore), Ok(Region::NoTrust));
        assert_eq!(rsu.trust_label(), crate::message::TrustLabel::Trustworthy);
    }

    #[test]
    fn region_bounds() {
        assert_eq!(classify_region(r(1, 2)), Ok(Region::Unclear));
        assert_eq!(classify_region(r(13, 20)), Ok(Region::Unclear));
        assert_eq!(classify_region(r(1301, 2000)), Ok(Region::Trust));
        assert_eq!(classify_region(r(4999, 10000)), Ok(Region::NoTrust));
        assert_eq!(classify_region(r(0, 1)), Ok(Region::NoTrust));
        assert_eq!(classify_region(r(1, 1)), Ok(Region::Trust));
        assert!(classify_region(r(-1, 100)).is_err());
        assert!(classify_region(r(101, 100)).is_err());
    }

    #[test]
    fn standard_pipeline_matches_direct_combination() {
        let t = ScoringTables::default();
        let p = Pipeline::standard(t);
        assert_eq!(
            p.stage_names(),
            ["context", "role", "identity", "experience", "information"]
        );
        for attrs in crate::message::attribute_catalog().iter().step_by(97) {
            let res = p.evaluate(&attrs).unwrap();
            let direct = compute_tscore(&attrs, &t);
            assert_eq!(res.tscore, direct.tscore);
            assert_eq!(res.stages[3].outcome, StageOutcome::not_available());
        }
    }

    struct AlwaysHalf;
    impl Stage for AlwaysHalf {
        fn name(&self) -> &str {
            "custom"
        }
        fn evaluate(&self, _attrs: &Attributes) -> StageOutcome {
            StageOutcome {
                score: Some(r(1, 2)),
                extra_weight: 1,
            }
        }
    }

    #[test]
    fn custom_stage_declares_weight() {
        let p = Pipeline::empty().with_stage(AlwaysHalf);
        assert_eq!(p.evaluate(&baseline()).unwrap().tscore, r(1, 4));
        assert_eq!(
            Pipeline::empty().evaluate(&baseline()),
            Err(PipelineError::NoContribution)
        );
        let t = ScoringTables::default();
        let p = Pipeline::standard(t).with_stage(AlwaysHalf);
        // (85/24 + 1/2) / (4 + 2)
        assert_eq!(p.evaluate(&baseline()).unwrap().tscore, r(97, 144));
    }

    #[test]
    fn breakdown_recombines() {
        let t = ScoringTables::default();
        for attrs in crate::message::attribute_catalog().iter().step_by(131) {
            let b = compute_tscore(&attrs, &t);
            assert_eq!(b.recombined(), b.tscore);
        }
    }
}
