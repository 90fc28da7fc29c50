//! Deterministic discrete-time message-stream simulation.
//!
//! Each step has two phases. In the publish phase every enabled generator,
//! in registration order, publishes its message(s) to a [`BroadcastPipe`].
//! In the consume phase each consumer drains its queue in publication order
//! and scores every message with the trust pipeline.
//!
//! Randomness comes from a single [`SimRng`] (ChaCha8, seeded through
//! `seed_from_u64`) shared by all generators in registration order, so a
//! run is a pure function of its [`SimConfig`].

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::message::{attribute_catalog, Attributes, Message, TrustLabel, FIELD_COUNT};
use crate::pipeline::{compute_tscore, ScoreBreakdown, ScoringTables};

/// Hexadecimal digits of the fractional part of pi.
pub const DEFAULT_SEED: u64 = 0x243F_6A88_85A3_08D3;
pub const DEFAULT_STEPS: u64 = 100;
/// Upper bound on draws per conditioned message.
pub const REJECTION_LIMIT: u64 = 10_000_000;
pub const CONSUMER_NAME: &str = "Consumer RepSys";

pub type SimRng = ChaCha8Rng;

pub fn sim_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("there are no output pipes, no consumers")]
    NoConsumers,
    #[error("no {target} message after {attempts} draws")]
    RejectionLimit { target: TrustLabel, attempts: u64 },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorKind {
    Random,
    RandomGood,
    RandomBad,
    FiftyFifty,
    EnumerateAll,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::Random,
        GeneratorKind::RandomGood,
        GeneratorKind::RandomBad,
        GeneratorKind::FiftyFifty,
        GeneratorKind::EnumerateAll,
    ];

    /// The four stochastic generators run by default.
    pub const STANDARD: [GeneratorKind; 4] = [
        GeneratorKind::Random,
        GeneratorKind::RandomGood,
        GeneratorKind::RandomBad,
        GeneratorKind::FiftyFifty,
    ];

    /// Kebab-case name used on the command line and in output file names.
    pub fn cli_name(self) -> &'static str {
        match self {
            GeneratorKind::Random => "random",
            GeneratorKind::RandomGood => "random-good",
            GeneratorKind::RandomBad => "random-bad",
            GeneratorKind::FiftyFifty => "fifty-fifty",
            GeneratorKind::EnumerateAll => "enumerate-all",
        }
    }

    /// Generator id stamped on every message.
    pub fn generator_id(self) -> &'static str {
        match self {
            GeneratorKind::Random => "Generator Random",
            GeneratorKind::RandomGood => "Generator Random Good",
            GeneratorKind::RandomBad => "Generator Random Bad",
            GeneratorKind::FiftyFifty => "Generator Random Fifty",
            GeneratorKind::EnumerateAll => "Generator All Msg",
        }
    }

    pub fn from_generator_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.generator_id() == id)
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for GeneratorKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.cli_name() == s)
            .ok_or_else(|| SimError::UnknownGenerator(s.to_owned()))
    }
}

fn random_attributes<R: Rng + ?Sized>(rng: &mut R) -> Attributes {
    let catalog = attribute_catalog();
    let sizes = catalog.sizes();
    let mut idx = [0usize; FIELD_COUNT];
    for (slot, size) in idx.iter_mut().zip(sizes) {
        *slot = rng.random_range(0..size);
    }
    catalog.at(idx)
}

/// One message with every attribute drawn independently and uniformly from
/// its catalog list.
pub fn gen_random<R: Rng + ?Sized>(rng: &mut R, t: u64, name: &str) -> Message {
    Message::new(t, name, random_attributes(rng))
}

fn sample_until<R: Rng + ?Sized>(
    rng: &mut R,
    target: TrustLabel,
    limit: u64,
) -> Result<Attributes, SimError> {
    for _ in 0..limit {
        let attrs = random_attributes(rng);
        if attrs.trust_label() == target {
            return Ok(attrs);
        }
    }
    Err(SimError::RejectionLimit {
        target,
        attempts: limit,
    })
}

/// Rejection-samples [`gen_random`] until the label equals `target`.
pub fn gen_conditioned<R: Rng + ?Sized>(
    rng: &mut R,
    t: u64,
    name: &str,
    target: TrustLabel,
) -> Result<Message, SimError> {
    gen_conditioned_with_limit(rng, t, name, target, REJECTION_LIMIT)
}

pub fn gen_conditioned_with_limit<R: Rng + ?Sized>(
    rng: &mut R,
    t: u64,
    name: &str,
    target: TrustLabel,
    limit: u64,
) -> Result<Message, SimError> {
    let attrs = sample_until(rng, target, limit)?;
    Ok(Message::new(t, name, attrs))
}

/// Fair coin for the class, then a conditioned draw.
pub fn gen_fifty_fifty<R: Rng + ?Sized>(
    rng: &mut R,
    t: u64,
    name: &str,
) -> Result<Message, SimError> {
    let target = if rng.random_bool(0.5) {
        TrustLabel::Trustworthy
    } else {
        TrustLabel::Malicious
    };
    gen_conditioned(rng, t, name, target)
}

/// Every attribute combination exactly once in nested-loop order (first
/// field outermost), all at time 0.
pub fn enumerate_all() -> impl Iterator<Item = Message> {
    let name = GeneratorKind::EnumerateAll.generator_id();
    attribute_catalog()
        .iter()
        .map(move |attrs| Message::new(0, name, attrs))
}

/// Handle for one registered consumer queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QueueId(usize);

/// One-to-many delivery: every published item is appended to every
/// registered queue, in publication order.
#[derive(Debug, Clone)]
pub struct BroadcastPipe<T> {
    queues: Vec<VecDeque<T>>,
}

impl<T> Default for BroadcastPipe<T> {
    fn default() -> Self {
        BroadcastPipe { queues: Vec::new() }
    }
}

impl<T: Clone> BroadcastPipe<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn subscribe(&mut self) -> QueueId {
        self.queues.push(VecDeque::new());
        QueueId(self.queues.len() - 1)
    }

    pub fn consumers(&self) -> usize {
        self.queues.len()
    }

    pub fn publish(&mut self, item: T) -> Result<(), SimError> {
        let Some((last, rest)) = self.queues.split_last_mut() else {
            return Err(SimError::NoConsumers);
        };
        for q in rest {
            q.push_back(item.clone());
        }
        last.push_back(item);
        Ok(())
    }

    pub fn pending(&self, id: QueueId) -> usize {
        self.queues[id.0].len()
    }

    pub fn drain(&mut self, id: QueueId) -> impl Iterator<Item = T> + '_ {
        self.queues[id.0].drain(..)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub steps: u64,
    pub generators: Vec<GeneratorKind>,
    pub tables: ScoringTables,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: DEFAULT_SEED,
            steps: DEFAULT_STEPS,
            generators: GeneratorKind::STANDARD.to_vec(),
            tables: ScoringTables::default(),
        }
    }
}

impl SimConfig {
    /// The single-step exhaustive run.
    pub fn enumeration() -> Self {
        SimConfig {
            steps: 1,
            generators: vec![GeneratorKind::EnumerateAll],
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.steps == 0 {
            return Err(SimError::InvalidConfig("steps must be positive".into()));
        }
        if self.generators.is_empty() {
            return Err(SimError::InvalidConfig(
                "at least one generator must be enabled".into(),
            ));
        }
        for (i, g) in self.generators.iter().enumerate() {
            if self.generators[..i].contains(g) {
                return Err(SimError::InvalidConfig(format!(
                    "generator {g} enabled more than once"
                )));
            }
        }
        if self.generators.contains(&GeneratorKind::EnumerateAll) && self.steps != 1 {
            return Err(SimError::InvalidConfig(
                "enumerate-all requires exactly one step".into(),
            ));
        }
        Ok(())
    }
}

/// One consumed message with its label and score breakdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredRecord {
    pub consumer: Arc<str>,
    pub message: Message,
    pub label: TrustLabel,
    pub breakdown: ScoreBreakdown,
    pub seed: u64,
}

/// Runs with the single scoring consumer.
pub fn run_simulation(config: &SimConfig) -> Result<Vec<ScoredRecord>, SimError> {
    let mut per_consumer = run_with_consumers(config, &[CONSUMER_NAME])?;
    Ok(per_consumer.pop().unwrap_or_default())
}

/// Runs with one scoring consumer per name; returns each consumer's records
/// in the order given.
pub fn run_with_consumers(
    config: &SimConfig,
    consumer_names: &[&str],
) -> Result<Vec<Vec<ScoredRecord>>, SimError> {
    config.validate()?;
    let mut rng = sim_rng(config.seed);
    let mut pipe = BroadcastPipe::new();
    let consumers: Vec<(Arc<str>, QueueId)> = consumer_names
        .iter()
        .map(|name| (Arc::from(*name), pipe.subscribe()))
        .collect();
    let mut out: Vec<Vec<ScoredRecord>> = vec![Vec::new(); consumers.len()];

    for t in 0..config.steps {
        for &generator in &config.generators {
            let name = generator.generator_id();
            match generator {
                GeneratorKind::Random => pipe.publish(gen_random(&mut rng, t, name))?,
                GeneratorKind::RandomGood => {
                    pipe.publish(gen_conditioned(&mut rng, t, name, TrustLabel::Trustworthy)?)?
                }
                GeneratorKind::RandomBad => {
                    pipe.publish(gen_conditioned(&mut rng, t, name, TrustLabel::Malicious)?)?
                }
                GeneratorKind::FiftyFifty => pipe.publish(gen_fifty_fifty(&mut rng, t, name)?)?,
                GeneratorKind::EnumerateAll => {
                    for msg in enumerate_all() {
                        pipe.publish(msg)?;
                    }
                }
            }
        }
        for ((consumer, queue), records) in consumers.iter().zip(out.iter_mut()) {
            records.reserve(pipe.pending(*queue));
            for message in pipe.drain(*queue) {
                records.push(score_message(consumer.clone(), message, &config.tables, config.seed));
            }
        }
    }
    Ok(out)
}

pub fn score_message(
    consumer: Arc<str>,
    message: Message,
    tables: &ScoringTables,
    seed: u64,
) -> ScoredRecord {
    let breakdown = compute_tscore(&message.attributes, tables);
    ScoredRecord {
        consumer,
        label: message.trust_label(),
        message,
        breakdown,
        seed,
    }
}
