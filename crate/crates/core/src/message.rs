//! Message attribute domains, the message record, and the ground-truth
//! trust label.
//!
//! Every enumerated attribute is a closed enum whose display name is the
//! exact text written to result CSVs.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Text did not match any display name of the named attribute domain.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {domain} value {value:?}")]
pub struct ParseAttributeError {
    pub domain: &'static str,
    pub value: String,
}

/// A closed attribute domain.
pub trait Attribute: Copy + Eq + fmt::Debug + 'static {
    /// Domain label used in diagnostics.
    const DOMAIN: &'static str;
    /// Every value, in declaration order.
    const ALL: &'static [Self];

    fn name(self) -> &'static str;

    fn parse_name(text: &str) -> Result<Self, ParseAttributeError> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.name() == text)
            .ok_or_else(|| ParseAttributeError {
                domain: Self::DOMAIN,
                value: text.to_owned(),
            })
    }
}

macro_rules! attribute_enum {
    (
        $(#[$meta:meta])*
        $ty:ident, $domain:literal {
            $( $(#[$vmeta:meta])* $variant:ident => $name:literal ),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $ty {
            $( $(#[$vmeta])* $variant ),+
        }

        impl Attribute for $ty {
            const DOMAIN: &'static str = $domain;
            const ALL: &'static [Self] = &[$($ty::$variant),+];

            fn name(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = ParseAttributeError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::parse_name(s)
            }
        }
    };
}

attribute_enum! {
    /// Link-layer technology the message arrived over.
    LinkLayer, "link layer" {
        Cellular => "cellular",
        AdHoc => "ad-hoc",
    }
}

attribute_enum! {
    /// Channel / information type. Used both for the layer-2 channel type
    /// and the declared information type.
    ChannelType, "channel type" {
        Central => "central",
        Service => "service",
        Safety => "safety",
    }
}

attribute_enum! {
    MacIdentity, "link identity" {
        NotAvailable => "MAC NA",
        Valid => "valid MAC",
        Invalid => "invalid MAC",
    }
}

attribute_enum! {
    NetworkAddress, "network identity" {
        ValidIp => "valid IPv6/v4",
        InvalidIp => "invalid IPv6/v4",
        ValidAddr => "valid addr",
        InvalidAddr => "invalid addr",
    }
}

attribute_enum! {
    Role, "role" {
        ServiceRole => "service role",
        Rsu => "RSU",
        Vehicle => "vehicle",
        Mobile => "mobile",
        EmergencyVehicle => "emergency vehicle",
    }
}

attribute_enum! {
    /// Application-level identity: strength and validity.
    AppIdentity, "application identity" {
        WeakValid => "valid weak id",
        WeakInvalid => "invalid weak id",
        MidValid => "valid mid id",
        MidInvalid => "invalid mid id",
        StrongValid => "valid strong id",
        StrongInvalid => "invalid strong id",
    }
}

attribute_enum! {
    InfoState, "information state" {
        Valid => "info valid",
        Invalid => "info invalid",
        NotVerifiable => "info not verifiable",
    }
}

/// Signal-strength / claimed-position class. The codes are opaque; the only
/// meaningful operation is equality between the measured signal class and
/// the claimed position class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalClass {
    NotAvailable,
    Same,
    Half,
    Min,
}

impl SignalClass {
    pub fn code(self) -> u8 {
        match self {
            SignalClass::NotAvailable => 0,
            SignalClass::Same => 1,
            SignalClass::Half => 5,
            SignalClass::Min => 10,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.code() == code)
    }
}

impl Attribute for SignalClass {
    const DOMAIN: &'static str = "signal class";
    const ALL: &'static [Self] = &[
        SignalClass::NotAvailable,
        SignalClass::Same,
        SignalClass::Half,
        SignalClass::Min,
    ];

    fn name(self) -> &'static str {
        match self {
            SignalClass::NotAvailable => "0",
            SignalClass::Same => "1",
            SignalClass::Half => "5",
            SignalClass::Min => "10",
        }
    }
}

impl fmt::Display for SignalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalClass {
    type Err = ParseAttributeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_name(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrustLabel {
    Trustworthy,
    Malicious,
}

impl TrustLabel {
    pub const ALL: [TrustLabel; 2] = [TrustLabel::Trustworthy, TrustLabel::Malicious];

    pub fn name(self) -> &'static str {
        match self {
            TrustLabel::Trustworthy => "trustworthy",
            TrustLabel::Malicious => "malicious",
        }
    }
}

impl fmt::Display for TrustLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrustLabel {
    type Err = ParseAttributeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TrustLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| ParseAttributeError {
                domain: "trust label",
                value: s.to_owned(),
            })
    }
}

/// The ten enumerated metadata and information attributes of a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Attributes {
    pub meta_l1: LinkLayer,
    pub meta_l1_sig_str: SignalClass,
    pub meta_l2_type: ChannelType,
    pub meta_l2_mac: MacIdentity,
    pub meta_l3_addr: NetworkAddress,
    pub info_role: Role,
    pub info_id: AppIdentity,
    pub info_position: SignalClass,
    pub info_type: ChannelType,
    pub info_state: InfoState,
}

impl Attributes {
    /// Ground-truth label: malicious as soon as any identity is invalid,
    /// the information is known to be invalid, or the claimed position or
    /// type disagrees with what the lower layers observed.
    pub fn trust_label(&self) -> TrustLabel {
        let malicious = self.meta_l2_mac == MacIdentity::Invalid
            || matches!(
                self.meta_l3_addr,
                NetworkAddress::InvalidIp | NetworkAddress::InvalidAddr
            )
            || matches!(
                self.info_id,
                AppIdentity::WeakInvalid | AppIdentity::MidInvalid | AppIdentity::StrongInvalid
            )
            || self.info_state == InfoState::Invalid
            || self.meta_l1_sig_str != self.info_position
            || self.meta_l2_type != self.info_type;
        if malicious {
            TrustLabel::Malicious
        } else {
            TrustLabel::Trustworthy
        }
    }
}

/// A simulated PDU: ten attributes plus time, emitter and payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    pub time: u64,
    pub generator_id: String,
    pub attributes: Attributes,
    pub payload_text: String,
}

impl Message {
    pub fn new(time: u64, generator_id: impl Into<String>, attributes: Attributes) -> Self {
        let generator_id = generator_id.into();
        let payload_text = format!("{generator_id} says hello at {time}");
        Message {
            time,
            generator_id,
            attributes,
            payload_text,
        }
    }

    pub fn trust_label(&self) -> TrustLabel {
        self.attributes.trust_label()
    }
}

pub fn derive_trust_label(msg: &Message) -> TrustLabel {
    msg.trust_label()
}

/// Ordered value lists for the ten enumerated fields. Random and exhaustive
/// generators draw exclusively from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttributeCatalog {
    pub meta_l1: &'static [LinkLayer],
    pub meta_l1_sig_str: &'static [SignalClass],
    pub meta_l2_type: &'static [ChannelType],
    pub meta_l2_mac: &'static [MacIdentity],
    pub meta_l3_addr: &'static [NetworkAddress],
    pub info_role: &'static [Role],
    pub info_id: &'static [AppIdentity],
    pub info_position: &'static [SignalClass],
    pub info_type: &'static [ChannelType],
    pub info_state: &'static [InfoState],
}

/// Number of enumerated fields on a message.
pub const FIELD_COUNT: usize = 10;

static CATALOG: AttributeCatalog = AttributeCatalog {
    meta_l1: LinkLayer::ALL,
    meta_l1_sig_str: SignalClass::ALL,
    meta_l2_type: ChannelType::ALL,
    meta_l2_mac: MacIdentity::ALL,
    meta_l3_addr: NetworkAddress::ALL,
    info_role: Role::ALL,
    info_id: AppIdentity::ALL,
    info_position: SignalClass::ALL,
    // the information type list is ordered differently from the channel list
    info_type: &[ChannelType::Service, ChannelType::Safety, ChannelType::Central],
    info_state: InfoState::ALL,
};

pub fn attribute_catalog() -> &'static AttributeCatalog {
    &CATALOG
}

impl AttributeCatalog {
    /// Per-field domain sizes, in field order.
    pub fn sizes(&self) -> [usize; FIELD_COUNT] {
        [
            self.meta_l1.len(),
            self.meta_l1_sig_str.len(),
            self.meta_l2_type.len(),
            self.meta_l2_mac.len(),
            self.meta_l3_addr.len(),
            self.info_role.len(),
            self.info_id.len(),
            self.info_position.len(),
            self.info_type.len(),
            self.info_state.len(),
        ]
    }

    /// Size of the full cross product.
    pub fn combinations(&self) -> usize {
        self.sizes().iter().product()
    }

    /// Builds the attribute set selected by one index per field.
    ///
    /// Panics if an index is outside its field's list.
    pub fn at(&self, idx: [usize; FIELD_COUNT]) -> Attributes {
        Attributes {
            meta_l1: self.meta_l1[idx[0]],
            meta_l1_sig_str: self.meta_l1_sig_str[idx[1]],
            meta_l2_type: self.meta_l2_type[idx[2]],
            meta_l2_mac: self.meta_l2_mac[idx[3]],
            meta_l3_addr: self.meta_l3_addr[idx[4]],
            info_role: self.info_role[idx[5]],
            info_id: self.info_id[idx[6]],
            info_position: self.info_position[idx[7]],
            info_type: self.info_type[idx[8]],
            info_state: self.info_state[idx[9]],
        }
    }

    /// Attribute set at a mixed-radix position of the cross product, with
    /// the first field most significant (nested-loop order).
    pub fn nth(&self, mut n: usize) -> Option<Attributes> {
        if n >= self.combinations() {
            return None;
        }
        let sizes = self.sizes();
        let mut idx = [0; FIELD_COUNT];
        for (slot, size) in idx.iter_mut().zip(sizes).rev() {
            *slot = n % size;
            n /= size;
        }
        Some(self.at(idx))
    }

    /// Every attribute combination exactly once, last field varying fastest.
    pub fn iter(&self) -> impl Iterator<Item = Attributes> + '_ {
        (0..self.combinations()).map(move |n| self.nth(n).expect("index below combination count"))
    }
}
