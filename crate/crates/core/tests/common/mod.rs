//! Independent reference scorer for the exhaustive suites.
//!
//! Works on display names and `f64`, mirrors the reference scoring
//! procedure step by step, and shares no code with the library's scoring
//! path beyond the attribute display names.

#![allow(dead_code)]

use std::collections::HashMap;

pub const L1: [&str; 2] = ["cellular", "ad-hoc"];
pub const SIG: [&str; 4] = ["0", "1", "5", "10"];
pub const L2_TYPE: [&str; 3] = ["central", "service", "safety"];
pub const L2_MAC: [&str; 3] = ["MAC NA", "valid MAC", "invalid MAC"];
pub const L3: [&str; 4] = ["valid IPv6/v4", "invalid IPv6/v4", "valid addr", "invalid addr"];
pub const ROLE: [&str; 5] = ["service role", "RSU", "vehicle", "mobile", "emergency vehicle"];
pub const ID: [&str; 6] = [
    "valid weak id",
    "invalid weak id",
    "valid mid id",
    "invalid mid id",
    "valid strong id",
    "invalid strong id",
];
pub const POSITION: [&str; 4] = ["0", "1", "5", "10"];
pub const INFO_TYPE: [&str; 3] = ["service", "safety", "central"];
pub const STATE: [&str; 3] = ["info valid", "info invalid", "info not verifiable"];

/// One message as ten display names, in field order.
pub type Row<'a> = [&'a str; 10];

pub fn all_rows() -> Vec<Row<'static>> {
    let mut out = Vec::with_capacity(311_040);
    for a in L1 {
        for b in SIG {
            for c in L2_TYPE {
                for d in L2_MAC {
                    for e in L3 {
                        for f in ROLE {
                            for g in ID {
                                for h in POSITION {
                                    for i in INFO_TYPE {
                                        for j in STATE {
                                            out.push([a, b, c, d, e, f, g, h, i, j]);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn is_malicious(m: &Row) -> bool {
    m[3] == "invalid MAC"
        || m[4] == "invalid addr"
        || m[4] == "invalid IPv6/v4"
        || m[6] == "invalid weak id"
        || m[6] == "invalid mid id"
        || m[6] == "invalid strong id"
        || m[9] == "info invalid"
        || m[1] != m[7]
        || m[2] != m[8]
}

pub struct Oracle {
    context: HashMap<&'static str, f64>,
    role: HashMap<(&'static str, &'static str), f64>,
    identity: HashMap<&'static str, f64>,
    info: HashMap<&'static str, f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleScore {
    pub tscore: f64,
    pub context: f64,
    pub role: f64,
    pub identity: f64,
    pub info: f64,
    pub identity_weight: u32,
    pub info_weight: u32,
}

impl Oracle {
    pub fn new() -> Self {
        let context = HashMap::from([
            ("cellular", 0.75),
            ("ad-hoc", 0.5),
            ("central", 0.5),
            ("service", 0.5),
            ("safety", 0.75),
        ]);
        let mut role = HashMap::new();
        for (r, strong, mid, weak) in [
            ("service role", 1.0, 0.5, 0.25),
            ("RSU", 1.0, 0.75, 0.0),
            ("emergency vehicle", 1.0, 0.75, 0.0),
            ("vehicle", 1.0, 0.75, 0.25),
            ("mobile", 1.0, 0.5, 0.25),
        ] {
            role.insert((r, "valid strong id"), strong);
            role.insert((r, "valid mid id"), mid);
            role.insert((r, "valid weak id"), weak);
            role.insert((r, "invalid strong id"), 0.0);
            role.insert((r, "invalid mid id"), 0.0);
            role.insert((r, "invalid weak id"), 0.0);
        }
        let identity = HashMap::from([
            ("MAC NA", 0.5),
            ("valid MAC", 1.0),
            ("invalid MAC", 0.0),
            ("valid IPv6/v4", 1.0),
            ("invalid IPv6/v4", 0.0),
            ("valid addr", 0.75),
            ("invalid addr", 0.0),
            ("valid weak id", 0.5),
            ("invalid weak id", 0.0),
            ("valid mid id", 0.75),
            ("invalid mid id", 0.0),
            ("valid strong id", 1.0),
            ("invalid strong id", 0.0),
        ]);
        let info = HashMap::from([
            ("info valid", 1.0),
            ("info not verifiable", 0.5),
            ("info invalid", 0.0),
        ]);
        Oracle {
            context,
            role,
            identity,
            info,
        }
    }

    pub fn score(&self, m: &Row) -> OracleScore {
        let context = (self.context[m[0]] + self.context[m[2]]) / 2.0;
        let role = self.role[&(m[5], m[6])];

        let p_mac = self.identity[m[3]];
        let p_l3 = self.identity[m[4]];
        let p_id = self.identity[m[6]];
        let mut identity_weight = 0;
        for p in [p_mac, p_l3, p_id] {
            if p == 0.0 {
                identity_weight += 1;
            }
        }
        let identity = (p_mac + p_l3 + p_id) / f64::from(3 + identity_weight);

        let positional = if m[7] == m[1] { 1.0 } else { 0.0 };
        let type_consistency = if m[2] == m[8] { 1.0 } else { 0.0 };
        let state = self.info[m[9]];
        let mut info_weight = 0;
        for p in [state, type_consistency, positional] {
            if p == 0.0 {
                info_weight += 1;
            }
        }
        let info = (state + type_consistency + positional) / f64::from(3 + info_weight);

        let tscore =
            (context + role + identity + info) / f64::from(4 + info_weight + identity_weight);
        OracleScore {
            tscore,
            context,
            role,
            identity,
            info,
            identity_weight,
            info_weight,
        }
    }
}

/// 0 = no-trust, 1 = unclear, 2 = trust.
pub fn region_of(t: f64) -> usize {
    if t < 0.5 {
        0
    } else if t <= 0.65 {
        1
    } else {
        2
    }
}
