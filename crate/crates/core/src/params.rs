//! Network, timing and slot-duration parameters.
//!
//! Slot durations follow the three channel-status prices used throughout the
//! crate: an idle slot, a success slot (between 1 and `M` transmitters) and a
//! collision slot (more than `M` transmitters). Carrier-sensing networks price
//! them from 802.11 DCF timing; non-carrier-sensing networks make all three
//! equal to one packet airtime.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bits added to CTS/ACK frames per additional recipient when MPR-aware
/// control frames are enabled (one 6-byte MAC address).
pub const MPR_ADDRESS_BITS: f64 = 48.0;

/// Population and link parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// Number of saturated stations `N`.
    pub n: usize,
    /// MPR capability `M`: maximum number of simultaneously decodable packets.
    pub m: usize,
    /// Data rate `R` in bits/second.
    pub rate: f64,
    /// Payload `L` in bits.
    pub payload_bits: f64,
}

impl NetworkParams {
    pub fn new(n: usize, m: usize, rate: f64, payload_bits: f64) -> Result<Self> {
        let p = NetworkParams {
            n,
            m,
            rate,
            payload_bits,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::invalid("N", self.n, "N >= 1"));
        }
        if self.m < 1 {
            return Err(Error::invalid("M", self.m, "M >= 1"));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::invalid("R", self.rate, "R > 0"));
        }
        if !(self.payload_bits > 0.0 && self.payload_bits.is_finite()) {
            return Err(Error::invalid("L", self.payload_bits, "L > 0"));
        }
        Ok(())
    }

    /// Airtime of one payload, `L/R`.
    pub fn payload_airtime(&self) -> f64 {
        self.payload_bits / self.rate
    }

    /// 802.11g reference network: 8184-bit payload at 54 Mb/s.
    pub fn table1(n: usize, m: usize) -> Self {
        NetworkParams {
            n,
            m,
            rate: 54e6,
            payload_bits: 8184.0,
        }
    }
}

/// MAC timing. Control frames are priced as PHY overhead plus their bit
/// length at the basic rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacTimingParams {
    /// Idle-slot detection time `sigma` (s).
    pub sigma: f64,
    pub sifs: f64,
    pub difs: f64,
    /// Propagation delay (s).
    pub delta: f64,
    /// PHY preamble and header airtime (s).
    pub phy_overhead: f64,
    /// Rate used for control frames (bits/s).
    pub basic_rate: f64,
    pub mac_header_bits: f64,
    pub ack_bits: f64,
    pub rts_bits: f64,
    pub cts_bits: f64,
    /// Grow CTS and ACK by one address field per extra recipient.
    pub mpr_frames: bool,
}

impl Default for MacTimingParams {
    fn default() -> Self {
        Self::table1()
    }
}

impl MacTimingParams {
    /// 802.11g values; DIFS is SIFS + 2 sigma and delta defaults to 1 us.
    pub fn table1() -> Self {
        let sigma = 9e-6;
        let sifs = 10e-6;
        MacTimingParams {
            sigma,
            sifs,
            difs: sifs + 2.0 * sigma,
            delta: 1e-6,
            phy_overhead: 26e-6,
            basic_rate: 6e6,
            mac_header_bits: 272.0,
            ack_bits: 112.0,
            rts_bits: 160.0,
            cts_bits: 112.0,
            mpr_frames: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sigma", self.sigma),
            ("sifs", self.sifs),
            ("difs", self.difs),
            ("delta", self.delta),
            ("phy_overhead", self.phy_overhead),
            ("mac_header_bits", self.mac_header_bits),
            ("ack_bits", self.ack_bits),
            ("rts_bits", self.rts_bits),
            ("cts_bits", self.cts_bits),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, v, "value >= 0"));
            }
        }
        if !(self.basic_rate > 0.0 && self.basic_rate.is_finite()) {
            return Err(Error::invalid("basic_rate", self.basic_rate, "basic_rate > 0"));
        }
        if self.sigma <= 0.0 {
            return Err(Error::invalid("sigma", self.sigma, "sigma > 0"));
        }
        Ok(())
    }

    fn extra_address_bits(&self, m: usize) -> f64 {
        if self.mpr_frames {
            MPR_ADDRESS_BITS * m.saturating_sub(1) as f64
        } else {
            0.0
        }
    }

    /// PHY + MAC header airtime `H` at data rate `rate`.
    pub fn header(&self, rate: f64) -> f64 {
        self.phy_overhead + self.mac_header_bits / rate
    }

    pub fn ack(&self, m: usize) -> f64 {
        self.phy_overhead + (self.ack_bits + self.extra_address_bits(m)) / self.basic_rate
    }

    pub fn rts(&self) -> f64 {
        self.phy_overhead + self.rts_bits / self.basic_rate
    }

    pub fn cts(&self, m: usize) -> f64 {
        self.phy_overhead + (self.cts_bits + self.extra_address_bits(m)) / self.basic_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessMode {
    /// Slotted ALOHA: every slot lasts one packet airtime.
    NonCarrierSensing,
    /// 802.11 DCF basic access.
    BasicAccess,
    /// 802.11 DCF with RTS/CTS handshake.
    RtsCts,
}

impl AccessMode {
    pub const ALL: [AccessMode; 3] = [
        AccessMode::NonCarrierSensing,
        AccessMode::BasicAccess,
        AccessMode::RtsCts,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AccessMode::NonCarrierSensing => "aloha",
            AccessMode::BasicAccess => "basic",
            AccessMode::RtsCts => "rts-cts",
        }
    }
}

impl fmt::Display for AccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aloha" | "non-carrier-sensing" | "ncs" => Ok(AccessMode::NonCarrierSensing),
            "basic" | "basic-access" => Ok(AccessMode::BasicAccess),
            "rts-cts" | "rtscts" | "rts" => Ok(AccessMode::RtsCts),
            _ => Err(Error::invalid(
                "mode",
                s,
                "mode in {aloha, basic, rts-cts}",
            )),
        }
    }
}

/// Durations of idle, collision and success backoff slots in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotDurations {
    pub t_idle: f64,
    pub t_coll: f64,
    pub t_succ: f64,
}

impl SlotDurations {
    pub fn new(t_idle: f64, t_coll: f64, t_succ: f64) -> Result<Self> {
        for (name, v) in [("t_idle", t_idle), ("t_coll", t_coll), ("t_succ", t_succ)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, v, "slot duration > 0"));
            }
        }
        Ok(SlotDurations {
            t_idle,
            t_coll,
            t_succ,
        })
    }

    /// All three slots equal to `t`.
    pub fn equal(t: f64) -> Self {
        SlotDurations {
            t_idle: t,
            t_coll: t,
            t_succ: t,
        }
    }

    pub fn is_equal(&self) -> bool {
        self.t_idle == self.t_coll && self.t_coll == self.t_succ
    }

    /// Mean slot length given the probabilities of each channel status.
    pub fn mean(&self, p_idle: f64, p_succ: f64, p_coll: f64) -> f64 {
        p_idle * self.t_idle + p_coll * self.t_coll + p_succ * self.t_succ
    }
}

/// Slot durations for `mode`. `net.m` only matters when `timing.mpr_frames`
/// is set, since it sizes the CTS and ACK address lists.
pub fn slot_durations(
    mode: AccessMode,
    net: &NetworkParams,
    timing: &MacTimingParams,
) -> SlotDurations {
    let data = net.payload_airtime();
    match mode {
        AccessMode::NonCarrierSensing => SlotDurations::equal(data),
        AccessMode::BasicAccess => {
            let h = timing.header(net.rate);
            SlotDurations {
                t_idle: timing.sigma,
                t_succ: h
                    + data
                    + timing.sifs
                    + timing.delta
                    + timing.ack(net.m)
                    + timing.difs
                    + timing.delta,
                t_coll: h + data + timing.difs + timing.delta,
            }
        }
        AccessMode::RtsCts => {
            let h = timing.header(net.rate);
            let handshake = timing.rts()
                + timing.sifs
                + timing.delta
                + timing.cts(net.m)
                + timing.sifs
                + timing.delta;
            SlotDurations {
                t_idle: timing.sigma,
                t_succ: handshake
                    + h
                    + data
                    + timing.sifs
                    + timing.delta
                    + timing.ack(net.m)
                    + timing.difs
                    + timing.delta,
                t_coll: timing.rts() + timing.difs + timing.delta,
            }
        }
    }
}
