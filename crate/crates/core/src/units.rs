// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

//! Conversions between laboratory units and atomic units.
//!
//! Everything inside the crate works in atomic units (e = mₑ = ħ = 1).
//! Conversion happens only at the boundaries: manifests, reports and
//! plotting output.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One atomic unit of time in attoseconds (CODATA 2018).
pub const AU_TIME_AS: f64 = 24.188_843_265_857;

/// One atomic unit of electric field in kV/cm (CODATA 2018: 5.142 206 747 63e11 V/m).
pub const AU_FIELD_KV_PER_CM: f64 = 5.142_206_747_63e6;

/// One Hartree in electron-volts.
pub const HARTREE_EV: f64 = 27.211_386_245_988;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    /// Atomic units, whatever the dimension.
    Atomic,
    Attosecond,
    Femtosecond,
    Picosecond,
    KilovoltPerCm,
    VoltPerCm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Any,
    Time,
    Field,
}

impl Unit {
    fn dimension(self) -> Dimension {
        match self {
            Unit::Atomic => Dimension::Any,
            Unit::Attosecond | Unit::Femtosecond | Unit::Picosecond => Dimension::Time,
            Unit::KilovoltPerCm | Unit::VoltPerCm => Dimension::Field,
        }
    }

    /// Size of one of this unit expressed in atomic units.
    fn in_atomic(self) -> f64 {
        match self {
            Unit::Atomic => 1.0,
            Unit::Attosecond => 1.0 / AU_TIME_AS,
            Unit::Femtosecond => 1.0e3 / AU_TIME_AS,
            Unit::Picosecond => 1.0e6 / AU_TIME_AS,
            Unit::KilovoltPerCm => 1.0 / AU_FIELD_KV_PER_CM,
            Unit::VoltPerCm => 1.0e-3 / AU_FIELD_KV_PER_CM,
        }
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "au" | "a.u." | "atomic" => Ok(Unit::Atomic),
            "as" => Ok(Unit::Attosecond),
            "fs" => Ok(Unit::Femtosecond),
            "ps" => Ok(Unit::Picosecond),
            "kV/cm" | "kv/cm" | "kV-per-cm" => Ok(Unit::KilovoltPerCm),
            "V/cm" | "v/cm" => Ok(Unit::VoltPerCm),
            other => Err(Error::UnknownUnit(other.to_string())),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::Atomic => "au",
            Unit::Attosecond => "as",
            Unit::Femtosecond => "fs",
            Unit::Picosecond => "ps",
            Unit::KilovoltPerCm => "kV/cm",
            Unit::VoltPerCm => "V/cm",
        };
        f.write_str(s)
    }
}

/// Convert `value` from one unit to another. Time and field units do not mix;
/// atomic units pair with either.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    let (a, b) = (from.dimension(), to.dimension());
    if a != Dimension::Any && b != Dimension::Any && a != b {
        return Err(Error::UnknownUnit(format!("{from} -> {to}")));
    }
    Ok(value * from.in_atomic() / to.in_atomic())
}

pub fn ps_to_au(ps: f64) -> f64 {
    ps * Unit::Picosecond.in_atomic()
}

pub fn fs_to_au(fs: f64) -> f64 {
    fs * Unit::Femtosecond.in_atomic()
}

pub fn au_to_ps(t: f64) -> f64 {
    t / Unit::Picosecond.in_atomic()
}

pub fn kv_per_cm_to_au(field: f64) -> f64 {
    field / AU_FIELD_KV_PER_CM
}

pub fn au_to_kv_per_cm(field: f64) -> f64 {
    field * AU_FIELD_KV_PER_CM
}

/// Parse a quantity such as `"10 fs"`, `"1.5kV/cm"` or a bare number (atomic units).
pub fn parse_quantity(text: &str) -> Result<f64> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            c.is_ascii_alphabetic() && !(matches!(c, 'e' | 'E') && is_exponent(text, i))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::UnknownUnit(format!("cannot parse quantity '{text}'")))?;
    let unit = if unit.trim().is_empty() { Unit::Atomic } else { unit.parse()? };
    convert(value, unit, Unit::Atomic)
}

fn is_exponent(text: &str, i: usize) -> bool {
    let bytes = text.as_bytes();
    let prev_digit = i > 0 && (bytes[i - 1].is_ascii_digit() || bytes[i - 1] == b'.');
    let next = bytes.get(i + 1).copied();
    let next_ok = matches!(next, Some(b'0'..=b'9') | Some(b'+') | Some(b'-'));
    prev_digit && next_ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_kv_per_cm() {
        // 1 kV/cm = 1e5 V/m; atomic field = 5.14220674763e11 V/m.
        let au = convert(1.0, Unit::KilovoltPerCm, Unit::Atomic).unwrap();
        assert!((au - 1.0e5 / 5.142_206_747_63e11).abs() < 1e-18);
        assert!((au - 1.9447e-7).abs() < 1e-11);
    }

    #[test]
    fn ten_femtoseconds() {
        assert!((fs_to_au(10.0) - 413.41).abs() < 0.01);
        assert!((ps_to_au(1.0) - 41_341.37).abs() < 0.01);
    }

    #[test]
    fn zero_stays_zero() {
        for u in [Unit::Femtosecond, Unit::Picosecond, Unit::KilovoltPerCm, Unit::VoltPerCm] {
            assert_eq!(convert(0.0, u, Unit::Atomic).unwrap(), 0.0);
        }
    }

    #[test]
    fn unknown_and_mismatched_units() {
        assert!("furlong".parse::<Unit>().is_err());
        assert!(convert(1.0, Unit::Picosecond, Unit::KilovoltPerCm).is_err());
        assert!(parse_quantity("3 parsecs").is_err());
    }

    #[test]
    fn quantities() {
        assert_eq!(parse_quantity("413.41").unwrap(), 413.41);
        assert_eq!(parse_quantity("1e-7").unwrap(), 1e-7);
        assert!((parse_quantity("10 fs").unwrap() - fs_to_au(10.0)).abs() < 1e-12);
        assert!((parse_quantity("2.5e-1ps").unwrap() - ps_to_au(0.25)).abs() < 1e-9);
        assert!((parse_quantity("1 kV/cm").unwrap() - kv_per_cm_to_au(1.0)).abs() < 1e-20);
    }

    proptest::proptest! {
        #[test]
        fn round_trip(v in -1e12f64..1e12) {
            for (a, b) in [(Unit::Picosecond, Unit::Femtosecond), (Unit::KilovoltPerCm, Unit::Atomic),
                           (Unit::Atomic, Unit::Attosecond), (Unit::VoltPerCm, Unit::KilovoltPerCm)] {
                let back = convert(convert(v, a, b).unwrap(), b, a).unwrap();
                proptest::prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(1e-300));
            }
        }
    }
}
