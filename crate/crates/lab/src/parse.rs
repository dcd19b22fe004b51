//! Value syntax shared by command-line flags and config files.

use std::f64::consts::PI;

use kink_core::spectral::SectorSelector;
use kink_core::spin::{Anisotropy, SpinQuantum};
use kink_core::C64;

use crate::CliError;

fn invalid(key: &str, value: &str, why: &str) -> CliError {
    CliError::Invalid(format!("{key} = {value:?}: {why}"))
}

/// Comma-separated items, blanks dropped.
pub fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// `"1/2"`, `"3/2"`, `"1"` or a decimal that is a multiple of one half.
pub fn parse_spin(value: &str) -> Result<SpinQuantum, CliError> {
    let twice = match value.split_once('/') {
        Some((num, "2")) => num.trim().parse::<u32>().ok(),
        Some(_) => None,
        None => value.parse::<f64>().ok().and_then(|s| {
            let t = 2.0 * s;
            (t.fract() == 0.0 && t > 0.0 && t < u32::MAX as f64).then_some(t as u32)
        }),
    };
    twice
        .and_then(|t| SpinQuantum::new(t).ok())
        .ok_or_else(|| invalid("spin", value, "expected a positive multiple of 1/2"))
}

pub fn format_spin(spin: SpinQuantum) -> String {
    let t = spin.twice_s();
    if t.is_multiple_of(2) {
        format!("{}", t / 2)
    } else {
        format!("{t}/2")
    }
}

/// Floating-point literal or `pi`-multiple such as `pi/3`, `2pi`, `-pi/7`.
pub fn parse_real(key: &str, value: &str) -> Result<f64, CliError> {
    let v = value.trim();
    if let Ok(x) = v.parse::<f64>() {
        return Ok(x);
    }
    let (sign, body) = match v.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, v),
    };
    let (head, den) = match body.split_once('/') {
        Some((h, d)) => (
            h,
            d.parse::<f64>()
                .map_err(|_| invalid(key, value, "bad denominator"))?,
        ),
        None => (body, 1.0),
    };
    let factor = match head.strip_suffix("pi") {
        Some("") => 1.0,
        Some(f) => f
            .trim_end_matches('*')
            .parse::<f64>()
            .map_err(|_| invalid(key, value, "not a number"))?,
        None => return Err(invalid(key, value, "not a number")),
    };
    Ok(sign * factor * PI / den)
}

pub fn parse_usize(key: &str, value: &str) -> Result<usize, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(key, value, "expected a nonnegative integer"))
}

pub fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

/// Height window `MIN:MAX`.
pub fn parse_window(value: &str) -> Result<(i64, i64), CliError> {
    let (a, b) = value
        .split_once(':')
        .ok_or_else(|| invalid("window", value, "expected MIN:MAX"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<i64>()
            .map_err(|_| invalid("window", value, "bounds must be integers"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// A kink parameter, possibly given relative to the anisotropy as a power of `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZSpec {
    Value(C64),
    /// `c * q^k`.
    QPower {
        coefficient: C64,
        power: i32,
    },
}

impl ZSpec {
    pub fn resolve(self, aniso: Anisotropy) -> C64 {
        match self {
            ZSpec::Value(z) => z,
            ZSpec::QPower { coefficient, power } => coefficient * aniso.q().powi(power),
        }
    }
}

/// Complex numbers as `x`, `x+yi`, `x-yi`, `yi`, polar `r@theta` (theta may use `pi`),
/// or `q`, `q^k`, `1/q`.
pub fn parse_z(value: &str) -> Result<ZSpec, CliError> {
    let v: String = value.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || invalid("z", value, "expected x+yi, r@theta or q^k");
    if v == "q" {
        return Ok(ZSpec::QPower {
            coefficient: C64::new(1.0, 0.0),
            power: 1,
        });
    }
    if v == "1/q" {
        return Ok(ZSpec::QPower {
            coefficient: C64::new(1.0, 0.0),
            power: -1,
        });
    }
    if let Some(k) = v.strip_prefix("q^") {
        let power = k
            .trim_matches(|c| c == '(' || c == ')')
            .parse::<i32>()
            .map_err(|_| bad())?;
        return Ok(ZSpec::QPower {
            coefficient: C64::new(1.0, 0.0),
            power,
        });
    }
    if let Some((r, theta)) = v.split_once('@') {
        let r = r.parse::<f64>().map_err(|_| bad())?;
        return Ok(ZSpec::Value(C64::from_polar(r, parse_real("z", theta)?)));
    }
    let Some(body) = v.strip_suffix('i') else {
        return v
            .parse::<f64>()
            .map(|x| ZSpec::Value(C64::new(x, 0.0)))
            .map_err(|_| bad());
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        s => s.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(ZSpec::Value(C64::new(re, imag(&body[i..])?)))
        }
        None => Ok(ZSpec::Value(C64::new(0.0, imag(body)?))),
    }
}

/// `central`, `one-magnon`, `all`, or an explicit `2M`.
pub fn parse_sector(value: &str) -> Result<SectorSelector, CliError> {
    match value.trim() {
        "central" => Ok(SectorSelector::Central),
        "one-magnon" => Ok(SectorSelector::OneMagnon),
        "all" => Ok(SectorSelector::AllInterior),
        s => s.parse::<i64>().map(SectorSelector::Fixed).map_err(|_| {
            invalid(
                "sector",
                value,
                "expected central, one-magnon, all or an integer 2M",
            )
        }),
    }
}

pub fn format_sector(sel: SectorSelector) -> String {
    match sel {
        SectorSelector::Central => "central".into(),
        SectorSelector::OneMagnon => "one-magnon".into(),
        SectorSelector::AllInterior => "all".into(),
        SectorSelector::Fixed(m) => m.to_string(),
    }
}
