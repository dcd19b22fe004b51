//! Run configuration: a flat TOML file merged with command-line flags.
//!
//! Every key accepts either native TOML values or the flag syntax as a string, so
//! `spin = "1/2"`, `delta = 2.0`, `length = [4, 6, 8]` and `length = "4,6,8"` all work.
//! The file must carry `schema_version = 1` and may name its `experiment`.

use std::collections::BTreeMap;
use std::path::Path;

use kink_core::spectral::SectorSelector;
use kink_core::spin::{q_from_delta, Anisotropy, SpinQuantum};

use crate::parse::{
    parse_bool, parse_real, parse_sector, parse_spin, parse_usize, parse_window, parse_z,
    split_list, ZSpec,
};
use crate::CliError;

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    VerifyKink,
    Interface2d,
    Profile,
    GapScan,
    Qsos,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyKink => "verify-kink",
            Experiment::Interface2d => "interface-2d",
            Experiment::Profile => "profile",
            Experiment::GapScan => "gap-scan",
            Experiment::Qsos => "qsos",
        }
    }

    /// Keys meaningful for this experiment; anything else is rejected.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::VerifyKink => &[
                "spin", "delta", "length", "z", "tol", "field", "antikink", "out", "strict",
            ],
            Experiment::Interface2d => &[
                "spin", "delta", "width", "height", "z", "tol", "out", "strict",
            ],
            Experiment::Profile => &["spin", "delta", "length", "z", "antikink", "out", "strict"],
            Experiment::GapScan => &[
                "spin", "delta", "length", "width", "height", "field", "antikink", "sector",
                "solver", "tol", "seed", "out", "strict",
            ],
            Experiment::Qsos => &[
                "spin", "delta", "width", "length", "window", "phase", "tol", "out", "strict",
            ],
        }
    }
}

/// Raw merged values, one list of tokens per key, in flag syntax.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub experiment: Experiment,
    values: BTreeMap<String, Vec<String>>,
}

fn tokens(key: &str, value: &toml::Value) -> Result<Vec<String>, CliError> {
    Ok(match value {
        toml::Value::String(s) => split_list(s),
        toml::Value::Integer(i) => vec![i.to_string()],
        toml::Value::Float(f) => vec![f.to_string()],
        toml::Value::Boolean(b) => vec![b.to_string()],
        toml::Value::Array(items) => {
            let mut out = Vec::new();
            for item in items {
                if item.is_array() {
                    return Err(CliError::Invalid(format!(
                        "{key}: nested arrays are not allowed"
                    )));
                }
                out.extend(tokens(key, item)?);
            }
            out
        }
        _ => return Err(CliError::Invalid(format!("{key}: unsupported value type"))),
    })
}

impl Settings {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            values: BTreeMap::new(),
        }
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        self.load_str(&text)
    }

    pub fn load_str(&mut self, text: &str) -> Result<(), CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Invalid(format!("config is not valid TOML: {e}")))?;
        match table.get("schema_version") {
            Some(toml::Value::Integer(SCHEMA_VERSION)) => {}
            Some(other) => {
                return Err(CliError::Invalid(format!(
                    "unsupported schema_version {other}, expected {SCHEMA_VERSION}"
                )))
            }
            None => return Err(CliError::Invalid("config lacks schema_version".into())),
        }
        for (key, value) in &table {
            match key.as_str() {
                "schema_version" => {}
                "experiment" => {
                    if value.as_str() != Some(self.experiment.name()) {
                        return Err(CliError::Invalid(format!(
                            "config is for experiment {value}, not {}",
                            self.experiment.name()
                        )));
                    }
                }
                _ => {
                    let t = tokens(key, value)?;
                    self.values.insert(key.clone(), t);
                }
            }
        }
        Ok(())
    }

    /// Replaces the value of `key`; command-line flags go through here after the file.
    pub fn set(&mut self, key: &str, values: Vec<String>) {
        self.values.insert(key.to_string(), values);
    }

    pub fn set_one(&mut self, key: &str, value: &str) {
        self.set(key, split_list(value));
    }

    /// Rejects keys the experiment does not use.
    pub fn validate_keys(&self) -> Result<(), CliError> {
        let allowed = self.experiment.keys();
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Invalid(format!(
                "key {k:?} does not apply to {}",
                self.experiment.name()
            ))),
            None => Ok(()),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn list(&self, key: &str) -> &[String] {
        self.values.get(key).map_or(&[], Vec::as_slice)
    }

    fn one(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.list(key) {
            [] => Ok(None),
            [v] => Ok(Some(v.as_str())),
            _ => Err(CliError::Invalid(format!(
                "{key} takes a single value here"
            ))),
        }
    }

    pub fn spins(&self, default: SpinQuantum) -> Result<Vec<SpinQuantum>, CliError> {
        self.parsed_list("spin", parse_spin, default)
    }

    pub fn spin(&self, default: SpinQuantum) -> Result<SpinQuantum, CliError> {
        self.one("spin")?.map_or(Ok(default), parse_spin)
    }

    /// Anisotropies with `delta >= 1`, or `delta > 1` when `strict_above_one`.
    pub fn anisotropies(
        &self,
        default: f64,
        strict_above_one: bool,
    ) -> Result<Vec<Anisotropy>, CliError> {
        let deltas = self.parsed_list("delta", |v| parse_real("delta", v), default)?;
        deltas
            .into_iter()
            .map(|d| check_delta(d, strict_above_one))
            .collect()
    }

    pub fn anisotropy(&self, default: f64, strict_above_one: bool) -> Result<Anisotropy, CliError> {
        let d = self
            .one("delta")?
            .map_or(Ok(default), |v| parse_real("delta", v))?;
        check_delta(d, strict_above_one)
    }

    pub fn sizes(&self, key: &str) -> Result<Vec<usize>, CliError> {
        self.list(key).iter().map(|v| parse_usize(key, v)).collect()
    }

    pub fn size(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.one(key)?.map_or(Ok(default), |v| parse_usize(key, v))
    }

    pub fn zs(&self, default: ZSpec) -> Result<Vec<ZSpec>, CliError> {
        self.parsed_list("z", parse_z, default)
    }

    pub fn real(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.one(key)?.map_or(Ok(default), |v| parse_real(key, v))
    }

    pub fn optional_real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.one(key)?.map(|v| parse_real(key, v)).transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        self.one(key)?.map_or(Ok(false), |v| parse_bool(key, v))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.one("seed")?.map_or(Ok(0x5eed), |v| {
            v.parse().map_err(|_| {
                CliError::Invalid(format!("seed = {v:?}: expected an unsigned integer"))
            })
        })
    }

    pub fn window(&self, default: (i64, i64)) -> Result<(i64, i64), CliError> {
        self.one("window")?.map_or(Ok(default), parse_window)
    }

    pub fn sector(&self, default: SectorSelector) -> Result<SectorSelector, CliError> {
        self.one("sector")?.map_or(Ok(default), parse_sector)
    }

    pub fn text(&self, key: &str) -> Result<Option<&str>, CliError> {
        self.one(key)
    }

    fn parsed_list<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, CliError>,
        default: T,
    ) -> Result<Vec<T>, CliError> {
        let items = self.list(key);
        if items.is_empty() {
            return if self.has(key) {
                Err(CliError::Invalid(format!("{key} is empty")))
            } else {
                Ok(vec![default])
            };
        }
        items.iter().map(|v| parse(v)).collect()
    }
}

fn check_delta(delta: f64, strict_above_one: bool) -> Result<Anisotropy, CliError> {
    if strict_above_one && (delta.is_nan() || delta <= 1.0) {
        return Err(CliError::Invalid(format!(
            "delta = {delta}: this experiment needs delta > 1"
        )));
    }
    q_from_delta(delta).map_err(|e| CliError::Invalid(format!("delta = {delta}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_overrides() {
        let mut s = Settings::new(Experiment::GapScan);
        s.load_str("schema_version = 1\nexperiment = \"gap-scan\"\nlength = [4, 6]\ndelta = 2.0\nspin = \"1/2\"\n")
            .unwrap();
        assert_eq!(s.sizes("length").unwrap(), [4, 6]);
        s.set_one("length", "8,10");
        assert_eq!(s.sizes("length").unwrap(), [8, 10]);
        assert_eq!(s.anisotropy(1.5, false).unwrap().delta(), 2.0);
        s.validate_keys().unwrap();
    }

    #[test]
    fn schema_is_enforced() {
        let mut s = Settings::new(Experiment::Qsos);
        assert!(s.load_str("width = 2").is_err());
        assert!(s.load_str("schema_version = 2").is_err());
        assert!(s
            .load_str("schema_version = 1\nexperiment = \"profile\"")
            .is_err());
        s.load_str("schema_version = 1\nantikink = true").unwrap();
        assert!(s.validate_keys().is_err());
    }

    #[test]
    fn deltas_are_validated() {
        let mut s = Settings::new(Experiment::VerifyKink);
        s.set_one("delta", "0.5");
        assert!(s.anisotropies(2.0, false).is_err());
        s.set_one("delta", "1");
        assert!(s.anisotropies(2.0, false).is_ok());
        assert!(s.anisotropies(2.0, true).is_err());
        s.set("delta", Vec::new());
        assert!(s.anisotropies(2.0, false).is_err());
    }
}
