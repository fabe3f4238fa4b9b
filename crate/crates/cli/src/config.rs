//! Run configuration: a TOML file with a `[papr]` and a `[ber]` section.
//!
//! Each section takes the experiment keys (`M`, `packets`, `rrc_beta`, ...)
//! plus `N` (a number or a list) and `schemes`. One experiment runs per
//! (N, scheme) pair. The seed lives at the top level.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use ifdma::waveform::{ExperimentConfig, Scheme, StreamGain};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use toml::{Table, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub subcarriers: Vec<usize>,
    pub schemes: Vec<Scheme>,
    /// Every other experiment setting; its `N`, `scheme` and `master_seed`
    /// are overwritten per run.
    pub base: ExperimentConfig,
}

impl Sweep {
    /// One experiment per (N, scheme), N-major.
    pub fn experiments(&self, seed: u64) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &n in &self.subcarriers {
            for &scheme in &self.schemes {
                out.push(ExperimentConfig { subcarriers: n, scheme, master_seed: seed, ..self.base.clone() });
            }
        }
        out
    }

    fn papr_default() -> Self {
        Sweep { subcarriers: vec![4, 5, 7], schemes: Scheme::ALL.to_vec(), base: ExperimentConfig::default() }
    }

    fn ber_default() -> Self {
        Sweep {
            subcarriers: vec![127],
            schemes: Scheme::ALL.to_vec(),
            base: ber_base(),
        }
    }
}

fn ber_base() -> ExperimentConfig {
    ExperimentConfig {
        band_size: 128,
        subcarriers: 127,
        snr_db_grid: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
        stream_gain: StreamGain::EqualSymbolEnergy,
        ..ExperimentConfig::default()
    }
}

impl Serialize for Sweep {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut table = Table::try_from(&self.base).map_err(serde::ser::Error::custom)?;
        for key in ["N", "scheme", "master_seed"] {
            table.remove(key);
        }
        let mut map = serializer.serialize_map(Some(table.len() + 2))?;
        map.serialize_entry("N", &self.subcarriers)?;
        map.serialize_entry("schemes", &self.schemes)?;
        for (k, v) in &table {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub papr: Sweep,
    pub ber: Sweep,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { master_seed: None, papr: Sweep::papr_default(), ber: Sweep::ber_default() }
    }
}

/// Keys that were not recognized, with their dotted paths.
#[derive(Debug)]
pub struct UnknownKeys(pub Vec<String>);

impl fmt::Display for UnknownKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown configuration keys: {}", self.0.join(", "))
    }
}

impl std::error::Error for UnknownKeys {}

fn experiment_keys() -> BTreeSet<String> {
    let full = ExperimentConfig { samples_per_ofdm_symbol_with_cp: Some(0), clipping_alpha: Some(1.0), ..Default::default() };
    let mut keys: BTreeSet<String> = Table::try_from(&full).expect("config serializes").keys().cloned().collect();
    for k in ["N", "scheme", "master_seed"] {
        keys.remove(k);
    }
    keys
}

impl RunConfig {
    /// Read a TOML file, or a JSON file holding the `config` echo of a
    /// previous run.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let table = if path.extension().is_some_and(|e| e == "json") {
            let json: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
            match Value::try_from(json).context("configuration must be an object")? {
                Value::Table(t) => t,
                _ => anyhow::bail!("configuration must be an object"),
            }
        } else {
            text.parse::<Table>().with_context(|| format!("cannot parse {}", path.display()))?
        };
        Self::from_table(table)
    }

    pub fn from_table(mut table: Table) -> Result<Self> {
        let mut unknown = Vec::new();
        let allowed = experiment_keys();
        let master_seed = match table.remove("master_seed") {
            Some(v) => Some(
                v.as_integer()
                    .and_then(|i| u64::try_from(i).ok())
                    .context("master_seed must be a non-negative integer")?,
            ),
            None => None,
        };
        let mut sections = [(Sweep::papr_default(), "papr"), (Sweep::ber_default(), "ber")];
        let mut raw = Vec::new();
        for (_, name) in &sections {
            match table.remove(*name) {
                Some(Value::Table(t)) => raw.push(Some(t)),
                Some(_) => anyhow::bail!("[{name}] must be a table"),
                None => raw.push(None),
            }
        }
        unknown.extend(table.keys().cloned());
        for ((sweep, name), section) in sections.iter_mut().zip(raw) {
            if let Some(section) = section {
                match parse_sweep(section, sweep, &allowed) {
                    Ok(bad) => unknown.extend(bad.into_iter().map(|k| format!("{name}.{k}"))),
                    Err(e) => return Err(e.context(format!("in [{name}]"))),
                }
            }
        }
        if !unknown.is_empty() {
            return Err(UnknownKeys(unknown).into());
        }
        let [(papr, _), (ber, _)] = sections;
        Ok(RunConfig { master_seed, papr, ber })
    }
}

/// Fill `sweep` from `section`, returning the keys it does not know.
fn parse_sweep(mut section: Table, sweep: &mut Sweep, allowed: &BTreeSet<String>) -> Result<Vec<String>> {
    if let Some(n) = section.remove("N") {
        sweep.subcarriers = match n {
            Value::Array(items) => items
                .into_iter()
                .map(|v| v.try_into::<usize>().context("N entries must be positive integers"))
                .collect::<Result<_>>()?,
            other => vec![other.try_into::<usize>().context("N must be an integer or a list")?],
        };
    }
    if let Some(s) = section.remove("schemes") {
        sweep.schemes = s.try_into().context("schemes must be a list of multi-ifdma, lfdma, ofdma")?;
    }
    let unknown: Vec<String> = section.keys().filter(|k| !allowed.contains(*k)).cloned().collect();
    if !unknown.is_empty() {
        return Ok(unknown);
    }
    let mut merged = Table::try_from(&sweep.base)?;
    merged.extend(section);
    sweep.base = merged.try_into()?;
    if sweep.subcarriers.is_empty() {
        anyhow::bail!("N must list at least one value");
    }
    if sweep.schemes.is_empty() {
        anyhow::bail!("schemes must list at least one scheme");
    }
    Ok(Vec::new())
}
