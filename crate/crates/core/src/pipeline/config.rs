//! Run configuration and Hecke data files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::PadicContext;
use crate::tower::{FrobeniusClass, HeckeData, TowerModel, TowerSpec};

/// Suites understood by [`crate::pipeline::run_suites`].
pub const SUITES: &[&str] = &[
    "units",
    "haran",
    "refine",
    "multipliers",
    "theta-ideal",
    "fitting",
    "theorem71",
    "scalars",
];

fn default_p() -> u64 {
    5
}
fn default_prec() -> u32 {
    8
}
fn default_caps() -> (u32, u32) {
    (2, 2)
}
fn default_delta() -> Vec<u64> {
    vec![2]
}
fn default_ap() -> i64 {
    3
}
fn default_seeds() -> u64 {
    5
}
fn default_samples() -> usize {
    100
}
fn default_suites() -> Vec<String> {
    SUITES.iter().map(|s| s.to_string()).collect()
}

/// Where to look up `a_p`: a CSV with columns `curve_label,p,a_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeSource {
    pub csv: PathBuf,
    pub curve: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub text: Option<PathBuf>,
}

/// Everything a run needs. Mirrors the TOML file one to one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_p")]
    pub p: u64,
    #[serde(default = "default_prec", rename = "N")]
    pub prec: u32,
    #[serde(default = "default_caps")]
    pub caps: (u32, u32),
    #[serde(default = "default_delta")]
    pub delta: Vec<u64>,
    /// Hecke eigenvalue at `p`; ignored when `hecke` is set.
    #[serde(default = "default_ap")]
    pub a_p: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hecke: Option<HeckeSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_p: Option<FrobeniusClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_q: Option<FrobeniusClass>,
    /// Base seed; seeded suites use `seed, seed+1, ..., seed+seeds-1`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    /// Number of random instances in sampled suites.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    #[serde(default, skip_serializing_if = "is_default_output")]
    pub output: OutputPaths,
}

fn is_default_output(o: &OutputPaths) -> bool {
    *o == OutputPaths::default()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: default_p(),
            prec: default_prec(),
            caps: default_caps(),
            delta: default_delta(),
            a_p: default_ap(),
            hecke: None,
            sigma_p: None,
            sigma_q: None,
            seed: 0,
            seeds: default_seeds(),
            samples: default_samples(),
            suites: default_suites(),
            output: OutputPaths::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(s).map_err(|e| Error::Invalid(format!("config: {e}")))?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut c = RunConfig::from_toml(&s)?;
        // relative data paths are relative to the config file
        if let (Some(h), Some(dir)) = (c.hecke.as_mut(), path.parent()) {
            if h.csv.is_relative() {
                h.csv = dir.join(&h.csv);
            }
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn ctx(&self) -> Result<PadicContext> {
        PadicContext::new(self.p, self.prec)
    }

    pub fn tower_spec(&self) -> TowerSpec {
        let mut spec = TowerSpec::new(self.p, self.prec, self.caps, self.delta.clone());
        if let Some(s) = &self.sigma_p {
            spec.sigma_p = s.clone();
        }
        if let Some(s) = &self.sigma_q {
            spec.sigma_q = s.clone();
        }
        spec
    }

    pub fn tower(&self) -> Result<TowerModel> {
        TowerModel::build(self.tower_spec())
    }

    /// `a_p` from the Hecke file when one is configured.
    pub fn resolved_ap(&self) -> Result<i64> {
        match &self.hecke {
            None => Ok(self.a_p),
            Some(src) => {
                let rows = read_hecke_csv(&src.csv)?;
                rows.iter()
                    .find(|r| r.curve_label == src.curve && r.p == self.p)
                    .map(|r| r.a_p)
                    .ok_or_else(|| {
                        Error::BadHecke(format!("no row for curve {} at p = {}", src.curve, self.p))
                    })
            }
        }
    }

    pub fn hecke_data(&self) -> Result<HeckeData> {
        HeckeData::from_ap(self.ctx()?, self.resolved_ap()? as i128)
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds).map(|i| self.seed.wrapping_add(i)).collect()
    }

    /// Checks every precondition before a run.
    pub fn validate(&self) -> Result<()> {
        self.ctx()?;
        self.tower()?;
        self.hecke_data()?;
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(Error::Invalid(format!(
                    "unknown suite {s:?}; known suites: {}",
                    SUITES.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// One row of a Hecke eigenvalue table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeRow {
    pub curve_label: String,
    pub p: u64,
    pub a_p: i64,
}

pub fn parse_hecke_csv<R: std::io::Read>(reader: R) -> Result<Vec<HeckeRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::BadHecke(e.to_string())))
        .collect()
}

pub fn read_hecke_csv(path: &Path) -> Result<Vec<HeckeRow>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_hecke_csv(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig {
            caps: (3, 1),
            delta: vec![4],
            suites: vec!["haran".into()],
            ..RunConfig::default()
        };
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let c = RunConfig::from_toml("p = 7\ncaps = [1, 2]\n").unwrap();
        assert_eq!(c.p, 7);
        assert_eq!(c.prec, 8);
        assert_eq!(c.caps, (1, 2));
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_delta = RunConfig { delta: vec![5], ..RunConfig::default() };
        assert!(matches!(bad_delta.validate(), Err(Error::BadDelta { .. })));
        let bad_suite = RunConfig { suites: vec!["nope".into()], ..RunConfig::default() };
        assert!(bad_suite.validate().is_err());
        let supersingular = RunConfig { a_p: 0, ..RunConfig::default() };
        assert!(matches!(supersingular.validate(), Err(Error::BadHecke(_))));
    }

    #[test]
    fn hecke_csv() {
        let data = "curve_label,p,a_p\n11a1,5,1\n11a1,7,-2\n37a1, 5, -2\n";
        let rows = parse_hecke_csv(data.as_bytes()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2], HeckeRow { curve_label: "37a1".into(), p: 5, a_p: -2 });
        assert!(parse_hecke_csv("curve_label,p,a_p\nx,5,y\n".as_bytes()).is_err());
    }
}
