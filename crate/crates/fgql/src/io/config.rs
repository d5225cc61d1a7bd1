//! Flat `key=value` configuration files and their typed interpretation.
//!
//! Every key mirrors a command-line flag; flags win on conflict, which the
//! CLI implements by overlaying flag values onto the parsed map before the
//! typed readers run.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::schedule::{default_schedule, Regime, TuningSchedule};
use crate::sim::{
    DesignCovariance, ErrorFamily, GroupLayout, SimulationScenario, StudyDirection,
    StudyKind, StudySweep,
};

/// Parsed configuration: string keys to string values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Inserts or overwrites; used by the CLI to let flags win.
    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("missing required key '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("key '{key}': '{v}' is not a number")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("key '{key}': '{v}' is not a nonnegative integer"))
                })
            })
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>().map_err(|_| {
                    Error::Parse(format!("key '{key}': '{v}' is not a nonnegative integer"))
                })
            })
            .transpose()
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| {
                            Error::Parse(format!("key '{key}': '{s}' is not a number"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<usize>().map_err(|_| {
                            Error::Parse(format!("key '{key}': '{s}' is not an integer"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Parses `key=value` lines; `#` comments and blank lines are skipped.
/// Duplicate keys are rejected.
pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("line {}: expected 'key=value'", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
        }
        if map.entries.contains_key(key) {
            return Err(Error::Parse(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
        map.entries.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

/// Builds a simulation scenario from configuration keys.
///
/// Layout keys: `layout=fixed` with `group_sizes` and `beta`, or
/// `layout=growing` with `c`, `d`, and `active_values`. Error keys:
/// `error=normal|student_t|laplace|degenerate` with `error_sd`, `error_df`,
/// or `error_scale`. Design keys: `design=identity|ar1` with `ar1_rho`.
pub fn scenario_from_config(cfg: &ConfigMap) -> Result<SimulationScenario> {
    let layout = match cfg.get("layout").unwrap_or("fixed") {
        "fixed" => {
            let group_sizes = cfg
                .usize_list("group_sizes")?
                .ok_or_else(|| Error::Parse("fixed layout needs 'group_sizes'".into()))?;
            let true_beta = cfg
                .f64_list("beta")?
                .ok_or_else(|| Error::Parse("fixed layout needs 'beta'".into()))?;
            if group_sizes.iter().sum::<usize>() != true_beta.len() {
                return Err(Error::Parse(format!(
                    "'beta' has {} entries but 'group_sizes' sums to {}",
                    true_beta.len(),
                    group_sizes.iter().sum::<usize>()
                )));
            }
            GroupLayout::Fixed {
                group_sizes,
                true_beta,
            }
        }
        "growing" => GroupLayout::Growing {
            c: cfg
                .f64("c")?
                .ok_or_else(|| Error::Parse("growing layout needs 'c'".into()))?,
            d: cfg.usize("d")?.unwrap_or(1),
            active_values: cfg
                .f64_list("active_values")?
                .ok_or_else(|| Error::Parse("growing layout needs 'active_values'".into()))?,
        },
        other => {
            return Err(Error::Parse(format!(
                "unknown layout '{other}', expected 'fixed' or 'growing'"
            )))
        }
    };
    let design = match cfg.get("design").unwrap_or("identity") {
        "identity" => DesignCovariance::Identity,
        "ar1" => DesignCovariance::Ar1 {
            rho: cfg
                .f64("ar1_rho")?
                .ok_or_else(|| Error::Parse("ar1 design needs 'ar1_rho'".into()))?,
        },
        other => {
            return Err(Error::Parse(format!(
                "unknown design '{other}', expected 'identity' or 'ar1'"
            )))
        }
    };
    let error = match cfg.get("error").unwrap_or("normal") {
        "normal" => ErrorFamily::Normal {
            sd: cfg.f64_or("error_sd", 1.0)?,
        },
        "student_t" => ErrorFamily::StudentT {
            df: cfg.f64_or("error_df", 3.0)?,
        },
        "laplace" => ErrorFamily::Laplace {
            scale: cfg.f64_or("error_scale", 1.0)?,
        },
        "degenerate" => ErrorFamily::Degenerate,
        other => {
            return Err(Error::Parse(format!(
                "unknown error family '{other}'"
            )))
        }
    };
    Ok(SimulationScenario {
        layout,
        design,
        error,
        tau: cfg.f64_or("tau", 0.5)?,
        seed: cfg.u64("seed")?.unwrap_or(0),
        alpha: cfg.f64_or("alpha", 0.0)?,
    })
}

/// Reads the schedule keys (`schedule=fixed|growing`, `gamma`, `c`,
/// `alpha`, optional `exponent`, `kappa1`, `kappa2`).
///
/// Without an explicit `exponent`, the default feasible midpoint exponent
/// for the regime is used.
pub fn schedule_from_config(cfg: &ConfigMap) -> Result<TuningSchedule> {
    let regime = match cfg.get("schedule").unwrap_or("fixed") {
        "fixed" => Regime::FixedP,
        "growing" => Regime::GrowingP,
        other => {
            return Err(Error::Parse(format!(
                "unknown schedule '{other}', expected 'fixed' or 'growing'"
            )))
        }
    };
    let gamma = cfg.f64_or("gamma", 1.0)?;
    let c = cfg.f64_or("c", 0.0)?;
    let alpha = cfg.f64_or("alpha", 0.0)?;
    let mut schedule = match cfg.f64("exponent")? {
        Some(exponent) => TuningSchedule {
            regime,
            exponent,
            kappa1: 1.0,
            kappa2: 1.0,
            gamma,
            c: if regime == Regime::FixedP { 0.0 } else { c },
            alpha: if regime == Regime::FixedP { 0.0 } else { alpha },
        },
        None => default_schedule(2, gamma, regime, c, alpha)?.0,
    };
    schedule.kappa1 = cfg.f64_or("kappa1", 1.0)?;
    schedule.kappa2 = cfg.f64_or("kappa2", 1.0)?;
    Ok(schedule)
}

/// Reads the sweep keys `n_values` (or single `n`) and `reps`.
pub fn sweep_from_config(cfg: &ConfigMap) -> Result<StudySweep> {
    let default = StudySweep::default();
    let n_values = match cfg.usize_list("n_values")? {
        Some(v) => v,
        None => match cfg.usize("n")? {
            Some(n) => vec![n],
            None => default.n_values,
        },
    };
    let replications = cfg.usize("reps")?.unwrap_or(default.replications);
    Ok(StudySweep {
        n_values,
        replications,
    })
}

pub fn study_kind_from_config(cfg: &ConfigMap) -> Result<StudyKind> {
    match cfg.require("study")? {
        "selection" => Ok(StudyKind::Selection),
        "normality" => Ok(StudyKind::Normality),
        "rate" => Ok(StudyKind::Rate),
        other => Err(Error::Parse(format!(
            "unknown study kind '{other}', expected selection, normality, or rate"
        ))),
    }
}

/// Reads the normality direction: `direction=coordinate:K` or
/// `direction=pair:J1,J2,K` or `direction=custom:v1,v2,…`.
pub fn direction_from_config(cfg: &ConfigMap) -> Result<StudyDirection> {
    let raw = cfg.get("direction").unwrap_or("coordinate:1");
    let (kind, args) = raw
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("bad direction '{raw}'")))?;
    let parse_usize = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad direction index '{s}'")))
    };
    match kind {
        "coordinate" => Ok(StudyDirection::ActiveCoordinate {
            index: parse_usize(args)?,
        }),
        "pair" => {
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(
                    "pair direction needs 'pair:first_group,second_group,coordinate'".into(),
                ));
            }
            Ok(StudyDirection::FusedPairCoordinate {
                first_group: parse_usize(parts[0])?,
                second_group: parse_usize(parts[1])?,
                coordinate: parse_usize(parts[2])?,
            })
        }
        "custom" => {
            let u: Vec<f64> = args
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad direction entry '{s}'")))
                })
                .collect::<Result<_>>()?;
            Ok(StudyDirection::Custom { u })
        }
        other => Err(Error::Parse(format!("unknown direction kind '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_with_comments() {
        let cfg = parse_config("# scenario\ntau=0.25\nseed=9\n\nn=100\n").unwrap();
        assert_eq!(cfg.get("tau"), Some("0.25"));
        assert_eq!(cfg.u64("seed").unwrap(), Some(9));
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(parse_config("a=1\na=2\n").is_err());
        assert!(parse_config("just a line\n").is_err());
        assert!(parse_config("=3\n").is_err());
    }

    #[test]
    fn scenario_round_trip_fixed() {
        let cfg = parse_config(
            "layout=fixed\ngroup_sizes=3,3\nbeta=1,1,1,0,0,0\ntau=0.5\nseed=4\n",
        )
        .unwrap();
        let scenario = scenario_from_config(&cfg).unwrap();
        match &scenario.layout {
            GroupLayout::Fixed {
                group_sizes,
                true_beta,
            } => {
                assert_eq!(group_sizes, &vec![3, 3]);
                assert_eq!(true_beta.len(), 6);
            }
            other => panic!("unexpected layout {other:?}"),
        }
    }

    #[test]
    fn scenario_rejects_inconsistent_beta_length() {
        let cfg = parse_config("layout=fixed\ngroup_sizes=2\nbeta=1,2,3\n").unwrap();
        assert!(scenario_from_config(&cfg).is_err());
    }

    #[test]
    fn schedule_defaults_to_feasible_midpoint() {
        let cfg = parse_config("schedule=fixed\ngamma=1\n").unwrap();
        let schedule = schedule_from_config(&cfg).unwrap();
        assert_eq!(schedule.exponent, 0.25);
        assert!(schedule.is_admissible());
    }

    #[test]
    fn explicit_exponent_wins() {
        let cfg = parse_config("schedule=fixed\ngamma=1\nexponent=0.4\nkappa1=2\n").unwrap();
        let schedule = schedule_from_config(&cfg).unwrap();
        assert_eq!(schedule.exponent, 0.4);
        assert_eq!(schedule.kappa1, 2.0);
    }

    #[test]
    fn directions_parse() {
        let cfg = parse_config("direction=pair:1,2,1\n").unwrap();
        assert_eq!(
            direction_from_config(&cfg).unwrap(),
            StudyDirection::FusedPairCoordinate {
                first_group: 1,
                second_group: 2,
                coordinate: 1
            }
        );
        let cfg = parse_config("direction=coordinate:3\n").unwrap();
        assert_eq!(
            direction_from_config(&cfg).unwrap(),
            StudyDirection::ActiveCoordinate { index: 3 }
        );
        let cfg = parse_config("direction=custom:0.6,0.8\n").unwrap();
        assert!(matches!(
            direction_from_config(&cfg).unwrap(),
            StudyDirection::Custom { .. }
        ));
        let cfg = parse_config("direction=diag\n").unwrap();
        assert!(direction_from_config(&cfg).is_err());
    }
}
