//! File formats: simulation configs and link presets (TOML), disclosed
//! counts (CSV or JSON), and the attack-pipeline grammar.

use std::path::Path;

use b92_core::attacks::{solve_q0, AttackChannel, AttackStage};
use b92_core::keyrate::PhysicalLink;
use b92_core::sim::SimConfig;
use b92_core::{deg, ObservedCounts};
use serde::{Deserialize, Serialize};

use crate::error::{input, CliResult};

pub const KTH_PRESET: &str = include_str!("../presets/kth.toml");

/// Parses `stage; stage; ...` where a stage is one of
///
/// ```text
/// rotation [alpha=DEG]
/// weak-meas q=Q [alpha=DEG]
/// mixed q=Q lambda=L [alpha=DEG]
/// depolarize epsilon=E
/// loss T=T
/// identity
/// ```
///
/// `alpha` defaults to `protocol_alpha` (radians); `q=q0` picks the
/// weak-measurement strength that leaves the channel untilted.
pub fn parse_attack(spec: &str, protocol_alpha: f64) -> CliResult<AttackChannel> {
    let mut stages = Vec::new();
    for raw in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let mut words = raw.split_whitespace();
        let name = words.next().unwrap_or_default();
        let mut params: Vec<(&str, &str)> = Vec::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| input(format!("attack parameter {w:?} is not key=value")))?;
            params.push((k, v));
        }
        let mut take = |key: &str| -> Option<&str> {
            let i = params.iter().position(|(k, _)| *k == key)?;
            Some(params.remove(i).1)
        };
        let num = |key: &str, v: Option<&str>| -> CliResult<Option<f64>> {
            v.map(|s| {
                s.parse::<f64>()
                    .map_err(|_| input(format!("attack parameter {key}={s:?} is not a number")))
            })
            .transpose()
        };
        let need = |key: &str, v: Option<f64>| v.ok_or_else(|| input(format!("stage {name:?} needs {key}=")));
        let alpha = num("alpha", take("alpha"))?.map_or(protocol_alpha, deg);
        let q_of = |s: Option<&str>| -> CliResult<f64> {
            match s {
                Some("q0") => Ok(solve_q0(alpha)?),
                other => need("q", num("q", other)?),
            }
        };
        let stage = match name {
            "identity" | "none" => None,
            "rotation" => Some(AttackStage::Rotation { alpha }),
            "weak-meas" => Some(AttackStage::WeakMeasurement {
                q: q_of(take("q"))?,
                alpha,
            }),
            "mixed" => {
                let q = q_of(take("q"))?;
                let lambda = need("lambda", num("lambda", take("lambda"))?)?;
                Some(AttackStage::Mixed { q, lambda, alpha })
            }
            "depolarize" => Some(AttackStage::Depolarize {
                epsilon: need("epsilon", num("epsilon", take("epsilon"))?)?,
            }),
            "loss" => Some(AttackStage::Loss {
                transmission: need("T", num("T", take("T"))?)?,
            }),
            other => return Err(input(format!("unknown attack stage {other:?}"))),
        };
        if let Some((k, _)) = params.first() {
            return Err(input(format!("stage {name:?} does not take {k}=")));
        }
        stages.extend(stage);
    }
    Ok(AttackChannel::new(stages)?)
}

/// Simulation config file. Angles in degrees.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimFile {
    pub n_total: u64,
    pub alpha: f64,
    pub alpha_prime: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub attack: String,
}

impl SimFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        Ok(toml::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_config(&self) -> CliResult<SimConfig> {
        let alpha = deg(self.alpha);
        let config = SimConfig {
            n_total: self.n_total,
            alpha_prime: deg(self.alpha_prime.unwrap_or(self.alpha)),
            alpha,
            attack: parse_attack(&self.attack, alpha)?,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Link preset file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    /// dB/km.
    pub channel_loss: f64,
    /// dB.
    pub receiver_loss: f64,
    /// Mean dark counts per pulse.
    pub dark_mean: f64,
    pub det_efficiency: f64,
}

impl LinkFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn preset(name: &str) -> CliResult<Self> {
        match name {
            "kth" => Self::parse(KTH_PRESET),
            other => Err(input(format!("unknown link preset {other:?} (known: kth)"))),
        }
    }

    pub fn link(&self) -> CliResult<PhysicalLink> {
        let l = PhysicalLink {
            length_km: 0.0,
            channel_loss: self.channel_loss,
            receiver_loss: self.receiver_loss,
            dark_mean: self.dark_mean,
            det_efficiency: self.det_efficiency,
        };
        l.validate()?;
        Ok(l)
    }
}

/// Flat counts record: `n{j}{μ}` with `μ` one of `0`, `1`, `b0` (0̄), `b1` (1̄).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsRecord {
    pub n00: u64,
    pub n01: u64,
    pub n0b0: u64,
    pub n0b1: u64,
    pub n10: u64,
    pub n11: u64,
    pub n1b0: u64,
    pub n1b1: u64,
    pub n_total: u64,
}

impl From<&ObservedCounts> for CountsRecord {
    fn from(c: &ObservedCounts) -> Self {
        let [[n00, n01, n0b0, n0b1], [n10, n11, n1b0, n1b1]] = c.n;
        Self {
            n00,
            n01,
            n0b0,
            n0b1,
            n10,
            n11,
            n1b0,
            n1b1,
            n_total: c.n_total,
        }
    }
}

impl CountsRecord {
    pub fn to_counts(self) -> CliResult<ObservedCounts> {
        let n = [
            [self.n00, self.n01, self.n0b0, self.n0b1],
            [self.n10, self.n11, self.n1b0, self.n1b1],
        ];
        Ok(ObservedCounts::new(n, self.n_total)?)
    }

    /// JSON when the text starts with `{`, otherwise CSV with a header row.
    pub fn parse(text: &str) -> CliResult<Self> {
        if text.trim_start().starts_with('{') {
            return Ok(serde_json::from_str(text)?);
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = reader.deserialize::<CountsRecord>();
        let first = rows.next().ok_or_else(|| input("counts CSV has no data row"))??;
        if rows.next().is_some() {
            return Err(input("counts CSV must hold a single record"));
        }
        Ok(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_grammar() {
        let a = deg(20.0);
        let ch = parse_attack("weak-meas q=0.1; depolarize epsilon=0.2 ; loss T=0.5", a).unwrap();
        assert_eq!(ch.stages.len(), 3);
        assert_eq!(ch.stages[0], AttackStage::WeakMeasurement { q: 0.1, alpha: a });
        assert_eq!(parse_attack("", a).unwrap().stages.len(), 0);
        assert_eq!(parse_attack("identity", a).unwrap().stages.len(), 0);
        let r = parse_attack("rotation alpha=10", a).unwrap();
        assert_eq!(r.stages[0], AttackStage::Rotation { alpha: deg(10.0) });
        let m = parse_attack("mixed q=q0 lambda=0.5", a).unwrap();
        assert!(matches!(m.stages[0], AttackStage::Mixed { lambda, .. } if lambda == 0.5));
    }

    #[test]
    fn attack_grammar_errors() {
        let a = deg(20.0);
        assert!(parse_attack("teleport", a).is_err());
        assert!(parse_attack("loss", a).is_err());
        assert!(parse_attack("loss T=2", a).is_err());
        assert!(parse_attack("loss T=0.5 q=1", a).is_err());
        assert!(parse_attack("depolarize epsilon", a).is_err());
    }

    #[test]
    fn counts_round_trip_both_formats() {
        let c = ObservedCounts::new([[1, 2, 3, 4], [5, 6, 7, 8]], 100).unwrap();
        let r = CountsRecord::from(&c);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(CountsRecord::parse(&json).unwrap().to_counts().unwrap(), c);
        let csv = "n00,n01,n0b0,n0b1,n10,n11,n1b0,n1b1,n_total\n1,2,3,4,5,6,7,8,100\n";
        assert_eq!(CountsRecord::parse(csv).unwrap(), r);
        assert!(CountsRecord::parse("n00\n1\n").is_err());
    }

    #[test]
    fn kth_preset_matches_core() {
        let l = LinkFile::preset("kth").unwrap().link().unwrap();
        assert_eq!(l, PhysicalLink::kth(0.0));
    }
}
