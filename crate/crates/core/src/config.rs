//! Scenario configuration: defaults, validation, overrides and digests.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dist::TriangularParams;

pub const DAYS_PER_YEAR: f64 = 365.25;

/// One support service and the demand for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSpec {
    pub name: String,
    /// Appointment units available per month.
    pub capacity_units: u32,
    /// Probability that a youth asks for the service at all.
    pub request_prob: f64,
    /// Monthly appointments wanted, given the youth asks for the service.
    pub appt_min: u32,
    pub appt_max: u32,
}

impl ServiceSpec {
    pub fn new(
        name: &str,
        capacity_units: u32,
        request_prob: f64,
        appt_min: u32,
        appt_max: u32,
    ) -> Self {
        ServiceSpec {
            name: name.to_owned(),
            capacity_units,
            request_prob,
            appt_min,
            appt_max,
        }
    }
}

/// The five services offered by the baseline shelter.
pub fn baseline_services() -> Vec<ServiceSpec> {
    vec![
        ServiceSpec::new("case_management", 400, 1.0, 2, 4),
        ServiceSpec::new("drug_counseling", 60, 0.4, 1, 4),
        ServiceSpec::new("insurance_enrollment", 34, 0.5, 1, 1),
        ServiceSpec::new("psychiatric", 56, 0.5, 1, 4),
        ServiceSpec::new("medical", 192, 0.9, 1, 5),
    ]
}

/// Stay-time and patience distributions, all in days.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StayAttributes {
    pub los_bsy_16_20: TriangularParams,
    pub los_bsy_21_24: TriangularParams,
    pub los_nbsy: TriangularParams,
    pub bed_patience: TriangularParams,
    pub service_patience: TriangularParams,
}

impl Default for StayAttributes {
    fn default() -> Self {
        let tri = |min, mode, max| TriangularParams { min, mode, max };
        StayAttributes {
            los_bsy_16_20: tri(30.0, 75.0, 90.0),
            los_bsy_21_24: tri(60.0, 120.0, 180.0),
            los_nbsy: tri(7.0, 14.0, 30.0),
            bed_patience: tri(3.0, 5.0, 7.0),
            service_patience: tri(1.0, 7.0, 14.0),
        }
    }
}

/// Full parameterisation of one shelter scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bed_capacity: u32,
    pub services: Vec<ServiceSpec>,
    /// Mean arrivals per 365.25-day year.
    pub annual_arrivals: f64,
    pub bsy_fraction: f64,
    /// Share of bed-seeking youth aged 16-20; the rest are 21-24.
    pub age_16_20_fraction: f64,
    /// Share of bed-queue reneges that leave the shelter instead of staying for services.
    pub renege_exit_prob: f64,
    /// Youth who give up on a bed and stay get a fresh non-bed-seeking stay length
    /// instead of keeping their original one.
    pub redraw_los_on_bed_renege: bool,
    pub stay: StayAttributes,
    pub warmup_days: f64,
    pub stats_window_days: f64,
    pub replications: u32,
    pub master_seed: u64,
}

/// Bed renege share the default age mix is calibrated to.
pub const TARGET_BED_RENEGE: f64 = 0.253;

/// Share of 16-20 year olds among bed-seekers that makes a full bed pool turn
/// over exactly the non-reneging bed-seekers.
///
/// A saturated pool of `c` beds discharges `c * 365.25 / E[LOS]` youth a year,
/// so `E[LOS] = c * 365.25 / (bsy_per_year * (1 - target))`; the mix is the
/// weight on the 16-20 stay that yields that mean. Clamped to `[0, 1]`.
pub fn age_mix_for_bed_renege(
    target_renege: f64,
    bed_capacity: u32,
    annual_arrivals: f64,
    bsy_fraction: f64,
    stay: &StayAttributes,
) -> f64 {
    let admitted = annual_arrivals * bsy_fraction * (1.0 - target_renege);
    let mean_stay = f64::from(bed_capacity) * DAYS_PER_YEAR / admitted;
    let (young, old) = (stay.los_bsy_16_20.mean(), stay.los_bsy_21_24.mean());
    ((old - mean_stay) / (old - young)).clamp(0.0, 1.0)
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let stay = StayAttributes::default();
        let (bed_capacity, annual_arrivals, bsy_fraction) = (66, 1399.0, 1.0 / 3.0);
        ScenarioConfig {
            bed_capacity,
            services: baseline_services(),
            annual_arrivals,
            bsy_fraction,
            age_16_20_fraction: age_mix_for_bed_renege(
                TARGET_BED_RENEGE,
                bed_capacity,
                annual_arrivals,
                bsy_fraction,
                &stay,
            ),
            renege_exit_prob: 0.25,
            redraw_los_on_bed_renege: false,
            stay,
            warmup_days: DAYS_PER_YEAR,
            stats_window_days: DAYS_PER_YEAR,
            replications: 100,
            master_seed: 20_221_211,
        }
    }
}

/// One violated invariant, located by a dotted field path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("bad override `{0}`: expected key=value")]
    OverrideSyntax(String),
    #[error("override path `{0}` does not exist")]
    OverridePath(String),
    #[error("invalid config:\n{}", format_issues(.0))]
    Invalid(Vec<ConfigIssue>),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn check_prob(issues: &mut Vec<ConfigIssue>, path: &str, p: f64) {
    if !(0.0..=1.0).contains(&p) {
        issues.push(ConfigIssue {
            path: path.to_owned(),
            message: format!("probability {p} outside [0, 1]"),
        });
    }
}

fn check_duration_dist(issues: &mut Vec<ConfigIssue>, path: &str, p: &TriangularParams) {
    if let Err(e) = p.validate() {
        issues.push(ConfigIssue {
            path: path.to_owned(),
            message: e.to_string(),
        });
    } else if p.min < 0.0 {
        issues.push(ConfigIssue {
            path: format!("{path}.min"),
            message: format!("durations cannot be negative (got {})", p.min),
        });
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 over the canonical serialisation of the effective config.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn horizon_days(&self) -> f64 {
        self.warmup_days + self.stats_window_days
    }

    pub fn service_index(&self, name: &str) -> Option<usize> {
        self.services.iter().position(|s| s.name == name)
    }

    /// Collects every violated invariant rather than stopping at the first.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut push = |path: String, message: String| issues.push(ConfigIssue { path, message });

        if self.bed_capacity == 0 && self.bsy_fraction > 0.0 {
            push(
                "bed_capacity".into(),
                "zero beds while bed-seeking youth arrive makes every bed request unsatisfiable"
                    .into(),
            );
        }
        if self.services.is_empty() {
            push("services".into(), "at least one service is required".into());
        }
        for (i, s) in self.services.iter().enumerate() {
            let base = format!("services[{i}]");
            if s.name.is_empty() {
                push(format!("{base}.name"), "must not be empty".into());
            }
            if self.services[..i].iter().any(|o| o.name == s.name) {
                push(
                    format!("{base}.name"),
                    format!("duplicate service name `{}`", s.name),
                );
            }
            if !(0.0..=1.0).contains(&s.request_prob) {
                push(
                    format!("{base}.request_prob"),
                    format!("probability {} outside [0, 1]", s.request_prob),
                );
            }
            if s.appt_min < 1 {
                push(format!("{base}.appt_min"), "must be at least 1".into());
            }
            if s.appt_min > s.appt_max {
                push(
                    format!("{base}.appt_max"),
                    format!("appt_max {} below appt_min {}", s.appt_max, s.appt_min),
                );
            }
            if s.appt_max > s.capacity_units {
                push(
                    format!("{base}.appt_max"),
                    format!(
                        "appt_max {} exceeds capacity_units {}; such requests can never be granted",
                        s.appt_max, s.capacity_units
                    ),
                );
            }
        }
        if !(self.annual_arrivals >= 0.0 && self.annual_arrivals.is_finite()) {
            push(
                "annual_arrivals".into(),
                format!(
                    "must be a finite non-negative rate (got {})",
                    self.annual_arrivals
                ),
            );
        }
        if !(self.warmup_days >= 0.0 && self.warmup_days.is_finite()) {
            push(
                "warmup_days".into(),
                format!("must be >= 0 (got {})", self.warmup_days),
            );
        }
        if !(self.stats_window_days > 0.0 && self.stats_window_days.is_finite()) {
            push(
                "stats_window_days".into(),
                format!("must be > 0 (got {})", self.stats_window_days),
            );
        }
        if self.replications < 1 {
            push("replications".into(), "must be at least 1".into());
        }

        check_prob(&mut issues, "bsy_fraction", self.bsy_fraction);
        check_prob(&mut issues, "age_16_20_fraction", self.age_16_20_fraction);
        check_prob(&mut issues, "renege_exit_prob", self.renege_exit_prob);
        let st = &self.stay;
        check_duration_dist(&mut issues, "stay.los_bsy_16_20", &st.los_bsy_16_20);
        check_duration_dist(&mut issues, "stay.los_bsy_21_24", &st.los_bsy_21_24);
        check_duration_dist(&mut issues, "stay.los_nbsy", &st.los_nbsy);
        check_duration_dist(&mut issues, "stay.bed_patience", &st.bed_patience);
        check_duration_dist(&mut issues, "stay.service_patience", &st.service_patience);
        issues
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(issues))
        }
    }

    /// Applies `key=value` overrides on top of this config.
    ///
    /// Keys are dotted paths; array elements are addressed by index or, for
    /// services, by name (`services.psychiatric.capacity_units=72`). Values are
    /// parsed as JSON where possible and taken as strings otherwise.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self, ConfigError> {
        let mut tree = serde_json::to_value(self)?;
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::OverrideSyntax(item.to_owned()))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::OverrideSyntax(item.to_owned()));
            }
            let value = serde_json::from_str(raw.trim())
                .unwrap_or_else(|_| Value::String(raw.trim().to_owned()));
            let slot =
                locate(&mut tree, key).ok_or_else(|| ConfigError::OverridePath(key.to_owned()))?;
            *slot = value;
        }
        Ok(serde_json::from_value(tree)?)
    }
}

fn locate<'v>(tree: &'v mut Value, path: &str) -> Option<&'v mut Value> {
    let mut node = tree;
    for seg in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(seg)?,
            Value::Array(items) => {
                if let Ok(i) = seg.parse::<usize>() {
                    items.get_mut(i)?
                } else {
                    items
                        .iter_mut()
                        .find(|v| v.get("name").and_then(Value::as_str) == Some(seg))?
                }
            }
            _ => return None,
        };
    }
    Some(node)
}
