//! Scenario files: a flat TOML layout with `[field]`, `[dithers]`, `[gain]`,
//! `[trigger]` and `[run]` sections.
//!
//! ```toml
//! [field]
//! x_star = 10.0
//! y_star = 5.0
//! theta_star_deg = 30.0   # or theta_star in radians
//! q_star = 7.0
//!
//! [dithers]
//! a1 = 0.5
//! a2 = 0.5
//! a3 = 0.5
//! omega1 = 10.0
//! omega2 = 10.0
//! omega3 = 20.0
//! frequency_override = true   # default false
//!
//! [gain]
//! row1 = [4.3822, 4.3822, 0.1437]
//! row2 = [-9.4326, 9.4326, 4.0]
//!
//! [trigger]
//! sigma = 0.5
//! alpha = 0.195
//!
//! [run]
//! x0 = 12.5
//! y0 = 7.5
//! theta0_deg = 60.0
//! dt = 1e-4               # default 1e-4
//! t_final = 60.0          # default 60
//! mode = "full"           # full | average | continuous-control | sampled-data
//! sample_period = 0.01    # required for sampled-data
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{ConfigError, Error, Result};
use crate::field::QuadraticField;
use crate::trigger::{GainMatrix, TriggerConstants};
use crate::vehicle::{DitherParams, VehicleState};

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_T_FINAL: f64 = 60.0;

/// Keys that also accept a `_deg` variant.
const ANGLE_KEYS: [&str; 2] = ["theta_star", "theta0"];

/// How control updates are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// Full nonlinear loop under the static trigger.
    Full,
    /// Averaged linear loop under the average trigger.
    Average,
    /// Full loop, control refreshed at every grid sample.
    ContinuousControl,
    /// Full loop, control refreshed every `period` seconds.
    SampledData { period: f64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Average => "average",
            Mode::ContinuousControl => "continuous-control",
            Mode::SampledData { .. } => "sampled-data",
        }
    }

    /// Parses a mode name; `sampled-data` takes its period from `sample_period`.
    pub fn parse(name: &str, sample_period: Option<f64>) -> std::result::Result<Self, String> {
        match name {
            "full" => Ok(Mode::Full),
            "average" => Ok(Mode::Average),
            "continuous-control" | "continuous" => Ok(Mode::ContinuousControl),
            "sampled-data" => match sample_period {
                Some(period) => Ok(Mode::SampledData { period }),
                None => Err("sampled-data mode needs a sample period".into()),
            },
            other => Err(format!(
                "unknown mode {other:?} (expected full, average, continuous-control or sampled-data)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub field: QuadraticField<f64>,
    pub dithers: DitherParams<f64>,
    pub gain: GainMatrix<f64>,
    pub trigger: TriggerConstants<f64>,
    pub initial: VehicleState<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub frequency_override: bool,
    pub mode: Mode,
}

impl Scenario {
    /// Checks every invariant and re-derives the trigger bias from the dithers.
    pub fn validate(mut self) -> Result<Self> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite"))
            }
        };
        finite("field.x_star", self.field.x_star)?;
        finite("field.y_star", self.field.y_star)?;
        finite("field.theta_star", self.field.theta_star)?;
        finite("field.q_star", self.field.q_star)?;
        finite("run.x0", self.initial.x)?;
        finite("run.y0", self.initial.y)?;
        finite("run.theta0", self.initial.theta)?;
        self.dithers.validate(self.frequency_override)?;
        self.gain = GainMatrix::new(self.gain.0)?;
        self.trigger = TriggerConstants::from_dithers(self.trigger.sigma, self.trigger.alpha, &self.dithers)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("run.dt", "must be finite and > 0"));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt) {
            return Err(Error::invalid("run.t_final", "must be finite and >= dt"));
        }
        if let Mode::SampledData { period } = self.mode {
            if !(period.is_finite() && period >= self.dt) {
                return Err(Error::invalid("run.sample_period", "must be finite and >= dt"));
            }
        }
        Ok(self)
    }

    /// Number of integration steps `round(t_final/dt)`.
    pub fn num_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Same scenario at base frequency `omega3`: every `ωi` is multiplied and
    /// every `ai` divided by `omega3/ω3`, keeping the products `ai·ωi` fixed.
    pub fn with_base_frequency(&self, omega3: f64) -> Result<Self> {
        if !(omega3.is_finite() && omega3 > 0.0) {
            return Err(Error::invalid("omega3", "must be finite and > 0"));
        }
        let s = omega3 / self.dithers.omega3;
        let d = self.dithers;
        let mut out = self.clone();
        out.dithers = DitherParams {
            a1: d.a1 / s,
            a2: d.a2 / s,
            a3: d.a3 / s,
            omega1: d.omega1 * s,
            omega2: d.omega2 * s,
            omega3,
        };
        out.validate()
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    text.parse()
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for key in root.keys() {
            if !["field", "dithers", "gain", "trigger", "run"].contains(&key.as_str()) {
                return Err(ConfigError::Invalid {
                    section: key.clone(),
                    key: String::new(),
                    reason: "unknown section".into(),
                }
                .into());
            }
        }

        let field = Section::new(&root, "field", &["x_star", "y_star", "theta_star", "q_star"])?;
        let dithers = Section::new(
            &root,
            "dithers",
            &["a1", "a2", "a3", "omega1", "omega2", "omega3", "frequency_override"],
        )?;
        let gain = Section::new(&root, "gain", &["row1", "row2"])?;
        let trigger = Section::new(&root, "trigger", &["sigma", "alpha"])?;
        let run = Section::new(
            &root,
            "run",
            &["x0", "y0", "theta0", "dt", "t_final", "mode", "sample_period"],
        )?;

        let sample_period = run.opt_real("sample_period")?;
        let mode = match run.opt_str("mode")? {
            None => Mode::Full,
            Some(name) => Mode::parse(name, sample_period).map_err(|reason| ConfigError::Invalid {
                section: "run".into(),
                key: "mode".into(),
                reason,
            })?,
        };

        let scenario = Scenario {
            field: QuadraticField::new(
                field.real("x_star")?,
                field.real("y_star")?,
                field.angle("theta_star")?,
                field.real("q_star")?,
            ),
            dithers: DitherParams {
                a1: dithers.real("a1")?,
                a2: dithers.real("a2")?,
                a3: dithers.real("a3")?,
                omega1: dithers.real("omega1")?,
                omega2: dithers.real("omega2")?,
                omega3: dithers.real("omega3")?,
            },
            gain: GainMatrix([gain.row3("row1")?, gain.row3("row2")?]),
            trigger: TriggerConstants { sigma: trigger.real("sigma")?, alpha: trigger.real("alpha")?, bias: 0.0 },
            initial: VehicleState::new(run.real("x0")?, run.real("y0")?, run.angle("theta0")?),
            dt: run.opt_real("dt")?.unwrap_or(DEFAULT_DT),
            t_final: run.opt_real("t_final")?.unwrap_or(DEFAULT_T_FINAL),
            frequency_override: dithers.opt_bool("frequency_override")?.unwrap_or(false),
            mode,
        };
        scenario.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                let (section, key) = name.split_once('.').unwrap_or(("", name.as_str()));
                ConfigError::Invalid { section: section.into(), key: key.into(), reason }.into()
            }
            other => other,
        })
    }
}

/// One `[section]` table with its allowed keys.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str, keys: &[&str]) -> Result<Self> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return Err(ConfigError::TypeMismatch { section: name.into(), key: String::new(), expected: "table" }.into()),
        };
        if let Some(t) = table {
            for key in t.keys() {
                let angle = key
                    .strip_suffix("_deg")
                    .is_some_and(|base| ANGLE_KEYS.contains(&base) && keys.contains(&base));
                if !keys.contains(&key.as_str()) && !angle {
                    return Err(ConfigError::Invalid {
                        section: name.into(),
                        key: key.clone(),
                        reason: "unknown key".into(),
                    }
                    .into());
                }
            }
        }
        Ok(Self { name, table })
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn missing(&self, key: &str) -> Error {
        ConfigError::MissingKey { section: self.name.into(), key: key.into() }.into()
    }

    fn mismatch(&self, key: &str, expected: &'static str) -> Error {
        ConfigError::TypeMismatch { section: self.name.into(), key: key.into(), expected }.into()
    }

    fn as_real(&self, key: &str, v: &Value) -> Result<f64> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.mismatch(key, "number")),
        }
    }

    fn opt_real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| self.as_real(key, v)).transpose()
    }

    fn real(&self, key: &str) -> Result<f64> {
        self.opt_real(key)?.ok_or_else(|| self.missing(key))
    }

    /// Radians under `key`, or degrees under `key_deg`.
    fn angle(&self, key: &str) -> Result<f64> {
        let deg_key = format!("{key}_deg");
        match (self.get(key), self.get(&deg_key)) {
            (Some(_), Some(_)) => Err(ConfigError::Invalid {
                section: self.name.into(),
                key: key.into(),
                reason: format!("both {key} and {deg_key} given"),
            }
            .into()),
            (Some(v), None) => self.as_real(key, v),
            (None, Some(v)) => Ok(self.as_real(&deg_key, v)?.to_radians()),
            (None, None) => Err(self.missing(key)),
        }
    }

    fn opt_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.mismatch(key, "boolean")),
        }
    }

    fn opt_str(&self, key: &str) -> Result<Option<&'a str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(self.mismatch(key, "string")),
        }
    }

    fn row3(&self, key: &str) -> Result<[f64; 3]> {
        let arr = match self.get(key) {
            None => return Err(self.missing(key)),
            Some(Value::Array(a)) if a.len() == 3 => a,
            Some(_) => return Err(self.mismatch(key, "array of 3 numbers")),
        };
        let mut out = [0.0; 3];
        for (o, v) in out.iter_mut().zip(arr) {
            *o = self.as_real(key, v).map_err(|_| self.mismatch(key, "array of 3 numbers"))?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const SIV: &str = r#"
[field]
x_star = 10.0
y_star = 5.0
theta_star_deg = 30.0
q_star = 7.0

[dithers]
a1 = 0.5
a2 = 0.5
a3 = 0.5
omega1 = 10
omega2 = 10
omega3 = 20
frequency_override = true

[gain]
row1 = [4.3822, 4.3822, 0.1437]
row2 = [-9.4326, 9.4326, 4]

[trigger]
sigma = 0.5
alpha = 0.195

[run]
x0 = 12.5
y0 = 7.5
theta0_deg = 60.0
"#;

    #[test]
    fn parses_siv_layout() {
        let s: Scenario = SIV.parse().unwrap();
        assert_eq!(s.field.x_star, 10.0);
        assert!((s.field.theta_star - PI / 6.0).abs() < 1e-15);
        assert!((s.initial.theta - PI / 3.0).abs() < 1e-15);
        assert_eq!(s.dithers.omega3, 20.0);
        assert!(s.frequency_override);
        assert_eq!(s.gain.0[1][2], 4.0);
        assert!((s.trigger.bias - 0.306040).abs() < 1e-6);
        assert_eq!(s.dt, DEFAULT_DT);
        assert_eq!(s.t_final, DEFAULT_T_FINAL);
        assert_eq!(s.mode, Mode::Full);
        assert_eq!(s.num_steps(), 600_000);
    }

    #[test]
    fn sigma_out_of_range_names_key() {
        let text = SIV.replace("sigma = 0.5", "sigma = 1.2");
        let err = text.parse::<Scenario>().unwrap_err();
        assert!(err.to_string().contains("trigger.sigma"), "{err}");
    }

    #[test]
    fn frequency_ratio_needs_override() {
        let text = SIV.replace("frequency_override = true", "");
        let err = text.parse::<Scenario>().unwrap_err();
        assert!(err.to_string().contains("omega"), "{err}");

        let ok = SIV
            .replace("frequency_override = true", "")
            .replace("omega1 = 10", "omega1 = 4")
            .replace("omega2 = 10", "omega2 = 4")
            .replace("omega3 = 20", "omega3 = 2");
        assert!(ok.parse::<Scenario>().is_ok());
    }

    #[test]
    fn missing_and_mistyped_keys() {
        let err = SIV.replace("q_star = 7.0", "").parse::<Scenario>().unwrap_err();
        assert!(matches!(err, Error::Config(ConfigError::MissingKey { ref section, ref key }) if section == "field" && key == "q_star"));
        let err = SIV.replace("alpha = 0.195", "alpha = \"big\"").parse::<Scenario>().unwrap_err();
        assert!(matches!(err, Error::Config(ConfigError::TypeMismatch { ref key, .. }) if key == "alpha"));
        let err = SIV.replace("row2 = [-9.4326, 9.4326, 4]", "row2 = [1, 2]").parse::<Scenario>().unwrap_err();
        assert!(err.to_string().contains("gain.row2"), "{err}");
        let err = SIV.replace("q_star = 7.0", "q_star = 7.0\nqstar = 1").parse::<Scenario>().unwrap_err();
        assert!(err.to_string().contains("field.qstar"), "{err}");
        let err = SIV.replace("theta0_deg = 60.0", "theta0_deg = 60.0\ntheta0 = 1.0").parse::<Scenario>().unwrap_err();
        assert!(err.to_string().contains("run.theta0"), "{err}");
        assert!(matches!("[[x]".parse::<Scenario>(), Err(Error::Config(ConfigError::Parse(_)))));
    }

    #[test]
    fn modes() {
        let s: Scenario = format!("{SIV}mode = \"sampled-data\"\nsample_period = 0.01\n").parse().unwrap();
        assert_eq!(s.mode, Mode::SampledData { period: 0.01 });
        assert!(format!("{SIV}mode = \"sampled-data\"\n").parse::<Scenario>().is_err());
        assert!(format!("{SIV}mode = \"warp\"\n").parse::<Scenario>().is_err());
        let s: Scenario = format!("{SIV}mode = \"average\"\n").parse().unwrap();
        assert_eq!(s.mode, Mode::Average);
    }

    #[test]
    fn grid_validation() {
        assert!(format!("{SIV}dt = 0\n").parse::<Scenario>().is_err());
        assert!(format!("{SIV}dt = 0.1\nt_final = 0.05\n").parse::<Scenario>().is_err());
        let s: Scenario = format!("{SIV}dt = 0.001\nt_final = 2\n").parse().unwrap();
        assert_eq!(s.num_steps(), 2000);
    }

    #[test]
    fn base_frequency_scaling_keeps_products() {
        let s: Scenario = SIV.parse().unwrap();
        let t = s.with_base_frequency(40.0).unwrap();
        assert_eq!(t.dithers.omega3, 40.0);
        assert_eq!(t.dithers.omega1, 20.0);
        assert_eq!(t.dithers.a1 * t.dithers.omega1, s.dithers.a1 * s.dithers.omega1);
        assert_eq!(t.dithers.a3, 0.25);
        assert!(t.trigger.bias != s.trigger.bias);
    }
}
