//! Scenario files: TOML documents describing one run.
//!
//! Every section except `oscillator`, `state` and `grid` may be omitted.
//! Unknown keys are rejected, and all problems found in a document are
//! reported together with their dotted paths.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{DetectionOptions, SweepBase};
use crate::classical::HistogramSpec;
use crate::error::{ConfigIssue, Error, Result};
use crate::lindblad::LindbladSteps;
use crate::model::{
    poisson_tail, CatSpec, EnsembleSpec, FockSpaceSpec, KickPulse, OscillatorParams, PulseShape, TimeGrid,
    FOCK_TAIL_TOLERANCE,
};
use crate::quantum::KickMode;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSection {
    #[serde(default = "one")]
    pub chi: f64,
    #[serde(default)]
    pub gamma: f64,
    /// Inverse bath temperature; omitted means zero temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

fn default_sigma_g() -> f64 {
    1e-3
}

fn default_pulse_step() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub g0: f64,
    pub tau: f64,
    #[serde(default = "default_sigma_g")]
    pub sigma_g: f64,
    #[serde(default)]
    pub shape: PulseShape,
    /// Largest integration step inside the pulse window.
    #[serde(default = "default_pulse_step")]
    pub max_step: f64,
    #[serde(default)]
    pub mode: KickMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    #[default]
    Coherent,
    Cat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    #[serde(default)]
    pub kind: StateKind,
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    #[serde(default = "one")]
    pub n_plus: f64,
    #[serde(default)]
    pub n_minus: f64,
    #[serde(default)]
    pub theta: f64,
}

fn default_free_step() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    pub dt_out: f64,
    /// Largest master-equation step outside the pulse window.
    #[serde(default = "default_free_step")]
    pub free_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub n_samples: usize,
    pub seed: u64,
    /// Times at which phase-space histograms are recorded.
    pub snapshot_times: Vec<f64>,
    pub histogram_half_width: f64,
    pub histogram_bins: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            n_samples: EnsembleSpec::DEFAULT_SAMPLES,
            seed: 0,
            snapshot_times: Vec::new(),
            histogram_half_width: 12.0,
            histogram_bins: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FockSection {
    /// Omitted means the default cutoff for the initial amplitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

fn default_n_plus_sq() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Number of evenly spaced `θ` values on `[0, 2π]`.
    pub theta_points: usize,
    /// Values of `𝒩₊²`; `𝒩₋ = sqrt(1 - 𝒩₊²)`.
    pub n_plus_sq: Vec<f64>,
    pub engine: KickMode,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            theta_points: 9,
            n_plus_sq: default_n_plus_sq(),
            engine: KickMode::Pulsed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RevivalSection {
    pub nu: Vec<u32>,
}

impl Default for RevivalSection {
    fn default() -> Self {
        Self { nu: vec![3, 5, 7] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub oscillator: OscillatorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSection>,
    pub state: StateSection,
    pub grid: GridSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub fock: FockSection,
    #[serde(default)]
    pub detection: DetectionOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revival: Option<RevivalSection>,
}

const SECTIONS: [&str; 9] = [
    "oscillator", "pulse", "state", "grid", "ensemble", "fock", "detection", "sweep", "revival",
];

/// Set `path` (dotted) in `table` to `raw`, parsed as a TOML value when
/// possible and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, path: &str, raw: &str) -> Result<()> {
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(vec![ConfigIssue::new(path, "empty key in override path")]));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(vec![ConfigIssue::new(path, format!("`{k}` is not a table"))]))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Parse `key=value` override strings.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::Config(vec![ConfigIssue::new(
            arg,
            "override must have the form section.key=value",
        )])),
    }
}

fn backticked(msg: &str, marker: &str) -> Option<String> {
    let rest = &msg[msg.find(marker)? + marker.len()..];
    let start = rest.find('`')? + 1;
    let len = rest[start..].find('`')?;
    Some(rest[start..start + len].to_string())
}

fn section_issue(section: &str, err: &toml::de::Error) -> ConfigIssue {
    let msg = err.message().trim().to_string();
    let field = backticked(&msg, "unknown field").or_else(|| backticked(&msg, "missing field"));
    match field {
        Some(f) => ConfigIssue::new(format!("{section}.{f}"), msg),
        None => ConfigIssue::new(section, msg),
    }
}

fn take_section<T: DeserializeOwned>(
    table: &toml::Table,
    name: &str,
    issues: &mut Vec<ConfigIssue>,
) -> Option<Option<T>> {
    let Some(v) = table.get(name) else {
        return Some(None);
    };
    match v.clone().try_into::<T>() {
        Ok(t) => Some(Some(t)),
        Err(e) => {
            issues.push(section_issue(name, &e));
            None
        }
    }
}

fn param_issue(section: &str, err: Error) -> ConfigIssue {
    match err {
        Error::InvalidParameter { name, reason } => ConfigIssue::new(format!("{section}.{name}"), reason),
        other => ConfigIssue::new(section, other.to_string()),
    }
}

impl Scenario {
    /// Parse a TOML document, apply `overrides` (`(dotted.path, value)`), fill
    /// derived defaults and validate.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![ConfigIssue::new("<document>", e.message().trim())]))?;
        for (path, value) in overrides {
            apply_override(&mut table, path, value)?;
        }
        Self::from_table(&table)
    }

    pub fn from_table(table: &toml::Table) -> Result<Self> {
        let mut issues = Vec::new();
        for key in table.keys() {
            if !SECTIONS.contains(&key.as_str()) {
                issues.push(ConfigIssue::new(key.clone(), "unknown section"));
            }
        }
        let required = |name: &str, issues: &mut Vec<ConfigIssue>| {
            if !table.contains_key(name) {
                issues.push(ConfigIssue::new(name, "missing section"));
            }
        };
        required("state", &mut issues);
        required("grid", &mut issues);
        let oscillator: Option<Option<OscillatorSection>> = take_section(table, "oscillator", &mut issues);
        let pulse = take_section(table, "pulse", &mut issues);
        let state = take_section(table, "state", &mut issues);
        let grid = take_section(table, "grid", &mut issues);
        let ensemble = take_section(table, "ensemble", &mut issues);
        let fock = take_section(table, "fock", &mut issues);
        let detection = take_section(table, "detection", &mut issues);
        let sweep = take_section(table, "sweep", &mut issues);
        let revival = take_section(table, "revival", &mut issues);
        if !issues.is_empty() {
            return Err(Error::Config(issues));
        }
        let scenario = Scenario {
            oscillator: oscillator.flatten().unwrap_or(OscillatorSection {
                chi: 1.0,
                gamma: 0.0,
                epsilon: None,
            }),
            pulse: pulse.flatten(),
            state: state.flatten().expect("checked above"),
            grid: grid.flatten().expect("checked above"),
            ensemble: ensemble.flatten().unwrap_or_default(),
            fock: fock.flatten().unwrap_or_default(),
            detection: detection.flatten().unwrap_or_default(),
            sweep: sweep.flatten(),
            revival: revival.flatten(),
        }
        .resolved();
        scenario.validate()?;
        Ok(scenario)
    }

    /// Fill derived defaults (currently the Fock cutoff).
    pub fn resolved(mut self) -> Self {
        if self.fock.n_max.is_none() {
            let a = Complex64::new(self.state.alpha_re, self.state.alpha_im).norm();
            if a.is_finite() {
                self.fock.n_max = Some(FockSpaceSpec::for_amplitude(a).n_max);
            }
        }
        self
    }

    /// Check every section and report all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if let Err(e) = self.oscillator_params() {
            issues.push(param_issue("oscillator", e));
        }
        if let Some(p) = &self.pulse {
            if let Err(e) = self.pulse_spec(p).check() {
                issues.push(param_issue("pulse", e));
            }
            if !(p.max_step > 0.0 && p.max_step.is_finite()) {
                issues.push(ConfigIssue::new("pulse.max_step", "must be > 0"));
            }
            let (w0, w1) = self.pulse_spec(p).window();
            if self.grid.t_start > w0 && self.grid.t_start < w1 {
                issues.push(ConfigIssue::new("grid.t_start", "must lie outside the pulse window"));
            }
        }
        let s = &self.state;
        if !(s.alpha_re.is_finite() && s.alpha_im.is_finite()) {
            issues.push(ConfigIssue::new("state.alpha_re", "amplitude must be finite"));
        } else if s.kind == StateKind::Cat {
            if let Err(e) = self.cat_spec().check() {
                issues.push(param_issue("state", e));
            }
        }
        if let Err(e) = self.time_grid() {
            issues.push(param_issue("grid", e));
        }
        if !(self.grid.free_step > 0.0 && self.grid.free_step.is_finite()) {
            issues.push(ConfigIssue::new("grid.free_step", "must be > 0"));
        }
        let e = &self.ensemble;
        if e.n_samples == 0 {
            issues.push(ConfigIssue::new("ensemble.n_samples", "must be >= 1"));
        }
        if let Some(t) = e
            .snapshot_times
            .iter()
            .find(|t| !(**t >= self.grid.t_start && **t <= self.grid.t_end))
        {
            issues.push(ConfigIssue::new("ensemble.snapshot_times", format!("{t} lies outside the grid")));
        }
        if !(e.histogram_half_width > 0.0) || e.histogram_bins == 0 {
            issues.push(ConfigIssue::new("ensemble.histogram_bins", "histogram needs a positive width and bins"));
        }
        if let Some(n) = self.fock.n_max {
            if n < 2 {
                issues.push(ConfigIssue::new("fock.n_max", format!("must be >= 2, got {n}")));
            } else if s.alpha_re.is_finite() && s.alpha_im.is_finite() {
                let mean = s.alpha_re * s.alpha_re + s.alpha_im * s.alpha_im;
                let tail = poisson_tail(mean, n);
                if tail >= FOCK_TAIL_TOLERANCE {
                    issues.push(ConfigIssue::new(
                        "fock.n_max",
                        format!("cutoff {n} truncates weight {tail:e} of the initial state"),
                    ));
                }
            }
        }
        let d = &self.detection;
        if !(d.noise_multiplier > 0.0) || !(d.floor_fraction >= 0.0) {
            issues.push(ConfigIssue::new("detection", "noise_multiplier must be > 0 and floor_fraction >= 0"));
        }
        if let Some(sw) = &self.sweep {
            if sw.n_plus_sq.iter().any(|v| !(0.0..=1.0).contains(v)) {
                issues.push(ConfigIssue::new("sweep.n_plus_sq", "values must lie in [0, 1]"));
            }
            if self.pulse.is_none() {
                issues.push(ConfigIssue::new("pulse", "a sweep needs a kick pulse"));
            }
        }
        if let Some(r) = &self.revival {
            if r.nu.iter().any(|&n| n < 2) {
                issues.push(ConfigIssue::new("revival.nu", "orders must be >= 2"));
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    pub fn oscillator_params(&self) -> Result<OscillatorParams> {
        OscillatorParams::new(self.oscillator.chi, self.oscillator.gamma, self.oscillator.epsilon)
    }

    fn pulse_spec(&self, p: &PulseSection) -> KickPulse {
        KickPulse {
            g0: p.g0,
            tau: p.tau,
            sigma_g: p.sigma_g,
            shape: p.shape,
        }
    }

    pub fn kick_pulse(&self) -> Option<KickPulse> {
        self.pulse.as_ref().map(|p| self.pulse_spec(p))
    }

    pub fn kick_mode(&self) -> KickMode {
        self.pulse.as_ref().map_or(KickMode::Pulsed, |p| p.mode)
    }

    pub fn pulse_max_step(&self) -> f64 {
        self.pulse.as_ref().map_or(default_pulse_step(), |p| p.max_step)
    }

    pub fn alpha0(&self) -> Complex64 {
        Complex64::new(self.state.alpha_re, self.state.alpha_im)
    }

    /// The initial state as a cat (a coherent state is a cat with `𝒩₋ = 0`).
    pub fn cat_spec(&self) -> CatSpec {
        match self.state.kind {
            StateKind::Coherent => CatSpec {
                alpha0: self.alpha0(),
                n_plus: 1.0,
                n_minus: 0.0,
                theta: 0.0,
            },
            StateKind::Cat => CatSpec {
                alpha0: self.alpha0(),
                n_plus: self.state.n_plus,
                n_minus: self.state.n_minus,
                theta: self.state.theta,
            },
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid.t_start, self.grid.t_end, self.grid.dt_out)
    }

    pub fn fock_space(&self) -> Result<FockSpaceSpec> {
        match self.fock.n_max {
            Some(n) => FockSpaceSpec::new(n),
            None => Ok(FockSpaceSpec::for_amplitude(self.alpha0().norm())),
        }
    }

    pub fn ensemble_spec(&self) -> Result<EnsembleSpec> {
        EnsembleSpec::new(self.ensemble.n_samples, self.ensemble.seed)
    }

    pub fn histogram_spec(&self) -> HistogramSpec {
        HistogramSpec::centred(self.ensemble.histogram_half_width, self.ensemble.histogram_bins)
    }

    pub fn lindblad_steps(&self) -> LindbladSteps {
        LindbladSteps {
            free_step: self.grid.free_step,
            pulse_step: self.pulse_max_step(),
        }
    }

    /// Sweep parameters, taken from the oscillator, pulse, state and grid sections.
    pub fn sweep_base(&self) -> Option<SweepBase> {
        let p = self.pulse.as_ref()?;
        Some(SweepBase {
            alpha0: self.alpha0().norm(),
            chi: self.oscillator.chi,
            g0: p.g0,
            tau: p.tau,
            sigma_g: p.sigma_g,
            n_max: self.fock.n_max.unwrap_or(FockSpaceSpec::for_amplitude(self.alpha0().norm()).n_max),
            dt_out: self.grid.dt_out,
            max_step: p.max_step,
        })
    }
}
