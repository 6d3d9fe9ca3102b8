//! Scenario configuration: JSON schema, bundled presets and field-level checks.

use std::fmt;
use std::path::Path;

use mpd_core::coherence::{check_lgi_coherence, check_qpi_coherence, CoherenceReport};
use mpd_core::histories::HistorySpec;
use mpd_core::lgi::{Range, SweepAxis, SweepSettings};
use mpd_core::qpi::SearchRanges;
use mpd_core::setup::MUTUAL_EXCLUSIVITY_BOUND;
use mpd_core::{Constants, LgiGeometry, PhysicalSetup, QpiGeometry};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub lambda_nm: f64,
    pub c_um_per_ns: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { lambda_nm: 650.0, c_um_per_ns: mpd_core::constants::SPEED_OF_LIGHT_UM_PER_NS }
    }
}

/// Geometry of the run. `lgi` and `qpi` are the parameterized reference
/// layouts; `planes` is a free-form cascade usable for `probabilities`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetupConfig {
    Lgi(LgiGeometry),
    Qpi(QpiGeometry),
    Planes(PhysicalSetup),
}

impl SetupConfig {
    pub fn physical(&self) -> PhysicalSetup {
        match self {
            SetupConfig::Lgi(g) => g.setup(),
            SetupConfig::Qpi(g) => g.setup(),
            SetupConfig::Planes(s) => s.clone(),
        }
    }

    pub fn coherence(&self, k: &Constants) -> Option<CoherenceReport> {
        match self {
            SetupConfig::Lgi(g) => Some(check_lgi_coherence(g, k)),
            SetupConfig::Qpi(g) => Some(check_qpi_coherence(g, k)),
            SetupConfig::Planes(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    LgiSweep,
    LgiPoint,
    QpiSearch,
    QpiPoint,
    Coherence,
    Probabilities,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::LgiSweep => "lgi-sweep",
            Analysis::LgiPoint => "lgi-point",
            Analysis::QpiSearch => "qpi-search",
            Analysis::QpiPoint => "qpi-point",
            Analysis::Coherence => "coherence",
            Analysis::Probabilities => "probabilities",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub constants: ConstantsConfig,
    pub setup: SetupConfig,
    /// Analysis the config was written for; the subcommand takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<Analysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    #[serde(default)]
    pub settings: SweepSettings,
    #[serde(default)]
    pub search: SearchRanges,
    /// D_s values (lgi) or X₂,₁ values (qpi) for the coherence table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_range: Option<Range>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub histories: Vec<HistorySpec>,
    /// Quadrature step T_s in µm.
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

fn default_grid_step() -> f64 {
    mpd_core::quadrature::DEFAULT_STEP
}

impl ScenarioConfig {
    pub fn constants(&self) -> Result<Constants, CliError> {
        Constants::canonical(self.constants.lambda_nm * 1e-3, self.constants.c_um_per_ns)
            .map_err(|e| CliError::Config(vec![Diagnostic::error("constants", e.to_string())]))
    }
}

pub const PRESETS: [(&str, &str); 2] = [
    ("sim1_fig5a", include_str!("../presets/sim1_fig5a.json")),
    ("sim2_fig7", include_str!("../presets/sim2_fig7.json")),
];

pub fn parse(text: &str, origin: &str) -> Result<ScenarioConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let (field, message) = match field.as_str() {
            "." => (origin.to_string(), e.inner().to_string()),
            "setup" => setup_error(text).unwrap_or((field, e.inner().to_string())),
            _ => (field, e.inner().to_string()),
        };
        CliError::Config(vec![Diagnostic::error(field, message)])
    })
}

/// The tagged setup enum buffers its content, which loses the inner field
/// path; re-parse the setup object as its concrete type to recover it.
fn setup_error(text: &str) -> Option<(String, String)> {
    let root: serde_json::Value = serde_json::from_str(text).ok()?;
    let mut setup = root.get("setup")?.clone();
    let kind = setup.as_object_mut()?.remove("kind")?;
    let err = match kind.as_str()? {
        "lgi" => serde_path_to_error::deserialize::<_, LgiGeometry>(setup).err(),
        "qpi" => serde_path_to_error::deserialize::<_, QpiGeometry>(setup).err(),
        "planes" => serde_path_to_error::deserialize::<_, PhysicalSetup>(setup).err(),
        _ => None,
    }?;
    let path = err.path().to_string();
    let field = if path == "." { "setup".to_string() } else { format!("setup.{path}") };
    Some((field, err.inner().to_string()))
}

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

pub fn preset(name: &str) -> Result<ScenarioConfig, CliError> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::Config(vec![Diagnostic::error(
            "preset",
            format!("unknown preset {name:?}, expected one of {known:?}"),
        )])
    })?;
    parse(text, name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, field: field.into(), message: message.into() }
    }

    pub fn warning(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

struct Checker(Vec<Diagnostic>);

impl Checker {
    fn positive(&mut self, field: impl Into<String>, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.0.push(Diagnostic::error(field, format!("must be positive and finite, got {v}")));
        }
    }

    fn finite(&mut self, field: impl Into<String>, v: f64) {
        if !v.is_finite() {
            self.0.push(Diagnostic::error(field, format!("must be finite, got {v}")));
        }
    }

    fn range(&mut self, field: &str, r: &Range) {
        if let Err(e) = r.values() {
            self.0.push(Diagnostic::error(field, e.to_string()));
        }
    }
}

/// Schema-level and physical checks. Errors block a run; warnings do not.
pub fn diagnose(cfg: &ScenarioConfig) -> Vec<Diagnostic> {
    let mut c = Checker(Vec::new());
    c.positive("constants.lambda_nm", cfg.constants.lambda_nm);
    c.positive("constants.c_um_per_ns", cfg.constants.c_um_per_ns);
    if cfg.constants.lambda_nm > 0.0 && !(100.0..=20_000.0).contains(&cfg.constants.lambda_nm) {
        c.0.push(Diagnostic::warning(
            "constants.lambda_nm",
            format!("{} nm is outside the optical band; the wavelength is in nm", cfg.constants.lambda_nm),
        ));
    }
    let c_ref = mpd_core::constants::SPEED_OF_LIGHT_UM_PER_NS;
    if cfg.constants.c_um_per_ns > 0.0 && ((cfg.constants.c_um_per_ns / c_ref) - 1.0).abs() > 0.01 {
        c.0.push(Diagnostic::warning(
            "constants.c_um_per_ns",
            format!("{} differs from 3e5; the light speed is in µm/ns", cfg.constants.c_um_per_ns),
        ));
    }
    c.positive("grid_step", cfg.grid_step);

    match &cfg.setup {
        SetupConfig::Lgi(g) => {
            c.positive("setup.delta_x", g.delta_x);
            c.finite("setup.ds", g.ds);
            c.positive("setup.beta1", g.beta1);
            c.positive("setup.beta2", g.beta2);
            c.positive("setup.sigma0", g.sigma0);
            c.positive("setup.t01", g.t01);
            c.positive("setup.t12", g.t12);
        }
        SetupConfig::Qpi(g) => {
            c.positive("setup.sigma0", g.sigma0);
            for i in 0..3 {
                c.positive(format!("setup.beta[{i}]"), g.beta[i]);
                c.positive(format!("setup.times[{i}]"), g.times[i]);
            }
            c.positive("setup.plane1_offset", g.plane1_offset);
            c.finite("setup.x21", g.x21);
            c.finite("setup.x31", g.x31);
        }
        SetupConfig::Planes(s) => {
            c.positive("setup.sigma0", s.sigma0);
            if s.planes.is_empty() {
                c.0.push(Diagnostic::error("setup.planes", "needs at least one plane"));
            }
            if s.times.len() != s.planes.len() {
                c.0.push(Diagnostic::error(
                    "setup.times",
                    format!("expected {} flight times (one per plane), got {}", s.planes.len(), s.times.len()),
                ));
            }
            for (j, t) in s.times.iter().enumerate() {
                c.positive(format!("setup.times[{j}]"), *t);
            }
            for (j, p) in s.planes.iter().enumerate() {
                c.positive(format!("setup.planes[{j}].beta"), p.beta);
                if let Err(e) = p.validate() {
                    if p.beta > 0.0 {
                        c.0.push(Diagnostic::error(format!("setup.planes[{j}].slit_centers"), e.to_string()));
                    }
                }
            }
        }
    }

    if let Some(axis) = &cfg.sweep {
        match axis {
            SweepAxis::Ds { range } | SweepAxis::Sigma0 { range } => c.range("sweep.range", range),
            SweepAxis::Betas { beta1, beta2 } => {
                c.range("sweep.beta1", beta1);
                c.range("sweep.beta2", beta2);
            }
        }
    }
    c.range("settings.ds", &cfg.settings.ds);
    c.range("settings.beta1", &cfg.settings.beta1);
    c.range("settings.beta2", &cfg.settings.beta2);
    c.range("search.x21", &cfg.search.x21);
    c.range("search.x31", &cfg.search.x31);
    if let Some(r) = &cfg.coherence_range {
        c.range("coherence_range", r);
    }

    let mut out = c.0;
    if out.iter().any(|d| d.severity == Severity::Error) {
        return out;
    }

    let setup = cfg.setup.physical();
    for w in setup.overlap_warnings() {
        out.push(Diagnostic::error(
            format!("setup.planes[{}]", w.plane),
            format!(
                "slits {} and {} overlap: leakage {:.3e} is above the mutual-exclusivity bound {:e}",
                w.slits.0 + 1,
                w.slits.1 + 1,
                w.leakage,
                MUTUAL_EXCLUSIVITY_BOUND
            ),
        ));
    }
    let min_beta = setup.planes.iter().map(|p| p.beta).fold(f64::INFINITY, f64::min);
    if cfg.grid_step > min_beta / 2.0 {
        out.push(Diagnostic::warning(
            "grid_step",
            format!("step {} µm under-resolves the narrowest slit (beta {} µm)", cfg.grid_step, min_beta),
        ));
    }
    if let Some(report) = cfg.constants().ok().and_then(|k| cfg.setup.coherence(&k)) {
        for check in report.checks.iter().filter(|c| !c.feasible()) {
            out.push(Diagnostic::warning(
                "coherence",
                format!("{} = {:.1} µm exceeds the coherence diameter {:.1} µm", check.label, check.d_setup, check.dc),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_without_errors() {
        for (name, _) in PRESETS {
            let diags = diagnose(&preset(name).unwrap());
            assert!(diags.iter().all(|d| d.severity == Severity::Warning), "{name}: {diags:?}");
        }
        assert!(diagnose(&preset("sim2_fig7").unwrap()).is_empty());
    }

    #[test]
    fn negative_beta_names_the_field() {
        let mut cfg = preset("sim1_fig5a").unwrap();
        if let SetupConfig::Lgi(g) = &mut cfg.setup {
            g.beta1 = -5.0;
        }
        let diags = diagnose(&cfg);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].field, "setup.beta1");
    }

    #[test]
    fn type_errors_carry_the_path() {
        let err = parse(r#"{"setup": {"kind": "qpi", "sigma0": "wide"}}"#, "inline").unwrap_err();
        match err {
            CliError::Config(d) => assert_eq!(d[0].field, "setup.sigma0"),
            other => panic!("{other:?}"),
        }
    }
}
