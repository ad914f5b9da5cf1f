//! JSON run configuration: schema, defaults and cross-field validation.

use std::path::PathBuf;

use hetero_core::potential::FMode;
use hetero_core::{Boundary, DoubleWell, Family, StripSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Solve,
    Ode,
    Phi,
    DecayFit,
    CutoffTest,
    Check,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Solve => "solve",
            Verb::Ode => "ode",
            Verb::Phi => "phi",
            Verb::DecayFit => "decay-fit",
            Verb::CutoffTest => "cutoff-test",
            Verb::Check => "check",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub family: Family,
    #[serde(default)]
    pub a_minus: Option<Vec<f64>>,
    #[serde(default)]
    pub a_plus: Option<Vec<f64>>,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_sup_radius")]
    pub sup_radius: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PotentialRepr {
    Name(String),
    Full(PotentialSpec),
}

impl TryFrom<PotentialRepr> for PotentialSpec {
    type Error = String;

    fn try_from(repr: PotentialRepr) -> Result<Self, String> {
        match repr {
            PotentialRepr::Full(spec) => Ok(spec),
            PotentialRepr::Name(name) => Family::from_name(&name)
                .map(|family| PotentialSpec {
                    family,
                    a_minus: None,
                    a_plus: None,
                    r0: default_r0(),
                    sup_radius: default_sup_radius(),
                    offset: 0.0,
                })
                .ok_or_else(|| {
                    format!(
                        "unknown potential family `{name}` (expected scalar_quartic, product_well or degenerate_well)"
                    )
                }),
        }
    }
}

fn deserialize_potential<'de, D: serde::Deserializer<'de>>(de: D) -> Result<PotentialSpec, D::Error> {
    PotentialRepr::deserialize(de).and_then(|r| PotentialSpec::try_from(r).map_err(serde::de::Error::custom))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Flat {
        #[serde(default)]
        lower: f64,
        #[serde(default = "one")]
        upper: f64,
    },
    Sinusoidal {
        #[serde(default)]
        lower: f64,
        #[serde(default = "one")]
        upper: f64,
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Table {
        s: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl Default for ShapeSpec {
    fn default() -> Self {
        ShapeSpec::Flat { lower: 0.0, upper: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripConfig {
    #[serde(rename = "L", default = "default_period")]
    pub period: f64,
    /// Half-width bound; derived from the shape when absent.
    #[serde(rename = "R", default)]
    pub half_width: Option<f64>,
    #[serde(default)]
    pub shape: ShapeSpec,
}

impl Default for StripConfig {
    fn default() -> Self {
        Self {
            period: default_period(),
            half_width: None,
            shape: ShapeSpec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    #[serde(rename = "T")]
    pub half_length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            h: 1.0 / 32.0,
            half_length: 8.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    #[serde(rename = "N")]
    pub n: usize,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self { n: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50_000,
            max_backtracks: 60,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub slabs: usize,
    pub phi_tol: f64,
    pub f_mode: FMode,
    /// Slack in `ρ² ≤ φ + ε`; `4h²` when absent.
    pub eps_disc: Option<f64>,
    pub ode_reference: bool,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            slabs: 3,
            phi_tol: 1e-10,
            f_mode: FMode::Envelope,
            eps_disc: None,
            ode_reference: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSource {
    /// `f(t) = c² t`.
    Linear { c: f64 },
    /// `f` built from the configured potential.
    Potential { mode: FMode },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiConfig {
    pub center: f64,
    /// Slab half-width; `L` when absent.
    pub half_width: Option<f64>,
    pub t: f64,
    pub j_max: usize,
    pub tol: f64,
    pub f: PhiSource,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            center: 0.0,
            half_width: None,
            t: 1.0,
            j_max: 4,
            tol: 1e-12,
            f: PhiSource::Linear { c: 1.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffConfig {
    pub h: f64,
    pub r: f64,
    pub trials: usize,
    pub max_principle_trials: usize,
    pub max_principle_h: Vec<f64>,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        Self {
            h: 1.0 / 16.0,
            r: 0.2,
            trials: 200,
            max_principle_trials: 50,
            max_principle_h: vec![1.0 / 16.0, 1.0 / 32.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeConfig {
    pub h: f64,
    /// Half-length; the grid `T` when absent.
    #[serde(rename = "T")]
    pub half_length: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            h: 1.0 / 128.0,
            half_length: None,
            tol: 1e-9,
            max_iter: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { samples: 4000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub subcommand: Option<Verb>,
    #[serde(deserialize_with = "deserialize_potential")]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub strip: StripConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub constraint: ConstraintConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub comparison: ComparisonConfig,
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default)]
    pub cutoff: CutoffConfig,
    #[serde(default)]
    pub ode: OdeConfig,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_r0() -> f64 {
    0.5
}

fn default_sup_radius() -> f64 {
    2.0
}

fn default_period() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A validated configuration with the non-fatal adjustments made to it.
#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

/// Parses, fills defaults and validates. `verb` selects the cross-field
/// rules that apply.
pub fn parse_config(text: &str, verb: Verb) -> Result<Parsed, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.into_inner()))
    })?;
    if let Some(v) = config.subcommand {
        if v != verb {
            return Err(CliError::Config(format!(
                "subcommand: config is for `{}` but `{}` was invoked",
                v.name(),
                verb.name()
            )));
        }
    }
    config.subcommand = Some(verb);
    let warnings = config.normalize(verb)?;
    Ok(Parsed { config, warnings })
}

fn rule(name: &str, detail: String) -> CliError {
    CliError::Config(format!("rule {name} violated: {detail}"))
}

fn positive(path: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "at `{path}`: must be positive and finite, got {x}"
        )))
    }
}

impl RunConfig {
    fn normalize(&mut self, verb: Verb) -> Result<Vec<String>, CliError> {
        let mut warnings = Vec::new();
        self.fill_potential()?;
        positive("potential.r0", self.potential.r0)?;
        positive("potential.sup_radius", self.potential.sup_radius)?;
        positive("strip.L", self.strip.period)?;
        positive("grid.h", self.grid.h)?;
        positive("grid.T", self.grid.half_length)?;
        positive("optimizer.tol", self.optimizer.tol)?;
        if self.optimizer.max_iter == 0 {
            return Err(CliError::Config("at `optimizer.max_iter`: must be at least 1".into()));
        }

        let l = self.strip.period;
        let per = (l / self.grid.h).round().max(1.0);
        let snapped = l / per;
        if ((l / self.grid.h) - per).abs() > 1e-9 {
            warnings.push(format!(
                "grid.h snapped from {} to {snapped} so that L/h = {per}",
                self.grid.h
            ));
        }
        self.grid.h = snapped;
        let periods = self.grid.half_length / l;
        if (periods - periods.round()).abs() > 1e-9 || periods.round() < 1.0 {
            return Err(rule(
                "T ∈ Lℕ",
                format!("T = {} is not a positive multiple of L = {l}", self.grid.half_length),
            ));
        }
        if self.strip.half_width.is_none() {
            self.strip.half_width = Some(self.shape_half_width());
        }
        self.strip_spec()
            .validate()
            .map_err(|e| CliError::Config(format!("at `strip`: {e}")))?;

        match verb {
            Verb::Solve | Verb::DecayFit => {
                let n = self.constraint.n;
                if n == 0 {
                    return Err(CliError::Config("at `constraint.N`: must be at least 1".into()));
                }
                let need = (n + 4) as f64 * l;
                if need > self.grid.half_length * (1.0 + 1e-12) {
                    return Err(rule(
                        "NL+4L ≤ T",
                        format!("NL+4L = {need}, T = {}", self.grid.half_length),
                    ));
                }
            }
            Verb::CutoffTest => {
                let r = self.cutoff.r;
                positive("cutoff.r", r)?;
                positive("cutoff.h", self.cutoff.h)?;
                if 2.0 * r > self.potential.r0 {
                    return Err(rule("2r ≤ r0", format!("r = {r}, r0 = {}", self.potential.r0)));
                }
                for (k, &h) in self.cutoff.max_principle_h.iter().enumerate() {
                    positive(&format!("cutoff.max_principle_h[{k}]"), h)?;
                }
            }
            Verb::Phi => {
                positive("phi.t", self.phi.t)?;
                positive("phi.tol", self.phi.tol)?;
                let hw = *self.phi.half_width.get_or_insert(l);
                positive("phi.half_width", hw)?;
                if let PhiSource::Linear { c } = self.phi.f {
                    positive("phi.f.c", c)?;
                }
                if self.phi.center.abs() + hw >= self.grid.half_length {
                    return Err(rule(
                        "|center| + half_width < T",
                        format!("|{}| + {hw} ≥ T = {}", self.phi.center, self.grid.half_length),
                    ));
                }
            }
            Verb::Ode => {
                positive("ode.h", self.ode.h)?;
                let t = *self.ode.half_length.get_or_insert(self.grid.half_length);
                positive("ode.T", t)?;
            }
            Verb::Check => {}
        }
        Ok(warnings)
    }

    fn fill_potential(&mut self) -> Result<(), CliError> {
        let p = &mut self.potential;
        let (am, ap) = match p.family {
            Family::ScalarQuartic => (vec![-1.0], vec![1.0]),
            _ => (vec![-1.0, 0.0], vec![1.0, 0.0]),
        };
        let am = p.a_minus.get_or_insert(am).clone();
        let ap = p.a_plus.get_or_insert(ap).clone();
        if am.len() != ap.len() || am.is_empty() {
            return Err(CliError::Config(
                "at `potential`: a_minus and a_plus must be non-empty and of equal length".into(),
            ));
        }
        if p.family == Family::ScalarQuartic && (am != [-1.0] || ap != [1.0]) {
            return Err(CliError::Config(
                "at `potential`: scalar_quartic has fixed minima -1 and 1".into(),
            ));
        }
        if am == ap {
            return Err(CliError::Config("at `potential`: a_minus and a_plus coincide".into()));
        }
        Ok(())
    }

    fn shape_half_width(&self) -> f64 {
        let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        match &self.strip.shape {
            ShapeSpec::Flat { lower, upper } => lower.abs().max(upper.abs()),
            ShapeSpec::Sinusoidal {
                lower,
                upper,
                amplitude,
                ..
            } => lower.abs().max(upper.abs() + amplitude.abs()),
            ShapeSpec::Table { lower, upper, .. } => amax(lower).max(amax(upper)),
        }
    }

    pub fn strip_spec(&self) -> StripSpec {
        let boundary = match self.strip.shape.clone() {
            ShapeSpec::Flat { lower, upper } => Boundary::Flat { lower, upper },
            ShapeSpec::Sinusoidal {
                lower,
                upper,
                amplitude,
                phase,
            } => Boundary::Sinusoidal {
                lower,
                upper,
                amplitude,
                phase,
            },
            ShapeSpec::Table { s, lower, upper } => Boundary::Table { s, lower, upper },
        };
        StripSpec {
            period: self.strip.period,
            half_width: self.strip.half_width.unwrap_or_else(|| self.shape_half_width()),
            boundary,
        }
    }

    pub fn potential(&self) -> DoubleWell {
        let p = &self.potential;
        let am = p.a_minus.clone().unwrap_or_default();
        let ap = p.a_plus.clone().unwrap_or_default();
        let base = match p.family {
            Family::ScalarQuartic => DoubleWell::scalar_quartic(),
            Family::ProductWell => DoubleWell::product_well(am, ap),
            Family::DegenerateWell => DoubleWell::degenerate_well(am, ap),
        };
        base.with_r0(p.r0).with_sup_radius(p.sup_radius).with_offset(p.offset)
    }

    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"potential":"scalar_quartic","grid":{"h":0.0625,"T":4},"constraint":{"N":2}}"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let parsed = parse_config(MINIMAL, Verb::Solve).unwrap();
        let c = &parsed.config;
        assert!(parsed.warnings.is_empty());
        assert_eq!(c.strip.period, 0.5);
        assert_eq!(c.strip.half_width, Some(1.0));
        assert_eq!(c.potential.a_plus.as_deref(), Some(&[1.0][..]));
        assert_eq!(c.optimizer, OptimizerConfig::default());
        assert_eq!(c.subcommand, Some(Verb::Solve));
        assert_eq!(c.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn echo_round_trips() {
        for (text, verb) in [
            (MINIMAL, Verb::Solve),
            (
                r#"{"potential":{"family":"product_well","r0":0.6},"strip":{"L":1,"shape":{"kind":"sinusoidal","amplitude":0.2}},"grid":{"h":0.03,"T":8}}"#,
                Verb::Solve,
            ),
            (r#"{"potential":"product_well"}"#, Verb::Phi),
            (r#"{"potential":"degenerate_well"}"#, Verb::Ode),
        ] {
            let first = parse_config(text, verb).unwrap().config;
            let second = parse_config(&first.echo(), verb).unwrap();
            assert_eq!(second.config, first);
            assert!(second.warnings.is_empty());
        }
    }

    #[test]
    fn slab_rule_is_named() {
        let text = r#"{"potential":"scalar_quartic","strip":{"L":2},"grid":{"h":0.25,"T":4},"constraint":{"N":2}}"#;
        let err = parse_config(text, Verb::Solve).unwrap_err().to_string();
        assert!(err.contains("NL+4L ≤ T"), "{err}");
        assert!(parse_config(text, Verb::Check).is_ok());
    }

    #[test]
    fn h_is_snapped_with_warning() {
        let text = r#"{"potential":"scalar_quartic","strip":{"L":1},"grid":{"h":0.3,"T":8}}"#;
        let parsed = parse_config(text, Verb::Solve).unwrap();
        assert_eq!(parsed.config.grid.h, 1.0 / 3.0);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("snapped"));
    }

    #[test]
    fn schema_errors_carry_field_path() {
        let err = parse_config(r#"{"potential":"scalar_quartic","grid":{"h":"x","T":4}}"#, Verb::Solve)
            .unwrap_err()
            .to_string();
        assert!(err.contains("grid.h"), "{err}");
        let err = parse_config(
            r#"{"potential":"scalar_quartic","optimizer":{"tolerance":1}}"#,
            Verb::Solve,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("optimizer"), "{err}");
        let err = parse_config(r#"{"potential":"sextic"}"#, Verb::Check)
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown potential family"), "{err}");
    }

    #[test]
    fn cutoff_radius_rule() {
        let text = r#"{"potential":"product_well","cutoff":{"r":0.3}}"#;
        let err = parse_config(text, Verb::CutoffTest).unwrap_err().to_string();
        assert!(err.contains("2r ≤ r0"), "{err}");
    }

    #[test]
    fn mismatched_subcommand_is_rejected() {
        let text = r#"{"subcommand":"ode","potential":"scalar_quartic"}"#;
        assert!(parse_config(text, Verb::Solve).is_err());
        assert!(parse_config(text, Verb::Ode).is_ok());
    }
}
