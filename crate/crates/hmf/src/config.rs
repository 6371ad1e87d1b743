//! Experiment configuration files (TOML, `schema = 1`).
//!
//! ```toml
//! schema = 1
//! out = "runs/mb"                 # optional; --out overrides
//!
//! [profile]
//! family = "maxwell_boltzmann"    # polytrope_compact | polytrope_noncompact | lynden_bell
//! A = 0.05
//! beta = 2.0                      # q, e_star, e0, B as the family requires
//!
//! [solver]                        # optional
//! bracket = [1e-6, 10.0]
//! scan_points = 64
//! theta_offset = 0.0
//!
//! [criterion]                     # optional
//! margin = 0.0
//! tolerance = 1e-6
//! separatrix_band = 0.01
//!
//! [sim]                           # optional; v_max defaults to 1.25 × v_cutoff
//! n_theta = 256
//! n_v = 257
//! dt = 0.05
//! t_end = 100.0
//! diag_every = 20
//! perturbation = { kind = "bump", amplitude = 0.01, theta = 0.0, v = 0.0, width = 0.3 }
//!
//! [inequalities]                  # optional; same v_max default
//! n_theta = 128
//! n_v = 129
//! ```
//!
//! Every table rejects unknown keys, and a profile rejects parameters its
//! family does not use.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::criterion::CriterionOptions;
use crate::error::{HmfError, Result};
use crate::profiles::Profile;
use crate::steady_state::{SolverOptions, SteadyState};
use crate::vlasov_sim::{Perturbation, SimConfig};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub criterion: CriterionBlock,
    #[serde(default)]
    pub sim: SimBlock,
    #[serde(default)]
    pub inequalities: InequalityBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    MaxwellBoltzmann,
    PolytropeCompact,
    PolytropeNoncompact,
    LyndenBell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub family: Family,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl ProfileSpec {
    pub fn build(&self) -> Result<Profile> {
        let (need, name): (&[&str], _) = match self.family {
            Family::MaxwellBoltzmann => (&["beta"], "maxwell_boltzmann"),
            Family::PolytropeCompact => (&["q", "e_star"], "polytrope_compact"),
            Family::PolytropeNoncompact => (&["q", "e0"], "polytrope_noncompact"),
            Family::LyndenBell => (&["beta", "B"], "lynden_bell"),
        };
        let fields = [("beta", self.beta), ("q", self.q), ("e_star", self.e_star), ("e0", self.e0), ("B", self.b)];
        for (key, val) in fields {
            match (need.contains(&key), val) {
                (true, None) => return Err(HmfError::Config(format!("profile.{key} is required for family {name}"))),
                (false, Some(_)) => return Err(HmfError::Config(format!("profile.{key} is not a parameter of family {name}"))),
                _ => {}
            }
        }
        let get = |v: Option<f64>| v.unwrap_or(f64::NAN);
        match self.family {
            Family::MaxwellBoltzmann => Profile::maxwell_boltzmann(self.a, get(self.beta)),
            Family::PolytropeCompact => Profile::polytrope_compact(self.a, get(self.q), get(self.e_star)),
            Family::PolytropeNoncompact => Profile::polytrope_noncompact(self.a, get(self.q), get(self.e0)),
            Family::LyndenBell => Profile::lynden_bell(self.a, get(self.b), get(self.beta)),
        }
    }

    /// Sets one parameter by its config key (`A`, `beta`, `q`, `e_star`, `e0`, `B`).
    pub fn with_param(&self, key: &str, value: f64) -> Result<Self> {
        let mut s = *self;
        let slot = match key {
            "A" => {
                s.a = value;
                return Ok(s);
            }
            "beta" => &mut s.beta,
            "q" => &mut s.q,
            "e_star" => &mut s.e_star,
            "e0" => &mut s.e0,
            "B" => &mut s.b,
            _ => return Err(HmfError::Config(format!("unknown scan key `{key}` (expected A, beta, q, e_star, e0 or B)"))),
        };
        if slot.is_none() {
            return Err(HmfError::Config(format!("scan key `{key}` is not a parameter of this profile")));
        }
        *slot = Some(value);
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub bracket: [f64; 2],
    pub scan_points: usize,
    pub theta_offset: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverBlock { bracket: [d.bracket.0, d.bracket.1], scan_points: d.scan_points, theta_offset: 0.0 }
    }
}

impl SolverBlock {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { bracket: (self.bracket[0], self.bracket[1]), scan_points: self.scan_points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriterionBlock {
    pub margin: f64,
    pub tolerance: f64,
    pub separatrix_band: f64,
}

impl Default for CriterionBlock {
    fn default() -> Self {
        let d = CriterionOptions::default();
        CriterionBlock { margin: d.margin, tolerance: d.tolerance, separatrix_band: d.separatrix_band }
    }
}

impl CriterionBlock {
    pub fn options(&self) -> CriterionOptions {
        CriterionOptions { margin: self.margin, tolerance: self.tolerance, separatrix_band: self.separatrix_band }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimBlock {
    pub n_theta: usize,
    pub n_v: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub diag_every: usize,
    pub perturbation: Perturbation,
}

impl Default for SimBlock {
    fn default() -> Self {
        let r = SimConfig::reference(1.0);
        SimBlock {
            n_theta: r.n_theta,
            n_v: r.n_v,
            v_max: None,
            dt: r.dt,
            t_end: r.t_end,
            diag_every: r.diag_every,
            perturbation: Perturbation::bump(0.01),
        }
    }
}

/// Default grid half-width: 1.25 × the velocity where f₀ falls to 1e−16 of its maximum.
pub fn default_v_max(ss: &SteadyState) -> f64 {
    1.25 * ss.v_cutoff()
}

impl SimBlock {
    pub fn sim_config(&self, ss: &SteadyState) -> Result<SimConfig> {
        let c = SimConfig {
            n_theta: self.n_theta,
            n_v: self.n_v,
            v_max: self.v_max.unwrap_or_else(|| default_v_max(ss)),
            dt: self.dt,
            t_end: self.t_end,
            diag_every: self.diag_every,
        };
        c.validate()?;
        self.perturbation.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalityBlock {
    pub n_theta: usize,
    pub n_v: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
}

impl Default for InequalityBlock {
    fn default() -> Self {
        InequalityBlock { n_theta: 128, n_v: 129, v_max: None }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| HmfError::Config(e.to_string().trim_end().to_string()))?;
        if c.schema != SCHEMA {
            return Err(HmfError::Config(format!("schema = {} is not supported (this build reads schema = {SCHEMA})", c.schema)));
        }
        c.profile.build()?;
        Ok(c)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HmfError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// A minimal config for `profile` with every block at its default.
    pub fn for_profile(profile: ProfileSpec) -> Self {
        ExperimentConfig {
            schema: SCHEMA,
            out: None,
            profile,
            solver: SolverBlock::default(),
            criterion: CriterionBlock::default(),
            sim: SimBlock::default(),
            inequalities: InequalityBlock::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MB: &str = "schema = 1\n[profile]\nfamily = \"maxwell_boltzmann\"\nA = 0.05\nbeta = 2.0\n";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_toml(MB).unwrap();
        assert_eq!(c.sim.n_theta, 256);
        assert_eq!(c.inequalities.n_v, 129);
        assert_eq!(c.profile.build().unwrap(), Profile::maxwell_boltzmann(0.05, 2.0).unwrap());
    }

    #[test]
    fn unknown_key_names_the_key() {
        let err = ExperimentConfig::from_toml(&format!("{MB}gamma = 1.0\n")).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
        let err = ExperimentConfig::from_toml(&format!("{MB}[sim]\nsteps = 3\n")).unwrap_err();
        assert!(err.to_string().contains("steps"), "{err}");
    }

    #[test]
    fn family_parameters_are_checked() {
        let err = ExperimentConfig::from_toml(&format!("{MB}q = 2.0\n")).unwrap_err();
        assert!(err.to_string().contains("profile.q"), "{err}");
        let missing = "schema = 1\n[profile]\nfamily = \"lynden_bell\"\nA = 0.2\nbeta = 2.0\n";
        assert!(ExperimentConfig::from_toml(missing).unwrap_err().to_string().contains("profile.B"));
        assert!(ExperimentConfig::from_toml(&MB.replace("schema = 1", "schema = 2")).is_err());
    }

    #[test]
    fn perturbation_table_round_trips() {
        let text = format!("{MB}[sim]\nperturbation = {{ kind = \"scale\", epsilon = 0.02 }}\n");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.sim.perturbation, Perturbation::Scale { epsilon: 0.02 });
        let back = toml::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&back).unwrap(), c);
    }

    #[test]
    fn bump_fields_default() {
        let text = format!("{MB}[sim]\nperturbation = {{ kind = \"bump\", v = 0.5 }}\n");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.sim.perturbation, Perturbation::Bump { amplitude: 0.01, theta: 0.0, v: 0.5, width: 0.3 });
    }
}
