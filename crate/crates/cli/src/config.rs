use std::path::PathBuf;

use freetrans::diagnostics::BUMP_DELTAS;
use freetrans::mollifier::{DEFAULT_EPS0, DEFAULT_LEVELS};
use freetrans::{DomainDescriptor, Point, ProblemSpec, SolveOptions};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// One regularized solve at `eps`.
    Solve,
    /// Continuation over a geometric schedule with Cauchy and split checks.
    SweepEpsilon,
    /// Regularity diagnostics on a solved case and on sampled fields.
    Diagnose,
    /// Compactness experiment: proximity to regular profiles over a delta sweep.
    CompareProfile,
    /// 1D two-phase solves against the closed form.
    OracleCheck,
    /// Randomized identities of the ramp family and of the phase map.
    IdentityCheck,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub spec: Option<ProblemSpec>,
    #[serde(default)]
    pub options: SolveOptions,
    /// Target smoothing width of `solve`, `diagnose` and `compare-profile`.
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub identities: Option<IdentityConfig>,
    #[serde(default)]
    pub diagnostics: Option<DiagnoseConfig>,
    #[serde(default)]
    pub compactness: Option<CompactnessConfig>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Write `field_*.vtk` snapshots.
    #[serde(default)]
    pub vtk: bool,
    #[serde(default)]
    pub runtime_limit_s: Option<f64>,
}

fn default_eps() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub eps0: f64,
    pub levels: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig { eps0: DEFAULT_EPS0, levels: DEFAULT_LEVELS }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub exponents: Vec<f64>,
    #[serde(rename = "A_plus")]
    pub a_plus: f64,
    #[serde(rename = "A_minus")]
    pub a_minus: f64,
    pub n: usize,
    pub eps: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { exponents: vec![2.0, 3.0], a_plus: 4.0, a_minus: 1.0, n: 256, eps: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Mollifier,
    Tab,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityConfig {
    pub suites: Vec<Suite>,
    pub mollifier_samples: usize,
    pub round_trip_samples: usize,
    pub holder_fields: usize,
    /// Ring count of the disc carrying the random fields.
    pub field_resolution: usize,
    pub pairs_per_field: usize,
    pub gradient_pairs: usize,
    pub exponents: Vec<f64>,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            suites: vec![Suite::Mollifier, Suite::Tab],
            mollifier_samples: 100_000,
            round_trip_samples: 100_000,
            holder_fields: 1000,
            field_resolution: 4,
            pairs_per_field: 200,
            gradient_pairs: 100_000,
            exponents: vec![1.2, 1.5, 2.0, 3.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseConfig {
    /// Key of the frozen regression values for this case.
    pub case: Option<String>,
    pub dyadic: Option<DyadicSettings>,
    pub power_fields: Option<PowerFieldConfig>,
    pub holder: Option<HolderSettings>,
    pub harnack: Option<HarnackSettings>,
    pub caccioppoli: bool,
    /// Radii `t` at which the coefficient modulus of continuity is reported.
    pub modulus: Vec<f64>,
    /// Repeat the solve at twice the resolution and check stability.
    pub refine: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicSettings {
    #[serde(rename = "R0")]
    pub r0: f64,
    pub alpha: f64,
    pub k_max: usize,
    /// Defaults to a zero of the solution on the horizontal axis.
    #[serde(default)]
    pub center: Option<Point>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerFieldConfig {
    pub exponents: Vec<f64>,
    pub domains: Vec<DomainDescriptor>,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub k_max: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderSettings {
    pub alpha: f64,
    pub r: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(default)]
    pub n_pairs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackSettings {
    pub center: Point,
    /// Defaults to the free-boundary distance of `center`.
    #[serde(default)]
    pub d: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompactnessConfig {
    pub deltas: Vec<f64>,
}

impl Default for CompactnessConfig {
    fn default() -> Self {
        CompactnessConfig { deltas: BUMP_DELTAS.to_vec() }
    }
}
