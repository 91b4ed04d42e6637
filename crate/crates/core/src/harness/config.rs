//! Experiment configuration, read from TOML. Unknown keys are rejected.
//!
//! ```toml
//! name = "ell3"                 # label copied into every report
//! output_dir = "out/ell3"       # optional; nothing is written without it
//! seed = 0                      # seed of the Hopf corpora
//!
//! [profile]
//! family = "algebraic"          # "algebraic" or "exponential"
//! amp = 1.0                     # algebraic amplitude
//! ell_rho = 3.0                 # algebraic decay exponent
//! # delta = 0.5                 # exponential exponent, in (0, 1/2]
//!
//! [initial]
//! velocity = "gaussian_odd"     # "gaussian_odd" (amp·y·e^{−y²}) or "zero"
//! velocity_amp = 1.0
//! temperature = "gaussian"      # "gaussian" (amp·e^{−y²}) or "zero"
//! temperature_amp = 1.0
//!
//! [gas]                         # μ, κ, R, c_v and the entropy constant A
//! mu = 1.0
//! kappa = 1.0
//! r_gas = 1.0
//! c_v = 1.0
//! a_entropy = 1.0
//!
//! [grid]
//! half_width = 40.0             # data kept on [−L, L]; grid spans [−L−1, L+1]
//! n_cells = 2048                # cells of a single run and of sweep level 0
//! scale_cells_with_level = true # sweep level n uses n_cells·growthⁿ cells
//! stretching = { kind = "sinh", scale = 6.0 }   # or { kind = "uniform" }
//!
//! [domains]                     # expanding domains of `sweep`
//! base_half_width = 40.0
//! growth = 2.0
//! n_levels = 4
//!
//! [solver]
//! t_end = 0.2
//! dt_max = 1e-3
//! # dt_init = 1e-4              # defaults to dt_max
//! cfl_factor = 0.5
//! picard_iters = 2
//! v_floor = 1e-3
//! snapshot_times = [0.05, 0.1]  # t = 0 and t_end are always recorded
//!
//! [diagnostics]
//! t_probe = 0.2                 # snapshot used by sweep summaries
//! core_fraction = 0.5           # windows for inf ϑ, probes and Kelvin fit: |y| ≤ core_fraction·L
//! probe_fraction = 0.05         # outermost fraction of the window used as probes
//! kelvin_y_fit = 0.05           # Kelvin fit uses |Y| ≥ 1/kelvin_y_fit
//! theta_floor_factor = 1e-12    # entropy mask: ϑ > factor·max ϑ₀
//! write_fields = true           # per-snapshot field CSV files
//! svg = false                   # SVG plots of the series
//!
//! [convergence]                 # `converge`
//! half_width = 4.0
//! n_cells = 64                  # coarsest spatial level
//! dt_space = 1e-5               # fixed step of the spatial series
//! time_n_cells = 128            # grid of the temporal series
//! dt_time = 1e-2                # coarsest step of the temporal series
//! t_end = 0.1
//! space_reference_factor = 4    # reference grid = finest level × factor
//! time_reference_factor = 16    # reference step = finest step / factor
//!
//! [hopf]                        # `hopf verify <config>`
//! preset = "kelvin"             # "unit", "scaling", "kelvin" or "constant"
//! t0 = 0.2                      # snapshot time of the state-based presets
//! y0 = 0.2                      # ball radius of the state-based presets
//! zeta_factor = 2.0             # ζ = zeta_factor·ζ₀
//! n_samples = 4000
//! # constant = { a0 = 0.0, a = 1.0, b = 0.0, c = 0.0, lam = 1.0, cap_lam = 1.0, c_star = 1.0, r = 1.0, dist = 0.8, delta_star = 0.1 }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{DomainSequence, Stretching};
use crate::profiles::{make_density_profile, DensityFamily, DensityProfile, GasConstants, InitialFields, TemperatureField, VelocityField};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub profile: ProfileConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub gas: GasConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub domains: Option<DomainSequence>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub hopf: HopfConfig,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub family: DensityFamily,
    #[serde(default = "one")]
    pub amp: f64,
    #[serde(default)]
    pub ell_rho: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityKind {
    Zero,
    GaussianOdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureKind {
    Zero,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub velocity: VelocityKind,
    pub velocity_amp: f64,
    pub temperature: TemperatureKind,
    pub temperature_amp: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            velocity: VelocityKind::GaussianOdd,
            velocity_amp: 1.0,
            temperature: TemperatureKind::Gaussian,
            temperature_amp: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GasConfig {
    pub mu: f64,
    pub kappa: f64,
    pub r_gas: f64,
    pub c_v: f64,
    pub a_entropy: f64,
}

impl Default for GasConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            kappa: 1.0,
            r_gas: 1.0,
            c_v: 1.0,
            a_entropy: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_width: f64,
    pub n_cells: usize,
    pub scale_cells_with_level: bool,
    pub stretching: Stretching,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            n_cells: 2048,
            scale_cells_with_level: true,
            stretching: Stretching::Sinh { scale: 6.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub t_end: f64,
    pub dt_max: f64,
    pub dt_init: Option<f64>,
    pub cfl_factor: f64,
    pub picard_iters: usize,
    pub v_floor: f64,
    pub snapshot_times: Vec<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            t_end: 0.2,
            dt_max: 1e-3,
            dt_init: None,
            cfl_factor: 0.5,
            picard_iters: 2,
            v_floor: 1e-3,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub t_probe: f64,
    pub core_fraction: f64,
    pub probe_fraction: f64,
    pub kelvin_y_fit: f64,
    pub theta_floor_factor: f64,
    pub write_fields: bool,
    pub svg: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            t_probe: 0.2,
            core_fraction: 0.5,
            probe_fraction: 0.05,
            kelvin_y_fit: 0.05,
            theta_floor_factor: crate::diagnostics::THETA_FLOOR_FACTOR,
            write_fields: true,
            svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub half_width: f64,
    pub n_cells: usize,
    pub dt_space: f64,
    pub time_n_cells: usize,
    pub dt_time: f64,
    pub t_end: f64,
    pub space_reference_factor: usize,
    pub time_reference_factor: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            half_width: 4.0,
            n_cells: 64,
            dt_space: 1e-5,
            time_n_cells: 128,
            dt_time: 1e-2,
            t_end: 0.1,
            space_reference_factor: 4,
            time_reference_factor: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopfPreset {
    Unit,
    Scaling,
    Kelvin,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOperator {
    pub a0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lam: f64,
    pub cap_lam: f64,
    pub c_star: f64,
    pub r: f64,
    pub dist: f64,
    pub delta_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HopfConfig {
    pub preset: HopfPreset,
    pub t0: f64,
    pub y0: f64,
    pub zeta_factor: f64,
    pub n_samples: usize,
    pub constant: Option<ConstantOperator>,
}

impl Default for HopfConfig {
    fn default() -> Self {
        Self {
            preset: HopfPreset::Unit,
            t0: 0.2,
            y0: 0.2,
            zeta_factor: 2.0,
            n_samples: 4000,
            constant: None,
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::Config(msg)
}

impl ExperimentConfig {
    /// Minimal configuration around a density profile; everything else default.
    pub fn with_profile(profile: ProfileConfig) -> Self {
        Self {
            name: default_name(),
            output_dir: None,
            seed: 0,
            profile,
            initial: InitialConfig::default(),
            gas: GasConfig::default(),
            grid: GridConfig::default(),
            domains: None,
            solver: SolverSection::default(),
            diagnostics: DiagnosticsConfig::default(),
            convergence: ConvergenceConfig::default(),
            hopf: HopfConfig::default(),
        }
    }

    pub fn algebraic(ell_rho: f64) -> Self {
        Self::with_profile(ProfileConfig {
            family: DensityFamily::Algebraic,
            amp: 1.0,
            ell_rho: Some(ell_rho),
            delta: None,
        })
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.density_profile()?;
        self.gas_constants()?;
        self.initial_fields()?;
        if !(2.0 * self.grid.half_width >= 1.0) {
            return Err(invalid(format!(
                "data interval [-L, L] must have length at least 1, got L = {}",
                self.grid.half_width
            )));
        }
        if self.grid.n_cells < crate::grid::MIN_CELLS {
            return Err(invalid(format!(
                "grid.n_cells must be at least {}, got {}",
                crate::grid::MIN_CELLS,
                self.grid.n_cells
            )));
        }
        if let Stretching::Sinh { scale } = self.grid.stretching {
            if !(scale > 0.0) {
                return Err(invalid(format!("grid.stretching.scale must be positive, got {scale}")));
            }
        }
        if let Some(d) = &self.domains {
            d.validate().map_err(|e| invalid(format!("domains: {e}")))?;
        }
        if !(self.solver.t_end > 0.0) {
            return Err(invalid(format!("solver.t_end must be positive, got {}", self.solver.t_end)));
        }
        if let Some(&t) = self.solver.snapshot_times.iter().find(|&&t| !(t >= 0.0 && t <= self.solver.t_end)) {
            return Err(invalid(format!("snapshot time {t} outside [0, t_end]")));
        }
        self.solver_config().validate().map_err(|e| invalid(format!("solver: {e}")))?;
        let d = &self.diagnostics;
        if !(d.t_probe >= 0.0) {
            return Err(invalid(format!("diagnostics.t_probe must be nonnegative, got {}", d.t_probe)));
        }
        if !(d.core_fraction > 0.0 && d.core_fraction <= 1.0) {
            return Err(invalid(format!(
                "diagnostics.core_fraction must lie in (0, 1], got {}",
                d.core_fraction
            )));
        }
        if !(d.probe_fraction > 0.0 && d.probe_fraction <= 1.0) {
            return Err(invalid(format!(
                "diagnostics.probe_fraction must lie in (0, 1], got {}",
                d.probe_fraction
            )));
        }
        if !(d.kelvin_y_fit > 0.0) || !(d.theta_floor_factor > 0.0) {
            return Err(invalid("diagnostics.kelvin_y_fit and theta_floor_factor must be positive".into()));
        }
        let c = &self.convergence;
        if !(c.half_width > 0.0 && c.dt_space > 0.0 && c.dt_time > 0.0 && c.t_end > 0.0) {
            return Err(invalid(
                "convergence half_width, dt_space, dt_time and t_end must be positive".into(),
            ));
        }
        if c.n_cells < crate::grid::MIN_CELLS || c.time_n_cells < crate::grid::MIN_CELLS {
            return Err(invalid("convergence grids are too coarse".into()));
        }
        if c.space_reference_factor < 2 || c.time_reference_factor < 2 {
            return Err(invalid("convergence reference factors must be at least 2".into()));
        }
        let h = &self.hopf;
        if !(h.t0 > 0.0 && h.y0 > 0.0 && h.zeta_factor > 0.0) {
            return Err(invalid("hopf t0, y0 and zeta_factor must be positive".into()));
        }
        if h.preset == HopfPreset::Constant && h.constant.is_none() {
            return Err(invalid("hopf.preset = \"constant\" needs a hopf.constant table".into()));
        }
        Ok(())
    }

    pub fn density_profile(&self) -> Result<DensityProfile<f64>> {
        let p = &self.profile;
        let params = match p.family {
            DensityFamily::Algebraic => {
                if p.delta.is_some() {
                    return Err(invalid("profile.delta belongs to the exponential family".into()));
                }
                vec![
                    p.amp,
                    p.ell_rho.ok_or_else(|| invalid("algebraic profile needs profile.ell_rho".into()))?,
                ]
            }
            DensityFamily::Exponential => {
                if p.ell_rho.is_some() {
                    return Err(invalid("profile.ell_rho belongs to the algebraic family".into()));
                }
                vec![p.delta.ok_or_else(|| invalid("exponential profile needs profile.delta".into()))?]
            }
        };
        make_density_profile(p.family, &params).map_err(|e| invalid(format!("profile: {e}")))
    }

    pub fn gas_constants(&self) -> Result<GasConstants<f64>> {
        let g = &self.gas;
        GasConstants::new(g.mu, g.kappa, g.r_gas, g.c_v, g.a_entropy).map_err(|e| invalid(format!("gas: {e}")))
    }

    pub fn initial_fields(&self) -> Result<InitialFields<f64>> {
        let i = &self.initial;
        let v0 = match i.velocity {
            VelocityKind::Zero => VelocityField::Zero,
            VelocityKind::GaussianOdd => VelocityField::GaussianOdd { amp: i.velocity_amp },
        };
        let th0 = match i.temperature {
            TemperatureKind::Zero => TemperatureField::Zero,
            TemperatureKind::Gaussian => TemperatureField::Gaussian { amp: i.temperature_amp },
        };
        InitialFields::new(self.density_profile()?, v0, th0, self.gas_constants()?).map_err(|e| invalid(format!("initial: {e}")))
    }

    /// Solver settings; snapshots at 0, the configured times, t_probe and t_end.
    pub fn solver_config(&self) -> SolverConfig<f64> {
        let gas = self.gas_constants().unwrap_or_default();
        let s = &self.solver;
        let mut cfg = SolverConfig::new(s.dt_max, gas);
        cfg.dt_init = s.dt_init.unwrap_or(s.dt_max);
        cfg.cfl_factor = s.cfl_factor;
        cfg.picard_iters = s.picard_iters;
        cfg.v_floor = s.v_floor;
        let mut times = s.snapshot_times.clone();
        times.push(0.0);
        times.push(s.t_end);
        if self.diagnostics.t_probe <= s.t_end {
            times.push(self.diagnostics.t_probe);
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        cfg.snapshot_times = times;
        cfg
    }

    /// Domain sequence of a sweep: the `[domains]` table, or `n_levels`
    /// doublings of `grid.half_width` when absent.
    pub fn domain_sequence(&self, n_levels: Option<usize>) -> Result<DomainSequence> {
        let mut seq = self.domains.unwrap_or(DomainSequence {
            base_half_width: self.grid.half_width,
            growth: 2.0,
            n_levels: 4,
        });
        if let Some(n) = n_levels {
            seq.n_levels = n;
        }
        seq.validate()?;
        Ok(seq)
    }

    /// Hex SHA-256 of the canonical JSON form (keys sorted).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}
