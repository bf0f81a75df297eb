//! Plain-text configuration files.
//!
//! One `key = value` assignment per line, `#` starts a comment. Unknown
//! keys are rejected. All keys have defaults except the mesh resolution.
//!
//! ```text
//! n = 8                      # mesh resolution; a list (4,8,16) for converge
//! mu1 = 1.0                  # subdomain 1 (z < 0.5): diffusivity
//! r1 = 1.0                   #   reaction
//! g1 = 1.0                   #   source
//! v1 = 0.0,0.0,1.0           #   advection vector
//! mu2 = 1.0                  # subdomain 2 (z > 0.5), same fields
//! r2 = 1.0
//! g2 = 1.0
//! v2 = 0.0,0.0,1.0
//! kappa = 1.0                # interface segregation coefficient
//! sigma = 0.0                # interface surface source
//! bc_bottom = dirichlet:0.0  # dirichlet:<u> | neumann:<flux> | robin:<alpha>:<beta>
//! bc_top = dirichlet:1.0
//! bc_lateral = neumann:0.0
//! stabilization = none       # none | sg | upwind
//! analytic = auto            # auto | off (reference solution for error output)
//! c_star = 1.0               # trace constant for `check`
//! sweep_cases = 0.5:1.0, 0.0125:0.625   # mu:vz pairs for `sweep`
//! ```

use std::fmt;
use std::str::FromStr;

use dmh_core::problem::{BoundaryCondition, ProblemSpec, RegionBoundary, StabilizationMode};

/// Whether error output against the closed-form reference is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticChoice {
    /// Use the closed-form reference when the coefficients admit one.
    Auto,
    Off,
}

/// Parsed configuration file.
#[derive(Debug, Clone)]
pub struct ConfigFile {
    pub resolutions: Vec<usize>,
    pub mu1: f64,
    pub r1: f64,
    pub g1: f64,
    pub v1: [f64; 3],
    pub mu2: f64,
    pub r2: f64,
    pub g2: f64,
    pub v2: [f64; 3],
    pub kappa: f64,
    pub sigma: f64,
    pub bc_bottom: BoundaryCondition,
    pub bc_top: BoundaryCondition,
    pub bc_lateral: BoundaryCondition,
    pub stabilization: StabilizationMode,
    pub analytic: AnalyticChoice,
    pub c_star: f64,
    pub sweep_cases: Vec<(f64, f64)>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile {
            resolutions: Vec::new(),
            mu1: 1.0,
            r1: 1.0,
            g1: 1.0,
            v1: [0.0, 0.0, 1.0],
            mu2: 1.0,
            r2: 1.0,
            g2: 1.0,
            v2: [0.0, 0.0, 1.0],
            kappa: 1.0,
            sigma: 0.0,
            bc_bottom: BoundaryCondition::Dirichlet(0.0),
            bc_top: BoundaryCondition::Dirichlet(1.0),
            bc_lateral: BoundaryCondition::Neumann(0.0),
            stabilization: StabilizationMode::None,
            analytic: AnalyticChoice::Auto,
            c_star: 1.0,
            sweep_cases: Vec::new(),
        }
    }
}

/// A configuration error with the offending line.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    f64::from_str(value.trim())
        .map_err(|_| ConfigError(format!("key `{key}`: `{value}` is not a number")))
}

fn parse_vec3(key: &str, value: &str) -> Result<[f64; 3], ConfigError> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 3 {
        return Err(ConfigError(format!(
            "key `{key}`: expected three comma-separated components, got `{value}`"
        )));
    }
    Ok([
        parse_f64(key, parts[0])?,
        parse_f64(key, parts[1])?,
        parse_f64(key, parts[2])?,
    ])
}

fn parse_bc(key: &str, value: &str) -> Result<BoundaryCondition, ConfigError> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts.as_slice() {
        ["dirichlet", v] => Ok(BoundaryCondition::Dirichlet(parse_f64(key, v)?)),
        ["neumann", v] => Ok(BoundaryCondition::Neumann(parse_f64(key, v)?)),
        ["robin", a, b] => Ok(BoundaryCondition::Robin {
            alpha: parse_f64(key, a)?,
            beta: parse_f64(key, b)?,
        }),
        _ => Err(ConfigError(format!(
            "key `{key}`: expected dirichlet:<u>, neumann:<flux> or robin:<alpha>:<beta>, got `{value}`"
        ))),
    }
}

impl FromStr for ConfigFile {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut config = ConfigFile::default();
        let mut saw_resolution = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "n" => {
                    config.resolutions = value
                        .split(',')
                        .map(|p| {
                            p.trim().parse::<usize>().map_err(|_| {
                                ConfigError(format!("key `n`: `{p}` is not an integer"))
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    if config.resolutions.is_empty() {
                        return Err(ConfigError("key `n`: empty resolution list".into()));
                    }
                    saw_resolution = true;
                }
                "mu1" => config.mu1 = parse_f64(key, value)?,
                "r1" => config.r1 = parse_f64(key, value)?,
                "g1" => config.g1 = parse_f64(key, value)?,
                "v1" => config.v1 = parse_vec3(key, value)?,
                "mu2" => config.mu2 = parse_f64(key, value)?,
                "r2" => config.r2 = parse_f64(key, value)?,
                "g2" => config.g2 = parse_f64(key, value)?,
                "v2" => config.v2 = parse_vec3(key, value)?,
                "kappa" => config.kappa = parse_f64(key, value)?,
                "sigma" => config.sigma = parse_f64(key, value)?,
                "bc_bottom" => config.bc_bottom = parse_bc(key, value)?,
                "bc_top" => config.bc_top = parse_bc(key, value)?,
                "bc_lateral" => config.bc_lateral = parse_bc(key, value)?,
                "stabilization" => {
                    config.stabilization = match value {
                        "none" => StabilizationMode::None,
                        "sg" => StabilizationMode::Sg,
                        "upwind" => StabilizationMode::Upwind,
                        _ => {
                            return Err(ConfigError(format!(
                                "key `stabilization`: expected none|sg|upwind, got `{value}`"
                            )))
                        }
                    }
                }
                "analytic" => {
                    config.analytic = match value {
                        "auto" => AnalyticChoice::Auto,
                        "off" => AnalyticChoice::Off,
                        _ => {
                            return Err(ConfigError(format!(
                                "key `analytic`: expected auto|off, got `{value}`"
                            )))
                        }
                    }
                }
                "c_star" => config.c_star = parse_f64(key, value)?,
                "sweep_cases" => {
                    config.sweep_cases = value
                        .split(',')
                        .map(|case| {
                            let parts: Vec<&str> = case.split(':').map(str::trim).collect();
                            if parts.len() != 2 {
                                return Err(ConfigError(format!(
                                    "key `sweep_cases`: expected mu:vz, got `{case}`"
                                )));
                            }
                            Ok((parse_f64(key, parts[0])?, parse_f64(key, parts[1])?))
                        })
                        .collect::<Result<_, _>>()?;
                }
                _ => return Err(ConfigError(format!("unknown key `{key}`"))),
            }
        }
        if !saw_resolution {
            return Err(ConfigError("missing required key `n`".into()));
        }
        Ok(config)
    }
}

impl fmt::Display for ConfigFile {
    /// Canonical serialization; parsing it reproduces the configuration.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = self
            .resolutions
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(f, "n = {list}")?;
        writeln!(f, "mu1 = {}", self.mu1)?;
        writeln!(f, "r1 = {}", self.r1)?;
        writeln!(f, "g1 = {}", self.g1)?;
        writeln!(f, "v1 = {},{},{}", self.v1[0], self.v1[1], self.v1[2])?;
        writeln!(f, "mu2 = {}", self.mu2)?;
        writeln!(f, "r2 = {}", self.r2)?;
        writeln!(f, "g2 = {}", self.g2)?;
        writeln!(f, "v2 = {},{},{}", self.v2[0], self.v2[1], self.v2[2])?;
        writeln!(f, "kappa = {}", self.kappa)?;
        writeln!(f, "sigma = {}", self.sigma)?;
        for (key, bc) in [
            ("bc_bottom", self.bc_bottom),
            ("bc_top", self.bc_top),
            ("bc_lateral", self.bc_lateral),
        ] {
            match bc {
                BoundaryCondition::Dirichlet(v) => writeln!(f, "{key} = dirichlet:{v}")?,
                BoundaryCondition::Neumann(v) => writeln!(f, "{key} = neumann:{v}")?,
                BoundaryCondition::Robin { alpha, beta } => {
                    writeln!(f, "{key} = robin:{alpha}:{beta}")?
                }
            }
        }
        let stab = match self.stabilization {
            StabilizationMode::None => "none",
            StabilizationMode::Sg => "sg",
            StabilizationMode::Upwind => "upwind",
        };
        writeln!(f, "stabilization = {stab}")?;
        let analytic = match self.analytic {
            AnalyticChoice::Auto => "auto",
            AnalyticChoice::Off => "off",
        };
        writeln!(f, "analytic = {analytic}")?;
        writeln!(f, "c_star = {}", self.c_star)?;
        if !self.sweep_cases.is_empty() {
            let cases = self
                .sweep_cases
                .iter()
                .map(|(mu, vz)| format!("{mu}:{vz}"))
                .collect::<Vec<_>>()
                .join(", ");
            writeln!(f, "sweep_cases = {cases}")?;
        }
        Ok(())
    }
}

impl ConfigFile {
    /// Builds the solver-facing problem description.
    pub fn problem_spec(&self) -> ProblemSpec {
        let mut spec = ProblemSpec::uniform(self.mu1, self.r1, self.g1, self.v1);
        spec.omega2.mu = self.mu2.into();
        spec.omega2.reaction = self.r2.into();
        spec.omega2.source = self.g2.into();
        spec.omega2.velocity = self.v2.into();
        spec.kappa = self.kappa.into();
        spec.sigma = self.sigma.into();
        spec.boundary = RegionBoundary {
            bottom: self.bc_bottom,
            top: self.bc_top,
            lateral: self.bc_lateral,
        };
        spec.stabilization = self.stabilization;
        spec
    }

    /// The closed-form reference solution, when the configuration admits
    /// one: uniform coefficients with z-axis advection, positive reaction
    /// and the standard boundary setup.
    pub fn reference_solution(&self) -> Option<dmh_core::analytic::AnalyticSolution> {
        if self.analytic == AnalyticChoice::Off {
            return None;
        }
        let uniform = self.mu1 == self.mu2
            && self.r1 == self.r2
            && self.g1 == self.g2
            && self.v1 == self.v2
            && self.v1[0] == 0.0
            && self.v1[1] == 0.0
            && self.r1 > 0.0;
        let standard_bcs = self.bc_bottom == BoundaryCondition::Dirichlet(0.0)
            && self.bc_top == BoundaryCondition::Dirichlet(1.0)
            && self.bc_lateral == BoundaryCondition::Neumann(0.0);
        if !(uniform && standard_bcs) {
            return None;
        }
        let vz = self.v1[2];
        if self.kappa == 1.0 && self.sigma == 0.0 {
            dmh_core::analytic::nonactive_solution(self.mu1, self.r1, self.g1, vz).ok()
        } else {
            dmh_core::analytic::active_solution(
                self.mu1, self.r1, self.g1, vz, self.kappa, self.sigma,
            )
            .ok()
        }
    }
}
