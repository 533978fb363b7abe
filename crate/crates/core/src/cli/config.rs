//! JSON run configuration shared by all subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crack::CrackSpec;
use crate::curve::{CurveSpec, DEFAULT_CERTIFICATION_DEPTH, DEFAULT_PAIR_BUDGET};
use crate::elastic::{Datum, Domain, Integrand, Physics, Polynomial, SolverOptions};
use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

fn cert_depth() -> u32 {
    DEFAULT_CERTIFICATION_DEPTH
}

fn pair_budget() -> usize {
    DEFAULT_PAIR_BUDGET
}

/// Which optional artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitOptions {
    #[serde(default = "yes")]
    pub fields: bool,
    #[serde(default = "yes")]
    pub masks: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self { fields: true, masks: true }
    }
}

/// `curve`: pre-fractal vertices and Hölder certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub curve: CurveSpec,
    pub depth: u32,
    #[serde(default = "cert_depth")]
    pub certification_depth: u32,
    #[serde(default = "pair_budget")]
    pub pair_budget: usize,
}

/// `solve`: one static problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub domain: Domain,
    /// Omitted means the uncracked domain.
    #[serde(default)]
    pub crack: Option<CrackSpec>,
    #[serde(default)]
    pub depth: Option<u32>,
    pub datum: Datum,
    #[serde(default = "one")]
    pub lambda: f64,
    pub physics: Physics,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "cert_depth")]
    pub certification_depth: u32,
}

/// `audit`: tolerances for the re-check of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    /// Admissible stability violation; defaults to the evolution's tolerance.
    #[serde(default)]
    pub stability_tol: Option<f64>,
    /// Optional bound on the final energy-balance residual.
    #[serde(default)]
    pub max_energy_residual: Option<f64>,
}

/// `converge`: minimizer convergence along crack depths on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub domain: Domain,
    pub crack: CrackSpec,
    pub datum: Polynomial,
    pub integrand: Integrand,
    pub depths: Vec<u32>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "cert_depth")]
    pub certification_depth: u32,
}

/// `dimension`: box counts, dimension fit and the content table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionSection {
    pub curve: CurveSpec,
    /// Depth of the pre-fractal used for box counting.
    pub depth: u32,
    pub eps: Vec<f64>,
    /// Exponent of the contents; defaults to the curve dimension.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Pre-fractal levels tabulated in the content table; empty skips the table.
    #[serde(default)]
    pub content_depths: Vec<u32>,
    #[serde(default)]
    pub deep_depth: Option<u32>,
    #[serde(default)]
    pub resolved_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub emit: EmitOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionSection>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical (compact) JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Range checks that need no solves.
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.curve {
            if c.depth > 12 {
                return Err(Error::Validation("curve depth above 12 is not supported".into()));
            }
            if c.certification_depth < 2 || c.certification_depth > 8 {
                return Err(Error::Validation("certification depth must lie in [2, 8]".into()));
            }
            if c.pair_budget == 0 {
                return Err(Error::Validation("pair budget must be positive".into()));
            }
        }
        if let Some(s) = &self.solve {
            s.domain.validate()?;
            s.physics.validate()?;
            s.physics.check_datum(&s.datum)?;
            s.solver.validate()?;
            if !s.lambda.is_finite() {
                return Err(Error::Validation("load factor must be finite".into()));
            }
        }
        if let Some(e) = &self.evolution {
            e.validate()?;
        }
        if let Some(a) = &self.audit {
            if a.stability_tol.is_some_and(|t| !(t >= 0.0)) || a.max_energy_residual.is_some_and(|t| !(t >= 0.0)) {
                return Err(Error::Validation("audit tolerances must be non-negative".into()));
            }
        }
        if let Some(c) = &self.converge {
            c.domain.validate()?;
            c.integrand.validate()?;
            c.datum.validate()?;
            c.solver.validate()?;
            if c.depths.is_empty() || c.depths.windows(2).any(|w| w[1] <= w[0]) || c.depths[c.depths.len() - 1] > 10 {
                return Err(Error::Validation("depths must increase strictly and stay at most 10".into()));
            }
        }
        if let Some(d) = &self.dimension {
            if d.depth > 12 || d.deep_depth.is_some_and(|x| x > 12) || d.content_depths.iter().any(|&x| x > 8) {
                return Err(Error::Validation("dimension depths out of range".into()));
            }
            if d.eps.iter().any(|e| !(*e > 0.0)) {
                return Err(Error::Validation("box sizes must be positive".into()));
            }
            if d.alpha.is_some_and(|a| !(a > 0.0 && a <= 2.0)) {
                return Err(Error::Validation("alpha must lie in (0, 2]".into()));
            }
        }
        Ok(())
    }
}
