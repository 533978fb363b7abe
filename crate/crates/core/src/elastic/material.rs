//! Bulk energy densities: scalar integrands and the isotropic elasticity tensor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandKind {
    Quadratic,
    PPower,
}

/// Scalar energy density `f(x, ξ)`, independent of `x` apart from the
/// lower-order offsets used in the growth bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrand {
    pub kind: IntegrandKind,
    /// Growth exponent; always 2 for the quadratic kind.
    #[serde(default = "two")]
    pub p: f64,
    /// Lower growth constant `c` in `c|ξ|^p - a ≤ f`.
    #[serde(default)]
    pub c: Option<f64>,
    /// Upper growth constant `C` in `f ≤ C|ξ|^p + a` and `|∂f| ≤ C|ξ|^{p-1} + b`.
    #[serde(default, rename = "C")]
    pub big_c: Option<f64>,
    #[serde(default)]
    pub a_offset: f64,
    #[serde(default)]
    pub b_offset: f64,
}

fn two() -> f64 {
    2.0
}

impl Integrand {
    pub fn quadratic() -> Self {
        Self {
            kind: IntegrandKind::Quadratic,
            p: 2.0,
            c: None,
            big_c: None,
            a_offset: 0.0,
            b_offset: 0.0,
        }
    }

    pub fn p_power(p: f64) -> Result<Self> {
        let f = Self {
            kind: IntegrandKind::PPower,
            p,
            c: None,
            big_c: None,
            a_offset: 0.0,
            b_offset: 0.0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            IntegrandKind::Quadratic if self.p != 2.0 => {
                return Err(Error::Validation("quadratic integrand requires p = 2".into()))
            }
            IntegrandKind::PPower if !(self.p > 1.0 && self.p <= 2.0) => {
                return Err(Error::Validation(format!("exponent {} outside (1, 2]", self.p)))
            }
            _ => {}
        }
        let (c, big_c) = (self.lower_constant(), self.upper_constant());
        if !(c > 0.0 && c <= big_c && big_c.is_finite()) {
            return Err(Error::Validation(format!("growth constants need 0 < c ≤ C, got {c}, {big_c}")));
        }
        if !(self.a_offset >= 0.0 && self.b_offset >= 0.0) {
            return Err(Error::Validation("offsets must be non-negative".into()));
        }
        Ok(())
    }

    /// Exponent governing the growth of `f`.
    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// Degree of homogeneity of the minimal energy in the datum amplitude.
    pub fn homogeneity(&self) -> f64 {
        self.p
    }

    /// `c`; defaults to the sharp constant `1/p`.
    pub fn lower_constant(&self) -> f64 {
        self.c.unwrap_or(1.0 / self.p)
    }

    /// `C`; defaults to 1, which bounds both `f` and `|∂f|`.
    pub fn upper_constant(&self) -> f64 {
        self.big_c.unwrap_or(1.0)
    }

    pub fn value(&self, xi: [f64; 2]) -> f64 {
        let sq = xi[0] * xi[0] + xi[1] * xi[1];
        match self.kind {
            IntegrandKind::Quadratic => 0.5 * sq,
            IntegrandKind::PPower => sq.powf(0.5 * self.p) / self.p,
        }
    }

    pub fn gradient(&self, xi: [f64; 2]) -> [f64; 2] {
        match self.kind {
            IntegrandKind::Quadratic => xi,
            IntegrandKind::PPower => {
                let sq = xi[0] * xi[0] + xi[1] * xi[1];
                if sq == 0.0 {
                    return [0.0, 0.0];
                }
                let s = sq.powf(0.5 * (self.p - 2.0));
                [s * xi[0], s * xi[1]]
            }
        }
    }

    /// Hessian of the regularized density `(|ξ|² + ε²)^{p/2} / p`; exact for
    /// the quadratic kind.
    pub(crate) fn regularized_hessian(&self, xi: [f64; 2], eps2: f64) -> [[f64; 2]; 2] {
        match self.kind {
            IntegrandKind::Quadratic => [[1.0, 0.0], [0.0, 1.0]],
            IntegrandKind::PPower => {
                let r = xi[0] * xi[0] + xi[1] * xi[1] + eps2;
                let s = r.powf(0.5 * (self.p - 2.0));
                let t = (self.p - 2.0) * r.powf(0.5 * (self.p - 4.0));
                [
                    [s + t * xi[0] * xi[0], t * xi[0] * xi[1]],
                    [t * xi[0] * xi[1], s + t * xi[1] * xi[1]],
                ]
            }
        }
    }

    /// Density `((|ξ|² + ε²)^{p/2} - ε^p) / p` of the smoothed p-power
    /// problem; the plain density for the quadratic kind or `eps2 = 0`.
    pub(crate) fn regularized_value(&self, xi: [f64; 2], eps2: f64) -> f64 {
        match self.kind {
            IntegrandKind::Quadratic => self.value(xi),
            IntegrandKind::PPower => {
                if eps2 == 0.0 {
                    return self.value(xi);
                }
                let sq = xi[0] * xi[0] + xi[1] * xi[1];
                eps2.powf(0.5 * self.p) * (0.5 * self.p * (sq / eps2).ln_1p()).exp_m1() / self.p
            }
        }
    }

    pub(crate) fn regularized_gradient(&self, xi: [f64; 2], eps2: f64) -> [f64; 2] {
        match self.kind {
            IntegrandKind::PPower if eps2 > 0.0 => {
                let s = (xi[0] * xi[0] + xi[1] * xi[1] + eps2).powf(0.5 * (self.p - 2.0));
                [s * xi[0], s * xi[1]]
            }
            _ => self.gradient(xi),
        }
    }
}

/// Isotropic tensor `ℂA = 2μA + λ tr(A) I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticityTensor {
    pub lambda: f64,
    pub mu: f64,
}

impl ElasticityTensor {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        let t = Self { lambda, mu };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.mu > 0.0) || !self.lambda.is_finite() || !self.mu.is_finite() {
            return Err(Error::Validation(format!(
                "Lamé parameters need lambda ≥ 0 and mu > 0, got {}, {}",
                self.lambda, self.mu
            )));
        }
        Ok(())
    }

    pub fn alpha_c(&self) -> f64 {
        2.0 * self.mu
    }

    pub fn beta_c(&self) -> f64 {
        2.0 * self.mu + 2.0 * self.lambda
    }

    /// `ℂA : B` for 2×2 matrices.
    pub fn contract(&self, a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
        let mut ab = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                ab += a[r][c] * b[r][c];
            }
        }
        2.0 * self.mu * ab + self.lambda * (a[0][0] + a[1][1]) * (b[0][0] + b[1][1])
    }
}
