//! Parameters of `u_tt - Δu + m u = |x|^b f(u)`, the two concrete
//! nonlinearities and their primitives, scaling arithmetic, and the
//! hypothesis sets under which global well-posedness is known.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest argument accepted by the exponential nonlinearity.
pub const EXP_OVERFLOW_GUARD: f64 = 700.0;

/// Tolerance for the admissibility identity `1/q + 3/r = 1/2`.
pub const ADMISSIBLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("exponential nonlinearity overflow: u = {u} exceeds {EXP_OVERFLOW_GUARD}")]
    Overflow { u: f64 },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("no scaling invariance for the {0} nonlinearity")]
    NoScaling(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `f(u) = -(e^u - 1 - u)`, two dimensions with unit mass.
    Exp2D,
    /// `f(u) = -|u|^{p-1} u`, three dimensions, massless.
    Power3D { p: f64 },
    /// `f = 0`: the free Klein-Gordon / wave equation.
    Linear,
}

impl Nonlinearity {
    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Exp2D => "exp2d",
            Nonlinearity::Power3D { .. } => "power3d",
            Nonlinearity::Linear => "linear",
        }
    }
}

/// `(N, b, m, f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelBlock", into = "ModelBlock")]
pub struct ModelSpec {
    dim: usize,
    b: f64,
    m: f64,
    kind: Nonlinearity,
}

/// Flat serialized form of [`ModelSpec`] used in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub dim: usize,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl TryFrom<ModelBlock> for ModelSpec {
    type Error = ModelError;

    fn try_from(block: ModelBlock) -> Result<Self, ModelError> {
        let kind = match block.kind.to_ascii_lowercase().as_str() {
            "exp2d" => {
                if block.p.is_some() {
                    return Err(ModelError::Invalid("`p` is only meaningful for power3d".into()));
                }
                Nonlinearity::Exp2D
            }
            "power3d" => Nonlinearity::Power3D {
                p: block
                    .p
                    .ok_or_else(|| ModelError::Invalid("power3d requires `p`".into()))?,
            },
            "linear" => Nonlinearity::Linear,
            other => {
                return Err(ModelError::Invalid(format!(
                    "unknown nonlinearity kind `{other}` (expected exp2d, power3d or linear)"
                )))
            }
        };
        let m = block.m.unwrap_or(match kind {
            Nonlinearity::Exp2D => 1.0,
            Nonlinearity::Power3D { .. } => 0.0,
            Nonlinearity::Linear => {
                if block.dim == 2 {
                    1.0
                } else {
                    0.0
                }
            }
        });
        ModelSpec::new(block.dim, block.b, m, kind)
    }
}

impl From<ModelSpec> for ModelBlock {
    fn from(spec: ModelSpec) -> Self {
        ModelBlock {
            dim: spec.dim,
            b: spec.b,
            m: Some(spec.m),
            kind: spec.kind.name().to_string(),
            p: match spec.kind {
                Nonlinearity::Power3D { p } => Some(p),
                _ => None,
            },
        }
    }
}

impl ModelSpec {
    pub fn new(dim: usize, b: f64, m: f64, kind: Nonlinearity) -> Result<Self, ModelError> {
        if dim != 2 && dim != 3 {
            return Err(ModelError::Invalid(format!("dimension {dim} is not 2 or 3")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(ModelError::Invalid(format!("weight exponent b = {b} must be >= 0")));
        }
        if m != 0.0 && m != 1.0 {
            return Err(ModelError::Invalid(format!("mass m = {m} must be 0 or 1")));
        }
        match kind {
            Nonlinearity::Exp2D if dim != 2 || m != 1.0 => {
                return Err(ModelError::Invalid(
                    "the exponential nonlinearity requires N = 2 and m = 1".into(),
                ))
            }
            Nonlinearity::Power3D { p } => {
                if dim != 3 || m != 0.0 {
                    return Err(ModelError::Invalid(
                        "the power nonlinearity requires N = 3 and m = 0".into(),
                    ));
                }
                if !(p.is_finite() && p > 1.0) {
                    return Err(ModelError::Invalid(format!("power p = {p} must exceed 1")));
                }
            }
            _ => {}
        }
        Ok(Self { dim, b, m, kind })
    }

    pub fn exp2d(b: f64) -> Result<Self, ModelError> {
        Self::new(2, b, 1.0, Nonlinearity::Exp2D)
    }

    pub fn power3d(b: f64, p: f64) -> Result<Self, ModelError> {
        Self::new(3, b, 0.0, Nonlinearity::Power3D { p })
    }

    pub fn linear(dim: usize, m: f64) -> Result<Self, ModelError> {
        Self::new(dim, 0.0, m, Nonlinearity::Linear)
    }

    /// Free equation with the same dimension and mass.
    pub fn linear_companion(&self) -> Self {
        Self {
            dim: self.dim,
            b: 0.0,
            m: self.m,
            kind: Nonlinearity::Linear,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn kind(&self) -> Nonlinearity {
        self.kind
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, Nonlinearity::Linear)
    }

    /// `f(u)`.
    #[inline]
    pub fn f_eval(&self, u: f64) -> Result<f64, ModelError> {
        match self.kind {
            Nonlinearity::Exp2D => {
                if u > EXP_OVERFLOW_GUARD {
                    return Err(ModelError::Overflow { u });
                }
                Ok(-(u.exp_m1() - u))
            }
            Nonlinearity::Power3D { p } => Ok(-u.abs().powf(p - 1.0) * u),
            Nonlinearity::Linear => Ok(0.0),
        }
    }

    /// `F(u) = int_0^u f`.
    #[inline]
    pub fn big_f_eval(&self, u: f64) -> Result<f64, ModelError> {
        match self.kind {
            Nonlinearity::Exp2D => {
                if u > EXP_OVERFLOW_GUARD {
                    return Err(ModelError::Overflow { u });
                }
                Ok(-exp_remainder3(u))
            }
            Nonlinearity::Power3D { p } => Ok(-u.abs().powf(p + 1.0) / (p + 1.0)),
            Nonlinearity::Linear => Ok(0.0),
        }
    }
}

/// `e^u - 1 - u - u^2/2` without cancellation near zero.
pub(crate) fn exp_remainder3(u: f64) -> f64 {
    if u.abs() < 0.1 {
        // Taylor tail; 12 terms reach machine precision for |u| < 0.1.
        let mut term = u * u * u / 6.0;
        let mut sum = 0.0;
        for k in 4..16 {
            sum += term;
            term *= u / k as f64;
        }
        sum
    } else {
        u.exp_m1() - u - 0.5 * u * u
    }
}

/// `e^s - 1 - s` without cancellation near zero.
pub(crate) fn exp_remainder2(s: f64) -> f64 {
    if s.abs() < 0.1 {
        let mut term = s * s / 2.0;
        let mut sum = 0.0;
        for k in 3..18 {
            sum += term;
            term *= s / k as f64;
        }
        sum
    } else {
        s.exp_m1() - s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criticality {
    MassSubcritical,
    MassCritical,
    InterCritical,
    EnergyCritical,
    EnergySupercritical,
}

/// Scaling data of the power nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalityReport {
    pub s_c: f64,
    pub p_mass_critical: f64,
    pub p_energy_critical: f64,
    pub classification: Criticality,
}

/// `s_c = N/2 - (2+b)/(p-1)` and the two critical powers.
///
/// The critical cases are decided by comparing `p` with the critical powers,
/// and `s_c` is reported as exactly 0 or 1 there.
pub fn critical_exponent(spec: &ModelSpec) -> Result<CriticalityReport, ModelError> {
    let p = match spec.kind {
        Nonlinearity::Power3D { p } => p,
        other => return Err(ModelError::NoScaling(other.name())),
    };
    let n = spec.dim as f64;
    let b = spec.b;
    let p_mass = (n + 4.0 + 2.0 * b) / n;
    let p_energy = (n + 2.0 + 2.0 * b) / (n - 2.0);
    let (s_c, classification) = if p == p_mass {
        (0.0, Criticality::MassCritical)
    } else if p == p_energy {
        (1.0, Criticality::EnergyCritical)
    } else {
        let s = n / 2.0 - (2.0 + b) / (p - 1.0);
        let class = if p < p_mass {
            Criticality::MassSubcritical
        } else if p < p_energy {
            Criticality::InterCritical
        } else {
            Criticality::EnergySupercritical
        };
        (s, class)
    };
    Ok(CriticalityReport {
        s_c,
        p_mass_critical: p_mass,
        p_energy_critical: p_energy,
        classification,
    })
}

/// One failed hypothesis of a well-posedness theorem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisViolation {
    pub theorem: &'static str,
    pub condition: &'static str,
    pub detail: String,
}

impl std::fmt::Display for HypothesisViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: requires {} ({})", self.theorem, self.condition, self.detail)
    }
}

pub const THEOREM_2D: &str = "global well-posedness, N=2 exponential";
pub const THEOREM_3D: &str = "global well-posedness, N=3 power";

/// Checks the parameter ranges of the global well-posedness results:
/// `0 <= b <= 1/2` in 2D, and `b > 0`, `1 + b <= p < 4 + b` in 3D.
/// An empty list means every hypothesis holds.
pub fn validate_hypotheses(spec: &ModelSpec) -> Vec<HypothesisViolation> {
    let mut out = Vec::new();
    let b = spec.b;
    match spec.kind {
        Nonlinearity::Exp2D => {
            if b < 0.0 {
                out.push(HypothesisViolation {
                    theorem: THEOREM_2D,
                    condition: "0 <= b",
                    detail: format!("b = {b}"),
                });
            }
            if b > 0.5 {
                out.push(HypothesisViolation {
                    theorem: THEOREM_2D,
                    condition: "b <= 1/2",
                    detail: format!("b = {b}"),
                });
            }
        }
        Nonlinearity::Power3D { p } => {
            if b <= 0.0 {
                out.push(HypothesisViolation {
                    theorem: THEOREM_3D,
                    condition: "b > 0",
                    detail: format!("b = {b}"),
                });
            }
            if p < 1.0 + b {
                out.push(HypothesisViolation {
                    theorem: THEOREM_3D,
                    condition: "1 + b <= p",
                    detail: format!("p = {p}, 1 + b = {}", 1.0 + b),
                });
            }
            if p >= 4.0 + b {
                out.push(HypothesisViolation {
                    theorem: THEOREM_3D,
                    condition: "p < 4 + b",
                    detail: format!("p = {p}, 4 + b = {}", 4.0 + b),
                });
            }
        }
        Nonlinearity::Linear => {}
    }
    out
}

/// H^1 wave admissibility in three dimensions:
/// `1/q + 3/r = 1/2`, `2 < q <= inf`, `6 <= r < inf`.
pub fn admissible_pair_check(q: f64, r: f64) -> bool {
    if q.is_nan() || r.is_nan() {
        return false;
    }
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    q > 2.0 && r >= 6.0 && r.is_finite() && (inv_q + 3.0 / r - 0.5).abs() <= ADMISSIBLE_TOL
}

/// The Strichartz pair `(q, r) = (2/(p-b-3), 6/(4+b-p))` matched to the power
/// nonlinearity, meaningful for `3 + b < p < 4 + b`.
pub fn strichartz_pair(p: f64, b: f64) -> (f64, f64) {
    (2.0 / (p - b - 3.0), 6.0 / (4.0 + b - p))
}
