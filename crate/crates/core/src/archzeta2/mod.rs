//! Numerics for weighted line arrangements in the plane: the regularized constant `C(b')`, its
//! derivatives, the residue of the archimedean zeta function at `-2/d`, and direct quadrature of
//! the zeta integral.
//!
//! Coordinates are normalized so that the lines are `x + a_l y` with `a_1 = 0` carrying the
//! largest multiplicity `b1`. After the blow-up `x = uv, y = v` the relevant integrand on the
//! `u`-plane is `|u|^(-p) prod_l |1 + u/a_l|^(-q_l)` with `p = 4 b1/d`, `q_l = 4 b_l/d`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
mod cconst;
pub mod plane;
pub mod quad;
mod verify;
mod zeta;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::exact::{int, rat, Rational};
use crate::resolution;

pub use verify::{verify_section4, PointCheck, Section4Report, VertexCheck};
pub use zeta::{direct_zeta, residue_fit, zeta_continued, ZetaValue};
pub use cconst::{c_constant, grad_c, hess_c, residue_nd, CReport, DerivativeReport, HessianReport};


#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Cancelling leading terms are removed analytically before summation.
    Extended,
}

impl Precision {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" => Ok(Self::Double),
            "extended" => Ok(Self::Extended),
            other => Err(Error::InvalidInput(format!(
                "unknown precision {other:?}, expected double or extended"
            ))),
        }
    }

    /// Reads `ARRZETA_PRECISION`, defaulting to double.
    pub fn from_env() -> Result<Self> {
        match std::env::var("ARRZETA_PRECISION") {
            Ok(v) => Self::parse(&v),
            Err(_) => Ok(Self::Double),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LineConfig {
    /// `a_1 = 0, a_2, ..., a_r` as complex numbers.
    #[serde(serialize_with = "ser_complex_list")]
    pub slopes: Vec<Complex64>,
    pub b1: u64,
    pub d: u64,
}

fn ser_complex_list<S: serde::Serializer>(
    z: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(z.len()))?;
    for w in z {
        seq.serialize_element(&[w.re, w.im])?;
    }
    seq.end()
}

impl LineConfig {
    pub fn new(slopes: Vec<Complex64>, b1: u64, d: u64) -> Result<Self> {
        if slopes.len() < 2 {
            return Err(Error::InvalidInput("at least two lines are required".into()));
        }
        if slopes[0] != Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("the first slope must be 0".into()));
        }
        for (i, a) in slopes.iter().enumerate() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::InvalidInput("slopes must be finite".into()));
            }
            if slopes[..i].iter().any(|b| (a - b).norm() == 0.0) {
                return Err(Error::InvalidInput("slopes must be distinct".into()));
            }
        }
        if b1 == 0 || d < b1 {
            return Err(Error::InvalidInput(format!("need 0 < b1 <= d, got b1={b1}, d={d}")));
        }
        Ok(Self { slopes, b1, d })
    }

    pub fn from_real(slopes: &[f64], b1: u64, d: u64) -> Result<Self> {
        Self::new(slopes.iter().map(|&a| Complex64::new(a, 0.0)).collect(), b1, d)
    }

    /// `b[0]` belongs to the line of slope 0 and must be the largest multiplicity.
    pub fn for_multiplicities(slopes: &[f64], b: &[u64]) -> Result<Self> {
        check_multiplicities(slopes.len(), b)?;
        Self::from_real(slopes, b[0], b.iter().sum())
    }

    pub fn r(&self) -> usize {
        self.slopes.len()
    }

    /// The nonzero slopes `a_2, ..., a_r`.
    pub fn others(&self) -> &[Complex64] {
        &self.slopes[1..]
    }

    /// `-a_l`, the singular points of the `u`-integrand away from the origin.
    pub fn singular_points(&self) -> Vec<Complex64> {
        self.others().iter().map(|a| -a).collect()
    }

    pub fn max_slope(&self) -> f64 {
        self.slopes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Complement of `b1` in the degree, the sum of `b'` on the simplex.
    pub fn simplex_total(&self) -> f64 {
        (self.d - self.b1) as f64
    }

    pub(crate) fn require_c_regime(&self) -> Result<()> {
        if 2 * self.b1 <= self.d {
            return Err(Error::Hypothesis(format!(
                "counterterm regime violated: need b1 < d < 2 b1, got b1={}, d={}{}",
                self.b1,
                self.d,
                if 2 * self.b1 == self.d {
                    "; b1 = d/2 is the order-two case"
                } else {
                    ""
                }
            )));
        }
        Ok(())
    }

    /// A rational arrangement `x + k y` with the same combinatorics, for exact bounds.
    pub(crate) fn generic_model(&self, b: &[u64]) -> Result<Arrangement> {
        let forms: Vec<Vec<Rational>> = (0..self.r()).map(|k| vec![int(1), int(k as i64)]).collect();
        let mult = b.iter().map(|&x| x as u32).collect();
        Arrangement::new(2, forms, mult)
    }
}

pub(crate) fn check_multiplicities(r: usize, b: &[u64]) -> Result<()> {
    if b.len() != r {
        return Err(Error::InvalidInput(format!("{} multiplicities for {r} lines", b.len())));
    }
    if b.contains(&0) {
        return Err(Error::InvalidInput("multiplicities must be positive".into()));
    }
    if b.iter().any(|&x| x > b[0]) {
        return Err(Error::InvalidInput(
            "the first multiplicity (slope 0) must be the largest".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureConfig {
    pub target_abs_tol: f64,
    /// Decreasing cut-off radii; empty means `(r0/4) 2^-k`, `k = 0..15`.
    pub delta_schedule: Vec<f64>,
    /// Truncation radius; `None` means `1e4 (max |a| + 1)`.
    pub outer_radius: Option<f64>,
    pub tail_extrapolation: bool,
    /// Cap on dyadic refinement levels towards each singular point.
    pub max_refinements: usize,
    pub precision: Precision,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            target_abs_tol: 1e-6,
            delta_schedule: Vec::new(),
            outer_radius: None,
            tail_extrapolation: true,
            max_refinements: 200,
            precision: Precision::Double,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { target_abs_tol: tol, ..Self::default() }
    }

    pub fn validate(&self, cfg: &LineConfig) -> Result<()> {
        if !(self.target_abs_tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if self.delta_schedule.iter().any(|&d| !(d > 0.0))
            || self.delta_schedule.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidInput(
                "delta schedule must be positive and strictly decreasing".into(),
            ));
        }
        if let Some(r) = self.outer_radius {
            if !(r > cfg.max_slope() + 1.0) {
                return Err(Error::InvalidInput(format!(
                    "outer radius {r} must exceed max |a| + 1 = {}",
                    cfg.max_slope() + 1.0
                )));
            }
        }
        if self.max_refinements < 8 {
            return Err(Error::InvalidInput("max_refinements must be at least 8".into()));
        }
        Ok(())
    }

    pub(crate) fn radius(&self, cfg: &LineConfig) -> f64 {
        self.outer_radius.unwrap_or(1e4 * (cfg.max_slope() + 1.0))
    }

    pub(crate) fn deltas(&self, r0: f64) -> Vec<f64> {
        if self.delta_schedule.is_empty() {
            (0..16).map(|k| 0.25 * r0 * 0.5f64.powi(k)).collect()
        } else {
            self.delta_schedule.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignVerdict {
    Positive,
    Negative,
    OrderTwo,
    Inconclusive,
}

impl SignVerdict {
    pub fn from_interval(value: f64, error: f64) -> Self {
        if value - error > 0.0 {
            Self::Positive
        } else if value + error < 0.0 {
            Self::Negative
        } else {
            Self::Inconclusive
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitDiagnostics {
    pub grid: Vec<f64>,
    pub scaled_values: Vec<f64>,
    pub slope: f64,
    pub max_residual: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueReport {
    /// `C(b')` when the residue comes from the regularized constant.
    pub c_value: Option<f64>,
    pub residue: f64,
    pub error_estimate: f64,
    pub order_bound: usize,
    pub sign_verdict: SignVerdict,
    /// `(delta, regularized value)` pairs.
    pub delta_trace: Vec<(f64, f64)>,
    pub fit: Option<FitDiagnostics>,
}

/// Order bound at `-2/d` from the exact resolution data of the weighted arrangement.
pub(crate) fn order_bound(cfg: &LineConfig, b: &[u64]) -> Result<usize> {
    let model = cfg.generic_model(b)?;
    let s0: BigRational = rat(-2, cfg.d as i64);
    resolution::pole_order_bound(&model, b, &s0)
}

pub(crate) fn b_prime_of(cfg: &LineConfig, b: &[u64]) -> Vec<f64> {
    debug_assert_eq!(b.len(), cfg.r());
    b[1..].iter().map(|&x| x.to_f64().unwrap_or(0.0)).collect()
}

/// `-lct` of the weighted arrangement: `max(-1/b_i, -2/d)`.
pub(crate) fn convergence_abscissa(b: &[u64]) -> f64 {
    let d: u64 = b.iter().sum();
    let bmax = *b.iter().max().unwrap_or(&1);
    (-1.0 / bmax as f64).max(-2.0 / d as f64)
}
