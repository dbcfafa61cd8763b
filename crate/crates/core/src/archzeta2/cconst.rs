//! The regularized constant `C(b')`, its gradient and Hessian, and the residue at `-2/d`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::plane::{exterior, far_field_s, graded_to_zero, origin_ring, power_tail, scale, Integrand, Layout};
use super::quad::{integrate, sum_estimates, Estimate, Tolerance};
use super::{
    b_prime_of, check_multiplicities, order_bound, LineConfig, Precision, QuadratureConfig, ResidueReport,
    SignVerdict,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Weight {
    One,
    Log(usize),
    Log2(usize, usize),
}

/// `|u|^-p prod_l |1 + u/a_l|^-q_l`, optionally times `log|1 + u/a_j|` factors.
struct CIntegrand {
    a: Vec<Complex64>,
    inv_a: Vec<Complex64>,
    abs_a: Vec<f64>,
    p: f64,
    q: Vec<f64>,
    weight: Weight,
}

/// `ln|1 + w|`, accurate for small `w`.
fn ln_abs_1p(w: Complex64) -> f64 {
    if w.norm_sqr() < 0.25 {
        0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p()
    } else {
        (Complex64::new(1.0, 0.0) + w).norm().ln()
    }
}

impl CIntegrand {
    fn new(cfg: &LineConfig, bp: &[f64], weight: Weight) -> Self {
        let d = cfg.d as f64;
        let a = cfg.others().to_vec();
        Self {
            inv_a: a.iter().map(|x| x.inv()).collect(),
            abs_a: a.iter().map(|x| x.norm()).collect(),
            a,
            p: 4.0 * cfg.b1 as f64 / d,
            q: bp.iter().map(|b| 4.0 * b / d).collect(),
            weight,
        }
    }

    /// `ln|1 + u/a_l|` for each `l`; `exact` replaces one entry by `ln(|h|/|a_l|)`.
    fn logs(&self, u: Complex64, exact: Option<(usize, f64)>) -> Vec<f64> {
        (0..self.a.len())
            .map(|l| match exact {
                Some((k, h)) if k == l => (h / self.abs_a[l]).ln(),
                _ => ln_abs_1p(u * self.inv_a[l]),
            })
            .collect()
    }

    fn exponent(&self, logs: &[f64]) -> f64 {
        -logs.iter().zip(&self.q).map(|(l, q)| q * l).sum::<f64>()
    }

    fn weight_of(&self, logs: &[f64]) -> f64 {
        match self.weight {
            Weight::One => 1.0,
            Weight::Log(j) => logs[j],
            Weight::Log2(j, k) => logs[j] * logs[k],
        }
    }

    /// `prod |1 + u/a_l|^-q_l - 1` without cancellation near the origin.
    fn angular_minus_one(&self, u: Complex64) -> f64 {
        self.exponent(&self.logs(u, None)).exp_m1()
    }

    /// Total decay exponent at infinity.
    fn decay(&self) -> f64 {
        self.p + self.q.iter().sum::<f64>()
    }

    fn tail(&self, r: f64) -> f64 {
        let coeff: f64 = self.abs_a.iter().zip(&self.q).map(|(a, q)| a.powf(*q)).product();
        let big_p = self.decay();
        let m = big_p - 2.0;
        let big_l = r.ln();
        let alpha = |j: usize| self.abs_a[j].ln();
        match self.weight {
            Weight::One => {
                let exps: Vec<f64> = self.q.iter().map(|q| -q).collect();
                power_tail(r, big_p, coeff, far_field_s(&self.a, &exps))
            }
            Weight::Log(j) => TAU * coeff * r.powf(-m) * ((big_l - alpha(j)) / m + 1.0 / (m * m)),
            Weight::Log2(j, k) => {
                let (x, y) = (alpha(j), alpha(k));
                TAU * coeff
                    * r.powf(-m)
                    * ((big_l - x) * (big_l - y) / m + (2.0 * big_l - x - y) / (m * m) + 2.0 / (m * m * m))
            }
        }
    }

    fn patch_kappa(&self) -> Vec<f64> {
        let shrink = if self.weight == Weight::One { 1.0 } else { 0.9 };
        self.q.iter().map(|q| (2.0 - q) * shrink).collect()
    }
}

impl Integrand<f64> for CIntegrand {
    fn angular(&self, u: Complex64) -> f64 {
        let logs = self.logs(u, None);
        self.exponent(&logs).exp() * self.weight_of(&logs)
    }

    fn radial(&self, lambda: f64) -> f64 {
        lambda.powf(-self.p)
    }

    fn near(&self, l: usize, h: Complex64) -> f64 {
        let u = h - self.a[l];
        let logs = self.logs(u, Some((l, h.norm())));
        (self.exponent(&logs) - self.p * u.norm().ln()).exp() * self.weight_of(&logs)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CReport {
    pub value: f64,
    pub error: f64,
    /// Value at the smallest cut-off before extrapolation.
    pub raw: f64,
    /// Measured exponent of the `delta^rate` correction.
    pub rate: f64,
    pub rate_measured: bool,
    /// `(delta, regularized integral)` per cut-off.
    pub trace: Vec<(f64, f64)>,
    pub quadrature_error: f64,
    pub evaluations: usize,
    pub precision: Precision,
}

fn validate_b_prime(cfg: &LineConfig, bp: &[f64]) -> Result<()> {
    cfg.require_c_regime()?;
    if bp.len() + 1 != cfg.r() {
        return Err(Error::InvalidInput(format!(
            "b' has {} entries, expected {}",
            bp.len(),
            cfg.r() - 1
        )));
    }
    let d = cfg.d as f64;
    let total: f64 = bp.iter().sum();
    let slack = 0.05 * cfg.simplex_total();
    if bp.iter().any(|b| !b.is_finite() || *b < -1e-9 || 4.0 * b / d >= 2.0) {
        return Err(Error::InvalidInput(
            "each b'_l must satisfy 0 <= b'_l < d/2".into(),
        ));
    }
    if (total - cfg.simplex_total()).abs() > slack {
        return Err(Error::InvalidInput(format!(
            "b' must lie near the simplex sum b'_l = d - b1 = {}, got {total}",
            cfg.simplex_total()
        )));
    }
    Ok(())
}

/// Integral over `|u| > r0 / 2` weighted by `1 - chi0`, including the tail beyond `R`.
fn outside_origin(integrand: &CIntegrand, layout: &Layout, q: &QuadratureConfig, tol: f64) -> Estimate<f64> {
    let mut est = exterior(layout, integrand, &integrand.patch_kappa(), tol, q.max_refinements);
    let tail = integrand.tail(layout.outer);
    if q.tail_extrapolation {
        est.value += tail;
        // size of the first omitted far-field term
        est.error += tail.abs() * (integrand.decay() * integrand.abs_a.iter().fold(0.0f64, |m, a| m.max(*a)) / layout.outer).powi(2);
    } else {
        est.error += tail.abs();
    }
    est
}

fn layout_for(cfg: &LineConfig, q: &QuadratureConfig) -> Layout {
    Layout::new(cfg.singular_points(), q.radius(cfg))
}

/// Regularized values `int_{|u| > delta} H + 2 pi delta^(2-p)/(2-p)` for each cut-off.
fn c_trace(
    cfg: &LineConfig,
    bp: &[f64],
    q: &QuadratureConfig,
) -> Result<(Vec<f64>, Vec<Estimate<f64>>)> {
    let integrand = CIntegrand::new(cfg, bp, Weight::One);
    let layout = layout_for(cfg, q);
    let r0 = layout.r0;
    let deltas = q.deltas(r0);
    if deltas[0] > 0.5 * r0 {
        return Err(Error::InvalidInput(format!(
            "largest cut-off {} must not exceed r0/2 = {}",
            deltas[0],
            0.5 * r0
        )));
    }
    let tol = q.target_abs_tol;
    let p = integrand.p;
    let outside = outside_origin(&integrand, &layout, q, 0.25 * tol);

    let mut grid = deltas.clone();
    grid.reverse();
    grid.push(0.5 * r0);
    grid.push(r0);
    grid.dedup();
    let piece_tol = Tolerance::new(0.25 * tol / grid.len() as f64, 1e-13);
    let extended = q.precision == Precision::Extended;
    let f = |lambda: f64| {
        let chi = layout.chi0(lambda);
        if chi == 0.0 {
            return 0.0;
        }
        let ring = if extended {
            let g = |gamma: f64| integrand.angular_minus_one(Complex64::from_polar(lambda, gamma));
            integrate(&g, 0.0, PI, Tolerance::new(1e-17, 1e-13)).value
                + integrate(&g, PI, TAU, Tolerance::new(1e-17, 1e-13)).value
        } else {
            origin_ring(&integrand, lambda, 1e-17).v
        };
        lambda.powf(1.0 - p) * chi * ring
    };
    let pieces: Vec<Estimate<f64>> = grid
        .par_windows(2)
        .map(|w| integrate(&f, w[0], w[1], piece_tol))
        .collect();

    // counterterm pieces independent of delta in extended mode
    let base = if extended {
        let g = |lambda: f64| lambda.powf(1.0 - p) * layout.chi0(lambda);
        let shoulder = integrate(&g, 0.5 * r0, r0, Tolerance::new(1e-3 * tol, 1e-14));
        Estimate {
            value: TAU * shoulder.value + TAU * (0.5 * r0).powf(2.0 - p) / (2.0 - p),
            error: TAU * shoulder.error,
            evals: shoulder.evals,
        }
    } else {
        Estimate::zero()
    };

    let values = deltas
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            // pieces above delta_k: grid indices from (n - 1 - k) upward
            let start = deltas.len() - 1 - k;
            let mut parts: Vec<Estimate<f64>> = pieces[start..].to_vec();
            parts.push(outside);
            parts.push(base);
            let mut est = sum_estimates(&parts);
            if !extended {
                est.value += TAU * delta.powf(2.0 - p) / (2.0 - p);
            }
            est
        })
        .collect();
    Ok((deltas, values))
}

/// Fits `v(delta) = C + A delta^kappa` through the last three values.
fn richardson(deltas: &[f64], values: &[f64], quad_err: f64, fallback: f64) -> (f64, f64, bool) {
    let n = values.len();
    if n < 3 {
        return (values[n - 1], fallback, false);
    }
    let (x0, x1, x2) = (deltas[n - 3], deltas[n - 2], deltas[n - 1]);
    let d1 = values[n - 2] - values[n - 3];
    let d2 = values[n - 1] - values[n - 2];
    let g = |k: f64| (x1.powf(k) - x0.powf(k)) / (x2.powf(k) - x1.powf(k));
    let ratio = d1 / d2;
    let (lo, hi) = (0.05, 4.0);
    let measurable = d2.abs() > 4.0 * quad_err && d1.abs() > 4.0 * quad_err;
    let kappa = if measurable && ratio > g(lo) && ratio < g(hi) {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if g(m) < ratio {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    } else {
        None
    };
    let k = kappa.unwrap_or(fallback);
    let amp = d2 / (x2.powf(k) - x1.powf(k));
    (values[n - 1] - amp * x2.powf(k), k, kappa.is_some())
}

/// `C(b') = lim_{delta -> 0} ( int_{|u| > delta} H(u) du + 2 pi delta^(2-p)/(2-p) )`.
pub fn c_constant(cfg: &LineConfig, b_prime: &[f64], q: &QuadratureConfig) -> Result<CReport> {
    validate_b_prime(cfg, b_prime)?;
    q.validate(cfg)?;
    c_constant_unchecked(cfg, b_prime, q)
}

fn c_constant_unchecked(cfg: &LineConfig, b_prime: &[f64], q: &QuadratureConfig) -> Result<CReport> {
    let (deltas, ests) = c_trace(cfg, b_prime, q)?;
    let values: Vec<f64> = ests.iter().map(|e| e.value).collect();
    let trace: Vec<(f64, f64)> = deltas.iter().cloned().zip(values.iter().cloned()).collect();
    let n = values.len();
    let quad_err = ests[n - 1].error;
    let p = 4.0 * cfg.b1 as f64 / cfg.d as f64;
    let (value, rate, measured) = richardson(&deltas, &values, quad_err, 4.0 - p);
    let last_step = if n >= 2 { (values[n - 1] - values[n - 2]).abs() } else { 0.0 };
    if last_step > 10.0 * q.target_abs_tol {
        return Err(Error::NotConverged {
            message: format!(
                "cut-off trace not settled: last two values differ by {last_step:e} > 10 x tolerance"
            ),
            trace,
        });
    }
    let error = last_step + quad_err + (value - values[n - 1]).abs();
    Ok(CReport {
        value,
        error,
        raw: values[n - 1],
        rate,
        rate_measured: measured,
        trace,
        quadrature_error: quad_err,
        evaluations: ests.iter().map(|e| e.evals).max().unwrap_or(0),
        precision: q.precision,
    })
}

/// Integral of a log-weighted integrand over the whole plane (absolutely convergent).
fn weighted_integral(cfg: &LineConfig, bp: &[f64], weight: Weight, q: &QuadratureConfig) -> Estimate<f64> {
    let integrand = CIntegrand::new(cfg, bp, weight);
    let layout = layout_for(cfg, q);
    let tol = q.target_abs_tol;
    let p = integrand.p;
    let origin = |lambda: f64| {
        let w = lambda.powf(1.0 - p) * layout.chi0(lambda);
        if w == 0.0 {
            return Default::default();
        }
        scale(origin_ring(&integrand, lambda, 1e-17), w)
    };
    let near = graded_to_zero(&origin, layout.r0, 4.0 - p, 0.5 * tol, q.max_refinements);
    let far = outside_origin(&integrand, &layout, q, 0.5 * tol);
    sum_estimates(&[near, far])
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub gradient: Vec<f64>,
    pub gradient_error: Vec<f64>,
    /// Some `b'_l` is within `1e-3 (d - b1)` of zero.
    pub near_boundary: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HessianReport {
    pub matrix: Vec<Vec<f64>>,
    pub error: Vec<Vec<f64>>,
    /// `max |H - H^T|`; zero here since each off-diagonal integral is computed once.
    pub symmetry_defect: f64,
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Spectral-norm bound of the error matrix (Frobenius norm).
    pub error_norm: f64,
    pub near_boundary: bool,
}

fn near_boundary(cfg: &LineConfig, bp: &[f64]) -> bool {
    bp.iter().any(|b| *b < 1e-3 * cfg.simplex_total())
}

/// `dC/db'_j = (-4/d) int log|1 + u/a_j| H(u) du`.
pub fn grad_c(cfg: &LineConfig, b_prime: &[f64], q: &QuadratureConfig) -> Result<DerivativeReport> {
    validate_b_prime(cfg, b_prime)?;
    q.validate(cfg)?;
    let factor = -4.0 / cfg.d as f64;
    let parts: Vec<Estimate<f64>> = (0..b_prime.len())
        .into_par_iter()
        .map(|j| weighted_integral(cfg, b_prime, Weight::Log(j), q))
        .collect();
    Ok(DerivativeReport {
        gradient: parts.iter().map(|e| factor * e.value).collect(),
        gradient_error: parts.iter().map(|e| factor.abs() * e.error).collect(),
        near_boundary: near_boundary(cfg, b_prime),
    })
}

/// `d^2 C/db'_j db'_k = (16/d^2) int log|1 + u/a_j| log|1 + u/a_k| H(u) du`.
pub fn hess_c(cfg: &LineConfig, b_prime: &[f64], q: &QuadratureConfig) -> Result<HessianReport> {
    validate_b_prime(cfg, b_prime)?;
    q.validate(cfg)?;
    let m = b_prime.len();
    let d = cfg.d as f64;
    let factor = 16.0 / (d * d);
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|j| (j..m).map(move |k| (j, k))).collect();
    let parts: Vec<Estimate<f64>> = pairs
        .par_iter()
        .map(|&(j, k)| weighted_integral(cfg, b_prime, Weight::Log2(j, k), q))
        .collect();
    let mut matrix = vec![vec![0.0; m]; m];
    let mut error = vec![vec![0.0; m]; m];
    for (&(j, k), e) in pairs.iter().zip(&parts) {
        matrix[j][k] = factor * e.value;
        matrix[k][j] = factor * e.value;
        error[j][k] = factor * e.error;
        error[k][j] = factor * e.error;
    }
    let symmetry_defect = (0..m)
        .flat_map(|j| (0..m).map(move |k| (j, k)))
        .map(|(j, k)| (matrix[j][k] - matrix[k][j]).abs())
        .fold(0.0, f64::max);
    let eig = SymmetricEigen::new(DMatrix::from_fn(m, m, |j, k| matrix[j][k]));
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let error_norm = error.iter().flatten().map(|e| e * e).sum::<f64>().sqrt();
    Ok(HessianReport {
        min_eigenvalue: eigenvalues[0],
        matrix,
        error,
        symmetry_defect,
        eigenvalues,
        error_norm,
        near_boundary: near_boundary(cfg, b_prime),
    })
}

/// Residue of the zeta function at `-2/d`: `(pi/d) prod_l |a_l|^(-4 b_l/d) C(b')`.
pub fn residue_nd(cfg: &LineConfig, b: &[u64], q: &QuadratureConfig) -> Result<ResidueReport> {
    check_multiplicities(cfg.r(), b)?;
    if b[0] != cfg.b1 || b.iter().sum::<u64>() != cfg.d {
        return Err(Error::InvalidInput("multiplicities disagree with the line configuration".into()));
    }
    if 2 * cfg.b1 == cfg.d {
        return Err(Error::Hypothesis(
            "b1 = d/2: -2/d may be a pole of order two; use the order-two analysis".into(),
        ));
    }
    if 2 * cfg.b1 < cfg.d {
        return Err(Error::Hypothesis(
            "b1 < d/2: the regularized-constant formula does not apply; use residue_fit".into(),
        ));
    }
    let bp = b_prime_of(cfg, b);
    let c = c_constant(cfg, &bp, q)?;
    let d = cfg.d as f64;
    let factor = PI / d
        * cfg
            .others()
            .iter()
            .zip(&bp)
            .map(|(a, b)| a.norm().powf(-4.0 * b / d))
            .product::<f64>();
    let residue = factor * c.value;
    let error = factor * c.error;
    Ok(ResidueReport {
        c_value: Some(c.value),
        residue,
        error_estimate: error,
        order_bound: order_bound(cfg, b)?,
        sign_verdict: SignVerdict::from_interval(residue, error),
        delta_trace: c.trace,
        fit: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn prototype() -> LineConfig {
        LineConfig::from_real(&[0.0, 1.0, -1.0], 3, 5).unwrap()
    }

    fn gamma_ratio(x: f64) -> f64 {
        gamma(x) / gamma(1.0 - x)
    }

    #[test]
    fn two_line_constant_matches_complex_beta() {
        // one nonzero slope a = 1: int |u|^(2 alpha) |1 + u|^(2 beta) regularized at 0
        // equals pi gamma(1 + alpha) gamma(1 + beta) gamma(-1 - alpha - beta)
        // by analytic continuation in alpha.
        let cfg = LineConfig::from_real(&[0.0, 1.0], 3, 5).unwrap();
        let alpha = -0.5 * 4.0 * 3.0 / 5.0;
        for bp in [1.5, 1.0, 0.4] {
            let beta = -0.5 * 4.0 * bp / 5.0;
            let exact = PI
                * gamma_ratio(1.0 + alpha)
                * gamma_ratio(1.0 + beta)
                * gamma_ratio(-1.0 - alpha - beta);
            for precision in [Precision::Double, Precision::Extended] {
                let q = QuadratureConfig { precision, ..QuadratureConfig::with_tol(1e-8) };
                let c = c_constant_unchecked(&cfg, &[bp], &q).unwrap();
                assert!((c.value - exact).abs() < 1e-6, "{precision:?} b'={bp}: {} vs {exact}", c.value);
            }
        }
        // on the simplex the two-line constant vanishes
        let c = c_constant(&cfg, &[2.0], &QuadratureConfig::with_tol(1e-8)).unwrap();
        assert!(c.value.abs() < 1e-6, "{}", c.value);
    }

    #[test]
    fn interior_point_is_negative() {
        let c = c_constant(&prototype(), &[1.0, 1.0], &QuadratureConfig::with_tol(1e-6)).unwrap();
        assert!((c.value - (-11.845790)).abs() < 1e-4, "{}", c.value);
        assert!(c.value + c.error < 0.0);
    }

    #[test]
    fn annulus_matches_counterterm_difference() {
        let cfg = prototype();
        let integrand = CIntegrand::new(&cfg, &[0.0, 0.0], Weight::One);
        let p = integrand.p;
        let (d1, d2) = (1e-4, 0.1);
        let f = |lambda: f64| TAU * lambda * integrand.radial(lambda);
        let est = integrate(&f, d1, d2, Tolerance::new(0.0, 1e-13));
        let closed = TAU * (d2.powf(2.0 - p) - d1.powf(2.0 - p)) / (2.0 - p);
        assert!(((est.value - closed) / closed).abs() < 1e-8);
    }

    #[test]
    fn regime_guards() {
        let cfg = LineConfig::from_real(&[0.0, 1.0, -1.0], 2, 4).unwrap();
        assert!(matches!(c_constant(&cfg, &[1.0, 1.0], &QuadratureConfig::default()), Err(Error::Hypothesis(_))));
        let two = LineConfig::from_real(&[0.0, 1.0, -1.0], 2, 4).unwrap();
        assert!(matches!(residue_nd(&two, &[2, 1, 1], &QuadratureConfig::default()), Err(Error::Hypothesis(m)) if m.contains("order two")));
        assert!(c_constant(&prototype(), &[3.0, 0.0], &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn richardson_recovers_power_law() {
        let deltas: Vec<f64> = (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        let values: Vec<f64> = deltas.iter().map(|d| 2.0 + 3.0 * d.powf(1.6)).collect();
        let (c, k, measured) = richardson(&deltas, &values, 0.0, 1.0);
        assert!(measured && (k - 1.6).abs() < 1e-9 && (c - 2.0).abs() < 1e-12);
    }
}
