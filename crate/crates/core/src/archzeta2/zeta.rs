//! Direct quadrature of `zeta(s) = int |f|^(2s) alpha(|x|) beta(|y|)` over `C^2` for
//! `f = prod (x + a_l y)^(b_l)`, and the residue at `-2/d` by fitting `(s + 2/d) zeta(s)`.
//!
//! In the chart `x = uv, y = v` the `v`-integral is done in closed form up to a smooth remainder:
//! `K(lambda, s) = int |v|^(2ds+2) beta(|v|) alpha(lambda |v|) d^2v`, leaving a `u`-plane integral
//! of `|u|^(2 b1 s) prod_l |u + a_l|^(2 b_l s) K(|u|, s)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::bump::bump;
use super::plane::{exterior, far_field_s, graded_to_zero, origin_ring, power_tail, scale, tracked, Integrand, Layout};
use super::quad::{integrate, sum_estimates, Estimate, Tolerance};
use super::{
    check_multiplicities, convergence_abscissa, order_bound, FitDiagnostics, LineConfig, QuadratureConfig,
    ResidueReport, SignVerdict,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ZetaValue {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// `K(lambda, s) = 2 pi [m^E/E + int_m^{2m} rho^(E-1) beta(rho) alpha(lambda rho) drho]`,
/// `m = min(1, 1/lambda)`, `E = 2ds + 4`.
fn kernel_direct(big_e: Complex64, lambda: f64) -> Complex64 {
    let m = lambda.recip().min(1.0);
    let top = 2.0 * m;
    let rest = integrate(
        &|rho: f64| cpow(rho, big_e - 1.0) * (bump(rho) * bump(lambda * rho)),
        m,
        top,
        KERNEL_TOL,
    );
    (cpow(m, big_e) / big_e + rest.value) * TAU
}

struct ZetaIntegrand {
    a: Vec<Complex64>,
    /// `2 b_l s` for the lines through the points `-a_l`.
    e: Vec<Complex64>,
    /// `2 b1 s`.
    e0: Complex64,
    /// `2 d s + 4`.
    big_e: Complex64,
    /// `K(lambda, s)` for `lambda <= 1/2`; also `lambda^(2ds+4) K` for `lambda >= 2`.
    k0: Complex64,
    /// `K` on `[1/2, 2]`.
    table: ChebyshevTable,
}

/// Piecewise Chebyshev interpolation of a smooth complex function on `[lo, hi]`.
struct ChebyshevTable {
    lo: f64,
    width: f64,
    values: Vec<[Complex64; CHEB_NODES]>,
}

const CHEB_NODES: usize = 16;
const CHEB_PIECES: usize = 96;

fn cheb_node(j: usize) -> f64 {
    (std::f64::consts::PI * (j as f64 + 0.5) / CHEB_NODES as f64).cos()
}

impl ChebyshevTable {
    fn build(lo: f64, hi: f64, f: impl Fn(f64) -> Complex64 + Sync) -> Self {
        use rayon::prelude::*;
        let width = (hi - lo) / CHEB_PIECES as f64;
        let values = (0..CHEB_PIECES)
            .into_par_iter()
            .map(|k| {
                let a = lo + k as f64 * width;
                std::array::from_fn(|j| f(a + 0.5 * width * (1.0 + cheb_node(j))))
            })
            .collect();
        Self { lo, width, values }
    }

    fn eval(&self, x: f64) -> Complex64 {
        let k = (((x - self.lo) / self.width).floor().max(0.0) as usize).min(CHEB_PIECES - 1);
        let a = self.lo + k as f64 * self.width;
        let t = 2.0 * (x - a) / self.width - 1.0;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (j, v) in self.values[k].iter().enumerate() {
            let diff = t - cheb_node(j);
            if diff == 0.0 {
                return *v;
            }
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / CHEB_NODES as f64;
            let w = if j % 2 == 0 { theta.sin() } else { -theta.sin() } / diff;
            num += v * w;
            den += w;
        }
        num / den
    }
}

fn cpow(x: f64, e: Complex64) -> Complex64 {
    (e * x.ln()).exp()
}

const KERNEL_TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-13, max_panels: 200 };

impl ZetaIntegrand {
    fn new(cfg: &LineConfig, b: &[u64], s: Complex64) -> Self {
        let d: u64 = b.iter().sum();
        let big_e = s * (2.0 * d as f64) + 4.0;
        let tail = integrate(
            &|rho: f64| cpow(rho, big_e - 1.0) * bump(rho),
            1.0,
            2.0,
            KERNEL_TOL,
        );
        let k0 = (big_e.inv() + tail.value) * TAU;
        Self {
            a: cfg.others().to_vec(),
            e: b[1..].iter().map(|&x| s * (2.0 * x as f64)).collect(),
            e0: s * (2.0 * b[0] as f64),
            big_e,
            k0,
            table: ChebyshevTable::build(0.5, 2.0, |lambda| kernel_direct(big_e, lambda)),
        }
    }

    fn kernel(&self, lambda: f64) -> Complex64 {
        if lambda <= 0.5 {
            self.k0
        } else if lambda >= 2.0 {
            cpow(lambda, -self.big_e) * self.k0
        } else {
            self.table.eval(lambda)
        }
    }

    fn product(&self, u: Complex64, exact: Option<(usize, f64)>) -> Complex64 {
        let mut log = Complex64::new(0.0, 0.0);
        for (l, (a, e)) in self.a.iter().zip(&self.e).enumerate() {
            let dist = match exact {
                Some((k, h)) if k == l => h,
                _ => (u + a).norm(),
            };
            log += e * dist.ln();
        }
        log.exp()
    }

    /// `d/dlambda prod_l |lambda e^{i gamma} + a_l|^(e_l)`.
    fn product_derivative(&self, lambda: f64, gamma: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, gamma);
        let u = w * lambda;
        let mut sum = Complex64::new(0.0, 0.0);
        for (a, e) in self.a.iter().zip(&self.e) {
            sum += e * ((lambda + (a.conj() * w).re) / (u + a).norm_sqr());
        }
        self.product(u, None) * sum
    }
}

impl Integrand<Complex64> for ZetaIntegrand {
    fn angular(&self, u: Complex64) -> Complex64 {
        self.product(u, None)
    }

    fn radial(&self, lambda: f64) -> Complex64 {
        cpow(lambda, self.e0) * self.kernel(lambda)
    }

    fn near(&self, l: usize, h: Complex64) -> Complex64 {
        let u = h - self.a[l];
        self.product(u, Some((l, h.norm()))) * self.radial(u.norm())
    }
}

fn validate(cfg: &LineConfig, b: &[u64], q: &QuadratureConfig) -> Result<()> {
    if b.len() != cfg.r() || b.contains(&0) {
        return Err(Error::InvalidInput(format!(
            "need {} positive multiplicities, got {b:?}",
            cfg.r()
        )));
    }
    q.validate(cfg)
}

/// Everything except the disk about the origin.
fn away_from_origin(
    integrand: &ZetaIntegrand,
    layout: &Layout,
    s: Complex64,
    b: &[u64],
    q: &QuadratureConfig,
    tol: f64,
) -> Estimate<Complex64> {
    let kappas: Vec<f64> = b[1..].iter().map(|&x| 2.0 + 2.0 * x as f64 * s.re).collect();
    let mut est = exterior(layout, integrand, &kappas, tol, q.max_refinements);
    let tail = power_tail(layout.outer, 4.0, integrand.k0, far_field_s(&integrand.a, &integrand.e));
    if q.tail_extrapolation {
        est.value += tail;
        est.error += tail.norm() * (8.0 * layout.points.iter().fold(1.0f64, |m, z| m.max(z.norm())) / layout.outer).powi(2);
    } else {
        est.error += tail.norm();
    }
    est
}

fn layout_for(cfg: &LineConfig, q: &QuadratureConfig) -> Layout {
    let mut layout = Layout::new(cfg.singular_points(), q.radius(cfg));
    layout.radial_extra = vec![0.5, 1.0, 2.0];
    layout
}

/// `zeta(s)` for `Re s > -lct` by direct quadrature.
pub fn direct_zeta(cfg: &LineConfig, b: &[u64], s: Complex64, q: &QuadratureConfig) -> Result<ZetaValue> {
    validate(cfg, b, q)?;
    let abscissa = convergence_abscissa(b);
    if !(s.re > abscissa) {
        return Err(Error::InvalidInput(format!(
            "Re s = {} is outside the convergence half-plane Re s > {abscissa}",
            s.re
        )));
    }
    let integrand = ZetaIntegrand::new(cfg, b, s);
    let layout = layout_for(cfg, q);
    let tol = q.target_abs_tol;
    let origin = |lambda: f64| {
        let w = lambda * layout.chi0(lambda);
        if w == 0.0 {
            return Default::default();
        }
        scale(origin_ring(&integrand, lambda, 1e-17), integrand.radial(lambda)) * w
    };
    let kappa = 2.0 + 2.0 * b[0] as f64 * s.re;
    let near = graded_to_zero(&origin, layout.r0, kappa, 0.5 * tol, q.max_refinements);
    let far = away_from_origin(&integrand, &layout, s, b, q, 0.5 * tol);
    Ok(to_value(sum_estimates(&[near, far])))
}

fn to_value(est: Estimate<Complex64>) -> ZetaValue {
    ZetaValue { value: est.value, error: est.error, evaluations: est.evals }
}

/// `zeta(s)` continued past the origin's convergence abscissa by one integration by parts on
/// the disk `|u| < eps0` where the cut-offs are constant. Valid for `Re s > -2/b1` away from
/// `s = -1/b1`, provided the other lines and the kernel converge.
pub fn zeta_continued(cfg: &LineConfig, b: &[u64], s: Complex64, q: &QuadratureConfig) -> Result<ZetaValue> {
    validate(cfg, b, q)?;
    let d: u64 = b.iter().sum();
    let others_ok = b[1..].iter().all(|&x| 2.0 * x as f64 * s.re + 2.0 > 0.0);
    let c = s * (2.0 * b[0] as f64) + 2.0;
    if !(others_ok && s.re > -2.0 / d as f64 && c.re + 2.0 > 0.0 && c.norm() > 1e-12) {
        return Err(Error::InvalidInput(format!(
            "s = {s} is outside the region reached by one integration by parts"
        )));
    }
    let integrand = ZetaIntegrand::new(cfg, b, s);
    let layout = layout_for(cfg, q);
    let tol = q.target_abs_tol;
    let eps0 = (0.5 * layout.r0).min(0.5);
    let ring_tol = Tolerance::new(1e-17, 1e-13);

    // boundary term eps0^c Psi(eps0) / c with Psi = K0 Phi
    let phi = origin_ring(&integrand, eps0, 1e-17);
    let boundary = cpow(eps0, c) * integrand.k0 * phi.v / c;
    let boundary_err = (cpow(eps0, c) * integrand.k0 / c).norm() * phi.e;

    // -(1/c) int_0^eps0 lambda^c Psi'(lambda)
    let deriv = |lambda: f64| {
        let g = |gamma: f64| integrand.product_derivative(lambda, gamma);
        let quarter = std::f64::consts::FRAC_PI_2;
        let parts: Vec<Estimate<Complex64>> = (0..4)
            .map(|k| integrate(&g, k as f64 * quarter, (k + 1) as f64 * quarter, ring_tol))
            .collect();
        let ring = sum_estimates(&parts);
        let w = cpow(lambda, c) * integrand.k0;
        tracked(w * ring.value, w.norm() * ring.error)
    };
    let ibp = graded_to_zero(&deriv, eps0, c.re + 2.0, 0.25 * tol * c.norm(), q.max_refinements);
    let ibp = Estimate { value: -ibp.value / c, error: ibp.error / c.norm(), evals: ibp.evals };

    // eps0 < |u| < r0 with the cut-off chi0
    let shell = |lambda: f64| {
        let w = layout.chi0(lambda);
        if w == 0.0 {
            return Default::default();
        }
        let ring = origin_ring(&integrand, lambda, 1e-17);
        let k = cpow(lambda, c - 1.0) * integrand.kernel(lambda) * w;
        tracked(ring.v * k, ring.e * k.norm())
    };
    let shell = integrate(&shell, eps0, layout.r0, Tolerance::new(0.25 * tol, 1e-13)).flatten();

    let far = away_from_origin(&integrand, &layout, s, b, q, 0.5 * tol);
    let origin = Estimate { value: boundary, error: boundary_err, evals: 0 };
    Ok(to_value(sum_estimates(&[origin, ibp, shell, far])))
}

const FIT_STEP: f64 = 1e-3;
const FIT_POINTS: usize = 8;

/// Residue at `-2/d` from a linear least-squares fit of `(s + 2/d) zeta(s)` on `s = -2/d + k h`.
pub fn residue_fit(cfg: &LineConfig, b: &[u64], q: &QuadratureConfig) -> Result<ResidueReport> {
    check_multiplicities(cfg.r(), b)?;
    let d: u64 = b.iter().sum();
    if let Some(i) = b.iter().position(|&x| 2 * x == d) {
        return Err(Error::Hypothesis(format!(
            "b_{} = d/2: -2/d is not a simple candidate pole",
            i + 1
        )));
    }
    let s0 = -2.0 / d as f64;
    let continued = 2 * b[0] > d;
    let grid: Vec<f64> = (1..=FIT_POINTS).map(|k| k as f64 * FIT_STEP).collect();
    let evals: Vec<ZetaValue> = grid
        .iter()
        .map(|h| {
            let s = Complex64::new(s0 + h, 0.0);
            if continued {
                zeta_continued(cfg, b, s, q)
            } else {
                direct_zeta(cfg, b, s, q)
            }
        })
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = grid.iter().zip(&evals).map(|(h, z)| h * z.value.re).collect();
    let errs: Vec<f64> = grid.iter().zip(&evals).map(|(h, z)| h * z.error).collect();

    let n = grid.len() as f64;
    let mean_h = grid.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = grid.iter().map(|h| (h - mean_h).powi(2)).sum();
    let sxy: f64 = grid.iter().zip(&ys).map(|(h, y)| (h - mean_h) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_h;
    let max_residual = grid
        .iter()
        .zip(&ys)
        .map(|(h, y)| (y - intercept - slope * h).abs())
        .fold(0.0, f64::max);
    // intercept = sum_k w_k y_k with w_k = 1/n - mean_h (h_k - mean_h)/sxx
    let propagated: f64 = grid
        .iter()
        .zip(&errs)
        .map(|(h, e)| (1.0 / n - mean_h * (h - mean_h) / sxx).abs() * e)
        .sum();
    let error = propagated + max_residual;
    let threshold = 1e-3 * intercept.abs();
    let verdict = if max_residual > threshold {
        SignVerdict::Inconclusive
    } else {
        SignVerdict::from_interval(intercept, error)
    };
    Ok(ResidueReport {
        c_value: None,
        residue: intercept,
        error_estimate: error,
        order_bound: order_bound(cfg, b)?,
        sign_verdict: verdict,
        delta_trace: Vec::new(),
        fit: Some(FitDiagnostics { grid, scaled_values: ys, slope, max_residual, threshold }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_lines() -> LineConfig {
        LineConfig::from_real(&[0.0, 1.0, -1.0], 1, 3).unwrap()
    }

    #[test]
    fn value_at_zero_is_volume_of_cutoff() {
        let disk = integrate(&|r: f64| TAU * r * bump(r), 0.0, 2.0, Tolerance::new(1e-15, 1e-14));
        let exact = disk.value * disk.value;
        let z = direct_zeta(&three_lines(), &[1, 1, 1], Complex64::new(0.0, 0.0), &QuadratureConfig::with_tol(1e-9))
            .unwrap();
        assert!((z.value.re - exact).abs() < 1e-7 * exact, "{} vs {exact}", z.value);
        assert!(z.value.im.abs() < 1e-12);
    }

    #[test]
    fn continuation_agrees_in_convergent_region() {
        let cfg = LineConfig::from_real(&[0.0, 1.0, -1.0], 3, 5).unwrap();
        let q = QuadratureConfig::with_tol(1e-9);
        for s in [Complex64::new(0.5, 0.0), Complex64::new(-0.2, 0.3)] {
            let a = direct_zeta(&cfg, &[3, 1, 1], s, &q).unwrap();
            let b = zeta_continued(&cfg, &[3, 1, 1], s, &q).unwrap();
            assert!((a.value - b.value).norm() < 1e-7, "{s}: {} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn kernel_table_matches_direct_integral() {
        let s = Complex64::new(-0.3, 0.7);
        let z = ZetaIntegrand::new(&three_lines(), &[1, 1, 1], s);
        for k in 0..=300 {
            let lambda = 0.5 + 1.5 * k as f64 / 300.0 + 1e-4;
            let lambda = lambda.min(2.0);
            let direct = kernel_direct(z.big_e, lambda);
            assert!((z.kernel(lambda) - direct).norm() < 1e-11 * direct.norm(), "{lambda}");
        }
        // continuity with the closed forms at both ends
        assert!((kernel_direct(z.big_e, 0.5) - z.k0).norm() < 1e-12);
        assert!((kernel_direct(z.big_e, 2.0) - cpow(2.0, -z.big_e) * z.k0).norm() < 1e-12);
    }

    #[test]
    fn self_scaling() {
        let cfg = three_lines();
        let q = QuadratureConfig::with_tol(1e-10);
        let a = direct_zeta(&cfg, &[2, 2, 2], Complex64::new(0.5, 0.0), &q).unwrap();
        let b = direct_zeta(&cfg, &[1, 1, 1], Complex64::new(1.0, 0.0), &q).unwrap();
        assert!((a.value - b.value).norm() <= 1e-6 * b.value.norm());
    }

    #[test]
    fn convergence_guard() {
        let q = QuadratureConfig::default();
        assert!(direct_zeta(&three_lines(), &[1, 1, 1], Complex64::new(-0.7, 0.0), &q).is_err());
        assert!(residue_fit(&three_lines(), &[2, 1, 1], &q).is_err());
    }
}
