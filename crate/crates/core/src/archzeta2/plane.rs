//! Integration over the plane of integrands with power singularities at the origin and at a
//! finite set of other points. A smooth partition of unity splits the plane into a disk about
//! the origin, disks about the other points (local polar coordinates, dyadic radial levels)
//! and an outer region (polar coordinates about the origin, graded annuli up to a radius `R`).

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use num_complex::Complex64;
use rayon::prelude::*;

use super::bump::plateau;
use super::quad::{
    integrate, integrate_breaks, sum_estimates, Compensated, Estimate, QuadValue, Tolerance, WithErr,
};

/// Values that can be integrated and multiplied: `f64` and `Complex64`.
pub trait Field: QuadValue + Compensated + Mul<Output = Self> + From<f64> {}
impl Field for f64 {}
impl Field for Complex64 {}

pub type Tracked<T> = WithErr<T>;

pub fn tracked<T: Field>(v: T, e: f64) -> Tracked<T> {
    WithErr { v, e }
}

pub fn scale<T: Field>(x: Tracked<T>, k: T) -> Tracked<T> {
    tracked(x.v * k, x.e * k.norm())
}

/// Integrand `angular(u) * radial(|u|)`.
pub trait Integrand<T>: Sync {
    fn angular(&self, u: Complex64) -> T;
    fn radial(&self, lambda: f64) -> T;
    /// Full value at `points[l] + h`, with `h` kept exact so the local factor stays accurate
    /// far below the rounding scale of the point itself.
    fn near(&self, l: usize, h: Complex64) -> T;
}

#[derive(Clone, Debug)]
pub struct Layout {
    pub points: Vec<Complex64>,
    pub r0: f64,
    pub radii: Vec<f64>,
    pub outer: f64,
    /// Additional radii where the radial factor changes character.
    pub radial_extra: Vec<f64>,
}

impl Layout {
    /// `points` must be nonzero and distinct; `outer` is the truncation radius.
    pub fn new(points: Vec<Complex64>, outer: f64) -> Self {
        let r0 = 0.5 * points.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let radii = points
            .iter()
            .enumerate()
            .map(|(l, z)| {
                let others = points
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != l)
                    .map(|(_, w)| (z - w).norm())
                    .fold(z.norm(), f64::min);
                0.5 * others
            })
            .collect();
        Self { points, r0, radii, outer, radial_extra: Vec::new() }
    }

    pub fn chi0(&self, lambda: f64) -> f64 {
        plateau(lambda / self.r0)
    }

    /// Weight of the outer region: `1 - chi0 - sum chi_l`.
    pub fn outer_weight(&self, u: Complex64) -> f64 {
        let mut w = 1.0 - self.chi0(u.norm());
        for (z, r) in self.points.iter().zip(&self.radii) {
            let t = (u - z).norm() / r;
            if t < 1.0 {
                w -= plateau(t);
            }
        }
        w
    }

    /// Angular breakpoints on the circle `|u| = lambda` where patch cut-offs switch.
    fn angular_breaks(&self, lambda: f64) -> Vec<f64> {
        let mut breaks = vec![0.0, TAU];
        for (z, r) in self.points.iter().zip(&self.radii) {
            let dist = z.norm();
            let phi = z.arg().rem_euclid(TAU);
            let mut add = |a: f64| breaks.push(a.rem_euclid(TAU));
            for rho in [0.5 * r, *r] {
                let c = (lambda * lambda + dist * dist - rho * rho) / (2.0 * lambda * dist);
                if c.abs() < 1.0 {
                    let theta = c.acos();
                    add(phi - theta);
                    add(phi + theta);
                }
            }
            if (lambda - dist).abs() < *r {
                add(phi);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        breaks
    }

    /// Radial breakpoints of the outer region, from `r0/2` to `outer`.
    fn radial_breaks(&self) -> Vec<f64> {
        let lo = 0.5 * self.r0;
        let mut b = vec![lo, self.r0];
        for (z, r) in self.points.iter().zip(&self.radii) {
            let d = z.norm();
            for x in [d - r, d - 0.5 * r, d, d + 0.5 * r, d + r] {
                b.push(x.max(lo));
            }
        }
        b.extend(self.radial_extra.iter().filter(|&&x| x > lo && x < self.outer));
        let mut top = b.iter().cloned().fold(lo, f64::max);
        while top < self.outer {
            top = (2.0 * top).min(self.outer);
            b.push(top);
        }
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        b
    }
}

pub const ANGULAR_REL: f64 = 1e-12;
const RADIAL_REL: f64 = 1e-11;

fn circle_integral<T: Field>(f: &(impl Fn(f64) -> T + ?Sized), breaks: &[f64], abs: f64) -> Tracked<T> {
    let est = integrate_breaks(f, breaks, Tolerance::new(abs, ANGULAR_REL));
    tracked(est.value, est.error)
}

const QUARTERS: [f64; 5] = [0.0, 0.5 * PI, PI, 1.5 * PI, TAU];

/// `int_0^{2 pi} H(z_l + t e^{i phi}) dphi`.
pub fn ring<T: Field>(integrand: &dyn Integrand<T>, l: usize, t: f64, abs: f64) -> Tracked<T> {
    let f = |phi: f64| integrand.near(l, Complex64::from_polar(t, phi));
    circle_integral(&f, &QUARTERS, abs)
}

/// `int_0^{2 pi} angular(lambda e^{i gamma}) dgamma` on a circle about the origin.
pub fn origin_ring<T: Field>(integrand: &dyn Integrand<T>, lambda: f64, abs: f64) -> Tracked<T> {
    let f = |g: f64| integrand.angular(Complex64::from_polar(lambda, g));
    circle_integral(&f, &QUARTERS, abs)
}

/// `int_0^top f(t) dt` for `f(t) ~ t^(kappa - 1)` at zero, on dyadic levels `[top 2^-k-1, top 2^-k]`.
/// Levels are added until the geometric remainder estimate drops below `tol / 100`; that
/// remainder is added to the value and counted in the error.
pub fn graded_to_zero<T: Field>(
    f: &(dyn Fn(f64) -> Tracked<T> + Sync),
    top: f64,
    kappa: f64,
    tol: f64,
    max_levels: usize,
) -> Estimate<T> {
    assert!(kappa > 0.0, "integrable singularity required");
    let rho = 0.5f64.powf(kappa).min(0.995);
    let factor = rho / (1.0 - rho);
    const BATCH: usize = 8;
    const MIN_LEVELS: usize = 6;
    let level_tol = Tolerance::new(tol * 1e-3, RADIAL_REL);
    let mut levels: Vec<Estimate<Tracked<T>>> = Vec::new();
    let mut done = false;
    while !done && levels.len() < max_levels {
        let start = levels.len();
        let batch: Vec<Estimate<Tracked<T>>> = (start..start + BATCH)
            .into_par_iter()
            .map(|k| {
                let hi = top * 0.5f64.powi(k as i32);
                integrate(f, 0.5 * hi, hi, level_tol)
            })
            .collect();
        for est in batch {
            levels.push(est);
            let k = levels.len();
            if k >= MIN_LEVELS && est.value.norm() * factor < 0.01 * tol {
                done = true;
                break;
            }
        }
    }
    let last = levels.last().map(|e| e.value).unwrap_or_default();
    let remainder = last * factor;
    let mut total = sum_estimates(&levels).flatten();
    total.value = total.value + remainder.v;
    total.error += remainder.norm() + remainder.e;
    if !done {
        total.error += tol;
    }
    total
}

/// Patch about point `l` of radius `r`: `int chi(|u - z_l|/r) H(u) d^2u`.
pub fn patch<T: Field>(
    integrand: &dyn Integrand<T>,
    l: usize,
    r: f64,
    kappa: f64,
    tol: f64,
    max_levels: usize,
) -> Estimate<T> {
    let ang_abs = tol * 1e-6;
    let f = |t: f64| {
        let w = t * plateau(t / r);
        if w == 0.0 {
            return Tracked::default();
        }
        ring(integrand, l, t, ang_abs / t.max(1e-300)) * w
    };
    graded_to_zero(&f, r, kappa, tol, max_levels)
}

/// `int (1 - chi0 - sum chi_l) H` over `|u| < outer`.
pub fn outer_region<T: Field>(layout: &Layout, integrand: &dyn Integrand<T>, tol: f64) -> Estimate<T> {
    let breaks = layout.radial_breaks();
    let pieces = (breaks.len() - 1) as f64;
    let ang_abs = tol * 1e-6;
    let intervals: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let parts: Vec<Estimate<Tracked<T>>> = intervals
        .par_iter()
        .map(|&(a, b)| {
            let f = |lambda: f64| {
                let ab = layout.angular_breaks(lambda);
                let g = |gamma: f64| {
                    let u = Complex64::from_polar(lambda, gamma);
                    let w = layout.outer_weight(u);
                    if w == 0.0 {
                        T::default()
                    } else {
                        integrand.angular(u) * w
                    }
                };
                scale(circle_integral(&g, &ab, ang_abs / lambda), integrand.radial(lambda)) * lambda
            };
            integrate(&f, a, b, Tolerance::new(tol / pieces * 1e-2, RADIAL_REL))
        })
        .collect();
    sum_estimates(&parts).flatten()
}

/// All patches about the non-origin points plus the outer region.
pub fn exterior<T: Field>(
    layout: &Layout,
    integrand: &dyn Integrand<T>,
    patch_kappa: &[f64],
    tol: f64,
    max_levels: usize,
) -> Estimate<T> {
    let share = tol / (layout.points.len() + 1) as f64;
    let mut parts: Vec<Estimate<T>> = (0..layout.points.len())
        .into_par_iter()
        .map(|l| patch(integrand, l, layout.radii[l], patch_kappa[l], share, max_levels))
        .collect();
    parts.push(outer_region(layout, integrand, share));
    sum_estimates(&parts)
}

/// `2 pi int_R^inf lambda^(1-P) (1 + S/(4 lambda^2)) dlambda`: the two leading far-field terms
/// of `coeff lambda^-P prod |1 + a_l/u|^(e_l)` with `S = sum_{l,k} e_l e_k Re(a_l conj a_k)`.
pub fn power_tail<T: Field>(r: f64, p: f64, coeff: T, s: T) -> T {
    let lead = r.powf(2.0 - p) / (p - 2.0);
    let next = r.powf(-p) / (4.0 * p);
    coeff * (T::from(lead) + s * next) * TAU
}

/// `S = sum_{l,k} e_l e_k Re(a_l conj(a_k))` for the second far-field term.
pub fn far_field_s<T: Field>(points: &[Complex64], exps: &[T]) -> T {
    let mut s = T::default();
    for (al, el) in points.iter().zip(exps) {
        for (ak, ek) in points.iter().zip(exps) {
            s = s + (*el * *ek) * (al * ak.conj()).re;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Gaussian;
    impl Integrand<f64> for Gaussian {
        fn angular(&self, u: Complex64) -> f64 {
            (-(u.norm_sqr())).exp() * (1.0 + 0.3 * u.re)
        }
        fn radial(&self, _: f64) -> f64 {
            1.0
        }
        fn near(&self, l: usize, h: Complex64) -> f64 {
            self.angular(POINTS[l] + h)
        }
    }

    const POINTS: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];

    // |u|^-1 |u - 1|^-1 |u + i|^-1 * exp(-|u|^2): singular at three points.
    struct Singular;
    impl Integrand<f64> for Singular {
        fn angular(&self, u: Complex64) -> f64 {
            let one = Complex64::new(1.0, 0.0);
            let i = Complex64::new(0.0, 1.0);
            1.0 / ((u - one).norm() * (u + i).norm())
        }
        fn radial(&self, lambda: f64) -> f64 {
            (-lambda * lambda).exp() / lambda
        }
        fn near(&self, l: usize, h: Complex64) -> f64 {
            let u = POINTS[l] + h;
            let other = (u - POINTS[1 - l]).norm();
            (-u.norm_sqr()).exp() / (u.norm() * other * h.norm())
        }
    }

    fn whole_plane<T: Field>(layout: &Layout, f: &dyn Integrand<T>, kappa0: f64, kappas: &[f64], tol: f64) -> Estimate<T> {
        let origin = |lambda: f64| {
            let w = lambda * layout.chi0(lambda);
            scale(origin_ring(f, lambda, 1e-16), f.radial(lambda)) * w
        };
        let o = graded_to_zero(&origin, layout.r0, kappa0, tol, 200);
        sum_estimates(&[o, exterior(layout, f, kappas, tol, 200)])
    }

    #[test]
    fn partition_of_unity_sums_to_one() {
        let layout = Layout::new(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.5)], 50.0);
        for &(x, y) in &[(0.2, 0.1), (0.9, 0.05), (-0.8, 0.4), (3.0, -2.0), (0.4, 0.0)] {
            let u = Complex64::new(x, y);
            let mut total = layout.outer_weight(u) + layout.chi0(u.norm());
            for (z, r) in layout.points.iter().zip(&layout.radii) {
                total += plateau((u - z).norm() / r);
            }
            assert!((total - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_integral() {
        let layout = Layout::new(POINTS.to_vec(), 40.0);
        let est = whole_plane(&layout, &Gaussian, 2.0, &[2.0, 2.0], 1e-11);
        assert!((est.value - PI).abs() < 1e-10, "{} vs pi", est.value);
    }

    #[test]
    fn singular_integrand_against_fine_polar_rule() {
        let layout = Layout::new(POINTS.to_vec(), 12.0);
        let est = whole_plane(&layout, &Singular, 1.0, &[1.0, 1.0], 1e-9);
        // plain nested adaptive polar quadrature about the origin as the reference
        let inner = integrate(
            &|lambda: f64| {
                integrate(
                    &|g: f64| lambda * Singular.angular(Complex64::from_polar(lambda, g)) * Singular.radial(lambda),
                    0.0,
                    TAU,
                    Tolerance::new(1e-13, 1e-12),
                )
                .value
            },
            0.0,
            12.0,
            Tolerance { abs: 1e-10, rel: 1e-11, max_panels: 4000 },
        );
        assert!((est.value - inner.value).abs() < 1e-6, "{} vs {}", est.value, inner.value);
    }
}
