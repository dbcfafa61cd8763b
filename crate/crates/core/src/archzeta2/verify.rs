//! Batch verification over the simplex `b'_l >= 0, sum b'_l = d - b1` for fixed `b1 < d < 2 b1`:
//! the constant vanishes at the vertices, and at sampled interior points it is negative with a
//! positive definite Hessian.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use super::{c_constant, hess_c, LineConfig, QuadratureConfig};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct VertexCheck {
    pub b_prime: Vec<f64>,
    pub c_value: f64,
    pub c_error: f64,
    /// `|C| <= 10 tol + error`.
    pub vanishes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointCheck {
    pub b_prime: Vec<f64>,
    pub c_value: f64,
    pub c_error: f64,
    pub negative: bool,
    pub residue: f64,
    pub residue_error: f64,
    pub hessian: Vec<Vec<f64>>,
    pub hessian_min_eigenvalue: f64,
    pub hessian_error: f64,
    pub positive_definite: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Section4Report {
    pub b1: u64,
    pub d: u64,
    pub seed: u64,
    pub vertices: Vec<VertexCheck>,
    pub interior: Vec<PointCheck>,
    pub all_pass: bool,
}

fn with_context(e: Error, what: &str) -> Error {
    match e {
        Error::NotConverged { message, trace } => Error::NotConverged { message: format!("{what}: {message}"), trace },
        Error::InvalidInput(m) => Error::InvalidInput(format!("{what}: {m}")),
        Error::Hypothesis(m) => Error::Hypothesis(format!("{what}: {m}")),
        other => other,
    }
}

/// Uniform samples from the open simplex of total `total` in dimension `k`.
fn simplex_samples(k: usize, total: f64, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let e: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
            let sum: f64 = e.iter().sum();
            e.iter().map(|x| total * x / sum).collect()
        })
        .collect()
}

pub fn verify_section4(
    slopes: &LineConfig,
    b1: u64,
    d: u64,
    samples: usize,
    q: &QuadratureConfig,
    seed: u64,
) -> Result<Section4Report> {
    let cfg = LineConfig::new(slopes.slopes.clone(), b1, d)?;
    cfg.require_c_regime()?;
    q.validate(&cfg)?;
    let k = cfg.r() - 1;
    let total = cfg.simplex_total();
    let tol = q.target_abs_tol;

    let vertices: Vec<VertexCheck> = (0..k)
        .into_par_iter()
        .map(|j| {
            let mut bp = vec![0.0; k];
            bp[j] = total;
            let c = c_constant(&cfg, &bp, q).map_err(|e| with_context(e, &format!("vertex {}", j + 1)))?;
            Ok(VertexCheck {
                vanishes: c.value.abs() <= 10.0 * tol + c.error,
                b_prime: bp,
                c_value: c.value,
                c_error: c.error,
            })
        })
        .collect::<Result<_>>()?;

    let dd = d as f64;
    let points = if k >= 2 { simplex_samples(k, total, samples, seed) } else { Vec::new() };
    let interior: Vec<PointCheck> = points
        .into_par_iter()
        .enumerate()
        .map(|(i, bp)| {
            let what = format!("sample {}", i + 1);
            let c = c_constant(&cfg, &bp, q).map_err(|e| with_context(e, &what))?;
            let h = hess_c(&cfg, &bp, q).map_err(|e| with_context(e, &what))?;
            let factor = PI / dd
                * cfg
                    .others()
                    .iter()
                    .zip(&bp)
                    .map(|(a, b)| a.norm().powf(-4.0 * b / dd))
                    .product::<f64>();
            Ok(PointCheck {
                negative: c.value + c.error < 0.0,
                residue: factor * c.value,
                residue_error: factor * c.error,
                positive_definite: h.min_eigenvalue > h.error_norm,
                hessian_min_eigenvalue: h.min_eigenvalue,
                hessian_error: h.error_norm,
                hessian: h.matrix,
                c_value: c.value,
                c_error: c.error,
                b_prime: bp,
            })
        })
        .collect::<Result<_>>()?;

    let all_pass = vertices.iter().all(|v| v.vanishes)
        && interior.iter().all(|p| p.negative && p.positive_definite && p.residue + p.residue_error < 0.0);
    Ok(Section4Report { b1, d, seed, vertices, interior, all_pass })
}
