//! Synthetic training instances with known constants.
//!
//! The quadratic benchmark prescribes its Hessian spectrum outright: A is
//! built as Q·diag(√λ)·Qᵀ from a seeded random orthogonal Q, so the mean
//! Hessian AᵀA has eigenvalues exactly λ and the smoothness constant L,
//! the Polyak-Łojasiewicz constant μ, and the minimizer are known rather
//! than estimated. The two-layer instance is genuinely non-convex and its
//! constants are honest estimates, flagged as such.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::models::{MapQuadratic, TwoLayerNet};
use super::{epoch_stats, DatasetHandle, Model};
use crate::error::{Error, Result};
use crate::sampler::seeded_rng;

/// Constants entering the convergence bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConstants {
    /// Smoothness constant: largest eigenvalue of the mean Hessian.
    pub l: f64,
    /// PL constant: smallest eigenvalue (0 for non-convex instances).
    pub mu: f64,
    /// Condition number L/μ (0 when μ = 0).
    pub kappa: f64,
    /// Per-sample gradient variance measured at w*.
    pub sigma_sq: f64,
    pub w_star: Vec<f64>,
    /// L_G(w*); for non-convex instances a lower bound on the minimum.
    pub f_star: f64,
    /// True when the constants are numerical estimates rather than exact
    /// by construction.
    pub estimated: bool,
}

/// A ready-to-train instance: initial model, data, and its constants.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub model: Model,
    pub dataset: DatasetHandle,
    pub constants: BenchmarkConstants,
}

fn draw_normal<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Orthonormal basis from seeded Gaussian columns (Gram–Schmidt, re-drawing
/// any column that collapses). Returned row-major, rows = basis vectors.
fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = draw_normal(rng, d);
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

/// Default prescribed spectrum: eigenvalues evenly spaced on [1, 4]
/// (κ = 4), collapsing to {1} when d = 1.
fn default_spectrum(d: usize) -> Vec<f64> {
    if d == 1 {
        return vec![1.0];
    }
    (0..d)
        .map(|i| 1.0 + 3.0 * i as f64 / (d - 1) as f64)
        .collect()
}

/// Quadratic benchmark with the default [1, 4] spectrum.
///
/// Per-sample losses are f_i(w) = ½‖Aw − b_i‖² with b_i = Aw* + ξ_i and the
/// noise vectors ξ re-centered to sum to zero, so w* stays the exact
/// minimizer of the mean objective for every noise level.
pub fn pl_quadratic_benchmark(d: usize, n: usize, seed: u64, noise: f64) -> Result<Benchmark> {
    pl_quadratic_benchmark_with_spectrum(d, n, seed, noise, &default_spectrum(d), false)
}

/// Quadratic benchmark with an explicit Hessian spectrum. Degenerate
/// spectra (min eigenvalue 0, i.e. μ = 0) are rejected unless
/// `allow_degenerate` is set.
pub fn pl_quadratic_benchmark_with_spectrum(
    d: usize,
    n: usize,
    seed: u64,
    noise: f64,
    spectrum: &[f64],
    allow_degenerate: bool,
) -> Result<Benchmark> {
    if d < 1 {
        return Err(Error::InvalidConfig("dimension d must be >= 1".into()));
    }
    if n < d {
        return Err(Error::InvalidConfig(format!(
            "sample count n = {n} must be at least d = {d}"
        )));
    }
    if !noise.is_finite() || noise < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise must be non-negative and finite, got {noise}"
        )));
    }
    if spectrum.len() != d {
        return Err(Error::InvalidConfig(format!(
            "spectrum has {} entries for dimension {d}",
            spectrum.len()
        )));
    }
    if spectrum.iter().any(|&l| !l.is_finite() || l < 0.0) {
        return Err(Error::InvalidConfig(
            "spectrum entries must be finite and non-negative".into(),
        ));
    }
    let mu = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    let l = spectrum.iter().cloned().fold(0.0, f64::max);
    if mu == 0.0 && !allow_degenerate {
        return Err(Error::InvalidConfig(
            "degenerate spectrum (mu = 0) rejected; pass allow_degenerate to build it anyway"
                .into(),
        ));
    }

    let mut rng = seeded_rng(seed);
    let q = random_orthogonal(&mut rng, d);
    // A = Q·diag(√λ)·Qᵀ, symmetric PSD; its square AᵀA = Q·diag(λ)·Qᵀ.
    let mut a = vec![vec![0.0; d]; d];
    for (r, lam) in q.iter().zip(spectrum) {
        let s = lam.sqrt();
        for i in 0..d {
            for j in 0..d {
                a[i][j] += s * r[i] * r[j];
            }
        }
    }

    let w_star = draw_normal(&mut rng, d);
    let w0: Vec<f64> = w_star
        .iter()
        .zip(draw_normal(&mut rng, d))
        .map(|(w, g)| w + 1.0 + g)
        .collect();

    // Centered noise: Σξ_i = 0 keeps ∇L_G(w*) = AᵀA·(w*−w*) = 0.
    let mut xi: Vec<Vec<f64>> = (0..n).map(|_| draw_normal(&mut rng, d)).collect();
    let mut mean = vec![0.0; d];
    for row in &xi {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    for row in xi.iter_mut() {
        for (v, m) in row.iter_mut().zip(&mean) {
            *v = (*v - m) * noise;
        }
    }

    let target: Vec<f64> = (0..d)
        .map(|i| a[i].iter().zip(&w_star).map(|(aij, wj)| aij * wj).sum())
        .collect();
    let xs: Vec<Vec<f64>> = xi
        .into_iter()
        .map(|row| target.iter().zip(row).map(|(t, e)| t + e).collect())
        .collect();
    let dataset = DatasetHandle::new(xs, vec![0.0; n])?;

    let loss: Arc<dyn super::SampleLoss> = Arc::new(MapQuadratic::new(a));
    let star_model = Model::new(w_star.clone(), Arc::clone(&loss));
    let (f_star, grad_star, sigma_sq) = epoch_stats(&star_model, &dataset)?;
    debug_assert!(
        grad_star.iter().map(|g| g * g).sum::<f64>() < 1e-18,
        "w* is not a stationary point"
    );

    Ok(Benchmark {
        model: Model::new(w0, loss),
        dataset,
        constants: BenchmarkConstants {
            l,
            mu,
            kappa: if mu > 0.0 { l / mu } else { 0.0 },
            sigma_sq,
            w_star,
            f_star,
            estimated: false,
        },
    })
}

/// Finite-difference Hessian-vector power iteration: an estimate of the
/// largest Hessian eigenvalue magnitude of the full objective at `w`.
fn hvp_spectral_estimate(model: &Model, data: &DatasetHandle, w: &[f64]) -> Result<f64> {
    let d = w.len();
    let eps = 1e-4;
    let mut probe = model.clone();
    let mut v = vec![0.0; d];
    // Deterministic start direction with mass on every coordinate.
    for (i, vi) in v.iter_mut().enumerate() {
        *vi = 1.0 + (i as f64) * 0.01;
    }
    let mut lambda = 0.0;
    for _ in 0..40 {
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-30 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= norm);
        probe.w = w.iter().zip(&v).map(|(wi, vi)| wi + eps * vi).collect();
        let plus = super::full_gradient(&probe, data)?;
        probe.w = w.iter().zip(&v).map(|(wi, vi)| wi - eps * vi).collect();
        let minus = super::full_gradient(&probe, data)?;
        let hv: Vec<f64> = plus
            .iter()
            .zip(&minus)
            .map(|(p, q)| (p - q) / (2.0 * eps))
            .collect();
        lambda = hv.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = hv;
    }
    Ok(lambda)
}

/// Non-convex benchmark: a 4-hidden-unit tanh network with squared loss on
/// a fixed two-blob 2-D classification set. The smoothness constant is a
/// power-iteration estimate (maxed over probe points, with headroom), so
/// `constants.estimated` is true; f* is the squared-loss lower bound 0.
pub fn two_layer_benchmark(n: usize, seed: u64) -> Result<Benchmark> {
    if n < 2 {
        return Err(Error::InvalidConfig("need at least 2 samples".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let centre = [sign, sign];
        let jitter = draw_normal(&mut rng, 2);
        xs.push(vec![
            centre[0] + 0.6 * jitter[0],
            centre[1] + 0.6 * jitter[1],
        ]);
        ys.push(sign);
    }
    let dataset = DatasetHandle::new(xs, ys)?;

    let net = TwoLayerNet::new(2, 4);
    let d = net.param_count();
    let w0: Vec<f64> = draw_normal(&mut rng, d).iter().map(|g| 0.5 * g).collect();
    let model = Model::new(w0.clone(), Arc::new(net));

    // Max the curvature estimate over the start point and nearby probes,
    // then add headroom: the estimate is local, the bound wants a global L.
    let mut l_est = hvp_spectral_estimate(&model, &dataset, &w0)?;
    for _ in 0..4 {
        let probe: Vec<f64> = w0
            .iter()
            .zip(draw_normal(&mut rng, d))
            .map(|(w, g)| w + 0.5 * g)
            .collect();
        l_est = l_est.max(hvp_spectral_estimate(&model, &dataset, &probe)?);
    }
    let l = 1.5 * l_est;

    let (_, _, sigma_sq) = epoch_stats(&model, &dataset)?;
    Ok(Benchmark {
        model,
        dataset,
        constants: BenchmarkConstants {
            l,
            mu: 0.0,
            kappa: 0.0,
            sigma_sq,
            w_star: vec![f64::NAN; d],
            f_star: 0.0,
            estimated: true,
        },
    })
}
