//! SGD training under subset schedules, on desk-scale models whose
//! smoothness and noise constants are known exactly, so the convergence
//! bounds can be checked rather than trusted.
//!
//! Epoch k trains only on the schedule's subset V_k; the trace records the
//! full-data objective and gradient at every epoch-start iterate w_k (so
//! w_1 is the initial point and the state after k epochs is the start of
//! epoch k+1).

mod benchmark;
mod models;
mod verify;

pub use benchmark::{
    pl_quadratic_benchmark, pl_quadratic_benchmark_with_spectrum, two_layer_benchmark, Benchmark,
    BenchmarkConstants,
};
pub use models::{LeastSquares, Logistic, MapQuadratic, TwoLayerNet};
pub use verify::{
    run_benchmark_trials, verify_convergence_bound, BoundMode, CheckpointReport,
    ConvergenceReport,
};

use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampler::SubsetSchedule;

/// Per-sample loss and gradient at parameters w. Implementations must be
/// exact pairs: `gradient_check` is part of every model's test surface.
pub trait SampleLoss: Send + Sync {
    fn loss(&self, w: &[f64], x: &[f64], y: f64) -> f64;
    /// Writes ∂loss/∂w into `out` (overwriting it).
    fn grad(&self, w: &[f64], x: &[f64], y: f64, out: &mut [f64]);
}

/// Parameter vector plus the loss interface that scores it.
#[derive(Clone)]
pub struct Model {
    pub w: Vec<f64>,
    pub loss: Arc<dyn SampleLoss>,
}

impl Model {
    pub fn new(w: Vec<f64>, loss: Arc<dyn SampleLoss>) -> Self {
        Model { w, loss }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model").field("w", &self.w).finish()
    }
}

/// The ground set: feature vectors with scalar targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHandle {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
}

impl DatasetHandle {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidConfig("dataset must be non-empty".into()));
        }
        if xs.len() != ys.len() {
            return Err(Error::InvalidConfig(format!(
                "feature/target count mismatch: {} vs {}",
                xs.len(),
                ys.len()
            )));
        }
        let dim = xs[0].len();
        if xs.iter().any(|x| x.len() != dim) {
            return Err(Error::InvalidConfig(
                "all feature vectors must share one dimension".into(),
            ));
        }
        Ok(DatasetHandle { xs, ys })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn dim(&self) -> usize {
        self.xs[0].len()
    }

    /// Load from CSV: feature columns followed by one final label column.
    /// Headers are optional; any first line that fails to parse as numbers
    /// is treated as a header.
    pub fn from_csv(path: &std::path::Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            let row = match parsed {
                Ok(row) => row,
                Err(e) if i == 0 => {
                    let _ = e;
                    continue; // header line
                }
                Err(e) => {
                    return Err(Error::InvalidConfig(format!(
                        "CSV row {}: {e}",
                        i + 1
                    )))
                }
            };
            if row.len() < 2 {
                return Err(Error::InvalidConfig(format!(
                    "CSV row {} needs at least one feature and a label",
                    i + 1
                )));
            }
            let (features, label) = row.split_at(row.len() - 1);
            xs.push(features.to_vec());
            ys.push(label[0]);
        }
        DatasetHandle::new(xs, ys)
    }
}

/// How inner SGD steps pick samples from the epoch's subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WithinEpochSampling {
    /// Independent uniform draws from V_k; keeps the gradient estimate
    /// unbiased, as the convergence analysis assumes.
    #[default]
    IidWithReplacement,
    /// Random-permutation passes over V_k; the practical default elsewhere,
    /// but excluded from bound verification.
    Reshuffle,
}

/// SGD hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub alpha: f64,
    /// Inner steps per epoch; `None` means m (one step per subset slot).
    pub epoch_steps: Option<usize>,
    pub batch_size: usize,
    pub within_epoch_sampling: WithinEpochSampling,
}

impl OptimizerConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "step size alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(OptimizerConfig {
            alpha,
            epoch_steps: None,
            batch_size: 1,
            within_epoch_sampling: WithinEpochSampling::IidWithReplacement,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "step size alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        if self.batch_size < 1 || self.epoch_steps == Some(0) {
            return Err(Error::InvalidConfig(
                "batch size and epoch steps must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// State and bookkeeping at one epoch boundary. The objective, gradient
/// norm, and variance describe the iterate *entering* the epoch; the hash,
/// visit, and coverage fields describe the epoch's own work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// L_G(w_k): full-data objective at the epoch-start iterate.
    pub objective: f64,
    /// ‖∇L_G(w_k)‖².
    pub grad_norm_sq: f64,
    /// Per-sample gradient variance (1/n)Σ‖∇f_i(w_k) − ∇L_G(w_k)‖².
    pub sample_grad_variance: f64,
    /// Fingerprint of the epoch's subset (first 16 hex chars of SHA-256).
    pub subset_hash: String,
    /// Sample visits through the end of this epoch.
    pub cumulative_visits: u64,
    /// Distinct ground-set indices seen through the end of this epoch.
    pub distinct_seen: usize,
    /// Always 0.0 in stored traces so replays are byte-identical; wall time
    /// is reported out of band via [`TrainingTrace::elapsed_seconds`].
    pub wall_seconds: f64,
}

/// Full record of a training run: K epoch-start snapshots plus the final
/// iterate (the state after the last epoch).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    pub final_objective: f64,
    pub final_grad_norm_sq: f64,
    pub final_w: Vec<f64>,
    /// Measured run time; excluded from serialized outputs so that replays
    /// compare equal byte-for-byte.
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

impl TrainingTrace {
    pub fn k(&self) -> usize {
        self.records.len()
    }

    /// L_G after `epochs` full epochs (0 = the initial point).
    pub fn objective_after(&self, epochs: usize) -> f64 {
        if epochs < self.records.len() {
            self.records[epochs].objective
        } else {
            self.final_objective
        }
    }

    /// Largest per-sample gradient variance seen at any recorded iterate.
    pub fn max_sample_grad_variance(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.sample_grad_variance)
            .fold(0.0, f64::max)
    }

    /// CSV per epoch: epoch, objective, grad_norm_sq, subset_hash, wall_seconds.
    pub fn csv_string(&self) -> String {
        let mut out = String::from("epoch,objective,grad_norm_sq,subset_hash,wall_seconds\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.epoch, r.objective, r.grad_norm_sq, r.subset_hash, r.wall_seconds
            ));
        }
        out
    }
}

fn subset_fingerprint(subset: &[usize]) -> String {
    let mut hasher = Sha256::new();
    for &i in subset {
        hasher.update((i as u64).to_le_bytes());
    }
    hex::encode(&hasher.finalize()[..8])
}

/// Mean per-sample loss over the whole ground set (Eq.-4-style empirical risk).
pub fn full_objective(model: &Model, data: &DatasetHandle) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (x, &y)) in data.xs.iter().zip(&data.ys).enumerate() {
        let v = model.loss.loss(&model.w, x, y);
        if !v.is_finite() {
            return Err(Error::NonFiniteLoss { index: i });
        }
        acc += v;
    }
    Ok(acc / data.n() as f64)
}

/// Mean per-sample gradient over the whole ground set.
pub fn full_gradient(model: &Model, data: &DatasetHandle) -> Result<Vec<f64>> {
    let d = model.dim();
    let mut mean = vec![0.0; d];
    let mut g = vec![0.0; d];
    for (i, (x, &y)) in data.xs.iter().zip(&data.ys).enumerate() {
        model.loss.grad(&model.w, x, y, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss { index: i });
        }
        for (m, v) in mean.iter_mut().zip(&g) {
            *m += v;
        }
    }
    let scale = 1.0 / data.n() as f64;
    mean.iter_mut().for_each(|v| *v *= scale);
    Ok(mean)
}

/// Mean loss over a subset of indices.
pub fn subset_objective(model: &Model, data: &DatasetHandle, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidConfig("subset must be non-empty".into()));
    }
    let mut acc = 0.0;
    for &i in subset {
        let (x, y) = data
            .xs
            .get(i)
            .zip(data.ys.get(i))
            .ok_or_else(|| Error::InvalidConfig(format!("subset index {i} out of range")))?;
        let v = model.loss.loss(&model.w, x, *y);
        if !v.is_finite() {
            return Err(Error::NonFiniteLoss { index: i });
        }
        acc += v;
    }
    Ok(acc / subset.len() as f64)
}

/// Mean gradient over a subset of indices.
pub fn subset_gradient(model: &Model, data: &DatasetHandle, subset: &[usize]) -> Result<Vec<f64>> {
    if subset.is_empty() {
        return Err(Error::InvalidConfig("subset must be non-empty".into()));
    }
    let d = model.dim();
    let mut mean = vec![0.0; d];
    let mut g = vec![0.0; d];
    for &i in subset {
        let (x, y) = data
            .xs
            .get(i)
            .zip(data.ys.get(i))
            .ok_or_else(|| Error::InvalidConfig(format!("subset index {i} out of range")))?;
        model.loss.grad(&model.w, x, *y, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss { index: i });
        }
        for (m, v) in mean.iter_mut().zip(&g) {
            *m += v;
        }
    }
    let scale = 1.0 / subset.len() as f64;
    mean.iter_mut().for_each(|v| *v *= scale);
    Ok(mean)
}

/// One full-data pass: objective, gradient, and per-sample gradient variance
/// (1/n)Σ‖∇f_i − ∇L_G‖² at the current iterate.
pub(crate) fn epoch_stats(model: &Model, data: &DatasetHandle) -> Result<(f64, Vec<f64>, f64)> {
    let d = model.dim();
    let n = data.n();
    let mut obj = 0.0;
    let mut mean = vec![0.0; d];
    let mut grads = vec![0.0; n * d];
    let mut g = vec![0.0; d];
    for (i, (x, &y)) in data.xs.iter().zip(&data.ys).enumerate() {
        let v = model.loss.loss(&model.w, x, y);
        model.loss.grad(&model.w, x, y, &mut g);
        if !v.is_finite() || g.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteLoss { index: i });
        }
        obj += v;
        grads[i * d..(i + 1) * d].copy_from_slice(&g);
        for (m, c) in mean.iter_mut().zip(&g) {
            *m += c;
        }
    }
    let scale = 1.0 / n as f64;
    obj *= scale;
    mean.iter_mut().for_each(|v| *v *= scale);
    let mut var = 0.0;
    for i in 0..n {
        for (j, m) in mean.iter().enumerate() {
            let dlt = grads[i * d + j] - m;
            var += dlt * dlt;
        }
    }
    var *= scale;
    Ok((obj, mean, var))
}

/// Train under the schedule: epoch k runs `epoch_steps` SGD updates on
/// samples drawn from V_k. Deterministic given the schedule and `rng` state.
/// Aborts with a divergence diagnostic if the objective exceeds 10⁶ × the
/// initial value (floored at 1 for objectives that start near zero).
pub fn train_srs<R: Rng + ?Sized>(
    model: &mut Model,
    data: &DatasetHandle,
    schedule: &SubsetSchedule,
    opt: &OptimizerConfig,
    rng: &mut R,
) -> Result<TrainingTrace> {
    opt.validate()?;
    if schedule.n != data.n() {
        return Err(Error::InvalidConfig(format!(
            "schedule ground set ({}) does not match dataset size ({})",
            schedule.n,
            data.n()
        )));
    }
    let start = Instant::now();
    let d = model.dim();
    let steps = opt.epoch_steps.unwrap_or(schedule.policy.m);
    let alpha = opt.alpha;

    let mut records = Vec::with_capacity(schedule.k());
    let mut seen = vec![false; data.n()];
    let mut distinct = 0usize;
    let mut visits = 0u64;
    let mut initial = 0.0;
    let mut batch_grad = vec![0.0; d];
    let mut g = vec![0.0; d];
    // Reshuffle state: a permutation of the current subset plus a cursor.
    let mut order: Vec<usize> = Vec::new();
    let mut cursor = 0usize;

    for (idx, subset) in schedule.epochs.iter().enumerate() {
        let epoch = idx + 1;
        let (objective, grad, variance) = epoch_stats(model, data)?;
        if epoch == 1 {
            initial = objective;
        }
        let guard = 1e6 * initial.abs().max(1.0);
        if objective > guard {
            return Err(Error::Diverged {
                epoch,
                objective,
                initial,
            });
        }
        for &i in subset {
            if !seen[i] {
                seen[i] = true;
                distinct += 1;
            }
        }
        visits += (steps * opt.batch_size) as u64;
        records.push(EpochRecord {
            epoch,
            objective,
            grad_norm_sq: grad.iter().map(|v| v * v).sum(),
            sample_grad_variance: variance,
            subset_hash: subset_fingerprint(subset),
            cumulative_visits: visits,
            distinct_seen: distinct,
            wall_seconds: 0.0,
        });

        if opt.within_epoch_sampling == WithinEpochSampling::Reshuffle {
            order = subset.clone();
            order.shuffle(rng);
            cursor = 0;
        }
        for _ in 0..steps {
            batch_grad.iter_mut().for_each(|v| *v = 0.0);
            for _ in 0..opt.batch_size {
                let i = match opt.within_epoch_sampling {
                    WithinEpochSampling::IidWithReplacement => {
                        subset[rng.gen_range(0..subset.len())]
                    }
                    WithinEpochSampling::Reshuffle => {
                        if cursor == order.len() {
                            order.shuffle(rng);
                            cursor = 0;
                        }
                        let i = order[cursor];
                        cursor += 1;
                        i
                    }
                };
                model.loss.grad(&model.w, &data.xs[i], data.ys[i], &mut g);
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteLoss { index: i });
                }
                for (b, v) in batch_grad.iter_mut().zip(&g) {
                    *b += v;
                }
            }
            let scale = alpha / opt.batch_size as f64;
            for (w, v) in model.w.iter_mut().zip(&batch_grad) {
                *w -= scale * v;
            }
        }
    }

    let final_objective = full_objective(model, data)?;
    let final_grad = full_gradient(model, data)?;
    if final_objective > 1e6 * initial.abs().max(1.0) {
        return Err(Error::Diverged {
            epoch: schedule.k(),
            objective: final_objective,
            initial,
        });
    }
    Ok(TrainingTrace {
        records,
        final_objective,
        final_grad_norm_sq: final_grad.iter().map(|v| v * v).sum(),
        final_w: model.w.clone(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Max over probe points and coordinates of the relative gap between the
/// analytic full gradient and a central finite difference of the objective:
/// |analytic − fd| / (|analytic| + 10⁻¹²).
pub fn gradient_check(
    model: &Model,
    data: &DatasetHandle,
    h: f64,
    probes: &[Vec<f64>],
) -> Result<f64> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step must be positive and finite, got {h}"
        )));
    }
    let mut worst = 0.0f64;
    let mut probe_model = model.clone();
    for probe in probes {
        if probe.len() != model.dim() {
            return Err(Error::InvalidConfig(
                "probe point dimension does not match the model".into(),
            ));
        }
        probe_model.w = probe.clone();
        let analytic = full_gradient(&probe_model, data)?;
        for j in 0..probe.len() {
            probe_model.w[j] = probe[j] + h;
            let plus = full_objective(&probe_model, data)?;
            probe_model.w[j] = probe[j] - h;
            let minus = full_objective(&probe_model, data)?;
            probe_model.w[j] = probe[j];
            let fd = (plus - minus) / (2.0 * h);
            let rel = (analytic[j] - fd).abs() / (analytic[j].abs() + 1e-12);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

/// Standard-normal probe points for gradient checking.
pub fn random_probes<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    use rand_distr::StandardNormal;
    (0..count)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}
