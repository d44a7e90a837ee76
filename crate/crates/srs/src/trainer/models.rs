//! The shipped per-sample losses. Each one's analytic gradient is covered
//! by `gradient_check` in the tests; the loss/grad pairs here are the only
//! derivative code in the crate.

use super::SampleLoss;

/// Scalar least squares: f(w; x, y) = ½(⟨w, x⟩ − y)².
#[derive(Debug, Clone, Copy, Default)]
pub struct LeastSquares;

impl SampleLoss for LeastSquares {
    fn loss(&self, w: &[f64], x: &[f64], y: f64) -> f64 {
        let r = dot(w, x) - y;
        0.5 * r * r
    }

    fn grad(&self, w: &[f64], x: &[f64], y: f64, out: &mut [f64]) {
        let r = dot(w, x) - y;
        for (o, xi) in out.iter_mut().zip(x) {
            *o = r * xi;
        }
    }
}

/// Binary logistic loss with labels y ∈ {−1, +1}:
/// f(w; x, y) = ln(1 + exp(−y⟨w, x⟩)), evaluated in the overflow-free form.
#[derive(Debug, Clone, Copy, Default)]
pub struct Logistic;

impl SampleLoss for Logistic {
    fn loss(&self, w: &[f64], x: &[f64], y: f64) -> f64 {
        let z = y * dot(w, x);
        if z >= 0.0 {
            (-z).exp().ln_1p()
        } else {
            -z + z.exp().ln_1p()
        }
    }

    fn grad(&self, w: &[f64], x: &[f64], y: f64, out: &mut [f64]) {
        let z = y * dot(w, x);
        // σ(−z) = 1 / (1 + e^z), computed without overflowing e^z.
        let s = if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        };
        let c = -y * s;
        for (o, xi) in out.iter_mut().zip(x) {
            *o = c * xi;
        }
    }
}

/// Shared-map quadratic: f(w; b) = ½‖Aw − b‖² with one d×d matrix A for all
/// samples and the sample's feature vector playing the role of the target b.
/// The mean Hessian is AᵀA regardless of the data, which is what makes the
/// benchmark constants exact.
#[derive(Debug, Clone)]
pub struct MapQuadratic {
    /// Row-major d×d matrix.
    pub a: Vec<Vec<f64>>,
}

impl MapQuadratic {
    pub fn new(a: Vec<Vec<f64>>) -> Self {
        let d = a.len();
        assert!(d > 0 && a.iter().all(|row| row.len() == d), "A must be square");
        MapQuadratic { a }
    }

    fn residual(&self, w: &[f64], b: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(b)
            .map(|(row, bi)| dot(row, w) - bi)
            .collect()
    }
}

impl SampleLoss for MapQuadratic {
    fn loss(&self, w: &[f64], x: &[f64], _y: f64) -> f64 {
        0.5 * self.residual(w, x).iter().map(|r| r * r).sum::<f64>()
    }

    fn grad(&self, w: &[f64], x: &[f64], _y: f64, out: &mut [f64]) {
        let r = self.residual(w, x);
        // Aᵀr.
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.a.iter().zip(&r).map(|(row, ri)| row[j] * ri).sum();
        }
    }
}

/// Tiny two-layer tanh network with squared loss:
/// f(w; x, y) = ½(Σ_j v_j tanh(⟨W_j, x⟩ + b_j) − y)².
///
/// Parameter layout: W row-major (hidden × input), then b, then v.
#[derive(Debug, Clone, Copy)]
pub struct TwoLayerNet {
    pub input: usize,
    pub hidden: usize,
}

impl TwoLayerNet {
    pub fn new(input: usize, hidden: usize) -> Self {
        assert!(input > 0 && hidden > 0);
        TwoLayerNet { input, hidden }
    }

    pub fn param_count(&self) -> usize {
        self.hidden * self.input + 2 * self.hidden
    }

    fn forward(&self, w: &[f64], x: &[f64]) -> (f64, Vec<f64>) {
        debug_assert_eq!(w.len(), self.param_count());
        let (weights, rest) = w.split_at(self.hidden * self.input);
        let (bias, v) = rest.split_at(self.hidden);
        let mut activations = Vec::with_capacity(self.hidden);
        let mut out = 0.0;
        for j in 0..self.hidden {
            let z = dot(&weights[j * self.input..(j + 1) * self.input], x) + bias[j];
            let t = z.tanh();
            out += v[j] * t;
            activations.push(t);
        }
        (out, activations)
    }
}

impl SampleLoss for TwoLayerNet {
    fn loss(&self, w: &[f64], x: &[f64], y: f64) -> f64 {
        let (out, _) = self.forward(w, x);
        let r = out - y;
        0.5 * r * r
    }

    fn grad(&self, w: &[f64], x: &[f64], y: f64, out: &mut [f64]) {
        let (pred, t) = self.forward(w, x);
        let r = pred - y;
        let v = &w[self.hidden * self.input + self.hidden..];
        let (w_out, rest) = out.split_at_mut(self.hidden * self.input);
        let (b_out, v_out) = rest.split_at_mut(self.hidden);
        for j in 0..self.hidden {
            let dt = r * v[j] * (1.0 - t[j] * t[j]);
            b_out[j] = dt;
            v_out[j] = r * t[j];
            for (o, xi) in w_out[j * self.input..(j + 1) * self.input]
                .iter_mut()
                .zip(x)
            {
                *o = dt * xi;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::seeded_rng;
    use crate::trainer::{gradient_check, random_probes, DatasetHandle, Model};
    use std::sync::Arc;

    #[test]
    fn logistic_at_origin() {
        let w = vec![0.0, 0.0];
        let x = vec![1.0, -2.0];
        let loss = Logistic.loss(&w, &x, 1.0);
        assert!((loss - 2f64.ln()).abs() < 1e-15);
        let mut g = vec![0.0; 2];
        Logistic.grad(&w, &x, 1.0, &mut g);
        assert!((g[0] - (-0.5)).abs() < 1e-15);
        assert!((g[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn logistic_is_stable_at_extreme_margins() {
        let w = vec![500.0];
        let mut g = vec![0.0];
        for y in [1.0, -1.0] {
            let loss = Logistic.loss(&w, &[1.0], y);
            Logistic.grad(&w, &[1.0], y, &mut g);
            assert!(loss.is_finite() && g[0].is_finite());
        }
        // Hugely misclassified: loss ≈ margin, gradient ≈ −y·x.
        assert!((Logistic.loss(&w, &[1.0], -1.0) - 500.0).abs() < 1e-9);
    }

    #[test]
    fn map_quadratic_1d_equals_least_squares() {
        let mq = MapQuadratic::new(vec![vec![1.0]]);
        for (w, b) in [(0.3, 2.0), (-1.0, 0.5)] {
            let via_map = mq.loss(&[w], &[b], 0.0);
            let via_ls = LeastSquares.loss(&[w], &[1.0], b);
            assert!((via_map - via_ls).abs() < 1e-15);
        }
    }

    #[test]
    fn all_models_pass_gradient_check() {
        let mut rng = seeded_rng(31);

        let ls_data = DatasetHandle::new(
            vec![vec![1.0, 2.0], vec![-0.5, 0.7], vec![0.9, -1.3]],
            vec![0.4, -0.2, 1.1],
        )
        .unwrap();
        let probes = random_probes(2, 5, &mut rng);
        let model = Model::new(vec![0.0; 2], Arc::new(LeastSquares));
        assert!(gradient_check(&model, &ls_data, 1e-5, &probes).unwrap() <= 1e-5);

        let lg_data = DatasetHandle::new(ls_data.xs.clone(), vec![1.0, -1.0, 1.0]).unwrap();
        let model = Model::new(vec![0.0; 2], Arc::new(Logistic));
        assert!(gradient_check(&model, &lg_data, 1e-5, &probes).unwrap() <= 1e-5);

        let mq = MapQuadratic::new(vec![vec![2.0, 0.3], vec![0.3, 1.0]]);
        let mq_data = DatasetHandle::new(vec![vec![1.0, -1.0], vec![0.2, 0.8]], vec![0.0; 2]).unwrap();
        let model = Model::new(vec![0.0; 2], Arc::new(mq));
        assert!(gradient_check(&model, &mq_data, 1e-5, &probes).unwrap() <= 1e-5);

        let net = TwoLayerNet::new(2, 3);
        let d = net.param_count();
        let net_probes = random_probes(d, 5, &mut rng);
        let net_data = DatasetHandle::new(
            vec![vec![0.5, -0.2], vec![-1.0, 0.4], vec![0.3, 0.9]],
            vec![1.0, -1.0, 1.0],
        )
        .unwrap();
        let model = Model::new(vec![0.1; d], Arc::new(net));
        assert!(gradient_check(&model, &net_data, 1e-5, &net_probes).unwrap() <= 1e-5);
    }

    #[test]
    fn two_layer_parameter_layout() {
        let net = TwoLayerNet::new(2, 2);
        assert_eq!(net.param_count(), 8);
        // W = [[1,0],[0,1]], b = 0, v = [1, -1] → out = tanh(x0) − tanh(x1).
        let w = vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, -1.0];
        let (out, _) = net.forward(&w, &[0.3, -0.6]);
        let expect = 0.3f64.tanh() - (-0.6f64).tanh();
        assert!((out - expect).abs() < 1e-15);
    }
}
