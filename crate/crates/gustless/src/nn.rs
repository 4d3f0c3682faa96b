//! Shallow feed-forward regression network and its full-batch trainer.
//!
//! One tanh hidden layer, identity output, mean-squared-error loss. Inputs
//! are z-scored with statistics frozen at training time. The trainer is a
//! nonlinear conjugate-gradient loop (Polak-Ribiere with restarts) over the
//! whole batch, with a plain gradient-descent fallback for debugging.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Smallest admissible per-dimension feature standard deviation.
pub const STD_FLOOR: f64 = 1e-6;

/// How reconstruction magnitudes are derived from network outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputUnits {
    /// Outputs are log-power: magnitude = exp(y / 2).
    LogPower,
    /// Outputs are log-magnitude: magnitude = exp(y).
    LogMagnitude,
}

/// Weights, biases and input normalization of the reconstruction network.
#[derive(Debug, Clone, PartialEq)]
pub struct NnModel {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub norm_mean: Array1<f64>,
    pub norm_std: Array1<f64>,
    pub output_units: OutputUnits,
}

impl NnModel {
    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.w2.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.b1.len() != self.hidden_dim()
            || self.w2.ncols() != self.hidden_dim()
            || self.b2.len() != self.output_dim()
            || self.norm_mean.len() != self.input_dim()
            || self.norm_std.len() != self.input_dim()
        {
            return Err(Error::ModelMismatch(format!(
                "inconsistent layer shapes: w1 {}x{}, b1 {}, w2 {}x{}, b2 {}, norm {}/{}",
                self.hidden_dim(),
                self.input_dim(),
                self.b1.len(),
                self.output_dim(),
                self.w2.ncols(),
                self.b2.len(),
                self.norm_mean.len(),
                self.norm_std.len()
            )));
        }
        if self.norm_std.iter().any(|&s| !s.is_finite() || s <= 0.0) {
            return Err(Error::ModelMismatch(
                "normalization std must be positive on every dimension".into(),
            ));
        }
        Ok(())
    }

    /// Deterministic single-sample forward pass:
    /// `identity(w2 . tanh(w1 . zscore(x) + b1) + b2)`.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::ModelMismatch(format!(
                "input length {} does not match model input dim {}",
                input.len(),
                self.input_dim()
            )));
        }
        let z: Array1<f64> = input
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - self.norm_mean[i]) / self.norm_std[i])
            .collect();
        let mut hidden = self.w1.dot(&z);
        hidden += &self.b1;
        hidden.mapv_inplace(f64::tanh);
        let mut out = self.w2.dot(&hidden);
        out += &self.b2;
        Ok(out.to_vec())
    }

    /// Batch forward over pre-normalized rows.
    fn forward_normalized(&self, z: &Array2<f64>) -> Array2<f64> {
        let mut hidden = z.dot(&self.w1.t());
        hidden += &self.b1;
        hidden.mapv_inplace(f64::tanh);
        let mut out = hidden.dot(&self.w2.t());
        out += &self.b2;
        out
    }
}

/// Which optimizer drives training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    /// Full-batch nonlinear conjugate gradient (Polak-Ribiere, restarts).
    ConjugateGradient,
    /// Full-batch gradient descent with backtracking; slow but simple.
    GradientDescent,
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub max_iters: usize,
    /// Stop when the relative loss improvement over an iteration falls
    /// below this.
    pub rel_tolerance: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Keep every n-th frame of the training pairs (1 = all frames).
    pub frame_stride: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            rel_tolerance: 1e-7,
            seed: 0,
            optimizer: Optimizer::ConjugateGradient,
            frame_stride: 1,
        }
    }
}

/// What training achieved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub iterations: usize,
    pub samples: usize,
}

/// Trainable parameter block with the vector-space ops the optimizer needs.
#[derive(Debug, Clone)]
struct Params {
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
}

impl Params {
    fn dot(&self, other: &Params) -> f64 {
        let mut acc = 0.0;
        acc += self.w1.iter().zip(other.w1.iter()).map(|(a, b)| a * b).sum::<f64>();
        acc += self.b1.iter().zip(other.b1.iter()).map(|(a, b)| a * b).sum::<f64>();
        acc += self.w2.iter().zip(other.w2.iter()).map(|(a, b)| a * b).sum::<f64>();
        acc += self.b2.iter().zip(other.b2.iter()).map(|(a, b)| a * b).sum::<f64>();
        acc
    }

    fn scaled_add(&mut self, other: &Params, alpha: f64) {
        self.w1.zip_mut_with(&other.w1, |a, &b| *a += alpha * b);
        self.b1.zip_mut_with(&other.b1, |a, &b| *a += alpha * b);
        self.w2.zip_mut_with(&other.w2, |a, &b| *a += alpha * b);
        self.b2.zip_mut_with(&other.b2, |a, &b| *a += alpha * b);
    }

    fn neg(&self) -> Params {
        Params {
            w1: self.w1.mapv(|v| -v),
            b1: self.b1.mapv(|v| -v),
            w2: self.w2.mapv(|v| -v),
            b2: self.b2.mapv(|v| -v),
        }
    }

    fn update_direction(&mut self, grad: &Params, beta: f64) {
        // d <- -g + beta * d
        self.w1.zip_mut_with(&grad.w1, |d, &g| *d = beta * *d - g);
        self.b1.zip_mut_with(&grad.b1, |d, &g| *d = beta * *d - g);
        self.w2.zip_mut_with(&grad.w2, |d, &g| *d = beta * *d - g);
        self.b2.zip_mut_with(&grad.b2, |d, &g| *d = beta * *d - g);
    }
}

/// Normalized training batch.
pub struct TrainBatch {
    /// Z-scored inputs, samples by input dim.
    pub inputs: Array2<f64>,
    /// Targets, samples by output dim.
    pub targets: Array2<f64>,
    pub norm_mean: Array1<f64>,
    pub norm_std: Array1<f64>,
}

impl TrainBatch {
    /// Z-scores raw inputs with statistics computed from them.
    pub fn new(raw_inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if raw_inputs.nrows() == 0 {
            return Err(Error::Training("no training samples".into()));
        }
        if raw_inputs.nrows() != targets.nrows() {
            return Err(Error::Training(format!(
                "{} inputs vs {} targets",
                raw_inputs.nrows(),
                targets.nrows()
            )));
        }
        let n = raw_inputs.nrows() as f64;
        let norm_mean = raw_inputs.sum_axis(Axis(0)) / n;
        let mut norm_std = raw_inputs
            .rows()
            .into_iter()
            .fold(Array1::<f64>::zeros(raw_inputs.ncols()), |mut acc, row| {
                for (a, (&x, &m)) in acc.iter_mut().zip(row.iter().zip(norm_mean.iter())) {
                    *a += (x - m) * (x - m);
                }
                acc
            });
        norm_std.mapv_inplace(|v| (v / n).sqrt().max(STD_FLOOR));
        let mut inputs = raw_inputs;
        for mut row in inputs.rows_mut() {
            for (x, (&m, &s)) in row.iter_mut().zip(norm_mean.iter().zip(norm_std.iter())) {
                *x = (*x - m) / s;
            }
        }
        Ok(Self {
            inputs,
            targets,
            norm_mean,
            norm_std,
        })
    }
}

struct Objective<'a> {
    z: &'a Array2<f64>,
    t: &'a Array2<f64>,
}

impl Objective<'_> {
    fn loss(&self, p: &Params) -> f64 {
        let mut hidden = self.z.dot(&p.w1.t());
        hidden += &p.b1;
        hidden.mapv_inplace(f64::tanh);
        let mut y = hidden.dot(&p.w2.t());
        y += &p.b2;
        y -= self.t;
        let n = (self.t.nrows() * self.t.ncols()) as f64;
        y.iter().map(|e| e * e).sum::<f64>() / n
    }

    fn loss_and_grad(&self, p: &Params) -> (f64, Params) {
        let n = (self.t.nrows() * self.t.ncols()) as f64;
        let mut hidden = self.z.dot(&p.w1.t());
        hidden += &p.b1;
        hidden.mapv_inplace(f64::tanh);
        let mut err = hidden.dot(&p.w2.t());
        err += &p.b2;
        err -= self.t;
        let loss = err.iter().map(|e| e * e).sum::<f64>() / n;
        // dL/dy = 2 e / n
        err.mapv_inplace(|e| 2.0 * e / n);
        let gw2 = err.t().dot(&hidden);
        let gb2 = err.sum_axis(Axis(0));
        let mut dh = err.dot(&p.w2);
        dh.zip_mut_with(&hidden, |d, &h| *d *= 1.0 - h * h);
        let gw1 = dh.t().dot(self.z);
        let gb1 = dh.sum_axis(Axis(0));
        (
            loss,
            Params {
                w1: gw1,
                b1: gb1,
                w2: gw2,
                b2: gb2,
            },
        )
    }
}

/// Backtracking line search with an Armijo sufficient-decrease test.
/// Returns the accepted step and loss, or None when no decrease is found.
fn line_search(
    obj: &Objective,
    theta: &Params,
    dir: &Params,
    f0: f64,
    slope: f64,
    alpha0: f64,
) -> Option<(f64, f64)> {
    const C1: f64 = 1e-4;
    let mut alpha = alpha0;
    for _ in 0..40 {
        let mut trial = theta.clone();
        trial.scaled_add(dir, alpha);
        let f = obj.loss(&trial);
        if f.is_finite() && f <= f0 + C1 * alpha * slope {
            return Some((alpha, f));
        }
        alpha *= 0.5;
    }
    None
}

/// Trains a model on a prepared batch. Hidden weights start at a seeded
/// Xavier draw; output biases start at the per-dimension target mean.
pub fn train_on_batch(
    batch: &TrainBatch,
    hidden_dim: usize,
    settings: &TrainSettings,
) -> Result<(NnModel, TrainReport)> {
    let input_dim = batch.inputs.ncols();
    let output_dim = batch.targets.ncols();
    if hidden_dim == 0 || input_dim == 0 || output_dim == 0 {
        return Err(Error::Training("degenerate layer size".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut init = |rows: usize, cols: usize, fan_in: usize, fan_out: usize| {
        let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
        Array2::from_shape_fn((rows, cols), |_| (rng.random::<f64>() * 2.0 - 1.0) * r)
    };
    let target_mean = batch.targets.sum_axis(Axis(0)) / batch.targets.nrows() as f64;
    let mut theta = Params {
        w1: init(hidden_dim, input_dim, input_dim, hidden_dim),
        b1: Array1::zeros(hidden_dim),
        w2: init(output_dim, hidden_dim, hidden_dim, output_dim),
        b2: target_mean,
    };

    let obj = Objective {
        z: &batch.inputs,
        t: &batch.targets,
    };
    let (mut f, mut grad) = obj.loss_and_grad(&theta);
    if !f.is_finite() {
        return Err(Error::Training(format!("initial loss is not finite: {f}")));
    }
    let initial_loss = f;
    let mut dir = grad.neg();
    let mut alpha = 1.0 / grad.dot(&grad).sqrt().max(1e-12);
    let mut iterations = 0;

    for iter in 0..settings.max_iters {
        let slope = grad.dot(&dir);
        let (dir_used, slope_used) = if slope < 0.0 {
            (dir.clone(), slope)
        } else {
            // Not a descent direction: restart on steepest descent.
            let d = grad.neg();
            let s = grad.dot(&d);
            (d, s)
        };
        let Some((step, f_new)) = line_search(&obj, &theta, &dir_used, f, slope_used, alpha) else {
            break;
        };
        theta.scaled_add(&dir_used, step);
        let (f_check, grad_new) = obj.loss_and_grad(&theta);
        if !f_check.is_finite() {
            return Err(Error::Training(format!(
                "loss became non-finite at iteration {iter}"
            )));
        }
        iterations = iter + 1;
        let improved = (f - f_new) / f.max(1e-300);
        let beta = match settings.optimizer {
            Optimizer::GradientDescent => 0.0,
            Optimizer::ConjugateGradient => {
                if (iter + 1) % 50 == 0 {
                    0.0
                } else {
                    // Polak-Ribiere+, clamped at zero (automatic restart).
                    let num = grad_new.dot(&grad_new) - grad_new.dot(&grad);
                    (num / grad.dot(&grad).max(1e-300)).max(0.0)
                }
            }
        };
        dir = dir_used;
        dir.update_direction(&grad_new, beta);
        grad = grad_new;
        f = f_new;
        alpha = (step * 2.0).min(1e3);
        if improved < settings.rel_tolerance {
            break;
        }
    }

    let model = NnModel {
        w1: theta.w1,
        b1: theta.b1,
        w2: theta.w2,
        b2: theta.b2,
        norm_mean: batch.norm_mean.clone(),
        norm_std: batch.norm_std.clone(),
        output_units: OutputUnits::LogPower,
    };
    model.validate()?;
    Ok((
        model,
        TrainReport {
            initial_loss,
            final_loss: f,
            iterations,
            samples: batch.inputs.nrows(),
        },
    ))
}

/// Analytic parameter gradients, shaped like the model's own blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Mean-squared-error loss of a model on an already-normalized batch.
pub fn model_loss(model: &NnModel, z: &Array2<f64>, targets: &Array2<f64>) -> f64 {
    let p = Params {
        w1: model.w1.clone(),
        b1: model.b1.clone(),
        w2: model.w2.clone(),
        b2: model.b2.clone(),
    };
    Objective { z, t: targets }.loss(&p)
}

/// Loss plus analytic gradients on an already-normalized batch; this is the
/// exact quantity the trainer descends.
pub fn model_loss_and_gradient(
    model: &NnModel,
    z: &Array2<f64>,
    targets: &Array2<f64>,
) -> (f64, ParamGradient) {
    let p = Params {
        w1: model.w1.clone(),
        b1: model.b1.clone(),
        w2: model.w2.clone(),
        b2: model.b2.clone(),
    };
    let (loss, g) = Objective { z, t: targets }.loss_and_grad(&p);
    (
        loss,
        ParamGradient {
            w1: g.w1,
            b1: g.b1,
            w2: g.w2,
            b2: g.b2,
        },
    )
}

/// Mean squared error of the model on a labeled set (raw, un-normalized
/// inputs).
pub fn mse_on(model: &NnModel, raw_inputs: &Array2<f64>, targets: &Array2<f64>) -> Result<f64> {
    if raw_inputs.ncols() != model.input_dim() {
        return Err(Error::ModelMismatch(format!(
            "inputs have {} dims, model wants {}",
            raw_inputs.ncols(),
            model.input_dim()
        )));
    }
    let mut z = raw_inputs.clone();
    for mut row in z.rows_mut() {
        for (x, (&m, &s)) in row
            .iter_mut()
            .zip(model.norm_mean.iter().zip(model.norm_std.iter()))
        {
            *x = (*x - m) / s;
        }
    }
    let y = model.forward_normalized(&z);
    let n = (targets.nrows() * targets.ncols()) as f64;
    Ok(y.iter()
        .zip(targets.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_model(seed: u64, input: usize, hidden: usize, output: usize) -> NnModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mat = |r: usize, c: usize| {
            Array2::from_shape_fn((r, c), |_| rng.random::<f64>() * 2.0 - 1.0)
        };
        NnModel {
            w1: mat(hidden, input),
            b1: Array1::from_shape_fn(hidden, |i| 0.01 * i as f64),
            w2: mat(output, hidden),
            b2: Array1::from_shape_fn(output, |i| -0.5 + i as f64 * 0.3),
            norm_mean: Array1::zeros(input),
            norm_std: Array1::ones(input),
            output_units: OutputUnits::LogPower,
        }
    }

    #[test]
    fn zero_weights_pass_bias_through() {
        let mut model = toy_model(1, 6, 4, 3);
        model.w1.fill(0.0);
        model.w2.fill(0.0);
        let out = model.forward(&[1.0, -2.0, 3.0, 0.5, 0.0, 9.0]).unwrap();
        for (o, b) in out.iter().zip(model.b2.iter()) {
            assert_eq!(o, b);
        }
        // Zeroing only the hidden input weights also reduces to a constant:
        // tanh(b1) no longer depends on the input.
        let mut m2 = toy_model(2, 6, 4, 3);
        m2.w1.fill(0.0);
        let a = m2.forward(&[1.0; 6]).unwrap();
        let b = m2.forward(&[-3.0, 2.0, 0.0, 7.0, 1.0, -1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_rejects_wrong_length() {
        let model = toy_model(3, 6, 4, 3);
        assert!(model.forward(&[0.0; 5]).is_err());
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        // Numerical oracle: perturb every coordinate of every parameter
        // block and compare against backprop, 20 random draws.
        let mut worst = 0.0f64;
        for draw in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + draw);
            let m = 5;
            let (di, dh, do_) = (7, 5, 3);
            let z = Array2::from_shape_fn((m, di), |_| rng.random::<f64>() * 2.0 - 1.0);
            let t = Array2::from_shape_fn((m, do_), |_| rng.random::<f64>() * 2.0 - 1.0);
            let obj = Objective { z: &z, t: &t };
            let mut mat =
                |r: usize, c: usize| Array2::from_shape_fn((r, c), |_| rng.random::<f64>() - 0.5);
            let theta = Params {
                w1: mat(dh, di),
                b1: Array1::from_shape_fn(dh, |i| (i as f64 - 1.0) * 0.1),
                w2: mat(do_, dh),
                b2: Array1::from_shape_fn(do_, |i| i as f64 * 0.05),
            };
            let (_, analytic) = obj.loss_and_grad(&theta);
            let eps = 1e-5;
            let mut num_sq = 0.0;
            let mut diff_sq = 0.0;
            let mut probe = |idx: usize, total: usize, get: &dyn Fn(&Params, usize) -> f64, set: &dyn Fn(&mut Params, usize, f64)| {
                let _ = total;
                let base = get(&theta, idx);
                let mut plus = theta.clone();
                set(&mut plus, idx, base + eps);
                let mut minus = theta.clone();
                set(&mut minus, idx, base - eps);
                let numeric = (obj.loss(&plus) - obj.loss(&minus)) / (2.0 * eps);
                let a = get(&analytic, idx);
                num_sq += numeric * numeric;
                diff_sq += (a - numeric) * (a - numeric);
            };
            let w1_len = dh * di;
            for i in 0..w1_len {
                probe(i, w1_len, &|p, i| p.w1.as_slice().unwrap()[i], &|p, i, v| {
                    p.w1.as_slice_mut().unwrap()[i] = v
                });
            }
            for i in 0..dh {
                probe(i, dh, &|p, i| p.b1[i], &|p, i, v| p.b1[i] = v);
            }
            let w2_len = do_ * dh;
            for i in 0..w2_len {
                probe(i, w2_len, &|p, i| p.w2.as_slice().unwrap()[i], &|p, i, v| {
                    p.w2.as_slice_mut().unwrap()[i] = v
                });
            }
            for i in 0..do_ {
                probe(i, do_, &|p, i| p.b2[i], &|p, i, v| p.b2[i] = v);
            }
            let rel = (diff_sq.sqrt()) / num_sq.sqrt().max(1e-300);
            worst = worst.max(rel);
            assert!(rel < 1e-4, "draw {draw}: relative gradient error {rel}");
        }
        assert!(worst > 0.0);
    }

    #[test]
    fn overfits_a_tiny_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = 10;
        let raw = Array2::from_shape_fn((m, 6), |_| rng.random::<f64>() * 4.0 - 2.0);
        let targets = Array2::from_shape_fn((m, 2), |(i, j)| {
            (raw[[i, 0]] * 0.5 + raw[[i, 3]]).sin() + j as f64 * 0.2
        });
        let batch = TrainBatch::new(raw, targets).unwrap();
        let settings = TrainSettings {
            max_iters: 500,
            rel_tolerance: 0.0,
            seed: 13,
            ..TrainSettings::default()
        };
        let (_, report) = train_on_batch(&batch, 30, &settings).unwrap();
        assert!(
            report.final_loss < 1e-3,
            "loss stalled at {}",
            report.final_loss
        );
        assert!(report.final_loss < report.initial_loss);
    }

    #[test]
    fn training_is_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let raw = Array2::from_shape_fn((40, 8), |_| rng.random::<f64>() - 0.5);
        let targets = Array2::from_shape_fn((40, 3), |(i, _)| raw[[i, 2]] * 1.5 - raw[[i, 5]]);
        let settings = TrainSettings {
            max_iters: 50,
            seed: 5,
            ..TrainSettings::default()
        };
        let (a, _) = train_on_batch(&TrainBatch::new(raw.clone(), targets.clone()).unwrap(), 12, &settings).unwrap();
        let (b, _) = train_on_batch(&TrainBatch::new(raw, targets).unwrap(), 12, &settings).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_descent_fallback_also_descends() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let raw = Array2::from_shape_fn((30, 5), |_| rng.random::<f64>() - 0.5);
        let targets = Array2::from_shape_fn((30, 2), |(i, _)| raw[[i, 0]] - 2.0 * raw[[i, 4]]);
        let settings = TrainSettings {
            max_iters: 80,
            optimizer: Optimizer::GradientDescent,
            seed: 3,
            ..TrainSettings::default()
        };
        let (_, report) =
            train_on_batch(&TrainBatch::new(raw, targets).unwrap(), 10, &settings).unwrap();
        assert!(report.final_loss < report.initial_loss);
    }

    #[test]
    fn non_finite_loss_aborts_with_diagnostic() {
        let raw = Array2::from_elem((4, 3), 1.0);
        let mut targets = Array2::zeros((4, 2));
        targets[[1, 0]] = f64::INFINITY;
        let batch = TrainBatch::new(raw, targets).unwrap();
        match train_on_batch(&batch, 5, &TrainSettings::default()) {
            Err(crate::error::Error::Training(msg)) => {
                assert!(msg.contains("finite"), "message: {msg}")
            }
            other => panic!("expected Training error, got {other:?}"),
        }
    }

    #[test]
    fn std_floor_keeps_constant_dimensions_finite() {
        let raw = Array2::from_elem((12, 3), 4.2);
        let targets = Array2::zeros((12, 1));
        let batch = TrainBatch::new(raw, targets).unwrap();
        assert!(batch.norm_std.iter().all(|&s| s >= STD_FLOOR));
        assert!(batch.inputs.iter().all(|v| v.is_finite()));
    }
}
