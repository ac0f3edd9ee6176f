//! Gradients (parameter-shift and finite-difference) and the classical
//! optimizers (Adam, vanilla gradient descent) with multi-restart drivers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::VfeLoss;
use crate::rng::SeededRng;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Adam,
    Gd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientKind {
    Shift,
    FiniteDiff,
}

/// Optimizer hyperparameters. Parameters are initialized independently
/// uniform on [0, 2*pi); restart r draws from stream (seed, r).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimConfig {
    pub method: Method,
    pub learning_rate: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub direction: Direction,
    pub gradient: GradientKind,
    /// Shot count for sampled expectations; absent means exact.
    pub shots: Option<u64>,
}

impl OptimConfig {
    /// VTDE / nVTDE defaults: Adam, LR 0.02, ITR 120.
    pub fn vtde_default() -> Self {
        Self {
            method: Method::Adam,
            learning_rate: 0.02,
            iterations: 120,
            restarts: 3,
            seed: 0,
            direction: Direction::Maximize,
            gradient: GradientKind::Shift,
            shots: None,
        }
    }

    pub fn nvtde_default() -> Self {
        Self::vtde_default()
    }

    /// VFE fidelity-stage defaults: Adam, LR 0.2, ITR 100.
    pub fn vfe_default() -> Self {
        Self {
            method: Method::Adam,
            learning_rate: 0.2,
            iterations: 100,
            restarts: 3,
            seed: 0,
            direction: Direction::Maximize,
            gradient: GradientKind::Shift,
            shots: None,
        }
    }

    /// Purification-learning defaults: Adam, LR 0.2, ITR 100, minimizing.
    pub fn vqsl_default() -> Self {
        Self {
            direction: Direction::Minimize,
            ..Self::vfe_default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_shots(mut self, shots: Option<u64>) -> Self {
        self.shots = shots;
        self
    }
}

/// Loss series of one restart; `aborted` marks a run cut short by a
/// non-finite loss or gradient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartRun {
    pub losses: Vec<f64>,
    pub aborted: bool,
}

/// Record of a multi-restart optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimTrace {
    pub restarts: Vec<RestartRun>,
    pub best_theta: Vec<f64>,
    pub best_loss: f64,
    pub best_restart: usize,
}

impl OptimTrace {
    /// CSV serialization: `iteration,restart,loss` rows.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "iteration,restart,loss")?;
        for (r, run) in self.restarts.iter().enumerate() {
            for (i, loss) in run.losses.iter().enumerate() {
                writeln!(w, "{},{},{}", i, r, crate::report::format_significant(*loss, 12))?;
            }
        }
        Ok(())
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamState {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// One ascent step along `grad`.
    fn step(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t);
        for i in 0..theta.len() {
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * grad[i];
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            theta[i] += lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

/// Runs `iterations` fixed steps per restart and keeps the best iterate seen
/// across restarts. Maximization runs ascent on the loss. A restart hitting a
/// non-finite loss or gradient is aborted and recorded; the others continue.
pub fn run_optimizer<L, G>(
    mut loss: L,
    mut grad: G,
    n_params: usize,
    config: &OptimConfig,
) -> Result<OptimTrace>
where
    L: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    assert!(config.restarts >= 1, "need at least one restart");
    assert!(config.learning_rate >= 0.0, "learning rate must be >= 0");
    let sign = match config.direction {
        Direction::Maximize => 1.0,
        Direction::Minimize => -1.0,
    };
    let mut runs = Vec::with_capacity(config.restarts);
    let mut best: Option<(f64, Vec<f64>, usize)> = None;

    for restart in 0..config.restarts {
        let mut rng = SeededRng::with_stream(config.seed, restart as u64);
        let mut theta: Vec<f64> = (0..n_params).map(|_| rng.uniform_angle()).collect();
        let mut adam = AdamState::new(n_params);
        let mut losses = Vec::with_capacity(config.iterations);
        let mut aborted = false;

        for _ in 0..config.iterations {
            let g = grad(&theta);
            if g.len() != n_params || g.iter().any(|x| !x.is_finite()) {
                aborted = true;
                break;
            }
            let ascent: Vec<f64> = g.iter().map(|x| sign * x).collect();
            match config.method {
                Method::Adam => adam.step(&mut theta, &ascent, config.learning_rate),
                Method::Gd => {
                    for i in 0..n_params {
                        theta[i] += config.learning_rate * ascent[i];
                    }
                }
            }
            let value = loss(&theta);
            if !value.is_finite() {
                aborted = true;
                break;
            }
            losses.push(value);
            let improved = match &best {
                None => true,
                Some((b, _, _)) => sign * value > sign * b,
            };
            if improved {
                best = Some((value, theta.clone(), restart));
            }
        }
        runs.push(RestartRun { losses, aborted });
    }

    let (best_loss, best_theta, best_restart) = best.ok_or(Error::NonFiniteLoss)?;
    Ok(OptimTrace {
        restarts: runs,
        best_theta,
        best_loss,
        best_restart,
    })
}

/// Parameter-shift partial derivative of an expectation-valued loss:
/// (f(theta_j + pi/2) - f(theta_j - pi/2)) / 2.
///
/// Exact for losses that are linear in each conjugated input state with
/// Pauli-generated rotations.
pub fn grad_shift_expectation<F>(mut loss: F, theta: &[f64], j: usize) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    if j >= theta.len() {
        return Err(Error::IndexOutOfRange(format!(
            "parameter index {j} outside {} parameters",
            theta.len()
        )));
    }
    let mut plus = theta.to_vec();
    plus[j] += std::f64::consts::FRAC_PI_2;
    let mut minus = theta.to_vec();
    minus[j] -= std::f64::consts::FRAC_PI_2;
    Ok(0.5 * (loss(&plus) - loss(&minus)))
}

/// Full parameter-shift gradient via [`grad_shift_expectation`].
pub fn grad_shift_all<F>(mut loss: F, theta: &[f64]) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    (0..theta.len())
        .map(|j| grad_shift_expectation(&mut loss, theta, j).expect("index in range"))
        .collect()
}

/// Overlap-loss shift rule (|L|^2 derivative): 2 Re[conj(L(theta)) * L(theta_j + pi)/2].
pub fn grad_overlap_shift(loss: &VfeLoss, theta: &[f64], j: usize) -> Result<f64> {
    if j >= theta.len() {
        return Err(Error::IndexOutOfRange(format!(
            "parameter index {j} outside {} parameters",
            theta.len()
        )));
    }
    Ok(loss.gradient_sq_component(theta, j))
}

/// Central finite differences, the verification oracle for the shift rules.
pub fn grad_finite_diff<F>(mut loss: F, theta: &[f64], step: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    (0..theta.len())
        .map(|j| {
            let mut plus = theta.to_vec();
            plus[j] += step;
            let mut minus = theta.to_vec();
            minus[j] -= step;
            (loss(&plus) - loss(&minus)) / (2.0 * step)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    #[test]
    fn quadratic_bowl_converges() {
        let center = [0.7, -1.2, 2.5];
        let loss = |t: &[f64]| -t.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let grad = |t: &[f64]| {
            t.iter()
                .zip(&center)
                .map(|(a, b)| -2.0 * (a - b))
                .collect::<Vec<f64>>()
        };
        let config = OptimConfig {
            method: Method::Adam,
            learning_rate: 0.1,
            iterations: 200,
            restarts: 1,
            seed: 3,
            direction: Direction::Maximize,
            gradient: GradientKind::Shift,
            shots: None,
        };
        let trace = run_optimizer(loss, grad, 3, &config).unwrap();
        for (t, c) in trace.best_theta.iter().zip(&center) {
            assert!((t - c).abs() < 1e-3, "converged to {t}, wanted {c}");
        }
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let loss = |t: &[f64]| (t[0].sin() + t[1].cos()).powi(2);
        let grad = |t: &[f64]| grad_finite_diff(loss, t, 1e-6);
        let config = OptimConfig {
            iterations: 30,
            restarts: 2,
            ..OptimConfig::vtde_default().with_seed(99)
        };
        let a = run_optimizer(loss, grad, 2, &config).unwrap();
        let b = run_optimizer(loss, grad, 2, &config).unwrap();
        assert_eq!(a.best_loss.to_bits(), b.best_loss.to_bits());
        for (x, y) in a.best_theta.iter().zip(&b.best_theta) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (ra, rb) in a.restarts.iter().zip(&b.restarts) {
            assert_eq!(ra.losses.len(), rb.losses.len());
            for (x, y) in ra.losses.iter().zip(&rb.losses) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn adam_with_zero_learning_rate_keeps_theta() {
        let seen = RefCell::new(Vec::<Vec<f64>>::new());
        let loss = |t: &[f64]| {
            seen.borrow_mut().push(t.to_vec());
            t[0] * t[0]
        };
        let grad = |t: &[f64]| vec![2.0 * t[0], 2.0 * t[1]];
        let config = OptimConfig {
            learning_rate: 0.0,
            iterations: 5,
            restarts: 1,
            ..OptimConfig::vqsl_default().with_seed(7)
        };
        run_optimizer(loss, grad, 2, &config).unwrap();
        let seen = seen.borrow();
        for t in seen.iter().skip(1) {
            assert_eq!(t, &seen[0]);
        }
    }

    #[test]
    fn trace_best_matches_recorded_iterates() {
        let loss = |t: &[f64]| (1.0 - t[0]).sin();
        let grad = |t: &[f64]| grad_finite_diff(loss, t, 1e-6);
        let config = OptimConfig {
            iterations: 40,
            restarts: 3,
            learning_rate: 0.05,
            ..OptimConfig::vtde_default().with_seed(5)
        };
        let trace = run_optimizer(loss, grad, 1, &config).unwrap();
        let recorded_max = trace
            .restarts
            .iter()
            .flat_map(|r| r.losses.iter())
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((trace.best_loss - recorded_max).abs() < 1e-15);
        assert_eq!(trace.restarts.len(), 3);
        for run in &trace.restarts {
            assert_eq!(run.losses.len(), 40);
        }
    }

    #[test]
    fn non_finite_loss_aborts_restart_but_keeps_others() {
        // gradient ascent on exp doubles up until the loss overflows to +inf;
        // the first iterates stay finite, so each restart records something
        let loss = |t: &[f64]| t[0].exp();
        let grad = |t: &[f64]| vec![t[0].exp()];
        let config = OptimConfig {
            method: Method::Gd,
            learning_rate: 1.0,
            iterations: 30,
            restarts: 2,
            seed: 11,
            direction: Direction::Maximize,
            gradient: GradientKind::Shift,
            shots: None,
        };
        let trace = run_optimizer(loss, grad, 1, &config).unwrap();
        assert!(trace.restarts.iter().all(|r| r.aborted));
        assert!(trace.restarts.iter().all(|r| !r.losses.is_empty()));
        assert!(trace.best_loss.is_finite());
    }

    #[test]
    fn shift_rule_on_ry_expectation() {
        // <Z> after Ry(theta)|0> is cos(theta); the shift rule is exact
        let loss = |t: &[f64]| t[0].cos();
        let d = grad_shift_expectation(loss, &[std::f64::consts::FRAC_PI_2], 0).unwrap();
        assert!((d + 1.0).abs() < 1e-12);

        // constant loss has zero gradient everywhere
        let flat = |_: &[f64]| 0.42;
        assert!(grad_shift_expectation(flat, &[0.3], 0).unwrap().abs() < 1e-15);

        assert!(grad_shift_expectation(loss, &[0.0], 3).is_err());
    }

    #[test]
    fn finite_diff_recovers_linear_coefficients() {
        let coeffs = [1.5, -0.25, 3.0];
        let loss = |t: &[f64]| t.iter().zip(&coeffs).map(|(a, b)| a * b).sum::<f64>();
        let g = grad_finite_diff(loss, &[0.1, 0.2, 0.3], 1e-5);
        for (gi, ci) in g.iter().zip(&coeffs) {
            assert!((gi - ci).abs() < 1e-9);
        }
    }

    #[test]
    fn finite_diff_zero_at_stationary_point() {
        let loss = |t: &[f64]| t[0].cos();
        let g = grad_finite_diff(loss, &[0.0], 1e-5);
        assert!(g[0].abs() < 1e-9);
    }

    #[test]
    fn trace_csv_shape() {
        let trace = OptimTrace {
            restarts: vec![RestartRun {
                losses: vec![0.1, 0.2],
                aborted: false,
            }],
            best_theta: vec![0.0],
            best_loss: 0.2,
            best_restart: 0,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,restart,loss");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,0,0.1"));
    }
}
