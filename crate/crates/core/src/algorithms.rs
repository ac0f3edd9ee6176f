//! The end-to-end estimators: variational trace distance (single-ancilla),
//! general trace-norm estimation (one- and two-sided), variational fidelity
//! with its purification subroutine, and the ancilla-free naive baseline.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::circuits::AnsatzSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::losses::{
    HermitianDecomposition, NvtdeLoss, TraceNormLoss, TwoSidedBranchLoss, VfeLoss, VqslLoss,
    VtdeLoss,
};
use crate::optim::{
    grad_finite_diff, grad_shift_all, run_optimizer, Direction, GradientKind, OptimConfig,
    OptimTrace,
};
use crate::oracles::{exact_fidelity, exact_trace_distance};
use crate::rng::SeededRng;
use crate::states::{purify_exact, DensityMatrix, StateVector};

/// Ansatz depth found accurate and stable for trace-distance estimation.
pub const DEFAULT_VTDE_DEPTH: usize = 4;
/// Purification-ansatz depth used by the fidelity experiments.
pub const DEFAULT_VQSL_DEPTH: usize = 6;
/// Ancilla-unitary depth for the fidelity stage.
pub const DEFAULT_VFE_DEPTH: usize = 6;
/// nVTDE stops once the k-optimum stops increasing by more than this.
pub const NVTDE_EARLY_STOP_EPS: f64 = 1e-4;
/// Finite-difference step used when the config selects that gradient.
pub const FINITE_DIFF_STEP: f64 = 1e-5;

const SHOT_LOSS_STREAM: u64 = 0x8000_0000_0000_0001;
const SHOT_GRAD_STREAM: u64 = 0x8000_0000_0000_0002;

/// One estimator run: the estimate, its brute-force oracle, errors, and the
/// optimization record.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateResult {
    pub estimate: f64,
    pub oracle: Option<f64>,
    pub abs_error: Option<f64>,
    pub rel_error: Option<f64>,
    /// Negative optimum clamped to zero (flags a bad set of restarts).
    pub clamped_negative: bool,
    pub config: OptimConfig,
    #[serde(skip)]
    pub trace: OptimTrace,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl EstimateResult {
    fn build(
        estimate: f64,
        oracle: Option<f64>,
        clamped_negative: bool,
        config: OptimConfig,
        trace: OptimTrace,
        started: Instant,
    ) -> Self {
        let abs_error = oracle.map(|o| (estimate - o).abs());
        let rel_error = oracle.and_then(|o| {
            if o.abs() > 1e-15 {
                Some((estimate - o).abs() / o.abs())
            } else {
                None
            }
        });
        Self {
            estimate,
            oracle,
            abs_error,
            rel_error,
            clamped_negative,
            config,
            trace,
            wall_time_s: started.elapsed().as_secs_f64(),
        }
    }
}

/// Stage-seed derivation (splitmix64 round), keeping independent sub-runs off
/// each other's streams without colliding with `seed ^ trial` derivations.
pub fn derive_stage_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Glue between the loss structs and the optimizer driver.
trait OptimizableLoss {
    fn n_params(&self) -> usize;
    fn eval(&self, theta: &[f64]) -> f64;
    fn eval_sampled(&self, theta: &[f64], shots: u64, rng: &mut SeededRng) -> f64;
    fn gradient(&self, theta: &[f64]) -> Vec<f64>;
}

macro_rules! impl_optimizable {
    ($ty:ty) => {
        impl OptimizableLoss for $ty {
            fn n_params(&self) -> usize {
                self.n_params()
            }
            fn eval(&self, theta: &[f64]) -> f64 {
                self.eval(theta)
            }
            fn eval_sampled(&self, theta: &[f64], shots: u64, rng: &mut SeededRng) -> f64 {
                self.eval_sampled(theta, shots, rng)
            }
            fn gradient(&self, theta: &[f64]) -> Vec<f64> {
                self.gradient(theta)
            }
        }
    };
}

impl_optimizable!(VtdeLoss);
impl_optimizable!(TraceNormLoss);
impl_optimizable!(NvtdeLoss);
impl_optimizable!(VqslLoss);
impl_optimizable!(VfeLoss);

impl OptimizableLoss for TwoSidedBranchLoss {
    fn n_params(&self) -> usize {
        self.n_params()
    }
    fn eval(&self, theta: &[f64]) -> f64 {
        self.eval(theta)
    }
    fn eval_sampled(&self, theta: &[f64], _shots: u64, _rng: &mut SeededRng) -> f64 {
        // ±H is not a state; the Theorem-2 route is exact-simulation only
        self.eval(theta)
    }
    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.gradient(theta)
    }
}

fn optimize_loss<L: OptimizableLoss>(loss: &L, config: &OptimConfig) -> Result<OptimTrace> {
    let n = loss.n_params();
    match config.shots {
        None => match config.gradient {
            GradientKind::Shift => {
                run_optimizer(|t| loss.eval(t), |t| loss.gradient(t), n, config)
            }
            GradientKind::FiniteDiff => run_optimizer(
                |t| loss.eval(t),
                |t| grad_finite_diff(|x| loss.eval(x), t, FINITE_DIFF_STEP),
                n,
                config,
            ),
        },
        Some(shots) => {
            let mut loss_rng = SeededRng::with_stream(config.seed, SHOT_LOSS_STREAM);
            let mut grad_rng = SeededRng::with_stream(config.seed, SHOT_GRAD_STREAM);
            match config.gradient {
                GradientKind::Shift => run_optimizer(
                    |t| loss.eval_sampled(t, shots, &mut loss_rng),
                    |t| grad_shift_all(|x| loss.eval_sampled(x, shots, &mut grad_rng), t),
                    n,
                    config,
                ),
                GradientKind::FiniteDiff => run_optimizer(
                    |t| loss.eval_sampled(t, shots, &mut loss_rng),
                    |t| {
                        grad_finite_diff(
                            |x| loss.eval_sampled(x, shots, &mut grad_rng),
                            t,
                            FINITE_DIFF_STEP,
                        )
                    },
                    n,
                    config,
                ),
            }
        }
    }
}

/// Variational trace distance estimation: maximizes L1 over a
/// hardware-efficient ansatz on n+1 qubits (one ancilla).
pub fn vtde(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ansatz_depth: usize,
    opt: &OptimConfig,
) -> Result<EstimateResult> {
    let started = Instant::now();
    let config = OptimConfig {
        direction: Direction::Maximize,
        ..*opt
    };
    let ansatz = AnsatzSpec::hardware_efficient(rho.n_qubits() + 1, ansatz_depth);
    let loss = VtdeLoss::new(ansatz, rho, sigma)?;
    let trace = optimize_loss(&loss, &config)?;
    let oracle = exact_trace_distance(rho, sigma)?;
    let clamped = trace.best_loss < 0.0;
    let estimate = trace.best_loss.max(0.0);
    Ok(EstimateResult::build(
        estimate,
        Some(oracle),
        clamped,
        config,
        trace,
        started,
    ))
}

/// Corollary-3 trace-norm estimation: one maximization over the decomposition
/// objective, post-processed with the coefficient sum.
pub fn trace_norm_estimate(
    decomp: &HermitianDecomposition,
    ansatz_depth: usize,
    opt: &OptimConfig,
) -> Result<EstimateResult> {
    let started = Instant::now();
    let config = OptimConfig {
        direction: Direction::Maximize,
        ..*opt
    };
    let ansatz = AnsatzSpec::hardware_efficient(decomp.n_qubits() + 1, ansatz_depth);
    let loss = TraceNormLoss::new(ansatz, decomp)?;
    let trace = optimize_loss(&loss, &config)?;
    let oracle = linalg::trace_norm(&decomp.reconstruct())?;
    let estimate = trace.best_loss;
    Ok(EstimateResult::build(
        estimate,
        Some(oracle),
        false,
        config,
        trace,
        started,
    ))
}

/// Theorem-2 trace norm: two independent maximizations with ±H inputs.
#[derive(Debug, Clone, Serialize)]
pub struct TwoSidedResult {
    pub estimate: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub plus_optimum: f64,
    pub minus_optimum: f64,
    pub config: OptimConfig,
    #[serde(skip)]
    pub plus_trace: OptimTrace,
    #[serde(skip)]
    pub minus_trace: OptimTrace,
    #[serde(skip)]
    pub wall_time_s: f64,
}

pub fn trace_norm_two_sided(
    h: &ComplexMatrix,
    ansatz_depth: usize,
    opt: &OptimConfig,
) -> Result<TwoSidedResult> {
    let started = Instant::now();
    if !h.is_square() || !h.rows.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "operator must be square with power-of-two dimension, got {}x{}",
            h.rows, h.cols
        )));
    }
    let n = h.rows.trailing_zeros() as usize;
    let ansatz = AnsatzSpec::hardware_efficient(n + 1, ansatz_depth);
    let branch = |sign: f64, tag: u64| -> Result<OptimTrace> {
        let config = OptimConfig {
            direction: Direction::Maximize,
            seed: derive_stage_seed(opt.seed, tag),
            ..*opt
        };
        let loss = TwoSidedBranchLoss::new(ansatz, h, sign)?;
        optimize_loss(&loss, &config)
    };
    let plus_trace = branch(1.0, 1)?;
    let minus_trace = branch(-1.0, 2)?;
    let estimate = plus_trace.best_loss + minus_trace.best_loss;
    let oracle = linalg::trace_norm(h)?;
    Ok(TwoSidedResult {
        estimate,
        oracle,
        abs_error: (estimate - oracle).abs(),
        plus_optimum: plus_trace.best_loss,
        minus_optimum: minus_trace.best_loss,
        config: *opt,
        plus_trace,
        minus_trace,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Output of the purification subroutine.
#[derive(Debug, Clone)]
pub struct VqslResult {
    /// U(theta*) |0...0> on the joint register.
    pub purification: StateVector,
    /// chi_A = tr_R of the purification.
    pub learned_state: DensityMatrix,
    /// F(rho, chi_A) against the brute-force oracle.
    pub achieved_fidelity: f64,
    pub best_loss: f64,
    pub trace: OptimTrace,
    pub wall_time_s: f64,
}

/// Variational quantum state learning: minimizes L3 with the purification
/// ansatz on n_A + n_R qubits and returns the learned purification.
pub fn vqsl(
    rho: &DensityMatrix,
    n_ancilla: usize,
    ansatz_depth: usize,
    opt: &OptimConfig,
) -> Result<VqslResult> {
    let started = Instant::now();
    if n_ancilla == 0 {
        return Err(Error::InvalidArgument(
            "purification learning needs at least one ancilla qubit".into(),
        ));
    }
    let config = OptimConfig {
        direction: Direction::Minimize,
        ..*opt
    };
    let ansatz = AnsatzSpec::purification_u3(rho.n_qubits() + n_ancilla, ansatz_depth);
    let loss = VqslLoss::new(ansatz, rho.clone())?;
    let trace = optimize_loss(&loss, &config)?;
    let purification = loss.register_state(&trace.best_theta);
    let chi = loss.chi(&trace.best_theta);
    let learned_state = DensityMatrix::new(rho.n_qubits(), chi)?;
    let achieved_fidelity = exact_fidelity(rho, &learned_state)?;
    Ok(VqslResult {
        purification,
        learned_state,
        achieved_fidelity,
        best_loss: trace.best_loss,
        trace,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Fidelity ceiling of purification learning with `ancilla_levels` = d_R:
/// 1 when rank(rho) <= d_R, else sqrt(sum of the top d_R eigenvalues).
pub fn vqsl_fidelity_ceiling(rho: &DensityMatrix, ancilla_levels: usize) -> Result<f64> {
    if ancilla_levels == 0 {
        return Err(Error::InvalidArgument("d_R must be positive".into()));
    }
    let eig = linalg::herm_eig(rho.mat())?;
    let rank = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > crate::states::RANK_TOL)
        .count();
    if rank <= ancilla_levels {
        return Ok(1.0);
    }
    let eta: f64 = eig.eigenvalues[..ancilla_levels]
        .iter()
        .map(|&l| l.max(0.0))
        .sum();
    Ok(eta.sqrt())
}

/// Where VFE gets its purifications from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurificationMode {
    /// Algorithm as written: learn both purifications variationally.
    Vqsl,
    /// Spectral purification, isolating fidelity-stage error.
    Exact,
}

/// Configuration of a VFE run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VfeConfig {
    pub n_ancilla: usize,
    pub mode: PurificationMode,
    pub purify_depth: usize,
    pub fidelity_depth: usize,
    pub opt_purify: OptimConfig,
    pub opt_fidelity: OptimConfig,
}

impl VfeConfig {
    pub fn new(n_ancilla: usize) -> Self {
        Self {
            n_ancilla,
            mode: PurificationMode::Vqsl,
            purify_depth: DEFAULT_VQSL_DEPTH,
            fidelity_depth: DEFAULT_VFE_DEPTH,
            opt_purify: OptimConfig::vqsl_default(),
            opt_fidelity: OptimConfig::vfe_default(),
        }
    }

    pub fn with_mode(mut self, mode: PurificationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.opt_purify.seed = seed;
        self.opt_fidelity.seed = seed;
        self
    }

    pub fn with_shots(mut self, shots: Option<u64>) -> Self {
        self.opt_purify.shots = shots;
        self.opt_fidelity.shots = shots;
        self
    }
}

/// Output of a VFE run.
#[derive(Debug, Clone)]
pub struct VfeResult {
    pub estimate: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub fidelity_trace: OptimTrace,
    /// Present in VQSL mode.
    pub purify_rho: Option<VqslResult>,
    pub purify_sigma: Option<VqslResult>,
    pub mode: PurificationMode,
    pub wall_time_s: f64,
}

/// Variational fidelity estimation: purify both states (learned or exact),
/// then maximize the purification overlap over a unitary on the ancilla.
pub fn vfe(rho: &DensityMatrix, sigma: &DensityMatrix, cfg: &VfeConfig) -> Result<VfeResult> {
    let started = Instant::now();
    if rho.n_qubits() != sigma.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "states act on {} and {} qubits",
            rho.n_qubits(),
            sigma.n_qubits()
        )));
    }
    if cfg.n_ancilla == 0 {
        return Err(Error::InvalidArgument(
            "VFE needs at least one ancilla qubit".into(),
        ));
    }

    let mut purify_rho = None;
    let mut purify_sigma = None;
    let (psi, phi) = match cfg.mode {
        PurificationMode::Exact => (
            purify_exact(rho, cfg.n_ancilla)?,
            purify_exact(sigma, cfg.n_ancilla)?,
        ),
        PurificationMode::Vqsl => {
            let opt_rho = OptimConfig {
                seed: derive_stage_seed(cfg.opt_purify.seed, 1),
                ..cfg.opt_purify
            };
            let opt_sigma = OptimConfig {
                seed: derive_stage_seed(cfg.opt_purify.seed, 2),
                ..cfg.opt_purify
            };
            let res_rho = vqsl(rho, cfg.n_ancilla, cfg.purify_depth, &opt_rho)?;
            let res_sigma = vqsl(sigma, cfg.n_ancilla, cfg.purify_depth, &opt_sigma)?;
            let pair = (res_rho.purification.clone(), res_sigma.purification.clone());
            purify_rho = Some(res_rho);
            purify_sigma = Some(res_sigma);
            pair
        }
    };

    let fid_config = OptimConfig {
        direction: Direction::Maximize,
        seed: derive_stage_seed(cfg.opt_fidelity.seed, 3),
        ..cfg.opt_fidelity
    };
    let ansatz_r = AnsatzSpec::hardware_efficient(cfg.n_ancilla, cfg.fidelity_depth);
    let loss = VfeLoss::new(ansatz_r, psi, phi)?;
    let fidelity_trace = optimize_loss(&loss, &fid_config)?;

    let estimate = fidelity_trace.best_loss;
    let oracle = exact_fidelity(rho, sigma)?;
    Ok(VfeResult {
        estimate,
        oracle,
        abs_error: (estimate - oracle).abs(),
        rel_error: (estimate - oracle).abs() / oracle.max(1e-15),
        fidelity_trace,
        purify_rho,
        purify_sigma,
        mode: cfg.mode,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// One k-round of the naive estimator.
#[derive(Debug, Clone, Serialize)]
pub struct KRecord {
    pub k: usize,
    pub optimum: f64,
    #[serde(skip)]
    pub trace: OptimTrace,
}

/// Output of the naive (ancilla-free) trace-distance estimator.
#[derive(Debug, Clone)]
pub struct NvtdeResult {
    pub result: EstimateResult,
    pub per_k: Vec<KRecord>,
    pub best_k: usize,
}

/// Naive VTDE: sweeps rank-k projectors, maximizing L4^k for k = 1, 2, ...
/// and stopping once the optimum no longer improves by more than
/// [`NVTDE_EARLY_STOP_EPS`].
pub fn nvtde(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ansatz_depth: usize,
    opt: &OptimConfig,
) -> Result<NvtdeResult> {
    let started = Instant::now();
    let config = OptimConfig {
        direction: Direction::Maximize,
        ..*opt
    };
    let ansatz = AnsatzSpec::hardware_efficient(rho.n_qubits(), ansatz_depth);
    let mut per_k = Vec::new();
    let mut best = 0.0f64;
    let mut best_k = 1;
    for k in 1..rho.dim() {
        let loss = NvtdeLoss::new(ansatz, rho, sigma, k)?;
        let trace = optimize_loss(&loss, &config)?;
        let optimum = trace.best_loss;
        per_k.push(KRecord { k, optimum, trace });
        if optimum > best + NVTDE_EARLY_STOP_EPS {
            best = optimum;
            best_k = k;
        } else {
            break;
        }
    }
    let oracle = exact_trace_distance(rho, sigma)?;
    let clamped = best < 0.0;
    // stitch the best k-round's trace into the result
    let best_trace = per_k
        .iter()
        .find(|r| r.k == best_k)
        .map(|r| r.trace.clone())
        .expect("at least one k-round ran");
    let result = EstimateResult::build(
        best.max(0.0),
        Some(oracle),
        clamped,
        config,
        best_trace,
        started,
    );
    Ok(NvtdeResult {
        result,
        per_k,
        best_k,
    })
}

/// nVTDE with the projector rank pinned, for studying under-ranked stops.
pub fn nvtde_fixed_k(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    k: usize,
    ansatz_depth: usize,
    opt: &OptimConfig,
) -> Result<EstimateResult> {
    let started = Instant::now();
    let config = OptimConfig {
        direction: Direction::Maximize,
        ..*opt
    };
    let ansatz = AnsatzSpec::hardware_efficient(rho.n_qubits(), ansatz_depth);
    let loss = NvtdeLoss::new(ansatz, rho, sigma, k)?;
    let trace = optimize_loss(&loss, &config)?;
    let oracle = exact_trace_distance(rho, sigma)?;
    let clamped = trace.best_loss < 0.0;
    let estimate = trace.best_loss.max(0.0);
    Ok(EstimateResult::build(
        estimate,
        Some(oracle),
        clamped,
        config,
        trace,
        started,
    ))
}
