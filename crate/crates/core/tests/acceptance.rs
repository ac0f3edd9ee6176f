//! Acceptance suite: every reproduction target and property gate runs here,
//! one test per criterion, each printing a `[PASS]`/`[FAIL]` line with the
//! measured numbers.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use qmetric::algorithms::{
    nvtde_fixed_k, trace_norm_estimate, vfe, vqsl, vqsl_fidelity_ceiling, vtde, PurificationMode,
    VfeConfig, DEFAULT_VTDE_DEPTH, DEFAULT_VQSL_DEPTH,
};
use qmetric::linalg::top_k_eig_sum;
use qmetric::losses::{HermitianDecomposition, NvtdeLoss, TraceNormLoss, VfeLoss, VqslLoss, VtdeLoss};
use qmetric::optim::{grad_finite_diff, grad_shift_all, OptimConfig};
use qmetric::oracles::{count_positive_eigs, exact_fidelity, exact_trace_distance, prop1_optimum};
use qmetric::circuits::AnsatzSpec;
use qmetric::rng::SeededRng;
use qmetric::states::{
    apply_channel, density_from_vector, ghz, plus_state, purify_exact, random_hermitian,
    random_mixed, random_pure, random_unitary, ChannelSpec, DensityMatrix,
};

const ONE_SIDED_TOL: f64 = 1e-9;

fn finish(name: &str, details: &str, ok: bool) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: {details}");
    assert!(ok, "{name}: {details}");
}

fn assert_one_sided(estimate: f64, oracle: f64, label: &str) {
    assert!(
        estimate <= oracle + ONE_SIDED_TOL,
        "{label}: estimate {estimate} exceeds oracle {oracle}"
    );
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn random_theta(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..n).map(|_| rng.uniform_angle()).collect()
}

/// Criterion 1 — Table I: VTDE on |+> vs Deph_0.7(|+>), 10 seeded
/// repetitions with exact expectations; mean within 0.5% of 0.7, sample
/// variance <= 5e-4, under 30 s.
#[test]
fn criterion_1_table_i_vtde_dephased_plus() {
    let started = Instant::now();
    let plus = density_from_vector(&plus_state());
    let sigma = apply_channel(&plus, &ChannelSpec::dephasing(0.7).unwrap());

    let mut estimates = Vec::new();
    for trial in 0..10u64 {
        let opt = OptimConfig::vtde_default().with_seed(42 ^ trial);
        let res = vtde(&plus, &sigma, DEFAULT_VTDE_DEPTH, &opt).unwrap();
        assert_one_sided(res.estimate, res.oracle.unwrap(), "criterion 1 run");
        estimates.push(res.estimate);
    }
    let m = mean(&estimates);
    let var = sample_variance(&estimates);
    let elapsed = started.elapsed().as_secs_f64();
    let ok = (m - 0.7).abs() <= 0.005 * 0.7 && var <= 5e-4 && elapsed <= 30.0;
    finish(
        "criterion 1 (Table I)",
        &format!(
            "mean {m:.6} (target 0.7 within 0.5%), variance {var:.2e} (<= 5e-4), 10 trials in {elapsed:.1} s (<= 30 s)"
        ),
        ok,
    );
}

/// Criterion 2 — Table III: VFE (VQSL purifications, n_R = 1) on
/// Deph_0.2 vs Deph_0.9 of |+>, 10 repetitions; mean within 0.1% of 0.70710,
/// variance <= 1e-4, under 2 min.
#[test]
fn criterion_2_table_iii_vfe_dephased_pair() {
    let started = Instant::now();
    let plus = density_from_vector(&plus_state());
    let rho = apply_channel(&plus, &ChannelSpec::dephasing(0.2).unwrap());
    let sigma = apply_channel(&plus, &ChannelSpec::dephasing(0.9).unwrap());

    let mut estimates = Vec::new();
    for trial in 0..10u64 {
        let cfg = VfeConfig::new(1).with_seed(42 ^ trial);
        let res = vfe(&rho, &sigma, &cfg).unwrap();
        // the guaranteed bound: the overlap stage cannot exceed the fidelity
        // of the learned marginals
        let learned_bound = exact_fidelity(
            &res.purify_rho.as_ref().unwrap().learned_state,
            &res.purify_sigma.as_ref().unwrap().learned_state,
        )
        .unwrap();
        assert_one_sided(res.estimate, learned_bound, "criterion 2 overlap stage");
        estimates.push(res.estimate);
    }
    let m = mean(&estimates);
    let var = sample_variance(&estimates);
    let elapsed = started.elapsed().as_secs_f64();
    let ok = (m - 0.70710).abs() <= 0.001 * 0.70710 && var <= 1e-4 && elapsed <= 120.0;
    finish(
        "criterion 2 (Table III)",
        &format!(
            "mean {m:.6} (target 0.70710 within 0.1%), variance {var:.2e} (<= 1e-4), 10 trials in {elapsed:.1} s (<= 2 min)"
        ),
        ok,
    );
}

/// Criterion 3 — Table II: 10 random full-rank pairs per qubit count
/// n_A in {1,2,3}, VFE with n_R = n_A, depth 6, LR 0.2, ITR 100; mean error
/// rate <= 0.5% per n_A, n_A = 3 under 15 min.
#[test]
fn criterion_3_table_ii_random_full_rank_pairs() {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut elapsed_n3 = 0.0;
    for n_a in 1..=3usize {
        let started = Instant::now();
        let mut rng = SeededRng::new(100 + n_a as u64);
        let mut rel_errors = Vec::new();
        for pair in 0..10u64 {
            let rho = random_mixed(n_a, 1 << n_a, &mut rng).unwrap();
            let sigma = random_mixed(n_a, 1 << n_a, &mut rng).unwrap();
            let cfg = VfeConfig::new(n_a).with_seed(1000 * n_a as u64 + pair);
            let res = vfe(&rho, &sigma, &cfg).unwrap();
            let learned_bound = exact_fidelity(
                &res.purify_rho.as_ref().unwrap().learned_state,
                &res.purify_sigma.as_ref().unwrap().learned_state,
            )
            .unwrap();
            assert_one_sided(res.estimate, learned_bound, "criterion 3 overlap stage");
            rel_errors.push(res.abs_error / res.oracle);
        }
        let m = mean(&rel_errors);
        let elapsed = started.elapsed().as_secs_f64();
        if n_a == 3 {
            elapsed_n3 = elapsed;
        }
        ok &= m <= 0.005;
        lines.push(format!("n_A={n_a}: mean error rate {:.4}% in {elapsed:.1} s", m * 100.0));
    }
    ok &= elapsed_n3 <= 900.0;
    finish(
        "criterion 3 (Table II)",
        &format!("{} (target <= 0.5% each; n_A=3 <= 15 min)", lines.join("; ")),
        ok,
    );
}

/// Criterion 4 — Fig. 2: VTDE on GHZ_4 vs Dep_p for five channel strengths,
/// ITR 120, LR 0.02; final estimate within 1% of 15p/16 for every p, under
/// 5 min.
#[test]
fn criterion_4_fig2_ghz_depolarizing_sweep() {
    let started = Instant::now();
    let rho = density_from_vector(&ghz(4));
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, &p) in [0.1, 0.3, 0.5, 0.7, 0.9].iter().enumerate() {
        let sigma = apply_channel(&rho, &ChannelSpec::depolarizing(p).unwrap());
        let opt = OptimConfig::vtde_default().with_seed(4242 + i as u64);
        let res = vtde(&rho, &sigma, DEFAULT_VTDE_DEPTH, &opt).unwrap();
        let target = 15.0 * p / 16.0;
        assert!((res.oracle.unwrap() - target).abs() < 1e-10);
        assert_one_sided(res.estimate, res.oracle.unwrap(), "criterion 4 run");
        let rel = (res.estimate - target).abs() / target;
        ok &= rel <= 0.01;
        lines.push(format!("p={p}: {:.5} vs {target:.5} ({:.3}%)", res.estimate, rel * 100.0));
    }
    let elapsed = started.elapsed().as_secs_f64();
    ok &= elapsed <= 300.0;
    finish(
        "criterion 4 (Fig. 2)",
        &format!("{}; total {elapsed:.1} s (<= 5 min)", lines.join("; ")),
        ok,
    );
}

/// Criterion 5 — Fig. 4 / purification bound: for random 3-qubit states of
/// ranks {2,4,8} and n_R in {1,2,3}, the learned fidelity never exceeds
/// sqrt(sum of top 2^{n_R} eigenvalues) + 0.01 and attains the ceiling within
/// 0.05 whenever 2^{n_R} >= rank.
#[test]
fn criterion_5_fig4_purification_fidelity_bound() {
    let started = Instant::now();
    let mut rng = SeededRng::new(55);
    let mut checked = 0;
    let mut attained = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut ok = true;
    for &rank in &[2usize, 4, 8] {
        for state_idx in 0..2u64 {
            let rho = random_mixed(3, rank, &mut rng).unwrap();
            for n_r in 1..=3usize {
                let opt = OptimConfig::vqsl_default()
                    .with_seed(5000 + 100 * rank as u64 + 10 * state_idx + n_r as u64);
                let res = vqsl(&rho, n_r, DEFAULT_VQSL_DEPTH, &opt).unwrap();
                let ceiling = vqsl_fidelity_ceiling(&rho, 1 << n_r).unwrap();
                let margin = res.achieved_fidelity - ceiling;
                worst_margin = worst_margin.max(margin);
                ok &= margin <= 0.01;
                checked += 1;
                if (1 << n_r) >= rank {
                    attained += 1;
                    ok &= res.achieved_fidelity >= ceiling - 0.05;
                }
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    finish(
        "criterion 5 (Fig. 4 / purification bound)",
        &format!(
            "{checked} (rank, n_R) runs: ceiling respected (worst margin {worst_margin:.2e} <= 0.01), {attained} rank-fitting runs attained >= ceiling - 0.05; {elapsed:.1} s"
        ),
        ok,
    );
}

/// Criterion 6 — Fig. S2: 30 random 4-qubit pairs stratified by the positive
/// eigenvalue count of (rho - sigma)/2; VTDE stays within 2% relative error
/// on every stratum while nVTDE forced below the positive count loses at
/// least 5% somewhere.
#[test]
fn criterion_6_figs2_positive_eigenvalue_strata() {
    let started = Instant::now();
    let mut rng = SeededRng::new(66);
    let mut pairs = Vec::new();
    for &rank in &[1usize, 2, 4, 8, 16] {
        for _ in 0..6 {
            let rho = random_mixed(4, rank, &mut rng).unwrap();
            let sigma = random_mixed(4, 16, &mut rng).unwrap();
            let half_diff = rho.mat().sub(sigma.mat()).scale_re(0.5);
            let positives = count_positive_eigs(&half_diff, 1e-10).unwrap();
            pairs.push((rho, sigma, positives));
        }
    }
    assert_eq!(pairs.len(), 30);

    // strata over the observed positive counts
    use std::collections::BTreeMap;
    let mut vtde_strata: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut under_strata: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (i, (rho, sigma, positives)) in pairs.iter().enumerate() {
        let opt = OptimConfig::vtde_default().with_seed(6000 + i as u64);
        let res = vtde(rho, sigma, DEFAULT_VTDE_DEPTH, &opt).unwrap();
        let oracle = res.oracle.unwrap();
        assert_one_sided(res.estimate, oracle, "criterion 6 vtde run");
        vtde_strata
            .entry(*positives)
            .or_default()
            .push(res.abs_error.unwrap() / oracle);

        if *positives >= 2 {
            // force the projector rank below the positive count
            let nv = nvtde_fixed_k(rho, sigma, 1, DEFAULT_VTDE_DEPTH, &opt).unwrap();
            assert_one_sided(nv.estimate, oracle, "criterion 6 nvtde run");
            under_strata
                .entry(*positives)
                .or_default()
                .push((oracle - nv.estimate) / oracle);
        }
    }

    let mut ok = true;
    let mut vtde_lines = Vec::new();
    for (count, errs) in &vtde_strata {
        let m = mean(errs);
        ok &= m <= 0.02;
        vtde_lines.push(format!("k+={count}: {:.3}% ({} pairs)", m * 100.0, errs.len()));
    }
    let max_under = under_strata
        .values()
        .map(|v| mean(v))
        .fold(f64::NEG_INFINITY, f64::max);
    ok &= max_under >= 0.05;
    let elapsed = started.elapsed().as_secs_f64();
    finish(
        "criterion 6 (Fig. S2)",
        &format!(
            "VTDE mean rel err per stratum: {} (all <= 2%); worst under-ranked nVTDE shortfall {:.1}% (>= 5%); {elapsed:.1} s",
            vtde_lines.join(", "),
            max_under * 100.0
        ),
        ok,
    );
}

fn grads_agree(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= f64::max(1e-8, 1e-6 * f64::max(x.abs(), y.abs())))
}

/// Criterion 7 — gradient suite: parameter-shift gradients match central
/// finite differences within 1e-6 relative (floor 1e-8) on 50 random
/// instances for each loss family.
#[test]
fn criterion_7_parameter_shift_vs_finite_differences() {
    let started = Instant::now();
    let mut rng = SeededRng::new(77);
    let mut ok = true;
    const STEP: f64 = 1e-5;

    // L1 (VTDE)
    for i in 0..50 {
        let n = 1 + i % 2;
        let rho = random_mixed(n, 1 + (i % (1 << n)), &mut rng).unwrap();
        let sigma = random_mixed(n, 1 << n, &mut rng).unwrap();
        let loss = VtdeLoss::new(
            AnsatzSpec::hardware_efficient(n + 1, 1 + i % 2),
            &rho,
            &sigma,
        )
        .unwrap();
        let theta = random_theta(loss.n_params(), &mut rng);
        let shift = loss.gradient(&theta);
        let fd = grad_finite_diff(|t| loss.eval(t), &theta, STEP);
        ok &= grads_agree(&shift, &fd);
        // the cached sweep equals the literal two-evaluation shift rule
        let naive = grad_shift_all(|t| loss.eval(t), &theta);
        ok &= shift
            .iter()
            .zip(&naive)
            .all(|(a, b)| (a - b).abs() < 1e-11);
    }

    // L2 (VFE, |.|^2 form)
    for i in 0..50 {
        let n_r = 1 + i % 2;
        let n_a = 1 + i % 2;
        let psi = random_pure(n_a + n_r, &mut rng);
        let phi = random_pure(n_a + n_r, &mut rng);
        let loss = VfeLoss::new(AnsatzSpec::hardware_efficient(n_r, 2), psi, phi).unwrap();
        let theta = random_theta(loss.n_params(), &mut rng);
        let shift = loss.gradient_sq(&theta);
        let fd = grad_finite_diff(|t| loss.eval_sq(t), &theta, STEP);
        ok &= grads_agree(&shift, &fd);
    }

    // L3 (VQSL)
    for i in 0..50 {
        let n_a = 1 + i % 2;
        let rho = random_mixed(n_a, 1 << n_a, &mut rng).unwrap();
        let loss = VqslLoss::new(AnsatzSpec::purification_u3(n_a + 1, 1 + i % 2), rho).unwrap();
        let theta = random_theta(loss.n_params(), &mut rng);
        let shift = loss.gradient(&theta);
        let fd = grad_finite_diff(|t| loss.eval(t), &theta, STEP);
        ok &= grads_agree(&shift, &fd);
    }

    // L4 (nVTDE)
    for i in 0..50 {
        let rho = random_mixed(2, 1 + i % 4, &mut rng).unwrap();
        let sigma = random_mixed(2, 4, &mut rng).unwrap();
        let loss = NvtdeLoss::new(
            AnsatzSpec::hardware_efficient(2, 1 + i % 2),
            &rho,
            &sigma,
            1 + i % 3,
        )
        .unwrap();
        let theta = random_theta(loss.n_params(), &mut rng);
        let shift = loss.gradient(&theta);
        let fd = grad_finite_diff(|t| loss.eval(t), &theta, STEP);
        ok &= grads_agree(&shift, &fd);
    }

    // Corollary-3 objective
    for i in 0..50 {
        let n = 1 + i % 2;
        let terms: Vec<(f64, DensityMatrix)> = (0..2 + i % 2)
            .map(|_| {
                (
                    4.0 * rng.uniform() - 2.0,
                    random_mixed(n, 1 << n, &mut rng).unwrap(),
                )
            })
            .collect();
        let decomp = HermitianDecomposition::new(terms).unwrap();
        let loss = TraceNormLoss::new(AnsatzSpec::hardware_efficient(n + 1, 1 + i % 2), &decomp)
            .unwrap();
        let theta = random_theta(loss.n_params(), &mut rng);
        let shift = loss.gradient(&theta);
        let fd = grad_finite_diff(|t| loss.eval(t), &theta, STEP);
        ok &= grads_agree(&shift, &fd);
    }

    let elapsed = started.elapsed().as_secs_f64();
    finish(
        "criterion 7 (gradients)",
        &format!("5 loss families x 50 instances: shift rule vs central differences within 1e-6 rel / 1e-8 floor; {elapsed:.1} s"),
        ok,
    );
}

/// Criterion 8 — oracle and property suite: the partial-spectrum witness,
/// the majorization inequality, the positive-eigenvalue lemma,
/// Fuchs-van de Graaf, and fresh one-sidedness checks.
#[test]
fn criterion_8_oracle_property_suite() {
    let started = Instant::now();
    let mut rng = SeededRng::new(88);
    let mut ok = true;

    // Proposition-1 witness equality (1e-10) on 100 random Hermitians;
    // prop1_optimum errors out internally if the witness misses
    for i in 0..100 {
        let (d_a, d_b) = [(2, 2), (2, 4), (4, 2), (2, 8)][i % 4];
        let h = random_hermitian(d_a * d_b, &mut rng);
        ok &= prop1_optimum(&h, d_a, d_b).is_ok();
    }

    // majorization: a conjugated diagonal block never exceeds the top-k sum
    for i in 0..1000 {
        let dim = if i % 2 == 0 { 4 } else { 8 };
        let d_b = dim / 2;
        let h = random_hermitian(dim, &mut rng);
        let u = random_unitary(dim, &mut rng);
        let conj = u.matmul(&h).matmul(&u.adjoint());
        let block: f64 = (0..d_b).map(|j| conj.get(j, j).re).sum();
        ok &= block <= top_k_eig_sum(&h, d_b).unwrap() + 1e-9;
    }

    // Appendix-B lemma: rho pure implies at most one positive eigenvalue
    for i in 0..500 {
        let n = 1 + i % 3;
        let rho = density_from_vector(&random_pure(n, &mut rng));
        let rank = 1 + (rng.uniform() * (1 << n) as f64) as usize;
        let sigma = random_mixed(n, rank.min(1 << n), &mut rng).unwrap();
        let diff = rho.mat().sub(sigma.mat());
        ok &= count_positive_eigs(&diff, 1e-10).unwrap() <= 1;
    }

    // Fuchs-van de Graaf on 200 pure-vs-mixed pairs
    for _ in 0..200 {
        let rho = density_from_vector(&random_pure(2, &mut rng));
        let rank = 1 + (rng.uniform() * 4.0) as usize;
        let sigma = random_mixed(2, rank.min(4), &mut rng).unwrap();
        let d = exact_trace_distance(&rho, &sigma).unwrap();
        let f = exact_fidelity(&rho, &sigma).unwrap();
        ok &= 1.0 - f <= d + 1e-9;
        ok &= d <= (1.0 - f * f).sqrt() + 1e-9;
    }

    // fresh one-sidedness spot checks (the main enforcement is inline in
    // criteria 1-6, which assert on every optimization run they perform)
    {
        let rho = random_mixed(1, 2, &mut rng).unwrap();
        let sigma = random_mixed(1, 2, &mut rng).unwrap();
        let opt = OptimConfig::vtde_default().with_seed(888);
        let res = vtde(&rho, &sigma, 3, &opt).unwrap();
        ok &= res.estimate <= res.oracle.unwrap() + ONE_SIDED_TOL;

        let decomp =
            HermitianDecomposition::new(vec![(1.3, rho.clone()), (-0.8, sigma.clone())]).unwrap();
        let tn = trace_norm_estimate(&decomp, 3, &opt).unwrap();
        ok &= tn.estimate <= tn.oracle.unwrap() + ONE_SIDED_TOL;

        let rho2 = random_mixed(2, 3, &mut rng).unwrap();
        let sigma2 = random_mixed(2, 4, &mut rng).unwrap();
        let nv = nvtde_fixed_k(&rho2, &sigma2, 2, 3, &opt).unwrap();
        ok &= nv.estimate <= nv.oracle.unwrap() + ONE_SIDED_TOL;

        let cfg = VfeConfig::new(1)
            .with_mode(PurificationMode::Exact)
            .with_seed(777);
        let fid = vfe(&rho, &sigma, &cfg).unwrap();
        ok &= fid.estimate <= fid.oracle + ONE_SIDED_TOL;

        // exact purification feeds the guaranteed Uhlmann bound
        let psi = purify_exact(&rho, 1).unwrap();
        let phi = purify_exact(&sigma, 1).unwrap();
        drop((psi, phi));
    }

    let elapsed = started.elapsed().as_secs_f64();
    finish(
        "criterion 8 (oracle/property suite)",
        &format!("witness x100, majorization x1000, positive-eigenvalue lemma x500, Fuchs-van de Graaf x200, one-sidedness spot checks; {elapsed:.1} s"),
        ok,
    );
}

/// Companion check promised by the optimizer contract: the preset-scale VTDE
/// run reaches at least 99% of the closed-form target within 120 iterations.
#[test]
fn vtde_ghz_preset_reaches_target_within_budget() {
    let rho = density_from_vector(&ghz(4));
    let sigma = apply_channel(&rho, &ChannelSpec::depolarizing(0.5).unwrap());
    let opt = OptimConfig::vtde_default().with_seed(2024);
    let res = vtde(&rho, &sigma, DEFAULT_VTDE_DEPTH, &opt).unwrap();
    let target = 15.0 * 0.5 / 16.0;
    assert!(
        res.estimate >= 0.99 * target,
        "estimate {} below 0.99 x {target}",
        res.estimate
    );
    assert!(res.estimate <= target + 1e-9);
}
