use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use varcontrib_core::distributions::{CopulaSpec, DirichletSpec, MarginalSpec, MvtSpec};
use varcontrib_core::estimators::{
    gr_allocation, mc_allocation, nw_allocation, select_delta, var_order_stat, EstimateMeta, SampleBatch,
};
use varcontrib_core::linalg::SpdMatrix;
use varcontrib_core::mcmc::{
    acceptance_rate, acf, batch_means, mcmc_allocation, mh_step, run_chain, run_mh, ChainState, ProposalSpec,
};
use varcontrib_core::risk_models::{pearson_vii_params, RiskModel};

fn corr() -> SpdMatrix {
    SpdMatrix::from_rows(&[vec![1.0, -0.5, 0.3], vec![-0.5, 1.0, 0.5], vec![0.3, 0.5, 1.0]]).unwrap()
}

fn model1() -> RiskModel {
    RiskModel::copula_joint(
        vec![MarginalSpec::pareto(4.0, 3.0).unwrap(); 3],
        CopulaSpec::rotated_clayton(0.5, 3).unwrap(),
    )
    .unwrap()
}

fn model3() -> RiskModel {
    RiskModel::copula_joint(
        vec![MarginalSpec::student_t(4.0, 0.0, 1.0).unwrap(); 3],
        CopulaSpec::rotated_clayton(0.5, 3).unwrap(),
    )
    .unwrap()
}

fn mvt4() -> MvtSpec {
    MvtSpec::new(4.0, vec![0.0; 3], corr()).unwrap()
}

fn rw(var: f64) -> ProposalSpec {
    ProposalSpec::random_walk(SpdMatrix::from_rows(&[vec![var, 0.0], vec![0.0, var]]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sklar_composition_matches_mvt(
        nu in 2.5f64..12.0,
        x in prop::collection::vec(-8.0f64..8.0, 3),
    ) {
        let mvt = MvtSpec::new(nu, vec![0.0; 3], corr()).unwrap();
        let sklar = RiskModel::copula_joint(
            vec![MarginalSpec::student_t(nu, 0.0, 1.0).unwrap(); 3],
            CopulaSpec::t(nu, corr()).unwrap(),
        ).unwrap();
        let a = sklar.joint_logdensity(&x).unwrap();
        let b = mvt.ln_density(&x).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn exchangeable_target_is_permutation_symmetric(
        a in 0.01f64..0.98, b in 0.01f64..0.98, v in 1.0f64..60.0,
    ) {
        prop_assume!(a + b < 0.99);
        let (x1, x2) = (a * v, b * v);
        let x3 = v - x1 - x2;
        for m in [model1(), model3()] {
            let base = m.conditional_target_logdensity(&[x1, x2], v);
            for perm in [[x2, x1], [x1, x3], [x3, x1], [x2, x3], [x3, x2]] {
                let other = m.conditional_target_logdensity(&perm, v);
                prop_assert!((base - other).abs() <= 1e-9 * (1.0 + base.abs()));
            }
        }
    }

    #[test]
    fn pearson_vii_matches_conditional_target(
        v in -20.0f64..30.0,
        dx in prop::collection::vec(-10.0f64..10.0, 2),
        dy in prop::collection::vec(-10.0f64..10.0, 2),
    ) {
        let mvt = mvt4();
        let model = RiskModel::elliptical(mvt.clone()).unwrap();
        let pv = pearson_vii_params(&mvt, v).unwrap();
        let x: Vec<f64> = pv.location().iter().zip(&dx).map(|(w, d)| w + d).collect();
        let y: Vec<f64> = pv.location().iter().zip(&dy).map(|(w, d)| w + d).collect();
        let gap_x = model.conditional_target_logdensity(&x, v) - pv.ln_density(&x).unwrap();
        let gap_y = model.conditional_target_logdensity(&y, v) - pv.ln_density(&y).unwrap();
        prop_assert!((gap_x - gap_y).abs() < 1e-9);
    }

    #[test]
    fn var_is_translation_equivariant(
        s in prop::collection::vec(-1e3f64..1e3, 1..200),
        p in 0.01f64..0.99,
        c in -1e3f64..1e3,
    ) {
        let shifted: Vec<f64> = s.iter().map(|x| x + c).collect();
        let base = var_order_stat(&s, p).unwrap();
        prop_assert_eq!(var_order_stat(&shifted, p).unwrap(), base + c);
    }

    #[test]
    fn mc_window_holds_exactly_target_m_rows(seed in 0u64..1_000, target_m in 1usize..200) {
        let batch = model1().sample_portfolio(2_000, &mut ChaCha8Rng::seed_from_u64(seed));
        let v = var_order_stat(batch.sums(), 0.99).unwrap();
        let delta = select_delta(batch.sums(), v, target_m).unwrap();
        let est = mc_allocation(&batch, v, delta).unwrap();
        let EstimateMeta::Mc { m, .. } = est.meta else { unreachable!() };
        prop_assert_eq!(m, target_m);
        for i in batch.window(v, delta) {
            prop_assert!((batch.sums()[i] - v).abs() <= delta);
        }
    }

    #[test]
    fn nw_is_invariant_to_uniform_reweighting(seed in 0u64..1_000, h in 0.5f64..10.0) {
        let batch = model1().sample_portfolio(500, &mut ChaCha8Rng::seed_from_u64(seed));
        let doubled = SampleBatch::new(3, [batch.values(), batch.values()].concat()).unwrap();
        let v = var_order_stat(batch.sums(), 0.95).unwrap();
        let a = nw_allocation(&batch, v, Some(h)).unwrap();
        let b = nw_allocation(&doubled, v, Some(h)).unwrap();
        for (x, y) in a.ac.iter().zip(&b.ac) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn gr_allocates_the_full_level(seed in 0u64..1_000, v in -50.0f64..80.0) {
        let m = RiskModel::elliptical(mvt4()).unwrap();
        let batch = m.sample_portfolio(300, &mut ChaCha8Rng::seed_from_u64(seed));
        let est = gr_allocation(&batch, v).unwrap();
        prop_assert!((est.ac.iter().sum::<f64>() - v).abs() < 1e-8);
        prop_assert!(est.stderr.unwrap().iter().all(|s| *s >= 0.0));
    }

    #[test]
    fn batch_means_interval_brackets_estimate(
        xs in prop::collection::vec(-5.0f64..5.0, 8..400),
    ) {
        let r = batch_means(&xs, 1, None, None).unwrap();
        prop_assert!(r.batch_len * r.n_batches <= xs.len());
        prop_assert!(r.ci_low[0] <= r.estimate[0] && r.estimate[0] <= r.ci_high[0]);
    }

    #[test]
    fn mcmc_estimate_sums_to_level(seed in 0u64..200) {
        let v = 30.0;
        let run = run_chain(&model1(), v, &rw(4.0), 500, None, seed).unwrap();
        let est = mcmc_allocation(&run);
        prop_assert!((est.ac.iter().sum::<f64>() - v).abs() < 1e-10);
        let rate = acceptance_rate(&run).unwrap();
        prop_assert!((0.0..=1.0).contains(&rate));
        prop_assert!(run.accepted() < run.len());
    }
}

#[test]
fn rejected_steps_repeat_the_state_bitwise() {
    let model = model1();
    let v = 33.8;
    let target = |x: &[f64]| model.conditional_target_logdensity(x, v);
    let spec = rw(25.0);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut state = ChainState::new(&target, vec![v / 3.0; 2]);
    let mut rejections = 0;
    for _ in 0..5_000 {
        let step = mh_step(&target, &spec, &state, &mut rng);
        if !step.accepted {
            rejections += 1;
            assert_eq!(step.next.x.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                       state.x.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
        assert!(step.next.ln_target.is_finite());
        state = step.next;
    }
    assert!(rejections > 100);
}

#[test]
fn chains_are_reproducible() {
    let spec = rw(4.0);
    let a = run_chain(&model1(), 30.0, &spec, 2_000, None, 5).unwrap();
    let b = run_chain(&model1(), 30.0, &spec, 2_000, None, 5).unwrap();
    let c = run_chain(&model1(), 30.0, &spec, 2_000, None, 6).unwrap();
    assert_eq!(a.path(), b.path());
    assert_eq!(a.accepted(), b.accepted());
    assert_ne!(a.path(), c.path());
}

#[test]
fn init_with_zero_density_is_rejected() {
    assert!(run_chain(&model1(), 30.0, &rw(1.0), 10, Some(vec![-1.0, 5.0]), 0).is_err());
    assert!(run_chain(&model1(), 30.0, &rw(1.0), 10, Some(vec![20.0, 15.0]), 0).is_err());
}

#[test]
fn detailed_balance_on_a_discretized_toy_target() {
    // standard normal target, unit random walk; flows between bins must balance
    let target = |x: &[f64]| -0.5 * x[0] * x[0];
    let spec = ProposalSpec::random_walk(SpdMatrix::from_rows(&[vec![1.0]]).unwrap());
    let raw = run_mh(&target, &spec, 1_000_000, vec![0.0], &mut ChaCha8Rng::seed_from_u64(23)).unwrap();
    let bin = |x: f64| (x * 2.0).floor().clamp(-6.0, 5.0) as i32;
    let mut flow: HashMap<(i32, i32), f64> = HashMap::new();
    for w in raw.path.windows(2) {
        let (a, b) = (bin(w[0]), bin(w[1]));
        if a != b {
            *flow.entry((a, b)).or_default() += 1.0;
        }
    }
    let mut checked = 0;
    for (&(a, b), &n_ab) in &flow {
        if a < b {
            let n_ba = flow.get(&(b, a)).copied().unwrap_or(0.0);
            let total = n_ab + n_ba;
            if total > 100.0 {
                assert!((n_ab - n_ba).abs() <= 4.0 * total.sqrt(), "bins {a}->{b}: {n_ab} vs {n_ba}");
                checked += 1;
            }
        }
    }
    assert!(checked > 20);
}

#[test]
fn chain_started_at_stationarity_stays_there() {
    let mvt = mvt4();
    let model = RiskModel::elliptical(mvt.clone()).unwrap();
    let v = 13.4;
    let pv = pearson_vii_params(&mvt, v).unwrap();
    let oracle = pv.as_mvt().unwrap();
    let cov = pv.covariance().unwrap();
    let spec = ProposalSpec::mpcn(0.8, pv.location().to_vec(), SpdMatrix::new(cov.clone()).unwrap()).unwrap();

    // many short chains from exact draws: the time-10^4 marginal is the oracle
    let chains = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let starts = oracle.sample(chains, &mut rng);
    let mut ends = Vec::with_capacity(chains * 2);
    for (k, x0) in starts.into_iter().enumerate() {
        let run = run_chain(&model, v, &spec, 10_000, Some(x0), 1_000 + k as u64).unwrap();
        ends.extend_from_slice(run.state(run.len() - 1));
    }
    let n = chains as f64;
    for j in 0..2 {
        let xs: Vec<f64> = ends.iter().skip(j).step_by(2).copied().collect();
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se_mean = (cov[(j, j)] / n).sqrt();
        assert!((mean - pv.location()[j]).abs() <= 3.0 * se_mean, "mean {j}: {mean} vs {}", pv.location()[j]);
        // t with 5 dof: Var(s^2) = sigma^4 (2/(n-1) + kurtosis excess 6/n)
        let se_var = cov[(j, j)] * (2.0 / (n - 1.0) + 6.0 / n).sqrt();
        assert!((var - cov[(j, j)]).abs() <= 3.0 * se_var, "var {j}: {var} vs {}", cov[(j, j)]);
    }
}

#[test]
fn white_noise_autocorrelations_are_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let r = acf(&xs, 30).unwrap();
    assert_eq!(r[0], 1.0);
    assert!(r[1..].iter().all(|v| v.abs() < 0.02));
}

#[test]
fn dirichlet_sample_means_match() {
    let alpha = vec![0.2, 0.28, 0.6];
    let v = 25.0;
    let dir = DirichletSpec::new(alpha.clone(), v).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let n = 100_000;
    let draws: Vec<Vec<f64>> = (0..n).map(|_| dir.sample(&mut rng)).collect();
    let a0: f64 = alpha.iter().sum();
    for j in 0..3 {
        let mean = draws.iter().map(|d| d[j]).sum::<f64>() / n as f64;
        let p = alpha[j] / a0;
        let sd = v * (p * (1.0 - p) / (a0 + 1.0)).sqrt();
        assert!((mean - v * p).abs() <= 3.0 * sd / (n as f64).sqrt());
    }
}

#[test]
fn portfolio_sample_sums_match_rows() {
    let m = RiskModel::copula_joint(
        vec![MarginalSpec::pareto(4.0, 3.0).unwrap(); 3],
        CopulaSpec::t(4.0, corr()).unwrap(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let b = m.sample_portfolio(10_000, &mut rng);
    for (row, s) in b.rows().zip(b.sums()) {
        assert!((row.iter().sum::<f64>() - s).abs() <= 1e-10 * s.abs().max(1.0));
        assert!(row.iter().all(|x| *x >= 0.0));
    }
    let _: f64 = rng.random();
}
