use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::entropy::{self, Bipartite, DEFAULT_GAP};
use crate::quantum::linalg::{c, CMat, CVec};
use crate::quantum::{CqState, DensityOperator, Instrument, SystemLabel};

fn uniform_product(bits: usize) -> ScenarioInstance {
    let d = 1usize << bits;
    let a = SystemLabel::quantum("A", d);
    let b = SystemLabel::quantum("B", d);
    let psi = CVec::from_element(d * d, c(1.0 / d as f64));
    let rho = DensityOperator::pure(vec![a.clone(), b.clone()], &psi).unwrap();
    ScenarioInstance::new(
        rho,
        Instrument::measurement(a, "X"),
        Instrument::measurement(b, "Y"),
        ExtractorSpec::ip(bits).unwrap(),
        true,
    )
    .unwrap()
}

fn from_distribution(p: &JointDistribution, spec: ExtractorSpec, strong: bool) -> ScenarioInstance {
    let (m, n) = p.measurements();
    ScenarioInstance::new(p.pure_state().unwrap(), m, n, spec, strong).unwrap()
}

#[test]
fn independent_uniform_inputs_leave_only_the_ip_bias() {
    // P(x.y = 1) = 1/2 - 2^-(n+1); in strong mode only y = 0 contributes
    for bits in 1..=3 {
        let inst = uniform_product(bits);
        let expected = 0.5f64.powi(bits as i32 + 1);
        assert_abs_diff_eq!(measured_epsilon(&inst).unwrap(), expected, epsilon = 1e-12);
        let out = inst.output_state().unwrap();
        assert_abs_diff_eq!(epsilon_of(&out, inst.spec(), false).unwrap(), expected, epsilon = 1e-12);
        assert!(check_ip_bound(&inst, DEFAULT_GAP).unwrap().pass);
    }
}

#[test]
fn sn_distribution_gives_one_half() {
    let p = gen_sn_distribution(2).unwrap();
    for strong in [false, true] {
        let inst = from_distribution(&p, ExtractorSpec::ip(2).unwrap(), strong);
        assert_abs_diff_eq!(measured_epsilon(&inst).unwrap(), 0.5, epsilon = 1e-12);
    }
}

#[test]
fn sn_distribution_support() {
    let p = gen_sn_distribution(2).unwrap();
    let support = p.probs().iter().filter(|&&v| v > 0.0).count();
    let oracle = (0..16usize).filter(|v| ((v >> 2) & v & 3).count_ones() % 2 == 0).count();
    assert_eq!(support, oracle);
    assert_eq!(support, 10);
    for x in 0..4usize {
        for y in 0..4usize {
            if (x & y).count_ones() % 2 == 1 {
                assert_eq!(p.p(x, y), 0.0);
            }
        }
    }
}

#[test]
fn tightness_meets_the_bound() {
    for n in [2, 4, 6] {
        let inst = gen_tightness(n).unwrap();
        let report = check_ip_bound(&inst, DEFAULT_GAP).unwrap();
        assert_abs_diff_eq!(report.k1.value, (n / 2) as f64, epsilon = 1e-12);
        assert_abs_diff_eq!(report.k2.value, (n / 2) as f64, epsilon = 1e-12);
        assert_abs_diff_eq!(report.measured, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(report.measured, report.bound, epsilon = 1e-12);
        assert!(report.pass);
    }
    assert!(gen_tightness(3).is_err());
}

#[test]
fn scenario_rejects_mixed_and_mismatched_inputs() {
    let a = SystemLabel::quantum("A", 2);
    let b = SystemLabel::quantum("B", 2);
    let mixed = DensityOperator::maximally_mixed(vec![a.clone(), b.clone()]).unwrap();
    let ip = ExtractorSpec::ip(1).unwrap();
    let meas = || (Instrument::measurement(a.clone(), "X"), Instrument::measurement(b.clone(), "Y"));
    let (m, n) = meas();
    assert!(ScenarioInstance::new(mixed, m, n, ip.clone(), true).is_err());
    let pure = uniform_product(1).state().clone();
    let (m, _) = meas();
    assert!(ScenarioInstance::new(pure.clone(), m.clone(), m, ip.clone(), true).is_err());
    let (m, n) = meas();
    assert!(ScenarioInstance::new(pure, m, n, ExtractorSpec::ip(2).unwrap(), true).is_err());
}

#[test]
fn identity_deor_matches_ip_with_inflated_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let ip_inst = random_instance(ExtractorSpec::ip(2).unwrap(), true, 3, &mut rng).unwrap();
        let deor_inst = ScenarioInstance::new(
            ip_inst.state().clone(),
            ip_inst.m().clone(),
            ip_inst.n().clone(),
            ExtractorSpec::deor(identity_family(2).unwrap()),
            true,
        )
        .unwrap();
        let ip = check_ip_bound(&ip_inst, DEFAULT_GAP).unwrap();
        let deor = check_deor_bound(&deor_inst, DEFAULT_GAP).unwrap();
        assert_abs_diff_eq!(ip.measured, deor.measured, epsilon = 1e-14);
        assert_abs_diff_eq!(ip.k1.value, deor.k1.value, epsilon = 1e-12);
        // 2^((2m + r) / 2) with m = 1, r = 0
        assert_abs_diff_eq!(deor.bound / ip.bound, 2.0, epsilon = 1e-9);
        assert!(check_ip_bound(&deor_inst, DEFAULT_GAP).is_err());
        assert!(check_deor_bound(&ip_inst, DEFAULT_GAP).is_err());
    }
}

#[test]
fn bound_formulas() {
    assert_abs_diff_eq!(ip_bound(4, 2.0, 2.0), 0.5);
    assert_abs_diff_eq!(ip_bound(4, 1.0, 1.0), 1.0);
    assert_abs_diff_eq!(deor_bound(3, 1, 0, 2.5, 2.5), 0.5);
    assert_abs_diff_eq!(deor_bound(3, 2, 1, 4.0, 4.0), 0.5);
}

#[test]
fn random_ip_instances_respect_the_bound() {
    let reports = ip_bound_suite(ExecMode::Parallel, 7, 24, DEFAULT_GAP).unwrap();
    for r in &reports {
        assert!(r.pass, "seed {:?}: measured {} > bound {}", r.seed, r.measured, r.bound);
    }
    assert!(reports.iter().any(|r| r.bound < 1.0), "no informative instance");
}

#[test]
fn random_deor_instances_respect_the_bound() {
    let reports = deor_bound_suite(ExecMode::Parallel, 3, 12, DEFAULT_GAP).unwrap();
    for r in &reports {
        assert!(r.pass, "seed {:?}: measured {} > bound {}", r.seed, r.measured, r.bound);
    }
}

#[test]
fn suites_are_seed_deterministic() {
    let a = ip_bound_suite(ExecMode::Parallel, 5, 4, DEFAULT_GAP).unwrap();
    let b = ip_bound_suite(ExecMode::Sequential, 5, 4, DEFAULT_GAP).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.seed, y.seed);
        assert_eq!(x.measured, y.measured);
        assert_eq!(x.bound, y.bound);
    }
}

#[test]
fn discarding_side_information_never_increases_epsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    for _ in 0..20 {
        let inst = random_instance(ExtractorSpec::ip(2).unwrap(), true, 4, &mut rng).unwrap();
        let out = inst.output_state().unwrap();
        let full = epsilon_of(&out, inst.spec(), true).unwrap();
        for sys in out.systems() {
            let reduced = out.partial_trace(&[sys.name.as_str()]).unwrap();
            let e = epsilon_of(&reduced, inst.spec(), true).unwrap();
            assert!(e <= full + 1e-12, "{e} > {full}");
            checked += 1;
        }
        // dropping Y as well: weak distance with fewer systems
        assert!(epsilon_of(&out, inst.spec(), false).unwrap() <= full + 1e-12);
    }
    assert!(checked > 0);
}

#[test]
fn markov_table_marginals_are_uniform() {
    let ce = gen_markov_counterexample().unwrap();
    let p = &ce.distribution;
    assert_abs_diff_eq!(p.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    for v in p.marginal_x().into_iter().chain(p.marginal_y()) {
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
    }
    assert!(p.probs().iter().all(|&v| v == 0.0 || v == 0.125));
    assert!(ce.state.is_pure(1e-12));
}

#[test]
fn counterexample_reproduces_both_endpoints() {
    let report = check_counterexample(1e-9).unwrap();
    for h in [&report.h_x_given_b, &report.h_y_given_a] {
        assert_abs_diff_eq!(h.value, COUNTEREXAMPLE_HMIN, epsilon = COUNTEREXAMPLE_TOL);
        assert!(h.gap() <= 1e-6);
    }
    assert_abs_diff_eq!(report.markov_ceiling, 0.41504, epsilon = 1e-5);
    assert!(report.separated && report.pass);
}

#[test]
fn eta_matches_the_measured_pure_state() {
    let ce = gen_markov_counterexample().unwrap();
    let (eta, nu) = build_eta_nu(&ce.distribution).unwrap();
    let measured_x = ce.m.apply(&ce.state).unwrap();
    let measured_y = ce.n.apply(&ce.state).unwrap();
    for (a, b) in eta.blocks().iter().zip(measured_x.blocks()) {
        assert!(crate::quantum::linalg::max_abs(&(a - b)) < 1e-14);
    }
    for (a, b) in nu.blocks().iter().zip(measured_y.blocks()) {
        assert!(crate::quantum::linalg::max_abs(&(a - b)) < 1e-14);
    }
}

#[test]
fn eta_conditionals_are_pure() {
    let p = gen_sn_distribution(2).unwrap();
    let (eta, _) = build_eta_nu(&p).unwrap();
    for b in eta.blocks() {
        let s = crate::quantum::linalg::Eigh::new(b);
        let nonzero = s.values.iter().filter(|&&v| v > 1e-12).count();
        assert_eq!(nonzero, 1);
    }
}

#[test]
fn product_distribution_has_no_side_information() {
    let px = [0.4, 0.3, 0.2, 0.1];
    let py = [0.25, 0.25, 0.4, 0.1];
    let probs = px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect();
    let p = JointDistribution::new(2, probs).unwrap();
    let (eta, _) = build_eta_nu(&p).unwrap();
    let h = entropy::h_min(&Bipartite::from_cq(&eta), DEFAULT_GAP).unwrap();
    assert_abs_diff_eq!(h.value, -(0.4f64).log2(), epsilon = 1e-7);
}

#[test]
fn sn_eta_has_at_most_one_bit() {
    let p = gen_sn_distribution(2).unwrap();
    let (eta, _) = build_eta_nu(&p).unwrap();
    let h = entropy::h_min(&Bipartite::from_cq(&eta), DEFAULT_GAP).unwrap();
    assert!(h.lower <= 1.0 + 1e-9, "{}", h.lower);
    let g = entropy::p_guess(&eta, DEFAULT_GAP).unwrap();
    assert!(g.upper >= 0.5 - 1e-9);
}

#[test]
fn joint_distribution_validation() {
    assert!(JointDistribution::new(1, vec![0.5, 0.5, 0.1, 0.0]).is_err());
    assert!(JointDistribution::new(1, vec![0.5, 0.5, 0.0]).is_err());
    assert!(JointDistribution::new(1, vec![1.5, -0.5, 0.0, 0.0]).is_err());
    assert!(JointDistribution::new(4, vec![1.0 / 256.0; 256]).is_ok());
    assert!(build_eta_nu(&JointDistribution::new(4, vec![1.0 / 256.0; 256]).unwrap()).is_err());
}

#[test]
fn xor_examples() {
    let uniform = CqState::from_distribution(SystemLabel::classical("Z", 4), &[0.25; 4]).unwrap();
    let r = check_xor_lemma(&uniform).unwrap();
    assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(r.rhs, 0.0, epsilon = 1e-15);
    assert!(r.holds);

    let fixed = CqState::from_distribution(SystemLabel::classical("Z", 2), &[1.0, 0.0]).unwrap();
    let r = check_xor_lemma(&fixed).unwrap();
    assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(r.rhs, 2.0, epsilon = 1e-15);
    assert!(r.holds);

    let three = CqState::from_distribution(SystemLabel::classical("Z", 3), &[0.5, 0.25, 0.25]).unwrap();
    assert!(check_xor_lemma(&three).is_err());
}

#[test]
fn xor_suite_never_fails() {
    for r in xor_suite(ExecMode::Parallel, 1, 60).unwrap() {
        assert!(r.holds, "{} > {}", r.lhs, r.rhs);
    }
}

#[test]
fn rank_entropy_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cq = random::cq_state(8, 2, &mut rng).unwrap();
    // invertible K keeps the entropy
    let k = BitMatrix::parse_rows(&["110", "010", "011"]).unwrap();
    let r = check_rank_entropy(&cq, &k, DEFAULT_GAP, 1e-6).unwrap();
    assert_eq!(r.r, 0);
    assert_abs_diff_eq!(r.h_x.value, r.h_kx.value, epsilon = 1e-6);
    // K = 0 sends everything to one value
    let zero = BitMatrix::zeros(3, 3);
    let r = check_rank_entropy(&cq, &zero, DEFAULT_GAP, 1e-6).unwrap();
    assert_eq!(r.r, 3);
    assert!(r.h_kx.value.abs() < 1e-6);
    assert!(r.holds);
}

#[test]
fn rank_entropy_suite_never_fails() {
    for r in rank_entropy_suite(ExecMode::Parallel, 2, 30, DEFAULT_GAP, 1e-6).unwrap() {
        assert!(r.holds, "margin {}", r.margin);
    }
}

#[test]
fn alt_model_uniform_independent_x() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rho_b = random::density(vec![SystemLabel::quantum("B", 3)], 3, &mut rng).unwrap();
    let blocks = vec![rho_b.matrix().scale(0.5); 2];
    let cq = CqState::new(SystemLabel::classical("X", 2), vec![SystemLabel::quantum("B", 3)], blocks).unwrap();
    let channel = alt_model_channel(&cq).unwrap();
    // each outcome is half the identity on B'
    for y in 0..2 {
        let e = channel.adjoint_apply(y, &CMat::identity(1, 1)).unwrap();
        assert!(crate::quantum::linalg::max_abs(&(e - CMat::identity(3, 3).scale(0.5))) < 1e-10);
    }
    assert!(check_alt_model(&cq).unwrap().holds);
}

#[test]
fn alt_model_measured_b_round_trip() {
    let b = SystemLabel::quantum("B", 3);
    let rho = DensityOperator::new(
        vec![b.clone()],
        CMat::from_fn(3, 3, |i, j| c(if i == j { [0.5, 0.3, 0.2][i] } else { 0.1 })),
    )
    .unwrap();
    let cq = Instrument::new(
        vec![b.clone()],
        vec![b.clone()],
        "X",
        (0..3)
            .map(|x| crate::quantum::Outcome {
                label: x.to_string(),
                kraus: vec![CMat::from_fn(3, 3, |i, j| c(if i == x && j == x { 1.0 } else { 0.0 }))],
            })
            .collect(),
    )
    .unwrap()
    .apply(&rho)
    .unwrap();
    let r = check_alt_model(&cq).unwrap();
    assert!(r.error <= ALT_MODEL_TOL, "{}", r.error);
}

#[test]
fn alt_model_sn_round_trip() {
    let (eta, _) = build_eta_nu(&gen_sn_distribution(2).unwrap()).unwrap();
    let r = check_alt_model(&eta).unwrap();
    assert!(r.holds, "{}", r.error);
}

#[test]
fn alt_model_suite_round_trips() {
    for r in alt_model_suite(ExecMode::Parallel, 9, 30).unwrap() {
        assert!(r.holds, "error {}", r.error);
    }
}

#[test]
fn deor_families_cover_requested_shapes() {
    let fams = deor_suite_families().unwrap();
    assert!(fams.iter().all(|f| (2..=3).contains(&f.n()) && (1..=2).contains(&f.m())));
    assert!(fams.iter().any(|f| f.r() == 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn xor_inequality_holds(seed in any::<u64>(), m in 1usize..=3, de in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = check_xor_lemma(&random::cq_state(1 << m, de, &mut rng).unwrap()).unwrap();
        prop_assert!(r.holds);
    }

    #[test]
    fn alt_model_round_trip(seed in any::<u64>(), dx in 1usize..=4, db in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = check_alt_model(&random::cq_state(dx, db, &mut rng).unwrap()).unwrap();
        prop_assert!(r.holds, "error {}", r.error);
    }
}

#[test]
fn tightness_suite_reports_equality() {
    let reports = tightness_suite(DEFAULT_GAP).unwrap();
    assert_eq!(reports.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 4, 6]);
    for r in &reports {
        assert!(r.pass);
        assert!((r.measured - r.bound).abs() <= TIGHTNESS_TOL);
    }
    assert_eq!(reports[0].measured, 0.5);
}
