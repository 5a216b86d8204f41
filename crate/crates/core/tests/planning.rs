mod common;

use adherence::envs::Instance;
use adherence::pertinence::human_value;
use adherence::planning::{
    backward_induction, expected_advice_count, occupancy_measures, policy_evaluation,
};
use adherence::{build_machine_mdp, AdherenceModel, DeterministicPolicy};
use common::{brute_force_optimum, evaluate_direct, random_instance, random_sized_instance, rng};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 1..=5usize, 1..=3usize, 1..=4usize)
}

fn instance((seed, s, a, h): (u64, usize, usize, usize)) -> Instance {
    random_instance(&mut rng(seed), s, a, h)
}

#[test]
fn optimum_matches_enumeration() {
    let mut r = rng(101);
    for _ in 0..20 {
        let inst = random_sized_instance(&mut r, 3, 2, 3);
        let m = build_machine_mdp(&inst.mdp, &inst.pi, &inst.theta).unwrap();
        let planned = backward_induction(&m).root_value(&m);
        let oracle = brute_force_optimum(&inst);
        assert!((planned - oracle).abs() <= 1e-9, "{planned} vs {oracle}");
    }
}

#[test]
fn full_adherence_reaches_the_environment_optimum() {
    // with θ ≡ 1 the machine controls the human, so V* equals the optimum of the bare MDP
    let mut r = rng(7);
    for _ in 0..20 {
        let inst = random_sized_instance(&mut r, 4, 3, 4);
        let (ss, aa) = (inst.mdp.num_states(), inst.mdp.num_actions());
        let ones = AdherenceModel::constant(ss, aa, 1.0).unwrap();
        let m = build_machine_mdp(&inst.mdp, &inst.pi, &ones).unwrap();
        let planned = backward_induction(&m).root_value(&m);

        let mdp = &inst.mdp;
        let mut v = vec![0.0; ss];
        for h in (0..mdp.horizon()).rev() {
            v = (0..ss)
                .map(|s| {
                    (0..aa)
                        .map(|a| {
                            mdp.reward(h, s, a)
                                + mdp
                                    .kernel()
                                    .dense_row(h, s, a)
                                    .iter()
                                    .zip(&v)
                                    .map(|(p, x)| p * x)
                                    .sum::<f64>()
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
        }
        assert!((planned - v[mdp.initial_state()]).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_value_is_bounded(d in dims()) {
        let inst = instance(d);
        let m = build_machine_mdp(&inst.mdp, &inst.pi, &inst.theta).unwrap();
        let plan = backward_induction(&m);
        let human = human_value(&m);
        for h in 0..=m.horizon() {
            for s in 0..m.num_states() {
                let v = plan.v.get(h, s);
                prop_assert!(v >= human.get(h, s) - 1e-9);
                prop_assert!(v <= (m.horizon() - h) as f64 + 1e-9);
            }
        }
    }

    #[test]
    fn evaluation_agrees_with_direct_propagation(d in dims(), pick in any::<u64>()) {
        let inst = instance(d);
        let m = build_machine_mdp(&inst.mdp, &inst.pi, &inst.theta).unwrap();
        let (hh, ss, aa) = (m.horizon(), m.num_states(), m.num_actions());
        let mut r = rng(pick);
        let act: Vec<usize> = (0..hh * ss).map(|_| rand::RngExt::random_range(&mut r, 0..=aa)).collect();
        let pol = DeterministicPolicy::new(hh, ss, aa, act.clone()).unwrap();
        let (value, advice) = evaluate_direct(&inst, &act);
        prop_assert!((policy_evaluation(&m, &pol).unwrap().get(0, m.initial_state()) - value).abs() <= 1e-9);
        prop_assert!((expected_advice_count(&m, &pol).unwrap() - advice).abs() <= 1e-9);
    }

    #[test]
    fn optimal_policy_evaluates_to_its_value(d in dims()) {
        let inst = instance(d);
        let m = build_machine_mdp(&inst.mdp, &inst.pi, &inst.theta).unwrap();
        let plan = backward_induction(&m);
        let v = policy_evaluation(&m, &plan.policy).unwrap();
        for h in 0..=m.horizon() {
            for s in 0..m.num_states() {
                prop_assert!((v.get(h, s) - plan.v.get(h, s)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn occupancy_is_a_distribution_per_step(d in dims()) {
        let inst = instance(d);
        let m = build_machine_mdp(&inst.mdp, &inst.pi, &inst.theta).unwrap();
        let plan = backward_induction(&m);
        let occ = occupancy_measures(&m, &plan.policy).unwrap();
        let mut advice = 0.0;
        for h in 0..m.horizon() {
            prop_assert!((occ.step_mass(h) - 1.0).abs() <= 1e-9);
            advice += occ.advice_mass(h);
        }
        prop_assert!((advice - expected_advice_count(&m, &plan.policy).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn higher_adherence_never_hurts(d in dims(), lift in any::<u64>()) {
        let inst = instance(d);
        let (hh, ss, aa) = (inst.mdp.horizon(), inst.mdp.num_states(), inst.mdp.num_actions());
        let mut r = rng(lift);
        // θ2 ≥ max_h π^H_h(a|s), θ1 ≥ θ2
        let floor: Vec<f64> = (0..ss * aa)
            .map(|i| (0..hh).map(|h| inst.pi.row(h, i / aa)[i % aa]).fold(0.0, f64::max))
            .collect();
        let t2: Vec<f64> = floor.iter().map(|&f| f + (1.0 - f) * rand::RngExt::random::<f64>(&mut r)).collect();
        let t1: Vec<f64> = t2.iter().map(|&t| t + (1.0 - t) * rand::RngExt::random::<f64>(&mut r)).collect();
        let value = |t: Vec<f64>| {
            let theta = AdherenceModel::new(ss, aa, t).unwrap();
            let m = build_machine_mdp(&inst.mdp, &inst.pi, &theta).unwrap();
            backward_induction(&m).root_value(&m)
        };
        prop_assert!(value(t1) >= value(t2) - 1e-9);
    }
}
