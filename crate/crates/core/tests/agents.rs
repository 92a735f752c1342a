use std::collections::HashSet;

use oncosim::agents::{
    restrict_actions, DqnAgent, DqnConfig, EpsilonSchedule, NccnPolicy, NccnRegimens, ReplayMemory,
    StateEncoder, DEFAULT_NCCN_REGIMENS,
};
use oncosim::data_pipeline::{Demographics, DrugCombination, EmpiricalDemographics, EventFlags, TreatmentPeriod};
use oncosim::mdp_env::{
    legal_actions, ActionSet, Dynamics, Environment, HealthState, PatientState, PinnedDynamics, Policy,
    Transition,
};
use oncosim::neural::{Dense, Mlp};
use oncosim::rng::{stream, Purpose, SimRng};
use oncosim::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn demo() -> Demographics {
    Demographics {
        age: 63,
        race: "White".into(),
        stage: "Stage IV".into(),
        grade: "G3".into(),
    }
}

fn actions() -> ActionSet {
    ActionSet::new(
        ["carboplatin+paclitaxel", "gemcitabine", "topotecan", "docetaxel"]
            .iter()
            .map(|s| s.parse::<DrugCombination>().unwrap()),
    )
}

fn encoder() -> StateEncoder {
    StateEncoder::new(&actions(), &EmpiricalDemographics::point_mass(&demo()))
}

fn small_config() -> DqnConfig {
    DqnConfig {
        hidden_width: 8,
        hidden_layers: 2,
        batch_size: 16,
        ..DqnConfig::default()
    }
}

fn agent(seed: u64) -> DqnAgent {
    DqnAgent::new(small_config(), encoder(), actions(), &mut stream(seed, Purpose::Init, 0))
}

/// A network that ignores its input and outputs `bias`.
fn constant_net(input: usize, bias: &[f64]) -> Mlp {
    Mlp {
        layers: vec![
            Dense { inputs: input, outputs: 2, weights: vec![0.0; 2 * input], bias: vec![0.0; 2] },
            Dense { inputs: 2, outputs: bias.len(), weights: vec![0.0; 2 * bias.len()], bias: bias.to_vec() },
        ],
    }
}

fn state(health: HealthState, t: u32, moc: u32, prior: u32, combo: usize) -> PatientState {
    PatientState {
        health,
        months_since_start: t,
        months_on_current: moc.min(t),
        prior_lines: prior,
        current_combination: actions().combination(combo).clone(),
        demographics: demo(),
    }
}

fn random_state(rng: &mut SimRng) -> PatientState {
    let t = rng.random_range(0..120);
    let health = if rng.random_bool(0.5) { HealthState::NeedsTreatment } else { HealthState::Remission };
    state(health, t, rng.random_range(0..=t), rng.random_range(0..5), rng.random_range(0..5))
}

fn transition(s: PatientState, action: usize, next_health: HealthState) -> Transition {
    let done = next_health == HealthState::Dead;
    let mut next = s.clone();
    next.health = next_health;
    next.months_since_start += 1;
    next.current_combination = actions().combination(action).clone();
    Transition { state: s, action, reward: if done { -1 } else { 1 }, next_state: next, done, capped: false }
}

fn random_transitions(seed: u64, n: usize) -> Vec<Transition> {
    let mut rng = stream(seed, Purpose::Episode, 0);
    (0..n)
        .map(|_| {
            let mut s = random_state(&mut rng);
            s.health = HealthState::NeedsTreatment;
            let action = rng.random_range(1..5);
            let next = [HealthState::Dead, HealthState::Remission, HealthState::NeedsTreatment][rng.random_range(0..3)];
            transition(s, action, next)
        })
        .collect()
}

#[test]
fn epsilon_schedule_endpoints() {
    let e = EpsilonSchedule::default();
    assert_eq!(e.epsilon(0), 0.9);
    assert!((e.epsilon(50_000) - 0.05).abs() < 1e-6);
    assert_eq!(e.epsilon(10_000_000), 0.05);
    let mut prev = e.epsilon(0);
    for r in (0..60_000).step_by(997) {
        let now = e.epsilon(r);
        assert!(now <= prev && (0.05..=0.9).contains(&now));
        prev = now;
    }
}

#[test]
fn full_exploration_is_uniform_over_legal() {
    let mut a = agent(1);
    a.epsilon_override = Some(1.0);
    let s = state(HealthState::NeedsTreatment, 3, 2, 0, 1);
    let legal = legal_actions(&s, &a.action_set).unwrap();
    let mut counts = vec![0u64; a.action_set.len()];
    let mut rng = stream(2, Purpose::Episode, 0);
    let n = 100_000;
    for _ in 0..n {
        counts[a.select_action(&s, &legal, &mut rng).unwrap()] += 1;
    }
    assert_eq!(counts[ActionSet::NO_TREATMENT], 0);
    let expected = n as f64 / legal.len() as f64;
    let chi2: f64 = legal.iter().map(|&i| (counts[i] as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((legal.len() - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 0.001, "chi2 {chi2} p {p}");
}

#[test]
fn greedy_follows_the_network() {
    let dim = encoder().dim();
    let mut a = DqnAgent::from_parts(small_config(), encoder(), actions(), constant_net(dim, &[9.0, 1.0, 2.0, 5.0, 3.0]));
    a.epsilon_override = Some(0.0);
    let mut rng = stream(3, Purpose::Episode, 0);
    let s = state(HealthState::NeedsTreatment, 0, 0, 0, 0);
    let legal = legal_actions(&s, &a.action_set).unwrap();
    for _ in 0..1000 {
        assert_eq!(a.select_action(&s, &legal, &mut rng).unwrap(), 3);
    }
    let r = state(HealthState::Remission, 4, 1, 1, 0);
    assert_eq!(a.select_action(&r, &[ActionSet::NO_TREATMENT], &mut rng).unwrap(), ActionSet::NO_TREATMENT);

    let tied = DqnAgent::from_parts(small_config(), encoder(), actions(), constant_net(dim, &[1.0; 5]));
    assert_eq!(tied.greedy(&s, &[4, 2, 3]).unwrap(), 2);
    assert!(matches!(tied.select_action(&s, &[], &mut rng), Err(Error::NoLegalActions)));
}

#[test]
fn selection_is_always_legal() {
    let mut a = agent(4);
    a.epsilon_override = Some(0.3);
    let mut rng = stream(5, Purpose::Episode, 0);
    for _ in 0..100_000 {
        let s = random_state(&mut rng);
        let legal = legal_actions(&s, &a.action_set).unwrap();
        let chosen = a.select_action(&s, &legal, &mut rng).unwrap();
        assert!(legal.contains(&chosen));
        if s.health == HealthState::Remission {
            assert_eq!(chosen, ActionSet::NO_TREATMENT);
        }
    }
}

#[test]
fn td_target_examples() {
    let dim = encoder().dim();
    let mut a = DqnAgent::from_parts(small_config(), encoder(), actions(), constant_net(dim, &[0.0; 5]));
    a.target = constant_net(dim, &[100.0, 10.0, 3.0, -2.0, 7.0]);
    let s = state(HealthState::NeedsTreatment, 2, 2, 0, 1);

    let terminal = transition(s.clone(), 1, HealthState::Dead);
    assert_eq!(a.td_targets(&[terminal.clone(), terminal]).unwrap(), vec![-1.0, -1.0]);
    assert_eq!(a.target_evaluations(), 0);

    let treat = transition(s.clone(), 1, HealthState::NeedsTreatment);
    let y = a.td_targets(&[treat]).unwrap()[0];
    assert!((y - 10.9).abs() < 1e-12, "{y}");
    let remit = transition(s.clone(), 1, HealthState::Remission);
    let y = a.td_targets(&[remit]).unwrap()[0];
    assert!((y - (1.0 + 0.99 * 100.0)).abs() < 1e-12);
    assert_eq!(a.target_evaluations(), 2);

    a.target = constant_net(dim, &[0.0; 5]);
    let batch = random_transitions(6, 50);
    let y = a.td_targets(&batch).unwrap();
    for (t, v) in batch.iter().zip(&y) {
        assert_eq!(*v, t.reward as f64);
    }
    let live = batch.iter().filter(|t| !t.done).count() as u64;
    assert_eq!(a.target_evaluations(), 2 + live);
}

#[test]
fn sync_makes_target_identical() {
    let mut a = agent(7);
    for t in random_transitions(8, 200) {
        a.remember(t);
    }
    a.config.target_sync = 0;
    let mut rng = stream(9, Purpose::Optimize, 0);
    for _ in 0..5 {
        a.optimize(&mut rng).unwrap();
    }
    let probe = a.encoder.encode(&state(HealthState::NeedsTreatment, 5, 3, 1, 2)).unwrap();
    assert_ne!(a.online.forward(&probe).unwrap(), a.target.forward(&probe).unwrap());
    a.sync_target();
    for t in random_transitions(10, 30) {
        let x = a.encoder.encode(&t.state).unwrap();
        let (on, tg) = (a.online.forward(&x).unwrap(), a.target.forward(&x).unwrap());
        assert!(on.iter().zip(&tg).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn target_sync_period_counts_optimize_calls() {
    let mut a = agent(7);
    for t in random_transitions(8, 100) {
        a.remember(t);
    }
    let mut rng = stream(9, Purpose::Optimize, 0);
    for call in 1..=20 {
        a.optimize(&mut rng).unwrap();
        assert_eq!(a.online == a.target, call % 10 == 0, "call {call}");
    }
}

#[test]
fn perfect_prediction_gives_zero_loss_and_no_update() {
    let dim = encoder().dim();
    let mut a = DqnAgent::from_parts(small_config(), encoder(), actions(), constant_net(dim, &[0.0, -1.0, 0.0, 0.0, 0.0]));
    let s = state(HealthState::NeedsTreatment, 1, 1, 0, 1);
    a.remember(transition(s, 1, HealthState::Dead));
    let before = a.online.clone();
    let loss = a.optimize(&mut stream(1, Purpose::Optimize, 0)).unwrap();
    assert_eq!(loss, 0.0);
    assert_eq!(a.online, before);
    assert!(matches!(agent(1).optimize(&mut stream(1, Purpose::Optimize, 0)), Err(Error::EmptyReplay)));
}

fn naive_forward(net: &Mlp, x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    for (k, l) in net.layers.iter().enumerate() {
        a = (0..l.outputs)
            .map(|o| {
                let s: f64 = l.bias[o] + (0..l.inputs).map(|i| l.weights[o * l.inputs + i] * a[i]).sum::<f64>();
                if k + 1 < net.layers.len() { s.max(0.0) } else { s }
            })
            .collect();
    }
    a
}

#[test]
fn optimize_loss_matches_recomputation() {
    let mut a = agent(11);
    for t in random_transitions(12, 500) {
        a.remember(t);
    }
    let rng = stream(13, Purpose::Optimize, 0);
    let batch = a.replay.sample(a.config.batch_size, &mut rng.clone());
    let mut oracle = 0.0;
    for t in &batch {
        let pred = naive_forward(&a.online, &a.encoder.encode(&t.state).unwrap())[t.action];
        let y = if t.done {
            t.reward as f64
        } else {
            let q = naive_forward(&a.target, &a.encoder.encode(&t.next_state).unwrap());
            let best = match t.next_state.health {
                HealthState::Remission => q[0],
                _ => q[1..].iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            };
            t.reward as f64 + 0.99 * best
        };
        let e = (pred - y).abs();
        oracle += if e < 1.0 { 0.5 * e * e } else { e - 0.5 };
    }
    oracle /= batch.len() as f64;
    let loss = a.optimize(&mut rng.clone()).unwrap();
    assert!((loss - oracle).abs() < 1e-10, "{loss} vs {oracle}");
}

#[test]
fn loss_decreases_on_a_fixed_batch() {
    let mut a = agent(14);
    let batch = random_transitions(15, 32);
    let first = a.optimize_on_batch(&batch).unwrap();
    let mut last = first;
    for _ in 0..99 {
        last = a.optimize_on_batch(&batch).unwrap();
    }
    assert!(last < first, "{first} -> {last}");
    assert!(a.online.all_finite());
}

fn policy_and_env() -> (NccnPolicy, Environment, HashSet<usize>, HashSet<usize>) {
    let combos: Vec<DrugCombination> = ["carboplatin+paclitaxel", "carboplatin+docetaxel", "gemcitabine", "topotecan", "cisplatin"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let set = ActionSet::new(combos);
    let regimens = NccnRegimens::parse("shipped", DEFAULT_NCCN_REGIMENS.as_bytes()).unwrap();
    let policy = NccnPolicy::new(&regimens, &set).unwrap();
    let preferred: HashSet<usize> = policy.preferred().iter().copied().collect();
    let other: HashSet<usize> = policy.other_recommended().iter().copied().collect();
    assert_eq!(preferred, HashSet::from([1, 2]));
    assert_eq!(other, HashSet::from([3, 4, 5]));
    let env = Environment::new(
        Dynamics::Pinned(PinnedDynamics::constant(0.03, 0.35)),
        set,
        EmpiricalDemographics::point_mass(&demo()),
    );
    (policy, env, preferred, other)
}

#[test]
fn nccn_follows_regimen_phases() {
    let (mut policy, env, preferred, other) = policy_and_env();
    let mut recurrences = 0;
    for i in 0..10_000 {
        let ep = env.run_episode(&mut policy, &mut stream(16, Purpose::Episode, i)).unwrap();
        let mut recurred = false;
        for (k, t) in ep.transitions.iter().enumerate() {
            match t.state.health {
                HealthState::Remission => assert_eq!(t.action, ActionSet::NO_TREATMENT),
                _ if k == 0 || !recurred => assert!(preferred.contains(&t.action), "episode {i} step {k}"),
                _ => assert!(other.contains(&t.action), "episode {i} step {k}"),
            }
            if t.state.health == HealthState::Remission && t.next_state.health == HealthState::NeedsTreatment {
                recurred = true;
                recurrences += 1;
            }
        }
    }
    assert!(recurrences > 1000);
}

#[test]
fn nccn_keeps_a_regimen_while_treatment_continues() {
    let (mut policy, env, _, _) = policy_and_env();
    for i in 0..500 {
        let ep = env.run_episode(&mut policy, &mut stream(17, Purpose::Episode, i)).unwrap();
        for w in ep.transitions.windows(2) {
            if w[0].state.health == HealthState::NeedsTreatment && w[1].state.health == HealthState::NeedsTreatment {
                assert_eq!(w[0].action, w[1].action);
            }
        }
    }
    policy.begin_episode();
    assert!(!policy.has_recurred());
}

fn period(combo: &str, k: u32) -> TreatmentPeriod {
    TreatmentPeriod {
        patient_id: "X".into(),
        month_index: k,
        combination: combo.parse().unwrap(),
        months_on_current: 1,
        prior_lines: 0,
        event_flags: EventFlags { death_this_period: false, line_ended_this_period: false },
    }
}

#[test]
fn restriction_by_occurrence_count() {
    let a: DrugCombination = "carboplatin+paclitaxel".parse().unwrap();
    let b: DrugCombination = "gemcitabine".parse().unwrap();
    let c: DrugCombination = "topotecan".parse().unwrap();
    let set = ActionSet::new([a.clone(), b.clone(), c.clone()]);
    let mut periods: Vec<TreatmentPeriod> = (0..6).map(|k| period("carboplatin+paclitaxel", k)).collect();
    periods.extend((0..4).map(|k| period("gemcitabine", k)));
    periods.push(period("NONE", 0));

    let r = restrict_actions(&set, &periods, 5);
    assert_eq!(r.action_set, ActionSet::new([a.clone()]));
    assert_eq!(r.remap, vec![(0, 0), (1, 1)]);
    assert_eq!(r.new_index(2), None);

    let r = restrict_actions(&set, &periods, 1);
    assert_eq!(r.action_set, ActionSet::new([a, b]));

    let r = restrict_actions(&set, &periods, 0);
    assert_eq!(r.action_set, set);
    assert_eq!(r.remap, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn replay_is_bounded_fifo(capacity in 1usize..40, pushes in 0usize..120) {
        let items = random_transitions(pushes as u64, pushes);
        let mut replay = ReplayMemory::new(capacity);
        for t in &items {
            replay.push(t.clone());
            prop_assert!(replay.len() <= capacity);
        }
        let kept: Vec<&Transition> = replay.iter().collect();
        let start = pushes.saturating_sub(capacity);
        prop_assert_eq!(kept.len(), pushes - start);
        for (k, t) in kept.iter().enumerate() {
            prop_assert_eq!(*t, &items[start + k]);
        }
        let mut rng = SimRng::seed_from_u64(pushes as u64);
        let sample = replay.sample(capacity, &mut rng);
        prop_assert_eq!(sample.len(), replay.len());
    }

    #[test]
    fn epsilon_stays_in_range(round in 0u64..10_000_000) {
        let e = EpsilonSchedule::default().epsilon(round);
        prop_assert!((0.05..=0.9).contains(&e));
    }
}
