use std::time::Instant;

use oncosim::agents::{Agent, DqnAgent, StateEncoder};
use oncosim::data_pipeline::{Demographics, DrugCombination, EmpiricalDemographics};
use oncosim::mdp_env::{ActionSet, Dynamics, Environment, HealthState, PatientState, PinnedDynamics};
use oncosim::rng::{stream, Purpose};
use oncosim::trainer::{train, AgentKind, MemorySink, TrainConfig};
use rand::Rng;

fn sanity_env() -> Environment {
    let a = DrugCombination::new(["drug_a"]);
    let b = DrugCombination::new(["drug_b"]);
    let dynamics = PinnedDynamics::constant(0.5, 0.0)
        .with_action(a.clone(), 1.0 / 24.0, 0.0)
        .with_action(b.clone(), 1.0 / 6.0, 0.0);
    Environment::new(
        Dynamics::Pinned(dynamics),
        ActionSet::new([a, b]),
        EmpiricalDemographics::point_mass(&Demographics {
            age: 60,
            race: "White".into(),
            stage: "Stage III".into(),
            grade: "G3".into(),
        }),
    )
}

#[test]
fn greedy_policy_prefers_the_longer_survival_action() {
    let env = sanity_env();
    let config = TrainConfig {
        rounds: 5000,
        seed: 11,
        agent: AgentKind::Dqn,
        checkpoint_period: 0,
        checkpoint_replay: false,
        ..TrainConfig::default()
    };
    let encoder = StateEncoder::new(&env.action_set, &env.demographics);
    let agent = DqnAgent::new(config.dqn, encoder, env.action_set.clone(), &mut stream(11, Purpose::Init, 0));
    let start = Instant::now();
    let mut sink = MemorySink::default();
    let ckpt = train(config, &env, Agent::Dqn(Box::new(agent)), &mut sink).unwrap();
    println!("trained in {:?}", start.elapsed());
    let agent = ckpt.agent.restore(&ckpt.action_set).unwrap();
    let dqn = agent.as_dqn().unwrap();

    let mut rng = stream(99, Purpose::Evaluate, 0);
    let mut chose_a = 0;
    for _ in 0..1000 {
        let moc = rng.random_range(1..=24);
        let state = PatientState {
            health: HealthState::NeedsTreatment,
            months_since_start: rng.random_range(moc..=60),
            months_on_current: moc,
            prior_lines: rng.random_range(0..4),
            current_combination: env.action_set.combination(rng.random_range(0..3)).clone(),
            demographics: env.demographics.sample(&mut rng),
        };
        if dqn.greedy(&state, &[1, 2]).unwrap() == 1 {
            chose_a += 1;
        }
    }
    println!("chose A in {chose_a}/1000 probes");
    assert!(chose_a >= 950);
}
