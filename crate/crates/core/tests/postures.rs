use exswarm_core::competence::{GoalSpec, Metric, ResourceLedger, Situation};
use exswarm_core::geom::Vec2;
use exswarm_core::rng::{stream, StreamPurpose, StreamRng};
use exswarm_core::scenario::HUMAN_ID;
use exswarm_core::swarm::{communication_graph, PostureCommand, SwarmConfig, SwarmRobotPolicy};
use exswarm_core::world::{run_episode, AgentBody, AgentId, AgentKind, Arena, PolicySet, Scenario, StateRecord, WorldState};
use rand::Rng;

/// Random start inside `spread` of the human, redrawn until the
/// communication graph is connected: a robot that hears nobody cannot
/// learn where the human is.
fn swarm_around_human(config: &SwarmConfig, spread: f64, seed: u64) -> Scenario {
    let mut rng = stream(seed, StreamPurpose::Scenario);
    loop {
        let s = draw(config, spread, &mut rng);
        let g = communication_graph(&s.bodies, config.comm_radius);
        if g.hops_from(HUMAN_ID).len() == s.bodies.len() {
            return s;
        }
    }
}

fn draw(config: &SwarmConfig, spread: f64, rng: &mut StreamRng) -> Scenario {
    let world = WorldState::new(Arena::new(60.0, 60.0));
    let center = world.arena.center();
    let mut human = AgentBody::new(HUMAN_ID, AgentKind::Human, center);
    human.comm_radius = config.comm_radius;
    let mut bodies = vec![human];
    for i in 1..=config.n_robots as u32 {
        let p = center + Vec2::from_angle(rng.random_range(0.0..6.3)) * (spread * rng.random::<f64>().sqrt());
        let mut b = AgentBody::new(AgentId(i), AgentKind::Robot, p);
        b.comm_radius = config.comm_radius;
        b.max_speed = config.max_speed;
        bodies.push(b);
    }
    Scenario::new(world, bodies).unwrap()
}

fn run(config: &SwarmConfig, scenario: &Scenario, posture: PostureCommand, steps: u64) -> Vec<StateRecord> {
    let mut policies = PolicySet::new();
    for i in 1..=config.n_robots as u32 {
        policies.insert(AgentId(i), Box::new(SwarmRobotPolicy::new(config.clone(), posture)));
    }
    // Unreachable goal so the episode runs the full budget.
    let goal = GoalSpec::new("none", Metric::DiscoveredCount, 5.0, 5.0).unwrap();
    let limits = ResourceLedger::new(steps, 1e9, 1_000_000);
    run_episode(scenario, &Situation::default(), policies, &goal, &limits, 1)
        .unwrap()
        .states
}

fn mean_to_human(s: &StateRecord) -> f64 {
    let h = s.bodies[0].position;
    let robots = &s.bodies[1..];
    robots.iter().map(|b| b.position.distance(h)).sum::<f64>() / robots.len() as f64
}

fn mean_pairwise(s: &StateRecord) -> f64 {
    let robots = &s.bodies[1..];
    let mut sum = 0.0;
    let mut k = 0;
    for (i, a) in robots.iter().enumerate() {
        for b in &robots[i + 1..] {
            sum += a.position.distance(b.position);
            k += 1;
        }
    }
    sum / k as f64
}

#[test]
fn contract_gathers_around_human() {
    for n in [8, 20] {
        let config = SwarmConfig {
            n_robots: n,
            ..SwarmConfig::default()
        };
        for seed in 1..=5 {
            let states = run(&config, &swarm_around_human(&config, 10.0, seed), PostureCommand::Contract, 200);
            let (d0, d200) = (mean_to_human(&states[0]), mean_to_human(&states[200]));
            assert!(d200 < d0, "n {n} seed {seed}: {d0} -> {d200}");
            assert!(d200 <= 2.0 * config.separation_distance, "n {n} seed {seed}: {d200}");
        }
    }
}

#[test]
fn disperse_spreads_a_cluster() {
    let config = SwarmConfig::default();
    for seed in [1, 2, 3] {
        let states = run(&config, &swarm_around_human(&config, 1.0, seed), PostureCommand::Disperse, 200);
        let (p0, p200) = (mean_pairwise(&states[0]), mean_pairwise(&states[200]));
        assert!(p200 > p0, "seed {seed}: {p0} -> {p200}");
    }
}

#[test]
fn hold_keeps_everyone_in_place() {
    let config = SwarmConfig::default();
    let scenario = swarm_around_human(&config, 5.0, 9);
    let states = run(&config, &scenario, PostureCommand::Hold, 50);
    for (a, b) in states[0].bodies.iter().zip(&states[50].bodies) {
        assert_eq!(a.position, b.position);
    }
}

