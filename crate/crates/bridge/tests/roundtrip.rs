mod common;

use exswarm_bridge::protocol::{EpisodeStatus, GoalStatus, Pose, RobotView};
use exswarm_bridge::{decode_snapshot, encode_snapshot, OperatorMessage, Session, Snapshot};
use exswarm_core::competence::ResourceLedger;
use exswarm_core::geom::Vec2;
use exswarm_core::swarm::PostureCommand;
use proptest::prelude::*;

fn vec2() -> impl Strategy<Value = Vec2> {
    (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(x, y)| Vec2::new(x, y))
}

fn robot() -> impl Strategy<Value = RobotView> {
    (any::<u32>(), vec2(), -4.0f64..4.0, 0.0f64..=1.0, proptest::option::of(vec2())).prop_map(
        |(id, position, heading, f, direction)| RobotView {
            id,
            position,
            heading,
            f,
            direction,
        },
    )
}

fn posture() -> impl Strategy<Value = PostureCommand> {
    prop_oneof![
        Just(PostureCommand::Contract),
        Just(PostureCommand::Disperse),
        Just(PostureCommand::Hold),
        Just(PostureCommand::FollowGradient),
        (-4.0f64..4.0, 0.0f64..50.0).prop_map(|(bearing, length)| PostureCommand::ExtendLimb { bearing, length }),
    ]
}

fn status() -> impl Strategy<Value = EpisodeStatus> {
    prop_oneof![
        Just(EpisodeStatus::Running),
        Just(EpisodeStatus::GoalReached),
        Just(EpisodeStatus::BudgetExhausted),
        Just(EpisodeStatus::Aborted),
    ]
}

prop_compose! {
    fn snapshot()(
        tick in any::<u64>(),
        time in any::<u64>(),
        paused in any::<bool>(),
        human in proptest::option::of((vec2(), -4.0f64..4.0)),
        robots in proptest::collection::vec(robot(), 0..40),
        discovered in proptest::collection::vec(vec2(), 0..5),
        posture in proptest::option::of(posture()),
        steps in any::<u64>(), distance in 0.0f64..1e7, messages in any::<u64>(),
        status in status(), metric_value in -1e3f64..1e3,
    ) -> Snapshot {
        Snapshot {
            tick,
            time,
            paused,
            human: human.map(|(position, heading)| Pose { position, heading }),
            robots,
            discovered,
            posture,
            resources: ResourceLedger::new(steps, distance, messages),
            goal: GoalStatus { status, metric_value },
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn snapshots_survive_the_wire(s in snapshot()) {
        let text = encode_snapshot(&s);
        prop_assert_eq!(decode_snapshot(&text).unwrap(), s);
    }
}

#[test]
fn live_snapshots_survive_the_wire() {
    let mut session = Session::new(common::setup(30, 2)).unwrap();
    session
        .submit(OperatorMessage::Posture { command: PostureCommand::Disperse })
        .unwrap();
    for _ in 0..1000 {
        let s = session.advance().unwrap();
        assert_eq!(decode_snapshot(&encode_snapshot(&s)).unwrap(), s);
    }
}
