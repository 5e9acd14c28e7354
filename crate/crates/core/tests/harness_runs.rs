use std::path::PathBuf;

use approachkit::blackwell::uniform_rate_bound;
use approachkit::harness::{run_experiment, ExperimentConfig, Mode, TrajectoryRecord};
use approachkit::partial_monitoring::GameSpec;
use approachkit::robust::robust_rate_bound;

fn spec(name: &str) -> GameSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../games").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run(mode: Mode, game: &str, opponent: &str, horizon: usize, seed: u64) -> Vec<TrajectoryRecord> {
    let mut c = ExperimentConfig::new(mode, spec(game), opponent.parse().unwrap());
    c.horizon = horizon;
    c.seed = seed;
    run_experiment(&c).unwrap()
}

#[test]
fn full_monitoring_rows_stay_under_the_uniform_bound() {
    let game = spec("matching_pennies.json").to_game().unwrap();
    for opponent in ["adaptive:0.1", "cyclic:0,0,1", "fixed:0.3,0.7"] {
        let rows = run(Mode::Approach, "matching_pennies.json", opponent, 10_000, 3);
        assert_eq!(rows.len(), 10_000);
        for r in &rows {
            let d = r.distance.unwrap();
            assert!(d <= uniform_rate_bound(r.t, game.bound()) + 1e-7, "{opponent}: t = {} distance {d}", r.t);
        }
    }
}

#[test]
fn robust_rows_stay_under_the_set_valued_bound() {
    let s = spec("interval_game.json");
    let bound = s
        .payoff_sets
        .as_ref()
        .unwrap()
        .iter()
        .flatten()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let rows = run(Mode::Robust, "interval_game.json", "adaptive:0.1", 5_000, 11);
    for r in &rows {
        let d = r.distance.unwrap();
        assert!(d <= robust_rate_bound(r.t, bound, 2, 2) + 1e-7, "t = {} distance {d}", r.t);
    }
}

#[test]
fn block_rows_carry_schedule_columns() {
    let rows = run(Mode::PmApproach, "dark_pennies.json", "fixed:0.5,0.5,0", 20_000, 5);
    let last = rows.last().unwrap();
    assert_eq!(last.t, 20_000);
    assert!(rows.iter().all(|r| r.l_n.is_some() && r.gamma_n.is_some() && r.block.is_some()));
    assert!(rows.windows(2).all(|w| w[0].t < w[1].t));
    assert!(last.distance.unwrap() < 0.05);
}

#[test]
fn swap_regret_shrinks_with_the_horizon() {
    let end = |t: usize| {
        let mut v: Vec<f64> = (0..5)
            .map(|seed| run(Mode::SwapRegret, "dark_pennies.json", "fixed:0.2,0,0.8", t, seed))
            .map(|rows| rows.last().unwrap().regret.unwrap())
            .collect();
        v.sort_by(f64::total_cmp);
        v[2]
    };
    let (short, long) = (end(1_000), end(30_000));
    assert!(long < short, "median swap regret {short} -> {long}");
}

#[test]
fn calibration_scores_are_small_against_a_cycle() {
    let rows = run(Mode::Calibrate, "matching_pennies.json", "cyclic:0,0,1", 5_000, 2);
    let last = rows.last().unwrap().calibration_score.unwrap();
    assert!(rows.iter().all(|r| r.calibration_score.unwrap() <= 2.0));
    assert!(last < 0.1, "score {last}");
}
