//! Reference games used throughout the tests, benches and CLI examples.

use super::game::PMGame;

const CLUB: [f64; 2] = [1.0, 0.0];
const HEART: [f64; 2] = [0.0, 1.0];

fn named(mut g: PMGame) -> PMGame {
    g.action_names = vec!["T".into(), "B".into()];
    g.outcome_names = vec!["L".into(), "M".into(), "R".into()];
    g.signal_names = vec!["club".into(), "heart".into()];
    g
}

fn signals() -> Vec<Vec<Vec<f64>>> {
    let row = vec![CLUB.to_vec(), CLUB.to_vec(), HEART.to_vec()];
    vec![row.clone(), row]
}

/// Matching pennies that the column player can force in the dark: `L` and `M` send the
/// same signal, `R` reveals itself.
///
/// |   | L       | M       | R      |
/// |---|---------|---------|--------|
/// | T | 1 / ♣   | −1 / ♣  | 2 / ♥  |
/// | B | −1 / ♣  | 1 / ♣   | 3 / ♥  |
pub fn dark_pennies() -> PMGame {
    let payoff = vec![
        vec![vec![1.0], vec![-1.0], vec![2.0]],
        vec![vec![-1.0], vec![1.0], vec![3.0]],
    ];
    named(PMGame::new(payoff, signals()).expect("fixture is well formed"))
}

/// Same signals as [`dark_pennies`] with payoffs in R^4 that make `m̄(·, ♣)` curved,
/// so no finite action decomposition exists.
pub fn counterexample_game() -> PMGame {
    let payoff = vec![
        vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![2.0, 0.0, 4.0, 0.0],
        ],
        vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 3.0, 0.0, 5.0],
        ],
    ];
    named(PMGame::new(payoff, signals()).expect("fixture is well formed"))
}

/// Two actions, two outcomes, full information: the signal reveals the outcome.
pub fn revealing_pennies() -> PMGame {
    let payoff = vec![vec![vec![1.0], vec![-1.0]], vec![vec![-1.0], vec![1.0]]];
    let law = vec![
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    ];
    PMGame::new(payoff, law).expect("fixture is well formed")
}

/// Label-efficient style game: action 0 observes the outcome, action 1 sees nothing.
/// `F` is a segment.
pub fn apple_tasting() -> PMGame {
    let payoff = vec![vec![vec![-1.0], vec![1.0]], vec![vec![0.0], vec![0.0]]];
    let law = vec![
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
    ];
    PMGame::new(payoff, law).expect("fixture is well formed")
}
