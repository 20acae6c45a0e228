use egalitarian::argon2m::MemParams;
use egalitarian::costmodel::*;

const ORACLE: &str = include_str!("data/cost_oracle.csv");

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

#[test]
fn formulas_match_high_precision_oracle() {
    let table = TradeoffTable::published();
    let mut rows = 0;
    for line in ORACLE.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let num = |k: usize| f[k].parse::<f64>().unwrap();
        let p = CheatParams {
            alpha: num(0),
            epsilon: num(1),
            delta: num(2),
            beta: num(3),
            length: f[4].parse().unwrap(),
            difficulty: f[5].parse().unwrap(),
            blocks: f[6].parse().unwrap(),
            ratio: num(7),
        };
        let at = at_ratio(&p, &table).unwrap();
        let r = cheater_calls(&p, &table).unwrap();
        for (name, got, want) in [
            ("at_ratio", at, num(8)),
            ("calls", r.calls_cheater, num(9)),
            ("gamma", r.gamma, num(10)),
            ("report", r.at_ratio, num(11)),
        ] {
            assert!(rel_err(got, want) < 5e-11, "{name} on {line}: {got} vs {want}");
        }
        rows += 1;
    }
    assert_eq!(rows, 100);
}

#[test]
fn interpolated_penalties_respect_the_bandwidth_floor() {
    let table = TradeoffTable::published();
    for a in [0.9, 0.5, 0.4, 1.0 / 3.0, 0.3] {
        let (c, d) = interpolate_cd(&table, a).unwrap();
        assert!(bandwidth_depth_bound(c, 1.0, 4.0).unwrap() <= d, "{a}");
    }
}

#[test]
fn optimal_length_is_monotone_along_both_axes() {
    let grid = StrategyGrid::new(&TradeoffTable::published(), DEFAULT_BETA);
    let ratios = [0.1, 0.5, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0];
    let mut prev_row: Option<Vec<u32>> = None;
    for adv in [2.0, 3.0, 4.0, 8.0, 16.0, 32.0] {
        let row: Vec<u32> = ratios.iter().map(|&r| grid.optimal_length(r, adv).unwrap()).collect();
        assert!(row.windows(2).all(|w| w[0] <= w[1]), "{row:?}");
        if let Some(prev) = prev_row {
            assert!(prev.iter().zip(&row).all(|(a, b)| a >= b));
        }
        prev_row = Some(row);
    }
    let l10 = optimal_length(10.0, 8.0, &TradeoffTable::published()).unwrap();
    assert!(l10.abs_diff(71) <= 15);
}

#[test]
fn detection_experiment_agrees_with_gamma() {
    let mem = MemParams::new(512, 4, 1).unwrap();
    let r = simulate_detection(&mem, 0.125, 8, 400, 77).unwrap();
    let gamma = cheater_calls(
        &CheatParams { epsilon: 0.125, alpha: 0.875, ..CheatParams::honest(512, 8, 0) },
        &TradeoffTable::published(),
    )
    .unwrap()
    .gamma;
    assert!((r.escape_rate - gamma).abs() < 0.08, "{r:?} vs {gamma}");
}

#[test]
fn grinding_open_everything() {
    // With L = T the forged block is opened with probability 1 - (1-1/T)^T.
    let r = simulate_grinding(64, 64, 2, 2000, 0, 3).unwrap();
    assert!((r.expected_escape - 0.3649).abs() < 1e-3);
    assert!((r.naive_escape_rate - r.expected_escape).abs() < 0.04, "{r:?}");
}
