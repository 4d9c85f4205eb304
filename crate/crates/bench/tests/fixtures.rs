use ehtx_bench::{example_channel, example_circuit, example_profile, spread_channels};

#[test]
fn fixtures_are_the_worked_example() {
    let sol = ehtx::solve_offline(&example_profile(), &example_channel(), &example_circuit()).unwrap();
    assert!((sol.throughput / 1e6 - 63.14).abs() < 0.02);
}

#[test]
fn spread_channels_are_ordered() {
    let m = spread_channels(8);
    assert_eq!(m.num_channels(), 8);
    assert!(m.gains().windows(2).all(|w| w[0] > w[1]));
}
