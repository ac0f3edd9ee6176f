use qmetric::algorithms::vtde;
use qmetric::optim::OptimConfig;
use qmetric::states::{apply_channel, density_from_vector, ghz, ChannelSpec};

fn main() {
    let rho = density_from_vector(&ghz(4));
    let sigma = apply_channel(&rho, &ChannelSpec::depolarizing(0.5).unwrap());
    let target = 15.0 * 0.5 / 16.0;
    // expressivity ceiling: aggressive optimization per depth
    for depth in [4usize, 6, 8, 12] {
        let opt = OptimConfig {
            iterations: 3000,
            learning_rate: 0.1,
            restarts: 2,
            ..OptimConfig::vtde_default().with_seed(5)
        };
        let t0 = std::time::Instant::now();
        let res = vtde(&rho, &sigma, depth, &opt).unwrap();
        println!(
            "CEILING depth {depth}: {:.6} / {target:.5} (ratio {:.4}) [{:.0}s]",
            res.estimate,
            res.estimate / target,
            t0.elapsed().as_secs_f64()
        );
    }
}
