//! Inhomogeneous Poisson patterns with one rate per branch, and Matérn
//! type-I thinning of them.
//!
//! ```bash
//! cargo run --release --example simulate_poisson
//! ```

use std::sync::Arc;

use linnetcox::rng::derive_seed;
use linnetcox::sim::{matern_thin, simulate_poisson};
use linnetcox::summaries::fit_intensity_mle;
use linnetcox::templates::{make_network, DendriteSpec, Template};
use linnetcox::{Branch, IntensityModel};

fn main() -> linnetcox::Result<()> {
    let net = Arc::new(make_network(
        &Template::Dendrite(DendriteSpec::default()),
        1,
    )?);
    let rho = IntensityModel::new(0.240, 0.356)?;
    println!("expected count {:.1}", rho.expected_count(&net));

    for rep in 0..5 {
        let x = simulate_poisson(&net, &rho, derive_seed(2024, rep));
        let fit = fit_intensity_mle(&x)?;
        let hard = matern_thin(&x, 1.0)?;
        println!(
            "rep {rep}: {:3} points ({:2} main, {:3} side), MLE ({:.3}, {:.3}), {} survive a 1 um hard core",
            x.len(),
            x.count_on(Branch::Main),
            x.count_on(Branch::Side),
            fit.main,
            fit.side,
            hard.len()
        );
    }
    Ok(())
}
