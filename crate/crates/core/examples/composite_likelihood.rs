//! Second-order composite likelihood: the score, the estimating equation
//! and the direct likelihood maximum.
//!
//! ```bash
//! cargo run --release --example composite_likelihood
//! ```

use std::sync::Arc;

use linnetcox::estimation::{
    cl2_fit, Cl2Config, Cl2Objective, Cl2Problem, SearchStrategy, WeightKind,
};
use linnetcox::sim::{simulate_cox, CoxMode};
use linnetcox::templates::{make_network, DendriteSpec, Template};
use linnetcox::{CoxModel, IntensityModel};

fn main() -> linnetcox::Result<()> {
    let spec = DendriteSpec {
        main_length: Some(225.0),
        side_length: Some(652.0),
        side_branches: None,
    };
    let net = Arc::new(make_network(&Template::Dendrite(spec), 4)?);
    let truth = CoxModel::new(IntensityModel::new(0.8, 1.2)?, 5.0, 0.1, 1)?;
    let x = simulate_cox(&net, &truth, CoxMode::Exact, 30)?.pattern;

    let adaptive = Cl2Config {
        weight: WeightKind::AdaptiveIndicator { eps: 0.05 },
        ..Default::default()
    };
    let problem = Cl2Problem::new(&x, 1, &adaptive)?;
    for (s2, b) in [(5.0, 0.1), (2.0, 0.1), (5.0, 0.3)] {
        let s = problem.score(s2, b)?;
        println!("score at ({s2}, {b}) = ({:.2}, {:.2})", s[0], s[1]);
    }

    let grid = Cl2Config {
        search: SearchStrategy::Grid {
            n: 30,
            sigma2: (1.0, 15.0),
            beta: (0.02, 0.5),
        },
        ..adaptive
    };
    let fit = cl2_fit(&x, 1, &grid)?;
    println!(
        "score length on a grid: sigma2 = {:.3}, beta = {:.4}, on grid edge: {}",
        fit.sigma2, fit.beta, fit.on_boundary
    );

    let fixed = Cl2Config {
        weight: WeightKind::Fixed { r0: 30.0 },
        objective: Cl2Objective::Likelihood,
        ..Default::default()
    };
    let fit = cl2_fit(&x, 1, &fixed)?;
    println!(
        "likelihood maximum, fixed range 30: sigma2 = {:.3}, beta = {:.4}, |score| = {:.2e}",
        fit.sigma2, fit.beta, fit.score_norm
    );
    Ok(())
}
