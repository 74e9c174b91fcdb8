//! Thinned Cox processes: exact mode evaluates the random field at the
//! candidate points, grid mode on a lattice.
//!
//! ```bash
//! cargo run --release --example simulate_cox
//! ```

use std::sync::Arc;

use linnetcox::rng::derive_seed;
use linnetcox::sim::{simulate_cox, CoxMode};
use linnetcox::templates::{make_network, DendriteSpec, Template};
use linnetcox::{CoxModel, IntensityModel};

fn main() -> linnetcox::Result<()> {
    let spec = DendriteSpec {
        main_length: Some(212.0),
        side_length: Some(202.0),
        side_branches: None,
    };
    let net = Arc::new(make_network(&Template::Dendrite(spec), 1)?);
    let model = CoxModel::new(IntensityModel::new(0.312, 0.463)?, 5.0, 0.1, 1)?;
    println!(
        "mean retention {:.4}, expected count {:.1}",
        model.mean_retention(),
        model.x_intensity().expected_count(&net)
    );

    for (name, mode) in [
        ("exact", CoxMode::Exact),
        ("grid", CoxMode::Grid { spacing: 1.0 }),
    ] {
        let counts: Vec<usize> = (0..200)
            .map(|i| simulate_cox(&net, &model, mode, derive_seed(9, i)).map(|s| s.pattern.len()))
            .collect::<linnetcox::Result<_>>()?;
        let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
        let var = counts
            .iter()
            .map(|&c| (c as f64 - mean).powi(2))
            .sum::<f64>()
            / (counts.len() - 1) as f64;
        println!("{name:>5}: mean count {mean:.1}, variance {var:.1} (overdispersed vs Poisson)");
    }

    let sim = simulate_cox(&net, &model, CoxMode::Grid { spacing: 1.0 }, 3)?;
    let (sites, pi) = sim.pi_grid.expect("grid mode keeps the field");
    let low = pi.iter().filter(|&&p| p < 0.1).count();
    println!(
        "{} of {} candidates kept; retention below 0.1 at {low} of {} lattice sites",
        sim.pattern.len(),
        sim.driving.len(),
        sites.len()
    );
    Ok(())
}
