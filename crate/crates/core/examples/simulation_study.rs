//! A small seeded simulation study comparing estimators, driven by a TOML
//! design.
//!
//! ```bash
//! cargo run --release --example simulation_study
//! ```

use std::sync::Arc;

use linnetcox::estimation::{simulation_study, SimulationDesign};
use linnetcox::templates::{make_network, DendriteSpec, Template};

const DESIGN: &str = r#"
[[run]]
id = 1
sigma2 = 5.0
beta = 0.1
rho_y = [0.8, 1.2]
r_u = 30.0

[[run]]
id = 2
sigma2 = 1.0
beta = 0.5
rho_y = [0.8, 1.2]
r_u = 30.0
methods = ["mce-g", "mce-k", "cl2-indicator"]
"#;

fn main() -> linnetcox::Result<()> {
    let spec = DendriteSpec {
        main_length: Some(225.0),
        side_length: Some(652.0),
        side_branches: None,
    };
    let net = Arc::new(make_network(&Template::Dendrite(spec), 4)?);
    let design = SimulationDesign::from_toml(DESIGN)?;
    let table = simulation_study(&net, &design, 20, 1)?;
    println!("{} fits", table.rows.len());
    for s in &table.summaries {
        println!("{s:?}");
    }
    Ok(())
}
