//! Heat-kernel intensity estimate along the network.
//!
//! ```bash
//! cargo run --release --example kernel_intensity
//! ```

use std::sync::Arc;

use linnetcox::sim::simulate_poisson;
use linnetcox::summaries::kernel_intensity;
use linnetcox::templates::{make_network, Template};
use linnetcox::IntensityModel;

fn main() -> linnetcox::Result<()> {
    let net = Arc::new(make_network(
        &Template::Star {
            arms: 3,
            arm_length: 40.0,
        },
        0,
    )?);
    let x = simulate_poisson(&net, &IntensityModel::homogeneous(0.5), 5);
    let est = kernel_intensity(&x, 5.0, None)?;
    println!(
        "{} points, estimate integrates to {:.3}",
        x.len(),
        est.integral()
    );
    for (e, curve) in est.edges.iter().enumerate() {
        let line: Vec<String> = curve
            .values
            .iter()
            .step_by(curve.len() / 8)
            .map(|v| format!("{:.2}", v.unwrap_or(f64::NAN)))
            .collect();
        println!("arm {e}: {}", line.join(" "));
    }
    Ok(())
}
