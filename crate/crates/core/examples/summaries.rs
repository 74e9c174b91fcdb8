//! Empirical summaries of a clustered pattern next to their theoretical
//! counterparts.
//!
//! ```bash
//! cargo run --release --example summaries
//! ```

use std::sync::Arc;

use linnetcox::sim::{simulate_cox, CoxMode};
use linnetcox::summaries::{
    fgj_hat, g0_theoretical, g_hat, k_hat, k_theoretical, linspace, FgjConfig, IntensitySource,
    Kernel,
};
use linnetcox::templates::{make_network, DendriteSpec, Template};
use linnetcox::{CoxModel, IntensityModel};

fn main() -> linnetcox::Result<()> {
    let spec = DendriteSpec {
        main_length: Some(225.0),
        side_length: Some(652.0),
        side_branches: None,
    };
    let net = Arc::new(make_network(&Template::Dendrite(spec), 4)?);
    let model = CoxModel::new(IntensityModel::new(0.8, 1.2)?, 5.0, 0.1, 1)?;
    let x = simulate_cox(&net, &model, CoxMode::Exact, 12)?.pattern;
    let rho = model.x_intensity();
    println!("{} points", x.len());

    let r = linspace(0.0, 30.0, 7);
    let k = k_hat(&x, &rho, &r)?;
    let g = g_hat(&x, &rho, &r, Some(1.0), Kernel::Epanechnikov)?;
    let fgj = fgj_hat(
        &x,
        &FgjConfig {
            intensity: IntensitySource::Known(rho),
            ..Default::default()
        },
        &r,
    )?;
    let show = |v: Option<f64>| v.map_or("   -  ".to_string(), |v| format!("{v:6.3}"));

    println!("    r     K^    K      g^     g0     F^     G^     J^");
    for (i, &ri) in r.iter().enumerate() {
        println!(
            "{:5.1} {:6.2} {:6.2} {} {:6.3} {} {} {}",
            ri,
            k.value(i),
            k_theoretical(ri, &model),
            show(g.values[i]),
            g0_theoretical(ri, &model),
            show(fgj.f.values[i]),
            show(fgj.g.values[i]),
            show(fgj.j.values[i]),
        );
    }
    Ok(())
}
