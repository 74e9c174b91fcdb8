//! Global rank envelope tests of a Poisson null against clustered data.
//!
//! ```bash
//! cargo run --release --example envelope_test
//! ```

use std::sync::Arc;

use linnetcox::envelopes::{envelope_pipeline, NullModel, PipelineConfig, TestFunction};
use linnetcox::sim::{simulate_cox, simulate_poisson, CoxMode};
use linnetcox::summaries::{linspace, plug_in_intensity};
use linnetcox::templates::{make_network, DendriteSpec, Template};
use linnetcox::{CoxModel, IntensityModel};

fn main() -> linnetcox::Result<()> {
    let spec = DendriteSpec {
        main_length: Some(212.0),
        side_length: Some(202.0),
        side_branches: None,
    };
    let net = Arc::new(make_network(&Template::Dendrite(spec), 1)?);
    let cox = CoxModel::new(IntensityModel::new(0.8, 1.2)?, 5.0, 0.1, 1)?;
    let clustered = simulate_cox(&net, &cox, CoxMode::Exact, 4)?.pattern;
    let random = simulate_poisson(&net, &cox.x_intensity(), 4);

    for (label, x) in [("Poisson data", &random), ("Cox data", &clustered)] {
        let null = NullModel::Poisson(plug_in_intensity(x));
        for test in [TestFunction::K, TestFunction::Fgj] {
            let cfg = PipelineConfig {
                test,
                sims: 199,
                rgrid: Some(linspace(0.0, 20.0, 41)),
                seed: 8,
                ..Default::default()
            };
            let out = envelope_pipeline(x, &null, &cfg)?;
            let res = &out.result;
            println!(
                "{label:>12}, {test:?}: p in [{:.3}, {:.3}], reject at 5%: {}",
                res.p_liberal,
                res.p_conservative,
                res.rejects()
            );
        }
    }
    Ok(())
}
