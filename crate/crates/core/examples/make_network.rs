//! Synthetic networks from the built-in templates, saved as JSON.
//!
//! ```bash
//! cargo run --example make_network -- /tmp/dendrite.json
//! ```

use linnetcox::io::{network_from_json, network_to_json, save_network};
use linnetcox::templates::{make_network, DendriteSpec, Template};
use linnetcox::Branch;

fn main() -> linnetcox::Result<()> {
    let templates = [
        ("path", Template::Path { length: 100.0 }),
        (
            "star",
            Template::Star {
                arms: 4,
                arm_length: 25.0,
            },
        ),
        (
            "random tree",
            Template::RandomTree {
                edges: 40,
                min_length: 2.0,
                max_length: 8.0,
            },
        ),
        (
            "dendrite",
            Template::Dendrite(DendriteSpec {
                main_length: Some(212.0),
                side_length: Some(202.0),
                side_branches: None,
            }),
        ),
    ];
    for (name, t) in &templates {
        let net = make_network(t, 7)?;
        println!(
            "{name:>12}: {:3} edges, |L_m| = {:7.2}, |L_s| = {:7.2}",
            net.num_edges(),
            net.branch_length(Branch::Main),
            net.branch_length(Branch::Side)
        );
    }

    let net = make_network(&templates[3].1, 7)?;
    let json = network_to_json(&net);
    assert_eq!(network_from_json(&json)?, net);
    if let Some(path) = std::env::args().nth(1) {
        save_network(&net, path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
