//! Distances, erosion, sphere counts and chain merging on a small tree.
//!
//! ```bash
//! cargo run --example network_geometry
//! ```

use linnetcox::network::EdgeSpec;
use linnetcox::network::{erode, simplify_tree, sphere_count, Vertex};
use linnetcox::{Branch, LinearNetwork};

fn main() -> linnetcox::Result<()> {
    // a Y junction at vertex 1, with the main branch split at vertex 4
    let vertices = (0..5)
        .map(|id| Vertex {
            id,
            x: None,
            y: None,
        })
        .collect();
    let edge = |id, from, to, length, branch| EdgeSpec {
        id,
        from,
        to,
        length,
        branch,
    };
    let net = LinearNetwork::new(
        vertices,
        vec![
            edge(0, 0, 4, 3.0, Branch::Main),
            edge(1, 4, 1, 3.0, Branch::Main),
            edge(2, 1, 2, 4.0, Branch::Main),
            edge(3, 1, 3, 5.0, Branch::Side),
        ],
    )?;
    println!("{net:?}");

    let u = net.point(0, 1.0)?;
    let v = net.point(3, 2.5)?;
    println!("d(u, v) = {}", net.distance(&u, &v));
    println!(
        "distance from u to the nearest leaf = {}",
        net.leaf_distance(&u)
    );
    println!("eccentricity of u = {}", net.eccentricity(&u));

    let junction = net.vertex_point(1);
    for t in [1.0, 4.5, 6.0, 9.0] {
        println!(
            "points at distance {t} from the junction: {}",
            sphere_count(&net, &junction, t)?
        );
    }

    for r in [0.0, 2.0, 4.0] {
        println!(
            "eroded network L(-{r}) has length {}",
            erode(&net, r).measure()
        );
    }

    let s = simplify_tree(&net)?;
    println!(
        "merging degree-2 chains: {} edges -> {} edges, u now at {:?}",
        net.num_edges(),
        s.network.num_edges(),
        s.map_point(&u, &net)
    );
    Ok(())
}
