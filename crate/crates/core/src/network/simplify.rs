//! Merging of degree-2 chains in trees.

use super::{Branch, EdgeSpec, LinearNetwork, NetworkPoint};
use crate::error::{Error, Result};

/// Where an edge of the original network ended up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeMapping {
    /// Index of the merged edge in the simplified network.
    pub edge: usize,
    /// Offset on the merged edge at which this edge starts.
    pub start: f64,
    /// True if this edge runs against the merged edge's direction.
    pub reversed: bool,
}

/// A simplified network plus the map from old edges to merged edges.
#[derive(Debug, Clone)]
pub struct Simplified {
    pub network: LinearNetwork,
    pub edge_map: Vec<EdgeMapping>,
}

impl Simplified {
    /// Expresses a point of the original network on the simplified one.
    pub fn map_point(&self, p: &NetworkPoint, original: &LinearNetwork) -> NetworkPoint {
        let m = self.edge_map[p.edge];
        let len = original.edge(p.edge).length;
        let along = if m.reversed { len - p.offset } else { p.offset };
        self.network
            .point(m.edge, m.start + along)
            .expect("mapped offset lies within the merged edge")
    }
}

/// Replaces every maximal chain of same-label edges joined by degree-2
/// vertices with a single edge of the chain's total length.
///
/// A degree-2 vertex whose two edges carry different branch labels is kept,
/// splitting the chain there. Surviving vertices keep their ids; a merged
/// edge takes the smallest id of the edges it replaces.
pub fn simplify_tree(net: &LinearNetwork) -> Result<Simplified> {
    if !net.is_tree() {
        return Err(Error::NotATree);
    }
    let nv = net.num_vertices();
    let removable: Vec<bool> = (0..nv)
        .map(|v| {
            let inc = net.incident(v);
            inc.len() == 2 && net.edge(inc[0].0).branch == net.edge(inc[1].0).branch
        })
        .collect();

    let mut edge_map: Vec<Option<EdgeMapping>> = vec![None; net.num_edges()];
    // (from vertex, to vertex, length, branch, min id, old edges)
    let mut chains: Vec<(usize, usize, f64, Branch, u64, Vec<usize>)> = Vec::new();

    for start in (0..nv).filter(|&v| !removable[v]) {
        for &(first, _) in net.incident(start) {
            if edge_map[first].is_some() {
                continue;
            }
            let mut cur = start;
            let mut edge = first;
            let mut acc = 0.0;
            let mut members = Vec::new();
            let chain_index = chains.len();
            loop {
                let e = net.edge(edge);
                let reversed = e.from != cur;
                edge_map[edge] = Some(EdgeMapping {
                    edge: chain_index,
                    start: acc,
                    reversed,
                });
                members.push(edge);
                acc += e.length;
                let next = if reversed { e.from } else { e.to };
                if !removable[next] {
                    cur = next;
                    break;
                }
                let &(other, _) = net
                    .incident(next)
                    .iter()
                    .find(|&&(x, _)| x != edge)
                    .expect("degree-2 vertex has a second edge");
                cur = next;
                edge = other;
            }
            let min_id = members.iter().map(|&i| net.edge(i).id).min().unwrap();
            chains.push((start, cur, acc, net.edge(first).branch, min_id, members));
        }
    }

    let mut new_vertices = Vec::new();
    let mut new_index = vec![usize::MAX; nv];
    for v in (0..nv).filter(|&v| !removable[v]) {
        new_index[v] = new_vertices.len();
        new_vertices.push(net.vertices()[v].clone());
    }
    let specs: Vec<EdgeSpec> = chains
        .iter()
        .map(|(a, b, len, branch, id, _)| EdgeSpec {
            id: *id,
            from: net.vertices()[*a].id,
            to: net.vertices()[*b].id,
            length: *len,
            branch: *branch,
        })
        .collect();
    let network = LinearNetwork::new(new_vertices, specs)?;

    // LinearNetwork::new sorts edges by id; translate chain indices.
    let chain_to_edge: Vec<usize> = chains
        .iter()
        .map(|c| network.edge_by_id(c.4).expect("merged edge present"))
        .collect();
    let edge_map = edge_map
        .into_iter()
        .map(|m| {
            let mut m = m.expect("every edge belongs to a chain");
            m.edge = chain_to_edge[m.edge];
            m
        })
        .collect();
    Ok(Simplified { network, edge_map })
}

#[cfg(test)]
mod tests {
    use super::super::test_nets::*;
    use super::*;

    #[test]
    fn path_collapses() {
        let net = LinearNetwork::new(
            vertices(3),
            vec![
                spec(0, 0, 1, 2.0, Branch::Main),
                spec(1, 1, 2, 3.0, Branch::Main),
            ],
        )
        .unwrap();
        let s = simplify_tree(&net).unwrap();
        assert_eq!(s.network.num_edges(), 1);
        assert_eq!(s.network.num_vertices(), 2);
        assert_eq!(s.network.edge(0).length, 5.0);
        let p = net.point(1, 1.0).unwrap();
        assert_eq!(s.map_point(&p, &net).offset, 3.0);
    }

    #[test]
    fn no_degree_two_is_identity() {
        let net = y_tree();
        let s = simplify_tree(&net).unwrap();
        assert_eq!(s.network, net);
    }

    #[test]
    fn label_boundary_is_kept() {
        let net = LinearNetwork::new(
            vertices(3),
            vec![
                spec(0, 0, 1, 2.0, Branch::Main),
                spec(1, 1, 2, 3.0, Branch::Side),
            ],
        )
        .unwrap();
        let s = simplify_tree(&net).unwrap();
        assert_eq!(s.network.num_edges(), 2);
    }

    #[test]
    fn reversed_edges_map_correctly() {
        // 0 -(2)-> 1 <-(3)- 2 : second edge points into the junction
        let net = LinearNetwork::new(
            vertices(3),
            vec![
                spec(0, 0, 1, 2.0, Branch::Main),
                spec(1, 2, 1, 3.0, Branch::Main),
            ],
        )
        .unwrap();
        let s = simplify_tree(&net).unwrap();
        let p = net.point(1, 1.0).unwrap(); // 1 from vertex 2, i.e. 4 from vertex 0
        let q = s.map_point(&p, &net);
        let v0 = s.network.vertex_point(0);
        assert!((s.network.distance(&q, &v0) - 4.0).abs() < 1e-12);
    }
}
