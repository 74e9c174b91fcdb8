//! Synthetic labelled trees: paths, stars, random trees and dendrites.

use rand::Rng;

use crate::error::{Error, Result};
use crate::network::{Branch, EdgeSpec, LinearNetwork, Vertex};
use crate::rng;

/// Size knobs of the dendrite template. Unset lengths are drawn uniformly
/// from `[178, 286]` (main) and `[202, 652]` (side) µm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DendriteSpec {
    pub main_length: Option<f64>,
    pub side_length: Option<f64>,
    /// Number of side subtrees attached to the main chain.
    pub side_branches: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Template {
    /// A single main edge.
    Path { length: f64 },
    /// Arms from a centre; the first two form the main chain.
    Star { arms: usize, arm_length: f64 },
    /// Uniform random attachment with lengths uniform on `[min_length,
    /// max_length]`; a longest path is the main chain.
    RandomTree {
        edges: usize,
        min_length: f64,
        max_length: f64,
    },
    /// A main chain with side subtrees, some of which fork once.
    Dendrite(DendriteSpec),
}

struct Builder {
    vertices: Vec<Vertex>,
    edges: Vec<EdgeSpec>,
}

impl Builder {
    fn new() -> Self {
        Self {
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn vertex(&mut self, x: f64, y: f64) -> u64 {
        let id = self.vertices.len() as u64;
        self.vertices.push(Vertex {
            id,
            x: Some(x),
            y: Some(y),
        });
        id
    }

    fn edge(&mut self, from: u64, to: u64, length: f64, branch: Branch) {
        let id = self.edges.len() as u64;
        self.edges.push(EdgeSpec {
            id,
            from,
            to,
            length,
            branch,
        });
    }

    fn position(&self, v: u64) -> (f64, f64) {
        let v = &self.vertices[v as usize];
        (v.x.unwrap_or(0.0), v.y.unwrap_or(0.0))
    }

    /// New vertex at `length` from `from` in direction `angle`.
    fn grow(&mut self, from: u64, angle: f64, length: f64, branch: Branch) -> u64 {
        let (x, y) = self.position(from);
        let v = self.vertex(x + length * angle.cos(), y + length * angle.sin());
        self.edge(from, v, length, branch);
        v
    }

    fn build(self) -> Result<LinearNetwork> {
        LinearNetwork::new(self.vertices, self.edges)
    }
}

fn positive(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be positive, got {x}"
        )))
    }
}

/// Builds a network from a template, deterministic in `seed`.
pub fn make_network(template: &Template, seed: u64) -> Result<LinearNetwork> {
    let mut rng = rng::rng(seed);
    match *template {
        Template::Path { length } => {
            let mut b = Builder::new();
            let o = b.vertex(0.0, 0.0);
            b.grow(o, 0.0, positive(length, "length")?, Branch::Main);
            b.build()
        }
        Template::Star { arms, arm_length } => {
            if arms < 2 {
                return Err(Error::InvalidParameter(
                    "a star needs at least two arms".into(),
                ));
            }
            positive(arm_length, "arm length")?;
            let mut b = Builder::new();
            let o = b.vertex(0.0, 0.0);
            for a in 0..arms {
                let branch = if a < 2 { Branch::Main } else { Branch::Side };
                let angle = std::f64::consts::PI * (a as f64 + if a < 2 { 0.0 } else { 0.5 })
                    / if a < 2 { 1.0 } else { (arms - 1) as f64 };
                b.grow(o, angle, arm_length, branch);
            }
            b.build()
        }
        Template::RandomTree {
            edges,
            min_length,
            max_length,
        } => {
            if edges == 0 {
                return Err(Error::InvalidParameter(
                    "a random tree needs at least one edge".into(),
                ));
            }
            positive(min_length, "minimum length")?;
            if !(max_length >= min_length) {
                return Err(Error::InvalidParameter(format!(
                    "need min_length <= max_length, got {min_length} > {max_length}"
                )));
            }
            random_tree(edges, min_length, max_length, &mut rng)
        }
        Template::Dendrite(spec) => dendrite(&spec, &mut rng),
    }
}

fn random_tree(edges: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Result<LinearNetwork> {
    let n = edges + 1;
    let mut parent = vec![0usize; n];
    let mut len = vec![0.0; n];
    for v in 1..n {
        parent[v] = rng.random_range(0..v);
        len[v] = if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        };
    }
    // longest path via two sweeps over the rooted tree
    let mut children = vec![Vec::new(); n];
    for v in 1..n {
        children[parent[v]].push(v);
    }
    let farthest = |from: usize| -> (usize, Vec<Option<usize>>) {
        let mut dist = vec![f64::NAN; n];
        let mut prev = vec![None; n];
        dist[from] = 0.0;
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            let mut nbrs: Vec<(usize, f64)> = children[u].iter().map(|&c| (c, len[c])).collect();
            if u != 0 {
                nbrs.push((parent[u], len[u]));
            }
            for (w, l) in nbrs {
                if dist[w].is_nan() {
                    dist[w] = dist[u] + l;
                    prev[w] = Some(u);
                    stack.push(w);
                }
            }
        }
        let end = (0..n)
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
            .unwrap();
        (end, prev)
    };
    let (a, _) = farthest(0);
    let (b, prev) = farthest(a);
    let mut on_main = vec![false; n];
    let mut cur = b;
    while let Some(p) = prev[cur] {
        // the edge between cur and p is stored at the child end
        let child = if parent[cur] == p && cur != 0 { cur } else { p };
        on_main[child] = true;
        cur = p;
    }
    let vertices = (0..n as u64)
        .map(|id| Vertex {
            id,
            x: None,
            y: None,
        })
        .collect();
    let specs = (1..n)
        .map(|v| EdgeSpec {
            id: (v - 1) as u64,
            from: parent[v] as u64,
            to: v as u64,
            length: len[v],
            branch: if on_main[v] {
                Branch::Main
            } else {
                Branch::Side
            },
        })
        .collect();
    LinearNetwork::new(vertices, specs)
}

/// Random positive weights summing to one.
fn split(parts: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..parts).map(|_| 0.5 + rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn dendrite(spec: &DendriteSpec, rng: &mut impl Rng) -> Result<LinearNetwork> {
    let main = match spec.main_length {
        Some(l) => positive(l, "main length")?,
        None => rng.random_range(178.0..286.0),
    };
    let side = match spec.side_length {
        Some(l) => positive(l, "side length")?,
        None => rng.random_range(202.0..652.0),
    };
    let branches = spec
        .side_branches
        .unwrap_or_else(|| ((side / 30.0).round() as usize).max(1));
    if branches == 0 {
        return Err(Error::InvalidParameter(
            "need at least one side branch".into(),
        ));
    }
    if branches as f64 * 0.5 > main {
        return Err(Error::InvalidParameter(format!(
            "{branches} side branches do not fit on a main chain of {main}"
        )));
    }

    // attachment points: interior, at least a small gap apart
    let gaps = split(branches + 1, rng);
    let mut b = Builder::new();
    let mut cur = b.vertex(0.0, 0.0);
    let side_share = split(branches, rng);
    for i in 0..branches {
        let at = b.grow(cur, 0.0, gaps[i] * main, Branch::Main);
        cur = at;
        let up = if i % 2 == 0 { 1.0 } else { -1.0 };
        let total = side_share[i] * side;
        let angle = up * std::f64::consts::FRAC_PI_2;
        if total > 12.0 && rng.random::<f64>() < 0.4 {
            // stem plus two children
            let w = split(3, rng);
            let fork = b.grow(at, angle, w[0] * total, Branch::Side);
            b.grow(fork, angle - 0.5 * up, w[1] * total, Branch::Side);
            b.grow(fork, angle + 0.5 * up, w[2] * total, Branch::Side);
        } else {
            b.grow(at, angle, total, Branch::Side);
        }
    }
    b.grow(cur, 0.0, gaps[branches] * main, Branch::Main);
    b.build()
}
