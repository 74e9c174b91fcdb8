//! Erosion, lattices and sphere counts.

use super::{LinearNetwork, NetworkPoint};
use crate::error::{Error, Result};

/// Part of a network described as retained open intervals per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SubNetwork {
    intervals: Vec<Vec<(f64, f64)>>,
    radius: f64,
}

impl SubNetwork {
    /// Retained `(lo, hi)` intervals of edge `edge`.
    pub fn intervals(&self, edge: usize) -> &[(f64, f64)] {
        &self.intervals[edge]
    }

    pub fn measure(&self) -> f64 {
        self.intervals
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |acc, (lo, hi)| acc + (hi - lo))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.iter().all(|v| v.is_empty())
    }

    /// Membership test: distance to every degree-1 vertex strictly exceeds
    /// the erosion radius.
    pub fn contains(&self, net: &LinearNetwork, p: &NetworkPoint) -> bool {
        net.leaf_distance(p) > self.radius
    }
}

/// `L ⊖ r`: points whose distance to every degree-1 vertex exceeds `r`.
pub fn erode(net: &LinearNetwork, r: f64) -> SubNetwork {
    let r = r.max(0.0);
    let intervals = net
        .edges()
        .iter()
        .map(|e| {
            // nearest-leaf distance along the edge is min(x + A, len - x + B)
            let a = net.vertex_leaf_distance(e.from);
            let b = net.vertex_leaf_distance(e.to);
            let lo = (r - a).max(0.0);
            let hi = (e.length + b - r).min(e.length);
            if lo < hi {
                vec![(lo, hi)]
            } else {
                Vec::new()
            }
        })
        .collect();
    SubNetwork {
        intervals,
        radius: r,
    }
}

/// Equidistant points along every edge, shared vertices listed once.
#[derive(Debug, Clone)]
pub struct Lattice {
    points: Vec<NetworkPoint>,
    /// Per edge: site index of each lattice position, from offset 0 upward.
    edge_sites: Vec<Vec<usize>>,
    edge_step: Vec<f64>,
}

impl Lattice {
    pub fn new(net: &LinearNetwork, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lattice spacing must be positive, got {spacing}"
            )));
        }
        let mut points = Vec::new();
        let mut vertex_site = vec![usize::MAX; net.num_vertices()];
        let mut edge_sites = Vec::with_capacity(net.num_edges());
        let mut edge_step = Vec::with_capacity(net.num_edges());
        for (i, e) in net.edges().iter().enumerate() {
            let cells = (e.length / spacing).ceil().max(1.0) as usize;
            let step = e.length / cells as f64;
            let mut sites = Vec::with_capacity(cells + 1);
            for j in 0..=cells {
                let site = if j == 0 || j == cells {
                    let v = if j == 0 { e.from } else { e.to };
                    if vertex_site[v] == usize::MAX {
                        vertex_site[v] = points.len();
                        points.push(net.vertex_point(v));
                    }
                    vertex_site[v]
                } else {
                    points.push(NetworkPoint {
                        edge: i,
                        offset: j as f64 * step,
                    });
                    points.len() - 1
                };
                sites.push(site);
            }
            edge_sites.push(sites);
            edge_step.push(step);
        }
        Ok(Self {
            points,
            edge_sites,
            edge_step,
        })
    }

    pub fn points(&self) -> &[NetworkPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the lattice site nearest to `p`.
    ///
    /// The nearest site always lies on `p`'s own edge because both edge
    /// endpoints are sites. Ties go to the site with the lower canonical
    /// `(edge, offset)`.
    pub fn nearest_site(&self, p: &NetworkPoint) -> usize {
        let sites = &self.edge_sites[p.edge];
        let step = self.edge_step[p.edge];
        let cells = sites.len() - 1;
        let j = ((p.offset / step).floor() as usize).min(cells - 1);
        let left = j as f64 * step;
        let right = if j + 1 == cells {
            // use the exact edge length for the far end
            left + step
        } else {
            (j + 1) as f64 * step
        };
        let dl = p.offset - left;
        let dr = right - p.offset;
        if dl < dr {
            sites[j]
        } else if dr < dl {
            sites[j + 1]
        } else {
            let (a, b) = (sites[j], sites[j + 1]);
            if self.points[a].cmp_position(&self.points[b]).is_le() {
                a
            } else {
                b
            }
        }
    }
}

/// Lattice points with at most `spacing` between neighbours on each edge.
///
/// An edge of length `ℓ` receives `⌈ℓ/spacing⌉ + 1` equidistant points,
/// endpoints included.
pub fn lattice(net: &LinearNetwork, spacing: f64) -> Result<Vec<NetworkPoint>> {
    Ok(Lattice::new(net, spacing)?.points)
}

const SNAP: f64 = 1e-9;

/// Distance profile of a tree as seen from one point.
///
/// `m(u, t)`, the number of network points at distance exactly `t` from `u`,
/// is piecewise constant in `t` with jumps at vertex distances. Each edge not
/// containing `u` contributes the open interval between its endpoint
/// distances; the edge carrying `u` contributes `(0, offset)` and
/// `(0, length - offset)`. Vertices at distance exactly `t` add one each.
#[derive(Debug, Clone)]
pub struct SphereProfile {
    starts: Vec<f64>,
    ends: Vec<f64>,
    vertex_dists: Vec<f64>,
}

impl SphereProfile {
    pub fn new(net: &LinearNetwork, u: &NetworkPoint) -> Result<Self> {
        if !net.is_tree() {
            return Err(Error::NotATree);
        }
        let vd: Vec<f64> = (0..net.num_vertices())
            .map(|v| net.point_vertex_distance(u, v))
            .collect();
        let mut starts = Vec::with_capacity(net.num_edges() + 1);
        let mut ends = Vec::with_capacity(net.num_edges() + 1);
        for (i, e) in net.edges().iter().enumerate() {
            if i == u.edge {
                for end in [vd[e.from], vd[e.to]] {
                    if end > 0.0 {
                        starts.push(0.0);
                        ends.push(end);
                    }
                }
            } else {
                let (a, b) = (vd[e.from], vd[e.to]);
                starts.push(a.min(b));
                ends.push(a.max(b));
            }
        }
        starts.sort_by(f64::total_cmp);
        ends.sort_by(f64::total_cmp);
        let mut vertex_dists = vd;
        vertex_dists.sort_by(f64::total_cmp);
        Ok(Self {
            starts,
            ends,
            vertex_dists,
        })
    }

    /// `m(u, t)`.
    pub fn count(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 1;
        }
        // snap t onto a vertex distance if it is numerically on one
        let k = self.vertex_dists.partition_point(|&d| d < t - SNAP);
        let mut at_vertex = 0usize;
        let mut t = t;
        if let Some(&d) = self.vertex_dists.get(k) {
            if (d - t).abs() <= SNAP {
                t = d;
                at_vertex = self.vertex_dists[k..]
                    .iter()
                    .take_while(|&&x| x == d)
                    .count();
            }
        }
        let open_starts = self.starts.partition_point(|&s| s < t);
        let closed_ends = self.ends.partition_point(|&s| s <= t);
        open_starts - closed_ends + at_vertex
    }
}

/// Number of network points at shortest-path distance exactly `t` from `u`.
pub fn sphere_count(net: &LinearNetwork, u: &NetworkPoint, t: f64) -> Result<usize> {
    Ok(SphereProfile::new(net, u)?.count(t))
}

#[cfg(test)]
mod tests {
    use super::super::test_nets::*;
    use super::*;

    #[test]
    fn erode_segment() {
        let net = segment(10.0);
        let sub = erode(&net, 2.0);
        assert_eq!(sub.intervals(0), &[(2.0, 8.0)]);
        assert_eq!(sub.measure(), 6.0);
    }

    #[test]
    fn erode_y_tree() {
        let net = y_tree();
        assert!((erode(&net, 1.0).measure() - 9.0).abs() < 1e-12);
        assert_eq!(erode(&net, 0.0).measure(), 12.0);
        let gone = erode(&net, 100.0);
        assert!(gone.is_empty());
        assert_eq!(gone.measure(), 0.0);
    }

    #[test]
    fn erosion_boundary_is_strict() {
        let net = segment(10.0);
        let sub = erode(&net, 2.0);
        assert!(!sub.contains(&net, &net.point(0, 2.0).unwrap()));
        assert!(sub.contains(&net, &net.point(0, 2.0 + 1e-9).unwrap()));
    }

    #[test]
    fn erosion_measure_nonincreasing() {
        let net = y_tree();
        let mut last = f64::INFINITY;
        for i in 0..100 {
            let m = erode(&net, i as f64 * 0.07).measure();
            assert!(m <= last + 1e-12);
            last = m;
        }
    }

    #[test]
    fn lattice_offsets() {
        let net = segment(10.0);
        let pts = lattice(&net, 5.0).unwrap();
        let offs: Vec<f64> = pts.iter().map(|p| p.offset).collect();
        assert_eq!(offs, vec![0.0, 5.0, 10.0]);

        let pts = lattice(&net, 4.0).unwrap();
        assert_eq!(pts.len(), 4);
        let expected = [0.0, 10.0 / 3.0, 20.0 / 3.0, 10.0];
        for (p, e) in pts.iter().zip(expected) {
            assert!((p.offset - e).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_shares_junction() {
        let net = y_tree();
        let pts = lattice(&net, 1.0).unwrap();
        let centre = net.vertex_point(0);
        assert_eq!(pts.iter().filter(|p| **p == centre).count(), 1);
        // 3 + 4 + 5 unit cells, 4 vertices: 12 + 1 points
        assert_eq!(pts.len(), 13);
    }

    #[test]
    fn nearest_site_ties_go_low() {
        let net = segment(10.0);
        let lat = Lattice::new(&net, 5.0).unwrap();
        let mid = net.point(0, 2.5).unwrap();
        assert_eq!(lat.points()[lat.nearest_site(&mid)].offset, 0.0);
        let p = net.point(0, 2.6).unwrap();
        assert_eq!(lat.points()[lat.nearest_site(&p)].offset, 5.0);
    }

    #[test]
    fn sphere_counts_on_segment() {
        let net = segment(10.0);
        let u = net.point(0, 3.0).unwrap();
        assert_eq!(sphere_count(&net, &u, 2.0).unwrap(), 2);
        assert_eq!(sphere_count(&net, &u, 4.0).unwrap(), 1);
        assert_eq!(sphere_count(&net, &u, 3.0).unwrap(), 2); // 0 and 6
        assert_eq!(sphere_count(&net, &u, 7.0).unwrap(), 1); // leaf hit once
        assert_eq!(sphere_count(&net, &u, 7.5).unwrap(), 0);
        assert_eq!(sphere_count(&net, &u, 0.0).unwrap(), 1);
    }

    #[test]
    fn sphere_count_y_tree() {
        let net = y_tree();
        // u on OA at 2 from O
        let u = net.point(0, 2.0).unwrap();
        assert_eq!(sphere_count(&net, &u, 3.0).unwrap(), 2);
        assert_eq!(sphere_count(&net, &u, 0.5).unwrap(), 2);
        assert_eq!(sphere_count(&net, &u, 1.0).unwrap(), 2); // A and offset 1
        assert_eq!(sphere_count(&net, &u, 2.0).unwrap(), 1); // O only
        assert_eq!(sphere_count(&net, &u, 6.5).unwrap(), 1);
    }

    #[test]
    fn sphere_count_from_junction() {
        let net = y_tree();
        let o = net.vertex_point(0);
        assert_eq!(sphere_count(&net, &o, 1.0).unwrap(), 3);
        assert_eq!(sphere_count(&net, &o, 3.0).unwrap(), 3); // A plus interior of OB, OC
        assert_eq!(sphere_count(&net, &o, 3.5).unwrap(), 2);
    }
}
