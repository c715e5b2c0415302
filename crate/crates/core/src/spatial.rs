//! Exact k-d tree for nearest-neighbour queries in 2D and 3D.
//!
//! Queries return the true nearest point; among equidistant points the one
//! with the lowest index in the original set wins. Distinct-nearest counts
//! depend on the exact argmin, so no approximation is allowed here.

use crate::geometry::{squared_distance, Dim, Point, PointSet};

const LEAF_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    /// Index into the point set the tree was built from.
    pub index: usize,
    pub dist_sq: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.dist_sq.sqrt()
    }

    #[inline]
    fn beats(&self, dist_sq: f64, index: usize) -> bool {
        dist_sq < self.dist_sq || (dist_sq == self.dist_sq && index < self.index)
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u8,
        value: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<Point>,
    ids: Vec<u32>,
    slot_of: Vec<u32>,
    nodes: Vec<Node>,
    dim: Dim,
}

impl KdTree {
    pub fn build(set: &PointSet) -> Self {
        let mut order: Vec<u32> = (0..set.len() as u32).collect();
        let mut nodes = Vec::new();
        if !order.is_empty() {
            build_node(set.points(), &mut order, 0, set.dim().count(), &mut nodes);
        }
        let points: Vec<Point> = order.iter().map(|&i| set.points()[i as usize]).collect();
        let mut slot_of = vec![0u32; order.len()];
        for (slot, &id) in order.iter().enumerate() {
            slot_of[id as usize] = slot as u32;
        }
        KdTree {
            points,
            ids: order,
            slot_of,
            nodes,
            dim: set.dim(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Point with original index `index`.
    pub fn point(&self, index: usize) -> &Point {
        &self.points[self.slot_of[index] as usize]
    }

    pub fn nearest(&self, q: &Point) -> Option<Neighbor> {
        if self.is_empty() {
            return None;
        }
        let mut best = Neighbor {
            index: usize::MAX,
            dist_sq: f64::INFINITY,
        };
        self.search(0, q, &mut best, usize::MAX);
        Some(best)
    }

    /// Nearest point, seeded with a known candidate. A close `hint` (for
    /// example the answer for the previous point along a curve) prunes most
    /// of the tree; the result is identical to [`KdTree::nearest`].
    pub fn nearest_with_hint(&self, q: &Point, hint: usize) -> Neighbor {
        let mut best = Neighbor {
            index: hint,
            dist_sq: squared_distance(q, self.point(hint)),
        };
        self.search(0, q, &mut best, usize::MAX);
        best
    }

    /// Nearest point and the squared distance to the runner-up (infinite for a
    /// one-point tree). The runner-up may be equidistant with the nearest.
    pub fn nearest_two(&self, q: &Point) -> Option<(Neighbor, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut best = Neighbor {
            index: usize::MAX,
            dist_sq: f64::INFINITY,
        };
        let mut second = f64::INFINITY;
        self.search_two(0, q, &mut best, &mut second);
        Some((best, second))
    }

    fn search_two(&self, node: usize, q: &Point, best: &mut Neighbor, second: &mut f64) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start as usize..end as usize {
                    let id = self.ids[slot] as usize;
                    let d = squared_distance(q, &self.points[slot]);
                    if best.beats(d, id) {
                        *second = best.dist_sq;
                        *best = Neighbor {
                            index: id,
                            dist_sq: d,
                        };
                    } else if d < *second {
                        *second = d;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q.xyz()[axis as usize] - value;
                let (near, far) = if diff <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search_two(near as usize, q, best, second);
                if diff * diff <= *second {
                    self.search_two(far as usize, q, best, second);
                }
            }
        }
    }

    /// Nearest point other than the one with original index `exclude`.
    pub fn nearest_excluding(&self, q: &Point, exclude: usize) -> Option<Neighbor> {
        if self.len() < 2 {
            return None;
        }
        let mut best = Neighbor {
            index: usize::MAX,
            dist_sq: f64::INFINITY,
        };
        self.search(0, q, &mut best, exclude);
        Some(best)
    }

    fn search(&self, node: usize, q: &Point, best: &mut Neighbor, exclude: usize) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start as usize..end as usize {
                    let id = self.ids[slot] as usize;
                    if id == exclude {
                        continue;
                    }
                    let d = squared_distance(q, &self.points[slot]);
                    if best.beats(d, id) {
                        *best = Neighbor {
                            index: id,
                            dist_sq: d,
                        };
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q.xyz()[axis as usize] - value;
                let (near, far) = if diff <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near as usize, q, best, exclude);
                // Equal bound must still be visited: a tie there may carry a lower index.
                if diff * diff <= best.dist_sq {
                    self.search(far as usize, q, best, exclude);
                }
            }
        }
    }
}

fn build_node(
    points: &[Point],
    order: &mut [u32],
    offset: usize,
    dims: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let id = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + order.len()) as u32,
        });
        return id;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order.iter() {
        let p = points[i as usize].xyz();
        for a in 0..dims {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let axis = (0..dims)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(0);
    if hi[axis] <= lo[axis] {
        // All points coincide along every axis.
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + order.len()) as u32,
        });
        return id;
    }
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize].xyz()[axis].total_cmp(&points[b as usize].xyz()[axis])
    });
    let value = points[order[mid] as usize].xyz()[axis];
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (left_half, right_half) = order.split_at_mut(mid);
    let left = build_node(points, left_half, offset, dims, nodes);
    let right = build_node(points, right_half, offset + mid, dims, nodes);
    nodes[id as usize] = Node::Split {
        axis: axis as u8,
        value,
        left,
        right,
    };
    id
}

/// Smallest distance between two distinct entries of `set`, or `None` when
/// it has fewer than two points.
pub fn closest_pair_distance(set: &PointSet) -> Option<f64> {
    if set.len() < 2 {
        return None;
    }
    let tree = KdTree::build(set);
    let min_sq = set
        .iter()
        .enumerate()
        .filter_map(|(i, p)| tree.nearest_excluding(p, i))
        .map(|n| n.dist_sq)
        .fold(f64::INFINITY, f64::min);
    Some(min_sq.sqrt())
}
