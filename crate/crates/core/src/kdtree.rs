//! Static k-d tree over 3D points with exact radius queries.

use crate::error::{Error, Result};
use crate::geometry::Point3;

const LEAF_SIZE: usize = 8;
const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node {
    // Leaf: ids[start..end]; internal: children.
    start: u32,
    end: u32,
    left: u32,
    right: u32,
    axis: u8,
    split: f64,
}

/// Balanced k-d tree built once over an immutable point array. Point ids
/// are positions in the input slice.
#[derive(Clone, Debug)]
pub struct PointIndex {
    points: Vec<Point3>,
    ids: Vec<u32>,
    nodes: Vec<Node>,
    root: u32,
}

#[inline]
fn coord(p: &Point3, axis: usize) -> f64 {
    match axis {
        0 => p.x,
        1 => p.y,
        _ => p.z,
    }
}

impl PointIndex {
    pub fn build(points: &[Point3]) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("training point"));
        }
        if points.len() >= u32::MAX as usize {
            return Err(Error::InvalidParameter("too many points for index".into()));
        }
        let mut index = PointIndex {
            points: points.to_vec(),
            ids: (0..points.len() as u32).collect(),
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
            root: NONE,
        };
        if !points.is_empty() {
            index.root = index.build_node(0, points.len());
        }
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> u32 {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node {
                start: start as u32,
                end: end as u32,
                left: NONE,
                right: NONE,
                axis: 0,
                split: 0.0,
            });
            return (self.nodes.len() - 1) as u32;
        }

        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &id in &self.ids[start..end] {
            let p = self.points[id as usize].to_array();
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);

        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.ids[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coord(&points[a as usize], axis).total_cmp(&coord(&points[b as usize], axis))
        });
        let split = coord(&self.points[self.ids[mid] as usize], axis);

        // Left holds coordinates <= split, right >= split.
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            left,
            right,
            axis: axis as u8,
            split,
        });
        (self.nodes.len() - 1) as u32
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> Point3 {
        self.points[id]
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    /// All `(id, distance)` with `distance < radius`, in unspecified order.
    pub fn neighbors_within(&self, center: Point3, radius: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_within(center, radius, |id, d| out.push((id, d)));
        out
    }

    /// Visits every point strictly closer than `radius` to `center`.
    pub fn for_each_within(&self, center: Point3, radius: f64, mut visit: impl FnMut(usize, f64)) {
        if self.root == NONE || !(radius > 0.0) {
            return;
        }
        let mut stack = Vec::with_capacity(64);
        stack.push(self.root);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.left == NONE {
                for &id in &self.ids[node.start as usize..node.end as usize] {
                    let d = self.points[id as usize].distance(&center);
                    if d < radius {
                        visit(id as usize, d);
                    }
                }
                continue;
            }
            let delta = coord(&center, node.axis as usize) - node.split;
            if delta <= 0.0 {
                stack.push(node.left);
                if -delta < radius {
                    stack.push(node.right);
                }
            } else {
                stack.push(node.right);
                if delta < radius {
                    stack.push(node.left);
                }
            }
        }
    }
}
