//! Measurements attached to 3D positions, and the per-scan training set.

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::kdtree::PointIndex;

/// One-hot class vector stored as its hot index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OneHot {
    class: usize,
    len: usize,
}

impl OneHot {
    pub fn new(class: usize, len: usize) -> Result<Self> {
        if class >= len {
            return Err(Error::InvalidMeasurement(format!("class {class} out of range for {len} classes")));
        }
        Ok(OneHot { class, len })
    }

    /// Accepts only vectors with entries in {0, 1} summing to exactly 1.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        let mut hot = None;
        for (k, &x) in v.iter().enumerate() {
            if x == 1.0 {
                if hot.replace(k).is_some() {
                    return Err(Error::InvalidMeasurement("one-hot vector has several ones".into()));
                }
            } else if x != 0.0 {
                return Err(Error::InvalidMeasurement(format!("one-hot entry {x} not in {{0, 1}}")));
            }
        }
        let class = hot.ok_or_else(|| Error::InvalidMeasurement("one-hot vector has no one".into()))?;
        OneHot::new(class, v.len())
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn to_vector(&self) -> Vec<f64> {
        (0..self.len).map(|k| if k == self.class { 1.0 } else { 0.0 }).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Payload {
    Semantic(OneHot),
    /// Direct traversability observation; legal values are 0 and 1.
    Binary(u8),
    Scalar(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingPoint {
    pub position: Point3,
    pub payload: Payload,
}

impl TrainingPoint {
    pub fn new(position: Point3, payload: Payload) -> Self {
        TrainingPoint { position, payload }
    }

    pub fn semantic(position: Point3, class: usize, num_classes: usize) -> Result<Self> {
        Ok(TrainingPoint::new(position, Payload::Semantic(OneHot::new(class, num_classes)?)))
    }

    pub fn binary(position: Point3, z: u8) -> Self {
        TrainingPoint::new(position, Payload::Binary(z))
    }

    pub fn scalar(position: Point3, f: f64) -> Self {
        TrainingPoint::new(position, Payload::Scalar(f))
    }
}

/// A scan's training points together with the spatial index over their
/// positions. Point ids are positions in `points`.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    points: Vec<TrainingPoint>,
    index: PointIndex,
}

impl TrainingSet {
    pub fn new(points: Vec<TrainingPoint>) -> Result<Self> {
        let positions: Vec<Point3> = points.iter().map(|p| p.position).collect();
        let index = PointIndex::build(&positions)?;
        Ok(TrainingSet { points, index })
    }

    pub fn empty() -> Self {
        TrainingSet::new(Vec::new()).expect("empty set is valid")
    }

    pub fn points(&self) -> &[TrainingPoint] {
        &self.points
    }

    pub fn index(&self) -> &PointIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_validation() {
        assert_eq!(OneHot::from_vector(&[0.0, 1.0, 0.0]).unwrap().class(), 1);
        assert!(OneHot::from_vector(&[0.0, 0.0]).is_err());
        assert!(OneHot::from_vector(&[1.0, 1.0]).is_err());
        assert!(OneHot::from_vector(&[0.5, 0.5]).is_err());
        assert!(OneHot::new(3, 3).is_err());
        assert_eq!(OneHot::new(2, 4).unwrap().to_vector(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn non_finite_position_rejected() {
        let p = TrainingPoint::binary(Point3::new(0.0, f64::NAN, 0.0), 1);
        assert!(TrainingSet::new(vec![p]).is_err());
    }
}
