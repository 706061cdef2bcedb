//! Continuous semantic layer: a kernel-weighted Dirichlet posterior over K
//! classes per cell.

use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::grid::VoxelGrid;
use crate::inference::cell_weights;
use crate::kernel::KernelParams;
use crate::training::{Payload, TrainingSet};

pub const DEFAULT_PRIOR: f64 = 0.001;

/// Number of classes, Dirichlet prior and the traversable/untraversable
/// partition of the classes. Classes are indexed from 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SemanticConfig {
    prior: Vec<Fixed>,
    traversable: Vec<bool>,
}

impl SemanticConfig {
    /// Uniform prior `prior` for every class.
    pub fn new(num_classes: usize, prior: f64, traversable_classes: &[usize]) -> Result<Self> {
        SemanticConfig::with_priors(vec![prior; num_classes], traversable_classes)
    }

    pub fn with_priors(priors: Vec<f64>, traversable_classes: &[usize]) -> Result<Self> {
        let k = priors.len();
        if k < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 classes, got {k}")));
        }
        let prior = priors
            .iter()
            .map(|&a| match Fixed::from_f64(a) {
                Some(f) if a > 0.0 && f > Fixed::ZERO => Ok(f),
                _ => Err(Error::InvalidParameter(format!("Dirichlet prior must be positive, got {a}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut traversable = vec![false; k];
        for &c in traversable_classes {
            if c >= k {
                return Err(Error::InvalidParameter(format!("traversable class {c} out of range for {k} classes")));
            }
            traversable[c] = true;
        }
        let n_trav = traversable.iter().filter(|&&t| t).count();
        if n_trav == 0 || n_trav == k {
            return Err(Error::InvalidParameter(
                "traversable classes must be a non-empty proper subset of the classes".into(),
            ));
        }
        Ok(SemanticConfig { prior, traversable })
    }

    pub fn num_classes(&self) -> usize {
        self.prior.len()
    }

    pub fn prior(&self) -> Vec<f64> {
        self.prior.iter().map(|a| a.to_f64()).collect()
    }

    pub fn is_traversable(&self, class: usize) -> bool {
        self.traversable.get(class).copied().unwrap_or(false)
    }

    pub fn traversable_classes(&self) -> Vec<usize> {
        (0..self.num_classes()).filter(|&c| self.traversable[c]).collect()
    }

    /// Cell holding only the prior.
    pub fn prior_cell(&self) -> DirichletCell {
        DirichletCell {
            alpha: self.prior.clone(),
        }
    }
}

/// Dirichlet concentration parameters of one cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCell {
    alpha: Vec<Fixed>,
}

impl DirichletCell {
    /// Cell from raw parameters. Every entry must be positive and finite.
    pub fn from_alpha(alpha: &[f64]) -> Result<Self> {
        let alpha = alpha
            .iter()
            .map(|&a| match Fixed::from_f64(a) {
                Some(f) if f > Fixed::ZERO => Ok(f),
                _ => Err(Error::InvalidParameter(format!("concentration must be positive, got {a}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if alpha.is_empty() {
            return Err(Error::InvalidParameter("empty Dirichlet".into()));
        }
        Ok(DirichletCell { alpha })
    }

    pub(crate) fn from_fixed(alpha: Vec<Fixed>) -> Self {
        DirichletCell { alpha }
    }

    pub fn alpha(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.to_f64()).collect()
    }

    pub fn alpha_fixed(&self) -> &[Fixed] {
        &self.alpha
    }

    pub fn num_classes(&self) -> usize {
        self.alpha.len()
    }
}

/// Posterior summary of a Dirichlet cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SemanticEstimate {
    /// Expected class probabilities `alpha_k / S`.
    pub probabilities: Vec<f64>,
    /// Most concentrated class; ties go to the lowest index.
    pub map_class: usize,
    /// Marginal variance of each class probability.
    pub variance: Vec<f64>,
}

/// Adds the kernel-weighted one-hot counts of `scan` to every cell whose
/// center lies within kernel support of a training point.
pub fn update_semantic(
    grid: &mut VoxelGrid<DirichletCell>,
    scan: &TrainingSet,
    cfg: &SemanticConfig,
    kernel: &KernelParams,
) -> Result<()> {
    let k = cfg.num_classes();
    let mut classes = Vec::with_capacity(scan.len());
    for p in scan.points() {
        match p.payload {
            Payload::Semantic(y) if y.len() == k => classes.push(y.class()),
            Payload::Semantic(y) => {
                return Err(Error::InvalidMeasurement(format!(
                    "one-hot vector of length {} for {k} classes",
                    y.len()
                )))
            }
            other => return Err(Error::InvalidMeasurement(format!("expected a semantic payload, got {other:?}"))),
        }
    }

    for (c, weights) in cell_weights(grid, scan, kernel) {
        let cell = grid.get_or_insert_with(c, || cfg.prior_cell());
        for (id, w) in weights {
            cell.alpha[classes[id]] += w;
        }
    }
    Ok(())
}

pub fn query_semantic(cell: &DirichletCell) -> SemanticEstimate {
    let total: Fixed = cell.alpha.iter().copied().sum();
    let s = total.to_f64();
    let alpha = cell.alpha();
    let probabilities = alpha.iter().map(|a| a / s).collect();
    let variance = alpha.iter().map(|a| a * (s - a) / (s * s * (s + 1.0))).collect();
    let mut map_class = 0;
    for (k, a) in cell.alpha.iter().enumerate() {
        if *a > cell.alpha[map_class] {
            map_class = k;
        }
    }
    SemanticEstimate {
        probabilities,
        map_class,
        variance,
    }
}

/// Aggregates the concentrations of traversable and untraversable classes.
/// The two parts sum exactly to the total concentration.
pub fn shrink_to_beta_fixed(cell: &DirichletCell, cfg: &SemanticConfig) -> (Fixed, Fixed) {
    let mut a = Fixed::ZERO;
    let mut b = Fixed::ZERO;
    for (k, &alpha) in cell.alpha.iter().enumerate() {
        if cfg.is_traversable(k) {
            a += alpha;
        } else {
            b += alpha;
        }
    }
    (a, b)
}

/// `(alpha', beta')` of the Beta distribution obtained by merging classes.
pub fn shrink_to_beta(cell: &DirichletCell, cfg: &SemanticConfig) -> (f64, f64) {
    let (a, b) = shrink_to_beta_fixed(cell, cfg);
    (a.to_f64(), b.to_f64())
}
