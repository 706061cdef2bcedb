//! Traversability layer: a kernel-weighted Beta posterior per cell fed by
//! direct binary observations and by Bernoulli pseudo-measurements deduced
//! from the semantic layer.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::grid::{CellCoord, VoxelGrid};
use crate::inference::cell_weights;
use crate::kernel::KernelParams;
use crate::sampling::{PseudoSampler, SourceLayer};
use crate::semantic::{shrink_to_beta, DirichletCell, SemanticConfig};
use crate::training::{Payload, TrainingSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraversabilityConfig {
    prior_alpha: Fixed,
    prior_beta: Fixed,
    /// Fuse semantic pseudo-measurements. When off, the layer is plain
    /// Beta-Bernoulli kernel mapping of the direct observations.
    pub pseudo_measurements: bool,
}

impl TraversabilityConfig {
    pub fn new(prior_alpha: f64, prior_beta: f64, pseudo_measurements: bool) -> Result<Self> {
        let pos = |v: f64| match Fixed::from_f64(v) {
            Some(f) if v > 0.0 && f > Fixed::ZERO => Ok(f),
            _ => Err(Error::InvalidParameter(format!("Beta prior must be positive, got {v}"))),
        };
        Ok(TraversabilityConfig {
            prior_alpha: pos(prior_alpha)?,
            prior_beta: pos(prior_beta)?,
            pseudo_measurements,
        })
    }

    pub fn prior_cell(&self) -> BetaCell {
        BetaCell {
            alpha: self.prior_alpha,
            beta: self.prior_beta,
        }
    }
}

impl Default for TraversabilityConfig {
    fn default() -> Self {
        TraversabilityConfig::new(0.001, 0.001, true).expect("valid defaults")
    }
}

/// Beta posterior parameters of one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BetaCell {
    alpha: Fixed,
    beta: Fixed,
}

impl BetaCell {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        TraversabilityConfig::new(alpha, beta, false).map(|c| c.prior_cell())
    }

    pub(crate) fn from_fixed(alpha: Fixed, beta: Fixed) -> Self {
        BetaCell { alpha, beta }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.to_f64()
    }

    pub fn beta(&self) -> f64 {
        self.beta.to_f64()
    }

    pub fn alpha_fixed(&self) -> Fixed {
        self.alpha
    }

    pub fn beta_fixed(&self) -> Fixed {
        self.beta
    }

    /// Adds `weight * successes` to alpha and `weight * (trials - successes)`
    /// to beta, so alpha + beta grows by exactly `weight * trials`.
    pub fn observe(&mut self, weight: Fixed, successes: u32, trials: u32) {
        debug_assert!(successes <= trials);
        self.alpha += weight * successes;
        self.beta += weight * (trials - successes);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraversabilityEstimate {
    /// Posterior mode; only defined when alpha > 1 and beta > 1.
    pub map: Option<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl TraversabilityEstimate {
    /// Mode when defined, otherwise the mean.
    pub fn map_or_mean(&self) -> f64 {
        self.map.unwrap_or(self.mean)
    }
}

pub fn beta_moments(alpha: f64, beta: f64) -> TraversabilityEstimate {
    let s = alpha + beta;
    TraversabilityEstimate {
        map: (alpha > 1.0 && beta > 1.0).then(|| (alpha - 1.0) / (s - 2.0)),
        mean: alpha / s,
        variance: alpha * beta / (s * s * (s + 1.0)),
    }
}

pub fn query_traversability(cell: &BetaCell) -> TraversabilityEstimate {
    beta_moments(cell.alpha(), cell.beta())
}

/// Success probability of the Bernoulli deduced from `Beta(alpha, beta)`:
/// the mode when alpha, beta > 1, else the mean.
pub fn deduced_bernoulli(alpha: f64, beta: f64) -> f64 {
    beta_moments(alpha, beta).map_or_mean()
}

/// Draws one binary pseudo-measurement from the Bernoulli deduced from
/// `Beta(alpha, beta)`: 1 iff a uniform draw is at most p.
pub fn deduce_pseudo_measurement<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> u8 {
    let p = deduced_bernoulli(alpha, beta);
    let u: f64 = rng.random();
    u8::from(u <= p)
}

/// Semantic pseudo-measurement for every training point, drawn once per
/// semantic cell per scan. Points falling in cells the semantic layer has
/// never seen draw from the prior.
pub fn semantic_pseudo_measurements(
    sem_grid: &VoxelGrid<DirichletCell>,
    sem_cfg: &SemanticConfig,
    scan: &TrainingSet,
    sampler: &PseudoSampler,
) -> Result<Vec<u8>> {
    let prior = sem_cfg.prior_cell();
    let mut memo: HashMap<CellCoord, u8> = HashMap::new();
    scan.points()
        .iter()
        .map(|p| {
            let c = sem_grid.cell_of(p.position)?;
            Ok(*memo.entry(c).or_insert_with(|| {
                let cell = sem_grid.get(&c).unwrap_or(&prior);
                let (a, b) = shrink_to_beta(cell, sem_cfg);
                deduce_pseudo_measurement(a, b, &mut sampler.stream(SourceLayer::Semantic, c))
            }))
        })
        .collect()
}

/// Binary observations of a scan, validated to lie in {0, 1}.
pub fn binary_observations(scan: &TrainingSet) -> Result<Vec<u8>> {
    scan.points()
        .iter()
        .map(|p| match p.payload {
            Payload::Binary(z @ (0 | 1)) => Ok(z),
            Payload::Binary(z) => Err(Error::InvalidMeasurement(format!("binary observation {z} not in {{0, 1}}"))),
            other => Err(Error::InvalidMeasurement(format!("expected a binary payload, got {other:?}"))),
        })
        .collect()
}

/// Kernel Beta-Bernoulli update where training point `i` reports
/// `successes[i]` positive outcomes out of `trials`.
pub fn accumulate_binary_evidence(
    grid: &mut VoxelGrid<BetaCell>,
    scan: &TrainingSet,
    successes: &[u32],
    trials: u32,
    cfg: &TraversabilityConfig,
    kernel: &KernelParams,
) -> Result<()> {
    if successes.len() != scan.len() {
        return Err(Error::InvalidMeasurement(format!(
            "{} success counts for {} training points",
            successes.len(),
            scan.len()
        )));
    }
    if let Some(s) = successes.iter().find(|&&s| s > trials) {
        return Err(Error::InvalidMeasurement(format!("{s} successes out of {trials} trials")));
    }
    for (c, weights) in cell_weights(grid, scan, kernel) {
        let cell = grid.get_or_insert_with(c, || cfg.prior_cell());
        for (id, w) in weights {
            cell.observe(w, successes[id], trials);
        }
    }
    Ok(())
}

/// One scan of semantic-traversability inference. The semantic layer must
/// already contain this scan's semantic evidence.
pub fn update_traversability(
    trav_grid: &mut VoxelGrid<BetaCell>,
    sem_grid: &VoxelGrid<DirichletCell>,
    scan: &TrainingSet,
    sem_cfg: &SemanticConfig,
    cfg: &TraversabilityConfig,
    kernel: &KernelParams,
    sampler: &PseudoSampler,
) -> Result<()> {
    let z = binary_observations(scan)?;
    if cfg.pseudo_measurements {
        let y = semantic_pseudo_measurements(sem_grid, sem_cfg, scan, sampler)?;
        let successes: Vec<u32> = y.iter().zip(&z).map(|(&y, &z)| (y + z) as u32).collect();
        accumulate_binary_evidence(trav_grid, scan, &successes, 2, cfg, kernel)
    } else {
        let successes: Vec<u32> = z.iter().map(|&z| z as u32).collect();
        accumulate_binary_evidence(trav_grid, scan, &successes, 1, cfg, kernel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::training::TrainingPoint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    const CENTER: Point3 = Point3::new(0.05, 0.05, 0.05);

    #[test]
    fn moments_examples() {
        let e = query_traversability(&BetaCell::new(2.0, 2.0).unwrap());
        assert_eq!(e.map, Some(0.5));
        assert_eq!(e.mean, 0.5);
        assert!(close(e.variance, 0.05, 1e-15));

        let e = query_traversability(&BetaCell::new(3.0, 2.0).unwrap());
        assert!(close(e.map.unwrap(), 2.0 / 3.0, 1e-15));
        assert!(close(e.mean, 0.6, 1e-15));
        assert!(close(e.variance, 0.04, 1e-15));

        let e = query_traversability(&BetaCell::new(0.001, 0.001).unwrap());
        assert_eq!(e.map, None);
        assert_eq!(e.mean, 0.5);
    }

    #[test]
    fn deduced_probability() {
        assert!(close(deduced_bernoulli(7.0, 4.0), 2.0 / 3.0, 1e-15));
        assert!(close(deduced_bernoulli(0.004, 0.015), 0.004 / 0.019, 1e-15));
        // mode exactly 1 when beta' = 1 is excluded; beta' slightly above 1 keeps p < 1
        assert_eq!(deduced_bernoulli(50.0, 0.5), 50.0 / 50.5);
    }

    #[test]
    fn pseudo_measurement_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let ones: u32 = (0..n).map(|_| deduce_pseudo_measurement(7.0, 4.0, &mut rng) as u32).sum();
        let mean = ones as f64 / n as f64;
        assert!((0.657..=0.677).contains(&mean), "{mean}");
    }

    #[test]
    fn certain_pseudo_measurement() {
        // alpha' >> 1, beta' -> 1+: mode -> 1
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            assert_eq!(deduce_pseudo_measurement(1e6, 1.0 + 1e-12, &mut rng), 1);
        }
    }

    fn single_point(z: u8) -> TrainingSet {
        TrainingSet::new(vec![TrainingPoint::binary(CENTER, z)]).unwrap()
    }

    #[test]
    fn both_sources_agree_traversable() {
        let mut grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let cfg = TraversabilityConfig::default();
        accumulate_binary_evidence(&mut grid, &single_point(1), &[2], 2, &cfg, &KernelParams::default()).unwrap();
        let cell = grid.at(CENTER).unwrap();
        assert_eq!((cell.alpha(), cell.beta()), (20.001, 0.001));
    }

    #[test]
    fn both_sources_agree_untraversable() {
        let mut grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let cfg = TraversabilityConfig::default();
        accumulate_binary_evidence(&mut grid, &single_point(0), &[0], 2, &cfg, &KernelParams::default()).unwrap();
        let cell = grid.at(CENTER).unwrap();
        assert_eq!((cell.alpha(), cell.beta()), (0.001, 20.001));
    }

    #[test]
    fn baseline_mode_counts_only_direct_observations() {
        let sem_cfg = SemanticConfig::new(3, 0.001, &[0]).unwrap();
        let sem_grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let cfg = TraversabilityConfig::new(0.001, 0.001, false).unwrap();
        let mut grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let sampler = PseudoSampler::new(0, 0);
        update_traversability(&mut grid, &sem_grid, &single_point(1), &sem_cfg, &cfg, &KernelParams::default(), &sampler)
            .unwrap();
        let cell = grid.at(CENTER).unwrap();
        assert_eq!((cell.alpha(), cell.beta()), (10.001, 0.001));
    }

    #[test]
    fn invalid_binary_rejected() {
        let sem_cfg = SemanticConfig::new(3, 0.001, &[0]).unwrap();
        let sem_grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let mut grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let res = update_traversability(
            &mut grid,
            &sem_grid,
            &single_point(2),
            &sem_cfg,
            &TraversabilityConfig::default(),
            &KernelParams::default(),
            &PseudoSampler::new(0, 0),
        );
        assert!(matches!(res, Err(Error::InvalidMeasurement(_))));
        assert!(grid.is_empty());
    }

    #[test]
    fn pseudo_measurements_memoized_per_cell() {
        let sem_cfg = SemanticConfig::new(2, 0.001, &[0]).unwrap();
        let mut sem_grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        // p = 0.5 so that distinct draws would disagree often
        sem_grid.insert(CellCoord::new(0, 0, 0), DirichletCell::from_alpha(&[3.0, 3.0]).unwrap());
        let pts: Vec<_> = (0..64)
            .map(|i| TrainingPoint::binary(Point3::new(0.001 * i as f64 + 0.01, 0.05, 0.05), 1))
            .collect();
        let scan = TrainingSet::new(pts).unwrap();
        for seed in 0..20 {
            let y = semantic_pseudo_measurements(&sem_grid, &sem_cfg, &scan, &PseudoSampler::new(seed, 0)).unwrap();
            assert!(y.iter().all(|&v| v == y[0]));
        }
    }

    #[test]
    fn missing_semantic_cell_uses_prior() {
        // prior-only: p = 0.001 / 0.002 = 0.5 for K = 2 with one traversable class
        let sem_cfg = SemanticConfig::new(2, 0.001, &[0]).unwrap();
        let sem_grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let pts: Vec<_> = (0..4000)
            .map(|i| TrainingPoint::binary(Point3::new(0.1 * i as f64 + 0.05, 0.05, 0.05), 1))
            .collect();
        let scan = TrainingSet::new(pts).unwrap();
        let y = semantic_pseudo_measurements(&sem_grid, &sem_cfg, &scan, &PseudoSampler::new(5, 0)).unwrap();
        let mean = y.iter().map(|&v| v as f64).sum::<f64>() / y.len() as f64;
        assert!((mean - 0.5).abs() < 0.03, "{mean}");
    }

    #[test]
    fn deterministic_given_seed() {
        let sem_cfg = SemanticConfig::new(2, 0.001, &[0]).unwrap();
        let mut sem_grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let pts: Vec<_> = (0..300)
            .map(|i| TrainingPoint::semantic(Point3::new(0.013 * i as f64, 0.02 * (i % 7) as f64, 0.0), i % 2, 2).unwrap())
            .collect();
        let sem_scan = TrainingSet::new(pts.clone()).unwrap();
        crate::semantic::update_semantic(&mut sem_grid, &sem_scan, &sem_cfg, &KernelParams::default()).unwrap();
        let trav: Vec<_> = pts.iter().map(|p| TrainingPoint::binary(p.position, 1)).collect();
        let scan = TrainingSet::new(trav).unwrap();
        let run = |seed| {
            let mut g = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
            update_traversability(
                &mut g,
                &sem_grid,
                &scan,
                &sem_cfg,
                &TraversabilityConfig::default(),
                &KernelParams::default(),
                &PseudoSampler::new(seed, 0),
            )
            .unwrap();
            g
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn variance_contracts_at_fixed_mean() {
        let mut prev = f64::INFINITY;
        for n in 1..50 {
            let v = query_traversability(&BetaCell::new(0.7 * n as f64, 0.3 * n as f64).unwrap()).variance;
            assert!(v < prev);
            prev = v;
        }
    }
}
