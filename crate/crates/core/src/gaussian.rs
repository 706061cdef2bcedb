//! Scalar layer (e.g. friction coefficient) with a conjugate Gaussian
//! posterior on the cell mean, and its use as a third source of
//! traversability evidence.

use std::collections::HashMap;

use rand::Rng;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::grid::{CellCoord, VoxelGrid};
use crate::inference::cell_weights;
use crate::kernel::KernelParams;
use crate::sampling::{PseudoSampler, SourceLayer};
use crate::semantic::{DirichletCell, SemanticConfig};
use crate::training::{Payload, TrainingSet};
use crate::traversability::{
    accumulate_binary_evidence, binary_observations, semantic_pseudo_measurements, BetaCell, TraversabilityConfig,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianLayerConfig {
    pub prior_mean: f64,
    /// Known observation noise variance sigma^2.
    pub noise_variance: f64,
    /// Confidence lambda in the prior; the prior variance is sigma^2 / lambda.
    pub prior_confidence: f64,
    /// Band of acceptable values used to deduce traversability.
    pub d_low: f64,
    pub d_high: f64,
}

impl GaussianLayerConfig {
    pub fn new(prior_mean: f64, noise_variance: f64, prior_confidence: f64, d_low: f64, d_high: f64) -> Result<Self> {
        if !prior_mean.is_finite() {
            return Err(Error::InvalidParameter(format!("prior mean must be finite, got {prior_mean}")));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise variance must be positive, got {noise_variance}")));
        }
        if !(prior_confidence > 0.0 && prior_confidence.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "prior confidence must be positive, got {prior_confidence}"
            )));
        }
        if !(d_low < d_high) {
            return Err(Error::InvalidParameter(format!("need d_low < d_high, got {d_low} >= {d_high}")));
        }
        Ok(GaussianLayerConfig {
            prior_mean,
            noise_variance,
            prior_confidence,
            d_low,
            d_high,
        })
    }
}

/// Kernel-weighted sufficient statistics of one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct GaussianCell {
    weighted_sum: Fixed,
    weight_sum: Fixed,
}

impl GaussianCell {
    pub fn new(weighted_sum: f64, weight_sum: f64) -> Result<Self> {
        let ws = Fixed::from_f64(weighted_sum)
            .ok_or_else(|| Error::InvalidParameter(format!("weighted sum {weighted_sum} not representable")))?;
        match Fixed::from_f64(weight_sum) {
            Some(w) if weight_sum >= 0.0 => Ok(GaussianCell::from_fixed(ws, w)),
            _ => Err(Error::InvalidParameter(format!("weight sum must be non-negative, got {weight_sum}"))),
        }
    }

    pub(crate) fn from_fixed(weighted_sum: Fixed, weight_sum: Fixed) -> Self {
        GaussianCell {
            weighted_sum,
            weight_sum,
        }
    }

    pub fn weighted_sum(&self) -> f64 {
        self.weighted_sum.to_f64()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum.to_f64()
    }

    pub fn weighted_sum_fixed(&self) -> Fixed {
        self.weighted_sum
    }

    pub fn weight_sum_fixed(&self) -> Fixed {
        self.weight_sum
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianEstimate {
    pub mean: f64,
    pub variance: f64,
}

pub fn update_gaussian(grid: &mut VoxelGrid<GaussianCell>, scan: &TrainingSet, kernel: &KernelParams) -> Result<()> {
    let values = scan
        .points()
        .iter()
        .map(|p| match p.payload {
            Payload::Scalar(f) if f.is_finite() => Ok(f),
            Payload::Scalar(f) => Err(Error::InvalidMeasurement(format!("non-finite scalar measurement {f}"))),
            other => Err(Error::InvalidMeasurement(format!("expected a scalar payload, got {other:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut updates = Vec::new();
    for (c, weights) in cell_weights(grid, scan, kernel) {
        let mut ws = Fixed::ZERO;
        let mut w = Fixed::ZERO;
        for (id, k) in weights {
            let kf = k.to_f64() * values[id];
            ws += Fixed::from_f64(kf)
                .ok_or_else(|| Error::InvalidMeasurement(format!("scalar measurement {} too large", values[id])))?;
            w += k;
        }
        updates.push((c, ws, w));
    }
    for (c, ws, w) in updates {
        let cell = grid.get_or_insert_with(c, GaussianCell::default);
        cell.weighted_sum += ws;
        cell.weight_sum += w;
    }
    Ok(())
}

pub fn query_gaussian(cell: &GaussianCell, cfg: &GaussianLayerConfig) -> GaussianEstimate {
    let denom = cfg.prior_confidence + cell.weight_sum();
    GaussianEstimate {
        mean: (cfg.prior_confidence * cfg.prior_mean + cell.weighted_sum()) / denom,
        variance: cfg.noise_variance / denom,
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `Pr(d_low <= mu <= d_high)` for `mu ~ N(mean, variance)`.
pub fn gaussian_to_bernoulli(mean: f64, variance: f64, d_low: f64, d_high: f64) -> Result<f64> {
    if !(d_low < d_high) {
        return Err(Error::InvalidParameter(format!("need d_low < d_high, got {d_low} >= {d_high}")));
    }
    if !(variance > 0.0) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite mean and positive variance, got {mean}, {variance}")));
    }
    let sd = variance.sqrt();
    let p = normal_cdf((d_high - mean) / sd) - normal_cdf((d_low - mean) / sd);
    Ok(p.clamp(0.0, 1.0))
}

/// Friction pseudo-measurement per training point, drawn once per friction
/// cell per scan. Unobserved cells use the prior.
pub fn friction_pseudo_measurements(
    grid: &VoxelGrid<GaussianCell>,
    cfg: &GaussianLayerConfig,
    scan: &TrainingSet,
    sampler: &PseudoSampler,
) -> Result<Vec<u8>> {
    let empty = GaussianCell::default();
    let mut memo: HashMap<CellCoord, u8> = HashMap::new();
    scan.points()
        .iter()
        .map(|p| {
            let c = grid.cell_of(p.position)?;
            if let Some(&f) = memo.get(&c) {
                return Ok(f);
            }
            let est = query_gaussian(grid.get(&c).unwrap_or(&empty), cfg);
            let prob = gaussian_to_bernoulli(est.mean, est.variance, cfg.d_low, cfg.d_high)?;
            let u: f64 = sampler.stream(SourceLayer::Friction, c).random();
            let f = u8::from(u <= prob);
            memo.insert(c, f);
            Ok(f)
        })
        .collect()
}

/// Traversability update fusing semantic and friction pseudo-measurements
/// with the direct observations: each point adds `y' + f' + z` to alpha and
/// `3 - y' - f' - z` to beta, scaled by its kernel weight.
#[allow(clippy::too_many_arguments)]
pub fn update_traversability_threeway(
    trav_grid: &mut VoxelGrid<BetaCell>,
    sem_grid: &VoxelGrid<DirichletCell>,
    friction_grid: &VoxelGrid<GaussianCell>,
    scan: &TrainingSet,
    sem_cfg: &SemanticConfig,
    trav_cfg: &TraversabilityConfig,
    friction_cfg: &GaussianLayerConfig,
    kernel: &KernelParams,
    sampler: &PseudoSampler,
) -> Result<()> {
    let z = binary_observations(scan)?;
    let y = semantic_pseudo_measurements(sem_grid, sem_cfg, scan, sampler)?;
    let f = friction_pseudo_measurements(friction_grid, friction_cfg, scan, sampler)?;
    let successes: Vec<u32> = (0..z.len()).map(|i| (y[i] + f[i] + z[i]) as u32).collect();
    accumulate_binary_evidence(trav_grid, scan, &successes, 3, trav_cfg, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::training::TrainingPoint;
    use crate::traversability::query_traversability;

    const CENTER: Point3 = Point3::new(0.05, 0.05, 0.05);

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn cfg() -> GaussianLayerConfig {
        GaussianLayerConfig::new(0.5, 0.04, 1.0, 0.3, 0.7).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(GaussianLayerConfig::new(0.5, 0.0, 1.0, 0.3, 0.7).is_err());
        assert!(GaussianLayerConfig::new(0.5, 0.04, 0.0, 0.3, 0.7).is_err());
        assert!(GaussianLayerConfig::new(0.5, 0.04, 1.0, 0.7, 0.7).is_err());
        assert!(GaussianLayerConfig::new(f64::NAN, 0.04, 1.0, 0.3, 0.7).is_err());
    }

    #[test]
    fn single_point_update() {
        let mut grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let scan = TrainingSet::new(vec![TrainingPoint::scalar(CENTER, 0.8)]).unwrap();
        update_gaussian(&mut grid, &scan, &KernelParams::new(0.3, 1.0).unwrap()).unwrap();
        let cell = grid.at(CENTER).unwrap();
        assert_eq!((cell.weighted_sum(), cell.weight_sum()), (0.8, 1.0));
    }

    #[test]
    fn empty_scan_and_bad_payloads() {
        let mut grid = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        update_gaussian(&mut grid, &TrainingSet::empty(), &KernelParams::default()).unwrap();
        assert!(grid.is_empty());
        let nan = TrainingSet::new(vec![TrainingPoint::scalar(CENTER, f64::NAN)]).unwrap();
        assert!(update_gaussian(&mut grid, &nan, &KernelParams::default()).is_err());
        let wrong = TrainingSet::new(vec![TrainingPoint::binary(CENTER, 1)]).unwrap();
        assert!(update_gaussian(&mut grid, &wrong, &KernelParams::default()).is_err());
        assert!(grid.is_empty());
    }

    #[test]
    fn posterior_examples() {
        let e = query_gaussian(&GaussianCell::default(), &cfg());
        assert_eq!((e.mean, e.variance), (0.5, 0.04));
        let e = query_gaussian(&GaussianCell::new(0.8, 1.0).unwrap(), &cfg());
        assert!(close(e.mean, 0.65, 1e-15));
        assert!(close(e.variance, 0.02, 1e-15));
    }

    #[test]
    fn posterior_concentrates_on_data() {
        let c = 0.9;
        let w = 1e9;
        let e = query_gaussian(&GaussianCell::new(c * w, w).unwrap(), &cfg());
        assert!(close(e.mean, c, 1e-9));
        assert!(e.variance < 1e-10);
    }

    #[test]
    fn bernoulli_probability() {
        let p = gaussian_to_bernoulli(0.5, 0.01, 0.3, 0.7).unwrap();
        // Phi(2) - Phi(-2) = erf(sqrt 2)
        assert!(close(p, 0.954_499_736_103_641_6, 1e-7));
        assert!(gaussian_to_bernoulli(0.5, 1e-12, 0.3, 0.7).unwrap() > 1.0 - 1e-12);
        assert!(gaussian_to_bernoulli(-5.0, 1e-4, 0.3, 0.7).unwrap() < 1e-12);
        assert!(gaussian_to_bernoulli(0.5, 0.01, 0.7, 0.3).is_err());
        assert!(gaussian_to_bernoulli(0.5, 0.0, 0.3, 0.7).is_err());
    }

    #[test]
    fn wide_band_covers_everything() {
        for (m, v) in [(0.0, 1.0), (3.0, 0.25), (-2.0, 4.0f64)] {
            let sd = v.sqrt();
            let p = gaussian_to_bernoulli(m, v, m - 10.0 * sd, m + 10.0 * sd).unwrap();
            assert!(close(p, 1.0, 1e-6));
        }
    }

    #[test]
    fn band_probability_peaks_at_center() {
        let (lo, hi) = (0.3, 0.7);
        let mid = gaussian_to_bernoulli(0.5, 0.02, lo, hi).unwrap();
        let mut prev = 0.0;
        for i in 0..=50 {
            let m = -0.5 + i as f64 * 0.02; // up to the midpoint
            let p = gaussian_to_bernoulli(m, 0.02, lo, hi).unwrap();
            assert!(p >= prev);
            prev = p;
            // mirror image about the midpoint
            let q = gaussian_to_bernoulli(1.0 - m, 0.02, lo, hi).unwrap();
            assert!((p - q).abs() < 1e-9, "{p} vs {q}");
            assert!(p <= mid + 1e-15);
        }
    }

    fn threeway_single(z: u8, f: f64) -> BetaCell {
        // semantic layer certain about the class of `z`, friction layer
        // heavily observed at value `f`
        let sem_cfg = SemanticConfig::new(2, 0.001, &[0]).unwrap();
        let mut sem = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let alpha = if z == 1 { [1e6, 1.0] } else { [1.0, 1e6] };
        sem.insert(CellCoord::new(0, 0, 0), DirichletCell::from_alpha(&alpha).unwrap());
        let mut fr = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        fr.insert(CellCoord::new(0, 0, 0), GaussianCell::new(f * 1e6, 1e6).unwrap());
        let mut trav = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let scan = TrainingSet::new(vec![TrainingPoint::binary(CENTER, z)]).unwrap();
        update_traversability_threeway(
            &mut trav,
            &sem,
            &fr,
            &scan,
            &sem_cfg,
            &TraversabilityConfig::default(),
            &cfg(),
            &KernelParams::default(),
            &PseudoSampler::new(3, 0),
        )
        .unwrap();
        *trav.at(CENTER).unwrap()
    }

    #[test]
    fn threeway_all_positive() {
        let c = threeway_single(1, 0.5);
        assert_eq!((c.alpha(), c.beta()), (30.001, 0.001));
    }

    #[test]
    fn threeway_all_negative() {
        let c = threeway_single(0, 5.0);
        assert_eq!((c.alpha(), c.beta()), (0.001, 30.001));
    }

    #[test]
    fn agreeing_friction_pulls_mean_toward_observations() {
        // Inject f' = z: a third source agreeing with z moves the mean
        // further toward z than two sources where y' disagrees half the time.
        let scan = TrainingSet::new(
            (0..10)
                .map(|_| TrainingPoint::binary(CENTER, 1))
                .collect(),
        )
        .unwrap();
        let y: Vec<u32> = (0..10).map(|i| (i % 2) as u32).collect();
        let cfg = TraversabilityConfig::default();
        let k = KernelParams::default();
        let mut two = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let s2: Vec<u32> = y.iter().map(|y| y + 1).collect();
        accumulate_binary_evidence(&mut two, &scan, &s2, 2, &cfg, &k).unwrap();
        let mut three = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let s3: Vec<u32> = y.iter().map(|y| y + 2).collect();
        accumulate_binary_evidence(&mut three, &scan, &s3, 3, &cfg, &k).unwrap();
        for (c, cell) in two.iter() {
            let m2 = query_traversability(cell).mean;
            let m3 = query_traversability(three.get(c).unwrap()).mean;
            assert!(m3 > m2);
            // closed forms: 3/4 of the mass vs 5/6
            let total2 = cell.alpha() + cell.beta();
            assert!((m2 - (0.001 + 0.75 * (total2 - 0.002)) / total2).abs() < 1e-9);
            let cell3 = three.get(c).unwrap();
            let total3 = cell3.alpha() + cell3.beta();
            assert!((m3 - (0.001 + 5.0 / 6.0 * (total3 - 0.002)) / total3).abs() < 1e-9);
        }
    }
}
