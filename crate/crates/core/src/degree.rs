//! Degree computation.
//!
//! The preimage engine counts the oriented solutions of `φ(x) = y` for a few
//! random regular values `y`, found by multistart Gauss–Newton in source
//! charts. It is authoritative. The Monte Carlo engine averages the signed
//! Jacobian over uniform samples of the source, which for a self-map equals
//! the degree; it serves as a cross-check.
//!
//! Every trial draws its randomness from `seed.child(..)` keyed by its index,
//! and results are gathered in index order, so output does not depend on the
//! number of workers.

use std::fmt;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::{
    self, ambient_distance, deviation_ambient, frame_ambient, Point, Seed, EPS_MEMBERSHIP,
};
use crate::maps::{self, MapHandle};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub num_targets: usize,
    pub num_starts: usize,
    pub mc_samples: usize,
    /// Targets with any preimage below this `|signed Jacobian|` are rejected.
    pub j_min: f64,
    pub residual_tol: f64,
    pub dedupe_radius: f64,
    pub chart_radius: f64,
    pub max_iterations: usize,
    /// A Gauss–Newton step longer than this aborts the start.
    pub divergence_step: f64,
    pub workers: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            num_targets: 5,
            num_starts: 5000,
            mc_samples: 1_000_000,
            j_min: 1e-6,
            residual_tol: 1e-10,
            dedupe_radius: 1e-4,
            chart_radius: 0.4,
            max_iterations: 100,
            divergence_step: 2.0,
            workers: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Preimage,
    MonteCarlo,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Preimage => write!(f, "preimage"),
            Engine::MonteCarlo => write!(f, "mc"),
        }
    }
}

/// Diagnostics for one accepted regular value.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetData {
    pub preimages: usize,
    pub signed_sum: i64,
    /// `+∞` when there are no preimages.
    pub min_abs_jacobian: f64,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeReport {
    pub map_id: String,
    pub engine: Engine,
    pub degree: i64,
    /// Signed sum at the first target (preimage) or the sample mean (mc).
    pub raw_estimate: f64,
    /// Targets drawn, including rejected near-critical ones.
    pub targets_tried: usize,
    pub targets: Vec<TargetData>,
    pub agreement: bool,
    pub stderr: Option<f64>,
    pub seed: Seed,
}

impl DegreeReport {
    pub fn require_agreement(self) -> Result<DegreeReport> {
        if self.agreement {
            Ok(self)
        } else {
            Err(Error::Disagreement(
                self.targets.iter().map(|t| t.signed_sum).collect(),
            ))
        }
    }

    pub fn signed_sums(&self) -> Vec<i64> {
        self.targets.iter().map(|t| t.signed_sum).collect()
    }
}

fn check_dims(phi: &MapHandle) -> Result<()> {
    let (s, t) = (phi.source.dim(), phi.target.dim());
    if s != t {
        return Err(Error::DimensionMismatch {
            source_dim: s,
            target_dim: t,
        });
    }
    Ok(())
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
    {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}

pub(crate) fn signed_jacobian_ambient(phi: &MapHandle, x: &[f64]) -> Result<f64> {
    check_dims(phi)?;
    let y = phi.eval_ambient::<f64>(x)?;
    let dev = deviation_ambient(&phi.target, &y);
    if dev > EPS_MEMBERSHIP {
        return Err(Error::OffManifold {
            manifold: phi.target.to_string(),
            deviation: dev,
        });
    }
    let source_frame = frame_ambient(&phi.source, x)?;
    let target_frame = frame_ambient(&phi.target, &y)?;
    let pushed = phi.push_frame(x, &source_frame)?;
    Ok((target_frame.transpose() * pushed).determinant())
}

/// Determinant of `dφ_x` in positively oriented orthonormal frames.
pub fn signed_jacobian(phi: &MapHandle, x: &Point) -> Result<f64> {
    signed_jacobian_ambient(phi, &x.ambient())
}

/// One Gauss–Newton solve of `φ(x) = y` from `x0`; returns the solution and
/// its residual.
fn newton_solve(
    phi: &MapHandle,
    mut x: Vec<f64>,
    y: &[f64],
    cfg: &EngineConfig,
) -> Option<(Vec<f64>, f64)> {
    let dim = phi.source.dim();
    for _ in 0..=cfg.max_iterations {
        let fx = phi.eval_ambient::<f64>(&x).ok()?;
        let residual = DVector::from_iterator(fx.len(), fx.iter().zip(y).map(|(a, b)| a - b));
        let rn = residual.norm();
        if !rn.is_finite() {
            return None;
        }
        if rn <= cfg.residual_tol {
            return Some((x, rn));
        }
        let frame = frame_ambient(&phi.source, &x).ok()?;
        let jac = phi.push_frame(&x, &frame).ok()?;
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max().max(1.0);
        let mut delta = svd.solve(&(-residual), cutoff).ok()?;
        let step = delta.norm();
        if !step.is_finite() || step > cfg.divergence_step {
            return None;
        }
        if step > cfg.chart_radius {
            delta *= cfg.chart_radius / step;
        }
        debug_assert_eq!(delta.len(), dim);
        x = manifold::chart_ambient(&phi.source, &x, &frame, delta.as_slice()).ok()?;
    }
    None
}

enum TargetOutcome {
    Accepted(TargetData),
    NearCritical,
}

fn count_preimages(
    phi: &MapHandle,
    y: &[f64],
    start_seed: Seed,
    cfg: &EngineConfig,
) -> TargetOutcome {
    let solutions: Vec<Option<(Vec<f64>, f64)>> = (0..cfg.num_starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = start_seed.child(i as u64).rng();
            let x0 = manifold::sample_ambient(&phi.source, &mut rng);
            newton_solve(phi, x0, y, cfg)
        })
        .collect();

    let mut unique: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, res) in solutions.into_iter().flatten() {
        if unique
            .iter()
            .all(|(u, _)| ambient_distance(u, &x) > cfg.dedupe_radius)
        {
            unique.push((x, res));
        }
    }

    let mut data = TargetData {
        preimages: unique.len(),
        signed_sum: 0,
        min_abs_jacobian: f64::INFINITY,
        max_residual: 0.0,
    };
    for (x, res) in &unique {
        let Ok(j) = signed_jacobian_ambient(phi, x) else {
            return TargetOutcome::NearCritical;
        };
        if j.abs() < cfg.j_min {
            return TargetOutcome::NearCritical;
        }
        data.signed_sum += if j > 0.0 { 1 } else { -1 };
        data.min_abs_jacobian = data.min_abs_jacobian.min(j.abs());
        data.max_residual = data.max_residual.max(*res);
    }
    TargetOutcome::Accepted(data)
}

/// Signed preimage count at `cfg.num_targets` random regular values.
///
/// A map that misses the sampled targets entirely (degree 0, image of
/// measure zero) reports zero preimages at every target and degree 0.
pub fn preimage_degree(phi: &MapHandle, cfg: &EngineConfig, seed: Seed) -> Result<DegreeReport> {
    check_dims(phi)?;
    let budget = 10 * cfg.num_targets.max(1);
    let mut targets = Vec::with_capacity(cfg.num_targets);
    let mut tried = 0;
    with_workers(cfg.workers, || {
        while targets.len() < cfg.num_targets {
            if tried >= budget {
                return Err(Error::TargetBudgetExhausted { attempts: tried });
            }
            let attempt = tried as u64;
            tried += 1;
            let mut rng = seed.child(2 * attempt).rng();
            let y = manifold::sample_ambient(&phi.target, &mut rng);
            match count_preimages(phi, &y, seed.child(2 * attempt + 1), cfg) {
                TargetOutcome::Accepted(d) => targets.push(d),
                TargetOutcome::NearCritical => continue,
            }
        }
        Ok(())
    })?;
    let first = targets.first().map(|t| t.signed_sum).unwrap_or(0);
    Ok(DegreeReport {
        map_id: phi.id.clone(),
        engine: Engine::Preimage,
        degree: first,
        raw_estimate: first as f64,
        targets_tried: tried,
        agreement: targets.iter().all(|t| t.signed_sum == first),
        targets,
        stderr: None,
        seed,
    })
}

/// Mean signed Jacobian over uniform samples of the source. Requires
/// `source = target`, so the volume ratio is 1.
pub fn mc_degree(
    phi: &MapHandle,
    samples: usize,
    seed: Seed,
    workers: usize,
) -> Result<DegreeReport> {
    if phi.source != phi.target {
        return Err(Error::Unsupported(format!(
            "Monte Carlo degree needs equal source and target, got {} -> {}",
            phi.source, phi.target
        )));
    }
    if samples < 2 {
        return Err(Error::Unsupported(
            "Monte Carlo needs at least 2 samples".into(),
        ));
    }
    let values: Vec<Result<f64>> = with_workers(workers, || {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let trial = seed.child(i as u64);
                let mut last = Err(Error::NonSmoothPoint(String::new()));
                // redraw on the null set where φ is not smooth
                for k in 0..8u64 {
                    let mut rng = trial.child(k).rng();
                    let x = manifold::sample_ambient(&phi.source, &mut rng);
                    last = signed_jacobian_ambient(phi, &x);
                    if last.is_ok() {
                        break;
                    }
                }
                last
            })
            .collect()
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let stderr = (var / n).sqrt();
    if 3.0 * stderr >= 0.5 {
        return Err(Error::StderrTooLarge { stderr });
    }
    let degree = mean.round() as i64;
    let agreement = (mean - degree as f64).abs() <= 3.0 * stderr + 1e-9;
    Ok(DegreeReport {
        map_id: phi.id.clone(),
        engine: Engine::MonteCarlo,
        degree,
        raw_estimate: mean,
        targets_tried: 0,
        targets: Vec::new(),
        agreement,
        stderr: Some(stderr),
        seed,
    })
}

/// A bundle map together with the base point whose fiber is inspected.
#[derive(Clone, Debug)]
pub struct BundleMapSpec {
    pub map: MapHandle,
    pub fiber_base_point: Point,
}

impl BundleMapSpec {
    /// Fiber over `(0, 0, 1)`.
    pub fn new(map: MapHandle) -> Result<BundleMapSpec> {
        let north = Point::s5(
            manifold::Complex64::new(0.0, 0.0),
            manifold::Complex64::new(0.0, 0.0),
            manifold::Complex64::new(1.0, 0.0),
        );
        BundleMapSpec::with_base_point(map, north)
    }

    pub fn with_base_point(map: MapHandle, fiber_base_point: Point) -> Result<BundleMapSpec> {
        if !maps::check_covers(&map)? {
            return Err(Error::Unsupported(format!(
                "{} does not cover its declared base map",
                map.id
            )));
        }
        Ok(BundleMapSpec {
            map,
            fiber_base_point,
        })
    }

    pub fn base_map(&self) -> &MapHandle {
        self.map.base_map().expect("checked at construction")
    }
}

/// Degree of the restriction of the bundle map to one fiber.
pub fn fiber_restriction_degree(
    spec: &BundleMapSpec,
    cfg: &EngineConfig,
    seed: Seed,
) -> Result<DegreeReport> {
    let fiber = maps::fiber_restriction(&spec.map, &spec.fiber_base_point)?;
    preimage_degree(&fiber, cfg, seed)
}

#[derive(Clone, Debug)]
pub struct MultiplicativityReport {
    pub total: DegreeReport,
    pub fiber: DegreeReport,
    pub base: DegreeReport,
    pub product_holds: bool,
}

/// Computes total, fiber and base degrees independently and checks
/// `deg(total) = deg(fiber)·deg(base)`.
pub fn verify_multiplicativity(
    spec: &BundleMapSpec,
    cfg: &EngineConfig,
    seed: Seed,
) -> Result<MultiplicativityReport> {
    let total = preimage_degree(&spec.map, cfg, seed.child(0))?;
    let fiber = fiber_restriction_degree(spec, cfg, seed.child(1))?;
    let base = preimage_degree(spec.base_map(), cfg, seed.child(2))?;
    let product_holds = total.agreement
        && fiber.agreement
        && base.agreement
        && total.degree == fiber.degree * base.degree;
    Ok(MultiplicativityReport {
        total,
        fiber,
        base,
        product_holds,
    })
}

/// Whether [`mc_degree`] accepts this map.
pub fn mc_supported(phi: &MapHandle) -> bool {
    phi.source == phi.target
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldId;
    use crate::maps::{identity, map_f, suspension_power};

    fn quick() -> EngineConfig {
        EngineConfig {
            num_starts: 300,
            num_targets: 3,
            ..EngineConfig::default()
        }
    }

    #[test]
    fn identity_jacobian_is_one() {
        for m in [
            ManifoldId::S3,
            ManifoldId::S5,
            ManifoldId::SU3,
            ManifoldId::S3xS5,
        ] {
            let x = manifold::sample(&m, Seed(1));
            let j = signed_jacobian(&identity(&m), &x).unwrap();
            assert!((j - 1.0).abs() < 1e-10, "{m}: {j}");
        }
    }

    #[test]
    fn reflection_jacobian_is_minus_one() {
        let r = suspension_power(5, -1).unwrap();
        for s in 0..5 {
            let x = manifold::sample(&ManifoldId::S5, Seed(s));
            assert!((signed_jacobian(&r, &x).unwrap() + 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn unequal_dimensions_are_rejected() {
        let p = maps::projection_p();
        assert!(matches!(
            preimage_degree(&p, &quick(), Seed(0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn f_has_degree_two_on_a_small_budget() {
        let r = preimage_degree(&map_f(), &quick(), Seed(5)).unwrap();
        assert!(r.agreement);
        assert_eq!(r.degree, 2);
    }

    #[test]
    fn degree_zero_map_has_no_preimages() {
        let r = preimage_degree(&suspension_power(5, 0).unwrap(), &quick(), Seed(2)).unwrap();
        assert_eq!(r.degree, 0);
        assert!(r.targets.iter().all(|t| t.preimages == 0));
    }

    #[test]
    fn mc_identity_has_zero_variance() {
        let r = mc_degree(&identity(&ManifoldId::S5), 10_000, Seed(1), 1).unwrap();
        assert_eq!(r.degree, 1);
        assert!((r.raw_estimate - 1.0).abs() < 1e-12);
        assert!(r.stderr.unwrap() < 1e-12);
        assert!(r.agreement);
    }

    #[test]
    fn mc_rejects_cross_manifold_maps() {
        let ft = maps::map_ftilde(&map_f()).unwrap();
        assert!(matches!(
            mc_degree(&ft, 100, Seed(0), 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn workers_do_not_change_results() {
        let mut cfg = quick();
        let a = preimage_degree(&map_f(), &cfg, Seed(3)).unwrap();
        cfg.workers = 3;
        let b = preimage_degree(&map_f(), &cfg, Seed(3)).unwrap();
        assert_eq!(a, b);
        let ma = mc_degree(&map_f(), 2000, Seed(4), 1).unwrap();
        let mb = mc_degree(&map_f(), 2000, Seed(4), 3).unwrap();
        assert_eq!(ma, mb);
    }
}
