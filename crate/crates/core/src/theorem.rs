//! The full reproduction run behind `verify-theorem`, and `selftest`.
//!
//! Each criterion yields one record. Criterion `k` draws all its randomness
//! from `seed.child(k)`, so criteria are independent of each other and of
//! the order they run in.

use std::time::{Duration, Instant};

use crate::cohomology::{
    admissible_degree, degree_set_closed_form, induced_coefficients, naturality_ok,
    verify_only_obstruction, NumericDegrees, Space,
};
use crate::degree::{
    mc_degree, preimage_degree, verify_multiplicativity, BundleMapSpec, DegreeReport, EngineConfig,
    MultiplicativityReport,
};
use crate::error::{Error, Result};
use crate::manifold::Seed;
use crate::maps::{self, resolve_map};
use crate::properties::{self, PropertyConfig};
use crate::report::{Record, Report};

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "deg_f"),
    (2, "deg_g"),
    (3, "g_multiplicativity"),
    (4, "deg_h"),
    (5, "ftilde_multiplicativity"),
    (6, "ftilde_m"),
    (7, "su3_powers"),
    (8, "product_realizability"),
    (9, "oracle_equivalence"),
    (10, "negative_controls"),
    (11, "property_suites"),
    (12, "determinism"),
];

pub const LIMIT_DEG_F: Duration = Duration::from_secs(60);
pub const LIMIT_DEG_G: Duration = Duration::from_secs(600);
pub const LIMIT_DEG_H: Duration = Duration::from_secs(600);
pub const LIMIT_FTILDE_M: Duration = Duration::from_secs(300);
pub const LIMIT_ORACLE: Duration = Duration::from_secs(1);
/// Number of seeds for the degree of `f`.
pub const F_SEEDS: u64 = 3;
pub const MIN_TARGETS: usize = 5;
pub const FTILDE_MS: [i64; 3] = [1, 3, 5];
pub const PRODUCT_DEGREES: [i32; 7] = [-3, -2, -1, 0, 1, 2, 3];
/// Sample size of the Monte Carlo leg of the in-process determinism check.
pub const DETERMINISM_MC_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremConfig {
    pub engine: EngineConfig,
    pub seed: Seed,
    pub range_bound: i64,
    pub trials: usize,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        TheoremConfig {
            engine: EngineConfig::default(),
            seed: Seed(1),
            range_bound: 1000,
            trials: 10_000,
        }
    }
}

/// Degrees computed by earlier criteria that later ones reuse.
#[derive(Default)]
struct Context {
    deg_f: Option<i64>,
    deg_g: Option<i64>,
    deg_h: Option<i64>,
    deg_ftilde: Option<i64>,
}

fn agreed(r: &DegreeReport) -> Result<i64> {
    Ok(r.clone().require_agreement()?.degree)
}

fn admissible_for(source: Space, target: Space, d: i64) -> bool {
    admissible_degree(source, target, d) && degree_set_closed_form(source, target).contains(d)
}

fn push_mult(rec: &mut Record, m: &MultiplicativityReport) {
    rec.push("total", m.total.degree)
        .push("fiber", m.fiber.degree)
        .push("base", m.base.degree)
        .push("product_holds", m.product_holds);
}

fn criterion_body(
    id: u32,
    cfg: &TheoremConfig,
    ctx: &mut Context,
    rec: &mut Record,
) -> Result<bool> {
    let seed = cfg.seed.child(id as u64);
    let eng = &cfg.engine;
    let start = Instant::now();
    match id {
        1 => {
            let f = maps::map_f();
            let mut degrees = Vec::new();
            let mut counts = Vec::new();
            for s in 0..F_SEEDS {
                let r = preimage_degree(&f, eng, seed.child(s))?;
                counts.push(r.targets.len());
                degrees.push(agreed(&r)?);
            }
            let common = degrees.iter().all(|&d| d == degrees[0]);
            ctx.deg_f = common.then_some(degrees[0]);
            rec.push_list("degrees", &degrees)
                .push_list("targets_per_seed", &counts);
            Ok(common
                && degrees[0].abs() == 2
                && counts.iter().all(|&c| c >= MIN_TARGETS)
                && start.elapsed() < LIMIT_DEG_F)
        }
        2 => {
            let g = maps::map_g();
            let pre = preimage_degree(&g, eng, seed.child(0))?;
            let d = agreed(&pre)?;
            let mc = mc_degree(&g, eng.mc_samples, seed.child(1), eng.workers)?;
            let stderr = mc.stderr.unwrap_or(f64::INFINITY);
            let within = (mc.raw_estimate - d as f64).abs() <= 3.0 * stderr;
            ctx.deg_g = Some(d);
            let adm = admissible_for(Space::SU3, Space::SU3, d);
            rec.push("preimage_degree", d)
                .push_list("targets", &pre.signed_sums())
                .push("mc_estimate", mc.raw_estimate)
                .push("mc_stderr", stderr)
                .push("mc_within_3_stderr", within)
                .push("admissible", adm);
            Ok(d == 4 && within && adm && start.elapsed() < LIMIT_DEG_G)
        }
        3 => {
            let spec = BundleMapSpec::new(maps::map_g())?;
            let m = verify_multiplicativity(&spec, eng, seed)?;
            push_mult(rec, &m);
            let coeffs = induced_coefficients(
                "g",
                NumericDegrees {
                    total: Some(m.total.degree),
                    base: Some(m.base.degree),
                    pullback_base: None,
                },
            )?;
            let natural = coeffs.induced_map().is_some_and(|i| naturality_ok(&i));
            rec.push_opt("kappa", coeffs.kappa)
                .push_opt("lambda", coeffs.lambda)
                .push("naturality", natural);
            Ok(m.product_holds
                && m.fiber.degree.abs() == 2
                && m.base.degree.abs() == 2
                && m.total.degree.abs() == 4
                && natural)
        }
        4 => {
            let h = maps::map_h();
            let r = preimage_degree(&h, eng, seed)?;
            let d = agreed(&r)?;
            ctx.deg_h = Some(d);
            let target = Space::of(&h.target, ctx.deg_f);
            let adm = target.is_some_and(|t| admissible_for(Space::SU3, t, d));
            rec.push_degree(&r);
            rec.push_opt("target_space", target).push("admissible", adm);
            Ok(d.abs() == 2 && adm && start.elapsed() < LIMIT_DEG_H)
        }
        5 => {
            let ft = maps::map_ftilde(&maps::map_f())?;
            let spec = BundleMapSpec::new(ft.clone())?;
            let m = verify_multiplicativity(&spec, eng, seed)?;
            push_mult(rec, &m);
            ctx.deg_ftilde = Some(m.total.degree);
            let source = Space::of(&ft.source, Some(m.base.degree));
            let adm = source.is_some_and(|s| admissible_for(s, Space::SU3, m.total.degree));
            // g factors as f̃∘h, so the three signed degrees must multiply out
            let composition = match (ctx.deg_g, ctx.deg_h) {
                (Some(g), Some(h)) => Some(g == m.total.degree * h),
                _ => None,
            };
            rec.push_opt("source_space", source)
                .push("admissible", adm)
                .push_opt("g_equals_ftilde_times_h", composition);
            Ok(m.product_holds
                && m.total.degree.abs() == 2
                && m.fiber.degree.abs() == 1
                && m.base.degree.abs() == 2
                && adm
                && composition != Some(false))
        }
        6 => {
            let mut degrees = Vec::new();
            let mut times = Vec::new();
            let mut ok = true;
            for (i, m) in FTILDE_MS.iter().enumerate() {
                let t = Instant::now();
                let phi = resolve_map(&format!("ftilde:{m}"))?;
                let d = agreed(&preimage_degree(&phi, eng, seed.child(i as u64))?)?;
                let elapsed = t.elapsed();
                let source = Space::of(&phi.source, Some(*m));
                ok &= d.abs() == *m
                    && elapsed < LIMIT_FTILDE_M
                    && source.is_some_and(|s| admissible_for(s, Space::SU3, d));
                degrees.push(d);
                times.push(elapsed.as_millis());
            }
            rec.push_list("m", &FTILDE_MS)
                .push_list("degrees", &degrees)
                .push_list("runtime_each_ms", &times);
            Ok(ok)
        }
        7 => {
            let d3 = agreed(&preimage_degree(&maps::su3_power(3), eng, seed.child(0))?)?;
            let d2 = agreed(&preimage_degree(&maps::su3_power(2), eng, seed.child(1))?)?;
            let a3 = admissible_for(Space::SU3, Space::SU3, d3);
            let a2 = admissible_for(Space::SU3, Space::SU3, d2);
            rec.push("su3pow_3", d3)
                .push("su3pow_2", d2)
                .push("admissible_3", a3)
                .push("admissible_2", a2);
            Ok(d3 == 9 && d2 == 4 && a3 && a2)
        }
        8 => {
            let id = maps::identity(&crate::manifold::ManifoldId::S3);
            let mut degrees = Vec::new();
            for (i, &d) in PRODUCT_DEGREES.iter().enumerate() {
                let phi = maps::product_map(&id, &maps::suspension_power(5, d)?)?;
                degrees.push(agreed(&preimage_degree(&phi, eng, seed.child(i as u64))?)?);
            }
            rec.push_list("expected", &PRODUCT_DEGREES)
                .push_list("degrees", &degrees);
            Ok(degrees
                .iter()
                .zip(PRODUCT_DEGREES)
                .all(|(&got, want)| got == want as i64))
        }
        9 => {
            let mut ok = true;
            let mut sets = Vec::new();
            for s in Space::ALL {
                for t in Space::ALL {
                    ok &= verify_only_obstruction(s, t, cfg.range_bound);
                    sets.push(format!("{s}->{t}:{}", degree_set_closed_form(s, t)));
                }
            }
            let elapsed = start.elapsed();
            rec.push("range", cfg.range_bound).push_list("sets", &sets);
            Ok(ok && elapsed < LIMIT_ORACLE)
        }
        10 => {
            let su3_2 = admissible_degree(Space::SU3, Space::SU3, 2);
            let su3_6 = admissible_degree(Space::SU3, Space::SU3, 6);
            let odd: Vec<i64> = (-cfg.range_bound..=cfg.range_bound)
                .filter(|d| d.rem_euclid(2) == 1)
                .collect();
            let b_odd = odd
                .iter()
                .any(|&d| admissible_degree(Space::S3xS5, Space::SU3, d));
            let c_odd = odd
                .iter()
                .any(|&d| admissible_degree(Space::SU3, Space::S3xS5, d));
            rec.push("su3_su3_2", su3_2)
                .push("su3_su3_6", su3_6)
                .push("s3xs5_su3_any_odd", b_odd)
                .push("su3_s3xs5_any_odd", c_odd);
            Ok(!su3_2 && !su3_6 && !b_odd && !c_odd && !odd.is_empty())
        }
        11 => {
            let pc = PropertyConfig {
                trials: cfg.trials,
                seed,
                ..PropertyConfig::default()
            };
            let mut ok = true;
            for r in properties::run_all(&pc)? {
                rec.push(r.name, r.worst);
                ok &= r.pass;
            }
            Ok(ok)
        }
        12 => {
            let f = maps::map_f();
            let g = maps::map_g();
            let samples = DETERMINISM_MC_SAMPLES.min(eng.mc_samples.max(2));
            let run = |workers: usize| -> Result<(DegreeReport, DegreeReport)> {
                let e = EngineConfig { workers, ..*eng };
                Ok((
                    preimage_degree(&f, &e, seed.child(0))?,
                    mc_degree(&g, samples, seed.child(1), workers)?,
                ))
            };
            let a = run(1)?;
            let b = run(1)?;
            let c = run(4)?;
            let repeat = a == b;
            let workers_same = a.0.degree == c.0.degree && a.1.degree == c.1.degree && a == c;
            rec.push("repeat_identical", repeat)
                .push("workers_1_4_identical", workers_same);
            Ok(repeat && workers_same)
        }
        _ => Err(Error::Unsupported(format!("no criterion {id}"))),
    }
}

fn run_one(id: u32, name: &str, cfg: &TheoremConfig, ctx: &mut Context) -> Record {
    let start = Instant::now();
    let mut rec = Record::new("verify-theorem");
    rec.push("criterion", id).push("name", name);
    let pass = match criterion_body(id, cfg, ctx, &mut rec) {
        Ok(p) => p,
        Err(e) => {
            rec.push("error", e);
            false
        }
    };
    rec.push("range_bound", cfg.range_bound)
        .push("trials", cfg.trials)
        .push_config(cfg.seed, &cfg.engine);
    rec.finish(start.elapsed().as_millis(), pass)
}

/// Runs the chosen criteria (all when `only` is empty) in id order, then an
/// overall record. `on_record` sees each record as soon as it is final.
pub fn verify_theorem_with(
    cfg: &TheoremConfig,
    only: &[u32],
    mut on_record: impl FnMut(&Record),
) -> Report {
    let start = Instant::now();
    let mut ctx = Context::default();
    let mut report = Report::default();
    for (id, name) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let rec = run_one(id, name, cfg, &mut ctx);
        on_record(&rec);
        report.push(rec);
    }
    let passed = report.records.iter().filter(|r| r.passed()).count();
    let mut overall = Record::new("verify-theorem");
    overall
        .push("overall", if report.all_pass() { "pass" } else { "fail" })
        .push("passed", passed)
        .push("total", report.records.len())
        .push_config(cfg.seed, &cfg.engine);
    let all = report.all_pass();
    let rec = overall.finish(start.elapsed().as_millis(), all);
    on_record(&rec);
    report.push(rec);
    report
}

pub fn verify_theorem(cfg: &TheoremConfig) -> Report {
    verify_theorem_with(cfg, &[], |_| {})
}

/// Property suites, one record each.
pub fn selftest(cfg: &PropertyConfig) -> Report {
    let mut report = Report::default();
    let start = Instant::now();
    match properties::run_all(cfg) {
        Ok(results) => {
            for r in results {
                let mut rec = Record::new("selftest");
                rec.push("property", r.name)
                    .push("trials", r.trials)
                    .push("worst", r.worst)
                    .push("tolerance", r.tolerance)
                    .push("g_variant", format!("{:?}", cfg.g_variant))
                    .push("seed", cfg.seed.0);
                report.push(rec.finish(start.elapsed().as_millis(), r.pass));
            }
        }
        Err(e) => {
            let mut rec = Record::new("selftest");
            rec.push("error", e).push("seed", cfg.seed.0);
            report.push(rec.finish(start.elapsed().as_millis(), false));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        let cfg = TheoremConfig {
            trials: 200,
            ..TheoremConfig::default()
        };
        let report = verify_theorem_with(&cfg, &[9, 10, 11], |_| {});
        assert_eq!(report.records.len(), 4);
        assert!(report.all_pass(), "{report}");
        assert!(report.records[0].get("seed").is_some());
    }

    #[test]
    fn errors_become_failing_records() {
        let cfg = TheoremConfig {
            engine: EngineConfig {
                mc_samples: 1,
                num_starts: 50,
                ..EngineConfig::default()
            },
            ..TheoremConfig::default()
        };
        let report = verify_theorem_with(&cfg, &[2], |_| {});
        assert!(!report.records[0].passed());
        assert!(report.records[0].get("error").is_some());
        assert!(!report.all_pass());
    }
}
