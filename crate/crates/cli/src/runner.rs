//! Dispatch validated experiment specs to the library and collect
//! machine-readable records. Core errors become failed records with the
//! reason attached rather than aborting the whole run.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use lindyn_core::dynamics::{augment_with_witnesses, certify_density, compute_orbit, hc_grid};
use lindyn_core::matrix::CMatrix;
use lindyn_core::operators::derive_seed;
use lindyn_core::reg_groups::{annulus_witness, check_entirety_shadow, check_group_axioms};
use lindyn_core::space::{make_basis_balls, standard_basis, SpaceConfig, TargetGrid, TruncatedVector};
use lindyn_core::structure::{
    conjugate_family, direct_sum_family, product_grid, project_orbit, ConjugationMap,
    PairedFamily,
};
use lindyn_core::testers::{check_criterion, closure_check, transitivity_search};
use lindyn_core::{LinDynError, Verdict};

use crate::report::{metric_number, spec_digest, RunRecord, RunReport};
use crate::spec::{ExperimentParams, ExperimentSpec, RawPhi};

/// Orbit base used when a spec does not pin one: `xₖ = 2^{-k}`, every
/// coordinate nonzero.
pub fn default_base(dim: usize) -> TruncatedVector {
    TruncatedVector::new(
        (0..dim)
            .map(|k| Complex64::new(0.5f64.powi(k as i32), 0.0))
            .collect(),
    )
    .expect("static construction")
}

/// Run every spec in order; one record per spec, in spec order.
pub fn run_specs(specs: &[ExperimentSpec]) -> RunReport {
    let mut report = RunReport::default();
    for spec in specs {
        let start = Instant::now();
        let (verdict, metrics) = match run_one(spec) {
            Ok(outcome) => outcome,
            Err(err) => {
                let mut metrics = BTreeMap::new();
                metrics.insert("error".to_string(), Value::String(err.to_string()));
                (Verdict::Fail, metrics)
            }
        };
        report.records.push(RunRecord {
            experiment: spec.experiment.name().to_string(),
            family: spec.family.name.clone(),
            verdict,
            metrics,
            seed: spec.seed,
            spec_digest: spec_digest(spec),
        });
        report.runtimes_ms.push(start.elapsed().as_millis());
    }
    report
}

type Outcome = (Verdict, BTreeMap<String, Value>);

fn run_one(spec: &ExperimentSpec) -> lindyn_core::Result<Outcome> {
    match &spec.params {
        ExperimentParams::Density {
            epsilon,
            targets,
            orbit_count,
            use_witnesses,
            base,
        } => {
            let config = SpaceConfig::new(spec.dim, "density")?;
            let family = spec.family.build(spec.dim)?;
            let base = match base {
                Some(coords) => TruncatedVector::new(coords.iter().map(|c| c.0).collect())?,
                None => default_base(spec.dim),
            };
            let grid = targets.build(&config)?;
            let mut orbit = compute_orbit(&family, &base, *orbit_count, spec.seed)?;
            let witness_entries = if *use_witnesses {
                augment_with_witnesses(&mut orbit, &family, &grid)?
            } else {
                0
            };
            let cert = certify_density(&orbit, &grid, *epsilon)?;
            let mut metrics = BTreeMap::new();
            metrics.insert("coverage".into(), metric_number(cert.coverage));
            metrics.insert("max_gap".into(), metric_number(cert.max_gap));
            metrics.insert("targets".into(), Value::from(grid.len()));
            metrics.insert("orbit_entries".into(), Value::from(orbit.entries.len()));
            metrics.insert("witness_entries".into(), Value::from(witness_entries));
            Ok((cert.verdict, metrics))
        }
        ExperimentParams::HcGrid {
            n_balls,
            r0,
            ball_grid,
            candidates,
            op_count,
            use_witnesses,
        } => {
            let config = SpaceConfig::new(spec.dim, "hc_grid")?;
            let family = spec.family.build(spec.dim)?;
            let balls = make_basis_balls(&ball_grid.build(&config)?, *n_balls, *r0)?;
            let candidate_points = candidates.build(&config)?;
            let result = hc_grid(
                &family,
                candidate_points.points(),
                &balls,
                *op_count,
                spec.seed,
                *use_witnesses,
            )?;
            let members = result.member_count();
            let total = result.membership.len();
            let mut metrics = BTreeMap::new();
            metrics.insert("members".into(), Value::from(members));
            metrics.insert("candidates".into(), Value::from(total));
            metrics.insert("n_balls".into(), Value::from(*n_balls));
            metrics.insert(
                "member_fraction".into(),
                metric_number(if total == 0 {
                    1.0
                } else {
                    members as f64 / total as f64
                }),
            );
            Ok((Verdict::from_bool(members == total), metrics))
        }
        ExperimentParams::Transitivity {
            delta,
            pair_count,
            op_count,
            pair_extent,
            pair_effective_dims,
        } => {
            let config = SpaceConfig::new(spec.dim, "transitivity")?;
            let family = spec.family.build(spec.dim)?;
            let points = TargetGrid::seeded_random(
                &config,
                *pair_extent,
                2 * pair_count,
                *pair_effective_dims,
                derive_seed(spec.seed, 3),
            )?;
            let pairs: Vec<(TruncatedVector, TruncatedVector)> = points
                .points()
                .chunks(2)
                .map(|pair| (pair[0].clone(), pair[1].clone()))
                .collect();
            let report = transitivity_search(&family, &pairs, *delta, *op_count, spec.seed)?;
            let worst_gap = report
                .outcomes
                .iter()
                .map(|o| o.gap_in.max(o.gap_out))
                .fold(0.0f64, f64::max);
            let mut metrics = BTreeMap::new();
            metrics.insert("success_rate".into(), metric_number(report.success_rate));
            metrics.insert("pairs".into(), Value::from(pairs.len()));
            metrics.insert("worst_gap".into(), metric_number(worst_gap));
            Ok((Verdict::from_bool(report.success_rate == 1.0), metrics))
        }
        ExperimentParams::Criterion {
            k_max,
            tol,
            x0_count,
            x0_extent,
            x0_effective_dims,
            y0_count,
            y0_effective_dims,
        } => {
            let config = SpaceConfig::new(spec.dim, "criterion")?;
            let family = spec.family.build(spec.dim)?;
            if family.criterion_maps(1).is_none() {
                return Err(LinDynError::Unsupported(format!(
                    "family {} does not define criterion maps T_k, S_k",
                    spec.family.name
                )));
            }
            let x0 = TargetGrid::seeded_random(
                &config,
                *x0_extent,
                *x0_count,
                *x0_effective_dims,
                derive_seed(spec.seed, 4),
            )?;
            let y0 = TargetGrid::seeded_random(
                &config,
                *x0_extent,
                *y0_count,
                *y0_effective_dims,
                derive_seed(spec.seed, 5),
            )?;
            let schedule: Vec<usize> = (1..=*k_max).collect();
            let report = check_criterion(
                |k| {
                    family.criterion_maps(k).map(|(t, _)| t).ok_or_else(|| {
                        LinDynError::Unsupported("criterion maps unavailable".into())
                    })
                },
                |k| {
                    family.criterion_maps(k).map(|(_, s)| s).ok_or_else(|| {
                        LinDynError::Unsupported("criterion maps unavailable".into())
                    })
                },
                x0.points(),
                y0.points(),
                &schedule,
                *tol,
            )?;
            let last = report.k_schedule.len() - 1;
            let mut metrics = BTreeMap::new();
            metrics.insert("r1_final".into(), metric_number(report.r1[last]));
            metrics.insert("r2_final".into(), metric_number(report.r2[last]));
            metrics.insert("r3_final".into(), metric_number(report.r3[last]));
            metrics.insert("k_max".into(), Value::from(*k_max));
            Ok((report.verdict, metrics))
        }
        ExperimentParams::Closure { op_count, tol } => {
            let config = SpaceConfig::new(spec.dim, "closure")?;
            let family = spec.family.build(spec.dim)?;
            let probes: Vec<TruncatedVector> = (0..spec.dim)
                .map(|k| standard_basis(&config, k))
                .collect::<lindyn_core::Result<_>>()?;
            let report = closure_check(&family, *op_count, spec.seed, &probes, *tol)?;
            let max_residual = report
                .pairs
                .iter()
                .map(|p| p.residual)
                .fold(0.0f64, f64::max);
            let mut metrics = BTreeMap::new();
            metrics.insert("pairs".into(), Value::from(report.pairs.len()));
            metrics.insert("max_residual".into(), metric_number(max_residual));
            if let Some(ce) = &report.counterexample {
                metrics.insert(
                    "counterexample".into(),
                    serde_json::to_value(ce).unwrap_or(Value::Null),
                );
            }
            Ok((report.verdict, metrics))
        }
        ExperimentParams::GroupAxioms {
            pair_count,
            tol,
            shadow_count,
            shadow_radius,
            shadow_step,
            shadow_tol,
        } => {
            let config = SpaceConfig::new(spec.dim, "group_axioms")?;
            let group = spec
                .family
                .build_group()
                .ok_or_else(|| {
                    LinDynError::Unsupported(
                        "group_axioms requires the diag_exp_group family".into(),
                    )
                })??;
            let probes: Vec<TruncatedVector> = (0..spec.dim)
                .map(|k| standard_basis(&config, k))
                .collect::<lindyn_core::Result<_>>()?;
            let axioms = check_group_axioms(&group, *pair_count, spec.seed, &probes, *tol)?;
            let shadow = check_entirety_shadow(
                &group,
                *shadow_count,
                derive_seed(spec.seed, 6),
                *shadow_radius,
                &probes,
                *shadow_step,
                *shadow_tol,
            )?;
            let mut metrics = BTreeMap::new();
            metrics.insert("max_residual".into(), metric_number(axioms.max_residual));
            metrics.insert(
                "shadow_max_residual".into(),
                metric_number(shadow.max_residual),
            );
            metrics.insert("pairs".into(), Value::from(*pair_count));
            Ok((
                Verdict::from_bool(axioms.verdict.passed() && shadow.verdict.passed()),
                metrics,
            ))
        }
        ExperimentParams::Annulus {
            target_count,
            r,
            min_abs,
            max_abs,
            tol,
        } => {
            let group = spec
                .family
                .build_group()
                .ok_or_else(|| {
                    LinDynError::Unsupported("annulus requires the diag_exp_group family".into())
                })??;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut max_rel_err = 0.0f64;
            let mut min_abs_z = f64::INFINITY;
            let mut all_ok = true;
            for _ in 0..*target_count {
                let magnitude = min_abs + (max_abs - min_abs) * rng.gen::<f64>();
                let angle = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                let w = Complex64::from_polar(magnitude, angle);
                let z = annulus_witness(&group, w, *r)?;
                let rel_err = (z.exp() - w).norm() / w.norm();
                max_rel_err = max_rel_err.max(rel_err);
                min_abs_z = min_abs_z.min(z.norm());
                all_ok &= z.norm() >= *r && rel_err <= *tol;
            }
            let mut metrics = BTreeMap::new();
            metrics.insert("targets".into(), Value::from(*target_count));
            metrics.insert("max_rel_err".into(), metric_number(max_rel_err));
            metrics.insert("min_abs_z".into(), metric_number(min_abs_z));
            Ok((Verdict::from_bool(all_ok), metrics))
        }
        ExperimentParams::QuasiSimilarity {
            op_count,
            tol,
            probe_count,
            phi,
        } => {
            let config = SpaceConfig::new(spec.dim, "quasi_similarity")?;
            let family = spec.family.build(spec.dim)?;
            let map = build_phi(phi, spec.dim, derive_seed(spec.seed, 9))?;
            let image = conjugate_family(&family, &map)?;
            let paired = PairedFamily::new(family, image, *tol)?;
            let mut probes: Vec<TruncatedVector> = (0..spec.dim.min(*probe_count))
                .map(|k| standard_basis(&config, k))
                .collect::<lindyn_core::Result<_>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 10));
            while probes.len() < *probe_count {
                let coords = (0..spec.dim)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                probes.push(TruncatedVector::new(coords)?);
            }
            let report = paired.verify(&map, *op_count, spec.seed, &probes)?;
            let mut metrics = BTreeMap::new();
            metrics.insert(
                "max_residual".into(),
                metric_number(report.max_residual),
            );
            metrics.insert("pairs".into(), Value::from(report.params.len()));
            metrics.insert(
                "sigma_max".into(),
                metric_number(map.operator_norm_bound()),
            );
            Ok((report.verdict, metrics))
        }
        ExperimentParams::DirectSum {
            second_family,
            second_dim,
            epsilon,
            orbit_count,
            use_witnesses,
            grid1,
            grid2,
        } => {
            let config1 = SpaceConfig::new(spec.dim, "block1")?;
            let config2 = SpaceConfig::new(*second_dim, "block2")?;
            let fam1 = spec.family.build(spec.dim)?;
            let fam2 = second_family.build(*second_dim)?;
            let sum = direct_sum_family(vec![fam1, fam2])?;

            let mut base_coords = default_base(spec.dim).coords().to_vec();
            base_coords.extend_from_slice(default_base(*second_dim).coords());
            let base = TruncatedVector::new(base_coords)?;

            let g1 = grid1.build(&config1)?;
            let g2 = grid2.build(&config2)?;
            let product = product_grid(&g1, &g2)?;

            let mut orbit = compute_orbit(&sum, &base, *orbit_count, spec.seed)?;
            if *use_witnesses {
                augment_with_witnesses(&mut orbit, &sum, &product)?;
            }
            let product_cert = certify_density(&orbit, &product, *epsilon)?;
            let dims = [spec.dim, *second_dim];
            let proj1 = certify_density(&project_orbit(&orbit, &dims, 0)?, &g1, *epsilon)?;
            let proj2 = certify_density(&project_orbit(&orbit, &dims, 1)?, &g2, *epsilon)?;

            let implication_holds = !product_cert.verdict.passed()
                || (proj1.verdict.passed() && proj2.verdict.passed());
            let mut metrics = BTreeMap::new();
            metrics.insert(
                "product_coverage".into(),
                metric_number(product_cert.coverage),
            );
            metrics.insert("proj1_coverage".into(), metric_number(proj1.coverage));
            metrics.insert("proj2_coverage".into(), metric_number(proj2.coverage));
            metrics.insert(
                "product_verdict".into(),
                Value::String(product_cert.verdict.to_string()),
            );
            Ok((Verdict::from_bool(implication_holds), metrics))
        }
    }
}

/// Build a conjugation map from its spec: identity, explicit diagonal, or a
/// seeded random well-conditioned perturbation of the identity.
pub fn build_phi(phi: &RawPhi, dim: usize, seed: u64) -> lindyn_core::Result<ConjugationMap> {
    match phi {
        RawPhi::Identity => ConjugationMap::invertible(CMatrix::identity(dim)),
        RawPhi::Diagonal { entries } => {
            if entries.len() != dim {
                return Err(LinDynError::DimensionMismatch {
                    expected: dim,
                    got: entries.len(),
                });
            }
            let mut m = CMatrix::zeros(dim);
            for (i, e) in entries.iter().enumerate() {
                m.set(i, i, e.0);
            }
            ConjugationMap::invertible(m)
        }
        RawPhi::RandomWellConditioned { spread } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = spread / (dim as f64).sqrt();
            let mut m = CMatrix::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let bump = Complex64::new(
                        rng.gen_range(-1.0..1.0) * scale,
                        rng.gen_range(-1.0..1.0) * scale,
                    );
                    m.set(i, j, m.get(i, j) + bump);
                }
            }
            ConjugationMap::invertible(m)
        }
    }
}
