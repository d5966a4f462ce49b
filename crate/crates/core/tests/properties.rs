//! Property-based invariants: metric axioms, operator algebra consistency,
//! family sampling contracts, and the structural preservation laws.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lindyn_core::dynamics::{augment_with_witnesses, certify_density, compute_orbit, hc_grid};
use lindyn_core::matrix::CMatrix;
use lindyn_core::operators::{
    adjoint, apply, compose, materialize, FamilyParam, OperatorFamily, OperatorSpec,
};
use lindyn_core::reg_groups::{
    annulus_witness, check_group_axioms, group_apply, RegularizedGroup,
};
use lindyn_core::space::{
    distance, make_basis_balls, norm, standard_basis, BasisBall, SpaceConfig, TargetGrid,
    TruncatedVector,
};
use lindyn_core::structure::{
    conjugate_family, direct_sum_family, product_grid, project_orbit, ConjugationMap,
};
use lindyn_core::testers::{least_squares_candidate, transitivity_pair};
use lindyn_core::Verdict;

const DIM: usize = 4;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cfg(dim: usize) -> SpaceConfig {
    SpaceConfig::new(dim, "prop").unwrap()
}

fn complex_strategy() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
}

fn vector_strategy(dim: usize) -> impl Strategy<Value = TruncatedVector> {
    prop::collection::vec(complex_strategy(), dim)
        .prop_map(|coords| TruncatedVector::new(coords).unwrap())
}

fn simple_op_strategy(dim: usize) -> impl Strategy<Value = OperatorSpec> {
    prop_oneof![
        prop::collection::vec(complex_strategy(), dim * dim).prop_map(move |entries| {
            let mut m = CMatrix::zeros(dim);
            for i in 0..dim {
                for j in 0..dim {
                    m.set(i, j, entries[i * dim + j]);
                }
            }
            OperatorSpec::Matrix(m)
        }),
        prop::collection::vec(complex_strategy(), dim).prop_map(OperatorSpec::Diagonal),
        (complex_strategy(), 0..dim + 2).prop_map(|(weight, power)| {
            OperatorSpec::BackwardShiftPower { weight, power }
        }),
        (complex_strategy(), 0..dim + 2).prop_map(|(weight, power)| {
            OperatorSpec::ForwardShiftPower { weight, power }
        }),
        prop::collection::vec(complex_strategy(), 1..=dim).prop_map(OperatorSpec::PolyTruncation),
        complex_strategy().prop_map(OperatorSpec::ScaledIdentity),
        (
            vector_strategy(dim),
            vector_strategy(dim),
            vector_strategy(dim)
        )
            .prop_filter("usable pairing", |(f, e, _)| {
                e.inner(f).unwrap().norm() > 1e-6
            })
            .prop_map(|(f, e, x)| OperatorSpec::rank_one(f, e, x).unwrap()),
    ]
}

fn op_strategy(dim: usize) -> impl Strategy<Value = OperatorSpec> {
    prop_oneof![
        simple_op_strategy(dim),
        (simple_op_strategy(dim), simple_op_strategy(dim))
            .prop_map(|(a, b)| compose(&a, &b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn norm_is_homogeneous(v in vector_strategy(DIM), alpha in complex_strategy()) {
        let lhs = norm(&v.scale(alpha));
        let rhs = alpha.norm() * norm(&v);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn triangle_inequality(
        u in vector_strategy(DIM),
        v in vector_strategy(DIM),
        w in vector_strategy(DIM),
    ) {
        let lhs = distance(&u, &w).unwrap();
        let rhs = distance(&u, &v).unwrap() + distance(&v, &w).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn ball_membership_consistent_with_distance(
        center in vector_strategy(DIM),
        v in vector_strategy(DIM),
        radius in 0.1..3.0f64,
    ) {
        let ball = BasisBall::new(center.clone(), radius).unwrap();
        prop_assert_eq!(
            ball.contains(&v).unwrap(),
            distance(&v, &center).unwrap() <= radius
        );
    }

    #[test]
    fn apply_is_linear(
        op in op_strategy(DIM),
        u in vector_strategy(DIM),
        v in vector_strategy(DIM),
        alpha in complex_strategy(),
        beta in complex_strategy(),
    ) {
        let lhs = apply(&op, &u.scale(alpha).add(&v.scale(beta)).unwrap()).unwrap();
        let rhs = apply(&op, &u).unwrap().scale(alpha)
            .add(&apply(&op, &v).unwrap().scale(beta)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-10);
    }

    #[test]
    fn apply_matches_materialization(op in op_strategy(DIM), v in vector_strategy(DIM)) {
        let m = materialize(&op, DIM).unwrap();
        let lhs = m.apply(&v).unwrap();
        let rhs = apply(&op, &v).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-10 * (1.0 + v.norm()));
    }

    #[test]
    fn compose_is_associative(
        a in simple_op_strategy(DIM),
        b in simple_op_strategy(DIM),
        d in simple_op_strategy(DIM),
        v in vector_strategy(DIM),
    ) {
        let left = apply(&compose(&compose(&a, &b).unwrap(), &d).unwrap(), &v).unwrap();
        let right = apply(&compose(&a, &compose(&b, &d).unwrap()).unwrap(), &v).unwrap();
        prop_assert!(left.sub(&right).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn adjoint_inner_product_identity(
        op in op_strategy(DIM),
        u in vector_strategy(DIM),
        v in vector_strategy(DIM),
    ) {
        let lhs = apply(&op, &u).unwrap().inner(&v).unwrap();
        let rhs = u.inner(&apply(&adjoint(&op).unwrap(), &v).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn scaled_identity_commutes_with_everything(
        op in op_strategy(DIM),
        v in vector_strategy(DIM),
        alpha in complex_strategy(),
    ) {
        let m = OperatorSpec::ScaledIdentity(alpha);
        let lhs = apply(&m, &apply(&op, &v).unwrap()).unwrap();
        let rhs = apply(&op, &apply(&m, &v).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn rank_one_anchor_identity(x in vector_strategy(DIM)) {
        let f = standard_basis(&cfg(DIM), 0).unwrap();
        let e = standard_basis(&cfg(DIM), 0).unwrap();
        let op = OperatorSpec::rank_one(f, e.clone(), x.clone()).unwrap();
        prop_assert_eq!(apply(&op, &e).unwrap(), x);
    }

    #[test]
    fn backward_shift_annihilates_low_support(
        weight in complex_strategy(),
        power in 1..DIM + 1,
        v in vector_strategy(DIM),
    ) {
        // zero out every coordinate at or above `power`
        let coords: Vec<Complex64> = v
            .coords()
            .iter()
            .enumerate()
            .map(|(j, &x)| if j < power { x } else { c(0.0, 0.0) })
            .collect();
        let supported = TruncatedVector::new(coords).unwrap();
        let op = OperatorSpec::BackwardShiftPower { weight, power };
        prop_assert!(apply(&op, &supported).unwrap().is_zero());
    }

    #[test]
    fn poly_witness_roundtrip(
        xs in prop::collection::vec((0.1..2.0f64, -1.0..1.0f64), DIM),
        y in vector_strategy(DIM),
    ) {
        // base coordinates bounded away from zero
        let x = TruncatedVector::new(
            xs.into_iter().map(|(re, im)| c(re, im)).collect()
        ).unwrap();
        let fam = OperatorFamily::poly_trunc(DIM, DIM - 1, 1.0, 1.0).unwrap();
        let param = fam.solve_witness(&x, &y).unwrap().unwrap();
        let hit = apply(&fam.member(&param).unwrap(), &x).unwrap();
        prop_assert!(hit.sub(&y).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn least_squares_candidate_is_optimal(
        op in op_strategy(DIM),
        x in vector_strategy(DIM),
        y in vector_strategy(DIM),
        seed in 0u64..1000,
    ) {
        let (z, _, _) = least_squares_candidate(&op, DIM, &x, &y).unwrap();
        // normal-equation residual
        let t = materialize(&op, DIM).unwrap();
        let th = t.conj_transpose();
        let a = CMatrix::identity(DIM).add(&th.matmul(&t).unwrap()).unwrap();
        let residual = a.apply(&z).unwrap()
            .sub(&x.add(&th.apply(&y).unwrap()).unwrap()).unwrap()
            .norm();
        prop_assert!(residual <= 1e-8 * (1.0 + x.norm() + y.norm()));

        // random perturbations of size 1e-3 never improve the objective
        let objective = |zz: &TruncatedVector| -> f64 {
            let din = zz.sub(&x).unwrap().norm();
            let dout = apply(&op, zz).unwrap().sub(&y).unwrap().norm();
            din * din + dout * dout
        };
        let base = objective(&z);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let coords: Vec<Complex64> = (0..DIM)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let dir = TruncatedVector::new(coords).unwrap();
            let n = dir.norm();
            if n == 0.0 {
                continue;
            }
            let perturbed = z.add(&dir.scale(c(1e-3 / n, 0.0))).unwrap();
            prop_assert!(objective(&perturbed) >= base - 1e-10);
        }
    }

    #[test]
    fn group_law_by_construction(
        lambdas in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3),
        cs in prop::collection::vec((0.2..2.0f64, -0.5..0.5f64), 3),
        seed in 0u64..1000,
    ) {
        let group = RegularizedGroup::new(
            lambdas.into_iter().map(|(re, im)| c(re, im)).collect(),
            cs.into_iter().map(|(re, im)| c(re, im)).collect(),
            "prop",
        ).unwrap();
        let probes = vec![
            standard_basis(&cfg(3), 0).unwrap(),
            standard_basis(&cfg(3), 1).unwrap(),
            standard_basis(&cfg(3), 2).unwrap(),
        ];
        let report = check_group_axioms(&group, 20, seed, &probes, 1e-9).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Pass);
    }
}

#[test]
fn orbit_computation_is_deterministic() {
    let e0 = standard_basis(&cfg(3), 0).unwrap();
    let fam = OperatorFamily::rank_one(e0.clone(), e0.clone(), 1.0).unwrap();
    let base = TruncatedVector::from_real(&[1.0, 0.2, -0.4]).unwrap();
    let a = compute_orbit(&fam, &base, 12, 99).unwrap();
    let b = compute_orbit(&fam, &base, 12, 99).unwrap();
    assert_eq!(a.entries.len(), b.entries.len());
    for (ea, eb) in a.entries.iter().zip(&b.entries) {
        assert_eq!(ea.0, eb.0);
        assert_eq!(ea.1, eb.1);
    }
}

/// Membership in the finite G_δ grid is monotone: dropping balls from the
/// end of the list never removes members, and enlarging the operator sample
/// never turns a member into a non-member.
#[test]
fn hc_grid_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for run in 0..100 {
        let dim = 2 + (run % 3) as usize;
        let config = cfg(dim);
        let family = random_small_family(&mut rng, dim);
        let candidates: Vec<TruncatedVector> = (0..3)
            .map(|_| random_vector(&mut rng, dim, 1.5))
            .collect();
        let grid = TargetGrid::seeded_random(&config, 2.0, 4, dim, rng.gen()).unwrap();
        let balls = make_basis_balls(&grid, 4, 1.0).unwrap();
        let seed = rng.gen();

        let full = hc_grid(&family, &candidates, &balls, 6, seed, false).unwrap();
        for n in 0..balls.len() {
            let prefix = hc_grid(&family, &candidates, &balls[..n], 6, seed, false).unwrap();
            for (i, &member) in full.membership.iter().enumerate() {
                if member {
                    assert!(prefix.membership[i], "run {run}: prefix {n} lost a member");
                }
            }
        }
        let bigger = hc_grid(&family, &candidates, &balls, 12, seed, false).unwrap();
        for (i, &member) in full.membership.iter().enumerate() {
            if member {
                assert!(bigger.membership[i], "run {run}: larger sample lost a member");
            }
        }
    }
}

/// `hc_grid` agrees with an independent brute-force double loop over
/// (ball, operator) pairs on small instances.
#[test]
fn hc_grid_matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for run in 0..100 {
        let dim = 2 + run % 2;
        let config = cfg(dim);
        let family = random_small_family(&mut rng, dim);
        let n_candidates = 1 + run % 5;
        let candidates: Vec<TruncatedVector> = (0..n_candidates)
            .map(|_| random_vector(&mut rng, dim, 1.5))
            .collect();
        let grid = TargetGrid::seeded_random(&config, 2.0, 4, dim, rng.gen()).unwrap();
        let balls = make_basis_balls(&grid, run % 5, 1.0).unwrap();
        let count = run % 7;
        let seed = rng.gen();

        let result = hc_grid(&family, &candidates, &balls, count, seed, false).unwrap();

        // oracle: plain double loop over the same sampled operators
        let sampled = family.sample(count, seed).unwrap();
        for (i, candidate) in candidates.iter().enumerate() {
            let mut member = true;
            for ball in &balls {
                let mut hit = false;
                for (_, op) in &sampled {
                    if ball.contains(&apply(op, candidate).unwrap()).unwrap() {
                        hit = true;
                        break;
                    }
                }
                member &= hit;
            }
            assert_eq!(result.membership[i], member, "run {run} candidate {i}");
        }
    }
}

/// Rank-one scaling invariance at the predicate level: membership is
/// governed by ⟨y,f⟩ ≠ 0, which is invariant under nonzero scaling.
#[test]
fn rank_one_membership_is_scaling_invariant() {
    let dim = 3;
    let config = cfg(dim);
    let f = standard_basis(&config, 0).unwrap();
    let fam = OperatorFamily::rank_one(f.clone(), f.clone(), 1.0).unwrap();
    let grid = TargetGrid::seeded_random(&config, 2.0, 5, dim, 31).unwrap();
    let balls = make_basis_balls(&grid, 5, 1.0).unwrap();

    let member = TruncatedVector::from_real(&[0.7, -0.3, 0.1]).unwrap();
    let kernel = TruncatedVector::from_real(&[0.0, 1.0, -1.0]).unwrap();
    for alpha in [c(2.0, 0.0), c(-0.5, 0.0), c(0.0, 3.0), c(0.1, -0.1)] {
        for y in [&member, &kernel] {
            let pred_y = y.inner(&f).unwrap().norm() > 1e-12;
            let pred_ay = y.scale(alpha).inner(&f).unwrap().norm() > 1e-12;
            assert_eq!(pred_y, pred_ay);

            let m_y = hc_grid(&fam, std::slice::from_ref(y), &balls, 0, 0, true)
                .unwrap()
                .membership[0];
            let m_ay = hc_grid(&fam, &[y.scale(alpha)], &balls, 0, 0, true)
                .unwrap()
                .membership[0];
            assert_eq!(m_y, m_ay);
        }
    }
}

/// Dense-range lemma, finite form: for a scalar group with witness solving
/// membership holds exactly for x ≠ 0, and is preserved by applying C.
#[test]
fn scalar_group_membership_iff_nonzero() {
    let group = RegularizedGroup::new(vec![c(1.0, 0.0)], vec![c(2.0, 0.0)], "c2").unwrap();
    let fam = OperatorFamily::diag_exp_group(group.clone(), 5.0).unwrap();
    let config = cfg(1);
    // ball centers away from zero
    let centers: Vec<TruncatedVector> = [c(1.0, 0.0), c(-0.5, 0.5), c(0.0, 2.0)]
        .iter()
        .map(|&w| TruncatedVector::new(vec![w]).unwrap())
        .collect();
    let grid = TargetGrid::from_points(centers, "nonzero-centers").unwrap();
    let balls = make_basis_balls(&grid, 3, 0.25).unwrap();

    let x = TruncatedVector::new(vec![c(0.3, -0.7)]).unwrap();
    let zero = TruncatedVector::zeros(1);
    let res = hc_grid(&fam, &[x.clone(), zero], &balls, 0, 0, true).unwrap();
    assert!(res.membership[0]);
    assert!(!res.membership[1]);

    let cx = group.apply_regularizer(&x).unwrap();
    let res_cx = hc_grid(&fam, &[cx], &balls, 0, 0, true).unwrap();
    assert!(res_cx.membership[0]);
    let _ = config;
}

/// Annulus density, finite form: witnesses hit every nonzero grid target
/// exactly from outside any disk of radius up to 10³.
#[test]
fn annulus_witness_density_over_grid() {
    let group = RegularizedGroup::scalar_exp();
    let config = cfg(1);
    let lattice = TargetGrid::lattice(&config, 2.0, 0.5, 1).unwrap();
    let nonzero: Vec<TruncatedVector> = lattice
        .points()
        .iter()
        .filter(|p| !p.is_zero())
        .cloned()
        .collect();
    let grid = TargetGrid::from_points(nonzero, "punctured-lattice").unwrap();
    let one = TruncatedVector::from_real(&[1.0]).unwrap();

    for r in [0.0, 1.0, 10.0, 1000.0] {
        let mut entries = Vec::new();
        for target in grid.points() {
            let w = target.coords()[0];
            let z = annulus_witness(&group, w, r).unwrap();
            assert!(z.norm() >= r);
            entries.push((FamilyParam::Scalar(z), group_apply(&group, z, &one).unwrap()));
        }
        let orbit = lindyn_core::dynamics::OrbitSample {
            family_name: "annulus".into(),
            seed: 0,
            base: one.clone(),
            entries,
        };
        let cert = certify_density(&orbit, &grid, 1e-9).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass, "r = {r}");
    }
}

/// Theorem-level neighborhood schedule: with δ_k = 1/k the search produces
/// witnesses (z_k, T_k) with both gaps below 1/k whenever it succeeds.
#[test]
fn transitivity_delta_schedule() {
    let dim = 3;
    let f = standard_basis(&cfg(dim), 0).unwrap();
    let fam = OperatorFamily::rank_one(f.clone(), f.clone(), 1.0).unwrap();
    let x = TruncatedVector::from_real(&[0.4, -0.2, 0.9]).unwrap();
    let y = TruncatedVector::from_real(&[-1.0, 0.3, 0.5]).unwrap();
    for k in 1..=10usize {
        let delta = 1.0 / k as f64;
        let outcome = transitivity_pair(&fam, &x, &y, delta, 4, 5).unwrap();
        assert!(outcome.success, "k = {k}");
        assert!(outcome.gap_in < delta && outcome.gap_out < delta);
    }
}

/// Criterion ⇒ transitivity, finite form: when the criterion passes, the
/// constructive candidate z = x₀ + S_K y₀ transports any pair from the
/// X₀/Y₀ spans with gaps bounded by 2·tol·(1 + ‖y₀‖).
#[test]
fn criterion_implies_constructive_transitivity() {
    let dim = 32;
    let support = 8;
    let k_max = 24;
    let tol = 1e-6;
    let fam = OperatorFamily::power(
        dim,
        OperatorSpec::BackwardShiftPower {
            weight: c(2.0, 0.0),
            power: 1,
        },
    )
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sample_supported = |rng: &mut ChaCha8Rng| {
        let mut coords = vec![c(0.0, 0.0); dim];
        for coord in coords.iter_mut().take(support) {
            *coord = c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        }
        TruncatedVector::new(coords).unwrap()
    };
    let x0: Vec<TruncatedVector> = (0..10).map(|_| sample_supported(&mut rng)).collect();
    let y0: Vec<TruncatedVector> = (0..10).map(|_| sample_supported(&mut rng)).collect();
    let schedule: Vec<usize> = (1..=k_max).collect();
    let report = lindyn_core::testers::check_criterion(
        |k| Ok(fam.criterion_maps(k).unwrap().0),
        |k| Ok(fam.criterion_maps(k).unwrap().1),
        &x0,
        &y0,
        &schedule,
        tol,
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Pass);

    let (t_k, s_k) = fam.criterion_maps(k_max).unwrap();
    for (x, y) in x0.iter().zip(&y0) {
        let z = x.add(&apply(&s_k, y).unwrap()).unwrap();
        let gap_in = z.sub(x).unwrap().norm();
        let gap_out = apply(&t_k, &z).unwrap().sub(y).unwrap().norm();
        let bound = 2.0 * tol * (1.0 + y.norm());
        assert!(gap_in <= bound && gap_out <= bound);
    }
}

/// Group-structured families with parameter arithmetic satisfy the closure
/// hypothesis: diagonal exp groups with C = I via z₁ − z₂, the scalar
/// family via c₁/c₂.
#[test]
fn group_structured_families_close_under_arithmetic() {
    let group = RegularizedGroup::new(
        vec![c(1.0, 0.0), c(-0.8, 0.3), c(0.0, 0.9)],
        vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        "c-identity",
    )
    .unwrap();
    let fam = OperatorFamily::diag_exp_group(group, 5.0).unwrap();
    let probes: Vec<TruncatedVector> = (0..3)
        .map(|k| standard_basis(&cfg(3), k).unwrap())
        .collect();
    let report = lindyn_core::testers::closure_check(&fam, 5, 13, &probes, 1e-9).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);

    let scalar = OperatorFamily::scalar(2, 2.0).unwrap();
    let probes2: Vec<TruncatedVector> = (0..2)
        .map(|k| standard_basis(&cfg(2), k).unwrap())
        .collect();
    let report2 = lindyn_core::testers::closure_check(&scalar, 5, 14, &probes2, 1e-9).unwrap();
    assert_eq!(report2.verdict, Verdict::Pass);
}

/// Hypercyclic ⇒ transitive for groups, finite form: the scalar exp group
/// satisfies the neighborhood condition at δ = 1e-6 for every pair of
/// nonzero targets via the difference-parameter construction.
#[test]
fn scalar_exp_group_transitive_at_tight_delta() {
    let fam = OperatorFamily::diag_exp_group(RegularizedGroup::scalar_exp(), 5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..50 {
        let x = TruncatedVector::new(vec![c(
            rng.gen_range(0.1..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
            rng.gen_range(-2.0..2.0),
        )])
        .unwrap();
        let y = TruncatedVector::new(vec![c(
            rng.gen_range(0.1..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
            rng.gen_range(-2.0..2.0),
        )])
        .unwrap();
        let outcome = transitivity_pair(&fam, &x, &y, 1e-6, 8, 20).unwrap();
        assert!(outcome.success);
        assert!(outcome.gap_in < 1e-6 && outcome.gap_out < 1e-6);
    }
}

/// Hypercyclic-vector transfer: a density certificate for the source orbit
/// against targets G maps to one for the image orbit against φ(G), with ε
/// scaled by the operator-norm bound of φ.
#[test]
fn conjugation_transfers_density_certificates() {
    let dim = 2;
    let phi = ConjugationMap::invertible(
        CMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.4, 0.1)],
            vec![c(0.0, -0.2), c(1.5, 0.0)],
        ])
        .unwrap(),
    )
    .unwrap();
    let fam = OperatorFamily::poly_trunc(dim, dim - 1, 1.0, 1.0).unwrap();
    let conj = conjugate_family(&fam, &phi).unwrap();
    let base = TruncatedVector::from_real(&[1.0, 0.5]).unwrap();
    let grid = TargetGrid::lattice(&cfg(dim), 1.0, 1.0, 1).unwrap();

    let mut source_orbit = compute_orbit(&fam, &base, 10, 21).unwrap();
    augment_with_witnesses(&mut source_orbit, &fam, &grid).unwrap();
    let epsilon = 1e-9;
    let source_cert = certify_density(&source_orbit, &grid, epsilon).unwrap();
    assert_eq!(source_cert.verdict, Verdict::Pass);

    // image orbit of φ(base), paired by parameter, against φ(G)
    let phi_base = phi.apply(&base).unwrap();
    let mut image_orbit = compute_orbit(&conj, &phi_base, 10, 21).unwrap();
    for target in grid.points() {
        let mapped = phi.apply(target).unwrap();
        if let Some(param) = conj.solve_witness(&phi_base, &mapped).unwrap() {
            let op = conj.member(&param).unwrap();
            let image = apply(&op, &phi_base).unwrap();
            image_orbit.entries.push((param, image));
        }
    }
    let mapped_grid = TargetGrid::from_points(
        grid.points()
            .iter()
            .map(|p| phi.apply(p).unwrap())
            .collect(),
        "phi(G)",
    )
    .unwrap();
    let scaled_eps = epsilon * phi.operator_norm_bound();
    let image_cert = certify_density(&image_orbit, &mapped_grid, scaled_eps).unwrap();
    assert_eq!(image_cert.verdict, Verdict::Pass);
}

/// Similarity transfers orbits: the conjugated family's orbit of φx equals
/// φ applied to the source orbit, entry by entry.
#[test]
fn conjugation_transfers_orbits() {
    let dim = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut m = CMatrix::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            let bump = c(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
            m.set(i, j, m.get(i, j) + bump);
        }
    }
    let phi = ConjugationMap::invertible(m).unwrap();
    let f = standard_basis(&cfg(dim), 0).unwrap();
    let fam = OperatorFamily::rank_one(f.clone(), f.clone(), 1.0).unwrap();
    let conj = conjugate_family(&fam, &phi).unwrap();

    let x = random_vector(&mut rng, dim, 1.0);
    let source = compute_orbit(&fam, &x, 20, 77).unwrap();
    let image = compute_orbit(&conj, &phi.apply(&x).unwrap(), 20, 77).unwrap();
    for ((p1, v1), (p2, v2)) in source.entries.iter().zip(&image.entries) {
        assert_eq!(p1, p2);
        let mapped = phi.apply(v1).unwrap();
        assert!(mapped.sub(v2).unwrap().norm() <= 1e-10);
    }
}

/// Direct-sum projection: an ε-dense product orbit over G₁×G₂ projects to
/// ε-dense component orbits over G₁ and G₂.
#[test]
fn product_density_projects() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut product_passes = 0;
    for run in 0..30 {
        let f1 = OperatorFamily::poly_trunc(2, 1, 1.0, 1.0).unwrap();
        let e0 = standard_basis(&cfg(2), 0).unwrap();
        let f2 = OperatorFamily::rank_one(e0.clone(), e0.clone(), 1.0).unwrap();
        let sum = direct_sum_family(vec![f1, f2]).unwrap();

        let base = TruncatedVector::from_real(&[1.0, 0.5, 1.0, 0.25]).unwrap();
        let g1 = TargetGrid::lattice(&cfg(2), 1.0, 1.0, 1).unwrap();
        let g2 = TargetGrid::lattice(&cfg(2), 1.0, 1.0, 1).unwrap();
        let product = product_grid(&g1, &g2).unwrap();

        let use_witnesses = run % 2 == 0;
        let epsilon = [1e-9, 0.3, 1.0][run % 3];
        let mut orbit = compute_orbit(&sum, &base, 30, rng.gen()).unwrap();
        if use_witnesses {
            augment_with_witnesses(&mut orbit, &sum, &product).unwrap();
        }
        let product_cert = certify_density(&orbit, &product, epsilon).unwrap();
        let dims = [2usize, 2];
        let proj0 = certify_density(&project_orbit(&orbit, &dims, 0).unwrap(), &g1, epsilon).unwrap();
        let proj1 = certify_density(&project_orbit(&orbit, &dims, 1).unwrap(), &g2, epsilon).unwrap();
        if product_cert.verdict == Verdict::Pass {
            product_passes += 1;
            assert_eq!(proj0.verdict, Verdict::Pass, "run {run}");
            assert_eq!(proj1.verdict, Verdict::Pass, "run {run}");
        }
    }
    assert!(product_passes > 0, "property never exercised");
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> TruncatedVector {
    TruncatedVector::new(
        (0..dim)
            .map(|_| {
                c(
                    rng.gen_range(-scale..scale),
                    rng.gen_range(-scale..scale),
                )
            })
            .collect(),
    )
    .unwrap()
}

fn random_small_family(rng: &mut ChaCha8Rng, dim: usize) -> OperatorFamily {
    match rng.gen_range(0..3) {
        0 => OperatorFamily::scalar(dim, 2.0).unwrap(),
        1 => {
            let diag: Vec<Complex64> = (0..dim)
                .map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect();
            OperatorFamily::power(dim, OperatorSpec::Diagonal(diag)).unwrap()
        }
        _ => {
            let f = standard_basis(&cfg(dim), 0).unwrap();
            OperatorFamily::rank_one(f.clone(), f, 1.5).unwrap()
        }
    }
}
