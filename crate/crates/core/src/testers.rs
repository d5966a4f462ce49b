//! Executable forms of the transitivity search, the hypercyclicity
//! criterion, and the algebraic closure hypothesis `T = AS`.

use serde::Serialize;

use crate::error::{LinDynError, Result};
use crate::matrix::CMatrix;
use crate::operators::{apply, materialize, FamilyParam, OperatorFamily, OperatorSpec};
use crate::space::TruncatedVector;
use crate::Verdict;

/// Outcome of the neighborhood condition for one pair `(x, y)`: a vector
/// `z` and an operator `T` with `‖z − x‖ < δ` and `‖Tz − y‖ < δ`.
#[derive(Clone, Debug, Serialize)]
pub struct PairOutcome {
    pub x: TruncatedVector,
    pub y: TruncatedVector,
    pub delta: f64,
    pub success: bool,
    pub winning_param: Option<FamilyParam>,
    pub z: TruncatedVector,
    pub gap_in: f64,
    pub gap_out: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitivityReport {
    pub outcomes: Vec<PairOutcome>,
    pub success_rate: f64,
}

/// Minimizer of `‖z−x‖² + ‖Tz−y‖²` via the normal equations
/// `(I + T*T)z = x + T*y`, which are Hermitian positive definite and hence
/// uniquely solvable. Returns `(z, gap_in, gap_out)`.
pub fn least_squares_candidate(
    op: &OperatorSpec,
    dim: usize,
    x: &TruncatedVector,
    y: &TruncatedVector,
) -> Result<(TruncatedVector, f64, f64)> {
    let t = materialize(op, dim)?;
    let th = t.conj_transpose();
    let a = CMatrix::identity(dim).add(&th.matmul(&t)?)?;
    let rhs = x.add(&th.apply(y)?)?;
    let z = a.solve(&rhs)?;
    let gap_in = z.sub(x)?.norm();
    let gap_out = apply(op, &z)?.sub(y)?.norm();
    Ok((z, gap_in, gap_out))
}

/// Search for a transitivity witness for one pair. Sampled operators are
/// tried in order through the least-squares candidate; the first with both
/// gaps strictly below `delta` wins. Two constructive candidates follow the
/// sampled ones: `z = x + S_k y` for the largest sampled index when the
/// family exposes criterion maps, and `z = x` with the witness-solved
/// operator when the family has an exact witness solver. On failure the
/// recorded attempt is the one minimizing `max(gap_in, gap_out)`.
pub fn transitivity_pair(
    family: &OperatorFamily,
    x: &TruncatedVector,
    y: &TruncatedVector,
    delta: f64,
    count: usize,
    seed: u64,
) -> Result<PairOutcome> {
    if !(delta > 0.0) {
        return Err(LinDynError::InvalidParameter(
            "delta must be positive".into(),
        ));
    }
    if x.dim() != family.dim() || y.dim() != family.dim() {
        return Err(LinDynError::DimensionMismatch {
            expected: family.dim(),
            got: if x.dim() != family.dim() {
                x.dim()
            } else {
                y.dim()
            },
        });
    }
    let dim = family.dim();
    let mut best: Option<(f64, FamilyParam, TruncatedVector, f64, f64)> = None;

    let consider = |param: FamilyParam,
                        z: TruncatedVector,
                        gap_in: f64,
                        gap_out: f64,
                        best: &mut Option<(f64, FamilyParam, TruncatedVector, f64, f64)>|
     -> bool {
        let score = gap_in.max(gap_out);
        if best.as_ref().is_none_or(|(s, ..)| score < *s) {
            *best = Some((score, param, z, gap_in, gap_out));
        }
        gap_in < delta && gap_out < delta
    };

    let mut winner: Option<(FamilyParam, TruncatedVector, f64, f64)> = None;
    for (param, op) in family.sample(count, seed)? {
        let (z, gap_in, gap_out) = least_squares_candidate(&op, dim, x, y)?;
        if consider(param.clone(), z.clone(), gap_in, gap_out, &mut best) {
            winner = Some((param, z, gap_in, gap_out));
            break;
        }
    }

    if winner.is_none() && count > 0 {
        if let Some((t_k, s_k)) = family.criterion_maps(count - 1) {
            let z = x.add(&apply(&s_k, y)?)?;
            let gap_in = z.sub(x)?.norm();
            let gap_out = apply(&t_k, &z)?.sub(y)?.norm();
            if consider(
                FamilyParam::Exponent(count - 1),
                z.clone(),
                gap_in,
                gap_out,
                &mut best,
            ) {
                winner = Some((FamilyParam::Exponent(count - 1), z, gap_in, gap_out));
            }
        }
    }

    if winner.is_none() {
        if let Some(param) = family.solve_witness(x, y)? {
            let op = family.member(&param)?;
            let z = x.clone();
            let gap_out = apply(&op, &z)?.sub(y)?.norm();
            if consider(param.clone(), z.clone(), 0.0, gap_out, &mut best) {
                winner = Some((param, z, 0.0, gap_out));
            }
        }
    }

    Ok(match winner {
        Some((param, z, gap_in, gap_out)) => PairOutcome {
            x: x.clone(),
            y: y.clone(),
            delta,
            success: true,
            winning_param: Some(param),
            z,
            gap_in,
            gap_out,
        },
        None => {
            let (_, param, z, gap_in, gap_out) = best.ok_or_else(|| {
                LinDynError::InvalidParameter(
                    "transitivity search needs at least one candidate operator".into(),
                )
            })?;
            PairOutcome {
                x: x.clone(),
                y: y.clone(),
                delta,
                success: false,
                winning_param: Some(param),
                z,
                gap_in,
                gap_out,
            }
        }
    })
}

/// Run [`transitivity_pair`] over a pair list and aggregate the success rate.
pub fn transitivity_search(
    family: &OperatorFamily,
    pairs: &[(TruncatedVector, TruncatedVector)],
    delta: f64,
    count: usize,
    seed: u64,
) -> Result<TransitivityReport> {
    let mut outcomes = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        outcomes.push(transitivity_pair(family, x, y, delta, count, seed)?);
    }
    let successes = outcomes.iter().filter(|o| o.success).count();
    let success_rate = if outcomes.is_empty() {
        1.0
    } else {
        successes as f64 / outcomes.len() as f64
    };
    Ok(TransitivityReport {
        outcomes,
        success_rate,
    })
}

/// Residual curves for the three criterion conditions over a k-schedule:
/// `r1_k = max over X₀ of ‖T_k x‖`, `r2_k = max over Y₀ of ‖S_k y‖`,
/// `r3_k = max over Y₀ of ‖T_k S_k y − y‖`. The verdict looks at the final
/// scheduled k only; the full curves stay visible in the report.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub k_schedule: Vec<usize>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub r3: Vec<f64>,
    pub tol: f64,
    pub verdict: Verdict,
}

pub fn check_criterion(
    t_seq: impl Fn(usize) -> Result<OperatorSpec>,
    s_seq: impl Fn(usize) -> Result<OperatorSpec>,
    x0: &[TruncatedVector],
    y0: &[TruncatedVector],
    k_schedule: &[usize],
    tol: f64,
) -> Result<CriterionReport> {
    if k_schedule.is_empty() {
        return Err(LinDynError::InvalidParameter(
            "k schedule must be nonempty".into(),
        ));
    }
    if !k_schedule.windows(2).all(|w| w[0] < w[1]) {
        return Err(LinDynError::InvalidParameter(
            "k schedule must be strictly increasing".into(),
        ));
    }
    if x0.is_empty() || y0.is_empty() {
        return Err(LinDynError::InvalidParameter(
            "X0 and Y0 must be nonempty".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(LinDynError::InvalidParameter("tol must be positive".into()));
    }
    let mut r1 = Vec::with_capacity(k_schedule.len());
    let mut r2 = Vec::with_capacity(k_schedule.len());
    let mut r3 = Vec::with_capacity(k_schedule.len());
    for &k in k_schedule {
        let t_k = t_seq(k)?;
        let s_k = s_seq(k)?;
        let mut m1 = 0.0f64;
        for x in x0 {
            m1 = m1.max(apply(&t_k, x)?.norm());
        }
        let mut m2 = 0.0f64;
        let mut m3 = 0.0f64;
        for y in y0 {
            let sy = apply(&s_k, y)?;
            m2 = m2.max(sy.norm());
            m3 = m3.max(apply(&t_k, &sy)?.sub(y)?.norm());
        }
        r1.push(m1);
        r2.push(m2);
        r3.push(m3);
    }
    let last = k_schedule.len() - 1;
    let verdict = Verdict::from_bool(r1[last] <= tol && r2[last] <= tol && r3[last] <= tol);
    Ok(CriterionReport {
        k_schedule: k_schedule.to_vec(),
        r1,
        r2,
        r3,
        tol,
        verdict,
    })
}

/// One ordered pair of the closure check with the best factorization found.
#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub param_t: FamilyParam,
    pub param_s: FamilyParam,
    pub best_a: Option<FamilyParam>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub pairs: Vec<PairCheck>,
    pub tol: f64,
    pub verdict: Verdict,
    pub counterexample: Option<PairCheck>,
}

/// Check the hypothesis of the closure theorem: for every ordered sampled
/// pair `(T, S)` with distinct parameters, look for `A ∈ Γ` with `T = AS`
/// on the probes. Candidates for `A` are the group-arithmetic member (for
/// families with parameter arithmetic) followed by the sampled members;
/// `best_a` minimizes the probe residual `max_v ‖Tv − A(Sv)‖`. A sample
/// with fewer than two distinct parameters passes vacuously.
pub fn closure_check(
    family: &OperatorFamily,
    count: usize,
    seed: u64,
    probes: &[TruncatedVector],
    tol: f64,
) -> Result<ClosureReport> {
    if probes.is_empty() {
        return Err(LinDynError::InvalidParameter(
            "closure check needs at least one probe".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(LinDynError::InvalidParameter("tol must be positive".into()));
    }
    let sampled = family.sample(count, seed)?;
    let mut pairs = Vec::new();
    for (i, (param_t, t)) in sampled.iter().enumerate() {
        for (j, (param_s, s)) in sampled.iter().enumerate() {
            if i == j || param_t == param_s {
                continue;
            }
            // s-images are shared across all candidates for A
            let mut t_images = Vec::with_capacity(probes.len());
            let mut s_images = Vec::with_capacity(probes.len());
            for v in probes {
                t_images.push(apply(t, v)?);
                s_images.push(apply(s, v)?);
            }
            let mut candidates: Vec<(FamilyParam, OperatorSpec)> = Vec::new();
            if let Some(pa) = family.closure_arithmetic(param_t, param_s) {
                let a = family.member(&pa)?;
                candidates.push((pa, a));
            }
            candidates.extend(sampled.iter().cloned());

            let mut best: Option<(f64, FamilyParam)> = None;
            for (pa, a) in &candidates {
                let mut residual = 0.0f64;
                for (tv, sv) in t_images.iter().zip(&s_images) {
                    residual = residual.max(apply(a, sv)?.sub(tv)?.norm());
                }
                if best.as_ref().is_none_or(|(r, _)| residual < *r) {
                    best = Some((residual, pa.clone()));
                }
            }
            let (residual, best_a) = best.expect("candidate list is nonempty");
            pairs.push(PairCheck {
                param_t: param_t.clone(),
                param_s: param_s.clone(),
                best_a: Some(best_a),
                residual,
            });
        }
    }
    let max_residual = pairs.iter().map(|p| p.residual).fold(0.0f64, f64::max);
    let verdict = Verdict::from_bool(max_residual <= tol);
    let counterexample = if verdict == Verdict::Fail {
        pairs
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .cloned()
    } else {
        None
    };
    Ok(ClosureReport {
        pairs,
        tol,
        verdict,
        counterexample,
    })
}
