//! Orbits, ε-density certification against finite target grids, and the
//! finite hypercyclic-vector grid `⋂ₙ⋃_T T⁻¹(Uₙ)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LinDynError, Result};
use crate::operators::{apply, FamilyParam, OperatorFamily};
use crate::space::{BasisBall, TargetGrid, TruncatedVector};
use crate::Verdict;

/// A sampled orbit `Orb(Γ, x)`: the base vector and the images of `x` under
/// sampled family members, in sampler order.
#[derive(Clone, Debug)]
pub struct OrbitSample {
    pub family_name: String,
    pub seed: u64,
    pub base: TruncatedVector,
    pub entries: Vec<(FamilyParam, TruncatedVector)>,
}

/// Images of `x` under `count` sampled members of the family.
pub fn compute_orbit(
    family: &OperatorFamily,
    base: &TruncatedVector,
    count: usize,
    seed: u64,
) -> Result<OrbitSample> {
    if base.dim() != family.dim() {
        return Err(LinDynError::DimensionMismatch {
            expected: family.dim(),
            got: base.dim(),
        });
    }
    let mut entries = Vec::with_capacity(count);
    for (param, op) in family.sample(count, seed)? {
        let image = apply(&op, base)?;
        entries.push((param, image));
    }
    Ok(OrbitSample {
        family_name: family.name().to_string(),
        seed,
        base: base.clone(),
        entries,
    })
}

/// Append, for every grid target with an exact witness `T_p x = target`,
/// the witnessed orbit point. Returns how many entries were added.
///
/// This separates "reachable in principle" from "found by blind sampling":
/// families without witness solvers leave the orbit unchanged.
pub fn augment_with_witnesses(
    orbit: &mut OrbitSample,
    family: &OperatorFamily,
    targets: &TargetGrid,
) -> Result<usize> {
    let mut added = 0;
    for target in targets.points() {
        if let Some(param) = family.solve_witness(&orbit.base, target)? {
            let op = family.member(&param)?;
            let image = apply(&op, &orbit.base)?;
            orbit.entries.push((param, image));
            added += 1;
        }
    }
    Ok(added)
}

/// Per-target record of a density certificate.
#[derive(Clone, Debug, Serialize)]
pub struct TargetGap {
    pub target: usize,
    pub nearest: Option<usize>,
    pub gap: f64,
}

/// The finite surrogate of "the orbit is dense": every target of the grid
/// lies within ε of some orbit entry, with per-target witnesses.
#[derive(Clone, Debug, Serialize)]
pub struct DensityCertificate {
    pub epsilon: f64,
    pub per_target: Vec<TargetGap>,
    pub coverage: f64,
    pub max_gap: f64,
    pub verdict: Verdict,
}

/// Nearest orbit entry for every target, exact distances, ties broken by
/// the lowest entry index. An empty orbit fails with coverage 0 and an
/// infinite max-gap sentinel.
pub fn certify_density(
    orbit: &OrbitSample,
    targets: &TargetGrid,
    epsilon: f64,
) -> Result<DensityCertificate> {
    if !(epsilon > 0.0) {
        return Err(LinDynError::InvalidParameter(
            "epsilon must be positive".into(),
        ));
    }
    if targets.is_empty() {
        return Ok(DensityCertificate {
            epsilon,
            per_target: Vec::new(),
            coverage: 1.0,
            max_gap: 0.0,
            verdict: Verdict::Pass,
        });
    }
    if orbit.entries.is_empty() {
        let per_target = (0..targets.len())
            .map(|t| TargetGap {
                target: t,
                nearest: None,
                gap: f64::INFINITY,
            })
            .collect();
        return Ok(DensityCertificate {
            epsilon,
            per_target,
            coverage: 0.0,
            max_gap: f64::INFINITY,
            verdict: Verdict::Fail,
        });
    }
    let dim = orbit.base.dim();
    for p in targets.points() {
        if p.dim() != dim {
            return Err(LinDynError::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
    }

    let scanner = NearestScanner::new(&orbit.entries);
    let per_target: Vec<TargetGap> = targets
        .points()
        .par_iter()
        .enumerate()
        .map(|(t, point)| {
            let (nearest, gap) = scanner.nearest(point);
            TargetGap {
                target: t,
                nearest: Some(nearest),
                gap,
            }
        })
        .collect();

    let covered = per_target.iter().filter(|g| g.gap <= epsilon).count();
    let coverage = covered as f64 / targets.len() as f64;
    let max_gap = per_target.iter().map(|g| g.gap).fold(0.0f64, f64::max);
    Ok(DensityCertificate {
        epsilon,
        per_target,
        coverage,
        verdict: Verdict::from_bool(max_gap <= epsilon),
        max_gap,
    })
}

/// Exact nearest-entry search. Entries are indexed by their projection
/// onto a fixed generic unit direction `u`; Cauchy–Schwarz gives
/// `d(e,t) ≥ |Re⟨e−t, u⟩|`, so a two-pointer sweep outward from the
/// target's projection can stop once the projection gap exceeds the best
/// distance found. The result (nearest index, exact gap, index
/// tie-breaking) is identical to a full linear scan, which the sweep
/// degrades to in the worst case. A generic direction is used rather than
/// the norm because lattice grids are norm-degenerate: thousands of points
/// share each norm shell, while their projections are almost all distinct.
struct NearestScanner<'a> {
    entries: &'a [(FamilyParam, TruncatedVector)],
    direction: Vec<Complex64>,
    by_projection: Vec<(f64, u32)>,
}

impl<'a> NearestScanner<'a> {
    fn new(entries: &'a [(FamilyParam, TruncatedVector)]) -> Self {
        let dim = entries.first().map_or(0, |(_, v)| v.dim());
        let direction = generic_direction(dim);
        let mut by_projection: Vec<(f64, u32)> = entries
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (project(v, &direction), i as u32))
            .collect();
        by_projection.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Self {
            entries,
            direction,
            by_projection,
        }
    }

    fn nearest(&self, target: &TruncatedVector) -> (usize, f64) {
        let t_proj = project(target, &self.direction);
        // cushion for the floating-point error in the projections
        let slack = 1e-9 * (1.0 + target.norm());
        let start = self.by_projection.partition_point(|(p, _)| *p < t_proj);
        let mut best_gap = f64::INFINITY;
        let mut best_idx = usize::MAX;
        let mut lo = start; // next candidate below, scanned downward
        let mut hi = start; // next candidate at/above, scanned upward
        loop {
            let lo_diff = if lo > 0 {
                Some(t_proj - self.by_projection[lo - 1].0)
            } else {
                None
            };
            let hi_diff = if hi < self.by_projection.len() {
                Some(self.by_projection[hi].0 - t_proj)
            } else {
                None
            };
            let take_lo = match (lo_diff, hi_diff) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(l), Some(h)) => l <= h,
            };
            let (diff, idx) = if take_lo {
                lo -= 1;
                (lo_diff.unwrap(), self.by_projection[lo].1 as usize)
            } else {
                let idx = self.by_projection[hi].1 as usize;
                hi += 1;
                (hi_diff.unwrap(), idx)
            };
            if diff - slack > best_gap {
                // no remaining candidate on this side can beat the best;
                // the other side is handled on its own iterations
                if take_lo {
                    lo = 0;
                } else {
                    hi = self.by_projection.len();
                }
                continue;
            }
            if let Some(gap) = distance_capped(&self.entries[idx].1, target, best_gap) {
                if gap < best_gap || (gap == best_gap && idx < best_idx) {
                    best_gap = gap;
                    best_idx = idx;
                }
            }
        }
        (best_idx, best_gap)
    }
}

/// A fixed, dimension-dependent unit vector with no lattice symmetries.
fn generic_direction(dim: usize) -> Vec<Complex64> {
    let mut u: Vec<Complex64> = (0..dim)
        .map(|j| {
            let a = 0.9 + 1.3 * j as f64;
            let b = 1.7 + 0.61 * j as f64;
            Complex64::new(a.sin(), b.cos())
        })
        .collect();
    let n: f64 = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for c in u.iter_mut() {
            *c /= n;
        }
    }
    u
}

fn project(v: &TruncatedVector, direction: &[Complex64]) -> f64 {
    v.coords()
        .iter()
        .zip(direction)
        .map(|(x, u)| (x * u.conj()).re)
        .sum()
}

/// Squared-distance accumulation that abandons once the partial sum
/// strictly exceeds `bound²`. Completed sums equal `distance()` bit for bit.
fn distance_capped(a: &TruncatedVector, b: &TruncatedVector, bound: f64) -> Option<f64> {
    let bound_sq = if bound.is_finite() {
        bound * bound
    } else {
        f64::INFINITY
    };
    let mut acc = 0.0f64;
    for (x, y) in a.coords().iter().zip(b.coords()) {
        acc += (x - y).norm_sqr();
        if acc > bound_sq {
            return None;
        }
    }
    Some(acc.sqrt())
}

/// Result of evaluating the finite G_δ formula on a candidate list: for
/// every ball `Uₙ` in the list there must be a recorded operator mapping
/// the candidate into `Uₙ`.
#[derive(Clone, Debug, Serialize)]
pub struct HCGridResult {
    pub candidates: Vec<TruncatedVector>,
    pub n_balls: usize,
    pub membership: Vec<bool>,
    pub witnesses: Vec<Vec<Option<FamilyParam>>>,
}

impl HCGridResult {
    pub fn member_count(&self) -> usize {
        self.membership.iter().filter(|&&m| m).count()
    }
}

/// Evaluate membership of each candidate in `⋂ₙ⋃_T T⁻¹(Uₙ)` over the given
/// ball list. With `use_witnesses` set, each ball center is first attempted
/// as an exact witness target; sampled operators are the fallback. An empty
/// ball list makes every candidate a member.
pub fn hc_grid(
    family: &OperatorFamily,
    candidates: &[TruncatedVector],
    balls: &[BasisBall],
    count: usize,
    seed: u64,
    use_witnesses: bool,
) -> Result<HCGridResult> {
    for v in candidates {
        if v.dim() != family.dim() {
            return Err(LinDynError::DimensionMismatch {
                expected: family.dim(),
                got: v.dim(),
            });
        }
    }
    let sampled = family.sample(count, seed)?;
    let results: Vec<(bool, Vec<Option<FamilyParam>>)> = candidates
        .par_iter()
        .map(|candidate| {
            let mut per_ball = Vec::with_capacity(balls.len());
            let mut member = true;
            for ball in balls {
                let mut hit: Option<FamilyParam> = None;
                if use_witnesses {
                    if let Some(param) = family.solve_witness(candidate, ball.center())? {
                        let op = family.member(&param)?;
                        if ball.contains(&apply(&op, candidate)?)? {
                            hit = Some(param);
                        }
                    }
                }
                if hit.is_none() {
                    for (param, op) in &sampled {
                        if ball.contains(&apply(op, candidate)?)? {
                            hit = Some(param.clone());
                            break;
                        }
                    }
                }
                member &= hit.is_some();
                per_ball.push(hit);
            }
            Ok((member, per_ball))
        })
        .collect::<Result<Vec<_>>>()?;

    let (membership, witnesses) = results.into_iter().unzip();
    Ok(HCGridResult {
        candidates: candidates.to_vec(),
        n_balls: balls.len(),
        membership,
        witnesses,
    })
}
