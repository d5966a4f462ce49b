//! Matrix-free linear operators on the truncation, the built-in operator
//! families Γ, deterministic family sampling, and exact witness solvers.
//!
//! An [`OperatorSpec`] is a closed description of a linear operator; `apply`
//! evaluates it exactly per variant, `materialize` produces the dense matrix
//! whose column `j` is the image of the `j`-th basis vector. Families wrap a
//! parameter domain with a seeded sampler and, where the algebra allows it,
//! an exact witness solver for `T_p x = y`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{LinDynError, Result};
use crate::matrix::CMatrix;
use crate::reg_groups::RegularizedGroup;
use crate::space::TruncatedVector;
use crate::structure::ConjugationMap;

/// Pairings ⟨e,f⟩ smaller than this are treated as zero functionals.
pub const PAIRING_THRESHOLD: f64 = 1e-12;

/// Description of a linear operator on the `d`-dimensional truncation.
#[derive(Clone, Debug)]
pub enum OperatorSpec {
    /// Dense d×d matrix.
    Matrix(CMatrix),
    /// Coordinate-wise multiplication by the given entries.
    Diagonal(Vec<Complex64>),
    /// `(λB)^k` where `B` is the backward shift.
    BackwardShiftPower { weight: Complex64, power: usize },
    /// `(μF)^k` where `F` is the forward shift; coordinates pushed past the
    /// truncation boundary are dropped.
    ForwardShiftPower { weight: Complex64, power: usize },
    /// `(x_j)_j ↦ (a₀x₀, …, a_n x_n, 0, …)`.
    PolyTruncation(Vec<Complex64>),
    /// `y ↦ (⟨y,f⟩/⟨e,f⟩)·x` with functional `f`, anchor `e`, image
    /// direction `x`. Requires `|⟨e,f⟩|` above [`PAIRING_THRESHOLD`].
    RankOne {
        functional: TruncatedVector,
        anchor: TruncatedVector,
        vector: TruncatedVector,
    },
    /// `αI`.
    ScaledIdentity(Complex64),
    /// `v ↦ left(right(v))`.
    Compose(Box<OperatorSpec>, Box<OperatorSpec>),
    /// Blockwise action on the concatenation of the given block dimensions.
    DirectSum {
        parts: Vec<OperatorSpec>,
        dims: Vec<usize>,
    },
}

impl OperatorSpec {
    pub fn rank_one(
        functional: TruncatedVector,
        anchor: TruncatedVector,
        vector: TruncatedVector,
    ) -> Result<Self> {
        let op = OperatorSpec::RankOne {
            functional,
            anchor,
            vector,
        };
        op.dim_constraint()?;
        Ok(op)
    }

    pub fn direct_sum(parts: Vec<(OperatorSpec, usize)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(LinDynError::InvalidParameter(
                "direct sum needs at least one part".into(),
            ));
        }
        let (parts, dims): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
        let op = OperatorSpec::DirectSum { parts, dims };
        op.dim_constraint()?;
        Ok(op)
    }

    /// The dimension this operator insists on, if any. Shifts, scaled
    /// identities and polynomial truncations act on any dimension.
    pub fn dim_constraint(&self) -> Result<Option<usize>> {
        match self {
            OperatorSpec::Matrix(m) => Ok(Some(m.dim())),
            OperatorSpec::Diagonal(d) => Ok(Some(d.len())),
            OperatorSpec::BackwardShiftPower { .. }
            | OperatorSpec::ForwardShiftPower { .. }
            | OperatorSpec::PolyTruncation(_)
            | OperatorSpec::ScaledIdentity(_) => Ok(None),
            OperatorSpec::RankOne {
                functional,
                anchor,
                vector,
            } => {
                let d = functional.dim();
                if anchor.dim() != d {
                    return Err(LinDynError::DimensionMismatch {
                        expected: d,
                        got: anchor.dim(),
                    });
                }
                if vector.dim() != d {
                    return Err(LinDynError::DimensionMismatch {
                        expected: d,
                        got: vector.dim(),
                    });
                }
                let pairing = anchor.inner(functional)?;
                if pairing.norm() <= PAIRING_THRESHOLD {
                    return Err(LinDynError::InvalidParameter(format!(
                        "rank-one pairing |⟨e,f⟩| = {:.3e} is below threshold",
                        pairing.norm()
                    )));
                }
                Ok(Some(d))
            }
            OperatorSpec::Compose(left, right) => {
                match (left.dim_constraint()?, right.dim_constraint()?) {
                    (Some(a), Some(b)) if a != b => {
                        Err(LinDynError::DimensionMismatch { expected: a, got: b })
                    }
                    (a, b) => Ok(a.or(b)),
                }
            }
            OperatorSpec::DirectSum { parts, dims } => {
                if parts.len() != dims.len() {
                    return Err(LinDynError::InvalidParameter(
                        "direct sum parts and dims differ in length".into(),
                    ));
                }
                for (part, &d) in parts.iter().zip(dims) {
                    if let Some(pd) = part.dim_constraint()? {
                        if pd != d {
                            return Err(LinDynError::DimensionMismatch {
                                expected: d,
                                got: pd,
                            });
                        }
                    }
                }
                Ok(Some(dims.iter().sum()))
            }
        }
    }
}

fn shift_weight(weight: Complex64, power: usize) -> Result<Complex64> {
    let p = u32::try_from(power).map_err(|_| {
        LinDynError::InvalidParameter(format!("shift power {power} is too large"))
    })?;
    Ok(weight.powu(p))
}

/// Apply an operator to a vector using each variant's defining formula.
pub fn apply(op: &OperatorSpec, v: &TruncatedVector) -> Result<TruncatedVector> {
    if let Some(d) = op.dim_constraint()? {
        if d != v.dim() {
            return Err(LinDynError::DimensionMismatch {
                expected: d,
                got: v.dim(),
            });
        }
    }
    let d = v.dim();
    let zero = Complex64::new(0.0, 0.0);
    match op {
        OperatorSpec::Matrix(m) => m.apply(v),
        OperatorSpec::Diagonal(diag) => Ok(TruncatedVector::from_raw(
            v.coords().iter().zip(diag).map(|(x, a)| a * x).collect(),
        )),
        OperatorSpec::BackwardShiftPower { weight, power } => {
            let wk = shift_weight(*weight, *power)?;
            let coords = (0..d)
                .map(|j| {
                    if j + power < d {
                        wk * v.coords()[j + power]
                    } else {
                        zero
                    }
                })
                .collect();
            Ok(TruncatedVector::from_raw(coords))
        }
        OperatorSpec::ForwardShiftPower { weight, power } => {
            let wk = shift_weight(*weight, *power)?;
            let coords = (0..d)
                .map(|j| {
                    if j >= *power {
                        wk * v.coords()[j - power]
                    } else {
                        zero
                    }
                })
                .collect();
            Ok(TruncatedVector::from_raw(coords))
        }
        OperatorSpec::PolyTruncation(coeffs) => {
            let coords = (0..d)
                .map(|j| {
                    if j < coeffs.len() {
                        coeffs[j] * v.coords()[j]
                    } else {
                        zero
                    }
                })
                .collect();
            Ok(TruncatedVector::from_raw(coords))
        }
        OperatorSpec::RankOne {
            functional,
            anchor,
            vector,
        } => {
            let scale = v.inner(functional)? / anchor.inner(functional)?;
            Ok(vector.scale(scale))
        }
        OperatorSpec::ScaledIdentity(alpha) => Ok(v.scale(*alpha)),
        OperatorSpec::Compose(left, right) => apply(left, &apply(right, v)?),
        OperatorSpec::DirectSum { parts, dims } => {
            let total: usize = dims.iter().sum();
            if total != d {
                return Err(LinDynError::DimensionMismatch {
                    expected: total,
                    got: d,
                });
            }
            let mut coords = Vec::with_capacity(d);
            let mut offset = 0;
            for (part, &bd) in parts.iter().zip(dims) {
                let block =
                    TruncatedVector::from_raw(v.coords()[offset..offset + bd].to_vec());
                coords.extend_from_slice(apply(part, &block)?.coords());
                offset += bd;
            }
            Ok(TruncatedVector::from_raw(coords))
        }
    }
}

/// Dense matrix of the operator on the `dim`-dimensional truncation: column
/// `j` is `apply(op, e_j)`.
pub fn materialize(op: &OperatorSpec, dim: usize) -> Result<CMatrix> {
    if let Some(d) = op.dim_constraint()? {
        if d != dim {
            return Err(LinDynError::DimensionMismatch {
                expected: d,
                got: dim,
            });
        }
    }
    let mut m = CMatrix::zeros(dim);
    for j in 0..dim {
        let mut coords = vec![Complex64::new(0.0, 0.0); dim];
        coords[j] = Complex64::new(1.0, 0.0);
        let col = apply(op, &TruncatedVector::from_raw(coords))?;
        m.set_column(j, col.coords());
    }
    Ok(m)
}

/// Composition `a∘b`: `apply(compose(a,b), v) = apply(a, apply(b, v))`.
pub fn compose(a: &OperatorSpec, b: &OperatorSpec) -> Result<OperatorSpec> {
    let composed = OperatorSpec::Compose(Box::new(a.clone()), Box::new(b.clone()));
    composed.dim_constraint()?;
    Ok(composed)
}

/// Adjoint with respect to ⟨u,v⟩ = Σ uⱼ·conj(vⱼ): the materialization of the
/// result is the conjugate transpose of the materialization of `op`.
pub fn adjoint(op: &OperatorSpec) -> Result<OperatorSpec> {
    match op {
        OperatorSpec::Matrix(m) => Ok(OperatorSpec::Matrix(m.conj_transpose())),
        OperatorSpec::Diagonal(d) => {
            Ok(OperatorSpec::Diagonal(d.iter().map(|c| c.conj()).collect()))
        }
        OperatorSpec::BackwardShiftPower { weight, power } => Ok(OperatorSpec::ForwardShiftPower {
            weight: weight.conj(),
            power: *power,
        }),
        OperatorSpec::ForwardShiftPower { weight, power } => Ok(OperatorSpec::BackwardShiftPower {
            weight: weight.conj(),
            power: *power,
        }),
        OperatorSpec::PolyTruncation(coeffs) => Ok(OperatorSpec::PolyTruncation(
            coeffs.iter().map(|c| c.conj()).collect(),
        )),
        OperatorSpec::RankOne {
            functional,
            anchor,
            vector,
        } => {
            // T = x·f*/⟨e,f⟩ so T* = f·x*/conj(⟨e,f⟩). When x is large
            // enough to anchor a rank-one form, stay symbolic; otherwise
            // fall back to the dense conjugate transpose.
            let pairing = anchor.inner(functional)?;
            let xx = vector.inner(vector)?;
            if xx.norm() > PAIRING_THRESHOLD {
                let scaled = functional.scale(xx / pairing.conj());
                OperatorSpec::rank_one(vector.clone(), vector.clone(), scaled)
            } else {
                let d = functional.dim();
                Ok(OperatorSpec::Matrix(materialize(op, d)?.conj_transpose()))
            }
        }
        OperatorSpec::ScaledIdentity(alpha) => Ok(OperatorSpec::ScaledIdentity(alpha.conj())),
        OperatorSpec::Compose(left, right) => Ok(OperatorSpec::Compose(
            Box::new(adjoint(right)?),
            Box::new(adjoint(left)?),
        )),
        OperatorSpec::DirectSum { parts, dims } => Ok(OperatorSpec::DirectSum {
            parts: parts.iter().map(adjoint).collect::<Result<Vec<_>>>()?,
            dims: dims.clone(),
        }),
    }
}

/// `base^n` with `n = 0` yielding the identity. Shift powers, diagonals and
/// scaled identities stay in closed form; other variants fold into
/// compositions.
pub fn power_of(base: &OperatorSpec, n: usize) -> Result<OperatorSpec> {
    if n == 0 {
        return Ok(OperatorSpec::ScaledIdentity(Complex64::new(1.0, 0.0)));
    }
    match base {
        OperatorSpec::ScaledIdentity(alpha) => {
            Ok(OperatorSpec::ScaledIdentity(shift_weight(*alpha, n)?))
        }
        OperatorSpec::Diagonal(d) => Ok(OperatorSpec::Diagonal(
            d.iter()
                .map(|c| shift_weight(*c, n))
                .collect::<Result<Vec<_>>>()?,
        )),
        OperatorSpec::PolyTruncation(coeffs) => Ok(OperatorSpec::PolyTruncation(
            coeffs
                .iter()
                .map(|c| shift_weight(*c, n))
                .collect::<Result<Vec<_>>>()?,
        )),
        OperatorSpec::BackwardShiftPower { weight, power } => {
            Ok(OperatorSpec::BackwardShiftPower {
                weight: *weight,
                power: power.checked_mul(n).ok_or_else(|| {
                    LinDynError::InvalidParameter("shift power overflow".into())
                })?,
            })
        }
        OperatorSpec::ForwardShiftPower { weight, power } => Ok(OperatorSpec::ForwardShiftPower {
            weight: *weight,
            power: power.checked_mul(n).ok_or_else(|| {
                LinDynError::InvalidParameter("shift power overflow".into())
            })?,
        }),
        other => {
            let mut acc = other.clone();
            for _ in 1..n {
                acc = compose(other, &acc)?;
            }
            Ok(acc)
        }
    }
}

/// Parameter of a family member, carried alongside sampled operators and in
/// experiment reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FamilyParam {
    Exponent(usize),
    Scalar(Complex64),
    Coeffs(Vec<Complex64>),
    Vector(Vec<Complex64>),
    Tuple(Vec<FamilyParam>),
}

/// Stable per-component seed derivation (splitmix64 step over a mixed key).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A parameterized set Γ of operators with a deterministic sampler and,
/// where available, an exact witness solver.
#[derive(Clone, Debug)]
pub struct OperatorFamily {
    name: String,
    dim: usize,
    parameter_domain: String,
    kind: FamilyKind,
}

#[derive(Clone, Debug)]
pub enum FamilyKind {
    /// All polynomial truncations; the sampler draws coefficient vectors
    /// from a lattice of the given extent and spacing.
    PolyTrunc {
        max_degree: usize,
        extent: f64,
        spacing: f64,
    },
    /// `{T_x : x ∈ X}` with `T_x y = (⟨y,f⟩/⟨e,f⟩)·x`; the sampler emits the
    /// standard basis first, then uniform draws from a ball.
    RankOne {
        functional: TruncatedVector,
        anchor: TruncatedVector,
        radius: f64,
    },
    /// `{baseⁿ : n ∈ ℕ}` enumerated in order, `n = 0` included.
    Power { base: OperatorSpec },
    /// `{cI : c ∈ ℂ}`; the sampler draws uniformly from a disk.
    Scalar { radius: f64 },
    /// `{S(z) : z ∈ ℂ}` for a diagonal C-regularized group.
    DiagExpGroup {
        group: RegularizedGroup,
        disk_radius: f64,
    },
    /// `{T₁×⋯×Tₙ : Tᵢ ∈ Γᵢ}` on the concatenated space.
    DirectSum { components: Vec<OperatorFamily> },
    /// `{φTφ⁻¹ : T ∈ Γ}` for an invertible conjugation.
    Conjugated {
        inner: Box<OperatorFamily>,
        map: ConjugationMap,
    },
}

impl OperatorFamily {
    pub fn poly_trunc(dim: usize, max_degree: usize, extent: f64, spacing: f64) -> Result<Self> {
        if dim == 0 {
            return Err(LinDynError::InvalidParameter("dim must be positive".into()));
        }
        if !(extent > 0.0) || !(spacing > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "lattice extent and spacing must be positive".into(),
            ));
        }
        let max_degree = max_degree.min(dim - 1);
        Ok(Self {
            name: "poly_trunc".into(),
            dim,
            parameter_domain: format!(
                "coefficient vectors a_0..a_{max_degree} on the lattice spacing {spacing}, extent {extent}"
            ),
            kind: FamilyKind::PolyTrunc {
                max_degree,
                extent,
                spacing,
            },
        })
    }

    pub fn rank_one(
        functional: TruncatedVector,
        anchor: TruncatedVector,
        radius: f64,
    ) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "sampling radius must be positive".into(),
            ));
        }
        let dim = functional.dim();
        // validates the pairing and the dims
        OperatorSpec::rank_one(
            functional.clone(),
            anchor.clone(),
            TruncatedVector::zeros(dim),
        )?;
        Ok(Self {
            name: "rank_one".into(),
            dim,
            parameter_domain: format!(
                "x ∈ C^{dim}: standard basis first, then uniform in the ball of radius {radius}"
            ),
            kind: FamilyKind::RankOne {
                functional,
                anchor,
                radius,
            },
        })
    }

    pub fn power(dim: usize, base: OperatorSpec) -> Result<Self> {
        if let Some(d) = base.dim_constraint()? {
            if d != dim {
                return Err(LinDynError::DimensionMismatch {
                    expected: dim,
                    got: d,
                });
            }
        }
        Ok(Self {
            name: "power".into(),
            dim,
            parameter_domain: "exponents n = 0, 1, 2, … in order".into(),
            kind: FamilyKind::Power { base },
        })
    }

    pub fn scalar(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "dim and sampling radius must be positive".into(),
            ));
        }
        Ok(Self {
            name: "scalar".into(),
            dim,
            parameter_domain: format!("c ∈ C, sampled uniformly from the disk of radius {radius}"),
            kind: FamilyKind::Scalar { radius },
        })
    }

    pub fn diag_exp_group(group: RegularizedGroup, disk_radius: f64) -> Result<Self> {
        if !(disk_radius > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "z sampling radius must be positive".into(),
            ));
        }
        Ok(Self {
            name: "diag_exp_group".into(),
            dim: group.dim(),
            parameter_domain: format!(
                "z ∈ C, sampled uniformly from the disk of radius {disk_radius}"
            ),
            kind: FamilyKind::DiagExpGroup { group, disk_radius },
        })
    }

    pub(crate) fn from_kind(
        name: String,
        dim: usize,
        parameter_domain: String,
        kind: FamilyKind,
    ) -> Self {
        Self {
            name,
            dim,
            parameter_domain,
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parameter_domain(&self) -> &str {
        &self.parameter_domain
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// Draw `count` members. Deterministic for a fixed `(count, seed)`, and
    /// a prefix of any longer draw with the same seed.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<(FamilyParam, OperatorSpec)>> {
        let mut out = Vec::with_capacity(count);
        match &self.kind {
            FamilyKind::PolyTrunc {
                max_degree,
                extent,
                spacing,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = (extent / spacing).floor() as i64;
                for _ in 0..count {
                    let coeffs: Vec<Complex64> = (0..=*max_degree)
                        .map(|_| {
                            let re = rng.gen_range(-m..=m) as f64 * spacing;
                            let im = rng.gen_range(-m..=m) as f64 * spacing;
                            Complex64::new(re, im)
                        })
                        .collect();
                    out.push((
                        FamilyParam::Coeffs(coeffs.clone()),
                        OperatorSpec::PolyTruncation(coeffs),
                    ));
                }
            }
            FamilyKind::RankOne {
                functional,
                anchor,
                radius,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for i in 0..count {
                    let x = if i < self.dim {
                        let mut coords = vec![Complex64::new(0.0, 0.0); self.dim];
                        coords[i] = Complex64::new(1.0, 0.0);
                        coords
                    } else {
                        sample_ball_coords(&mut rng, self.dim, *radius)
                    };
                    out.push((
                        FamilyParam::Vector(x.clone()),
                        OperatorSpec::RankOne {
                            functional: functional.clone(),
                            anchor: anchor.clone(),
                            vector: TruncatedVector::from_raw(x),
                        },
                    ));
                }
            }
            FamilyKind::Power { base } => {
                for n in 0..count {
                    out.push((FamilyParam::Exponent(n), power_of(base, n)?));
                }
            }
            FamilyKind::Scalar { radius } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..count {
                    let c = sample_disk(&mut rng, *radius);
                    out.push((FamilyParam::Scalar(c), OperatorSpec::ScaledIdentity(c)));
                }
            }
            FamilyKind::DiagExpGroup { group, disk_radius } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..count {
                    let z = sample_disk(&mut rng, *disk_radius);
                    out.push((FamilyParam::Scalar(z), group.member_spec(z)));
                }
            }
            FamilyKind::DirectSum { components } => {
                let mut draws = Vec::with_capacity(components.len());
                for (i, comp) in components.iter().enumerate() {
                    draws.push(comp.sample(count, derive_seed(seed, i as u64))?);
                }
                for k in 0..count {
                    let mut params = Vec::with_capacity(components.len());
                    let mut specs = Vec::with_capacity(components.len());
                    for (comp, draw) in components.iter().zip(&draws) {
                        let (p, s) = draw[k].clone();
                        params.push(p);
                        specs.push((s, comp.dim()));
                    }
                    out.push((FamilyParam::Tuple(params), OperatorSpec::direct_sum(specs)?));
                }
            }
            FamilyKind::Conjugated { inner, map } => {
                for (p, s) in inner.sample(count, seed)? {
                    out.push((p, map.conjugate_spec(&s)));
                }
            }
        }
        Ok(out)
    }

    /// Construct the member at an explicit parameter value.
    pub fn member(&self, param: &FamilyParam) -> Result<OperatorSpec> {
        match (&self.kind, param) {
            (FamilyKind::PolyTrunc { .. }, FamilyParam::Coeffs(coeffs)) => {
                Ok(OperatorSpec::PolyTruncation(coeffs.clone()))
            }
            (
                FamilyKind::RankOne {
                    functional, anchor, ..
                },
                FamilyParam::Vector(x),
            ) => Ok(OperatorSpec::RankOne {
                functional: functional.clone(),
                anchor: anchor.clone(),
                vector: TruncatedVector::new(x.clone())?,
            }),
            (FamilyKind::Power { base }, FamilyParam::Exponent(n)) => power_of(base, *n),
            (FamilyKind::Scalar { .. }, FamilyParam::Scalar(c)) => {
                Ok(OperatorSpec::ScaledIdentity(*c))
            }
            (FamilyKind::DiagExpGroup { group, .. }, FamilyParam::Scalar(z)) => {
                Ok(group.member_spec(*z))
            }
            (FamilyKind::DirectSum { components }, FamilyParam::Tuple(params)) => {
                if params.len() != components.len() {
                    return Err(LinDynError::InvalidParameter(format!(
                        "direct-sum parameter tuple has {} entries, family has {} components",
                        params.len(),
                        components.len()
                    )));
                }
                let parts = components
                    .iter()
                    .zip(params)
                    .map(|(c, p)| Ok((c.member(p)?, c.dim())))
                    .collect::<Result<Vec<_>>>()?;
                OperatorSpec::direct_sum(parts)
            }
            (FamilyKind::Conjugated { inner, map }, p) => {
                Ok(map.conjugate_spec(&inner.member(p)?))
            }
            _ => Err(LinDynError::InvalidParameter(format!(
                "parameter kind does not match family {}",
                self.name
            ))),
        }
    }

    /// Exact witness solver: a parameter `p` with `T_p x = y`, when the
    /// family's algebra provides one.
    pub fn solve_witness(
        &self,
        x: &TruncatedVector,
        y: &TruncatedVector,
    ) -> Result<Option<FamilyParam>> {
        if x.dim() != self.dim || y.dim() != self.dim {
            return Err(LinDynError::DimensionMismatch {
                expected: self.dim,
                got: if x.dim() != self.dim { x.dim() } else { y.dim() },
            });
        }
        match &self.kind {
            FamilyKind::PolyTrunc { .. } => {
                // aₖ = yₖ/xₖ requires every coordinate of x to be nonzero.
                let mut coeffs = Vec::with_capacity(self.dim);
                for (xj, yj) in x.coords().iter().zip(y.coords()) {
                    if xj.norm() == 0.0 {
                        return Ok(None);
                    }
                    let a = yj / xj;
                    if !a.re.is_finite() || !a.im.is_finite() {
                        return Ok(None);
                    }
                    coeffs.push(a);
                }
                Ok(Some(FamilyParam::Coeffs(coeffs)))
            }
            FamilyKind::RankOne {
                functional, anchor, ..
            } => {
                let fx = x.inner(functional)?;
                if fx.norm() <= PAIRING_THRESHOLD {
                    return Ok(None);
                }
                let scale = anchor.inner(functional)? / fx;
                Ok(Some(FamilyParam::Vector(
                    y.scale(scale).coords().to_vec(),
                )))
            }
            FamilyKind::Power { .. } => Ok(None),
            FamilyKind::Scalar { .. } => {
                if self.dim != 1 {
                    return Ok(None);
                }
                let x0 = x.coords()[0];
                if x0.norm() == 0.0 {
                    return Ok(None);
                }
                let c = y.coords()[0] / x0;
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Ok(None);
                }
                Ok(Some(FamilyParam::Scalar(c)))
            }
            FamilyKind::DiagExpGroup { group, .. } => {
                if self.dim != 1 {
                    return Ok(None);
                }
                let lambda = group.lambda()[0];
                let c0 = group.regularizer()[0];
                let x0 = x.coords()[0];
                let y0 = y.coords()[0];
                if lambda.norm() == 0.0 || x0.norm() == 0.0 || y0.norm() == 0.0 {
                    return Ok(None);
                }
                let z = (y0 / (c0 * x0)).ln() / lambda;
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Ok(None);
                }
                Ok(Some(FamilyParam::Scalar(z)))
            }
            FamilyKind::DirectSum { components } => {
                let mut params = Vec::with_capacity(components.len());
                let mut offset = 0;
                for comp in components {
                    let bd = comp.dim();
                    let xb = TruncatedVector::from_raw(x.coords()[offset..offset + bd].to_vec());
                    let yb = TruncatedVector::from_raw(y.coords()[offset..offset + bd].to_vec());
                    match comp.solve_witness(&xb, &yb)? {
                        Some(p) => params.push(p),
                        None => return Ok(None),
                    }
                    offset += bd;
                }
                Ok(Some(FamilyParam::Tuple(params)))
            }
            FamilyKind::Conjugated { inner, map } => {
                inner.solve_witness(&map.apply_inverse(x)?, &map.apply_inverse(y)?)
            }
        }
    }

    /// Indexed sequence `k ↦ T_k`, defined for power families.
    pub fn indexed(&self, k: usize) -> Option<OperatorSpec> {
        match &self.kind {
            FamilyKind::Power { base } => power_of(base, k).ok(),
            FamilyKind::Conjugated { inner, map } => {
                inner.indexed(k).map(|s| map.conjugate_spec(&s))
            }
            _ => None,
        }
    }

    /// Criterion maps `(T_k, S_k)` for families that expose them: powers of
    /// a weighted backward shift use the weighted forward shift as the
    /// right inverse, `S_k = (λ⁻¹F)^k`.
    pub fn criterion_maps(&self, k: usize) -> Option<(OperatorSpec, OperatorSpec)> {
        match &self.kind {
            FamilyKind::Power { base } => match base {
                OperatorSpec::BackwardShiftPower { weight, power } if weight.norm() > 0.0 => {
                    let total = power.checked_mul(k)?;
                    Some((
                        OperatorSpec::BackwardShiftPower {
                            weight: *weight,
                            power: total,
                        },
                        OperatorSpec::ForwardShiftPower {
                            weight: Complex64::new(1.0, 0.0) / weight,
                            power: total,
                        },
                    ))
                }
                _ => None,
            },
            FamilyKind::Conjugated { inner, map } => inner
                .criterion_maps(k)
                .map(|(t, s)| (map.conjugate_spec(&t), map.conjugate_spec(&s))),
            _ => None,
        }
    }

    /// Group-style parameter arithmetic for the closure hypothesis
    /// `T = A·S`: the parameter of the candidate `A` given the parameters
    /// of `T` and `S`.
    pub fn closure_arithmetic(
        &self,
        param_t: &FamilyParam,
        param_s: &FamilyParam,
    ) -> Option<FamilyParam> {
        match (&self.kind, param_t, param_s) {
            (FamilyKind::DiagExpGroup { .. }, FamilyParam::Scalar(z1), FamilyParam::Scalar(z2)) => {
                Some(FamilyParam::Scalar(z1 - z2))
            }
            (FamilyKind::Scalar { .. }, FamilyParam::Scalar(c1), FamilyParam::Scalar(c2)) => {
                if c2.norm() == 0.0 {
                    None
                } else {
                    Some(FamilyParam::Scalar(c1 / c2))
                }
            }
            (FamilyKind::DirectSum { components }, FamilyParam::Tuple(a), FamilyParam::Tuple(b)) => {
                if a.len() != components.len() || b.len() != components.len() {
                    return None;
                }
                let mut params = Vec::with_capacity(components.len());
                for ((comp, pa), pb) in components.iter().zip(a).zip(b) {
                    params.push(comp.closure_arithmetic(pa, pb)?);
                }
                Some(FamilyParam::Tuple(params))
            }
            (FamilyKind::Conjugated { inner, .. }, a, b) => inner.closure_arithmetic(a, b),
            _ => None,
        }
    }
}

fn sample_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let u: f64 = rng.gen();
    let theta: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    Complex64::from_polar(radius * u.sqrt(), theta)
}

fn sample_ball_coords(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<Complex64> {
    let mut gauss = Vec::with_capacity(2 * dim);
    let mut norm_sq = 0.0f64;
    for _ in 0..2 * dim {
        let g: f64 = rng.sample(StandardNormal);
        norm_sq += g * g;
        gauss.push(g);
    }
    let gnorm = norm_sq.sqrt();
    if gnorm == 0.0 {
        return vec![Complex64::new(0.0, 0.0); dim];
    }
    let u: f64 = rng.gen();
    let r = radius * u.powf(1.0 / (2.0 * dim as f64));
    (0..dim)
        .map(|c| Complex64::new(gauss[2 * c] / gnorm * r, gauss[2 * c + 1] / gnorm * r))
        .collect()
}
