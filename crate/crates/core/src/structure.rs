//! Similarity and quasi-similarity transforms, direct sums of families, and
//! block projections — the structural moves behind the preservation results.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::OrbitSample;
use crate::error::{LinDynError, Result};
use crate::matrix::CMatrix;
use crate::operators::{FamilyKind, FamilyParam, OperatorFamily, OperatorSpec};
use crate::space::{TargetGrid, TruncatedVector};
use crate::Verdict;

/// Iterations and tolerance for the power-iteration bound on ‖φ‖.
const SIGMA_ITERS: usize = 200;
const SIGMA_TOL: f64 = 1e-10;

/// A linear map φ used for (quasi-)similarity: invertible for similarity,
/// or flagged as a dense-range surrogate when inversion is not required.
#[derive(Clone, Debug)]
pub struct ConjugationMap {
    matrix: CMatrix,
    inverse: Option<CMatrix>,
    dense_range_surrogate: bool,
    operator_norm_bound: f64,
}

impl ConjugationMap {
    /// Invertible φ. Fails when the matrix is numerically singular or when
    /// the computed inverse does not verify ‖φφ⁻¹ − I‖ ≤ 1e-8.
    pub fn invertible(matrix: CMatrix) -> Result<Self> {
        let inverse = matrix.inverse()?;
        let check = matrix
            .matmul(&inverse)?
            .sub(&CMatrix::identity(matrix.dim()))?
            .frobenius_norm();
        if check > 1e-8 {
            return Err(LinDynError::SingularMap(format!(
                "conjugation is too ill-conditioned: ‖φφ⁻¹ − I‖ = {check:.3e}"
            )));
        }
        let sigma = matrix.sigma_max(SIGMA_ITERS, SIGMA_TOL);
        Ok(Self {
            matrix,
            inverse: Some(inverse),
            dense_range_surrogate: false,
            operator_norm_bound: sigma * (1.0 + 1e-8),
        })
    }

    /// Non-invertible φ allowed only as a dense-range surrogate (for
    /// example a diagonal with decaying nonzero entries). Such maps verify
    /// intertwining relations but cannot build image families.
    pub fn dense_range_surrogate(matrix: CMatrix) -> Self {
        let sigma = matrix.sigma_max(SIGMA_ITERS, SIGMA_TOL);
        Self {
            matrix,
            inverse: None,
            dense_range_surrogate: true,
            operator_norm_bound: sigma * (1.0 + 1e-8),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn is_dense_range_surrogate(&self) -> bool {
        self.dense_range_surrogate
    }

    /// Upper bound on the largest singular value of φ.
    pub fn operator_norm_bound(&self) -> f64 {
        self.operator_norm_bound
    }

    pub fn apply(&self, v: &TruncatedVector) -> Result<TruncatedVector> {
        self.matrix.apply(v)
    }

    pub fn apply_inverse(&self, v: &TruncatedVector) -> Result<TruncatedVector> {
        match &self.inverse {
            Some(inv) => inv.apply(v),
            None => Err(LinDynError::Unsupported(
                "conjugation map is not invertible".into(),
            )),
        }
    }

    /// `φ∘T∘φ⁻¹` as an operator description. Only valid for invertible φ;
    /// callers guard via [`conjugate_family`].
    pub(crate) fn conjugate_spec(&self, op: &OperatorSpec) -> OperatorSpec {
        let inv = self
            .inverse
            .clone()
            .expect("conjugate_spec requires an invertible map");
        OperatorSpec::Compose(
            Box::new(OperatorSpec::Matrix(self.matrix.clone())),
            Box::new(OperatorSpec::Compose(
                Box::new(op.clone()),
                Box::new(OperatorSpec::Matrix(inv)),
            )),
        )
    }
}

/// The similar family `φΓφ⁻¹`, sharing Γ's parameters. Witness solving is
/// delegated to the source family through φ⁻¹.
pub fn conjugate_family(family: &OperatorFamily, map: &ConjugationMap) -> Result<OperatorFamily> {
    if !map.is_invertible() {
        return Err(LinDynError::Unsupported(
            "conjugating a family requires an invertible map".into(),
        ));
    }
    if map.dim() != family.dim() {
        return Err(LinDynError::DimensionMismatch {
            expected: family.dim(),
            got: map.dim(),
        });
    }
    Ok(OperatorFamily::from_kind(
        format!("similar({})", family.name()),
        family.dim(),
        family.parameter_domain().to_string(),
        FamilyKind::Conjugated {
            inner: Box::new(family.clone()),
            map: map.clone(),
        },
    ))
}

/// `max over probes of ‖S(φv) − φ(Tv)‖` — zero exactly when φ intertwines
/// the pair.
pub fn intertwining_residual(
    t: &OperatorSpec,
    s: &OperatorSpec,
    map: &ConjugationMap,
    probes: &[TruncatedVector],
) -> Result<f64> {
    if probes.is_empty() {
        return Err(LinDynError::InvalidParameter(
            "intertwining residual needs at least one probe".into(),
        ));
    }
    let mut worst = 0.0f64;
    for v in probes {
        let lhs = crate::operators::apply(s, &map.apply(v)?)?;
        let rhs = map.apply(&crate::operators::apply(t, v)?)?;
        worst = worst.max(lhs.sub(&rhs)?.norm());
    }
    Ok(worst)
}

/// A source/image pair of families claimed quasi-similar under a map φ.
/// Pairing is by identical parameter values.
#[derive(Clone, Debug)]
pub struct PairedFamily {
    pub source: OperatorFamily,
    pub image: OperatorFamily,
    pub tol: f64,
}

/// Per-pair intertwining residuals over a sampled set of parameters.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiSimilarityReport {
    pub params: Vec<FamilyParam>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl PairedFamily {
    pub fn new(source: OperatorFamily, image: OperatorFamily, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "tolerance must be positive".into(),
            ));
        }
        Ok(Self { source, image, tol })
    }

    /// Sample the source parameters, pair each `T` with the image member at
    /// the same parameter, and report the intertwining residuals.
    pub fn verify(
        &self,
        map: &ConjugationMap,
        count: usize,
        seed: u64,
        probes: &[TruncatedVector],
    ) -> Result<QuasiSimilarityReport> {
        let mut params = Vec::with_capacity(count);
        let mut residuals = Vec::with_capacity(count);
        for (p, t) in self.source.sample(count, seed)? {
            let s = self.image.member(&p)?;
            residuals.push(intertwining_residual(&t, &s, map, probes)?);
            params.push(p);
        }
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Ok(QuasiSimilarityReport {
            params,
            residuals,
            verdict: Verdict::from_bool(max_residual <= self.tol),
            max_residual,
            tol: self.tol,
        })
    }
}

/// Direct sum of families acting blockwise on the concatenated space; the
/// sampler draws one parameter per component under derived seeds.
pub fn direct_sum_family(components: Vec<OperatorFamily>) -> Result<OperatorFamily> {
    if components.is_empty() {
        return Err(LinDynError::InvalidParameter(
            "direct sum needs at least one family".into(),
        ));
    }
    let dim = components.iter().map(|f| f.dim()).sum();
    let names: Vec<&str> = components.iter().map(|f| f.name()).collect();
    Ok(OperatorFamily::from_kind(
        format!("direct_sum({})", names.join("+")),
        dim,
        format!("tuples of component parameters: {}", names.join(", ")),
        FamilyKind::DirectSum { components },
    ))
}

/// Coordinates of block `i` under the given block dimensions.
pub fn project_component(
    v: &TruncatedVector,
    block_dims: &[usize],
    i: usize,
) -> Result<TruncatedVector> {
    if i >= block_dims.len() {
        return Err(LinDynError::IndexOutOfRange {
            index: i,
            dim: block_dims.len(),
        });
    }
    let total: usize = block_dims.iter().sum();
    if v.dim() != total {
        return Err(LinDynError::DimensionMismatch {
            expected: total,
            got: v.dim(),
        });
    }
    let offset: usize = block_dims[..i].iter().sum();
    Ok(TruncatedVector::from_raw(
        v.coords()[offset..offset + block_dims[i]].to_vec(),
    ))
}

/// Re-embed a block vector with zeros in the other blocks.
pub fn embed_component(
    v: &TruncatedVector,
    block_dims: &[usize],
    i: usize,
) -> Result<TruncatedVector> {
    if i >= block_dims.len() {
        return Err(LinDynError::IndexOutOfRange {
            index: i,
            dim: block_dims.len(),
        });
    }
    if v.dim() != block_dims[i] {
        return Err(LinDynError::DimensionMismatch {
            expected: block_dims[i],
            got: v.dim(),
        });
    }
    let total: usize = block_dims.iter().sum();
    let offset: usize = block_dims[..i].iter().sum();
    let mut coords = vec![Complex64::new(0.0, 0.0); total];
    coords[offset..offset + v.dim()].copy_from_slice(v.coords());
    Ok(TruncatedVector::from_raw(coords))
}

/// Project every entry of a product orbit onto block `i`. Tuple parameters
/// are projected to their `i`-th component.
pub fn project_orbit(orbit: &OrbitSample, block_dims: &[usize], i: usize) -> Result<OrbitSample> {
    let base = project_component(&orbit.base, block_dims, i)?;
    let mut entries = Vec::with_capacity(orbit.entries.len());
    for (param, image) in &orbit.entries {
        let p = match param {
            FamilyParam::Tuple(ps) => ps
                .get(i)
                .cloned()
                .ok_or(LinDynError::IndexOutOfRange {
                    index: i,
                    dim: ps.len(),
                })?,
            other => other.clone(),
        };
        entries.push((p, project_component(image, block_dims, i)?));
    }
    Ok(OrbitSample {
        family_name: format!("{}[{}]", orbit.family_name, i),
        seed: orbit.seed,
        base,
        entries,
    })
}

/// Product grid `G₁ × G₂`: every concatenation of a point of `a` with a
/// point of `b`, ordered lexicographically by (a-index, b-index).
pub fn product_grid(a: &TargetGrid, b: &TargetGrid) -> Result<TargetGrid> {
    let mut points = Vec::with_capacity(a.len() * b.len());
    for pa in a.points() {
        for pb in b.points() {
            let mut coords = pa.coords().to_vec();
            coords.extend_from_slice(pb.coords());
            points.push(TruncatedVector::from_raw(coords));
        }
    }
    TargetGrid::from_points(points, "product")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::apply;
    use crate::space::{standard_basis, SpaceConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(dim: usize) -> SpaceConfig {
        SpaceConfig::new(dim, "test").unwrap()
    }

    #[test]
    fn identity_conjugation_preserves_action() {
        let phi = ConjugationMap::invertible(CMatrix::identity(3)).unwrap();
        let fam = OperatorFamily::poly_trunc(3, 2, 1.0, 1.0).unwrap();
        let conj = conjugate_family(&fam, &phi).unwrap();
        let v = TruncatedVector::from_real(&[1.0, -0.5, 0.25]).unwrap();
        for ((p1, t), (p2, s)) in fam
            .sample(5, 4)
            .unwrap()
            .into_iter()
            .zip(conj.sample(5, 4).unwrap())
        {
            assert_eq!(p1, p2);
            let tv = apply(&t, &v).unwrap();
            let sv = apply(&s, &v).unwrap();
            assert!(tv.sub(&sv).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn scalar_conjugation_commutes() {
        let phi = ConjugationMap::invertible(CMatrix::from_rows(vec![vec![c(2.0, 0.0)]]).unwrap())
            .unwrap();
        let t = OperatorSpec::ScaledIdentity(c(3.0, 0.0));
        let s = phi.conjugate_spec(&t);
        let v = TruncatedVector::from_real(&[1.0]).unwrap();
        let out = apply(&s, &v).unwrap();
        assert!((out.coords()[0] - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn intertwining_residual_examples() {
        // S = φTφ⁻¹ intertwines exactly.
        let phi = ConjugationMap::invertible(
            CMatrix::from_rows(vec![
                vec![c(1.0, 0.0), c(0.5, 0.0)],
                vec![c(0.0, 0.0), c(2.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let t = OperatorSpec::Diagonal(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        let s = phi.conjugate_spec(&t);
        let probes = vec![
            standard_basis(&cfg(2), 0).unwrap(),
            standard_basis(&cfg(2), 1).unwrap(),
        ];
        let r = intertwining_residual(&t, &s, &phi, &probes).unwrap();
        assert!(r <= 1e-10, "residual {r}");

        // d = 1, φ = 1, T = 2, S = 3, probe 1 → |3 − 2| = 1.
        let phi1 =
            ConjugationMap::invertible(CMatrix::from_rows(vec![vec![c(1.0, 0.0)]]).unwrap())
                .unwrap();
        let r = intertwining_residual(
            &OperatorSpec::ScaledIdentity(c(2.0, 0.0)),
            &OperatorSpec::ScaledIdentity(c(3.0, 0.0)),
            &phi1,
            &[TruncatedVector::from_real(&[1.0]).unwrap()],
        )
        .unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_range_surrogate_diagonal_commutes() {
        let d = 4;
        let phi_mat = CMatrix::from_fn(d, |i, j| {
            if i == j {
                c(0.5f64.powi(i as i32), 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let phi = ConjugationMap::dense_range_surrogate(phi_mat);
        assert!(phi.is_dense_range_surrogate());
        let t = OperatorSpec::Diagonal(vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
        let probes: Vec<_> = (0..d).map(|k| standard_basis(&cfg(d), k).unwrap()).collect();
        let r = intertwining_residual(&t, &t, &phi, &probes).unwrap();
        assert_eq!(r, 0.0);
        assert!(phi.apply_inverse(&probes[0]).is_err());
    }

    #[test]
    fn non_invertible_map_rejected_for_families() {
        let singular = CMatrix::zeros(2);
        let phi = ConjugationMap::dense_range_surrogate(singular);
        let fam = OperatorFamily::scalar(2, 1.0).unwrap();
        assert!(conjugate_family(&fam, &phi).is_err());
        assert!(ConjugationMap::invertible(CMatrix::zeros(2)).is_err());
    }

    #[test]
    fn sigma_bound_dominates_singular_values() {
        let m = CMatrix::from_rows(vec![
            vec![c(3.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        let phi = ConjugationMap::invertible(m.clone()).unwrap();
        // bound must dominate ‖φv‖/‖v‖ on probes
        for k in 0..2 {
            let v = standard_basis(&cfg(2), k).unwrap();
            assert!(phi.apply(&v).unwrap().norm() <= phi.operator_norm_bound());
        }
    }

    #[test]
    fn direct_sum_blockwise_action_and_dims() {
        let f1 = OperatorFamily::scalar(2, 1.0).unwrap();
        let f2 = OperatorFamily::poly_trunc(1, 0, 1.0, 1.0).unwrap();
        let sum = direct_sum_family(vec![f1.clone(), f2.clone()]).unwrap();
        assert_eq!(sum.dim(), 3);

        let sample = sum.sample(4, 11).unwrap();
        // component draws must match the per-family samplers under derived seeds
        let d1 = f1.sample(4, crate::operators::derive_seed(11, 0)).unwrap();
        let d2 = f2.sample(4, crate::operators::derive_seed(11, 1)).unwrap();
        for k in 0..4 {
            match &sample[k].0 {
                FamilyParam::Tuple(ps) => {
                    assert_eq!(ps[0], d1[k].0);
                    assert_eq!(ps[1], d2[k].0);
                }
                other => panic!("unexpected param {other:?}"),
            }
        }

        let x = TruncatedVector::from_real(&[1.0, 2.0, 3.0]).unwrap();
        let (_, op) = &sample[0];
        let out = apply(op, &x).unwrap();
        let x1 = TruncatedVector::from_real(&[1.0, 2.0]).unwrap();
        let x2 = TruncatedVector::from_real(&[3.0]).unwrap();
        let o1 = apply(&d1[0].1, &x1).unwrap();
        let o2 = apply(&d2[0].1, &x2).unwrap();
        assert_eq!(&out.coords()[..2], o1.coords());
        assert_eq!(&out.coords()[2..], o2.coords());
    }

    #[test]
    fn projection_and_embedding() {
        let v = TruncatedVector::from_real(&[1.0, 2.0, 3.0]).unwrap();
        let dims = [2usize, 1];
        let p0 = project_component(&v, &dims, 0).unwrap();
        assert_eq!(p0.coords(), &[c(1.0, 0.0), c(2.0, 0.0)]);
        let p1 = project_component(&v, &dims, 1).unwrap();
        assert_eq!(p1.coords(), &[c(3.0, 0.0)]);
        let back = embed_component(&p0, &dims, 0).unwrap();
        assert_ne!(back, v);
        assert_eq!(back.coords()[2], c(0.0, 0.0));
        assert!(project_component(&v, &dims, 2).is_err());
    }

    #[test]
    fn product_grid_sizes_and_order() {
        let g1 = TargetGrid::lattice(&cfg(1), 1.0, 1.0, 1).unwrap();
        let g2 = TargetGrid::lattice(&cfg(2), 1.0, 1.0, 1).unwrap();
        let prod = product_grid(&g1, &g2).unwrap();
        assert_eq!(prod.len(), g1.len() * g2.len());
        assert_eq!(prod.points()[0].dim(), 3);
        // first block cycles slowest
        assert_eq!(
            &prod.points()[1].coords()[..1],
            g1.points()[0].coords()
        );
    }
}
