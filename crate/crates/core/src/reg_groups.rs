//! Diagonal C-regularized groups `S(z) = exp(zΛ)C`, verification of the
//! group axioms, a finite-difference shadow of entirety, and the scalar
//! annulus witness construction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LinDynError, Result};
use crate::operators::OperatorSpec;
use crate::space::TruncatedVector;
use crate::Verdict;

/// A diagonal C-regularized group: `S(z)v = (exp(z·λᵢ)·cᵢ·vᵢ)ᵢ`.
///
/// All entries of `C` are nonzero — the truncation surrogate of `C` having
/// dense range. By construction `S(0) = C` exactly.
#[derive(Clone, Debug, Serialize)]
pub struct RegularizedGroup {
    dim: usize,
    lambda: Vec<Complex64>,
    c: Vec<Complex64>,
    name: String,
}

impl RegularizedGroup {
    pub fn new(
        lambda: Vec<Complex64>,
        c: Vec<Complex64>,
        name: impl Into<String>,
    ) -> Result<Self> {
        if lambda.is_empty() || lambda.len() != c.len() {
            return Err(LinDynError::InvalidParameter(format!(
                "generator and regularizer must have equal positive length (got {} and {})",
                lambda.len(),
                c.len()
            )));
        }
        for (j, v) in lambda.iter().chain(c.iter()).enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(LinDynError::NonFinite(format!("group entry {j}: {v}")));
            }
        }
        for (j, cj) in c.iter().enumerate() {
            if cj.norm() == 0.0 {
                return Err(LinDynError::InvalidParameter(format!(
                    "regularizer entry {j} is zero; dense-range surrogate requires all entries nonzero"
                )));
            }
        }
        Ok(Self {
            dim: lambda.len(),
            lambda,
            c,
            name: name.into(),
        })
    }

    /// The scalar exponential group on ℂ: `S(z)x = exp(z)·x` (d=1, Λ=1, C=1).
    pub fn scalar_exp() -> Self {
        Self::new(
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
            "scalar_exp",
        )
        .expect("static construction")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn regularizer(&self) -> &[Complex64] {
        &self.c
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when this is the scalar exponential group (d=1, Λ=1, C=1).
    pub fn is_scalar_exp(&self) -> bool {
        self.dim == 1
            && self.lambda[0] == Complex64::new(1.0, 0.0)
            && self.c[0] == Complex64::new(1.0, 0.0)
    }

    /// `S(z)` as a diagonal operator.
    pub fn member_spec(&self, z: Complex64) -> OperatorSpec {
        OperatorSpec::Diagonal(
            self.lambda
                .iter()
                .zip(&self.c)
                .map(|(l, c)| (z * l).exp() * c)
                .collect(),
        )
    }

    /// Apply `C` alone.
    pub fn apply_regularizer(&self, v: &TruncatedVector) -> Result<TruncatedVector> {
        self.check_dim(v)?;
        Ok(TruncatedVector::from_raw(
            v.coords().iter().zip(&self.c).map(|(x, c)| x * c).collect(),
        ))
    }

    fn check_dim(&self, v: &TruncatedVector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(LinDynError::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        Ok(())
    }
}

/// Apply `S(z)` to a vector: coordinate-wise `exp(z·λᵢ)·cᵢ·vᵢ`.
pub fn group_apply(
    group: &RegularizedGroup,
    z: Complex64,
    v: &TruncatedVector,
) -> Result<TruncatedVector> {
    if v.dim() != group.dim() {
        return Err(LinDynError::DimensionMismatch {
            expected: group.dim(),
            got: v.dim(),
        });
    }
    Ok(TruncatedVector::from_raw(
        v.coords()
            .iter()
            .zip(group.lambda().iter().zip(group.regularizer()))
            .map(|(x, (l, c))| (z * l).exp() * c * x)
            .collect(),
    ))
}

/// Residual record for the semigroup axiom `S(z+w)C = S(z)S(w)`.
#[derive(Clone, Debug, Serialize)]
pub struct GroupAxiomReport {
    pub pairs: Vec<(Complex64, Complex64)>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

/// Sample `pair_count` pairs `(z, w)` uniformly from the disk |·| ≤ 5 and
/// report `max over probes of ‖S(z+w)Cv − S(z)S(w)v‖` for each pair.
pub fn check_group_axioms(
    group: &RegularizedGroup,
    pair_count: usize,
    seed: u64,
    probes: &[TruncatedVector],
    tol: f64,
) -> Result<GroupAxiomReport> {
    if probes.is_empty() {
        return Err(LinDynError::InvalidParameter(
            "axiom check needs at least one probe".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(LinDynError::InvalidParameter(
            "tol must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(pair_count);
    let mut residuals = Vec::with_capacity(pair_count);
    for _ in 0..pair_count {
        let z = sample_disk(&mut rng, 5.0);
        let w = sample_disk(&mut rng, 5.0);
        let mut worst = 0.0f64;
        for v in probes {
            let lhs = group_apply(group, z + w, &group.apply_regularizer(v)?)?;
            let rhs = group_apply(group, z, &group_apply(group, w, v)?)?;
            worst = worst.max(lhs.sub(&rhs)?.norm());
        }
        pairs.push((z, w));
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(GroupAxiomReport {
        pairs,
        residuals,
        verdict: Verdict::from_bool(max_residual <= tol),
        max_residual,
        tol,
    })
}

/// Finite-difference shadow of the entirety axiom: along both the real and
/// the imaginary direction, the central difference of `z ↦ S(z)x` must match
/// the analytic derivative `Λ·S(z)x` at the sampled points.
#[derive(Clone, Debug, Serialize)]
pub struct EntiretyShadowReport {
    pub samples: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub step: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

pub fn check_entirety_shadow(
    group: &RegularizedGroup,
    sample_count: usize,
    seed: u64,
    sample_radius: f64,
    probes: &[TruncatedVector],
    step: f64,
    tol: f64,
) -> Result<EntiretyShadowReport> {
    if probes.is_empty() {
        return Err(LinDynError::InvalidParameter(
            "entirety shadow needs at least one probe".into(),
        ));
    }
    if !(step > 0.0) || !(tol > 0.0) || !(sample_radius > 0.0) {
        return Err(LinDynError::InvalidParameter(
            "step, tol and sample radius must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(sample_count);
    let mut residuals = Vec::with_capacity(sample_count);
    let h_re = Complex64::new(step, 0.0);
    let h_im = Complex64::new(0.0, step);
    for _ in 0..sample_count {
        let z = sample_disk(&mut rng, sample_radius);
        let mut worst = 0.0f64;
        for v in probes {
            let derivative = TruncatedVector::from_raw(
                group_apply(group, z, v)?
                    .coords()
                    .iter()
                    .zip(group.lambda())
                    .map(|(s, l)| s * l)
                    .collect(),
            );
            for h in [h_re, h_im] {
                let fwd = group_apply(group, z + h, v)?;
                let bwd = group_apply(group, z - h, v)?;
                let diff = fwd.sub(&bwd)?.scale(Complex64::new(1.0, 0.0) / (2.0 * h));
                worst = worst.max(diff.sub(&derivative)?.norm());
            }
        }
        samples.push(z);
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(EntiretyShadowReport {
        samples,
        residuals,
        verdict: Verdict::from_bool(max_residual <= tol),
        max_residual,
        step,
        tol,
    })
}

/// Constructive annulus witness for the scalar exponential group: returns
/// `z = ln|w| + i(Arg w + 2πk)` for the smallest integer `k ≥ 0` with
/// `|z| ≥ r`, so that `exp(z) = w` and `z` lies outside the disk of radius
/// `r`. Fails for `w = 0`, where no witness exists.
pub fn annulus_witness(group: &RegularizedGroup, w: Complex64, r: f64) -> Result<Complex64> {
    if !group.is_scalar_exp() {
        return Err(LinDynError::Unsupported(
            "annulus witness is defined for the scalar exponential group (d=1, Λ=1, C=1)".into(),
        ));
    }
    if !(r >= 0.0) {
        return Err(LinDynError::InvalidParameter(
            "annulus radius must be nonnegative".into(),
        ));
    }
    if w.norm() <= 1e-300 {
        return Err(LinDynError::InvalidParameter(
            "no annulus witness for w = 0: exp never vanishes".into(),
        ));
    }
    let re = w.norm().ln();
    let arg = w.arg();
    let mut k = 0u64;
    loop {
        let z = Complex64::new(re, arg + 2.0 * std::f64::consts::PI * k as f64);
        if z.norm() >= r {
            return Ok(z);
        }
        k += 1;
    }
}

fn sample_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let u: f64 = rng.gen();
    let theta: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    Complex64::from_polar(radius * u.sqrt(), theta)
}
