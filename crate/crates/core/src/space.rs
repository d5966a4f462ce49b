//! Truncated sequence space: complex vectors of a fixed dimension `d`, the
//! ℓ² norm and distance, finite target grids, and basis balls.
//!
//! A `TruncatedVector` stands in for an element of ℓ²(ℕ) restricted to its
//! first `d` coordinates. Target grids are the finite surrogates for dense
//! test sets; basis balls play the role of a countable basis of open sets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{LinDynError, Result};

/// Upper bound on lattice sizes so a typo in `spacing` cannot OOM the host.
const MAX_GRID_POINTS: usize = 50_000_000;

/// Configuration of one truncated space: the dimension and a display label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpaceConfig {
    dim: usize,
    label: String,
}

impl SpaceConfig {
    pub fn new(dim: usize, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(LinDynError::InvalidParameter(
                "space dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            dim,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// A vector in the `d`-dimensional truncation. All coordinates are finite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedVector {
    coords: Vec<Complex64>,
}

impl TruncatedVector {
    /// Build a vector, rejecting NaN or infinite coordinates.
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(LinDynError::InvalidParameter(
                "vector must have at least one coordinate".into(),
            ));
        }
        for (j, c) in coords.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(LinDynError::NonFinite(format!("coordinate {j}: {c}")));
            }
        }
        Ok(Self { coords })
    }

    /// Internal constructor for values produced by finite arithmetic.
    pub(crate) fn from_raw(coords: Vec<Complex64>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Convenience constructor from real parts.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn get(&self, j: usize) -> Result<Complex64> {
        self.coords
            .get(j)
            .copied()
            .ok_or(LinDynError::IndexOutOfRange {
                index: j,
                dim: self.coords.len(),
            })
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_raw(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_raw(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self::from_raw(self.coords.iter().map(|c| c * alpha).collect())
    }

    /// Inner product ⟨self, other⟩ = Σ selfⱼ·conj(otherⱼ), conjugate-linear
    /// in the second argument.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(LinDynError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

/// ℓ² norm of a vector.
pub fn norm(v: &TruncatedVector) -> f64 {
    v.norm()
}

/// ℓ² distance between two vectors of equal dimension.
pub fn distance(u: &TruncatedVector, v: &TruncatedVector) -> Result<f64> {
    Ok(u.sub(v)?.norm())
}

/// `k`-th standard basis vector of the configured space.
pub fn standard_basis(config: &SpaceConfig, k: usize) -> Result<TruncatedVector> {
    if k >= config.dim() {
        return Err(LinDynError::IndexOutOfRange {
            index: k,
            dim: config.dim(),
        });
    }
    let mut coords = vec![Complex64::new(0.0, 0.0); config.dim()];
    coords[k] = Complex64::new(1.0, 0.0);
    Ok(TruncatedVector::from_raw(coords))
}

/// How a target grid was generated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum GridKind {
    /// Real and imaginary parts on a uniform mesh over the leading
    /// coordinates; remaining coordinates are zero.
    Lattice { extent: f64, spacing: f64 },
    /// Seeded points drawn uniformly from the ball of radius `extent`
    /// supported on the leading coordinates.
    SeededRandom { extent: f64, count: usize, seed: u64 },
    /// Built from another grid (products, images under linear maps).
    Derived(String),
}

/// A finite set of target points together with a bound on their norms.
#[derive(Clone, Debug, Serialize)]
pub struct TargetGrid {
    points: Vec<TruncatedVector>,
    radius_bound: f64,
    kind: GridKind,
    effective_dims: usize,
}

impl TargetGrid {
    /// Lattice grid: every point has `re, im ∈ {-m·spacing, …, m·spacing}`
    /// with `m = floor(extent/spacing)` on each of the first
    /// `effective_dims` coordinates, zeros elsewhere. The grid has exactly
    /// `(2m+1)^(2·effective_dims)` points.
    pub fn lattice(
        config: &SpaceConfig,
        extent: f64,
        spacing: f64,
        effective_dims: usize,
    ) -> Result<Self> {
        if !(extent > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "grid extent must be positive".into(),
            ));
        }
        if !(spacing > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "lattice spacing must be positive".into(),
            ));
        }
        if effective_dims > config.dim() {
            return Err(LinDynError::InvalidParameter(format!(
                "effective_dims {} exceeds dimension {}",
                effective_dims,
                config.dim()
            )));
        }
        let m = (extent / spacing).floor() as i64;
        let side = (2 * m + 1) as usize;
        let axes = 2 * effective_dims;
        let total = side
            .checked_pow(axes as u32)
            .filter(|&t| t <= MAX_GRID_POINTS)
            .ok_or_else(|| {
                LinDynError::InvalidParameter(format!(
                    "lattice of {side}^{axes} points is too large"
                ))
            })?;

        let mut points = Vec::with_capacity(total);
        let mut digits = vec![0usize; axes];
        loop {
            let mut coords = vec![Complex64::new(0.0, 0.0); config.dim()];
            for c in 0..effective_dims {
                let re = (digits[2 * c] as i64 - m) as f64 * spacing;
                let im = (digits[2 * c + 1] as i64 - m) as f64 * spacing;
                coords[c] = Complex64::new(re, im);
            }
            points.push(TruncatedVector::from_raw(coords));

            // odometer over the axes, last axis fastest
            let mut axis = axes;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                digits[axis] += 1;
                if digits[axis] < side {
                    break;
                }
                digits[axis] = 0;
                if axis == 0 {
                    return Ok(Self::finish(
                        points,
                        GridKind::Lattice { extent, spacing },
                        effective_dims,
                    ));
                }
            }
            if axes == 0 {
                // a zero-axis lattice has the single zero point
                return Ok(Self::finish(
                    points,
                    GridKind::Lattice { extent, spacing },
                    effective_dims,
                ));
            }
        }
    }

    /// Seeded random grid: `count` points drawn uniformly from the ball of
    /// radius `extent`, supported on the first `effective_dims` coordinates.
    pub fn seeded_random(
        config: &SpaceConfig,
        extent: f64,
        count: usize,
        effective_dims: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(extent > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "grid extent must be positive".into(),
            ));
        }
        if count == 0 {
            return Err(LinDynError::InvalidParameter(
                "random grid count must be at least 1".into(),
            ));
        }
        if effective_dims > config.dim() {
            return Err(LinDynError::InvalidParameter(format!(
                "effective_dims {} exceeds dimension {}",
                effective_dims,
                config.dim()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            points.push(TruncatedVector::from_raw(sample_ball(
                &mut rng,
                config.dim(),
                effective_dims,
                extent,
            )));
        }
        Ok(Self::finish(
            points,
            GridKind::SeededRandom {
                extent,
                count,
                seed,
            },
            effective_dims,
        ))
    }

    /// Grid over an explicit point list (products of grids, mapped grids).
    pub fn from_points(points: Vec<TruncatedVector>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(LinDynError::InvalidParameter(
                "derived grid needs at least one point".into(),
            ));
        }
        let dim = points[0].dim();
        for p in &points {
            if p.dim() != dim {
                return Err(LinDynError::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
        }
        Ok(Self::finish(points, GridKind::Derived(label.into()), dim))
    }

    fn finish(points: Vec<TruncatedVector>, kind: GridKind, effective_dims: usize) -> Self {
        let radius_bound = points.iter().map(|p| p.norm()).fold(0.0f64, f64::max);
        Self {
            points,
            radius_bound,
            kind,
            effective_dims,
        }
    }

    pub fn points(&self) -> &[TruncatedVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn radius_bound(&self) -> f64 {
        self.radius_bound
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn effective_dims(&self) -> usize {
        self.effective_dims
    }
}

/// Closed ball used as a basic open-set surrogate.
#[derive(Clone, Debug, Serialize)]
pub struct BasisBall {
    center: TruncatedVector,
    radius: f64,
}

impl BasisBall {
    pub fn new(center: TruncatedVector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(LinDynError::InvalidParameter(
                "ball radius must be positive".into(),
            ));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &TruncatedVector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Exact membership test: `v ∈ ball ⟺ ‖v − center‖ ≤ radius`.
    pub fn contains(&self, v: &TruncatedVector) -> Result<bool> {
        Ok(distance(v, &self.center)? <= self.radius)
    }
}

/// First `n` balls of a basis list: ball `k` (1-based) has radius `r0/k`
/// and its center cycles through the grid points in grid order.
pub fn make_basis_balls(grid: &TargetGrid, n: usize, r0: f64) -> Result<Vec<BasisBall>> {
    if !(r0 > 0.0) {
        return Err(LinDynError::InvalidParameter(
            "r0 must be positive".into(),
        ));
    }
    if n > 0 && grid.is_empty() {
        return Err(LinDynError::InvalidParameter(
            "cannot build balls over an empty grid".into(),
        ));
    }
    let mut balls = Vec::with_capacity(n);
    for k in 1..=n {
        let center = grid.points()[(k - 1) % grid.len()].clone();
        balls.push(BasisBall::new(center, r0 / k as f64)?);
    }
    Ok(balls)
}

/// Uniform sample from the complex ball of radius `extent`, supported on the
/// first `effective_dims` coordinates. Gaussian direction, radius by the
/// inverse-CDF power rule.
fn sample_ball(
    rng: &mut ChaCha8Rng,
    dim: usize,
    effective_dims: usize,
    extent: f64,
) -> Vec<Complex64> {
    let mut coords = vec![Complex64::new(0.0, 0.0); dim];
    if effective_dims == 0 {
        return coords;
    }
    let mut gauss = Vec::with_capacity(2 * effective_dims);
    let mut norm_sq = 0.0f64;
    for _ in 0..2 * effective_dims {
        let g: f64 = rng.sample(StandardNormal);
        norm_sq += g * g;
        gauss.push(g);
    }
    let gnorm = norm_sq.sqrt();
    if gnorm == 0.0 {
        return coords;
    }
    let u: f64 = rng.gen::<f64>();
    let radius = extent * u.powf(1.0 / (2.0 * effective_dims as f64));
    for c in 0..effective_dims {
        coords[c] = Complex64::new(
            gauss[2 * c] / gnorm * radius,
            gauss[2 * c + 1] / gnorm * radius,
        );
    }
    coords
}
