//! Declarative experiment specs: JSON parsing, validation with distinct
//! error messages, default filling, and canonical serialization for the
//! spec digest.
//!
//! A document is a single experiment object or an array of them. Unknown
//! fields are rejected everywhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use lindyn_core::operators::{derive_seed, OperatorFamily, OperatorSpec};
use lindyn_core::reg_groups::RegularizedGroup;
use lindyn_core::space::{SpaceConfig, TargetGrid, TruncatedVector};

pub const DEFAULT_DIM: usize = 16;
pub const DEFAULT_SEED: u64 = 0;

pub const EXPERIMENTS: &[&str] = &[
    "density",
    "hc_grid",
    "transitivity",
    "criterion",
    "closure",
    "group_axioms",
    "annulus",
    "quasi_similarity",
    "direct_sum",
];

pub const FAMILIES: &[&str] = &["poly_trunc", "rank_one", "power", "scalar", "diag_exp_group"];

// ── raw (wire) structures ────────────────────────────────────────────────

/// Complex scalar on the wire: a bare number, `[re, im]`, or `{re, im}`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum CNum {
    Real(f64),
    Pair([f64; 2]),
    Parts { re: f64, im: f64 },
}

impl From<CNum> for Complex64 {
    fn from(v: CNum) -> Self {
        match v {
            CNum::Real(re) => Complex64::new(re, 0.0),
            CNum::Pair([re, im]) => Complex64::new(re, im),
            CNum::Parts { re, im } => Complex64::new(re, im),
        }
    }
}

fn cvec(values: &[CNum]) -> Vec<Complex64> {
    values.iter().map(|&v| v.into()).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    experiment: String,
    family: RawFamily,
    #[serde(default)]
    space: Option<RawSpace>,
    #[serde(default)]
    params: Option<RawParams>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    dim: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    name: String,
    #[serde(default)]
    parameters: Option<RawFamilyParams>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamilyParams {
    // poly_trunc
    degree: Option<usize>,
    extent: Option<f64>,
    spacing: Option<f64>,
    // rank_one
    functional: Option<Vec<CNum>>,
    anchor: Option<Vec<CNum>>,
    radius: Option<f64>,
    // power
    base: Option<RawOperator>,
    // diag_exp_group
    lambda: Option<Vec<CNum>>,
    c: Option<Vec<CNum>>,
    disk_radius: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawOperator {
    BackwardShift { weight: CNumOut, power: usize },
    ForwardShift { weight: CNumOut, power: usize },
    Diagonal { entries: Vec<CNumOut> },
    ScaledIdentity { alpha: CNumOut },
}

/// Complex scalar with symmetric wire form `[re, im]` for canonical output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CNumOut(pub Complex64);

impl Serialize for CNumOut {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for CNumOut {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(CNumOut(Complex64::from(CNum::deserialize(d)?)))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    kind: Option<String>,
    extent: Option<f64>,
    spacing: Option<f64>,
    count: Option<usize>,
    effective_dims: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    // density / direct_sum
    epsilon: Option<f64>,
    targets: Option<RawGrid>,
    orbit_count: Option<usize>,
    use_witnesses: Option<bool>,
    base: Option<Vec<CNum>>,
    // hc_grid
    n_balls: Option<usize>,
    r0: Option<f64>,
    ball_grid: Option<RawGrid>,
    candidates: Option<RawGrid>,
    op_count: Option<usize>,
    // transitivity
    delta: Option<f64>,
    pair_count: Option<usize>,
    pair_extent: Option<f64>,
    pair_effective_dims: Option<usize>,
    // criterion
    k_max: Option<usize>,
    tol: Option<f64>,
    x0_count: Option<usize>,
    x0_extent: Option<f64>,
    x0_effective_dims: Option<usize>,
    y0_count: Option<usize>,
    y0_effective_dims: Option<usize>,
    // group_axioms
    shadow_count: Option<usize>,
    shadow_radius: Option<f64>,
    shadow_step: Option<f64>,
    shadow_tol: Option<f64>,
    // annulus
    target_count: Option<usize>,
    r: Option<f64>,
    min_abs: Option<f64>,
    max_abs: Option<f64>,
    // quasi_similarity
    phi: Option<RawPhi>,
    probe_count: Option<usize>,
    // direct_sum
    second_family: Option<Box<RawFamily>>,
    second_dim: Option<usize>,
    grid1: Option<RawGrid>,
    grid2: Option<RawGrid>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawPhi {
    Identity,
    Diagonal { entries: Vec<CNumOut> },
    RandomWellConditioned { spread: f64 },
}

// ── resolved structures ──────────────────────────────────────────────────

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Density,
    HcGrid,
    Transitivity,
    Criterion,
    Closure,
    GroupAxioms,
    Annulus,
    QuasiSimilarity,
    DirectSum,
}

impl Experiment {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "density" => Experiment::Density,
            "hc_grid" => Experiment::HcGrid,
            "transitivity" => Experiment::Transitivity,
            "criterion" => Experiment::Criterion,
            "closure" => Experiment::Closure,
            "group_axioms" => Experiment::GroupAxioms,
            "annulus" => Experiment::Annulus,
            "quasi_similarity" => Experiment::QuasiSimilarity,
            "direct_sum" => Experiment::DirectSum,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Density => "density",
            Experiment::HcGrid => "hc_grid",
            Experiment::Transitivity => "transitivity",
            Experiment::Criterion => "criterion",
            Experiment::Closure => "closure",
            Experiment::GroupAxioms => "group_axioms",
            Experiment::Annulus => "annulus",
            Experiment::QuasiSimilarity => "quasi_similarity",
            Experiment::DirectSum => "direct_sum",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySpec {
    pub name: String,
    pub parameters: FamilyParamsSpec,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyParamsSpec {
    PolyTrunc {
        degree: usize,
        extent: f64,
        spacing: f64,
    },
    RankOne {
        functional: Vec<CNumOut>,
        anchor: Vec<CNumOut>,
        radius: f64,
    },
    Power {
        base: RawOperator,
    },
    Scalar {
        radius: f64,
    },
    DiagExpGroup {
        lambda: Vec<CNumOut>,
        c: Vec<CNumOut>,
        disk_radius: f64,
    },
}

impl FamilySpec {
    /// Instantiate the operator family on a `dim`-dimensional space.
    pub fn build(&self, dim: usize) -> lindyn_core::Result<OperatorFamily> {
        match &self.parameters {
            FamilyParamsSpec::PolyTrunc {
                degree,
                extent,
                spacing,
            } => OperatorFamily::poly_trunc(dim, *degree, *extent, *spacing),
            FamilyParamsSpec::RankOne {
                functional,
                anchor,
                radius,
            } => OperatorFamily::rank_one(
                TruncatedVector::new(functional.iter().map(|c| c.0).collect())?,
                TruncatedVector::new(anchor.iter().map(|c| c.0).collect())?,
                *radius,
            ),
            FamilyParamsSpec::Power { base } => OperatorFamily::power(dim, base.build()),
            FamilyParamsSpec::Scalar { radius } => OperatorFamily::scalar(dim, *radius),
            FamilyParamsSpec::DiagExpGroup {
                lambda,
                c,
                disk_radius,
            } => OperatorFamily::diag_exp_group(
                RegularizedGroup::new(
                    lambda.iter().map(|v| v.0).collect(),
                    c.iter().map(|v| v.0).collect(),
                    "diag_exp_group",
                )?,
                *disk_radius,
            ),
        }
    }

    /// The regularized group behind a `diag_exp_group` family spec.
    pub fn build_group(&self) -> Option<lindyn_core::Result<RegularizedGroup>> {
        match &self.parameters {
            FamilyParamsSpec::DiagExpGroup { lambda, c, .. } => Some(RegularizedGroup::new(
                lambda.iter().map(|v| v.0).collect(),
                c.iter().map(|v| v.0).collect(),
                "diag_exp_group",
            )),
            _ => None,
        }
    }
}

impl RawOperator {
    pub fn build(&self) -> OperatorSpec {
        match self {
            RawOperator::BackwardShift { weight, power } => OperatorSpec::BackwardShiftPower {
                weight: weight.0,
                power: *power,
            },
            RawOperator::ForwardShift { weight, power } => OperatorSpec::ForwardShiftPower {
                weight: weight.0,
                power: *power,
            },
            RawOperator::Diagonal { entries } => {
                OperatorSpec::Diagonal(entries.iter().map(|c| c.0).collect())
            }
            RawOperator::ScaledIdentity { alpha } => OperatorSpec::ScaledIdentity(alpha.0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Lattice {
        extent: f64,
        spacing: f64,
        effective_dims: usize,
    },
    SeededRandom {
        extent: f64,
        count: usize,
        effective_dims: usize,
        seed: u64,
    },
}

impl GridSpec {
    pub fn build(&self, config: &SpaceConfig) -> lindyn_core::Result<TargetGrid> {
        match self {
            GridSpec::Lattice {
                extent,
                spacing,
                effective_dims,
            } => TargetGrid::lattice(config, *extent, *spacing, *effective_dims),
            GridSpec::SeededRandom {
                extent,
                count,
                effective_dims,
                seed,
            } => TargetGrid::seeded_random(config, *extent, *count, *effective_dims, *seed),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentParams {
    Density {
        epsilon: f64,
        targets: GridSpec,
        orbit_count: usize,
        use_witnesses: bool,
        base: Option<Vec<CNumOut>>,
    },
    HcGrid {
        n_balls: usize,
        r0: f64,
        ball_grid: GridSpec,
        candidates: GridSpec,
        op_count: usize,
        use_witnesses: bool,
    },
    Transitivity {
        delta: f64,
        pair_count: usize,
        op_count: usize,
        pair_extent: f64,
        pair_effective_dims: usize,
    },
    Criterion {
        k_max: usize,
        tol: f64,
        x0_count: usize,
        x0_extent: f64,
        x0_effective_dims: usize,
        y0_count: usize,
        y0_effective_dims: usize,
    },
    Closure {
        op_count: usize,
        tol: f64,
    },
    GroupAxioms {
        pair_count: usize,
        tol: f64,
        shadow_count: usize,
        shadow_radius: f64,
        shadow_step: f64,
        shadow_tol: f64,
    },
    Annulus {
        target_count: usize,
        r: f64,
        min_abs: f64,
        max_abs: f64,
        tol: f64,
    },
    QuasiSimilarity {
        op_count: usize,
        tol: f64,
        probe_count: usize,
        phi: RawPhi,
    },
    DirectSum {
        second_family: Box<FamilySpec>,
        second_dim: usize,
        epsilon: f64,
        orbit_count: usize,
        use_witnesses: bool,
        grid1: GridSpec,
        grid2: GridSpec,
    },
}

/// A fully validated experiment with every default filled. Serialization of
/// this structure is the canonical form hashed into the spec digest.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub family: FamilySpec,
    pub dim: usize,
    pub seed: u64,
    pub params: ExperimentParams,
}

// ── validation ───────────────────────────────────────────────────────────

struct Validator {
    errors: Vec<String>,
}

impl Validator {
    fn new() -> Self {
        Self { errors: Vec::new() }
    }

    fn positive(&mut self, value: f64, what: &str) -> f64 {
        if !(value > 0.0) || !value.is_finite() {
            self.errors.push(format!("{what} must be positive"));
        }
        value
    }

    fn at_least_one(&mut self, value: usize, what: &str) -> usize {
        if value == 0 {
            self.errors.push(format!("{what} must be at least 1"));
        }
        value
    }
}

#[allow(clippy::too_many_arguments)] // a resolver: one slot per default
fn resolve_grid(
    raw: Option<RawGrid>,
    v: &mut Validator,
    what: &str,
    dim: usize,
    default_kind: &str,
    default_extent: f64,
    default_count: usize,
    default_eff: usize,
    default_seed: u64,
) -> GridSpec {
    let raw = raw.unwrap_or_default();
    let kind = raw.kind.unwrap_or_else(|| default_kind.to_string());
    let extent = v.positive(raw.extent.unwrap_or(default_extent), &format!("{what} extent"));
    let eff = raw.effective_dims.unwrap_or(default_eff.min(dim));
    if eff > dim {
        v.errors
            .push(format!("{what} effective_dims {eff} exceeds dimension {dim}"));
    }
    match kind.as_str() {
        "lattice" => {
            let spacing = v.positive(raw.spacing.unwrap_or(1.0), &format!("{what} spacing"));
            GridSpec::Lattice {
                extent,
                spacing,
                effective_dims: eff,
            }
        }
        "seeded_random" => {
            let count = v.at_least_one(raw.count.unwrap_or(default_count), &format!("{what} count"));
            GridSpec::SeededRandom {
                extent,
                count,
                effective_dims: eff,
                seed: raw.seed.unwrap_or(default_seed),
            }
        }
        other => {
            v.errors
                .push(format!("unknown grid kind \"{other}\" for {what}"));
            GridSpec::Lattice {
                extent,
                spacing: 1.0,
                effective_dims: eff,
            }
        }
    }
}

fn resolve_family(raw: &RawFamily, dim: usize, v: &mut Validator) -> FamilySpec {
    let p = raw.parameters.as_ref();
    let name = raw.name.clone();
    let ones = |n: usize| vec![CNumOut(Complex64::new(1.0, 0.0)); n];
    let e0 = |n: usize| {
        let mut coords = vec![CNumOut(Complex64::new(0.0, 0.0)); n];
        if n > 0 {
            coords[0] = CNumOut(Complex64::new(1.0, 0.0));
        }
        coords
    };
    let parameters = match name.as_str() {
        "poly_trunc" => FamilyParamsSpec::PolyTrunc {
            degree: p.and_then(|p| p.degree).unwrap_or(dim.saturating_sub(1)),
            extent: v.positive(p.and_then(|p| p.extent).unwrap_or(1.0), "lattice extent"),
            spacing: v.positive(p.and_then(|p| p.spacing).unwrap_or(1.0), "lattice spacing"),
        },
        "rank_one" => FamilyParamsSpec::RankOne {
            functional: p
                .and_then(|p| p.functional.as_ref())
                .map(|f| cvec(f).into_iter().map(CNumOut).collect())
                .unwrap_or_else(|| e0(dim)),
            anchor: p
                .and_then(|p| p.anchor.as_ref())
                .map(|f| cvec(f).into_iter().map(CNumOut).collect())
                .unwrap_or_else(|| e0(dim)),
            radius: v.positive(p.and_then(|p| p.radius).unwrap_or(1.0), "sampling radius"),
        },
        "power" => FamilyParamsSpec::Power {
            base: p.and_then(|p| p.base.clone()).unwrap_or(RawOperator::BackwardShift {
                weight: CNumOut(Complex64::new(2.0, 0.0)),
                power: 1,
            }),
        },
        "scalar" => FamilyParamsSpec::Scalar {
            radius: v.positive(p.and_then(|p| p.radius).unwrap_or(5.0), "sampling radius"),
        },
        "diag_exp_group" => FamilyParamsSpec::DiagExpGroup {
            lambda: p
                .and_then(|p| p.lambda.as_ref())
                .map(|f| cvec(f).into_iter().map(CNumOut).collect())
                .unwrap_or_else(|| ones(dim)),
            c: p.and_then(|p| p.c.as_ref())
                .map(|f| cvec(f).into_iter().map(CNumOut).collect())
                .unwrap_or_else(|| ones(dim)),
            disk_radius: v.positive(
                p.and_then(|p| p.disk_radius).unwrap_or(5.0),
                "z sampler disk radius",
            ),
        },
        other => {
            v.errors.push(format!("unknown family \"{other}\""));
            FamilyParamsSpec::Scalar { radius: 1.0 }
        }
    };
    FamilySpec { name, parameters }
}

fn resolve_one(raw: RawSpec) -> Result<ExperimentSpec, Vec<String>> {
    let mut v = Validator::new();
    let experiment = match Experiment::parse(&raw.experiment) {
        Some(e) => e,
        None => {
            return Err(vec![format!("unknown experiment \"{}\"", raw.experiment)]);
        }
    };
    let dim = raw.space.map(|s| s.dim).unwrap_or(DEFAULT_DIM);
    if dim == 0 {
        v.errors.push("dim must be at least 1".into());
    }
    let seed = raw.seed.unwrap_or(DEFAULT_SEED);
    let family = resolve_family(&raw.family, dim, &mut v);
    let p = raw.params.unwrap_or_default();

    let params = match experiment {
        Experiment::Density => ExperimentParams::Density {
            epsilon: v.positive(p.epsilon.unwrap_or(1e-6), "epsilon"),
            targets: resolve_grid(
                p.targets,
                &mut v,
                "targets",
                dim,
                "lattice",
                1.0,
                100,
                2,
                derive_seed(seed, 1),
            ),
            orbit_count: p.orbit_count.unwrap_or(64),
            use_witnesses: p.use_witnesses.unwrap_or(false),
            base: p
                .base
                .map(|b| cvec(&b).into_iter().map(CNumOut).collect()),
        },
        Experiment::HcGrid => {
            let n_balls = p.n_balls.unwrap_or(8);
            ExperimentParams::HcGrid {
                n_balls,
                r0: v.positive(p.r0.unwrap_or(1.0), "r0"),
                ball_grid: resolve_grid(
                    p.ball_grid,
                    &mut v,
                    "ball grid",
                    dim,
                    "seeded_random",
                    2.0,
                    n_balls.max(1),
                    dim,
                    derive_seed(seed, 1),
                ),
                candidates: resolve_grid(
                    p.candidates,
                    &mut v,
                    "candidates",
                    dim,
                    "seeded_random",
                    1.0,
                    100,
                    dim,
                    derive_seed(seed, 2),
                ),
                op_count: p.op_count.unwrap_or(64),
                use_witnesses: p.use_witnesses.unwrap_or(false),
            }
        }
        Experiment::Transitivity => ExperimentParams::Transitivity {
            delta: v.positive(p.delta.unwrap_or(1e-3), "delta"),
            pair_count: v.at_least_one(p.pair_count.unwrap_or(20), "pair_count"),
            op_count: p.op_count.unwrap_or(32),
            pair_extent: v.positive(p.pair_extent.unwrap_or(1.0), "pair extent"),
            pair_effective_dims: {
                let eff = p.pair_effective_dims.unwrap_or(8.min(dim));
                if eff > dim {
                    v.errors
                        .push(format!("pair effective_dims {eff} exceeds dimension {dim}"));
                }
                eff
            },
        },
        Experiment::Criterion => {
            let k_max = v.at_least_one(p.k_max.unwrap_or(24), "k_max");
            ExperimentParams::Criterion {
                k_max,
                tol: v.positive(p.tol.unwrap_or(1e-6), "tol"),
                x0_count: v.at_least_one(p.x0_count.unwrap_or(32), "x0_count"),
                x0_extent: v.positive(p.x0_extent.unwrap_or(1.0), "x0 extent"),
                x0_effective_dims: p.x0_effective_dims.unwrap_or(8.min(dim)),
                y0_count: v.at_least_one(p.y0_count.unwrap_or(32), "y0_count"),
                y0_effective_dims: p
                    .y0_effective_dims
                    .unwrap_or_else(|| dim.saturating_sub(k_max)),
            }
        }
        Experiment::Closure => ExperimentParams::Closure {
            op_count: v.at_least_one(p.op_count.unwrap_or(8), "op_count"),
            tol: v.positive(p.tol.unwrap_or(1e-9), "tol"),
        },
        Experiment::GroupAxioms => ExperimentParams::GroupAxioms {
            pair_count: v.at_least_one(p.pair_count.unwrap_or(100), "pair_count"),
            tol: v.positive(p.tol.unwrap_or(1e-9), "tol"),
            shadow_count: v.at_least_one(p.shadow_count.unwrap_or(20), "shadow_count"),
            shadow_radius: v.positive(p.shadow_radius.unwrap_or(2.0), "shadow radius"),
            shadow_step: v.positive(p.shadow_step.unwrap_or(1e-4), "shadow step"),
            shadow_tol: v.positive(p.shadow_tol.unwrap_or(1e-6), "shadow tol"),
        },
        Experiment::Annulus => {
            let min_abs = v.positive(p.min_abs.unwrap_or(1e-3), "min_abs");
            let max_abs = v.positive(p.max_abs.unwrap_or(10.0), "max_abs");
            if min_abs >= max_abs {
                v.errors.push("min_abs must be below max_abs".into());
            }
            ExperimentParams::Annulus {
                target_count: v.at_least_one(p.target_count.unwrap_or(500), "target_count"),
                r: {
                    let r = p.r.unwrap_or(100.0);
                    if !(r >= 0.0) {
                        v.errors.push("r must be nonnegative".into());
                    }
                    r
                },
                min_abs,
                max_abs,
                tol: v.positive(p.tol.unwrap_or(1e-9), "tol"),
            }
        }
        Experiment::QuasiSimilarity => ExperimentParams::QuasiSimilarity {
            op_count: v.at_least_one(p.op_count.unwrap_or(16), "op_count"),
            tol: v.positive(p.tol.unwrap_or(1e-8), "tol"),
            probe_count: v.at_least_one(p.probe_count.unwrap_or(8), "probe_count"),
            phi: p.phi.unwrap_or(RawPhi::RandomWellConditioned { spread: 0.1 }),
        },
        Experiment::DirectSum => {
            let second_dim = v.at_least_one(p.second_dim.unwrap_or(2), "second_dim");
            let second_raw = p.second_family.unwrap_or_else(|| {
                Box::new(RawFamily {
                    name: "rank_one".into(),
                    parameters: None,
                })
            });
            ExperimentParams::DirectSum {
                second_family: Box::new(resolve_family(&second_raw, second_dim, &mut v)),
                second_dim,
                epsilon: v.positive(p.epsilon.unwrap_or(1e-6), "epsilon"),
                orbit_count: p.orbit_count.unwrap_or(32),
                use_witnesses: p.use_witnesses.unwrap_or(true),
                grid1: resolve_grid(
                    p.grid1,
                    &mut v,
                    "grid1",
                    dim,
                    "lattice",
                    1.0,
                    16,
                    1,
                    derive_seed(seed, 1),
                ),
                grid2: resolve_grid(
                    p.grid2,
                    &mut v,
                    "grid2",
                    second_dim,
                    "lattice",
                    1.0,
                    16,
                    1,
                    derive_seed(seed, 2),
                ),
            }
        }
    };

    if v.errors.is_empty() {
        Ok(ExperimentSpec {
            experiment,
            family,
            dim,
            seed,
            params,
        })
    } else {
        Err(v.errors)
    }
}

/// Parse and validate a spec document: one experiment object or an array.
/// Returns every validation problem found, each a distinct message.
pub fn validate_spec(text: &str) -> Result<Vec<ExperimentSpec>, Vec<String>> {
    let value: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return Err(vec![format!("invalid JSON: {e}")]),
    };
    let raw_list: Vec<RawSpec> = if value.is_array() {
        match serde_json::from_value(value) {
            Ok(v) => v,
            Err(e) => return Err(vec![format!("invalid spec document: {e}")]),
        }
    } else {
        match serde_json::from_value(value) {
            Ok(v) => vec![v],
            Err(e) => return Err(vec![format!("invalid spec document: {e}")]),
        }
    };
    if raw_list.is_empty() {
        return Err(vec!["spec document contains no experiments".into()]);
    }
    let multi = raw_list.len() > 1;
    let mut specs = Vec::with_capacity(raw_list.len());
    let mut errors = Vec::new();
    for (i, raw) in raw_list.into_iter().enumerate() {
        match resolve_one(raw) {
            Ok(spec) => specs.push(spec),
            Err(errs) => {
                for e in errs {
                    errors.push(if multi {
                        format!("experiment {i}: {e}")
                    } else {
                        e
                    });
                }
            }
        }
    }
    if errors.is_empty() {
        Ok(specs)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_density_spec_gets_defaults() {
        let specs =
            validate_spec(r#"{"experiment":"density","family":{"name":"poly_trunc"}}"#).unwrap();
        assert_eq!(specs.len(), 1);
        let spec = &specs[0];
        assert_eq!(spec.dim, 16);
        assert_eq!(spec.seed, 0);
        match &spec.params {
            ExperimentParams::Density { epsilon, .. } => assert_eq!(*epsilon, 1e-6),
            other => panic!("unexpected params {other:?}"),
        }
    }

    #[test]
    fn unknown_experiment_rejected() {
        let err = validate_spec(r#"{"experiment":"frobnicate","family":{"name":"poly_trunc"}}"#)
            .unwrap_err();
        assert!(err[0].contains("unknown experiment"));
    }

    #[test]
    fn unknown_family_rejected() {
        let err = validate_spec(r#"{"experiment":"density","family":{"name":"mystery"}}"#)
            .unwrap_err();
        assert!(err.iter().any(|e| e.contains("unknown family")));
    }

    #[test]
    fn negative_epsilon_rejected() {
        let err = validate_spec(
            r#"{"experiment":"density","family":{"name":"poly_trunc"},"params":{"epsilon":-1}}"#,
        )
        .unwrap_err();
        assert!(err.iter().any(|e| e.contains("epsilon must be positive")));
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = validate_spec(
            r#"{"experiment":"density","family":{"name":"poly_trunc"},"bogus":1}"#,
        )
        .unwrap_err();
        assert!(err[0].contains("unknown field"));
    }

    #[test]
    fn malformed_json_rejected() {
        let err = validate_spec("{not json").unwrap_err();
        assert!(err[0].contains("invalid JSON"));
    }

    #[test]
    fn array_of_specs_accepted() {
        let text = r#"[
            {"experiment":"closure","family":{"name":"scalar"},"space":{"dim":1}},
            {"experiment":"annulus","family":{"name":"diag_exp_group"},"space":{"dim":1}}
        ]"#;
        let specs = validate_spec(text).unwrap();
        assert_eq!(specs.len(), 2);
    }

    #[test]
    fn complex_wire_forms_accepted() {
        let text = r#"{"experiment":"density","family":{"name":"rank_one",
            "parameters":{"functional":[1,[0,1]],"anchor":[{"re":1,"im":0},0],"radius":2.0}},
            "space":{"dim":2}}"#;
        let specs = validate_spec(text).unwrap();
        match &specs[0].family.parameters {
            FamilyParamsSpec::RankOne { functional, .. } => {
                assert_eq!(functional[0].0, Complex64::new(1.0, 0.0));
                assert_eq!(functional[1].0, Complex64::new(0.0, 1.0));
            }
            other => panic!("unexpected family {other:?}"),
        }
    }
}
