//! Transition probability from the ball `p^L Z_p³` into the distant ball
//! `B' = p^(-l0) b + p^(-l0) Z_p³` under the free evolution.
//!
//! The initial state is the positive-energy projection of the normalized
//! indicator of `p^L Z_p³` times a fixed spinor, expanded in wavelets up to
//! scale `r_max`. Two evaluation modes exist: `unitary_exact` integrates
//! `|e^(-itH₀) ψ|²` over `B'` exactly, `paper_literal` evaluates the closed
//! diagonal sum with the real exponential `e^(-λt)`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::padic::{format_rational, FieldContext, PAdicScalar, PAdicVec3, Polydisc3};
use crate::spinor::{h_symbol, lambda, projector_matrix, EnergySign, FrequencyMagnitude, Matrix4, Spinor4};
use crate::state::SpinorWaveletState;
use crate::wavelet::{axis_tail_norm_sq, expand_ball_indicator, IntegrationOptions};

/// Extra scales beyond `r_max` used to certify the truncation bound.
pub const CERTIFY_EXTRA_DEPTH: i64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    UnitaryExact,
    PaperLiteral,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::UnitaryExact => "unitary_exact",
            Mode::PaperLiteral => "paper_literal",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary_exact" => Ok(Mode::UnitaryExact),
            "paper_literal" => Ok(Mode::PaperLiteral),
            other => Err(Error::config("mode", format!("unknown mode {other:?}"))),
        }
    }
}

fn default_p() -> u64 {
    3
}
fn default_m() -> f64 {
    1.0
}
fn default_l() -> i64 {
    0
}
fn default_l0() -> i64 {
    1
}
fn default_b() -> [String; 3] {
    ["1/3^1".into(), "1/3^1".into(), "1/3^1".into()]
}
fn default_a() -> [f64; 4] {
    [1.0; 4]
}
fn default_r_max() -> i64 {
    6
}
fn default_times() -> Vec<f64> {
    vec![0.0, 1e-6, 1e-3, 1.0]
}

/// Experiment parameters. Every field has a default, so `{}` is the default
/// experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalityConfig {
    #[serde(default = "default_p")]
    pub p: u64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(rename = "L", default = "default_l")]
    pub l: i64,
    #[serde(default = "default_l0")]
    pub l0: i64,
    /// Components of `b` as `"a/p^k"` or `"a/b"` strings.
    #[serde(default = "default_b")]
    pub b: [String; 3],
    #[serde(default = "default_a")]
    pub a: [f64; 4],
    #[serde(default = "default_r_max")]
    pub r_max: i64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub mode: Mode,
}

impl Default for CausalityConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

/// A configuration that passed validation, with parsed p-adic data.
#[derive(Debug, Clone)]
pub struct Validated {
    pub cfg: CausalityConfig,
    pub ctx: FieldContext,
    pub b: PAdicVec3,
    /// `v_i = -ord(b_i) ≥ 1`.
    pub v: [i64; 3],
    pub a_hat: Spinor4,
    pub a_norm: f64,
}

impl CausalityConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            field: format!("line {} column {}", e.line(), e.column()),
            reason: e.to_string(),
        })
    }

    /// Lowest scale in the indicator expansion.
    pub fn r_start(&self) -> i64 {
        1 - self.l
    }

    /// Lowest scale kept by the closed diagonal sum, `-min(L-1, l0)`.
    pub fn literal_start(&self) -> i64 {
        -(self.l - 1).min(self.l0)
    }

    pub fn validate(&self) -> Result<Validated> {
        let ctx = FieldContext::new(self.p)?;
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::config(
                "m",
                format!("mass must be finite and nonnegative, got {}", self.m),
            ));
        }
        if self.l0 < -self.l + 1 {
            return Err(Error::config(
                "l0",
                format!("need l0 >= -L + 1 = {}, got {}", 1 - self.l, self.l0),
            ));
        }
        let mut comps = Vec::with_capacity(3);
        for (i, s) in self.b.iter().enumerate() {
            let x = PAdicScalar::parse_any(ctx, s).map_err(|e| Error::config(&format!("b[{i}]"), e.to_string()))?;
            if x.is_zero() || x.frac_scalar() != x {
                return Err(Error::config(
                    &format!("b[{i}]"),
                    format!("{s} must equal its fractional part and be nonzero"),
                ));
            }
            comps.push(x);
        }
        let v = [0, 1, 2].map(|i| -comps[i].order().expect("nonzero"));
        if self.a.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::config("a", "all components must be positive and finite"));
        }
        if self.r_max < self.r_start() {
            return Err(Error::config(
                "r_max",
                format!("need r_max >= 1 - L = {}, got {}", self.r_start(), self.r_max),
            ));
        }
        if self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::config("times", "all times must be finite and nonnegative"));
        }
        let a_norm = self.a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a_hat = Spinor4::from_iterator(self.a.iter().map(|x| Complex64::from(x / a_norm)));
        let [b1, b2, b3]: [PAdicScalar; 3] = comps.try_into().expect("three components");
        Ok(Validated {
            cfg: self.clone(),
            ctx,
            b: PAdicVec3::new(b1, b2, b3),
            v,
            a_hat,
            a_norm,
        })
    }
}

impl CausalityConfig {
    /// [`CausalityConfig::validate`] plus `r_max >= -min(L-1, l0) + 1`, the
    /// range a scan needs.
    pub fn validate_for_scan(&self) -> Result<Validated> {
        let val = self.validate()?;
        let min_r_max = self.literal_start() + 1;
        if self.r_max < min_r_max {
            return Err(Error::config(
                "r_max",
                format!("need r_max >= {min_r_max}, got {}", self.r_max),
            ));
        }
        Ok(val)
    }
}

impl Validated {
    /// `p^L Z_p³`.
    pub fn initial_ball(&self) -> Polydisc3 {
        let r = -self.cfg.l;
        Polydisc3::centered(self.ctx, [r, r, r])
    }

    /// `p^(-l0) b + p^(-l0) Z_p³`.
    pub fn target_ball(&self) -> Polydisc3 {
        let center = PAdicVec3::new(
            self.b.0[0].mul_pow_p(-self.cfg.l0),
            self.b.0[1].mul_pow_p(-self.cfg.l0),
            self.b.0[2].mul_pow_p(-self.cfg.l0),
        );
        let l0 = self.cfg.l0;
        Polydisc3::from_center(&center, [l0, l0, l0]).expect("same context")
    }

    /// `p^l0 ‖b‖_p`.
    pub fn distance_formula(&self) -> BigRational {
        self.ctx.pow_rational(self.cfg.l0) * self.b.norm()
    }

    /// First scale on axis `i` whose wavelets reach `B'`.
    pub fn reach_scale(&self, i: usize) -> i64 {
        (self.cfg.l0 + self.v[i]).max(self.cfg.r_start())
    }
}

#[derive(Debug, Clone)]
pub struct InitialState {
    pub state: SpinorWaveletState,
    /// Exact norm² of the truncated indicator expansion.
    pub expansion_norm_sq: BigRational,
    /// Exact norm² of the omitted indicator tail.
    pub expansion_tail_norm_sq: BigRational,
    /// Norm² after the energy projection, before renormalization.
    pub projected_norm_sq: f64,
}

impl InitialState {
    pub fn deficit(&self) -> f64 {
        1.0 - self.projected_norm_sq
    }
}

/// `P_pos` applied term by term to the truncated expansion of
/// `p^(3L/2) Ω(p^L ‖x‖_p) a/|a|`, then renormalized to unit norm.
pub fn build_initial_state(cfg: &CausalityConfig) -> Result<InitialState> {
    let val = cfg.validate()?;
    build_initial_state_at(&val, cfg.r_max)
}

fn build_initial_state_at(val: &Validated, r_max: i64) -> Result<InitialState> {
    let expansion = expand_ball_indicator(val.ctx, val.cfg.l, 3, r_max)?;
    let raw = SpinorWaveletState::from_terms(
        val.ctx,
        expansion
            .terms_3d()
            .map(|(idx, t)| (idx.clone(), val.a_hat * Complex64::from(t.coefficient))),
    )?;
    let projected = raw.project_energy(val.cfg.m, EnergySign::Pos);
    let projected_norm_sq = projected.l2_norm_sq();
    if projected_norm_sq <= 0.0 {
        return Err(Error::VanishingProjection(projected_norm_sq.sqrt()));
    }
    Ok(InitialState {
        state: projected.scale(Complex64::from(1.0 / projected_norm_sq.sqrt())),
        expansion_norm_sq: expansion.retained_norm_sq,
        expansion_tail_norm_sq: expansion.truncation.tail_norm_sq,
        projected_norm_sq,
    })
}

/// Exact a-priori truncation data for scale `r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub r_max: i64,
    /// Omitted indicator mass per axis, `p^(-(r_max + L))`.
    #[serde(with = "rational_serde")]
    pub axis_l2_tail: BigRational,
    /// Omitted indicator mass in 3D, `1 - (1 - axis)^3`.
    #[serde(with = "rational_serde")]
    pub l2_tail: BigRational,
    /// `μ(B') T²`, where `T` bounds the omitted part of the unnormalized
    /// projected state on `B'`: each omitted wavelet is constant there and the
    /// projector and propagator are contractions.
    #[serde(with = "rational_serde")]
    pub amplitude_tail_sq: BigRational,
}

impl TailBound {
    /// Never zero for finite `r_max`.
    pub fn is_positive(&self) -> bool {
        self.axis_l2_tail > BigRational::zero()
            && self.l2_tail > BigRational::zero()
            && self.amplitude_tail_sq > BigRational::zero()
    }
}

/// `Σ_{r ≥ ρ} p^(-r) |G(r)|` restricted to `r ≤ depth` (or unrestricted),
/// where `G(ρ) = -1` and `G(r) = p - 1` beyond.
fn reach_weight(ctx: FieldContext, rho: i64, depth: Option<i64>) -> BigRational {
    let full = ctx.pow_rational(-rho) * BigRational::from_integer(2.into());
    match depth {
        None => full,
        Some(d) if d < rho => BigRational::zero(),
        Some(d) => full - ctx.pow_rational(-d),
    }
}

fn amplitude_tail(val: &Validated, depth: i64) -> BigRational {
    let ctx = val.ctx;
    let mut full = BigRational::one();
    let mut kept = BigRational::one();
    for i in 0..3 {
        let rho = val.reach_scale(i);
        full *= reach_weight(ctx, rho, None);
        kept *= reach_weight(ctx, rho, Some(depth));
    }
    let prefactor_sq = ctx.pow_rational(-3 * val.cfg.l);
    let t = full - kept;
    prefactor_sq * &t * &t
}

pub fn tail_bound(cfg: &CausalityConfig) -> Result<TailBound> {
    let val = cfg.validate()?;
    Ok(tail_bound_at(&val, cfg.r_max))
}

fn tail_bound_at(val: &Validated, r_max: i64) -> TailBound {
    let axis = axis_tail_norm_sq(val.ctx, val.cfg.l, r_max);
    let kept = BigRational::one() - &axis;
    TailBound {
        r_max,
        l2_tail: BigRational::one() - &kept * &kept * &kept,
        axis_l2_tail: axis,
        amplitude_tail_sq: val.target_ball().measure() * amplitude_tail(val, r_max),
    }
}

/// Closed-form value of the evolved state on `B'`.
///
/// Summing over `j` first, `Σ_j ψ_{r0j}` on `B'` equals
/// `Π_i p^(-r_i/2) G_i(r_i)` with `G_i = -1` at the first reaching scale and
/// `p - 1` beyond, so the state on `B'` is a single spinor and
/// `P = μ(B') |S|² / ‖P_pos φ‖²`.
#[derive(Debug, Clone)]
pub struct AggregatedEvaluator {
    ctx: FieldContext,
    mass: f64,
    l: i64,
    rho: [i64; 3],
    a_hat: Spinor4,
    mu: f64,
}

/// Prefix data of the aggregated sums, one entry per depth.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedLevel {
    pub depth: i64,
    /// `|S|` on `B'` for the unnormalized projected state.
    pub amplitude: f64,
    /// `‖P_pos φ‖²`.
    pub norm_sq: f64,
    pub probability: f64,
}

impl AggregatedEvaluator {
    pub fn new(val: &Validated) -> Self {
        AggregatedEvaluator {
            ctx: val.ctx,
            mass: val.cfg.m,
            l: val.cfg.l,
            rho: [0, 1, 2].map(|i| val.reach_scale(i)),
            a_hat: val.a_hat,
            mu: val.target_ball().measure().to_f64().unwrap_or(f64::NAN),
        }
    }

    fn g(&self, axis: usize, r: i64) -> f64 {
        let rho = self.rho[axis];
        if r < rho {
            0.0
        } else if r == rho {
            -1.0
        } else {
            self.ctx.p_f64() - 1.0
        }
    }

    /// Values for every truncation depth from `1 - L` to `max_depth`.
    pub fn levels(&self, max_depth: i64, t: f64, exec: Execution) -> Vec<AggregatedLevel> {
        let start = 1 - self.l;
        let width = (max_depth - start + 1).max(0) as usize;
        let p = self.ctx.p_f64();
        let per_shell: Vec<(Spinor4, f64)> = exec::map_range(exec, width, |s| {
            let shell = start + s as i64;
            let mut amp = Spinor4::zeros();
            let mut norm = Vec::new();
            for r1 in start..=shell {
                for r2 in start..=shell {
                    for r3 in start..=shell {
                        if r1.max(r2).max(r3) != shell {
                            continue;
                        }
                        let r = [r1, r2, r3];
                        let q = FrequencyMagnitude::from_scales(self.ctx, r);
                        let v = projector_matrix(&q, self.mass, EnergySign::Pos) * self.a_hat;
                        let sum_r = (r1 + r2 + r3) as i32;
                        let weight = p.powi(-3 * self.l as i32 - sum_r);
                        norm.push((p - 1.0).powi(3) * weight * v.norm_squared());
                        let g = self.g(0, r1) * self.g(1, r2) * self.g(2, r3);
                        if g != 0.0 {
                            let phase = Complex64::from_polar(1.0, -lambda(&q, self.mass) * t);
                            let w = self.ctx.pow_half_f64(-3 * self.l) * p.powi(-sum_r) * g;
                            amp += v * (phase * w);
                        }
                    }
                }
            }
            (amp, exec::pairwise_sum(&norm))
        });
        let mut amp = Spinor4::zeros();
        let mut norm = 0.0;
        per_shell
            .into_iter()
            .enumerate()
            .map(|(s, (a, n))| {
                amp += a;
                norm += n;
                AggregatedLevel {
                    depth: start + s as i64,
                    amplitude: amp.norm(),
                    norm_sq: norm,
                    probability: self.mu * amp.norm_squared() / norm,
                }
            })
            .collect()
    }
}

/// Interval certified to contain the untruncated probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lower: f64,
    pub upper: f64,
}

fn enclosure(val: &Validated, deep: &AggregatedLevel) -> Enclosure {
    let mu = val.target_ball().measure().to_f64().unwrap_or(f64::NAN);
    let t = amplitude_tail(val, deep.depth).to_f64().unwrap_or(f64::NAN).sqrt();
    let e = {
        let axis = axis_tail_norm_sq(val.ctx, val.cfg.l, deep.depth);
        let kept = BigRational::one() - axis;
        (BigRational::one() - &kept * &kept * &kept)
            .to_f64()
            .unwrap_or(f64::NAN)
    };
    let lo_amp = (deep.amplitude - t).max(0.0);
    Enclosure {
        lower: mu * lo_amp * lo_amp / (deep.norm_sq + e),
        upper: mu * (deep.amplitude + t).powi(2) / deep.norm_sq,
    }
}

/// Relative slack added to certified bounds for floating-point rounding.
const FLOAT_SLACK: f64 = 1e-9;

/// Exact quadratic form `(e^(-itH₀) ψ, Π_{B'} e^(-itH₀) ψ)` for each time.
pub fn unitary_probabilities(
    state: &SpinorWaveletState,
    mass: f64,
    target: &Polydisc3,
    times: &[f64],
    opts: &IntegrationOptions,
) -> Result<Vec<f64>> {
    let results = exec::map(opts.exec, times, |&t| {
        state
            .evolve_with(mass, t, Execution::Sequential)
            .localization_probability(target, &IntegrationOptions::with_exec(Execution::Sequential))
            .map(|l| l.probability)
    });
    results.into_iter().collect()
}

/// The closed diagonal sum
/// `Σ_k Σ_r Σ_j p^(-3L/2) p^(-Σr/2) e^(-λt) |A_k|²` with
/// `A = ((λ + h) / 2λ) a`, for `r_i` from `-min(L-1, l0)` to `r_max`.
pub fn paper_literal_value(cfg: &CausalityConfig, r_max: i64, t: f64) -> Result<f64> {
    let val = cfg.validate()?;
    let a = Spinor4::from_iterator(cfg.a.iter().map(|x| Complex64::from(*x)));
    let start = cfg.literal_start();
    let p = val.ctx.p_f64();
    let j_count = (p - 1.0).powi(3);
    let mut parts = Vec::new();
    for r1 in start..=r_max {
        for r2 in start..=r_max {
            for r3 in start..=r_max {
                let q = FrequencyMagnitude::from_scales(val.ctx, [r1, r2, r3]);
                let lam = lambda(&q, cfg.m);
                let amp = literal_a(&q, cfg.m) * a;
                let coeff = val.ctx.pow_half_f64(-3 * cfg.l - (r1 + r2 + r3));
                parts.push(j_count * coeff * (-lam * t).exp() * amp.norm_squared());
            }
        }
    }
    Ok(exec::pairwise_sum(&parts))
}

/// `(λ + h) / 2λ`.
pub fn literal_a(q: &FrequencyMagnitude, mass: f64) -> Matrix4 {
    let lam = lambda(q, mass);
    (Matrix4::identity() * Complex64::from(lam) + h_symbol(q, mass)) / Complex64::from(2.0 * lam)
}

/// Bound on the omitted part of the closed diagonal sum: `|A_k|` summed over
/// `k` is at most `|a|²`, and `e^(-λt) ≤ 1`.
pub fn paper_literal_tail(cfg: &CausalityConfig, r_max: i64) -> Result<f64> {
    let val = cfg.validate()?;
    let p = val.ctx.p_f64();
    let start = cfg.literal_start();
    let s = p.sqrt();
    let full = s.powi(-start as i32) / (1.0 - 1.0 / s);
    let kept = (start..=r_max).map(|r| s.powi(-r as i32)).sum::<f64>();
    let a_sq = val.a_norm * val.a_norm;
    Ok(a_sq * (p - 1.0).powi(3) * val.ctx.pow_half_f64(-3 * cfg.l) * (full.powi(3) - kept.powi(3)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub t: f64,
    pub probability: f64,
    pub tail_bound: f64,
    pub mode: Mode,
    pub positive: bool,
    pub exceeds_tail: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub enclosure: Option<Enclosure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSummary {
    pub terms: usize,
    #[serde(with = "rational_serde")]
    pub expansion_norm_sq: BigRational,
    #[serde(with = "rational_serde")]
    pub expansion_tail_norm_sq: BigRational,
    pub projected_norm_sq: f64,
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalityReport {
    pub config: CausalityConfig,
    #[serde(with = "rational_serde")]
    pub distance: BigRational,
    pub distance_matches_formula: bool,
    pub initial_ball: Polydisc3,
    pub target_ball: Polydisc3,
    pub initial: InitialSummary,
    pub a_priori_tail: TailBound,
    pub certify_depth: i64,
    pub rows: Vec<ReportRow>,
    pub all_positive: bool,
    pub crate_version: String,
}

impl CausalityReport {
    pub fn passed(&self) -> bool {
        self.all_positive && self.distance_matches_formula
    }
}

/// Runs every configured time point in the configured mode.
pub fn run_scan(cfg: &CausalityConfig) -> Result<CausalityReport> {
    run_scan_with(cfg, &IntegrationOptions::default())
}

pub fn run_scan_with(cfg: &CausalityConfig, opts: &IntegrationOptions) -> Result<CausalityReport> {
    let val = cfg.validate_for_scan()?;
    let init = build_initial_state_at(&val, cfg.r_max)?;
    let target = val.target_ball();
    let initial_ball = val.initial_ball();
    let distance = initial_ball.distance(&target);
    let depth = cfg.r_max + CERTIFY_EXTRA_DEPTH;
    let rows = match cfg.mode {
        Mode::UnitaryExact => {
            let probs = unitary_probabilities(&init.state, cfg.m, &target, &cfg.times, opts)?;
            let eval = AggregatedEvaluator::new(&val);
            let certified = exec::map(opts.exec, &cfg.times, |&t| {
                let levels = eval.levels(depth, t, Execution::Sequential);
                let deep = levels.last().expect("depth above start").clone();
                let deeper: Vec<f64> = levels
                    .iter()
                    .filter(|l| l.depth > cfg.r_max)
                    .map(|l| l.probability)
                    .collect();
                (deeper, enclosure(&val, &deep))
            });
            probs
                .into_iter()
                .zip(certified)
                .zip(&cfg.times)
                .map(|((prob, (deeper, enc)), &t)| {
                    let spread = deeper
                        .iter()
                        .chain([enc.lower, enc.upper].iter())
                        .map(|x| (prob - x).abs())
                        .fold(0.0, f64::max);
                    let bound = spread + FLOAT_SLACK * enc.upper.max(prob);
                    ReportRow {
                        t,
                        probability: prob,
                        tail_bound: bound,
                        mode: Mode::UnitaryExact,
                        positive: prob > 0.0,
                        exceeds_tail: prob > bound,
                        enclosure: Some(enc),
                    }
                })
                .collect()
        }
        Mode::PaperLiteral => {
            let tail = paper_literal_tail(cfg, cfg.r_max)?;
            cfg.times
                .iter()
                .map(|&t| {
                    let prob = paper_literal_value(cfg, cfg.r_max, t)?;
                    Ok(ReportRow {
                        t,
                        probability: prob,
                        tail_bound: tail,
                        mode: Mode::PaperLiteral,
                        positive: prob > 0.0,
                        exceeds_tail: prob > tail,
                        enclosure: None,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let all_positive = rows.iter().all(|r| r.positive);
    Ok(CausalityReport {
        config: cfg.clone(),
        distance_matches_formula: distance == val.distance_formula(),
        distance,
        initial_ball,
        target_ball: target,
        initial: InitialSummary {
            terms: init.state.len(),
            expansion_norm_sq: init.expansion_norm_sq.clone(),
            expansion_tail_norm_sq: init.expansion_tail_norm_sq.clone(),
            projected_norm_sq: init.projected_norm_sq,
            deficit: init.deficit(),
        },
        a_priori_tail: tail_bound_at(&val, cfg.r_max),
        certify_depth: depth,
        rows,
        all_positive,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Diagonal part of the unitary quadratic form at `t = 0`, computed twice:
/// by integrating each term separately over `B'`, and in closed form as
/// `Σ_k μ(B') p^(-Σr) |amplitude_k|²` over the wavelets reaching `B'`.
pub fn diagonal_check(cfg: &CausalityConfig, opts: &IntegrationOptions) -> Result<(f64, f64)> {
    let val = cfg.validate()?;
    let init = build_initial_state_at(&val, cfg.r_max)?;
    let target = val.target_ball();
    let mu = target.measure().to_f64().unwrap_or(f64::NAN);
    let mut integrated = Vec::new();
    let mut closed = Vec::new();
    for (idx, amp) in init.state.terms() {
        let single = SpinorWaveletState::single(idx.clone(), *amp);
        integrated.push(single.localization_probability(&target, opts)?.probability);
        let r = idx.r();
        if (0..3).all(|i| r[i] >= val.reach_scale(i)) {
            closed.push(mu * val.ctx.pow_f64(-(r[0] + r[1] + r[2])) * amp.norm_squared());
        }
    }
    Ok((exec::pairwise_sum(&integrated), exec::pairwise_sum(&closed)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: &str = "t,probability,tail_bound,mode,distance,p,m,L,l0,r_max";

/// Float formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn emit_report(rep: &CausalityReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => {
            let mut out = String::new();
            out.push_str(CSV_HEADER);
            out.push('\n');
            let c = &rep.config;
            for row in &rep.rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    fmt_f64(row.t),
                    fmt_f64(row.probability),
                    fmt_f64(row.tail_bound),
                    row.mode.as_str(),
                    format_rational(&rep.distance),
                    c.p,
                    fmt_f64(c.m),
                    c.l,
                    c.l0,
                    c.r_max
                )
                .expect("writing to a String");
            }
            out.into_bytes()
        }
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(rep).expect("report serializes");
            text.push('\n');
            text.into_bytes()
        }
    }
}

/// Serde adapter writing exact rationals as `"a/b"`.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        BigRational::from_str(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn default_config_validates() {
        let cfg = CausalityConfig::default();
        let val = cfg.validate().unwrap();
        assert_eq!(val.v, [1, 1, 1]);
        assert_eq!(val.distance_formula(), q(9, 1));
        assert_eq!(val.initial_ball().distance(&val.target_ball()), q(9, 1));
        assert_eq!(val.target_ball().measure(), q(27, 1));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = |text: &str| CausalityConfig::from_json(text).and_then(|c| c.validate().map(|_| ()));
        assert!(bad(r#"{"p": 4}"#).is_err());
        assert!(bad(r#"{"l0": -1}"#).is_err());
        assert!(bad(r#"{"b": ["1/3^1", "0/3^0", "1/3^1"]}"#).is_err());
        assert!(bad(r#"{"b": ["4/3^1", "1/3^1", "1/3^1"]}"#).is_err());
        assert!(bad(r#"{"a": [1, 0, 1, 1]}"#).is_err());
        assert!(bad(r#"{"r_max": 0}"#).is_err());
        let short = CausalityConfig {
            r_max: 1,
            ..Default::default()
        };
        assert!(short.validate().is_ok());
        assert!(short.validate_for_scan().is_err());
        assert!(bad(r#"{"times": [-1]}"#).is_err());
        assert!(bad(r#"{"bogus": 1}"#).is_err());
        assert!(bad(r#"{"b": ["1/3", "2/9", "1/3^1"]}"#).is_ok());
    }

    #[test]
    fn pre_projection_coefficients() {
        let cfg = CausalityConfig {
            r_max: 1,
            ..Default::default()
        };
        let val = cfg.validate().unwrap();
        let e = expand_ball_indicator(val.ctx, 0, 3, 1).unwrap();
        assert_eq!(e.terms.len(), 8);
        for (idx, t) in e.terms_3d() {
            assert_eq!(idx.r(), [1, 1, 1]);
            assert!((t.coefficient - 3f64.powf(-1.5)).abs() < 1e-15);
        }
        let init = build_initial_state(&CausalityConfig {
            r_max: 4,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(init.expansion_norm_sq, q(80, 81) * q(80, 81) * q(80, 81));
    }

    #[test]
    fn initial_state_is_positive_energy_and_normalized() {
        let init = build_initial_state(&CausalityConfig {
            r_max: 3,
            ..Default::default()
        })
        .unwrap();
        let s = &init.state;
        assert!((s.l2_norm() - 1.0).abs() < 1e-12);
        let back = s.project_energy(1.0, EnergySign::Pos);
        assert!(back.try_add(&s.scale(Complex64::from(-1.0))).unwrap().l2_norm() < 1e-12);
        assert!(init.deficit() > 0.0 && init.deficit() < 1.0);
    }

    #[test]
    fn tail_bound_is_monotone_and_positive() {
        let mut prev: Option<TailBound> = None;
        for r_max in 2..12 {
            let b = tail_bound(&CausalityConfig {
                r_max,
                ..Default::default()
            })
            .unwrap();
            assert!(b.is_positive());
            if let Some(p) = prev {
                assert!(b.axis_l2_tail <= p.axis_l2_tail);
                assert!(b.l2_tail <= p.l2_tail);
                assert!(b.amplitude_tail_sq <= p.amplitude_tail_sq);
            }
            if r_max == 5 {
                assert_eq!(b.axis_l2_tail, q(1, 243));
            }
            prev = Some(b);
        }
    }

    #[test]
    fn aggregated_evaluator_matches_integrator() {
        let cfg = CausalityConfig {
            r_max: 4,
            ..Default::default()
        };
        let val = cfg.validate().unwrap();
        let init = build_initial_state(&cfg).unwrap();
        let eval = AggregatedEvaluator::new(&val);
        for t in [0.0, 0.3] {
            let levels = eval.levels(4, t, Execution::Sequential);
            let last = levels.last().unwrap();
            assert_eq!(last.depth, 4);
            assert!((last.norm_sq - init.projected_norm_sq).abs() < 1e-13);
            let direct = unitary_probabilities(
                &init.state,
                1.0,
                &val.target_ball(),
                &[t],
                &IntegrationOptions::default(),
            )
            .unwrap()[0];
            assert!((last.probability - direct).abs() <= 1e-9 * direct);
        }
    }

    #[test]
    fn csv_header_and_rational_format() {
        let rep = run_scan(&CausalityConfig {
            r_max: 3,
            times: vec![0.0],
            ..Default::default()
        })
        .unwrap();
        let text = String::from_utf8(emit_report(&rep, ReportFormat::Csv)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.contains(",unitary_exact,9/1,3,"));
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("paper_literal".parse::<Mode>().unwrap(), Mode::PaperLiteral);
        assert!("other".parse::<Mode>().is_err());
    }
}
