//! Stakeholder utilities: autonomy (piecewise), wellbeing (most probable value
//! of a shifted Gamma density) and the harm figure used for risk gating.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::model::{Behaviour, BehaviourKind, DecisionContext};

/// Location of the wellbeing density; utilities live on [-1, 1].
pub const LOCATION: f64 = -1.0;
pub const GRID_RESOLUTION: f64 = 0.05;
/// Autonomy utility of physically restraining the resident. The simulation
/// never generates such a behaviour.
pub const RESTRAINT_UTILITY: f64 = -1.0;
/// Multiplier applied to the harm-region density in the default risk mode.
pub const DEFAULT_HARM_SCALE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UtilityError {
    #[error("epsilon_m must be 1, 2 or 3 (got {0})")]
    Epsilon(u8),
    #[error("gamma parameters must be positive (alpha={alpha}, beta={beta})")]
    Params { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSpec {
    pub alpha: f64,
    pub beta: f64,
    pub v: f64,
    pub grid_resolution: f64,
}

impl GammaSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, UtilityError> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(UtilityError::Params { alpha, beta });
        }
        Ok(GammaSpec {
            alpha,
            beta,
            v: LOCATION,
            grid_resolution: GRID_RESOLUTION,
        })
    }

    /// Spec for a medicine impact and a (possibly fractional) missed-dose count.
    pub fn for_dose(epsilon_m: u8, dose_count: f64) -> Result<Self, UtilityError> {
        GammaSpec::new(shape_param(epsilon_m)?, scale_param(dose_count))
    }
}

pub fn shape_param(epsilon_m: u8) -> Result<f64, UtilityError> {
    if !(1..=3).contains(&epsilon_m) {
        return Err(UtilityError::Epsilon(epsilon_m));
    }
    let e = epsilon_m as f64;
    Ok(1.325 * e * e - 9.475 * e + 18.15)
}

pub fn scale_param(dose_count: f64) -> f64 {
    (-2.65 - dose_count / 2.0).exp() + 0.01
}

pub fn gamma_pdf(x: f64, spec: &GammaSpec) -> f64 {
    let z = (x - spec.v) / spec.beta;
    if z <= 0.0 {
        return 0.0;
    }
    ((spec.alpha - 1.0) * z.ln() - z - spec.beta.ln() - ln_gamma(spec.alpha)).exp()
}

/// The 41 utility grid points -1.0, -0.95, ..., 1.0.
pub fn grid() -> impl Iterator<Item = f64> {
    (-20..=20).map(|i| i as f64 / 20.0)
}

/// Grid point of highest density; ties go to the larger x.
pub fn pmax_util(spec: &GammaSpec) -> f64 {
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for x in grid() {
        let g = gamma_pdf(x, spec);
        if g >= best.1 {
            best = (x, g);
        }
    }
    best.0
}

pub fn autonomy_utility(b: &Behaviour, ctx: &DecisionContext) -> f64 {
    if b.obeys.is_some() {
        return 1.0;
    }
    match b.kind {
        BehaviourKind::Record => 0.5,
        BehaviourKind::FollowUp => -0.1 * ctx.f as f64,
        BehaviourKind::Report => -0.7,
        BehaviourKind::Remind | BehaviourKind::Snooze | BehaviourKind::AcknowledgeWait => 0.0,
    }
}

/// Missed-dose equivalent used for a behaviour's wellbeing density.
pub fn dose_count(kind: BehaviourKind, ctx: &DecisionContext) -> f64 {
    let d = ctx.d as f64;
    let f = ctx.f as f64;
    match kind {
        BehaviourKind::Snooze => d + f / 8.0,
        BehaviourKind::FollowUp => d + f / 3.0,
        BehaviourKind::Remind => d + f / 4.0,
        BehaviourKind::Record | BehaviourKind::Report | BehaviourKind::AcknowledgeWait => d + 1.0,
    }
}

pub fn wellbeing_utility(
    b: &Behaviour,
    ctx: &DecisionContext,
) -> Result<(f64, GammaSpec), UtilityError> {
    let spec = GammaSpec::for_dose(ctx.epsilon_m, dose_count(b.kind, ctx))?;
    let p = pmax_util(&spec);
    let w = match b.kind {
        BehaviourKind::Snooze | BehaviourKind::FollowUp | BehaviourKind::Record => p,
        BehaviourKind::Remind => p + 0.5,
        BehaviourKind::Report | BehaviourKind::AcknowledgeWait => p.abs(),
    };
    Ok((w, spec))
}

/// How a behaviour's wellbeing density is turned into a risk figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum RiskMode {
    /// `scale * max_{x<0} g(x)*|x|` over the grid: density-weighted harm.
    Harm { scale: f64 },
    /// `max_x g(x)*x` over the full grid, signed.
    Literal,
}

impl Default for RiskMode {
    fn default() -> Self {
        RiskMode::Harm {
            scale: DEFAULT_HARM_SCALE,
        }
    }
}

pub fn behaviour_risk(spec: &GammaSpec, mode: RiskMode) -> f64 {
    match mode {
        RiskMode::Harm { scale } => {
            let peak = grid()
                .filter(|&x| x < 0.0)
                .map(|x| gamma_pdf(x, spec) * x.abs())
                .fold(0.0, f64::max);
            scale * peak
        }
        RiskMode::Literal => grid()
            .map(|x| gamma_pdf(x, spec) * x)
            .fold(f64::NEG_INFINITY, f64::max),
    }
}
