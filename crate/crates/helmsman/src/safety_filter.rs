//! CBFQP safety filter for single-integrator-with-orientation dynamics,
//! plus the proportional performance controller that feeds it.
//!
//! With one aggregated barrier constraint the QP
//! `min ||u_ref - u||^2  s.t.  a.u >= -gamma*h` has the closed-form solution
//! of a half-space projection, so no numeric solver is involved.

use crate::geometry::Vec3;
use crate::vessel::CbfEval;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    /// Zero constraint gradient with a violated constraint: the degenerate
    /// surrounded case. Commanding zero velocity is always feasible, so the
    /// caller should stop and flag the event.
    #[error("CBF constraint infeasible: zero gradient with h = {h}")]
    Infeasible { h: f64 },
}

/// Body-frame velocity command: linear velocity plus yaw rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlCommand {
    pub v: Vec3,
    pub omega: f64,
}

impl ControlCommand {
    pub const ZERO: ControlCommand = ControlCommand { v: Vec3::ZERO, omega: 0.0 };

    pub fn new(v: Vec3, omega: f64) -> Self {
        ControlCommand { v, omega }
    }

    pub fn from_array(u: [f64; 4]) -> Self {
        ControlCommand { v: Vec3::new(u[0], u[1], u[2]), omega: u[3] }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.v.x, self.v.y, self.v.z, self.omega]
    }

    pub fn norm(&self) -> f64 {
        (self.v.norm_squared() + self.omega * self.omega).sqrt()
    }
}

/// Gains and limits for the reference controller and the CBFQP.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FilterParams {
    /// Barrier decay rate: the constraint is `a.u >= -gamma_bar * h`.
    pub gamma_bar: f64,
    /// Diagonal position gain (per body axis).
    pub k_v: [f64; 3],
    /// Heading gain.
    pub k_omega: f64,
    /// Horizontal target distance under which the heading command is zeroed.
    pub heading_deadband: f64,
    /// Optional speed limit on `|v|`; enforced by uniform scaling.
    pub v_max: Option<f64>,
    /// Optional yaw-rate limit; enforced by the same uniform scaling.
    pub omega_max: Option<f64>,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            gamma_bar: 2.0,
            k_v: [1.0, 1.0, 1.0],
            k_omega: 1.0,
            heading_deadband: 0.05,
            v_max: Some(1.0),
            omega_max: Some(1.5),
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma_bar > 0.0) {
            return Err(format!("gamma_bar must be > 0 (got {})", self.gamma_bar));
        }
        for (i, k) in self.k_v.iter().enumerate() {
            if !(*k > 0.0) {
                return Err(format!("k_v[{i}] must be > 0 (got {k})"));
            }
        }
        if !(self.k_omega > 0.0) {
            return Err(format!("k_omega must be > 0 (got {})", self.k_omega));
        }
        if !(self.heading_deadband >= 0.0) {
            return Err("heading_deadband must be >= 0".into());
        }
        for (name, lim) in [("v_max", self.v_max), ("omega_max", self.omega_max)] {
            if let Some(l) = lim {
                if !(l > 0.0) {
                    return Err(format!("{name} must be > 0 (got {l})"));
                }
            }
        }
        Ok(())
    }
}

/// Proportional reference controller toward a body-frame target:
/// `v = K_v * target`, `omega = K_omega * atan2(target_y, target_x)`.
///
/// The robot's own position and yaw are zero in its body frame, so the
/// errors reduce to the target coordinates themselves.
pub fn reference_control(target_body: Vec3, params: &FilterParams) -> ControlCommand {
    let v = Vec3::new(
        params.k_v[0] * target_body.x,
        params.k_v[1] * target_body.y,
        params.k_v[2] * target_body.z,
    );
    let horizontal = (target_body.x * target_body.x + target_body.y * target_body.y).sqrt();
    let omega = if horizontal < params.heading_deadband {
        0.0
    } else {
        params.k_omega * target_body.y.atan2(target_body.x)
    };
    ControlCommand::new(v, omega)
}

/// Uniform scaling toward zero so `|v| <= v_max` and `|omega| <= omega_max`.
/// Radial scaling keeps `a.u >= -gamma*h` satisfied whenever `h >= 0`,
/// which a per-axis clamp would not.
pub fn clamp_command(u: ControlCommand, params: &FilterParams) -> ControlCommand {
    let mut scale = 1.0f64;
    if let Some(v_max) = params.v_max {
        let speed = u.v.norm();
        if speed > v_max {
            scale = scale.min(v_max / speed);
        }
    }
    if let Some(omega_max) = params.omega_max {
        if u.omega.abs() > omega_max {
            scale = scale.min(omega_max / u.omega.abs());
        }
    }
    ControlCommand::new(u.v * scale, u.omega * scale)
}

/// Project the reference command onto the half-space `a.u >= -gamma*h`,
/// where `a` is the barrier's constraint row in body-frame command
/// coordinates. Limits are applied afterwards by uniform scaling.
pub fn filter_command(
    u_ref: ControlCommand,
    eval: &CbfEval,
    params: &FilterParams,
) -> Result<ControlCommand, FilterError> {
    if eval.is_unconstrained() {
        return Ok(clamp_command(u_ref, params));
    }
    let a = eval.grad4_body;
    let bound = -params.gamma_bar * eval.h;
    let u = u_ref.as_array();
    let a_dot_u: f64 = (0..4).map(|i| a[i] * u[i]).sum();
    if a_dot_u >= bound {
        return Ok(clamp_command(u_ref, params));
    }
    let a_norm_sq: f64 = a.iter().map(|v| v * v).sum();
    if a_norm_sq <= 1e-24 {
        return Err(FilterError::Infeasible { h: eval.h });
    }
    let lambda = (bound - a_dot_u) / a_norm_sq;
    let mut out = [0.0f64; 4];
    for i in 0..4 {
        out[i] = u[i] + lambda * a[i];
    }
    Ok(clamp_command(ControlCommand::from_array(out), params))
}
