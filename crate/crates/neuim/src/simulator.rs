//! Ground-truth trajectory generation.
//!
//! A [`Scenario`] scripts an infinite-bus source (with optional voltage sags)
//! and a piecewise-constant load-torque schedule; [`simulate`] integrates the
//! machine's flux-linkage state with fixed-step classic RK4 and records every
//! signal the learning pipeline consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{
    abc_to_qd0, currents_from_flux, electromagnetic_torque, flux_derivatives, flux_linkages,
    qd0_to_abc, rotor_acceleration, AbcTriple, MachineParams, Qd0Triple,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    FreeAcceleration,
    TorqueChange,
    Fault,
}

impl ScenarioKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScenarioKind::FreeAcceleration => "free-accel",
            ScenarioKind::TorqueChange => "tc",
            ScenarioKind::Fault => "fault",
        }
    }
}

/// Event schedule and grid for one simulation run.
///
/// `torque_schedule` and `sag_schedule` are step functions given as
/// `(t_start, value)` pairs sorted by `t_start`; the value of the last entry
/// with `t_start <= t` applies. The sag value multiplies the source voltage
/// magnitude (default 1 before the first entry).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Source line-to-neutral peak voltage, volts.
    pub v_mag: f64,
    /// Source frequency, Hz.
    pub f_e: f64,
    pub torque_schedule: Vec<(f64, f64)>,
    pub sag_schedule: Vec<(f64, f64)>,
    pub t_end: f64,
    pub dt: f64,
    pub params: MachineParams,
}

impl Scenario {
    /// Free acceleration from rest, no load torque.
    pub fn free_acceleration(params: MachineParams, v_mag: f64, t_end: f64, dt: f64) -> Self {
        Self {
            kind: ScenarioKind::FreeAcceleration,
            v_mag,
            f_e: params.omega_e / (2.0 * std::f64::consts::PI),
            torque_schedule: vec![(0.0, 0.0)],
            sag_schedule: vec![],
            t_end,
            dt,
            params,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0) {
            return Err(Error::InvalidScenario(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) || steps.round() < 1.0 {
            return Err(Error::InvalidScenario(format!(
                "t_end/dt must be a positive integer (got {steps})"
            )));
        }
        for (name, sched) in [
            ("torque_schedule", &self.torque_schedule),
            ("sag_schedule", &self.sag_schedule),
        ] {
            for w in sched.windows(2) {
                if w[1].0 <= w[0].0 {
                    return Err(Error::InvalidScenario(format!(
                        "{name} must be strictly ascending in t_start"
                    )));
                }
            }
            if let Some(&(t0, _)) = sched.first() {
                if t0 < 0.0 || sched.last().unwrap().0 >= self.t_end {
                    return Err(Error::InvalidScenario(format!(
                        "{name} entries must lie in [0, t_end)"
                    )));
                }
            }
        }
        if self.kind == ScenarioKind::FreeAcceleration && self.torque_schedule != vec![(0.0, 0.0)] {
            return Err(Error::InvalidScenario(
                "free acceleration requires torque_schedule = [(0, 0)]".into(),
            ));
        }
        if !self.v_mag.is_finite() || self.v_mag < 0.0 {
            return Err(Error::InvalidScenario(format!(
                "v_mag must be finite and >= 0, got {}",
                self.v_mag
            )));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Piecewise-constant lookup: value of the last entry with `t_start <= t`,
/// or `default` before the first entry.
fn schedule_value(schedule: &[(f64, f64)], t: f64, default: f64) -> f64 {
    let mut value = default;
    for &(t_start, v) in schedule {
        if t_start <= t {
            value = v;
        } else {
            break;
        }
    }
    value
}

/// Balanced three-phase infinite-bus voltage, with the sag schedule applied.
pub fn source_voltage(sc: &Scenario, t: f64) -> AbcTriple {
    let scale = schedule_value(&sc.sag_schedule, t, 1.0);
    let omega_e = 2.0 * std::f64::consts::PI * sc.f_e;
    let phase = omega_e * t;
    let shift = 2.0 * std::f64::consts::PI / 3.0;
    AbcTriple {
        a: scale * sc.v_mag * phase.cos(),
        b: scale * sc.v_mag * (phase - shift).cos(),
        c: scale * sc.v_mag * (phase + shift).cos(),
    }
}

/// Load torque at time `t` from the scenario's step schedule.
pub fn mechanical_torque(sc: &Scenario, t: f64) -> f64 {
    schedule_value(&sc.torque_schedule, t, 0.0)
}

/// Integration state: six flux linkages, rotor electrical speed, rotor angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MachineState {
    pub lambda_s: Qd0Triple,
    pub lambda_r: Qd0Triple,
    pub omega_r: f64,
    pub theta_r: f64,
}

impl MachineState {
    fn axpy(&self, scale: f64, d: &StateDerivative) -> Self {
        Self {
            lambda_s: Qd0Triple {
                q: self.lambda_s.q + scale * d.dlambda_s.q,
                d: self.lambda_s.d + scale * d.dlambda_s.d,
                z: self.lambda_s.z + scale * d.dlambda_s.z,
            },
            lambda_r: Qd0Triple {
                q: self.lambda_r.q + scale * d.dlambda_r.q,
                d: self.lambda_r.d + scale * d.dlambda_r.d,
                z: self.lambda_r.z + scale * d.dlambda_r.z,
            },
            omega_r: self.omega_r + scale * d.domega_r,
            theta_r: self.theta_r + scale * d.dtheta_r,
        }
    }

    fn is_finite(&self) -> bool {
        self.lambda_s.is_finite()
            && self.lambda_r.is_finite()
            && self.omega_r.is_finite()
            && self.theta_r.is_finite()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StateDerivative {
    pub dlambda_s: Qd0Triple,
    pub dlambda_r: Qd0Triple,
    pub domega_r: f64,
    pub dtheta_r: f64,
}

/// Right-hand side of the machine ODE at time `t`.
pub fn state_derivative(sc: &Scenario, t: f64, state: &MachineState) -> Result<StateDerivative> {
    let p = &sc.params;
    let theta = p.omega_frame * t;
    let v_qd0s = abc_to_qd0(theta, source_voltage(sc, t));
    let (i_s, i_r) = currents_from_flux(p, state.lambda_s, state.lambda_r)?;
    let (dlambda_s, dlambda_r) = flux_derivatives(
        p,
        v_qd0s,
        i_s,
        i_r,
        state.lambda_s,
        state.lambda_r,
        state.omega_r,
    );
    let t_e = electromagnetic_torque(p, state.lambda_s, i_s);
    let t_m = mechanical_torque(sc, t);
    Ok(StateDerivative {
        dlambda_s,
        dlambda_r,
        domega_r: rotor_acceleration(p, t_e, t_m),
        dtheta_r: state.omega_r,
    })
}

/// Uniformly sampled time series of every machine signal.
///
/// The flux arrays are recomputed from the emitted current arrays, so the
/// linkage equations hold exactly between them; the integrated fluxes only
/// differ at rounding level.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: ScenarioKind,
    pub params: MachineParams,
    pub dt: f64,
    pub t: Vec<f64>,
    pub v_abcs: Vec<AbcTriple>,
    pub i_abcs: Vec<AbcTriple>,
    pub i_qd0s: Vec<Qd0Triple>,
    pub i_qd0r: Vec<Qd0Triple>,
    pub lambda_qd0s: Vec<Qd0Triple>,
    pub lambda_qd0r: Vec<Qd0Triple>,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub omega_r: Vec<f64>,
    pub t_e: Vec<f64>,
    pub t_m: Vec<f64>,
}

impl Trajectory {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("trajectory has at least two samples")
    }

    /// Keep every `stride`-th sample (including the endpoint), producing a
    /// trajectory on a grid `stride` times coarser. The sample count minus
    /// one must be divisible by `stride`.
    pub fn decimate(&self, stride: usize) -> Result<Trajectory> {
        if stride == 0 || (self.len() - 1) % stride != 0 {
            return Err(Error::InvalidScenario(format!(
                "stride {stride} does not divide {} steps",
                self.len() - 1
            )));
        }
        let pick = |v: &Vec<f64>| v.iter().copied().step_by(stride).collect::<Vec<_>>();
        Ok(Trajectory {
            kind: self.kind,
            params: self.params,
            dt: self.dt * stride as f64,
            t: pick(&self.t),
            v_abcs: self.v_abcs.iter().copied().step_by(stride).collect(),
            i_abcs: self.i_abcs.iter().copied().step_by(stride).collect(),
            i_qd0s: self.i_qd0s.iter().copied().step_by(stride).collect(),
            i_qd0r: self.i_qd0r.iter().copied().step_by(stride).collect(),
            lambda_qd0s: self.lambda_qd0s.iter().copied().step_by(stride).collect(),
            lambda_qd0r: self.lambda_qd0r.iter().copied().step_by(stride).collect(),
            theta: pick(&self.theta),
            omega: pick(&self.omega),
            omega_r: pick(&self.omega_r),
            t_e: pick(&self.t_e),
            t_m: pick(&self.t_m),
        })
    }
}

/// Integrate a scenario from rest (all fluxes zero, machine de-energized)
/// with classic fixed-step RK4, recording every step.
pub fn simulate(sc: &Scenario) -> Result<Trajectory> {
    simulate_from(sc, MachineState::default())
}

/// Same as [`simulate`] but starting from an explicit initial state.
pub fn simulate_from(sc: &Scenario, initial: MachineState) -> Result<Trajectory> {
    sc.validate()?;
    let steps = sc.step_count();
    let n = steps + 1;
    let dt = sc.dt;
    let p = &sc.params;

    let mut traj = Trajectory {
        kind: sc.kind,
        params: *p,
        dt,
        t: Vec::with_capacity(n),
        v_abcs: Vec::with_capacity(n),
        i_abcs: Vec::with_capacity(n),
        i_qd0s: Vec::with_capacity(n),
        i_qd0r: Vec::with_capacity(n),
        lambda_qd0s: Vec::with_capacity(n),
        lambda_qd0r: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        omega: Vec::with_capacity(n),
        omega_r: Vec::with_capacity(n),
        t_e: Vec::with_capacity(n),
        t_m: Vec::with_capacity(n),
    };

    let mut state = initial;
    for k in 0..=steps {
        let t = k as f64 * dt;
        if !state.is_finite() {
            return Err(Error::NonFiniteState { step: k, t });
        }
        record_sample(sc, t, &state, &mut traj)?;
        if k == steps {
            break;
        }

        let k1 = state_derivative(sc, t, &state)?;
        let k2 = state_derivative(sc, t + 0.5 * dt, &state.axpy(0.5 * dt, &k1))?;
        let k3 = state_derivative(sc, t + 0.5 * dt, &state.axpy(0.5 * dt, &k2))?;
        let k4 = state_derivative(sc, t + dt, &state.axpy(dt, &k3))?;

        state = MachineState {
            lambda_s: Qd0Triple {
                q: state.lambda_s.q
                    + dt / 6.0
                        * (k1.dlambda_s.q
                            + 2.0 * k2.dlambda_s.q
                            + 2.0 * k3.dlambda_s.q
                            + k4.dlambda_s.q),
                d: state.lambda_s.d
                    + dt / 6.0
                        * (k1.dlambda_s.d
                            + 2.0 * k2.dlambda_s.d
                            + 2.0 * k3.dlambda_s.d
                            + k4.dlambda_s.d),
                z: state.lambda_s.z
                    + dt / 6.0
                        * (k1.dlambda_s.z
                            + 2.0 * k2.dlambda_s.z
                            + 2.0 * k3.dlambda_s.z
                            + k4.dlambda_s.z),
            },
            lambda_r: Qd0Triple {
                q: state.lambda_r.q
                    + dt / 6.0
                        * (k1.dlambda_r.q
                            + 2.0 * k2.dlambda_r.q
                            + 2.0 * k3.dlambda_r.q
                            + k4.dlambda_r.q),
                d: state.lambda_r.d
                    + dt / 6.0
                        * (k1.dlambda_r.d
                            + 2.0 * k2.dlambda_r.d
                            + 2.0 * k3.dlambda_r.d
                            + k4.dlambda_r.d),
                z: state.lambda_r.z
                    + dt / 6.0
                        * (k1.dlambda_r.z
                            + 2.0 * k2.dlambda_r.z
                            + 2.0 * k3.dlambda_r.z
                            + k4.dlambda_r.z),
            },
            omega_r: state.omega_r
                + dt / 6.0 * (k1.domega_r + 2.0 * k2.domega_r + 2.0 * k3.domega_r + k4.domega_r),
            theta_r: state.theta_r
                + dt / 6.0 * (k1.dtheta_r + 2.0 * k2.dtheta_r + 2.0 * k3.dtheta_r + k4.dtheta_r),
        };
    }
    Ok(traj)
}

fn record_sample(sc: &Scenario, t: f64, state: &MachineState, traj: &mut Trajectory) -> Result<()> {
    let p = &sc.params;
    let theta = p.omega_frame * t;
    let v_abc = source_voltage(sc, t);
    let (i_s, i_r) = currents_from_flux(p, state.lambda_s, state.lambda_r)?;
    // Re-derive fluxes from the emitted currents so the linkage equations
    // hold bit-exactly between the recorded arrays.
    let (lambda_s, lambda_r) = flux_linkages(p, i_s, i_r);
    let t_e = electromagnetic_torque(p, lambda_s, i_s);

    traj.t.push(t);
    traj.v_abcs.push(v_abc);
    traj.i_abcs.push(qd0_to_abc(theta, i_s));
    traj.i_qd0s.push(i_s);
    traj.i_qd0r.push(i_r);
    traj.lambda_qd0s.push(lambda_s);
    traj.lambda_qd0r.push(lambda_r);
    traj.theta.push(theta);
    traj.omega.push(p.omega_frame);
    traj.omega_r.push(state.omega_r);
    traj.t_e.push(t_e);
    traj.t_m.push(mechanical_torque(sc, t));
    Ok(())
}
