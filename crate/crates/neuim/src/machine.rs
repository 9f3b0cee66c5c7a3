//! Induction machine electrical and mechanical equations in the dq0 frame.
//!
//! Everything in this module is a pure function of its arguments: the same
//! functions drive the forward simulator and the physics-consistency losses
//! used for training. Conventions are the usual machinery-analysis ones:
//! q-axis leading, 2/3-scaled (non-power-invariant) Park transform, speed
//! voltages entering the q/d rows as `(+λ_d, -λ_q)`, squirrel-cage rotor
//! (rotor terminal voltage identically zero).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum admissible determinant of the per-axis inductance matrix.
/// Anything below this signals corrupt parameters rather than a real machine.
pub const MIN_INDUCTANCE_DET: f64 = 1e-15;

/// Electrical and mechanical constants of one machine.
///
/// Resistances in ohms, inductances in henries, inertia in kg·m², speeds in
/// electrical rad/s. `omega_frame` is the speed of the reference frame the
/// dq0 quantities live in; `omega_e` is the synchronous electrical speed of
/// the source feeding the machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineParams {
    pub r_s: f64,
    pub r_r: f64,
    pub l_ls: f64,
    pub l_lr: f64,
    pub l_m: f64,
    pub inertia: f64,
    pub poles: u32,
    pub omega_frame: f64,
    pub omega_e: f64,
}

impl MachineParams {
    /// A 3-hp, 220 V, 60 Hz, 4-pole machine in the synchronous frame.
    /// Reactances converted to inductances at the 60 Hz base.
    pub fn small_machine() -> Self {
        let omega_e = 2.0 * std::f64::consts::PI * 60.0;
        Self {
            r_s: 0.435,
            r_r: 0.816,
            l_ls: 0.754 / omega_e,
            l_lr: 0.754 / omega_e,
            l_m: 26.13 / omega_e,
            inertia: 0.089,
            poles: 4,
            omega_frame: omega_e,
            omega_e,
        }
    }

    /// A 2250-hp, 2300 V, 60 Hz, 4-pole machine in the synchronous frame.
    /// Its magnetizing inductance is 13.04/376.99 ≈ 0.0346 H.
    pub fn large_machine() -> Self {
        let omega_e = 2.0 * std::f64::consts::PI * 60.0;
        Self {
            r_s: 0.029,
            r_r: 0.022,
            l_ls: 0.226 / omega_e,
            l_lr: 0.224 / omega_e,
            l_m: 13.04 / omega_e,
            inertia: 63.87,
            poles: 4,
            omega_frame: omega_e,
            omega_e,
        }
    }

    /// Same machine with a different magnetizing inductance (parameter-change
    /// studies).
    pub fn with_magnetizing_inductance(mut self, l_m: f64) -> Self {
        self.l_m = l_m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_ls > 0.0 && self.l_lr > 0.0 && self.l_m > 0.0) {
            return Err(Error::InvalidParams(format!(
                "inductances must be positive (l_ls={}, l_lr={}, l_m={})",
                self.l_ls, self.l_lr, self.l_m
            )));
        }
        if self.r_s < 0.0 || self.r_r < 0.0 {
            return Err(Error::InvalidParams(format!(
                "resistances must be non-negative (r_s={}, r_r={})",
                self.r_s, self.r_r
            )));
        }
        if !(self.inertia > 0.0) {
            return Err(Error::InvalidParams(format!(
                "inertia must be positive (got {})",
                self.inertia
            )));
        }
        if self.poles < 2 || self.poles % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "pole count must be an even integer >= 2 (got {})",
                self.poles
            )));
        }
        for (name, v) in [
            ("omega_frame", self.omega_frame),
            ("omega_e", self.omega_e),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Determinant of the per-axis inductance matrix
    /// `[[l_ls + l_m, l_m], [l_m, l_lr + l_m]]`.
    pub fn inductance_det(&self) -> f64 {
        (self.l_ls + self.l_m) * (self.l_lr + self.l_m) - self.l_m * self.l_m
    }
}

/// One quantity resolved onto the rotating frame: q-axis, d-axis and
/// zero-sequence components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Qd0Triple {
    pub q: f64,
    pub d: f64,
    pub z: f64,
}

impl Qd0Triple {
    pub const ZERO: Self = Self {
        q: 0.0,
        d: 0.0,
        z: 0.0,
    };

    pub fn new(q: f64, d: f64, z: f64) -> Self {
        Self { q, d, z }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.d.is_finite() && self.z.is_finite()
    }
}

/// One quantity in stationary abc phase coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AbcTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AbcTriple {
    pub const ZERO: Self = Self {
        a: 0.0,
        b: 0.0,
        c: 0.0,
    };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }
}

const TWO_THIRDS_PI: f64 = 2.0 * std::f64::consts::PI / 3.0;

/// Forward Park matrix `K_s(θ)`, mapping abc quantities to qd0.
///
/// Row structure: `(2/3)·[[cosθ, cos(θ-2π/3), cos(θ+2π/3)],
/// [sinθ, sin(θ-2π/3), sin(θ+2π/3)], [1/2, 1/2, 1/2]]`.
pub fn park_matrix(theta: f64) -> [[f64; 3]; 3] {
    let c = 2.0 / 3.0;
    [
        [
            c * theta.cos(),
            c * (theta - TWO_THIRDS_PI).cos(),
            c * (theta + TWO_THIRDS_PI).cos(),
        ],
        [
            c * theta.sin(),
            c * (theta - TWO_THIRDS_PI).sin(),
            c * (theta + TWO_THIRDS_PI).sin(),
        ],
        [c * 0.5, c * 0.5, c * 0.5],
    ]
}

/// Inverse Park matrix `K_s⁻¹(θ)`, mapping qd0 quantities back to abc.
pub fn inverse_park_matrix(theta: f64) -> [[f64; 3]; 3] {
    [
        [theta.cos(), theta.sin(), 1.0],
        [
            (theta - TWO_THIRDS_PI).cos(),
            (theta - TWO_THIRDS_PI).sin(),
            1.0,
        ],
        [
            (theta + TWO_THIRDS_PI).cos(),
            (theta + TWO_THIRDS_PI).sin(),
            1.0,
        ],
    ]
}

/// `x_qd0 = K_s(θ) · x_abc`.
pub fn abc_to_qd0(theta: f64, x: AbcTriple) -> Qd0Triple {
    let k = park_matrix(theta);
    Qd0Triple {
        q: k[0][0] * x.a + k[0][1] * x.b + k[0][2] * x.c,
        d: k[1][0] * x.a + k[1][1] * x.b + k[1][2] * x.c,
        z: k[2][0] * x.a + k[2][1] * x.b + k[2][2] * x.c,
    }
}

/// `x_abc = K_s⁻¹(θ) · x_qd0`.
pub fn qd0_to_abc(theta: f64, x: Qd0Triple) -> AbcTriple {
    let k = inverse_park_matrix(theta);
    AbcTriple {
        a: k[0][0] * x.q + k[0][1] * x.d + k[0][2] * x.z,
        b: k[1][0] * x.q + k[1][1] * x.d + k[1][2] * x.z,
        c: k[2][0] * x.q + k[2][1] * x.d + k[2][2] * x.z,
    }
}

/// Flux linkages from stator and rotor currents.
///
/// The magnetizing inductance couples only the q and d axes; the
/// zero-sequence flux of each winding sees its leakage inductance alone.
pub fn flux_linkages(p: &MachineParams, i_s: Qd0Triple, i_r: Qd0Triple) -> (Qd0Triple, Qd0Triple) {
    let lambda_s = Qd0Triple {
        q: p.l_ls * i_s.q + p.l_m * (i_s.q + i_r.q),
        d: p.l_ls * i_s.d + p.l_m * (i_s.d + i_r.d),
        z: p.l_ls * i_s.z,
    };
    let lambda_r = Qd0Triple {
        q: p.l_lr * i_r.q + p.l_m * (i_s.q + i_r.q),
        d: p.l_lr * i_r.d + p.l_m * (i_s.d + i_r.d),
        z: p.l_lr * i_r.z,
    };
    (lambda_s, lambda_r)
}

/// Inverse of [`flux_linkages`]: recover currents from flux linkages.
///
/// Solves the constant per-axis 2×2 system in closed form; the zero-sequence
/// axes are decoupled.
pub fn currents_from_flux(
    p: &MachineParams,
    lambda_s: Qd0Triple,
    lambda_r: Qd0Triple,
) -> Result<(Qd0Triple, Qd0Triple)> {
    let det = p.inductance_det();
    if det.abs() < MIN_INDUCTANCE_DET {
        return Err(Error::SingularInductance { det });
    }
    let a = p.l_ls + p.l_m;
    let b = p.l_lr + p.l_m;
    let inv = 1.0 / det;
    let i_s = Qd0Triple {
        q: (b * lambda_s.q - p.l_m * lambda_r.q) * inv,
        d: (b * lambda_s.d - p.l_m * lambda_r.d) * inv,
        z: lambda_s.z / p.l_ls,
    };
    let i_r = Qd0Triple {
        q: (a * lambda_r.q - p.l_m * lambda_s.q) * inv,
        d: (a * lambda_r.d - p.l_m * lambda_s.d) * inv,
        z: lambda_r.z / p.l_lr,
    };
    Ok((i_s, i_r))
}

/// Time derivatives of stator and rotor flux linkages.
///
/// Stator: `λ̇ = v - r_s·i - ω·(+λ_d, -λ_q, 0)`; rotor the same with
/// `(ω - ω_r)` and zero terminal voltage. `omega_r` is the rotor electrical
/// speed.
pub fn flux_derivatives(
    p: &MachineParams,
    v_s: Qd0Triple,
    i_s: Qd0Triple,
    i_r: Qd0Triple,
    lambda_s: Qd0Triple,
    lambda_r: Qd0Triple,
    omega_r: f64,
) -> (Qd0Triple, Qd0Triple) {
    let w = p.omega_frame;
    let w_slip = w - omega_r;
    let dlambda_s = Qd0Triple {
        q: v_s.q - p.r_s * i_s.q - w * lambda_s.d,
        d: v_s.d - p.r_s * i_s.d + w * lambda_s.q,
        z: v_s.z - p.r_s * i_s.z,
    };
    let dlambda_r = Qd0Triple {
        q: -p.r_r * i_r.q - w_slip * lambda_r.d,
        d: -p.r_r * i_r.d + w_slip * lambda_r.q,
        z: -p.r_r * i_r.z,
    };
    (dlambda_s, dlambda_r)
}

/// Electromagnetic torque `T_e = (3P/4)·(λ_ds·i_qs - λ_qs·i_ds)` in N·m.
pub fn electromagnetic_torque(p: &MachineParams, lambda_s: Qd0Triple, i_s: Qd0Triple) -> f64 {
    0.75 * f64::from(p.poles) * (lambda_s.d * i_s.q - lambda_s.q * i_s.d)
}

/// Rotor electrical acceleration `ω̇_r = (P / 2J)·(T_e - T_m)` in rad/s².
pub fn rotor_acceleration(p: &MachineParams, t_e: f64, t_m: f64) -> f64 {
    f64::from(p.poles) / (2.0 * p.inertia) * (t_e - t_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    // Independent oracle: invert park_matrix numerically with Cramer's rule
    // and check it matches inverse_park_matrix.
    fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let c = |r1: usize, c1: usize, r2: usize, c2: usize| {
            m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
        };
        [
            [c(1, 1, 2, 2) / det, -c(0, 1, 2, 2) / det, c(0, 1, 1, 2) / det],
            [-c(1, 0, 2, 2) / det, c(0, 0, 2, 2) / det, -c(0, 0, 1, 2) / det],
            [c(1, 0, 2, 1) / det, -c(0, 0, 2, 1) / det, c(0, 0, 1, 1) / det],
        ]
    }

    #[test]
    fn park_balanced_common_mode_maps_to_zero_sequence() {
        let x = abc_to_qd0(0.0, AbcTriple::new(1.0, 1.0, 1.0));
        assert!(x.q.abs() < 1e-15);
        assert!(x.d.abs() < 1e-15);
        assert!((x.z - 1.0).abs() < 1e-15);
    }

    #[test]
    fn park_aligned_balanced_set_maps_to_pure_q() {
        let x = abc_to_qd0(0.0, AbcTriple::new(1.0, -0.5, -0.5));
        assert!((x.q - 1.0).abs() < 1e-15);
        assert!(x.d.abs() < 1e-15);
        assert!(x.z.abs() < 1e-15);
    }

    #[test]
    fn park_quarter_turn_moves_aligned_set_to_d() {
        let x = abc_to_qd0(std::f64::consts::FRAC_PI_2, AbcTriple::new(1.0, -0.5, -0.5));
        assert!(x.q.abs() < 1e-15, "q = {}", x.q);
        assert!((x.d - 1.0).abs() < 1e-15, "d = {}", x.d);
        assert!(x.z.abs() < 1e-15);
    }

    #[test]
    fn inverse_park_pure_zero_sequence() {
        let x = qd0_to_abc(0.0, Qd0Triple::new(0.0, 0.0, 1.0));
        assert!((x.a - 1.0).abs() < 1e-15);
        assert!((x.b - 1.0).abs() < 1e-15);
        assert!((x.c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_park_matches_numeric_matrix_inverse() {
        for i in 0..100 {
            let theta = i as f64 * 0.173 - 8.0;
            let k = park_matrix(theta);
            let k_inv = inverse_park_matrix(theta);
            let k_inv_oracle = invert3(&k);
            for r in 0..3 {
                for c in 0..3 {
                    assert!(
                        (k_inv[r][c] - k_inv_oracle[r][c]).abs() < 1e-12,
                        "theta={theta} entry ({r},{c}): {} vs oracle {}",
                        k_inv[r][c],
                        k_inv_oracle[r][c]
                    );
                }
            }
        }
    }

    #[test]
    fn park_product_is_identity() {
        let theta = 0.82;
        let k = park_matrix(theta);
        let k_inv = inverse_park_matrix(theta);
        for col in 0..3 {
            let e = [
                (col == 0) as u8 as f64,
                (col == 1) as u8 as f64,
                (col == 2) as u8 as f64,
            ];
            let out = mat_vec(&k, mat_vec(&k_inv, e));
            for (r, &o) in out.iter().enumerate() {
                let expect = if r == col { 1.0 } else { 0.0 };
                assert!((o - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn synchronous_frame_makes_balanced_sinusoids_constant() {
        let omega_e = 2.0 * std::f64::consts::PI * 60.0;
        let mag = 179.6;
        let mut reference: Option<Qd0Triple> = None;
        for k in 0..2000 {
            let t = k as f64 * 5e-5;
            let v = AbcTriple::new(
                mag * (omega_e * t).cos(),
                mag * (omega_e * t - TWO_THIRDS_PI).cos(),
                mag * (omega_e * t + TWO_THIRDS_PI).cos(),
            );
            let q = abc_to_qd0(omega_e * t, v);
            match reference {
                None => reference = Some(q),
                Some(r) => {
                    assert!((q.q - r.q).abs() < 1e-10 * mag);
                    assert!((q.d - r.d).abs() < 1e-10 * mag);
                    assert!((q.z - r.z).abs() < 1e-10 * mag);
                }
            }
        }
    }

    #[test]
    fn flux_linkages_direct_substitution() {
        let p = MachineParams::small_machine();
        let (ls, lr) = flux_linkages(&p, Qd0Triple::new(1.0, 0.0, 0.0), Qd0Triple::ZERO);
        assert!((ls.q - (p.l_ls + p.l_m)).abs() < 1e-15);
        assert!((lr.q - p.l_m).abs() < 1e-15);
        assert_eq!(ls.d, 0.0);
        assert_eq!(ls.z, 0.0);
    }

    #[test]
    fn flux_linkages_zero_sequence_decoupled() {
        let p = MachineParams::small_machine();
        let (ls, lr) = flux_linkages(&p, Qd0Triple::new(0.0, 0.0, 1.0), Qd0Triple::ZERO);
        assert!((ls.z - p.l_ls).abs() < 1e-15);
        assert_eq!(lr.z, 0.0);
        assert_eq!(ls.q, 0.0);
        assert_eq!(ls.d, 0.0);
    }

    #[test]
    fn currents_from_flux_zero_maps_to_zero() {
        let p = MachineParams::small_machine();
        let (i_s, i_r) = currents_from_flux(&p, Qd0Triple::ZERO, Qd0Triple::ZERO).unwrap();
        assert_eq!(i_s, Qd0Triple::ZERO);
        assert_eq!(i_r, Qd0Triple::ZERO);
    }

    #[test]
    fn currents_from_flux_decoupled_zero_axis() {
        let p = MachineParams::small_machine();
        let c = 2.5;
        let (i_s, _) =
            currents_from_flux(&p, Qd0Triple::new(0.0, 0.0, p.l_ls * c), Qd0Triple::ZERO).unwrap();
        assert!((i_s.z - c).abs() < 1e-12);
    }

    #[test]
    fn currents_from_flux_rejects_singular_params() {
        // Degenerate parameters where the 2x2 determinant vanishes:
        // l_ls = l_lr = 0 gives det = l_m^2 - l_m^2 = 0.
        let mut p = MachineParams::small_machine();
        p.l_ls = 0.0;
        p.l_lr = 0.0;
        let err = currents_from_flux(&p, Qd0Triple::ZERO, Qd0Triple::ZERO).unwrap_err();
        assert!(matches!(err, Error::SingularInductance { .. }));
    }

    #[test]
    fn flux_derivatives_zero_inputs() {
        let p = MachineParams::small_machine();
        let (ds, dr) = flux_derivatives(
            &p,
            Qd0Triple::ZERO,
            Qd0Triple::ZERO,
            Qd0Triple::ZERO,
            Qd0Triple::ZERO,
            Qd0Triple::ZERO,
            0.0,
        );
        assert_eq!(ds, Qd0Triple::ZERO);
        assert_eq!(dr, Qd0Triple::ZERO);
    }

    #[test]
    fn flux_derivatives_pure_voltage_drive() {
        let mut p = MachineParams::small_machine();
        p.omega_frame = 0.0;
        let (ds, _) = flux_derivatives(
            &p,
            Qd0Triple::new(1.0, 0.0, 0.0),
            Qd0Triple::ZERO,
            Qd0Triple::ZERO,
            Qd0Triple::ZERO,
            Qd0Triple::ZERO,
            0.0,
        );
        assert_eq!(ds, Qd0Triple::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn torque_direct_substitution() {
        let p = MachineParams {
            poles: 4,
            ..MachineParams::small_machine()
        };
        let t_e = electromagnetic_torque(
            &p,
            Qd0Triple::new(0.0, 1.0, 0.0),
            Qd0Triple::new(1.0, 0.0, 0.0),
        );
        assert!((t_e - 3.0).abs() < 1e-15);
    }

    #[test]
    fn torque_vanishes_for_parallel_flux_and_current() {
        let p = MachineParams::small_machine();
        let i = Qd0Triple::new(0.7, -1.3, 0.0);
        let lambda = Qd0Triple::new(0.7 * 2.0, -1.3 * 2.0, 0.0);
        assert!(electromagnetic_torque(&p, lambda, i).abs() < 1e-15);
    }

    #[test]
    fn torque_zero_current() {
        let p = MachineParams::small_machine();
        assert_eq!(
            electromagnetic_torque(&p, Qd0Triple::new(1.0, 2.0, 0.0), Qd0Triple::ZERO),
            0.0
        );
    }

    #[test]
    fn rotor_acceleration_examples() {
        let p = MachineParams {
            poles: 4,
            inertia: 2.0,
            ..MachineParams::small_machine()
        };
        assert_eq!(rotor_acceleration(&p, 10.0, 10.0), 0.0);
        assert!((rotor_acceleration(&p, 10.0, 0.0) - 10.0).abs() < 1e-15);
        assert!(rotor_acceleration(&p, 0.0, 5.0) < 0.0);
    }

    #[test]
    fn param_validation_catches_bad_values() {
        let good = MachineParams::small_machine();
        assert!(good.validate().is_ok());

        let mut p = good;
        p.l_m = 0.0;
        assert!(p.validate().is_err());

        let mut p = good;
        p.poles = 3;
        assert!(p.validate().is_err());

        let mut p = good;
        p.inertia = -1.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn park_round_trip(theta in -10.0f64..10.0, a in -100.0f64..100.0,
                           b in -100.0f64..100.0, c in -100.0f64..100.0) {
            let x = AbcTriple::new(a, b, c);
            let back = qd0_to_abc(theta, abc_to_qd0(theta, x));
            prop_assert!((back.a - x.a).abs() < 1e-12);
            prop_assert!((back.b - x.b).abs() < 1e-12);
            prop_assert!((back.c - x.c).abs() < 1e-12);
        }

        #[test]
        fn flux_current_inversion_round_trip(
            iq_s in -50.0f64..50.0, id_s in -50.0f64..50.0, iz_s in -50.0f64..50.0,
            iq_r in -50.0f64..50.0, id_r in -50.0f64..50.0, iz_r in -50.0f64..50.0,
        ) {
            let p = MachineParams::small_machine();
            let i_s = Qd0Triple::new(iq_s, id_s, iz_s);
            let i_r = Qd0Triple::new(iq_r, id_r, iz_r);
            let (ls, lr) = flux_linkages(&p, i_s, i_r);
            let (i_s2, i_r2) = currents_from_flux(&p, ls, lr).unwrap();
            for (got, want) in [
                (i_s2.q, i_s.q), (i_s2.d, i_s.d), (i_s2.z, i_s.z),
                (i_r2.q, i_r.q), (i_r2.d, i_r.d), (i_r2.z, i_r.z),
            ] {
                prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }

        #[test]
        fn torque_is_bilinear_in_scale(s in -3.0f64..3.0,
                                       lq in -2.0f64..2.0, ld in -2.0f64..2.0,
                                       iq in -20.0f64..20.0, id in -20.0f64..20.0) {
            let p = MachineParams::small_machine();
            let lambda = Qd0Triple::new(lq, ld, 0.0);
            let i = Qd0Triple::new(iq, id, 0.0);
            let scaled = Qd0Triple::new(s * lq, s * ld, 0.0);
            let t1 = electromagnetic_torque(&p, scaled, i);
            let t2 = s * electromagnetic_torque(&p, lambda, i);
            prop_assert!((t1 - t2).abs() < 1e-9 * (1.0 + t2.abs()));
        }
    }
}
