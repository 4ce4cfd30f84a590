use nalgebra::{Matrix3, Matrix6, Quaternion, SymmetricEigen, Vector6};

use crate::frames::{body_from_velocity_frame, flow_angles, hat, Vec3};
use crate::model::{
    movable_mass_state, ActuatorState, CurrentSample, GeneralizedForce, GliderConfig, GliderState,
    HydroForces, ModelError, GRAVITY,
};

pub type MassMatrix6 = Matrix6<f64>;

/// Body-frame linear and angular accelerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accelerations {
    pub v_dot: Vec3,
    pub omega_dot: Vec3,
}

impl Accelerations {
    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.v_dot.x,
            self.v_dot.y,
            self.v_dot.z,
            self.omega_dot.x,
            self.omega_dot.y,
            self.omega_dot.z,
        )
    }
}

/// Left-hand matrix and right-hand side of the equations of motion, before solving.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTerms {
    pub mass: MassMatrix6,
    pub rhs: Vector6<f64>,
    pub buoyancy: GeneralizedForce,
    pub viscous: GeneralizedForce,
    pub hydro: HydroForces,
}

/// Rigid-body block matrix including the movable-mass coupling, without added mass.
pub fn rigid_mass_matrix(a: &ActuatorState, cfg: &GliderConfig) -> MassMatrix6 {
    let mm = movable_mass_state(a, cfg);
    let hat_rs = hat(&cfg.r_s);
    let hat_rp = hat(&mm.r_p);
    let coupling: Matrix3<f64> = -cfg.m_s * hat_rs - cfg.m_p * hat_rp;
    let rot: Matrix3<f64> = cfg.j_s + mm.j_p - cfg.m_p * hat_rp * hat_rp;
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Matrix3::identity() * (cfg.m_s + cfg.m_p)));
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&coupling);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-coupling));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&rot);
    m
}

pub fn added_mass_matrix(cfg: &GliderConfig) -> Result<MassMatrix6, ModelError> {
    cfg.added_mass_checked()
}

/// Full generalized mass matrix (rigid + added mass), checked to be SPD.
pub fn generalized_mass_matrix(
    a: &ActuatorState,
    cfg: &GliderConfig,
) -> Result<MassMatrix6, ModelError> {
    let m = rigid_mass_matrix(a, cfg) + added_mass_matrix(cfg)?;
    let min_eigenvalue = SymmetricEigen::new(m).eigenvalues.min();
    if !(min_eigenvalue > 0.0) {
        return Err(ModelError::NotPositiveDefinite { what: "generalized mass matrix", min_eigenvalue });
    }
    Ok(m)
}

/// Net heaviness `m_b + m_s + m_p - rho(z) ((m_s + m_p) / p5 - K_vh z)`.
///
/// Above the free surface (z < 0) the lost displacement `rho_surface * A_wp * |z|`
/// is added, which lets a buoyant vehicle float instead of leaving the water.
pub fn net_buoyancy_mass(z: f64, a: &ActuatorState, cfg: &GliderConfig) -> f64 {
    let hull = cfg.m_s + cfg.m_p;
    let mut dm = a.m_b + hull - cfg.rho(z) * (hull / cfg.rho_surface - cfg.k_vh * z);
    if z < 0.0 {
        dm -= cfg.rho_surface * cfg.waterplane_area * z;
    }
    dm
}

pub fn buoyancy_wrench(state: &GliderState, a: &ActuatorState, cfg: &GliderConfig) -> GeneralizedForce {
    let down = state.q.inverse_transform_vector(&Vec3::z());
    let dm = net_buoyancy_mass(state.p.z, a, cfg);
    let r_p = movable_mass_state(a, cfg).r_p;
    let first_moment = cfg.m_s * cfg.r_s + cfg.m_p * r_p + a.m_b * cfg.r_b();
    GeneralizedForce {
        force: dm * GRAVITY * down,
        moment: GRAVITY * first_moment.cross(&down),
    }
}

/// Body-frame velocity and rate relative to the surrounding water.
pub fn relative_velocity(state: &GliderState, cur: &CurrentSample) -> (Vec3, Vec3) {
    (
        state.v - state.q.inverse_transform_vector(&cur.v_f),
        state.omega - state.q.inverse_transform_vector(&cur.omega_f),
    )
}

pub fn viscous_wrench(
    state: &GliderState,
    cur: &CurrentSample,
    cfg: &GliderConfig,
) -> (GeneralizedForce, HydroForces) {
    let (v_r, omega_r) = relative_velocity(state, cur);
    let flow = flow_angles(&v_r);
    if flow.degenerate {
        return (GeneralizedForce::default(), HydroForces::default());
    }
    let k = &cfg.hydro;
    let v2 = flow.speed * flow.speed;
    let (alpha, beta) = (flow.alpha, flow.beta);
    let (p_r, q_r, r_r) = (omega_r.x, omega_r.y, omega_r.z);

    let (drag, lift) = if cfg.lift_drag_literal {
        ((k.k_d0 + k.k_d * beta * beta) * v2, (k.k_l0 + k.k_l * beta) * v2)
    } else {
        ((k.k_d0 + k.k_d * alpha * alpha) * v2, (k.k_l0 + k.k_l * alpha) * v2)
    };
    let side_force = k.k_beta * beta * v2;
    let pitch_moment = if cfg.tdl2_literal {
        (k.k_m0 + k.k_m * beta * k.k_q * q_r) * v2
    } else {
        (k.k_m0 + k.k_m * alpha + k.k_q * q_r) * v2
    };
    let moment = Vec3::new(
        (k.k_mr * beta + k.k_p * p_r) * v2,
        pitch_moment,
        (k.k_my * beta + k.k_r * r_r) * v2,
    );
    let b_r_v = body_from_velocity_frame(&flow);
    let hydro = HydroForces { drag, side_force, lift, moment };
    let wrench = GeneralizedForce {
        force: b_r_v * Vec3::new(-drag, side_force, -lift),
        moment: b_r_v * moment,
    };
    (wrench, hydro)
}

fn check(term: &'static str, v: &Vec3) -> Result<(), ModelError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite { term })
    }
}

/// Assembles the mass matrix (with added mass on the left) and the right-hand side.
///
/// Second derivatives of the actuator motion are taken as zero and the relative
/// acceleration as equal to the absolute one (steady current).
pub fn dynamics_terms(
    state: &GliderState,
    a: &ActuatorState,
    cur: &CurrentSample,
    cfg: &GliderConfig,
) -> Result<DynamicsTerms, ModelError> {
    let mm = movable_mass_state(a, cfg);
    let (v, w) = (state.v, state.omega);
    let (r_s, r_p, r_p_dot) = (cfg.r_s, mm.r_p, mm.r_p_dot);
    let b1 = Vec3::x();

    let v_s = v + w.cross(&r_s);
    let v_p = v + w.cross(&r_p) + r_p_dot;
    let w_p = w + a.zeta_dot * b1;

    let hull_force = cfg.m_s * v_s.cross(&w);
    // Cross products grouped left to right: r_s x (v x w) + w x (r_s x v).
    let hull_moment = cfg.m_s * (r_s.cross(&v.cross(&w)) + w.cross(&r_s.cross(&v)));
    let hull_gyro = (cfg.j_s * w).cross(&w);
    let mass_force = cfg.m_p * (v_p.cross(&w) + r_p_dot.cross(&w));
    let mass_moment = cfg.m_p * r_p.cross(&(v_p.cross(&w) + r_p_dot.cross(&w)));
    let mass_gyro = (mm.j_p * w_p).cross(&w_p);
    let mass_spin = mm.j_p * (a.zeta_dot * b1).cross(&w);

    let buoyancy = buoyancy_wrench(state, a, cfg);
    let (viscous, hydro) = viscous_wrench(state, cur, cfg);

    for (name, term) in [
        ("hull momentum force", &hull_force),
        ("hull momentum moment", &hull_moment),
        ("hull gyroscopic moment", &hull_gyro),
        ("movable mass force", &mass_force),
        ("movable mass moment", &mass_moment),
        ("movable mass gyroscopic moment", &mass_gyro),
        ("movable mass spin moment", &mass_spin),
        ("buoyancy force", &buoyancy.force),
        ("buoyancy moment", &buoyancy.moment),
        ("viscous force", &viscous.force),
        ("viscous moment", &viscous.moment),
    ] {
        check(name, term)?;
    }

    let force = hull_force + mass_force + buoyancy.force + viscous.force;
    let moment = hull_moment + hull_gyro + mass_moment + mass_gyro + mass_spin
        + buoyancy.moment
        + viscous.moment;
    let rhs = Vector6::new(force.x, force.y, force.z, moment.x, moment.y, moment.z);
    let mass = rigid_mass_matrix(a, cfg) + cfg.added_mass.matrix();
    Ok(DynamicsTerms { mass, rhs, buoyancy, viscous, hydro })
}

/// Solves the equations of motion for the body accelerations.
pub fn dynamics_rhs(
    state: &GliderState,
    a: &ActuatorState,
    cur: &CurrentSample,
    cfg: &GliderConfig,
) -> Result<Accelerations, ModelError> {
    let terms = dynamics_terms(state, a, cur, cfg)?;
    let x = match terms.mass.cholesky() {
        Some(ch) => ch.solve(&terms.rhs),
        None => terms.mass.lu().solve(&terms.rhs).ok_or(ModelError::SingularMassMatrix)?,
    };
    if !x.iter().all(|v| v.is_finite()) {
        return Err(ModelError::SingularMassMatrix);
    }
    Ok(Accelerations {
        v_dot: Vec3::new(x[0], x[1], x[2]),
        omega_dot: Vec3::new(x[3], x[4], x[5]),
    })
}

/// Position and attitude rates: `p_dot = R v`, `q_dot = q * (0, w) / 2`.
pub fn kinematics(state: &GliderState) -> (Vec3, Quaternion<f64>) {
    let p_dot = state.q * state.v;
    let w = state.omega;
    let q_dot = state.q.quaternion() * Quaternion::new(0.0, w.x, w.y, w.z) * 0.5;
    (p_dot, q_dot)
}

/// Kinetic energy `x^T M x / 2` plus gravitational potential, exact when the net
/// heaviness does not depend on depth.
pub fn mechanical_energy(state: &GliderState, a: &ActuatorState, cfg: &GliderConfig) -> f64 {
    let m = rigid_mass_matrix(a, cfg) + cfg.added_mass.matrix();
    let x = Vector6::new(
        state.v.x,
        state.v.y,
        state.v.z,
        state.omega.x,
        state.omega.y,
        state.omega.z,
    );
    let kinetic = 0.5 * x.dot(&(m * x));
    let down = state.q.inverse_transform_vector(&Vec3::z());
    let r_p = movable_mass_state(a, cfg).r_p;
    let first_moment = cfg.m_s * cfg.r_s + cfg.m_p * r_p + a.m_b * cfg.r_b();
    let dm = net_buoyancy_mass(state.p.z, a, cfg);
    let potential = -dm * GRAVITY * state.p.z - GRAVITY * first_moment.dot(&down);
    kinetic + potential
}
