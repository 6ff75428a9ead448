//! Assembly of the modal equations of motion.
//!
//! The curvature coefficients obey
//! `M(c) c_ddot + N(c, c_dot) c_dot + dV/dc = kappa`, where the generalized
//! force `kappa` collects capstan torques mapped through the winch Jacobian,
//! an optional external contact, and the tendon friction drop. This module
//! evaluates every term at a state and solves for the acceleration.

use nalgebra::{Cholesky, Matrix6, Vector2, Vector6};

use super::model::SegmentModelT;
use super::{SegmentStateT, WrenchT};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// External load applied to the segment, if any.
#[derive(Debug, Clone)]
pub enum ContactInput<T: Real> {
    /// No external load.
    None,
    /// Wrench expressed in the cross-section frame at arclength `location`.
    Wrench { wrench: WrenchT<T>, location: T },
    /// Load already reduced to a generalized force on the coefficients.
    Generalized(Vector6<T>),
}

impl<T: Real> ContactInput<T> {
    /// Generalized force contributed by this input at coefficients `c`.
    pub fn generalized(&self, model: &SegmentModelT<T>, c: &Vector6<T>) -> Result<Vector6<T>> {
        match self {
            ContactInput::None => Ok(Vector6::zeros()),
            ContactInput::Wrench { wrench, location } => {
                let jacobian = model.body_jacobian(c, *location)?;
                Ok(jacobian.transpose() * wrench.to_vector())
            }
            ContactInput::Generalized(force) => Ok(*force),
        }
    }
}

/// Every term of the equations of motion evaluated at one state.
#[derive(Debug, Clone)]
pub struct ModelEval<T: Real> {
    /// Generalized mass matrix `M(c)`.
    pub mass: Matrix6<T>,
    /// Coriolis/centrifugal matrix `N(c, c_dot)`.
    pub coriolis: Matrix6<T>,
    /// Gradient of the elastic plus gravitational potential.
    pub potential_gradient: Vector6<T>,
    /// Generalized tendon-friction force (enters with a minus sign).
    pub friction: Vector6<T>,
    /// Capstan torques mapped onto the coefficients.
    pub actuation: Vector6<T>,
    /// External contact mapped onto the coefficients.
    pub contact: Vector6<T>,
}

impl<T: Real> ModelEval<T> {
    /// Net generalized force on the right-hand side of the dynamics.
    pub fn generalized_force(&self) -> Vector6<T> {
        self.actuation + self.contact - self.friction
    }

    /// Solves `M c_ddot = kappa - N c_dot - dV/dc` for the acceleration.
    pub fn acceleration(&self, c_dot: &Vector6<T>) -> Result<Vector6<T>> {
        let rhs = self.generalized_force() - self.coriolis * c_dot - self.potential_gradient;
        let chol = Cholesky::new(self.mass).ok_or_else(|| {
            Error::InvalidParams("mass matrix is not positive definite".into())
        })?;
        Ok(chol.solve(&rhs))
    }
}

impl<T: Real> SegmentModelT<T> {
    /// Evaluates every dynamics term at `state` under torques `tau`.
    pub fn evaluate(
        &self,
        state: &SegmentStateT<T>,
        tau: &Vector2<T>,
        contact: &ContactInput<T>,
    ) -> Result<ModelEval<T>> {
        let sweep = self.sweep(&state.c)?;
        let mass = self.mass_matrix_from_sweep(&sweep);
        let partials = self.mass_matrix_partials_about(&state.c, &mass)?;
        let coriolis = super::coriolis::assemble_christoffel(&partials, &state.c_dot);
        let potential_gradient = self.potential_gradient_from_sweep(&state.c, &sweep);
        let friction = self.friction_generalized_force(&sweep, &state.c_dot, tau)?;
        let actuation = self.capstan_map().transpose() * tau;
        let contact = contact.generalized(self, &state.c)?;
        Ok(ModelEval {
            mass,
            coriolis,
            potential_gradient,
            friction,
            actuation,
            contact,
        })
    }

    /// Coefficient acceleration at `state` under torques `tau`.
    pub fn forward_dynamics(
        &self,
        state: &SegmentStateT<T>,
        tau: &Vector2<T>,
        contact: &ContactInput<T>,
    ) -> Result<Vector6<T>> {
        self.evaluate(state, tau, contact)?.acceleration(&state.c_dot)
    }
}
