//! Numerical building blocks: root finding, quadrature, ODE integration and
//! exact sign tests.

pub mod exact;
pub mod ode;
pub mod quad;
pub mod roots;
