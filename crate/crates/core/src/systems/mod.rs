//! The three model systems and their closed-form constants.

pub mod dissipative;
pub mod lane_emden;
pub mod maxwell_bloch;
pub mod phi;

pub use dissipative::{Dissipative, Potential, PotentialTable};
pub use lane_emden::{LaneEmden, LaneEmdenConstant};
pub use maxwell_bloch::{FirstIntegrals, MaxwellBloch};
pub use phi::phi_quadrature;
