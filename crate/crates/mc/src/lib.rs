//! Monte Carlo checks of symbolic order predictions: exact split flows of
//! affine systems, Brownian paths, convergence slopes and pathwise checks
//! of canonical iterated-integral forms.

pub mod brownian;
pub mod estimate;
pub mod field;
pub mod integrate;
pub mod iterated;
pub mod system;
