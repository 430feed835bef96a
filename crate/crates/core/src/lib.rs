//! Pseudo-spectral simulation of the 3D viscous primitive equations on a
//! periodic box, and discrete data assimilation from finitely many scalar
//! observations taken at discrete times.

pub mod assimilation;
pub mod cli;
pub mod fit;
pub mod functionals;
pub mod integrate;
pub mod model;
pub mod spectral;
