//! Explicit conformal 2-spheres in the 4-sphere and their invariants.
//!
//! The crate constructs the classical families of soliton spheres — round
//! spheres, catenoid cousins and their end-split deformations, Dirac and
//! multi-soliton rotational spheres, and the degree-3 Willmore spheres of
//! energy 16 pi — as explicit conformal immersions `CP^1 -> Im H`, computes
//! their quaternionic-geometric invariants numerically (normals, mean
//! curvature sphere congruence, Hopf fields, Willmore energy by two
//! independent routes), applies Darboux and Baecklund transforms, and checks
//! the integer quantization `W = 4 pi d`, `d` a positive integer outside
//! `{2, 3, 5, 7}`.

pub mod constructions;
pub mod invariants;
pub mod lambda2;
pub mod mesh;
pub mod poly;
pub mod quad;
pub mod quat;
pub mod spec;
pub mod spectral;
pub mod surface;
pub mod transforms;

pub use quat::{QMat2, QVec2, Quaternion};

/// Errors surfaced by constructions and numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("stereographic projection undefined: input sits over the pole")]
    StereographicPole,
    #[error("branch point at chart point ({0}, {1}): |f_x| below threshold")]
    BranchPoint(f64, f64),
    #[error("input is not conformal: residual {0:.3e} exceeds tolerance")]
    NotConformal(f64),
    #[error("quadrature did not converge: worst cell at ({0:.4}, {1:.4}), err {2:.3e}")]
    QuadratureNonConvergence(f64, f64, f64),
    #[error("spectral solver failed: {0}")]
    Spectral(String),
    #[error("one-form is not closed: circulation residual {0:.3e}")]
    NotClosed(f64),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("degenerate span: sphere congruence undefined at z = {0}")]
    DegenerateSpan(num_complex::Complex64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
