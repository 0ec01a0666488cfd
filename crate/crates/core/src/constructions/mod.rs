//! The explicit surface families: the round sphere, catenoid cousins and
//! their end-split deformations, Dirac and multi-soliton rotational spheres,
//! and the degree-3 Willmore spheres of energy 16 pi.

mod bryant;
mod spin;
mod twistor;

pub use bryant::{
    bryant_surface, catenoid_cousin, deform_ends, hyperbolic_gauss, hyperbolic_gauss_surface,
    imaginary_part_residual, CatenoidCousin, HyperbolicGauss, NullCurveQ3, SlNullImmersion,
};
pub use spin::{
    dirac_sphere, spin_combine, taimanov_sphere, SpinSurface, TaimanovFamily,
};
pub use twistor::{willmore_twistor, OutputRecipe, TwistorLift, WillmoreTwistor};

use crate::quat::Quaternion;
use crate::surface::SurfaceMap;
use num_complex::Complex64;

/// Inverse stereographic projection onto the unit sphere in Im H:
/// `f(z) = (2 Re z i - 2 Im z j + (|z|^2 - 1) k) / (1 + |z|^2)`.
///
/// Totally umbilic with `|H| = 1` and `W = 4 pi`; the orientation is chosen
/// so that `N(0) = R(0) = -k`.
pub fn round_sphere() -> SurfaceMap {
    let eval = |z: Complex64| {
        let d = 1.0 + z.norm_sqr();
        Quaternion::from_imag(2.0 * z.re / d, -2.0 * z.im / d, (z.norm_sqr() - 1.0) / d)
    };
    let partials = |z: Complex64| {
        let (x, y) = (z.re, z.im);
        let d = 1.0 + x * x + y * y;
        let d2 = d * d;
        // closed-form partials of the components
        let fx = Quaternion::from_imag(
            2.0 * (d - 2.0 * x * x) / d2,
            4.0 * x * y / d2,
            4.0 * x / d2,
        );
        let fy = Quaternion::from_imag(
            -4.0 * x * y / d2,
            -2.0 * (d - 2.0 * y * y) / d2,
            4.0 * y / d2,
        );
        (fx, fy)
    };
    SurfaceMap::exact(eval, partials)
}

/// Enneper's minimal surface from the holomorphic data `(g, eta) = (z, dz)`:
/// `f = Re(z - z^3/3) i + Im(z + z^3/3) j + Re(z^2) k`.
///
/// Euclidean minimal (`H = 0`); used as the minimal-input test surface. Only
/// a patch: the map is not conformal at the `w`-chart scale, so tests confine
/// themselves to the `z` chart.
pub fn enneper_patch() -> SurfaceMap {
    let eval = |z: Complex64| {
        let z3 = z * z * z;
        let a = z - z3 / 3.0;
        let b = z + z3 / 3.0;
        let c = z * z;
        Quaternion::from_imag(a.re, b.im, c.re)
    };
    let partials = |z: Complex64| {
        let dz2 = z * z;
        let da = Complex64::new(1.0, 0.0) - dz2;
        let db = Complex64::new(1.0, 0.0) + dz2;
        let dc = 2.0 * z;
        // components are harmonic; partials via holomorphic derivatives
        let fx = Quaternion::from_imag(da.re, db.im, dc.re);
        let fy = Quaternion::from_imag(-da.im, db.re, -dc.im);
        (fx, fy)
    };
    SurfaceMap::exact(eval, partials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::ChartPoint;

    #[test]
    fn round_sphere_lands_on_unit_sphere() {
        let s = round_sphere();
        for k in 0..50 {
            let z = Complex64::from_polar(0.1 + 0.04 * k as f64, 0.37 * k as f64);
            let f = s.eval(ChartPoint::z(z));
            assert!(f.re.abs() < 1e-15);
            assert!((f.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn enneper_partials_match_numeric() {
        let s = enneper_patch();
        for k in 0..20 {
            let z = Complex64::from_polar(0.1 + 0.03 * k as f64, 0.71 * k as f64);
            let (ex, ey) = s.partials(ChartPoint::z(z));
            let (nx, ny) = s.partials_numeric(ChartPoint::z(z));
            assert!((ex - nx).norm() < 1e-7);
            assert!((ey - ny).norm() < 1e-7);
        }
    }
}
