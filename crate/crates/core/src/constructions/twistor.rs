//! Willmore spheres from polynomial twistor lifts: a holomorphic curve
//! `phi: C -> C^4` with nondegenerate tangent spans determines a sphere
//! congruence `S(z)` by `S phi = phi i`, `S phi' = phi' i`, and the surfaces
//! `f = e2*(S e1) + c` or `f = <a, S a> + c` are Willmore.

use crate::lambda2::{lambda2_pairing, omega_sharp, wedge, C4, Lambda2Element};
use crate::poly::Poly;
use crate::quat::{HermitianForm2, QMat2, QVec2, Quaternion};
use crate::surface::SurfaceMap;
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

type C = Complex64;

/// Polynomial curve into `C^4` (basis `{e1, e1j, e2, e2j}`) with its first
/// two derivatives and the tangent line congruence `S_hat = phi /\ phi'`.
#[derive(Debug, Clone)]
pub struct TwistorLift {
    pub phi: [Poly; 4],
    pub dphi: [Poly; 4],
    pub ddphi: [Poly; 4],
}

impl TwistorLift {
    pub fn new(phi: [Poly; 4]) -> Self {
        let dphi = [
            phi[0].derivative(),
            phi[1].derivative(),
            phi[2].derivative(),
            phi[3].derivative(),
        ];
        let ddphi = [
            dphi[0].derivative(),
            dphi[1].derivative(),
            dphi[2].derivative(),
            dphi[3].derivative(),
        ];
        TwistorLift { phi, dphi, ddphi }
    }

    /// The degree-3 lift of the energy-16pi family:
    /// `phi = e1 z + e1j z^3/6 - e2 + e2j z^2/2`.
    pub fn energy_16pi() -> Self {
        let c = |x: f64| C::new(x, 0.0);
        TwistorLift::new([
            Poly::monomial(c(1.0), 1),
            Poly::monomial(c(1.0 / 6.0), 3),
            Poly::constant(c(-1.0)),
            Poly::monomial(c(0.5), 2),
        ])
    }

    /// The lift with `phi` shifted by `e2 j * s z` (end deformations of the
    /// 16pi family).
    pub fn energy_16pi_shifted(s: f64) -> Self {
        let base = Self::energy_16pi();
        let mut phi = base.phi;
        phi[3] = phi[3].add(&Poly::monomial(C::new(s, 0.0), 1));
        TwistorLift::new(phi)
    }

    pub fn eval_phi(&self, z: C) -> C4 {
        C4([
            self.phi[0].eval(z),
            self.phi[1].eval(z),
            self.phi[2].eval(z),
            self.phi[3].eval(z),
        ])
    }

    pub fn eval_dphi(&self, z: C) -> C4 {
        C4([
            self.dphi[0].eval(z),
            self.dphi[1].eval(z),
            self.dphi[2].eval(z),
            self.dphi[3].eval(z),
        ])
    }

    pub fn eval_ddphi(&self, z: C) -> C4 {
        C4([
            self.ddphi[0].eval(z),
            self.ddphi[1].eval(z),
            self.ddphi[2].eval(z),
            self.ddphi[3].eval(z),
        ])
    }

    /// Tangent line congruence `S_hat = phi /\ phi'` in the `ehat` basis.
    pub fn s_hat(&self, z: C) -> Lambda2Element {
        wedge(self.eval_phi(z), self.eval_dphi(z))
    }

    /// `S_hat' = phi /\ phi''`.
    pub fn s_hat_prime(&self, z: C) -> Lambda2Element {
        wedge(self.eval_phi(z), self.eval_ddphi(z))
    }

    /// Null-curve residuals `(S/\S, S/\S', S'/\S')` normalized by the element
    /// sizes; all three vanish for a holomorphic curve in the quadric.
    pub fn null_residuals(&self, z: C) -> [f64; 3] {
        let s = self.s_hat(z);
        let sp = self.s_hat_prime(z);
        let n1 = s.norm().max(1e-300);
        let n2 = sp.norm().max(1e-300);
        [
            lambda2_pairing(s, s).norm() / (n1 * n1),
            lambda2_pairing(s, sp).norm() / (n1 * n2),
            lambda2_pairing(sp, sp).norm() / (n2 * n2),
        ]
    }

    /// Pairing of the tangent congruence with the polar vector of a Hermitian
    /// form, normalized; zero means superminimal for that form.
    pub fn polarity_residual(&self, form: HermitianForm2, z: C) -> f64 {
        let s = self.s_hat(z);
        lambda2_pairing(s, omega_sharp(form)).norm() / s.norm().max(1e-300)
    }

    /// The sphere congruence at `z`: the quaternionic endomorphism whose
    /// `i`-eigenspace is `span{phi, phi'}`, solved from the real 8x8 system
    /// `S v = v i` on the span (realified as a complex 4x4 inverse).
    /// Errors when the span degenerates (condition number above 1e8).
    pub fn sphere_congruence(&self, z: C) -> Result<(QMat2, QMat2, QMat2)> {
        let phi = self.eval_phi(z);
        let dphi = self.eval_dphi(z);
        let ddphi = self.eval_ddphi(z);
        // unit column scales keep the system well conditioned at large |z|;
        // diagonal scalings commute with D, so S and its derivatives are
        // unchanged
        let s1 = 1.0 / phi.norm().max(1e-300);
        let s2 = 1.0 / dphi.norm().max(1e-300);
        let phi_n = phi.scale(C::new(s1, 0.0));
        let dphi_n = dphi.scale(C::new(s2, 0.0));
        let m = Mat4::from_columns([phi_n, dphi_n, phi_n.mul_j(), dphi_n.mul_j()]);
        let (minv, cond) = m.inverse().map_err(|_| Error::DegenerateSpan(z))?;
        if cond > 1e8 {
            return Err(Error::DegenerateSpan(z));
        }
        let i = C::new(0.0, 1.0);
        let d = [i, i, -i, -i];
        let mut s = Mat4::zero();
        for row in 0..4 {
            for col in 0..4 {
                let mut acc = C::new(0.0, 0.0);
                for k in 0..4 {
                    acc += m.0[row][k] * d[k] * minv.0[k][col];
                }
                s.0[row][col] = acc;
            }
        }
        // The map z -> M(z) is not holomorphic (the j-columns conjugate), so
        // the two real partials use M_x = [phi', phi'', C phi', C phi''] and
        // M_y = M_x D:
        //   S_x = (M_x D - S M_x) M^{-1},  S_y = (-M_x - S M_x D) M^{-1}.
        let dphi_s = dphi.scale(C::new(s1, 0.0));
        let ddphi_s = ddphi.scale(C::new(s2, 0.0));
        let mx = Mat4::from_columns([dphi_s, ddphi_s, dphi_s.mul_j(), ddphi_s.mul_j()]);
        let mut rhs_x = Mat4::zero();
        let mut rhs_y = Mat4::zero();
        for row in 0..4 {
            for col in 0..4 {
                let mut sx = mx.0[row][col] * d[col];
                let mut sy = -mx.0[row][col];
                for k in 0..4 {
                    sx -= s.0[row][k] * mx.0[k][col];
                    sy -= s.0[row][k] * mx.0[k][col] * d[col];
                }
                rhs_x.0[row][col] = sx;
                rhs_y.0[row][col] = sy;
            }
        }
        let mul = |a: &Mat4, b: &Mat4| -> Mat4 {
            let mut out = Mat4::zero();
            for row in 0..4 {
                for col in 0..4 {
                    let mut acc = C::new(0.0, 0.0);
                    for k in 0..4 {
                        acc += a.0[row][k] * b.0[k][col];
                    }
                    out.0[row][col] = acc;
                }
            }
            out
        };
        let sp_x = mul(&rhs_x, &minv);
        let sp_y = mul(&rhs_y, &minv);
        let (sq, res) = s.to_quaternionic();
        if res > 1e-8 {
            return Err(Error::Validation(format!(
                "sphere congruence is not quaternionic: residual {res:.3e} at z = {z}"
            )));
        }
        let (sq_x, _) = sp_x.to_quaternionic_raw();
        let (sq_y, _) = sp_y.to_quaternionic_raw();
        Ok((sq, sq_x, sq_y))
    }

    /// Affine map of the twistor projection: the curve `[phi] in HP^1` read
    /// in the standard chart, `g = (phi1 + j phi2)(phi3 + j phi4)^{-1}`.
    pub fn projected_curve(&self) -> SurfaceMap {
        let lift = self.clone();
        let lift2 = self.clone();
        let eval = move |z: C| {
            let p = lift.eval_phi(z).0;
            let top = Quaternion::from_split(p[0], p[1]);
            let bot = Quaternion::from_split(p[2], p[3]);
            top * bot.inv()
        };
        let partials = move |z: C| {
            let p = lift2.eval_phi(z).0;
            let dp = lift2.eval_dphi(z).0;
            let top = Quaternion::from_split(p[0], p[1]);
            let bot = Quaternion::from_split(p[2], p[3]);
            let binv = bot.inv();
            let f = top * binv;
            let i = C::new(0.0, 1.0);
            let mut out = [Quaternion::default(); 2];
            for (slot, dir) in [(0usize, C::new(1.0, 0.0)), (1usize, i)] {
                let dtop = Quaternion::from_split(dp[0] * dir, dp[1] * dir);
                let dbot = Quaternion::from_split(dp[2] * dir, dp[3] * dir);
                out[slot] = (dtop - f * dbot) * binv;
            }
            (out[0], out[1])
        };
        SurfaceMap::exact(eval, partials)
    }
}

/// How to read a surface off the sphere congruence.
#[derive(Debug, Clone, Copy)]
pub enum OutputRecipe {
    /// `f = e2*(S e1) + c`.
    E2StarE1 { c: Quaternion },
    /// `f = <a, S a> + c` with the indefinite form whose null set is
    /// `Im H + infinity`; lands in `Im H` whenever `S` is skew for the form.
    Hermitian { a: QVec2, c: Quaternion },
}

/// A Willmore sphere assembled from a twistor lift.
pub struct WillmoreTwistor {
    pub lift: Arc<TwistorLift>,
    pub recipe: OutputRecipe,
    /// The Willmore surface itself.
    pub surface: SurfaceMap,
    /// The twistor-holomorphic curve the congruence belongs to, in the same
    /// affine chart (its Hopf field `A` vanishes).
    pub curve: SurfaceMap,
    /// Whether `<a, a> = 0` held for the Hermitian recipe.
    pub null_input: bool,
}

/// Builds the Willmore surface of a twistor lift. The span `{phi, phi'}` must
/// stay nondegenerate on the sample set; the Hermitian recipe additionally
/// enforces `Im H`-valuedness (residual below 1e-9).
pub fn willmore_twistor(lift: TwistorLift, recipe: OutputRecipe) -> Result<WillmoreTwistor> {
    let lift = Arc::new(lift);
    // degeneracy scan
    for k in 0..64 {
        let z = C::from_polar(0.1 + 0.03 * k as f64, 0.47 * k as f64);
        lift.sphere_congruence(z)?;
    }
    let mut null_input = true;
    if let OutputRecipe::Hermitian { a, c } = &recipe {
        let paired = HermitianForm2::Minkowski.pair(*a, *a);
        null_input = paired.norm() < 1e-12;
        if c.re.abs() > 1e-12 {
            return Err(Error::Validation("offset c must lie in Im H".into()));
        }
    }
    let surface = congruence_surface(lift.clone(), recipe);
    // Im H check for the Hermitian recipe
    if matches!(recipe, OutputRecipe::Hermitian { .. }) {
        let res = super::imaginary_part_residual(&surface, 100);
        if res > 1e-9 {
            return Err(Error::Validation(format!(
                "Hermitian recipe did not produce an Im H surface: residual {res:.3e}"
            )));
        }
    }
    let curve = lift.projected_curve();
    Ok(WillmoreTwistor { lift, recipe, surface, curve, null_input })
}

fn congruence_surface(lift: Arc<TwistorLift>, recipe: OutputRecipe) -> SurfaceMap {
    let read = move |s: &QMat2| -> Quaternion {
        match &recipe {
            OutputRecipe::E2StarE1 { c } => s.c + *c,
            OutputRecipe::Hermitian { a, c } => {
                let sa = s.apply(*a);
                HermitianForm2::Minkowski.pair(*a, sa) + *c
            }
        }
    };
    let lift_eval = lift.clone();
    let read_eval = read.clone();
    let eval = move |z: C| {
        let (s, _, _) = lift_eval
            .sphere_congruence(z)
            .unwrap_or_else(|_| (QMat2::zero(), QMat2::zero(), QMat2::zero()));
        read_eval(&s)
    };
    let offset = match recipe {
        OutputRecipe::E2StarE1 { c } => c,
        OutputRecipe::Hermitian { c, .. } => c,
    };
    let partials = move |z: C| {
        let (_, sx, sy) = lift
            .sphere_congruence(z)
            .unwrap_or_else(|_| (QMat2::zero(), QMat2::zero(), QMat2::zero()));
        (read(&sx) - offset, read(&sy) - offset)
    };
    SurfaceMap::exact(eval, partials)
}

/// Small dense complex 4x4 helper.
#[derive(Debug, Clone, Copy)]
struct Mat4([[C; 4]; 4]);

impl Mat4 {
    fn zero() -> Self {
        Mat4([[C::new(0.0, 0.0); 4]; 4])
    }

    fn from_columns(cols: [C4; 4]) -> Self {
        let mut m = Self::zero();
        for (c, col) in cols.iter().enumerate() {
            for r in 0..4 {
                m.0[r][c] = col.0[r];
            }
        }
        m
    }

    fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Gaussian elimination with partial pivoting; returns the inverse and a
    /// Frobenius condition estimate.
    fn inverse(&self) -> Result<(Mat4, f64)> {
        let mut a = self.0;
        let mut inv = Mat4::zero().0;
        for (r, row) in inv.iter_mut().enumerate() {
            row[r] = C::new(1.0, 0.0);
        }
        for col in 0..4 {
            let mut piv = col;
            for r in col + 1..4 {
                if a[r][col].norm() > a[piv][col].norm() {
                    piv = r;
                }
            }
            if a[piv][col].norm() < 1e-14 * self.frobenius().max(1e-300) {
                return Err(Error::SingularMatrix);
            }
            a.swap(col, piv);
            inv.swap(col, piv);
            let d = a[col][col].inv();
            for k in 0..4 {
                a[col][k] *= d;
                inv[col][k] *= d;
            }
            for r in 0..4 {
                if r != col {
                    let f = a[r][col];
                    if f.norm() == 0.0 {
                        continue;
                    }
                    for k in 0..4 {
                        let s = a[col][k];
                        a[r][k] -= f * s;
                        let s = inv[col][k];
                        inv[r][k] -= f * s;
                    }
                }
            }
        }
        let minv = Mat4(inv);
        let cond = self.frobenius() * minv.frobenius();
        Ok((minv, cond))
    }

    /// Interprets the matrix as a quaternionic 2x2 acting on
    /// `(a1, b1, a2, b2)` coordinates; returns the matrix and the residual of
    /// the quaternionic-structure consistency conditions.
    fn to_quaternionic(&self) -> (QMat2, f64) {
        let (q, res) = self.to_quaternionic_raw();
        (q, res)
    }

    fn to_quaternionic_raw(&self) -> (QMat2, f64) {
        let mut entries = [[Quaternion::default(); 2]; 2];
        let mut res: f64 = 0.0;
        let scale = self.frobenius().max(1e-300);
        for bm in 0..2 {
            for bn in 0..2 {
                let p = self.0[2 * bm][2 * bn];
                let q = self.0[2 * bm][2 * bn + 1];
                let r = self.0[2 * bm + 1][2 * bn];
                let s = self.0[2 * bm + 1][2 * bn + 1];
                // left multiplication by alpha + j beta has block
                // [[alpha, -conj beta], [beta, conj alpha]]
                entries[bm][bn] = Quaternion::from_split(p, r);
                res = res.max((s - p.conj()).norm().max((q + r.conj()).norm()) / scale);
            }
        }
        (
            QMat2::new(entries[0][0], entries[0][1], entries[1][0], entries[1][1]),
            res,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda2::quadric_stereographic;
    use crate::quat::{ONE, ZERO};
    use crate::surface::{sample_disk_points, ChartPoint};

    fn sample_zs(n: usize) -> Vec<C> {
        (0..n)
            .map(|k| C::from_polar(0.15 + 1.1 * (k as f64 / n as f64), 0.37 * k as f64))
            .collect()
    }

    #[test]
    fn tangent_congruence_matches_closed_form() {
        let lift = TwistorLift::energy_16pi();
        for z in sample_zs(40) {
            let s = lift.s_hat(z);
            let z2 = z * z;
            let z3 = z2 * z;
            let z4 = z2 * z2;
            let i = C::new(0.0, 1.0);
            let expect = Lambda2Element([
                C::new(0.0, 0.0),
                -i * z2 * 0.5,
                (C::new(12.0, 0.0) - z4) / 24.0,
                (-i * 12.0 - i * z4) / 24.0,
                z3 / 3.0,
                -z,
            ]);
            assert!(s.sub(expect).norm() < 1e-12 * expect.norm().max(1.0), "z = {z}");
        }
    }

    #[test]
    fn null_curve_residuals_vanish() {
        let lift = TwistorLift::energy_16pi();
        for z in sample_zs(100) {
            let res = lift.null_residuals(z);
            for r in res {
                assert!(r < 1e-10, "null residual {r:.3e} at z = {z}");
            }
        }
    }

    #[test]
    fn polar_to_e1_for_the_16pi_family() {
        for lift in [TwistorLift::energy_16pi(), TwistorLift::energy_16pi_shifted(3.0)] {
            for z in sample_zs(100) {
                let r = lift.polarity_residual(HermitianForm2::Minkowski, z);
                assert!(r < 1e-10, "polarity residual {r:.3e}");
            }
        }
    }

    #[test]
    fn sphere_congruence_squares_to_minus_one() {
        let lift = TwistorLift::energy_16pi();
        for z in sample_zs(50) {
            let (s, _, _) = lift.sphere_congruence(z).unwrap();
            let r = s.mul(s).add(QMat2::identity()).norm();
            assert!(r < 1e-10, "S^2 + 1 = {r:.3e} at z = {z}");
            // S phi = phi i as quaternionic vectors
            let phi = lift.eval_phi(z).to_qvec();
            let lhs = s.apply(phi);
            let rhs = phi.scale_right(crate::quat::I);
            assert!(
                lhs.projective_distance(rhs) < 1e-10,
                "eigencondition fails at z = {z}"
            );
        }
    }

    #[test]
    fn stereographic_projection_recovers_inverse_surface() {
        // Im(sigma(S_hat)) = f^{-1} with f = e2*(S e1)
        let lift = TwistorLift::energy_16pi();
        for z in sample_zs(25) {
            let s_hat = lift.s_hat(z);
            let stereo = quadric_stereographic(s_hat).unwrap();
            let (s, _, _) = lift.sphere_congruence(z).unwrap();
            let f = s.c; // e2*(S e1)
            let err = (stereo.imag - f.inv()).norm();
            assert!(err < 1e-9 * f.inv().norm().max(1.0), "z = {z}: err {err:.3e}");
        }
    }

    #[test]
    fn hermitian_surfaces_land_in_im_h() {
        let lift = TwistorLift::energy_16pi();
        let a1 = QVec2::new(ZERO, ONE + crate::quat::J);
        let a2 = QVec2::new(-ONE, ONE);
        for a in [a1, a2] {
            let wt = willmore_twistor(
                lift.clone(),
                OutputRecipe::Hermitian { a, c: Quaternion::default() },
            )
            .unwrap();
            let res = super::super::imaginary_part_residual(&wt.surface, 200);
            assert!(res < 1e-9, "Re residual {res:.3e}");
            for pt in sample_disk_points(100, 21) {
                let fr = wt.surface.frame(pt).unwrap();
                assert!(
                    fr.conformality_residual() < 1e-7,
                    "conformality {:.3e} at {:?}",
                    fr.conformality_residual(),
                    pt
                );
            }
        }
    }

    #[test]
    fn projected_curve_is_twistor_holomorphic() {
        let lift = TwistorLift::energy_16pi();
        let wt = willmore_twistor(
            lift,
            OutputRecipe::Hermitian {
                a: QVec2::new(ZERO, ONE + crate::quat::J),
                c: Quaternion::default(),
            },
        )
        .unwrap();
        for pt in sample_disk_points(40, 22) {
            let Ok(fr) = wt.curve.frame(pt) else { continue };
            let scale = fr.fx.norm().max(1e-12);
            assert!(fr.drpp_x.norm() / scale < 1e-6, "dR'' = {:.3e}", fr.drpp_x.norm() / scale);
            assert!(fr.a_x.norm() < 1e-6, "A = {:.3e}", fr.a_x.norm());
        }
    }

    #[test]
    fn congruence_matches_kernel_route_on_projected_curve() {
        let lift = TwistorLift::energy_16pi();
        let curve = lift.projected_curve();
        for z in sample_zs(20) {
            let (s_twistor, _, _) = lift.sphere_congruence(z).unwrap();
            let s_kernel = curve.sphere_congruence(ChartPoint::z(z)).unwrap();
            let d_plus = s_kernel.sub(s_twistor).norm();
            let d_minus = s_kernel.add(s_twistor).norm();
            let d = d_plus.min(d_minus) / s_twistor.norm().max(1e-12);
            assert!(d < 1e-6, "congruence mismatch {d:.3e} at z = {z}");
        }
    }

    #[test]
    fn exact_partials_match_numeric() {
        let lift = TwistorLift::energy_16pi();
        let wt = willmore_twistor(
            lift,
            OutputRecipe::Hermitian {
                a: QVec2::new(-ONE, ONE),
                c: Quaternion::default(),
            },
        )
        .unwrap();
        for pt in sample_disk_points(50, 23) {
            let (ex, ey) = wt.surface.partials(pt);
            let (nx, ny) = wt.surface.partials_numeric(pt);
            assert!((ex - nx).norm() < 1e-6 * ex.norm().max(1.0));
            assert!((ey - ny).norm() < 1e-6 * ey.norm().max(1.0));
        }
    }
}
