//! The second exterior power of (H^2, i) = C^4 and its null quadric.
//!
//! Vectors of H^2 become complex 4-vectors in the ordered basis
//! `{e1, e1 j, e2, e2 j}` (right multiplication by i is the complex
//! structure). Wedges of such vectors live in a 6-dimensional space with the
//! real basis `ehat1..ehat6`; the wedge square endows it with a complex
//! bilinear pairing whose zero set is the 4-quadric of decomposable elements.
//! Tangent line congruences of twistor lifts land here, and a stereographic
//! projection of the quadric recovers affine surface data.

use crate::quat::{QVec2, Quaternion};
use crate::Error;
use num_complex::Complex64;

type C = Complex64;

/// Complex coordinates of a vector of `(H^2, i)` in the basis `{e1, e1j, e2, e2j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C4(pub [C; 4]);

impl C4 {
    pub fn from_qvec(v: QVec2) -> Self {
        let (a1, b1) = v.x1.complex_split();
        let (a2, b2) = v.x2.complex_split();
        C4([a1, b1, a2, b2])
    }

    pub fn to_qvec(self) -> QVec2 {
        QVec2::new(
            Quaternion::from_split(self.0[0], self.0[1]),
            Quaternion::from_split(self.0[2], self.0[3]),
        )
    }

    /// Right multiplication by j, an antilinear map with square -1:
    /// `(a1, b1, a2, b2) -> (-conj b1, conj a1, -conj b2, conj a2)`.
    pub fn mul_j(self) -> Self {
        let [a1, b1, a2, b2] = self.0;
        C4([-b1.conj(), a1.conj(), -b2.conj(), a2.conj()])
    }

    pub fn scale(self, s: C) -> Self {
        C4([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    pub fn add(self, o: Self) -> Self {
        C4([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }

    pub fn norm(self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Element of the second exterior power in the real basis `ehat1..ehat6`.
///
/// With `E_mn = E_m /\ E_n` for the basis above:
/// `ehat1 = E14 - E23`, `ehat2 = (E14 + E23) i`, `ehat3 = E13 + E24`,
/// `ehat4 = (E13 - E24) i`, `ehat5 = E12`, `ehat6 = E34`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda2Element(pub [C; 6]);

impl Lambda2Element {
    pub fn zero() -> Self {
        Lambda2Element([C::new(0.0, 0.0); 6])
    }

    pub fn basis(idx: usize) -> Self {
        let mut e = Self::zero();
        e.0[idx] = C::new(1.0, 0.0);
        e
    }

    pub fn add(self, o: Self) -> Self {
        let mut out = [C::new(0.0, 0.0); 6];
        for m in 0..6 {
            out[m] = self.0[m] + o.0[m];
        }
        Lambda2Element(out)
    }

    pub fn sub(self, o: Self) -> Self {
        let mut out = [C::new(0.0, 0.0); 6];
        for m in 0..6 {
            out[m] = self.0[m] - o.0[m];
        }
        Lambda2Element(out)
    }

    pub fn scale(self, s: C) -> Self {
        let mut out = self.0;
        for c in &mut out {
            *c *= s;
        }
        Lambda2Element(out)
    }

    pub fn norm(self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Antisymmetric coordinates `(x /\ y)_{mn}`, m < n, in the order
    /// `12, 13, 14, 23, 24, 34`: expand `x = sum c_m ehat_m` through the
    /// `ehat` definitions.
    fn to_emn(self) -> [C; 6] {
        let [c1, c2, c3, c4, c5, c6] = self.0;
        let i = C::new(0.0, 1.0);
        let e14 = c1 + i * c2;
        let e23 = -c1 + i * c2;
        let e13 = c3 + i * c4;
        let e24 = c3 - i * c4;
        [c5, e13, e14, e23, e24, c6]
    }

    fn from_emn(e: [C; 6]) -> Self {
        let [e12, e13, e14, e23, e24, e34] = e;
        let i = C::new(0.0, 1.0);
        Lambda2Element([
            (e14 - e23) * C::new(0.5, 0.0),
            (e14 + e23) * (-i) * C::new(0.5, 0.0),
            (e13 + e24) * C::new(0.5, 0.0),
            (e13 - e24) * (-i) * C::new(0.5, 0.0),
            e12,
            e34,
        ])
    }
}

/// Wedge product of two vectors of C^4, expressed in the `ehat` basis.
/// Complex bilinear and alternating.
pub fn wedge(v: C4, w: C4) -> Lambda2Element {
    let mut e = [C::new(0.0, 0.0); 6];
    let pairs = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    for (slot, (m, n)) in pairs.iter().enumerate() {
        e[slot] = v.0[*m] * w.0[*n] - v.0[*n] * w.0[*m];
    }
    Lambda2Element::from_emn(e)
}

/// Coefficient of the volume form `E1/\E2/\E3/\E4` in `x /\ y`, computed from
/// the antisymmetric coordinates. This is the independent oracle behind the
/// pairing below.
pub fn wedge4_volume_coefficient(x: Lambda2Element, y: Lambda2Element) -> C {
    let a = x.to_emn();
    let b = y.to_emn();
    // order: 12, 13, 14, 23, 24, 34; vol coefficients of E_ab /\ E_cd:
    // 12/\34: +1, 13/\24: -1, 14/\23: +1 (and symmetric counterparts)
    a[0] * b[5] + a[5] * b[0] - (a[1] * b[4] + a[4] * b[1]) + (a[2] * b[3] + a[3] * b[2])
}

/// Symmetric complex bilinear pairing defined by `<x,y> ehat5 /\ ehat6 = x /\ y`.
///
/// `ehat5 /\ ehat6 = E1/\E2/\E3/\E4`, so the pairing equals the volume
/// coefficient of the wedge. The Gram matrix in the `ehat` basis is
/// `diag(-2,-2,-2,-2)` on `ehat1..ehat4` plus the off-diagonal unit block on
/// `(ehat5, ehat6)`.
pub fn lambda2_pairing(x: Lambda2Element, y: Lambda2Element) -> C {
    let a = x.0;
    let b = y.0;
    let m2 = C::new(-2.0, 0.0);
    m2 * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]) + a[4] * b[5] + a[5] * b[4]
}

/// Wedge square `<x,x>`; vanishes exactly on the quadric of decomposable
/// elements.
pub fn quadric_residual(x: Lambda2Element) -> C {
    lambda2_pairing(x, x)
}

/// Result of stereographically projecting a quadric point from the pole
/// `[ehat5]` onto the affine tangent space at `[ehat6]`.
#[derive(Debug, Clone, Copy)]
pub struct QuadricStereo {
    /// Coordinates of the projected point in `span{ehat1..ehat4}`
    /// (the `ehat5`, `ehat6` slots of the returned element are zero).
    pub affine: Lambda2Element,
    /// Imaginary part read as a quaternion via `ehat1 i -> 1`, `ehat2 i -> i`,
    /// `ehat3 i -> j`, `ehat4 i -> k`.
    pub imag: Quaternion,
}

/// Affine stereographic projection of the quadric with pole `[ehat5]`:
/// `sigma(S) = (S - <S, ehat6> ehat5) <S, ehat5>^{-1} - ehat6`.
///
/// Scale invariant in `S`. Errors when the input sits over the pole
/// (`<S, ehat5> = 0`).
pub fn quadric_stereographic(s: Lambda2Element) -> Result<QuadricStereo, Error> {
    let s5 = lambda2_pairing(s, Lambda2Element::basis(4));
    if s5.norm() < 1e-13 * s.norm().max(1e-300) {
        return Err(Error::StereographicPole);
    }
    let s6 = lambda2_pairing(s, Lambda2Element::basis(5));
    let mut out = s.sub(Lambda2Element::basis(4).scale(s6)).scale(s5.inv());
    out = out.sub(Lambda2Element::basis(5));
    // by construction the ehat5 and ehat6 coordinates should now vanish
    let imag = Quaternion::new(out.0[0].im, out.0[1].im, out.0[2].im, out.0[3].im);
    Ok(QuadricStereo { affine: out, imag })
}

/// Representative of a Hermitian form on H^2 inside the exterior square: the
/// polar vector of its complex alternating part. A twistor-holomorphic curve
/// is superminimal for the form iff its tangent line congruence pairs to zero
/// with this vector.
pub fn omega_sharp(form: crate::quat::HermitianForm2) -> Lambda2Element {
    match form {
        // computed from the j-part of the form in the ehat basis
        crate::quat::HermitianForm2::Minkowski => Lambda2Element::basis(0).scale(C::new(-1.0, 0.0)),
        crate::quat::HermitianForm2::Bryant => Lambda2Element::basis(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{HermitianForm2, J, ONE, ZERO};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_c4(rng: &mut StdRng) -> C4 {
        C4([
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ])
    }

    #[test]
    fn wedge_of_e1_and_e1j_is_ehat5() {
        let e1 = C4([C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]);
        let e1j = e1.mul_j();
        let w = wedge(e1, e1j);
        let expect = Lambda2Element::basis(4);
        assert!(w.sub(expect).norm() < 1e-15);
    }

    #[test]
    fn wedge_alternating_and_bilinear() {
        let mut rng = StdRng::seed_from_u64(0x1a2b);
        for _ in 0..1000 {
            let v = rand_c4(&mut rng);
            let w = rand_c4(&mut rng);
            assert!(wedge(v, v).norm() < 1e-14);
            let s = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let lhs = wedge(v.scale(s), w);
            let rhs = wedge(v, w).scale(s);
            assert!(lhs.sub(rhs).norm() < 1e-12);
            let antisym = wedge(v, w).add(wedge(w, v));
            assert!(antisym.norm() < 1e-13);
            let u = rand_c4(&mut rng);
            let sum = wedge(v.add(u), w);
            let parts = wedge(v, w).add(wedge(u, w));
            assert!(sum.sub(parts).norm() < 1e-12);
        }
    }

    /// The tangent congruence of the degree-3 twistor lift used by the
    /// energy-16pi family, evaluated at z = 0.
    #[test]
    fn wedge_matches_published_tangent_congruence_at_zero() {
        let phi0 = C4([C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(-1.0, 0.0), C::new(0.0, 0.0)]);
        let dphi0 = C4([C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]);
        let s = wedge(phi0, dphi0);
        let expect = Lambda2Element([
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.5, 0.0),
            C::new(0.0, -0.5),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
        ]);
        assert!(s.sub(expect).norm() < 1e-15);
    }

    #[test]
    fn pairing_examples() {
        let e5 = Lambda2Element::basis(4);
        let e6 = Lambda2Element::basis(5);
        assert!((lambda2_pairing(e5, e6) - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!(lambda2_pairing(e5, e5).norm() < 1e-15);
    }

    #[test]
    fn gram_matrix_agrees_with_wedge_oracle() {
        // the full 6x6 Gram matrix, frozen from the volume-coefficient oracle
        let expect: [[f64; 6]; 6] = [
            [-2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, -2.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -2.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -2.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        ];
        for m in 0..6 {
            for n in 0..6 {
                let oracle = wedge4_volume_coefficient(
                    Lambda2Element::basis(m),
                    Lambda2Element::basis(n),
                );
                let fast = lambda2_pairing(Lambda2Element::basis(m), Lambda2Element::basis(n));
                assert!((oracle - fast).norm() < 1e-15, "gram ({m},{n})");
                assert!((oracle - C::new(expect[m][n], 0.0)).norm() < 1e-15, "gram ({m},{n})");
            }
        }
    }

    #[test]
    fn pairing_symmetric_and_matches_oracle_on_randoms() {
        let mut rng = StdRng::seed_from_u64(0x1a2c);
        for _ in 0..1000 {
            let x = wedge(rand_c4(&mut rng), rand_c4(&mut rng));
            let y = wedge(rand_c4(&mut rng), rand_c4(&mut rng));
            let p = lambda2_pairing(x, y);
            let q = lambda2_pairing(y, x);
            assert!((p - q).norm() < 1e-13);
            let oracle = wedge4_volume_coefficient(x, y);
            assert!((p - oracle).norm() < 1e-12);
            // decomposables sit on the quadric
            assert!(quadric_residual(x).norm() < 1e-12);
        }
    }

    #[test]
    fn stereographic_identity_case() {
        let s = Lambda2Element::basis(4).add(Lambda2Element::basis(5));
        let out = quadric_stereographic(s).unwrap();
        assert!(out.affine.norm() < 1e-14);
        assert!(out.imag.norm() < 1e-14);
    }

    #[test]
    fn stereographic_rejects_pole() {
        // <S, ehat5> = 0 iff the ehat6 coordinate vanishes
        let s = Lambda2Element::basis(4).add(Lambda2Element::basis(2));
        assert!(matches!(quadric_stereographic(s), Err(Error::StereographicPole)));
    }

    #[test]
    fn omega_sharp_reproduces_forms() {
        // <omega_sharp(form), x /\ y> equals the complex alternating part of
        // the Hermitian form, tested componentwise through random vectors.
        let mut rng = StdRng::seed_from_u64(0x1a2d);
        for form in [HermitianForm2::Minkowski, HermitianForm2::Bryant] {
            let om = omega_sharp(form);
            for _ in 0..200 {
                let v = rand_c4(&mut rng);
                let w = rand_c4(&mut rng);
                let paired = lambda2_pairing(om, wedge(v, w));
                // j-part of the Hermitian form of the corresponding H^2 vectors
                let (qx, qy) = (v.to_qvec(), w.to_qvec());
                let h = form.pair(qx, qy);
                let (_, jpart) = h.complex_split();
                assert!(
                    (paired - jpart).norm() < 1e-11,
                    "form {form:?}: {paired} vs {jpart}"
                );
            }
        }
        let _ = (ONE, ZERO, J);
    }
}
