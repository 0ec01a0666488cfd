//! Quaternion algebra, vectors and 2x2 matrices over the quaternions, and
//! the projective line they act on.
//!
//! Everything downstream is built on these types: quaternions are the scalar
//! field, `QVec2` holds homogeneous coordinates of points of the projective
//! line, and `QMat2` acts on those from the left (Moebius transformations in
//! an affine chart).

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Element of the real quaternion algebra, `q = re + i*im_i + j*im_j + k*im_k`
/// with `i^2 = j^2 = k^2 = ijk = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub re: f64,
    pub im_i: f64,
    pub im_j: f64,
    pub im_k: f64,
}

pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

impl Quaternion {
    pub const fn new(re: f64, im_i: f64, im_j: f64, im_k: f64) -> Self {
        Self { re, im_i, im_j, im_k }
    }

    pub const fn real(re: f64) -> Self {
        Self::new(re, 0.0, 0.0, 0.0)
    }

    /// Embeds `a + bi` of the complex subfield `R + Ri`.
    pub fn from_complex(c: Complex64) -> Self {
        Self::new(c.re, c.im, 0.0, 0.0)
    }

    /// Purely imaginary quaternion from an R^3 vector `(x, y, z) -> xi + yj + zk`.
    pub fn from_imag(x: f64, y: f64, z: f64) -> Self {
        Self::new(0.0, x, y, z)
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im_i, -self.im_j, -self.im_k)
    }

    pub fn norm_sq(self) -> f64 {
        self.re * self.re + self.im_i * self.im_i + self.im_j * self.im_j + self.im_k * self.im_k
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inv(self) -> Self {
        let n = self.norm_sq();
        self.conj() / n
    }

    pub fn imag_part(self) -> Self {
        Self::new(0.0, self.im_i, self.im_j, self.im_k)
    }

    /// Splits `q = a + j b` with `a, b` in the complex subfield `R + Ri`.
    ///
    /// Recomposition is bit-exact: `q = a + J * b` componentwise, since
    /// `j(b0 + b1 i) = b0 j + b1 ji = b0 j - b1 k`.
    pub fn complex_split(self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.re, self.im_i),
            Complex64::new(self.im_j, -self.im_k),
        )
    }

    /// Inverse of [`complex_split`](Self::complex_split): `a + j b`.
    pub fn from_split(a: Complex64, b: Complex64) -> Self {
        Self::new(a.re, a.im, b.re, -b.im)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.re * other.re
            + self.im_i * other.im_i
            + self.im_j * other.im_j
            + self.im_k * other.im_k
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im_i.is_finite() && self.im_j.is_finite() && self.im_k.is_finite()
    }

    /// Unit quaternion along `self`; `None` for (near-)zero input.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n < 1e-300 {
            None
        } else {
            Some(self / n)
        }
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im_i + o.im_i, self.im_j + o.im_j, self.im_k + o.im_k)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im_i - o.im_i, self.im_j - o.im_j, self.im_k - o.im_k)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im_i, -self.im_j, -self.im_k)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    /// Hamilton product.
    fn mul(self, o: Self) -> Self {
        let (a1, b1, c1, d1) = (self.re, self.im_i, self.im_j, self.im_k);
        let (a2, b2, c2, d2) = (o.re, o.im_i, o.im_j, o.im_k);
        Self::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.re * s, self.im_i * s, self.im_j * s, self.im_k * s)
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self::new(self.re / s, self.im_i / s, self.im_j / s, self.im_k / s)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:+.6}{:+.6}i{:+.6}j{:+.6}k",
            self.re, self.im_i, self.im_j, self.im_k
        )
    }
}

/// Vector of H^2 / homogeneous coordinates of a point of the projective line.
///
/// Nonzero vectors represent projective points, `[v] = [v * lambda]` for any
/// nonzero quaternion `lambda` (scalars act from the right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QVec2 {
    pub x1: Quaternion,
    pub x2: Quaternion,
}

impl QVec2 {
    pub const fn new(x1: Quaternion, x2: Quaternion) -> Self {
        Self { x1, x2 }
    }

    /// Affine point `[q : 1]`.
    pub fn affine(q: Quaternion) -> Self {
        Self::new(q, ONE)
    }

    /// The point at infinity `[1 : 0]`.
    pub fn infinity() -> Self {
        Self::new(ONE, ZERO)
    }

    pub fn scale_right(self, lambda: Quaternion) -> Self {
        Self::new(self.x1 * lambda, self.x2 * lambda)
    }

    pub fn norm_sq(self) -> f64 {
        self.x1.norm_sq() + self.x2.norm_sq()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Quaternionic Hermitian pairing `conj(x1) y1 + conj(x2) y2`.
    pub fn herm_dot(self, o: Self) -> Quaternion {
        self.x1.conj() * o.x1 + self.x2.conj() * o.x2
    }

    /// Reads the point in the affine chart `[q : 1] -> q`; `None` at infinity.
    pub fn to_affine(self) -> Option<Quaternion> {
        let n2 = self.x2.norm();
        if n2 <= 1e-13 * self.x1.norm() {
            None
        } else {
            Some(self.x1 * self.x2.inv())
        }
    }

    /// Sine of the principal angle between the quaternionic lines spanned by
    /// `self` and `other` (both nonzero). Zero iff they represent the same
    /// projective point.
    pub fn projective_distance(self, o: Self) -> f64 {
        let nv = self.norm();
        let nw = o.norm();
        if nv == 0.0 || nw == 0.0 {
            return f64::NAN;
        }
        let v = Self::new(self.x1 / nv, self.x2 / nv);
        // component of o orthogonal to v H
        let coef = v.herm_dot(o);
        let proj = v.scale_right(coef);
        let residue = Self::new(o.x1 - proj.x1, o.x2 - proj.x2);
        residue.norm() / nw
    }

    pub fn projectively_equal(self, o: Self, tol: f64) -> bool {
        self.projective_distance(o) < tol
    }
}

/// 2x2 quaternionic matrix acting on `QVec2` from the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QMat2 {
    pub a: Quaternion,
    pub b: Quaternion,
    pub c: Quaternion,
    pub d: Quaternion,
}

impl QMat2 {
    pub const fn new(a: Quaternion, b: Quaternion, c: Quaternion, d: Quaternion) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(p: Quaternion, q: Quaternion) -> Self {
        Self::new(p, ZERO, ZERO, q)
    }

    pub fn apply(self, v: QVec2) -> QVec2 {
        QVec2::new(self.a * v.x1 + self.b * v.x2, self.c * v.x1 + self.d * v.x2)
    }

    pub fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm(self) -> f64 {
        (self.a.norm_sq() + self.b.norm_sq() + self.c.norm_sq() + self.d.norm_sq()).sqrt()
    }

    /// Inverse by quaternionic Gaussian elimination. `None` when the matrix is
    /// singular as a real 8x8 matrix (pivots below `1e-12` of the matrix scale).
    pub fn inverse(self) -> Option<Self> {
        let scale = self.norm();
        if scale == 0.0 {
            return None;
        }
        let tol = 1e-12 * scale;
        // Row-reduce [self | I].
        let (mut a, mut b, mut c, mut d) = (self.a, self.b, self.c, self.d);
        let (mut p, mut q, mut r, mut s) = (ONE, ZERO, ZERO, ONE);
        if a.norm() < c.norm() {
            std::mem::swap(&mut a, &mut c);
            std::mem::swap(&mut b, &mut d);
            std::mem::swap(&mut p, &mut r);
            std::mem::swap(&mut q, &mut s);
        }
        if a.norm() <= tol {
            return None;
        }
        let ainv = a.inv();
        // normalize first row
        let (b1, p1, q1) = (ainv * b, ainv * p, ainv * q);
        // eliminate below
        let d2 = d - c * b1;
        let r2 = r - c * p1;
        let s2 = s - c * q1;
        if d2.norm() <= tol {
            return None;
        }
        let dinv = d2.inv();
        let (r3, s3) = (dinv * r2, dinv * s2);
        // back substitute
        let p4 = p1 - b1 * r3;
        let q4 = q1 - b1 * s3;
        Some(Self::new(p4, q4, r3, s3))
    }

    /// Conjugation `self * m * self^{-1}`; `None` if `self` is singular.
    pub fn ad(self, m: Self) -> Option<Self> {
        Some(self.mul(m).mul(self.inverse()?))
    }

    pub fn trace(self) -> Quaternion {
        self.a + self.d
    }
}

/// Applies a projective transformation to a point of the projective line.
///
/// In the affine chart this is the fractional linear map
/// `f -> (a f + b)(c f + d)^{-1}`. Returns an error for singular matrices.
pub fn mobius_apply(m: QMat2, p: QVec2) -> Result<QVec2, crate::Error> {
    if m.inverse().is_none() {
        return Err(crate::Error::SingularMatrix);
    }
    Ok(m.apply(p))
}

/// The two quaternionic Hermitian forms on H^2 used by the explicit families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HermitianForm2 {
    /// `<x,y> = conj(x2) j y1 - conj(x1) j y2`; its null lines form the round
    /// 3-sphere `span{1,i,k} + infinity`, the ideal boundary used by the
    /// mean-curvature-one families.
    Bryant,
    /// `<x,y> = conj(x2) y1 + conj(x1) y2`; its null lines are `Im H + infinity`.
    Minkowski,
}

impl HermitianForm2 {
    pub fn pair(self, x: QVec2, y: QVec2) -> Quaternion {
        match self {
            HermitianForm2::Bryant => x.x2.conj() * J * y.x1 - x.x1.conj() * J * y.x2,
            HermitianForm2::Minkowski => x.x2.conj() * y.x1 + x.x1.conj() * y.x2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_quat(rng: &mut StdRng) -> Quaternion {
        Quaternion::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    /// Independent componentwise product oracle from the multiplication table
    /// of the basis {1, i, j, k}.
    fn mul_oracle(p: Quaternion, q: Quaternion) -> Quaternion {
        // table[a][b] = (sign, basis index) for e_a * e_b
        const TABLE: [[(f64, usize); 4]; 4] = [
            [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
            [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
            [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
            [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
        ];
        let pa = [p.re, p.im_i, p.im_j, p.im_k];
        let qa = [q.re, q.im_i, q.im_j, q.im_k];
        let mut out = [0.0f64; 4];
        for a in 0..4 {
            for b in 0..4 {
                let (sign, idx) = TABLE[a][b];
                out[idx] += sign * pa[a] * qa[b];
            }
        }
        Quaternion::new(out[0], out[1], out[2], out[3])
    }

    #[test]
    fn units_satisfy_defining_relations() {
        assert_eq!(I * I, -ONE);
        assert_eq!(J * J, -ONE);
        assert_eq!(K * K, -ONE);
        assert_eq!(I * J * K, -ONE);
        assert_eq!(I * J, K);
        assert_eq!(J * I, -K);
        assert_eq!(J * K, I);
        assert_eq!(K * J, -I);
        assert_eq!(K * I, J);
        assert_eq!(I * K, -J);
    }

    #[test]
    fn product_matches_component_table() {
        let p = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        let q = Quaternion::new(5.0, 6.0, 7.0, 8.0);
        let exp = Quaternion::new(-60.0, 12.0, 30.0, 24.0);
        assert_eq!(p * q, exp);
        assert_eq!(mul_oracle(p, q), exp);
    }

    #[test]
    fn product_vs_table_oracle_100k() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0001);
        for _ in 0..100_000 {
            let p = rand_quat(&mut rng);
            let q = rand_quat(&mut rng);
            let a = p * q;
            let b = mul_oracle(p, q);
            assert_eq!(a, b, "table oracle disagrees for {p} * {q}");
        }
    }

    #[test]
    fn multiplicativity_and_conjugation_100k() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0002);
        for _ in 0..100_000 {
            let p = rand_quat(&mut rng);
            let q = rand_quat(&mut rng);
            let lhs = (p * q).norm();
            let rhs = p.norm() * q.norm();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.max(1.0),
                "|pq| != |p||q|: {lhs} vs {rhs}"
            );
            let c1 = (p * q).conj();
            let c2 = q.conj() * p.conj();
            assert!((c1 - c2).norm() <= 1e-13 * (c1.norm() + 1.0));
        }
    }

    #[test]
    fn complex_split_examples() {
        let (a, b) = Quaternion::new(1.0, 1.0, 0.0, 0.0).complex_split();
        assert_eq!(a, Complex64::new(1.0, 1.0));
        assert_eq!(b, Complex64::new(0.0, 0.0));

        let (a, b) = J.complex_split();
        assert_eq!(a, Complex64::new(0.0, 0.0));
        assert_eq!(b, Complex64::new(1.0, 0.0));

        let q = Quaternion::new(2.0, 3.0, 4.0, 5.0);
        let (a, b) = q.complex_split();
        assert_eq!(a, Complex64::new(2.0, 3.0));
        assert_eq!(b, Complex64::new(4.0, -5.0));
        // reconstruction via the product oracle: q = a + j b
        let back = Quaternion::from_complex(a) + J * Quaternion::from_complex(b);
        assert_eq!(back, q);
    }

    #[test]
    fn split_roundtrip_exact() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0003);
        for _ in 0..10_000 {
            let q = rand_quat(&mut rng);
            let (a, b) = q.complex_split();
            assert_eq!(Quaternion::from_split(a, b), q);
        }
    }

    #[test]
    fn mobius_identity_and_scalars() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0004);
        for _ in 0..100 {
            let q = rand_quat(&mut rng);
            let p = QVec2::affine(q);
            let im = mobius_apply(QMat2::identity(), p).unwrap();
            assert!(im.projectively_equal(p, 1e-10));
            // real scalar matrices are the center of the projective action
            let t: f64 = rng.gen_range(0.1..3.0);
            let m = QMat2::diag(Quaternion::real(t), Quaternion::real(t));
            let im = mobius_apply(m, p).unwrap();
            assert!(im.projectively_equal(p, 1e-10));
            // a non-real scalar acts by conjugation of the affine point
            let lam = rand_quat(&mut rng);
            if lam.norm() < 1e-3 {
                continue;
            }
            let m = QMat2::diag(lam, lam);
            let im = mobius_apply(m, p).unwrap();
            let conj_pt = QVec2::affine(lam * q * lam.inv());
            assert!(im.projectively_equal(conj_pt, 1e-9));
        }
    }

    #[test]
    fn mobius_catenoid_frame_sends_k_to_infinity() {
        // matrix rows (j, i), (k, 1): maps [k : 1] to the point at infinity
        // since k*k + 1 = 0.
        let m = QMat2::new(J, I, K, ONE);
        let p = QVec2::affine(K);
        let im = mobius_apply(m, p).unwrap();
        assert!(im.to_affine().is_none());
        assert!(im.projectively_equal(QVec2::infinity(), 1e-12));
    }

    #[test]
    fn mobius_composition_is_projective_action() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0005);
        for _ in 0..200 {
            let m1 = QMat2::new(
                rand_quat(&mut rng),
                rand_quat(&mut rng),
                rand_quat(&mut rng),
                rand_quat(&mut rng),
            );
            let m2 = QMat2::new(
                rand_quat(&mut rng),
                rand_quat(&mut rng),
                rand_quat(&mut rng),
                rand_quat(&mut rng),
            );
            if m1.inverse().is_none() || m2.inverse().is_none() {
                continue;
            }
            let p = QVec2::affine(rand_quat(&mut rng));
            let lhs = mobius_apply(m1.mul(m2), p).unwrap();
            let rhs = mobius_apply(m1, mobius_apply(m2, p).unwrap()).unwrap();
            assert!(
                lhs.projectively_equal(rhs, 1e-10),
                "composition mismatch: dist {}",
                lhs.projective_distance(rhs)
            );
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = QMat2::new(ONE, ONE, ONE, ONE);
        assert!(m.inverse().is_none());
        assert!(mobius_apply(m, QVec2::affine(I)).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0006);
        for _ in 0..500 {
            let m = QMat2::new(
                rand_quat(&mut rng),
                rand_quat(&mut rng),
                rand_quat(&mut rng),
                rand_quat(&mut rng),
            );
            if let Some(minv) = m.inverse() {
                let id = m.mul(minv);
                let err = id.sub(QMat2::identity()).norm();
                assert!(err < 1e-9, "M M^-1 != I, err {err}");
            }
        }
    }

    #[test]
    fn hermitian_forms_are_hermitian_and_sesquilinear() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0007);
        for form in [HermitianForm2::Bryant, HermitianForm2::Minkowski] {
            for _ in 0..200 {
                let x = QVec2::new(rand_quat(&mut rng), rand_quat(&mut rng));
                let y = QVec2::new(rand_quat(&mut rng), rand_quat(&mut rng));
                let pxy = form.pair(x, y);
                let pyx = form.pair(y, x);
                assert!((pxy - pyx.conj()).norm() < 1e-12);
                let lam = rand_quat(&mut rng);
                let mu = rand_quat(&mut rng);
                let lhs = form.pair(x.scale_right(lam), y.scale_right(mu));
                let rhs = lam.conj() * pxy * mu;
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn bryant_form_null_vectors() {
        // both vectors used by the energy-16pi family are null for this form
        let a1 = QVec2::new(ZERO, ONE + J);
        let a2 = QVec2::new(-ONE, ONE);
        for a in [a1, a2] {
            assert!(HermitianForm2::Bryant.pair(a, a).norm() < 1e-14);
        }
        // Minkowski nullity singles out Im H points
        let p = QVec2::affine(I * 0.3 + K * 1.2);
        assert!(HermitianForm2::Minkowski.pair(p, p).norm() < 1e-14);
        let q = QVec2::affine(ONE);
        assert!(HermitianForm2::Minkowski.pair(q, q).norm() > 1.0);
    }
}
