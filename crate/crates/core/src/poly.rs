//! Dense polynomials and rational functions over the complex numbers.
//!
//! This is the arithmetic behind the rational null curves: quintuples of
//! rational functions, their derivatives, quadric identities, and pole/zero
//! bookkeeping. Degrees stay small (the hard cap is 64), so dense
//! representation and an Aberth root finder are plenty.

use num_complex::Complex64;

type C = Complex64;

pub const DEGREE_CAP: usize = 64;
// Matching tolerance for approximate gcd reduction. Numerically multiple
// roots smear by ~eps^(1/multiplicity), so this sits well above the smear of
// double roots and well below the separation of genuinely distinct roots in
// the null-curve families.
const ROOT_MATCH_TOL: f64 = 1e-6;

/// Dense polynomial, `coeffs[k]` multiplying `z^k`. Always trimmed so the
/// leading coefficient is nonzero (the zero polynomial has one coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<C>,
}

impl Poly {
    pub fn new(coeffs: Vec<C>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        assert!(p.degree() <= DEGREE_CAP, "polynomial degree exceeds cap");
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![C::new(0.0, 0.0)] }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![C::new(1.0, 0.0)] }
    }

    pub fn constant(c: C) -> Self {
        Poly::new(vec![c])
    }

    /// `c * z^k`.
    pub fn monomial(c: C, k: usize) -> Self {
        let mut coeffs = vec![C::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 {
            let last = *self.coeffs.last().unwrap();
            if last.norm() == 0.0 {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(C::new(0.0, 0.0));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: C) -> C {
        let mut acc = C::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * C::new(k as f64, 0.0))
            .collect();
        Poly::new(coeffs)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = vec![C::new(0.0, 0.0); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in o.coeffs.iter().enumerate() {
            out[k] += c;
        }
        Poly::new(out)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(C::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C::new(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (m, a) in self.coeffs.iter().enumerate() {
            for (n, b) in o.coeffs.iter().enumerate() {
                out[m + n] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Multiplicity of the root z = 0, i.e. the number of trailing zero
    /// coefficients (relative to the polynomial's scale).
    pub fn order_at_zero(&self) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.coeffs
            .iter()
            .take_while(|c| c.norm() <= 1e-12 * scale)
            .count()
    }

    /// All complex roots by the Aberth–Ehrlich iteration. Degree <= cap, so a
    /// plain simultaneous iteration from a perturbed circle converges fast.
    pub fn roots(&self) -> Vec<C> {
        let n = self.degree();
        if n == 0 {
            return vec![];
        }
        let lead = *self.coeffs.last().unwrap();
        let monic: Vec<C> = self.coeffs.iter().map(|c| c / lead).collect();
        // radius bound: 1 + max |a_k|
        let r = 1.0 + monic.iter().take(n).map(|c| c.norm()).fold(0.0, f64::max);
        let mut zs: Vec<C> = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.35) / n as f64 + 0.2;
                C::from_polar(r * (0.5 + 0.5 * ((k % 3) as f64 + 1.0) / 3.0), th)
            })
            .collect();
        let poly = Poly { coeffs: monic };
        let dpoly = poly.derivative();
        for _ in 0..200 {
            let mut moved: f64 = 0.0;
            let prev = zs.clone();
            for k in 0..n {
                let z = prev[k];
                let p = poly.eval(z);
                let dp = dpoly.eval(z);
                if p.norm() < 1e-300 {
                    continue;
                }
                let newton = if dp.norm() > 1e-300 { p / dp } else { p };
                let mut sum = C::new(0.0, 0.0);
                for (m, w) in prev.iter().enumerate() {
                    if m != k {
                        let d = z - w;
                        if d.norm() > 1e-300 {
                            sum += d.inv();
                        }
                    }
                }
                let denom = C::new(1.0, 0.0) - newton * sum;
                let step = if denom.norm() > 1e-12 { newton / denom } else { newton };
                zs[k] = z - step;
                moved = moved.max(step.norm());
            }
            if moved < 1e-14 * (1.0 + r) {
                break;
            }
        }
        zs
    }
}

/// Rational function as a numerator/denominator pair, reduced by approximate
/// root matching.
#[derive(Debug, Clone)]
pub struct Rational {
    pub num: Poly,
    pub den: Poly,
}

impl Rational {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        Rational { num, den }.reduced()
    }

    pub fn from_poly(p: Poly) -> Self {
        Rational { num: p, den: Poly::one() }
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, z: C) -> C {
        self.num.eval(z) / self.den.eval(z)
    }

    pub fn add(&self, o: &Rational) -> Rational {
        Rational::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &Rational) -> Rational {
        self.add(&o.scale(C::new(-1.0, 0.0)))
    }

    pub fn mul(&self, o: &Rational) -> Rational {
        Rational::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &Rational) -> Rational {
        assert!(!o.is_zero(), "division by the zero rational function");
        Rational::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn scale(&self, s: C) -> Rational {
        Rational { num: self.num.scale(s), den: self.den.clone() }
    }

    pub fn derivative(&self) -> Rational {
        // (n/d)' = (n'd - nd')/d^2
        let num = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        Rational::new(num, self.den.mul(&self.den))
    }

    /// Cancels the common `z^k` factor exactly (trailing-coefficient count),
    /// then matched nonzero roots (within `1e-9`), and normalizes the
    /// denominator's leading coefficient to one. Multiple roots at zero are
    /// exact; multiple nonzero roots survive reduction untouched unless they
    /// match, which is all the null-curve arithmetic needs.
    fn reduced(self) -> Rational {
        if self.num.is_zero() {
            return Rational { num: Poly::zero(), den: Poly::one() };
        }
        // exact cancellation of the common monomial factor
        let zn = self.num.order_at_zero();
        let zd = self.den.order_at_zero();
        let strip = zn.min(zd);
        let num = Poly::new(self.num.coeffs[strip..].to_vec());
        let den = Poly::new(self.den.coeffs[strip..].to_vec());
        if num.degree() == 0 || den.degree() == 0 {
            return (Rational { num, den }).lead_normalized();
        }
        let zn = zn - strip;
        let zd = zd - strip;
        let nroots: Vec<C> = num.roots().into_iter().filter(|r| r.norm() > ROOT_MATCH_TOL).collect();
        let mut droots: Vec<C> = den.roots().into_iter().filter(|r| r.norm() > ROOT_MATCH_TOL).collect();
        let mut keep_num: Vec<C> = Vec::new();
        for r in nroots {
            if let Some(pos) = droots.iter().position(|d| (d - r).norm() < ROOT_MATCH_TOL) {
                droots.remove(pos);
            } else {
                keep_num.push(r);
            }
        }
        let lead_n = *num.coeffs.last().unwrap();
        let lead_d = *den.coeffs.last().unwrap();
        let num = poly_from_roots(&keep_num).scale(lead_n).mul(&Poly::monomial(C::new(1.0, 0.0), zn));
        let den = poly_from_roots(&droots).scale(lead_d).mul(&Poly::monomial(C::new(1.0, 0.0), zd));
        (Rational { num, den }).lead_normalized()
    }

    fn lead_normalized(self) -> Rational {
        let lead = *self.den.coeffs.last().unwrap();
        Rational {
            num: self.num.scale(lead.inv()),
            den: self.den.scale(lead.inv()),
        }
    }

    /// Finite poles as `(location, order)` pairs: the pole at zero comes from
    /// the exact trailing-coefficient count, nonzero poles from clustered
    /// denominator roots (cluster radius `3e-4`, wide enough to absorb the
    /// smear of numerically multiple roots).
    pub fn poles(&self) -> Vec<(C, usize)> {
        let zero_mult = self.den.order_at_zero().saturating_sub(self.num.order_at_zero());
        let mut out = Vec::new();
        let den_zeros = self.den.order_at_zero();
        if den_zeros > 0 && zero_mult > 0 {
            out.push((C::new(0.0, 0.0), zero_mult));
        }
        let nonzero: Vec<C> = self
            .den
            .roots()
            .into_iter()
            .filter(|r| r.norm() > 1e-6)
            .collect();
        out.extend(cluster_roots(&nonzero));
        out
    }

    /// Order of the pole at infinity: `deg(num) - deg(den)` when positive.
    pub fn pole_order_at_infinity(&self) -> isize {
        if self.num.is_zero() {
            return isize::MIN;
        }
        self.num.degree() as isize - self.den.degree() as isize
    }

    /// Laurent order at a finite point: vanishing order of the numerator minus
    /// that of the denominator (negative = pole).
    pub fn order_at(&self, z0: C) -> isize {
        let shift = |p: &Poly| -> Poly {
            // p(z + z0) via synthetic shift
            let mut out = Poly::zero();
            for c in p.coeffs.iter().rev() {
                out = out.mul(&Poly::new(vec![z0, C::new(1.0, 0.0)]));
                out = out.add(&Poly::constant(*c));
            }
            out
        };
        let n = shift(&self.num).order_at_zero();
        let d = shift(&self.den).order_at_zero();
        n as isize - d as isize
    }
}

pub fn poly_from_roots(roots: &[C]) -> Poly {
    let mut p = Poly::one();
    for r in roots {
        p = p.mul(&Poly::new(vec![-r, C::new(1.0, 0.0)]));
    }
    p
}

fn cluster_roots(roots: &[C]) -> Vec<(C, usize)> {
    // numerically multiple roots smear over a radius ~eps^(1/multiplicity)
    let tol = 3e-4;
    let mut clusters: Vec<(C, usize)> = Vec::new();
    for r in roots {
        if let Some((c, n)) = clusters
            .iter_mut()
            .find(|(c, _)| (*c - r).norm() < tol * (1.0 + c.norm()))
        {
            *n += 1;
            *c = (*c * (*n as f64 - 1.0) + r) / *n as f64;
        } else {
            clusters.push((*r, 1));
        }
    }
    clusters
}

/// 2x2 matrix of rational functions; enough structure for null-curve frames
/// and their logarithmic derivatives.
#[derive(Debug, Clone)]
pub struct RationalMat2 {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl RationalMat2 {
    pub fn eval(&self, z: C) -> [[C; 2]; 2] {
        [
            [self.a.eval(z), self.b.eval(z)],
            [self.c.eval(z), self.d.eval(z)],
        ]
    }

    pub fn det(&self) -> Rational {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    pub fn derivative(&self) -> RationalMat2 {
        RationalMat2 {
            a: self.a.derivative(),
            b: self.b.derivative(),
            c: self.c.derivative(),
            d: self.d.derivative(),
        }
    }

    pub fn mul(&self, o: &RationalMat2) -> RationalMat2 {
        RationalMat2 {
            a: self.a.mul(&o.a).add(&self.b.mul(&o.c)),
            b: self.a.mul(&o.b).add(&self.b.mul(&o.d)),
            c: self.c.mul(&o.a).add(&self.d.mul(&o.c)),
            d: self.c.mul(&o.b).add(&self.d.mul(&o.d)),
        }
    }
}
