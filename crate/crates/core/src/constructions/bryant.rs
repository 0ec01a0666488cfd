//! Mean-curvature-one spheres with smooth ends from rational null curves in
//! the 3-quadric, catenoid cousins among them, plus the end-splitting quadric
//! transformations and the hyperbolic Gauss map.

use crate::poly::{Poly, Rational, RationalMat2};
use crate::quat::{Quaternion, I, J, K, ONE};
use crate::surface::SurfaceMap;
use crate::{Error, Result};
use num_complex::Complex64;

type C = Complex64;

/// Quintuple `[a, b, c, d, e]` of rational functions with `ad - bc = e^2`,
/// a rational curve in the 3-quadric. Seeds the `SL(2, C)` null immersion
/// `F = (1/e) [[a, b], [c, d]]`.
#[derive(Debug, Clone)]
pub struct NullCurveQ3 {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
    pub e: Rational,
}

impl NullCurveQ3 {
    /// Largest relative defect of `ad - bc = e^2` over 64 deterministic
    /// sample points away from poles.
    pub fn quadric_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..64 {
            let z = C::from_polar(0.3 + 0.025 * k as f64, 0.61 * k as f64 + 0.13);
            let lhs = self.a.eval(z) * self.d.eval(z) - self.b.eval(z) * self.c.eval(z);
            let rhs = self.e.eval(z) * self.e.eval(z);
            let scale = lhs.norm().max(rhs.norm()).max(1e-12);
            worst = worst.max((lhs - rhs).norm() / scale);
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let res = self.quadric_residual();
        if res > 1e-10 {
            return Err(Error::Validation(format!(
                "quintuple violates ad - bc = e^2: residual {res:.3e}"
            )));
        }
        Ok(())
    }

    pub fn immersion(&self) -> SlNullImmersion {
        SlNullImmersion::from_quintuple(self)
    }

    fn eval(&self, z: C) -> [C; 5] {
        [
            self.a.eval(z),
            self.b.eval(z),
            self.c.eval(z),
            self.d.eval(z),
            self.e.eval(z),
        ]
    }
}

/// One step of the end-splitting pair of quadric transformations:
/// `(a,b,c,d,e) -> (a, b, c, s^2 a + d - 2 s e, -s a + e)` followed by
/// `(a,b,c,d,e) -> (a + t^2 d - 2 t e, b, c, d, -t d + e)`.
///
/// Both maps preserve `ad - bc = e^2`; `s = t = 0` is the identity.
pub fn deform_ends(nc: &NullCurveQ3, s: C, t: C) -> NullCurveQ3 {
    let cs = |v: C| Rational::from_poly(Poly::constant(v));
    // first map deforms d and e
    let d1 = cs(s * s).mul(&nc.a).add(&nc.d).sub(&cs(2.0 * s).mul(&nc.e));
    let e1 = nc.e.sub(&cs(s).mul(&nc.a));
    let step1 = NullCurveQ3 {
        a: nc.a.clone(),
        b: nc.b.clone(),
        c: nc.c.clone(),
        d: d1,
        e: e1,
    };
    // second map deforms a and e
    let a2 = step1
        .a
        .add(&cs(t * t).mul(&step1.d))
        .sub(&cs(2.0 * t).mul(&step1.e));
    let e2 = step1.e.sub(&cs(t).mul(&step1.d));
    NullCurveQ3 {
        a: a2,
        b: step1.b,
        c: step1.c,
        d: step1.d,
        e: e2,
    }
}

/// Rational null immersion into `SL(2, C)`: `F = (1/e)[[a,b],[c,d]]`.
///
/// `F` and `F'` evaluate pointwise from the quintuple (exact polynomial
/// arithmetic); the rational-function form of `dF F^{-1}` is kept for pole
/// structure analysis.
#[derive(Debug, Clone)]
pub struct SlNullImmersion {
    quintuple: NullCurveQ3,
    dquintuple: NullCurveQ3,
    /// The logarithmic derivative `dF F^{-1}`, a nilpotent rational matrix.
    pub log_deriv: RationalMat2,
}

impl SlNullImmersion {
    pub fn from_quintuple(nc: &NullCurveQ3) -> Self {
        let dquintuple = NullCurveQ3 {
            a: nc.a.derivative(),
            b: nc.b.derivative(),
            c: nc.c.derivative(),
            d: nc.d.derivative(),
            e: nc.e.derivative(),
        };
        // dF F^{-1} = (M' adj(M) - e' e I) / e^2 with M = [[a,b],[c,d]]:
        // assembling the entries over the common denominator e^2 keeps root
        // multiplicities low enough for the approximate gcd to stay exact
        let (a, b, c, d, e) = (&nc.a, &nc.b, &nc.c, &nc.d, &nc.e);
        let (da, db, dc, dd, de) = (
            &dquintuple.a,
            &dquintuple.b,
            &dquintuple.c,
            &dquintuple.d,
            &dquintuple.e,
        );
        let e2 = e.mul(e);
        let ee = de.mul(e);
        let over = |num: Rational| num.div(&e2);
        let log_deriv = RationalMat2 {
            a: over(da.mul(d).sub(&db.mul(c)).sub(&ee)),
            b: over(db.mul(a).sub(&da.mul(b))),
            c: over(dc.mul(d).sub(&dd.mul(c))),
            d: over(dd.mul(a).sub(&dc.mul(b)).sub(&ee)),
        };
        SlNullImmersion { quintuple: nc.clone(), dquintuple, log_deriv }
    }

    /// `F(z)` from the quintuple.
    pub fn eval_f(&self, z: C) -> [[C; 2]; 2] {
        let [a, b, c, d, e] = self.quintuple.eval(z);
        let ei = e.inv();
        [[a * ei, b * ei], [c * ei, d * ei]]
    }

    /// `F'(z)` from the quintuple: `(M' e - M e') / e^2`.
    pub fn eval_df(&self, z: C) -> [[C; 2]; 2] {
        let [a, b, c, d, e] = self.quintuple.eval(z);
        let [da, db, dc, dd, de] = self.dquintuple.eval(z);
        let e2i = (e * e).inv();
        [
            [(da * e - a * de) * e2i, (db * e - b * de) * e2i],
            [(dc * e - c * de) * e2i, (dd * e - d * de) * e2i],
        ]
    }

    /// `det F - 1` residual over 64 sample points.
    pub fn det_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..64 {
            let z = C::from_polar(0.35 + 0.02 * k as f64, 0.43 * k as f64 + 0.39);
            let m = self.eval_f(z);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            worst = worst.max((det - C::new(1.0, 0.0)).norm());
        }
        worst
    }

    /// `det dF` residual (null curve condition) over 64 sample points,
    /// relative to the size of `dF`.
    pub fn null_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..64 {
            let z = C::from_polar(0.35 + 0.02 * k as f64, 0.57 * k as f64 + 0.17);
            let m = self.eval_df(z);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let scale = m
                .iter()
                .flatten()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
                .max(1e-12);
            worst = worst.max(det.norm() / scale);
        }
        worst
    }

    /// Pole locations and orders of `dF F^{-1}`, finite ones plus the order at
    /// infinity (order 0 entries are dropped). Smooth ends require order
    /// exactly 2 everywhere. Orders are Laurent degrees measured by the decay
    /// slope of the entries on shrinking circles, which is robust against the
    /// root-finding smear of multiple denominator roots.
    pub fn log_deriv_pole_orders(&self) -> (Vec<(C, usize)>, usize) {
        let entries = [
            &self.log_deriv.a,
            &self.log_deriv.b,
            &self.log_deriv.c,
            &self.log_deriv.d,
        ];
        let mut locations: Vec<C> = Vec::new();
        for r in &entries {
            for (p, _) in r.poles() {
                if !locations.iter().any(|q| (*q - p).norm() < 1e-3 * (1.0 + p.norm())) {
                    locations.push(p);
                }
            }
        }
        let slope_order = |p: C| -> usize {
            let eps = 1e-4 * (1.0 + p.norm());
            let mut best = 0i64;
            for r in &entries {
                let mut mean = 0.0;
                for k in 0..4 {
                    let t = std::f64::consts::FRAC_PI_2 * k as f64 + 0.35;
                    let v1 = r.eval(p + C::from_polar(eps, t)).norm().max(1e-300);
                    let v2 = r.eval(p + C::from_polar(2.0 * eps, t)).norm().max(1e-300);
                    mean += (v1 / v2).ln() / 2.0f64.ln();
                }
                best = best.max((mean / 4.0).round() as i64);
            }
            best.max(0) as usize
        };
        let mut finite = Vec::new();
        for p in locations {
            let order = slope_order(p);
            if order > 0 {
                finite.push((p, order));
            }
        }
        finite.sort_by(|a, b| a.0.norm().partial_cmp(&b.0.norm()).unwrap());
        // order at infinity: the object is the 1-form G dz, which reads
        // G(1/w) dw / w^2 in the far chart, so the order is 2 plus the
        // growth slope of the entries on large circles
        let mut at_inf = 0i64;
        for r in &entries {
            let mut mean = 0.0;
            for k in 0..4 {
                let t = std::f64::consts::FRAC_PI_2 * k as f64 + 0.15;
                let v1 = r.eval(C::from_polar(1e3, t)).norm().max(1e-300);
                let v2 = r.eval(C::from_polar(2e3, t)).norm().max(1e-300);
                mean += (v2 / v1).ln() / 2.0f64.ln();
            }
            at_inf = at_inf.max(2 + (mean / 4.0).round() as i64);
        }
        (finite, at_inf.max(0) as usize)
    }
}

/// The hyperbolic Gauss map of a null immersion: the common kernel/image line
/// of `dF F^{-1}` as a rational map into the projective line.
#[derive(Debug, Clone)]
pub struct HyperbolicGauss {
    /// Kernel line `[num : den]`.
    pub num: Rational,
    pub den: Rational,
}

/// Extracts the hyperbolic Gauss map and verifies that kernel and image lines
/// of `dF F^{-1}` agree (rank-one nilpotency) at 64 sample points.
pub fn hyperbolic_gauss(f: &SlNullImmersion) -> Result<HyperbolicGauss> {
    let g = &f.log_deriv;
    // kernel of [[g11, g12], [g21, g22]] is [-g12 : g11]; image is [g11 : g21]
    let mut worst: f64 = 0.0;
    for k in 0..64 {
        let z = C::from_polar(0.3 + 0.022 * k as f64, 0.71 * k as f64 + 0.05);
        let m = g.eval(z);
        let scale = m.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().max(1e-12);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        // rank one + traceless means kernel = image: -g12 g21 = g11^2
        let cross = m[0][0] * m[0][0] + m[0][1] * m[1][0];
        worst = worst.max(det.norm().max(cross.norm()) / scale);
    }
    if worst > 1e-9 {
        return Err(Error::Validation(format!(
            "dF F^-1 is not rank-one nilpotent: residual {worst:.3e}"
        )));
    }
    Ok(HyperbolicGauss {
        num: g.b.scale(C::new(-1.0, 0.0)),
        den: g.a.clone(),
    })
}

impl HyperbolicGauss {
    /// Value in the complex affine chart (a point of the round 2-sphere
    /// of the ideal boundary); may be infinite at isolated points.
    pub fn eval(&self, z: C) -> C {
        self.num.eval(z) / self.den.eval(z)
    }
}

/// The frame mapping the Bryant 3-sphere `span{1, i, k} + infinity` onto
/// `Im H + infinity`: rows `(j, i)` and `(k, 1)`.
fn bryant_frame() -> (Quaternion, Quaternion, Quaternion, Quaternion) {
    (J, I, K, ONE)
}

/// The conformal immersion into `Im H` carried by a null immersion:
/// `(f, 1)^T H = [[j, i], [k, 1]] F (k, 1)^T H` read in the affine chart.
///
/// Exact partials come from the pointwise quintuple derivatives.
pub fn bryant_surface(f: &SlNullImmersion) -> SurfaceMap {
    // psi = M F (k,1)^T with F-column (F11 k + F12, F21 k + F22)
    let column = |m: [[C; 2]; 2]| -> (Quaternion, Quaternion) {
        let (m_a, m_b, m_c, m_d) = bryant_frame();
        let f1 = Quaternion::from_complex(m[0][1]) + Quaternion::from_complex(m[0][0]) * K;
        let f2 = Quaternion::from_complex(m[1][1]) + Quaternion::from_complex(m[1][0]) * K;
        (m_a * f1 + m_b * f2, m_c * f1 + m_d * f2)
    };

    let fe = f.clone();
    let eval = move |z: C| {
        let (top, bottom) = column(fe.eval_f(z));
        top * bottom.inv()
    };

    let fp = f.clone();
    let partials = move |z: C| {
        let (top, bottom) = column(fp.eval_f(z));
        let binv = bottom.inv();
        let fval = top * binv;
        let dm = fp.eval_df(z);
        let i = C::new(0.0, 1.0);
        let mut out = [Quaternion::default(); 2];
        for (slot, dir) in [(0usize, C::new(1.0, 0.0)), (1usize, i)] {
            let scaled = [
                [dm[0][0] * dir, dm[0][1] * dir],
                [dm[1][0] * dir, dm[1][1] * dir],
            ];
            let (dtop, dbot) = column(scaled);
            out[slot] = (dtop - fval * dbot) * binv;
        }
        (out[0], out[1])
    };

    SurfaceMap::exact(eval, partials)
}

/// The hyperbolic Gauss map carried into the same `Im H` chart as
/// [`bryant_surface`]: a totally umbilic (branched conformal) map whose image
/// lies on a round 2-sphere.
pub fn hyperbolic_gauss_surface(g: &HyperbolicGauss) -> SurfaceMap {
    let num = g.num.clone();
    let den = g.den.clone();
    let dnum = g.num.derivative();
    let dden = g.den.derivative();
    let assemble = |gv: C| -> (Quaternion, Quaternion) {
        let (m_a, m_b, m_c, m_d) = bryant_frame();
        let gq = Quaternion::from_complex(gv);
        (m_a * gq + m_b, m_c * gq + m_d)
    };
    let num_e = num.clone();
    let den_e = den.clone();
    let eval = move |z: C| {
        let gv = num_e.eval(z) / den_e.eval(z);
        let (top, bottom) = assemble(gv);
        top * bottom.inv()
    };
    let partials = move |z: C| {
        let nv = num.eval(z);
        let dv = den.eval(z);
        let gv = nv / dv;
        let dg = (dnum.eval(z) * dv - nv * dden.eval(z)) / (dv * dv);
        let (m_a, _m_b, m_c, _m_d) = bryant_frame();
        let (top, bottom) = assemble(gv);
        let binv = bottom.inv();
        let fval = top * binv;
        let i = C::new(0.0, 1.0);
        let mut out = [Quaternion::default(); 2];
        for (slot, dir) in [(0usize, C::new(1.0, 0.0)), (1usize, i)] {
            let dgq = Quaternion::from_complex(dg * dir);
            let dtop = m_a * dgq;
            let dbot = m_c * dgq;
            out[slot] = (dtop - fval * dbot) * binv;
        }
        (out[0], out[1])
    };
    SurfaceMap::exact(eval, partials)
}

/// A catenoid cousin with its whole construction chain.
#[derive(Clone)]
pub struct CatenoidCousin {
    pub mu: u32,
    pub curve: NullCurveQ3,
    pub immersion: SlNullImmersion,
    pub surface: SurfaceMap,
}

/// The catenoid cousin of parameter `mu >= 1`:
/// `[a,b,c,d,e] = [-mu, (mu+1) z^{2mu+1}, -(mu+1) z, mu z^{2mu+2}, sqrt(2mu+1) z^{mu+1}]`.
///
/// Willmore energy `8 pi (mu + 1)`; both ends (at `z = 0` and `z = infinity`)
/// are smooth.
pub fn catenoid_cousin(mu: u32) -> Result<CatenoidCousin> {
    if mu == 0 {
        return Err(Error::Validation("catenoid cousin requires mu >= 1".into()));
    }
    if mu > 12 {
        return Err(Error::Validation(
            "catenoid cousin mu > 12 exceeds the supported degree range".into(),
        ));
    }
    let m = mu as f64;
    let re = |x: f64| C::new(x, 0.0);
    let curve = NullCurveQ3 {
        a: Rational::from_poly(Poly::constant(re(-m))),
        b: Rational::from_poly(Poly::monomial(re(m + 1.0), (2 * mu + 1) as usize)),
        c: Rational::from_poly(Poly::monomial(re(-(m + 1.0)), 1)),
        d: Rational::from_poly(Poly::monomial(re(m), (2 * mu + 2) as usize)),
        e: Rational::from_poly(Poly::monomial(re((2.0 * m + 1.0).sqrt()), (mu + 1) as usize)),
    };
    curve.validate()?;
    let immersion = curve.immersion();
    let surface = bryant_surface(&immersion);
    Ok(CatenoidCousin { mu, curve, immersion, surface })
}

/// Largest `|Re f|` over a deterministic sample; all Bryant-frame surfaces
/// must land in `Im H`.
pub fn imaginary_part_residual(map: &SurfaceMap, samples: usize) -> f64 {
    use crate::surface::{sample_disk_points, ChartPoint};
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for pt in sample_disk_points(samples, 41) {
        let f = map.eval(ChartPoint { chart: pt.chart, p: pt.p });
        if !f.is_finite() {
            continue;
        }
        worst = worst.max(f.re.abs());
        scale = scale.max(f.norm());
    }
    worst / scale.max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{sample_disk_points, ChartPoint};

    #[test]
    fn catenoid_quintuple_at_one() {
        let cc = catenoid_cousin(2).unwrap();
        let z = C::new(1.0, 0.0);
        assert!((cc.curve.a.eval(z) - C::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((cc.curve.b.eval(z) - C::new(3.0, 0.0)).norm() < 1e-12);
        assert!((cc.curve.c.eval(z) - C::new(-3.0, 0.0)).norm() < 1e-12);
        assert!((cc.curve.d.eval(z) - C::new(2.0, 0.0)).norm() < 1e-12);
        assert!((cc.curve.e.eval(z) - C::new(5.0f64.sqrt(), 0.0)).norm() < 1e-12);
        // ad - bc = -4 + 9 = 5 = e^2
        assert!(cc.curve.quadric_residual() < 1e-12);
    }

    #[test]
    fn immersion_checks() {
        for mu in [1u32, 2, 3] {
            let cc = catenoid_cousin(mu).unwrap();
            assert!(cc.immersion.det_residual() < 1e-10, "mu = {mu}");
            assert!(cc.immersion.null_residual() < 1e-10, "mu = {mu}");
        }
    }

    #[test]
    fn log_derivative_poles_have_order_two() {
        for mu in [1u32, 2, 4] {
            let cc = catenoid_cousin(mu).unwrap();
            let (finite, at_inf) = cc.immersion.log_deriv_pole_orders();
            assert_eq!(finite.len(), 1, "mu = {mu}: finite poles {finite:?}");
            assert!(finite[0].0.norm() < 1e-9);
            assert_eq!(finite[0].1, 2, "mu = {mu}");
            assert_eq!(at_inf, 2, "mu = {mu}");
        }
    }

    #[test]
    fn gauss_map_kernel_equals_image() {
        let cc = catenoid_cousin(1).unwrap();
        let g = hyperbolic_gauss(&cc.immersion).unwrap();
        // kernel line reproduces a rational function; compare against a direct
        // kernel solve at sample points
        for k in 0..64 {
            let z = C::from_polar(0.4 + 0.01 * k as f64, 0.31 * k as f64);
            let m = cc.immersion.log_deriv.eval(z);
            let v = (-m[0][1], m[0][0]);
            let gv = g.eval(z);
            // [v1 : v2] = [gv : 1]
            let cross = v.0 - gv * v.1;
            assert!(cross.norm() / (v.0.norm() + v.1.norm()).max(1e-12) < 1e-9);
        }
    }

    #[test]
    fn deform_ends_identity_and_quadric_preservation() {
        let cc = catenoid_cousin(2).unwrap();
        let id = deform_ends(&cc.curve, C::new(0.0, 0.0), C::new(0.0, 0.0));
        for k in 0..16 {
            let z = C::from_polar(0.5 + 0.03 * k as f64, 0.7 * k as f64);
            assert!((id.a.eval(z) - cc.curve.a.eval(z)).norm() < 1e-12);
            assert!((id.d.eval(z) - cc.curve.d.eval(z)).norm() < 1e-12);
            assert!((id.e.eval(z) - cc.curve.e.eval(z)).norm() < 1e-12);
        }
        // random deformation parameters preserve the quadric identity
        let mut seed = 0x1234_5678_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (2.0f64.powi(31)) - 1.0
        };
        for _ in 0..1000 {
            let s = C::new(next(), next());
            let t = C::new(next(), next());
            let def = deform_ends(&cc.curve, s, t);
            assert!(def.quadric_residual() < 1e-9, "s={s}, t={t}");
        }
    }

    #[test]
    fn deformed_immersion_still_null() {
        let cc = catenoid_cousin(2).unwrap();
        let def = deform_ends(&cc.curve, C::new(0.22, 0.0), C::new(0.0, 0.0));
        let im = def.immersion();
        assert!(im.det_residual() < 1e-9);
        assert!(im.null_residual() < 1e-9);
        // end-splitting: pole at 0 splits into mu+1 simple-end poles of order 2
        let (finite, _at_inf) = im.log_deriv_pole_orders();
        for (_, ord) in &finite {
            assert_eq!(*ord, 2);
        }
    }

    #[test]
    fn bryant_surface_lands_in_im_h() {
        for mu in [1u32, 2] {
            let cc = catenoid_cousin(mu).unwrap();
            let res = imaginary_part_residual(&cc.surface, 200);
            assert!(res < 1e-9, "mu = {mu}: Re residual {res:.3e}");
        }
    }

    #[test]
    fn bryant_surface_is_conformal_with_exact_partials() {
        let cc = catenoid_cousin(1).unwrap();
        for pt in sample_disk_points(200, 3) {
            let fr = cc.surface.frame(pt).unwrap();
            assert!(
                fr.conformality_residual() < 1e-8,
                "residual {} at {:?}",
                fr.conformality_residual(),
                pt
            );
        }
        // exact vs numeric partials
        for pt in sample_disk_points(50, 4) {
            let (ex, ey) = cc.surface.partials(pt);
            let (nx, ny) = cc.surface.partials_numeric(pt);
            assert!((ex - nx).norm() < 1e-6 * ex.norm().max(1.0));
            assert!((ey - ny).norm() < 1e-6 * ey.norm().max(1.0));
        }
    }

    #[test]
    fn gauss_surface_is_totally_umbilic() {
        let cc = catenoid_cousin(1).unwrap();
        let g = hyperbolic_gauss(&cc.immersion).unwrap();
        let gs = hyperbolic_gauss_surface(&g);
        // dN'' and dR'' both vanish for a map into a round 2-sphere
        for k in 0..20 {
            let z = C::from_polar(0.3 + 0.03 * k as f64, 0.9 * k as f64);
            let Ok(fr) = gs.frame(ChartPoint::z(z)) else { continue };
            let scale = fr.fx.norm().max(1e-9);
            assert!(fr.drpp_x.norm() / scale < 1e-5, "dR'' residual");
            assert!(fr.dnpp_x.norm() / scale < 1e-5, "dN'' residual");
        }
    }
}
