//! Darboux transforms in affine form and the 1- and 2-step Baecklund
//! transforms driven by the Hopf fields.

use crate::quat::{QMat2, QVec2, Quaternion};
use crate::surface::{sample_disk_points, Chart, ChartPoint, SurfaceMap};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

type C = Complex64;

/// Integration path between chart points: radius and angle interpolate
/// linearly (a spiral segment), so the path keeps its distance from the
/// chart center at least `min(|from|, |to|)`. The constructions put their
/// ends and branch points at the centers, where transform data can be
/// singular; straight chords would cut through them.
fn spiral_path(from: C, to: C, t: f64) -> (C, C) {
    let r0 = from.norm();
    let r1 = to.norm();
    if r0 < 1e-12 || r1 < 1e-12 {
        // degenerate: fall back to the chord
        return (from + (to - from) * t, to - from);
    }
    let th0 = from.arg();
    let mut dth = to.arg() - th0;
    if dth > std::f64::consts::PI {
        dth -= 2.0 * std::f64::consts::PI;
    }
    if dth < -std::f64::consts::PI {
        dth += 2.0 * std::f64::consts::PI;
    }
    let r = r0 + (r1 - r0) * t;
    let th = th0 + dth * t;
    let e = C::from_polar(1.0, th);
    let z = e * r;
    let dz = e * C::new(r1 - r0, r * dth);
    (z, dz)
}

fn spiral_length(from: C, to: C) -> f64 {
    (to.norm() - from.norm()).abs()
        + to.norm().max(from.norm()) * (to.arg() - from.arg()).abs().min(std::f64::consts::PI)
}

/// 4th-order line integral of a 1-form (given by its two chart components)
/// along the spiral path `from -> to`.
pub fn integrate_form<F>(omega: &F, from: C, to: C, step: f64) -> Quaternion
where
    F: Fn(C) -> (Quaternion, Quaternion) + ?Sized,
{
    let len = spiral_length(from, to).max((to - from).norm());
    if len == 0.0 {
        return Quaternion::default();
    }
    let n = (len / step).ceil().max(4.0) as usize;
    let gauss = 0.5 / 3.0f64.sqrt();
    let mut acc = Quaternion::default();
    let dt = 1.0 / n as f64;
    for k in 0..n {
        let t0 = k as f64 * dt;
        for node in [0.5 - gauss, 0.5 + gauss] {
            let (z, dz) = spiral_path(from, to, t0 + node * dt);
            let (wx, wy) = omega(z);
            acc = acc + (wx * dz.re + wy * dz.im) * (0.5 * dt);
        }
    }
    acc
}

/// Circulation of a 1-form around random small rectangles, relative to form
/// scale times loop length.
pub fn closedness_residual<F>(omega: &F, loops: usize, seed: u64) -> f64
where
    F: Fn(C) -> (Quaternion, Quaternion) + ?Sized,
{
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as f64) / (2.0f64.powi(31))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..loops {
        let c = C::from_polar(0.15 + 0.6 * next(), 2.0 * std::f64::consts::PI * next());
        let half = 0.02 + 0.05 * next();
        let corners = [
            c + C::new(-half, -half),
            c + C::new(half, -half),
            c + C::new(half, half),
            c + C::new(-half, half),
        ];
        let mut circ = Quaternion::default();
        for k in 0..4 {
            circ = circ + integrate_form(omega, corners[k], corners[(k + 1) % 4], half / 8.0);
        }
        let (wx, wy) = omega(c);
        let scale = (wx.norm() + wy.norm()).max(1e-14);
        worst = worst.max(circ.norm() / (scale * 8.0 * half));
    }
    worst
}

/// A Darboux pair: the original immersion `f`, the affine data `(g, h)` with
/// `df g + dh = 0`, and the transform `f# = f + h g^{-1}`.
pub struct DarbouxPair {
    pub f: SurfaceMap,
    pub g: SurfaceMap,
    pub h: SurfaceMap,
    pub f_sharp: SurfaceMap,
}

/// Builds the Darboux transform of `f` determined by the map `g` (and the
/// integration constant `h0` of `h` at the base point).
///
/// Rejects `g` unless `-df g` is closed (relative circulation below 1e-6 on
/// 100 loops), which is the affine expression of the defining section being
/// holomorphic. `h` is recovered by path integration from `base`.
pub fn darboux(f: &SurfaceMap, g: &SurfaceMap, base: C, h0: Quaternion) -> Result<DarbouxPair> {
    let f_arc = f.clone();
    let g_arc = g.clone();
    let omega = move |z: C| -> (Quaternion, Quaternion) {
        let (fx, fy) = f_arc.partials(ChartPoint::z(z));
        let gv = g_arc.eval(ChartPoint::z(z));
        (-(fx * gv), -(fy * gv))
    };
    let res = closedness_residual(&omega, 100, 0xdab0);
    if res > 1e-6 {
        return Err(Error::NotClosed(res));
    }
    let omega = Arc::new(omega);

    // h as a surface map: path-integrated values, closed-form partials
    let om_eval = omega.clone();
    let h_eval = move |z: C| h0 + integrate_form(om_eval.as_ref(), base, z, 0.02);
    let om_part = omega.clone();
    let h_partials = move |z: C| om_part(z);
    let h = SurfaceMap::exact(h_eval, h_partials);

    // f# = f + h g^{-1}, with partials via df# = h d(g^{-1})
    let (fc, gc, hc) = (f.clone(), g.clone(), h.clone());
    let sharp_eval = move |z: C| {
        let pt = ChartPoint::z(z);
        fc.eval(pt) + hc.eval(pt) * gc.eval(pt).inv()
    };
    let (gc2, hc2) = (g.clone(), h.clone());
    let sharp_partials = move |z: C| {
        let pt = ChartPoint::z(z);
        let gv = gc2.eval(pt);
        let ginv = gv.inv();
        let (gx, gy) = gc2.partials(pt);
        let hv = hc2.eval(pt);
        // d(g^{-1}) = -g^{-1} dg g^{-1}
        (
            -(hv * ginv * gx * ginv),
            -(hv * ginv * gy * ginv),
        )
    };
    let f_sharp = SurfaceMap::exact(sharp_eval, sharp_partials);

    Ok(DarbouxPair {
        f: f.clone(),
        g: g.clone(),
        h,
        f_sharp,
    })
}

impl DarbouxPair {
    /// Max compatibility residual `|df(dx) g + h_x| + |df(dy) g + h_y|`
    /// relative to `|df||g|` over a deterministic sample set.
    pub fn compatibility_residual(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for pt in sample_disk_points(samples, 0x71)
            .into_iter()
            .filter(|p| p.chart == Chart::Z)
        {
            let (fx, fy) = self.f.partials(pt);
            let (hx, hy) = self.h.partials(pt);
            let gv = self.g.eval(pt);
            let scale = (fx.norm() + fy.norm()) * gv.norm().max(1e-14);
            let r = (fx * gv + hx).norm() + (fy * gv + hy).norm();
            worst = worst.max(r / scale.max(1e-300));
        }
        worst
    }

    /// Max residual of `df# = h d(g^{-1})` against numerically differentiated
    /// `f#`.
    pub fn derivative_identity_residual(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for pt in sample_disk_points(samples, 0x72)
            .into_iter()
            .filter(|p| p.chart == Chart::Z)
        {
            let (ex, ey) = self.f_sharp.partials(pt);
            let (nx, ny) = self.f_sharp.partials_numeric(pt);
            let scale = (ex.norm() + ey.norm()).max(1e-14);
            worst = worst.max(((ex - nx).norm() + (ey - ny).norm()) / scale);
        }
        worst
    }

    /// Right-normal identity `R_{f#} = R_{g^{-1}}` (max residual).
    pub fn right_normal_identity(&self, samples: usize) -> f64 {
        let ginv = self.g.inverse_map();
        let mut worst: f64 = 0.0;
        for pt in sample_disk_points(samples, 0x73)
            .into_iter()
            .filter(|p| p.chart == Chart::Z)
        {
            let Ok((_, r_sharp)) = self.f_sharp.normals(pt) else { continue };
            let Ok((_, r_ginv)) = ginv.normals(pt) else { continue };
            worst = worst.max((r_sharp - r_ginv).norm());
        }
        worst
    }

    /// Left-normal identity `N_{f#} = -R_{h^{-1}}` (max residual).
    pub fn left_normal_identity(&self, samples: usize) -> f64 {
        let hinv = self.h.inverse_map();
        let mut worst: f64 = 0.0;
        for pt in sample_disk_points(samples, 0x74)
            .into_iter()
            .filter(|p| p.chart == Chart::Z)
        {
            let Ok((n_sharp, _)) = self.f_sharp.normals(pt) else { continue };
            let Ok((_, r_hinv)) = hinv.normals(pt) else { continue };
            worst = worst.max((n_sharp + r_hinv).norm());
        }
        worst
    }
}

/// Classification flags of a Darboux pair at the 1e-5 residual threshold.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DarbouxClass {
    /// `f#` twistor holomorphic (iff `g` is twistor holomorphic).
    pub twistor: bool,
    /// `f#` totally umbilic (additionally `h^{-1}` Euclidean minimal).
    pub umbilic: bool,
    /// `f#` planar (both `g^{-1}` and `h^{-1}` twistor and minimal).
    pub planar: bool,
    pub g_drpp: f64,
    pub hinv_dnp: f64,
    pub ginv_drpp: f64,
    pub ginv_dnp: f64,
    pub hinv_drpp: f64,
}

pub fn classify_darboux(pair: &DarbouxPair) -> DarbouxClass {
    let thresh = crate::surface::CLASSIFY_THRESHOLD;
    let samples: Vec<ChartPoint> = sample_disk_points(60, 0x75)
        .into_iter()
        .filter(|p| p.chart == Chart::Z)
        .collect();
    let max_ratio = |map: &SurfaceMap, pick: fn(&crate::surface::FrameSample) -> Quaternion| -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for pt in &samples {
            if let Ok(fr) = map.frame(*pt) {
                worst = worst.max(pick(&fr).norm());
                scale = scale.max(fr.fx.norm());
            }
        }
        worst / scale.max(1e-300)
    };
    let ginv = pair.g.inverse_map();
    let hinv = pair.h.inverse_map();
    let g_drpp = max_ratio(&pair.g, |fr| fr.drpp_x);
    let hinv_dnp = max_ratio(&hinv, |fr| fr.dnp_x);
    let ginv_drpp = max_ratio(&ginv, |fr| fr.drpp_x);
    let ginv_dnp = max_ratio(&ginv, |fr| fr.dnp_x);
    let hinv_drpp = max_ratio(&hinv, |fr| fr.drpp_x);
    let twistor = g_drpp < thresh;
    let umbilic = twistor && hinv_dnp < thresh;
    let planar = ginv_drpp < thresh && ginv_dnp < thresh && hinv_drpp < thresh && hinv_dnp < thresh;
    DarbouxClass {
        twistor,
        umbilic,
        planar,
        g_drpp,
        hinv_dnp,
        ginv_drpp,
        ginv_dnp,
        hinv_drpp,
    }
}

/// 1-step forward Baecklund transform: `g` with `dg = w`, the Baecklund
/// one-form of the frame. Defined up to an additive constant; requires `f`
/// Willmore (`w` closed).
pub fn backlund1_forward(f: &SurfaceMap, base: C) -> Result<SurfaceMap> {
    let fc = f.clone();
    let omega = move |z: C| -> (Quaternion, Quaternion) {
        match fc.frame(ChartPoint::z(z)) {
            Ok(fr) => (fr.w_x, fr.w_y),
            Err(_) => (Quaternion::default(), Quaternion::default()),
        }
    };
    // scale gate: identically small w means the transform is constant
    let mut wscale: f64 = 0.0;
    let mut fscale: f64 = 0.0;
    for pt in sample_disk_points(40, 0x76).into_iter().filter(|p| p.chart == Chart::Z) {
        let (wx, wy) = omega(pt.p);
        wscale = wscale.max(wx.norm().max(wy.norm()));
        if let Ok(fr) = f.frame(pt) {
            fscale = fscale.max(fr.fx.norm());
        }
    }
    if wscale < 1e-5 * fscale.max(1e-300) {
        // w = 0: constant transform
        return Ok(SurfaceMap::exact(
            |_z: C| Quaternion::default(),
            |_z: C| (Quaternion::default(), Quaternion::default()),
        ));
    }
    let res = closedness_residual(&omega, 60, 0xbac1);
    if res > 1e-5 {
        return Err(Error::NotClosed(res));
    }
    let omega = Arc::new(omega);
    let om_eval = omega.clone();
    let eval = move |z: C| integrate_form(om_eval.as_ref(), base, z, 0.02);
    let partials = move |z: C| omega(z);
    Ok(SurfaceMap::exact(eval, partials))
}

/// Which 2-step Baecklund transform to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backlund2Kind {
    /// `ker A`.
    Forward,
    /// `im Q`.
    Backward,
}

/// Report of a 2-step Baecklund transform: the pointwise line and a
/// constancy measure (max projective distance from the first sample).
pub struct Backlund2Report {
    pub kind: Backlund2Kind,
    pub points: Vec<QVec2>,
    pub constancy: f64,
}

pub fn backlund2(f: &SurfaceMap, kind: Backlund2Kind, samples: usize) -> Result<Backlund2Report> {
    let pts: Vec<ChartPoint> = sample_disk_points(samples, 0x77)
        .into_iter()
        .filter(|p| p.chart == Chart::Z)
        .collect();
    // undefined when the relevant field vanishes identically
    let mut field_scale: f64 = 0.0;
    let mut fx_scale: f64 = 0.0;
    let mut lines = Vec::new();
    for pt in &pts {
        let Ok(fr) = f.frame(*pt) else { continue };
        let m = match kind {
            Backlund2Kind::Forward => fr.a_x,
            Backlund2Kind::Backward => fr.q_x,
        };
        field_scale = field_scale.max(m.norm());
        fx_scale = fx_scale.max(fr.fx.norm());
        lines.push((pt, m));
    }
    if field_scale < 1e-7 * fx_scale.max(1e-300) {
        return Err(Error::Validation(
            "2-step transform undefined: the Hopf field vanishes identically".into(),
        ));
    }
    let mut points = Vec::new();
    for (_, m) in &lines {
        if m.norm() < 1e-6 * field_scale {
            continue; // isolated zero of the field
        }
        let p = match kind {
            Backlund2Kind::Forward => kernel_line(m),
            Backlund2Kind::Backward => image_line(m),
        };
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::Validation("no usable samples for the 2-step transform".into()));
    }
    let first = points[0];
    let constancy = points
        .iter()
        .map(|p| first.projective_distance(*p))
        .fold(0.0f64, f64::max);
    Ok(Backlund2Report { kind, points, constancy })
}

/// Kernel line of a (numerically rank-one) quaternionic 2x2 matrix.
fn kernel_line(m: &QMat2) -> QVec2 {
    // choose the better-conditioned row
    let row1 = m.a.norm() + m.b.norm();
    let row2 = m.c.norm() + m.d.norm();
    let (p, q) = if row1 >= row2 { (m.a, m.b) } else { (m.c, m.d) };
    if p.norm() >= q.norm() {
        QVec2::new(-(p.inv() * q), crate::quat::ONE)
    } else {
        QVec2::new(crate::quat::ONE, -(q.inv() * p))
    }
}

/// Image line (column space) of a rank-one quaternionic 2x2 matrix.
fn image_line(m: &QMat2) -> QVec2 {
    let col1 = m.a.norm() + m.c.norm();
    let col2 = m.b.norm() + m.d.norm();
    if col1 >= col2 {
        QVec2::new(m.a, m.c)
    } else {
        QVec2::new(m.b, m.d)
    }
}

/// Reconstructs the Darboux datum `(g, h0)` from a known transform target:
/// with `F = f# - f`, the datum satisfies `dg = -F^{-1} df# g`, a flat
/// left-linear system integrated from `base` with `g(base) = 1`; then
/// `h0 = F(base)`.
pub fn darboux_datum_from_target(
    f: &SurfaceMap,
    target: &SurfaceMap,
    base: C,
) -> (SurfaceMap, Quaternion) {
    let fc = f.clone();
    let tc = target.clone();
    let coeff = move |z: C| -> (Quaternion, Quaternion) {
        let pt = ChartPoint::z(z);
        let delta = tc.eval(pt) - fc.eval(pt);
        let (tx, ty) = tc.partials(pt);
        let di = delta.inv();
        (-(di * tx), -(di * ty))
    };
    let coeff = Arc::new(coeff);
    let c_eval = coeff.clone();
    let g_eval = move |z: C| solve_left_linear(c_eval.as_ref(), base, crate::quat::ONE, z, 0.01);
    let c_part = coeff.clone();
    let g_eval2 = g_eval.clone();
    let g_partials = move |z: C| {
        let g = g_eval2(z);
        let (ax, ay) = c_part(z);
        (ax * g, ay * g)
    };
    let g = SurfaceMap::exact(g_eval, g_partials);
    let h0 = target.eval(ChartPoint::z(base)) - f.eval(ChartPoint::z(base));
    (g, h0)
}

/// Solves the left-linear system `dg = A g` along the spiral path from
/// `base` (RK4 in the path parameter); used to reconstruct the Darboux datum
/// `g` from a known transform.
pub fn solve_left_linear<F>(coeff: &F, base: C, g0: Quaternion, to: C, step: f64) -> Quaternion
where
    F: Fn(C) -> (Quaternion, Quaternion) + ?Sized,
{
    let len = spiral_length(base, to).max((to - base).norm());
    if len == 0.0 {
        return g0;
    }
    let n = (len / step).ceil().max(8.0) as usize;
    let dt = 1.0 / n as f64;
    let a = |t: f64| -> Quaternion {
        let (z, dz) = spiral_path(base, to, t);
        let (ax, ay) = coeff(z);
        ax * dz.re + ay * dz.im
    };
    let mut g = g0;
    let mut t = 0.0;
    for _ in 0..n {
        let k1 = a(t) * g;
        let k2 = a(t + 0.5 * dt) * (g + k1 * (0.5 * dt));
        let k3 = a(t + 0.5 * dt) * (g + k2 * (0.5 * dt));
        let k4 = a(t + dt) * (g + k3 * dt);
        g = g + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        t += dt;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        catenoid_cousin, enneper_patch, hyperbolic_gauss, hyperbolic_gauss_surface, round_sphere,
    };

    #[test]
    fn rejects_non_closed_datum() {
        let f = round_sphere();
        // g = f itself: -df f is not closed for the round sphere
        let g = round_sphere();
        let err = darboux(&f, &g, C::new(0.3, 0.1), Quaternion::default());
        assert!(matches!(err, Err(Error::NotClosed(_))));
    }

    #[test]
    fn catenoid_gauss_pair_is_umbilic_darboux() {
        let cc = catenoid_cousin(1).unwrap();
        let gauss = hyperbolic_gauss(&cc.immersion).unwrap();
        let target = hyperbolic_gauss_surface(&gauss);
        let base = C::new(0.7, 0.2);
        let (g, h0) = darboux_datum_from_target(&cc.surface, &target, base);
        let pair = darboux(&cc.surface, &g, base, h0).unwrap();

        // the reconstructed transform reproduces the Gauss sphere
        let mut worst: f64 = 0.0;
        for pt in sample_disk_points(40, 0x99).into_iter().filter(|p| p.chart == Chart::Z) {
            let a = pair.f_sharp.eval(pt);
            let b = target.eval(pt);
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-5, "f# misses the Gauss sphere by {worst:.3e}");

        assert!(pair.compatibility_residual(60) < 1e-6);
        assert!(pair.right_normal_identity(60) < 1e-5);
        assert!(pair.left_normal_identity(60) < 1e-5);
        assert!(pair.derivative_identity_residual(30) < 1e-4);

        let class = classify_darboux(&pair);
        assert!(class.twistor, "dR''(g) = {:.3e}", class.g_drpp);
        assert!(class.umbilic, "dN'(h^-1) = {:.3e}", class.hinv_dnp);
    }

    #[test]
    fn backlund1_of_round_sphere_is_constant() {
        let f = round_sphere();
        let g = backlund1_forward(&f, C::new(0.2, 0.1)).unwrap();
        for pt in sample_disk_points(20, 0x7a).into_iter().filter(|p| p.chart == Chart::Z) {
            assert!(g.eval(pt).norm() < 1e-9);
        }
    }

    #[test]
    fn backlund2_of_minimal_is_constant_infinity() {
        let f = enneper_patch();
        let rep = backlund2(&f, Backlund2Kind::Backward, 40).unwrap();
        assert!(rep.constancy < 1e-5, "constancy {:.3e}", rep.constancy);
        let inf = QVec2::infinity();
        assert!(
            rep.points[0].projective_distance(inf) < 1e-5,
            "im Q is not the point at infinity"
        );
    }

    #[test]
    fn backlund2_rejects_vanishing_fields() {
        let f = round_sphere();
        assert!(backlund2(&f, Backlund2Kind::Forward, 30).is_err());
        assert!(backlund2(&f, Backlund2Kind::Backward, 30).is_err());
    }

    #[test]
    fn path_integration_base_independence() {
        let cc = catenoid_cousin(1).unwrap();
        let gauss = hyperbolic_gauss(&cc.immersion).unwrap();
        let target = hyperbolic_gauss_surface(&gauss);
        let base1 = C::new(0.7, 0.2);
        let base2 = C::new(-0.4, 0.5);
        let (g1, h01) = darboux_datum_from_target(&cc.surface, &target, base1);
        let (g2, h02) = darboux_datum_from_target(&cc.surface, &target, base2);
        let p1 = darboux(&cc.surface, &g1, base1, h01).unwrap();
        let p2 = darboux(&cc.surface, &g2, base2, h02).unwrap();
        // h's from the two bases differ by right multiplication by a constant
        // (the g-normalizations differ); f# itself must agree
        let mut worst: f64 = 0.0;
        for pt in sample_disk_points(20, 0x7b).into_iter().filter(|p| p.chart == Chart::Z) {
            let d = (p1.f_sharp.eval(pt) - p2.f_sharp.eval(pt)).norm();
            worst = worst.max(d);
        }
        assert!(worst < 1e-5, "base dependence {worst:.3e}");
    }
}
