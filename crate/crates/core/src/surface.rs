//! Conformal immersions in an affine chart and their first-order conformal
//! invariants: left/right normals, mean curvature half-density, the mean
//! curvature sphere congruence, and its Hopf fields.
//!
//! A [`SurfaceMap`] is a chart-aware evaluator `z -> f(z)` into the
//! quaternions together with an optional closed-form partial-derivative
//! provider. Everything else is derived: first derivatives either exact or by
//! Richardson-extrapolated central differences, higher invariants by
//! differentiating the derived fields.
//!
//! Conventions: `z = x + iy` positively oriented, the Hodge star on 1-forms
//! reads `*w(dx) = w(dy)`, so conformality is `f_y = N f_x = -f_x R` with
//! `N^2 = R^2 = -1`.

use crate::quat::{QMat2, QVec2, Quaternion, ONE, ZERO};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

type C = Complex64;

/// The two affine charts covering the parameter sphere: the `z` chart and the
/// `w = 1/z` chart, glued by `f_w(w) = f_z(1/w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Chart {
    Z,
    W,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::Z => Chart::W,
            Chart::W => Chart::Z,
        }
    }
}

/// A point of the parameter sphere in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub p: C,
}

impl ChartPoint {
    pub fn z(p: C) -> Self {
        ChartPoint { chart: Chart::Z, p }
    }
    pub fn w(p: C) -> Self {
        ChartPoint { chart: Chart::W, p }
    }
}

type EvalFn = dyn Fn(C) -> Quaternion + Send + Sync;
type PartialsFn = dyn Fn(C) -> (Quaternion, Quaternion) + Send + Sync;

/// Chart-aware evaluator of a quaternion-valued map of the parameter sphere.
///
/// The primary data is the `z`-chart evaluator; the `w`-chart is derived
/// through the transition `f_w(w) = f_z(1/w)` (exact partials transform by the
/// holomorphic chain rule). Values are immutable after construction and all
/// evaluations are pure, so maps can be shared freely across threads.
#[derive(Clone)]
pub struct SurfaceMap {
    eval_z: Arc<EvalFn>,
    partials_z: Option<Arc<PartialsFn>>,
    /// Points with `|f_x|` below this (times the local chart scale) are
    /// treated as branch points.
    pub fx_floor: f64,
    /// Finite-difference base step, relative to the local chart scale.
    pub fd_step: f64,
}

impl SurfaceMap {
    /// Map from an evaluator alone; derivatives by finite differences.
    pub fn numeric<F>(eval: F) -> Self
    where
        F: Fn(C) -> Quaternion + Send + Sync + 'static,
    {
        SurfaceMap {
            eval_z: Arc::new(eval),
            partials_z: None,
            fx_floor: 1e-9,
            fd_step: 1e-4,
        }
    }

    /// Map with closed-form partials `(f_x, f_y)` in the `z` chart.
    pub fn exact<F, G>(eval: F, partials: G) -> Self
    where
        F: Fn(C) -> Quaternion + Send + Sync + 'static,
        G: Fn(C) -> (Quaternion, Quaternion) + Send + Sync + 'static,
    {
        SurfaceMap {
            eval_z: Arc::new(eval),
            partials_z: Some(Arc::new(partials)),
            fx_floor: 1e-9,
            fd_step: 1e-4,
        }
    }

    pub fn has_exact_partials(&self) -> bool {
        self.partials_z.is_some()
    }

    /// Chart transition applied to a point: the same location on the sphere
    /// in the other chart.
    pub fn transit(pt: ChartPoint) -> ChartPoint {
        ChartPoint { chart: pt.chart.other(), p: pt.p.inv() }
    }

    pub fn eval(&self, pt: ChartPoint) -> Quaternion {
        match pt.chart {
            Chart::Z => (self.eval_z)(pt.p),
            Chart::W => (self.eval_z)(pt.p.inv()),
        }
    }

    /// First partials `(f_x, f_y)` with respect to the chart coordinate,
    /// exact when a provider is present, otherwise Richardson-extrapolated
    /// central differences.
    pub fn partials(&self, pt: ChartPoint) -> (Quaternion, Quaternion) {
        match (&self.partials_z, pt.chart) {
            (Some(p), Chart::Z) => p(pt.p),
            (Some(p), Chart::W) => {
                // f_w(w) = f_z(1/w); sigma'(w) = -1/w^2
                let zq = pt.p.inv();
                let (fx, fy) = p(zq);
                let sp = -(pt.p * pt.p).inv();
                let (a, b) = (sp.re, sp.im);
                (fx * a + fy * b, fx * (-b) + fy * a)
            }
            (None, _) => self.partials_numeric(pt),
        }
    }

    /// Finite-difference partials regardless of provider (used to validate
    /// exact providers).
    pub fn partials_numeric(&self, pt: ChartPoint) -> (Quaternion, Quaternion) {
        let scale = pt.p.norm().max(1.0);
        let h = self.fd_step * scale;
        let ex = C::new(1.0, 0.0);
        let ey = C::new(0.0, 1.0);
        let fx = richardson_central(|t| self.eval(ChartPoint { chart: pt.chart, p: pt.p + ex * t }), h);
        let fy = richardson_central(|t| self.eval(ChartPoint { chart: pt.chart, p: pt.p + ey * t }), h);
        (fx, fy)
    }

    /// Left and right normals `N = f_y f_x^{-1}`, `R = -f_x^{-1} f_y`.
    ///
    /// Errors at branch points (`|f_x|` under the floor). The conformality
    /// defect `max(|N^2+1|, |R^2+1|)` is the caller's residual to check.
    pub fn normals(&self, pt: ChartPoint) -> Result<(Quaternion, Quaternion)> {
        let (fx, fy) = self.partials(pt);
        let nfx = fx.norm();
        if nfx < self.fx_floor * pt.p.norm().max(1.0) {
            return Err(Error::BranchPoint(pt.p.re, pt.p.im));
        }
        let fx_inv = fx.inv();
        Ok((fy * fx_inv, -(fx_inv * fy)))
    }

    /// Mean curvature half-density `H = f_x^{-1} (N_x - N N_y)/2`; `|H|` is the
    /// norm of the mean curvature vector.
    pub fn mean_curvature(&self, pt: ChartPoint) -> Result<Quaternion> {
        let (fx, _) = self.partials(pt);
        if fx.norm() < self.fx_floor * pt.p.norm().max(1.0) {
            return Err(Error::BranchPoint(pt.p.re, pt.p.im));
        }
        let (n_x, n_y) = self.normal_derivatives(pt)?;
        let (n, _) = self.normals(pt)?;
        Ok(fx.inv() * (n_x - n * n_y) * 0.5)
    }

    /// Derivatives of the left normal by differencing the normal field.
    fn normal_derivatives(&self, pt: ChartPoint) -> Result<(Quaternion, Quaternion)> {
        let scale = pt.p.norm().max(1.0);
        let h = self.fd_step * scale;
        let nfield = |p: C| -> Quaternion {
            self.normals(ChartPoint { chart: pt.chart, p })
                .map(|(n, _)| n)
                .unwrap_or(ZERO)
        };
        let ex = C::new(1.0, 0.0);
        let ey = C::new(0.0, 1.0);
        let n_x = richardson_central(|t| nfield(pt.p + ex * t), h);
        let n_y = richardson_central(|t| nfield(pt.p + ey * t), h);
        Ok((n_x, n_y))
    }

    /// Mean curvature sphere congruence
    /// `S = Ad[[1, f], [0, 1]] [[N, 0], [-H, -R]]`.
    pub fn sphere_congruence(&self, pt: ChartPoint) -> Result<QMat2> {
        let fr = self.frame(pt)?;
        Ok(fr.s)
    }

    /// Full first- and second-order frame at a point: normals, mean
    /// curvature, sphere congruence, Hopf field components, and the
    /// Baecklund one-form.
    pub fn frame(&self, pt: ChartPoint) -> Result<FrameSample> {
        let f = self.eval(pt);
        let (fx, fy) = self.partials(pt);
        if fx.norm() < self.fx_floor * pt.p.norm().max(1.0) {
            return Err(Error::BranchPoint(pt.p.re, pt.p.im));
        }
        let fx_inv = fx.inv();
        let n = fy * fx_inv;
        let r = -(fx_inv * fy);

        let scale = pt.p.norm().max(1.0);
        let h = self.fd_step * scale;
        let ex = C::new(1.0, 0.0);
        let ey = C::new(0.0, 1.0);
        let nr_field = |p: C| -> (Quaternion, Quaternion) {
            self.normals(ChartPoint { chart: pt.chart, p }).unwrap_or((ZERO, ZERO))
        };
        let n_x = richardson_central(|t| nr_field(pt.p + ex * t).0, h);
        let n_y = richardson_central(|t| nr_field(pt.p + ey * t).0, h);
        let r_x = richardson_central(|t| nr_field(pt.p + ex * t).1, h);
        let r_y = richardson_central(|t| nr_field(pt.p + ey * t).1, h);

        let hq = fx_inv * (n_x - n * n_y) * 0.5;

        // translation frame T = [[1, f], [0, 1]]
        let t = QMat2::new(ONE, f, ZERO, ONE);
        let t_inv = QMat2::new(ONE, -f, ZERO, ONE);
        let s_inner = QMat2::new(n, ZERO, -hq, -r);
        let s = t.mul(s_inner).mul(t_inv);

        // derivatives of H via the mean-curvature field; a larger step keeps
        // the noise of the doubly nested differences down
        let h_step = h * 10.0;
        let h_field = |p: C| -> Quaternion {
            self.mean_curvature(ChartPoint { chart: pt.chart, p }).unwrap_or(ZERO)
        };
        let h_x = richardson_central(|t| h_field(pt.p + ex * t), h_step);
        let h_y = richardson_central(|t| h_field(pt.p + ey * t), h_step);

        let dnpp_x = (n_x + n * n_y) * 0.5;
        let dnpp_y = (n_y - n * n_x) * 0.5;
        let drpp_x = (r_x + r * r_y) * 0.5;
        let dnp_x = (n_x - n * n_y) * 0.5;
        let drp_x = (r_x - r * r_y) * 0.5;

        // w = (dH + R*dH - H*dN'')/2 evaluated on dx and dy
        let w_x = (h_x + r * h_y - hq * dnpp_y) * 0.5;
        let w_y = (h_y - r * h_x + hq * dnpp_x) * 0.5;

        // 2*A = Ad T [[0,0],[w, dR'']], 2*Q = Ad T [[dN'', 0],[w - dH, 0]]
        let star_a_x = t
            .mul(QMat2::new(ZERO, ZERO, w_x, drpp_x))
            .mul(t_inv)
            .scale(0.5);
        let star_q_x = t
            .mul(QMat2::new(dnpp_x, ZERO, w_x - h_x, ZERO))
            .mul(t_inv)
            .scale(0.5);
        // type conditions *A = S A, *Q = -S Q  =>  A = -S *A, Q = S *Q
        let a_x = s.mul(star_a_x).neg();
        let q_x = s.mul(star_q_x);

        Ok(FrameSample {
            f,
            fx,
            fy,
            n,
            r,
            h: hq,
            s,
            n_x,
            n_y,
            r_x,
            r_y,
            h_x,
            h_y,
            dnpp_x,
            drpp_x,
            dnp_x,
            drp_x,
            w_x,
            w_y,
            star_a_x,
            star_q_x,
            a_x,
            q_x,
        })
    }

    /// Hopf fields by decomposing the derivative of the sphere congruence,
    /// `A = (S dS + *dS)/4`, `Q = (S dS - *dS)/4`, with `dS` by finite
    /// differences. Independent of the affine-coordinate formulas in
    /// [`frame`](Self::frame); the two routes are compared in the residual
    /// report.
    pub fn hopf_via_nabla_s(&self, pt: ChartPoint) -> Result<HopfNablaS> {
        let s = self.sphere_congruence(pt)?;
        let scale = pt.p.norm().max(1.0);
        let h = self.fd_step * scale * 10.0;
        let ex = C::new(1.0, 0.0);
        let ey = C::new(0.0, 1.0);
        let s_field = |p: C| -> QMat2 {
            self.sphere_congruence(ChartPoint { chart: pt.chart, p })
                .unwrap_or_else(|_| QMat2::zero())
        };
        let s_x = richardson_central_mat(|t| s_field(pt.p + ex * t), h);
        let s_y = richardson_central_mat(|t| s_field(pt.p + ey * t), h);
        let a_x = s.mul(s_x).add(s_y).scale(0.25);
        let a_y = s.mul(s_y).sub(s_x).scale(0.25);
        let q_x = s.mul(s_x).sub(s_y).scale(0.25);
        let q_y = s.mul(s_y).add(s_x).scale(0.25);
        Ok(HopfNablaS { s, a_x, a_y, q_x, q_y })
    }

    /// Map combinator: the pointwise inverse `z -> f(z)^{-1}`.
    pub fn inverse_map(&self) -> SurfaceMap {
        let me = self.clone();
        let me2 = self.clone();
        let eval = move |z: C| me.eval(ChartPoint::z(z)).inv();
        if self.has_exact_partials() {
            let partials = move |z: C| {
                let f = me2.eval(ChartPoint::z(z));
                let (fx, fy) = me2.partials(ChartPoint::z(z));
                let fi = f.inv();
                (-(fi * fx * fi), -(fi * fy * fi))
            };
            SurfaceMap::exact(eval, partials)
        } else {
            SurfaceMap::numeric(eval)
        }
    }

    /// Map combinator: `z -> f(z) - a`.
    pub fn translate(&self, a: Quaternion) -> SurfaceMap {
        let me = self.clone();
        let eval = move |z: C| me.eval(ChartPoint::z(z)) - a;
        if self.has_exact_partials() {
            let me2 = self.clone();
            SurfaceMap::exact(eval, move |z| me2.partials(ChartPoint::z(z)))
        } else {
            SurfaceMap::numeric(eval)
        }
    }

    /// Similarity of the target space, `f -> lambda conj(q) f q + c` for a
    /// unit quaternion `q`; preserves the Willmore energy of surfaces in Im H.
    pub fn similarity(&self, q: Quaternion, lambda: f64, c: Quaternion) -> SurfaceMap {
        let qc = q.conj();
        let me = self.clone();
        let eval = move |z: C| qc * me.eval(ChartPoint::z(z)) * q * lambda + c;
        if self.has_exact_partials() {
            let me2 = self.clone();
            SurfaceMap::exact(eval, move |z| {
                let (fx, fy) = me2.partials(ChartPoint::z(z));
                (qc * fx * q * lambda, qc * fy * q * lambda)
            })
        } else {
            SurfaceMap::numeric(eval)
        }
    }
}

/// All per-point invariants produced by [`SurfaceMap::frame`].
#[derive(Debug, Clone, Copy)]
pub struct FrameSample {
    pub f: Quaternion,
    pub fx: Quaternion,
    pub fy: Quaternion,
    pub n: Quaternion,
    pub r: Quaternion,
    pub h: Quaternion,
    pub s: QMat2,
    pub n_x: Quaternion,
    pub n_y: Quaternion,
    pub r_x: Quaternion,
    pub r_y: Quaternion,
    pub h_x: Quaternion,
    pub h_y: Quaternion,
    /// dx-component of `dN'' = (dN + N *dN)/2` (vanishes iff the dual curve
    /// is twistor holomorphic).
    pub dnpp_x: Quaternion,
    /// dx-component of `dR''` (vanishes iff the curve is twistor holomorphic).
    pub drpp_x: Quaternion,
    /// dx-component of `dN' = (dN - N *dN)/2 = df H` (vanishes iff minimal).
    pub dnp_x: Quaternion,
    /// dx-component of `dR' = H df`.
    pub drp_x: Quaternion,
    /// The Baecklund one-form `w = (dH + R *dH - H *dN'')/2` on dx and dy.
    pub w_x: Quaternion,
    pub w_y: Quaternion,
    /// dx-components of `*A` and `*Q`.
    pub star_a_x: QMat2,
    pub star_q_x: QMat2,
    /// dx-components of the Hopf fields themselves.
    pub a_x: QMat2,
    pub q_x: QMat2,
}

impl FrameSample {
    pub fn conformality_residual(&self) -> f64 {
        let n2 = self.n * self.n + ONE;
        let r2 = self.r * self.r + ONE;
        let lin = self.fy - self.n * self.fx;
        let lin2 = self.fy + self.fx * self.r;
        let scale = self.fx.norm().max(1e-300);
        (n2.norm().max(r2.norm())).max(lin.norm().max(lin2.norm()) / scale)
    }

    pub fn s_squared_residual(&self) -> f64 {
        self.s.mul(self.s).add(QMat2::identity()).norm() / self.s.norm().max(1e-300).powi(2)
    }

    /// `S (f,1)^T` is projectively `(f,1)^T`.
    pub fn s_fixes_point_residual(&self) -> f64 {
        let v = QVec2::affine(self.f);
        let sv = self.s.apply(v);
        sv.projective_distance(v)
    }
}

/// Hopf field samples from the derivative of `S`.
#[derive(Debug, Clone, Copy)]
pub struct HopfNablaS {
    pub s: QMat2,
    pub a_x: QMat2,
    pub a_y: QMat2,
    pub q_x: QMat2,
    pub q_y: QMat2,
}

impl HopfNablaS {
    /// Residuals of the type identities `*A = S A = -A S`, `*Q = -S Q = Q S`,
    /// normalized by the field size.
    pub fn type_identity_residual(&self) -> f64 {
        let sa = self.s.mul(self.a_x);
        let as_ = self.a_x.mul(self.s);
        let sq = self.s.mul(self.q_x);
        let qs = self.q_x.mul(self.s);
        let scale = (self.a_x.norm() + self.q_x.norm()).max(1e-12);
        let r1 = self.a_y.sub(sa).norm();
        let r2 = self.a_y.add(as_).norm();
        let r3 = self.q_y.add(sq).norm();
        let r4 = self.q_y.sub(qs).norm();
        r1.max(r2).max(r3).max(r4) / scale
    }
}

/// Aggregated residual report over a sample set.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct ResidualReport {
    pub samples: usize,
    pub conformality_max: f64,
    pub conformality_mean: f64,
    pub s_squared_max: f64,
    pub s_fixes_point_max: f64,
    pub twistor_drpp_max: f64,
    pub dual_twistor_dnpp_max: f64,
    pub minimality_dnp_max: f64,
    pub hopf_type_identity_max: f64,
    /// Disagreement between the affine-formula Hopf fields and the
    /// `dS`-decomposition route.
    pub hopf_route_disagreement_max: f64,
    /// Classification flags at the `1e-5` threshold.
    pub twistor_holomorphic: bool,
    pub dual_twistor_holomorphic: bool,
    pub euclidean_minimal: bool,
    pub totally_umbilic: bool,
}

pub const CLASSIFY_THRESHOLD: f64 = 1e-5;

/// Evaluates the frame on a sample set and aggregates residuals and
/// classification flags.
pub fn residuals(map: &SurfaceMap, samples: &[ChartPoint]) -> ResidualReport {
    let mut rep = ResidualReport::default();
    let mut conf_sum = 0.0;
    let mut fx_scale: f64 = 0.0;
    let mut used = 0usize;
    let mut twist = 0.0f64;
    let mut dual = 0.0f64;
    let mut minim = 0.0f64;
    for pt in samples {
        let Ok(fr) = map.frame(*pt) else { continue };
        used += 1;
        let c = fr.conformality_residual();
        conf_sum += c;
        rep.conformality_max = rep.conformality_max.max(c);
        rep.s_squared_max = rep.s_squared_max.max(fr.s_squared_residual());
        rep.s_fixes_point_max = rep.s_fixes_point_max.max(fr.s_fixes_point_residual());
        fx_scale = fx_scale.max(fr.fx.norm());
        twist = twist.max(fr.drpp_x.norm());
        dual = dual.max(fr.dnpp_x.norm());
        minim = minim.max(fr.dnp_x.norm());
        if let Ok(hn) = map.hopf_via_nabla_s(*pt) {
            rep.hopf_type_identity_max = rep.hopf_type_identity_max.max(hn.type_identity_residual());
            let scale = hn.a_x.norm().max(hn.q_x.norm()).max(1e-9);
            let d = fr.a_x.sub(hn.a_x).norm().max(fr.q_x.sub(hn.q_x).norm()) / scale;
            rep.hopf_route_disagreement_max = rep.hopf_route_disagreement_max.max(d);
        }
    }
    rep.samples = used;
    if used > 0 {
        rep.conformality_mean = conf_sum / used as f64;
    }
    let fs = fx_scale.max(1e-300);
    rep.twistor_drpp_max = twist / fs;
    rep.dual_twistor_dnpp_max = dual / fs;
    rep.minimality_dnp_max = minim / fs;
    rep.twistor_holomorphic = rep.twistor_drpp_max < CLASSIFY_THRESHOLD;
    rep.dual_twistor_holomorphic = rep.dual_twistor_dnpp_max < CLASSIFY_THRESHOLD;
    rep.euclidean_minimal = rep.minimality_dnp_max < CLASSIFY_THRESHOLD;
    rep.totally_umbilic = rep.twistor_holomorphic && rep.dual_twistor_holomorphic;
    rep
}

/// Richardson-extrapolated central difference of a quaternion-valued function
/// of one real variable at 0.
pub fn richardson_central<F>(f: F, h: f64) -> Quaternion
where
    F: Fn(f64) -> Quaternion,
{
    let d = |s: f64| (f(s) - f(-s)) / (2.0 * s);
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (d2 * 4.0 - d1) / 3.0
}

fn richardson_central_mat<F>(f: F, h: f64) -> QMat2
where
    F: Fn(f64) -> QMat2,
{
    let d = |s: f64| f(s).sub(f(-s)).scale(1.0 / (2.0 * s));
    let d1 = d(h);
    let d2 = d(h / 2.0);
    d2.scale(4.0 / 3.0).sub(d1.scale(1.0 / 3.0))
}

/// Deterministic quasi-random sample points over both chart disks, keeping
/// away from chart centers and the seam.
pub fn sample_disk_points(count: usize, seed: u64) -> Vec<ChartPoint> {
    let mut state = seed.wrapping_add(0x9E3779B97F4A7C15);
    let mut next = move || {
        // splitmix64
        state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut x = state;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
        x ^= x >> 31;
        (x as f64) / (u64::MAX as f64)
    };
    (0..count)
        .map(|k| {
            let r = 0.1 + 0.8 * next();
            let th = 2.0 * std::f64::consts::PI * next();
            let p = C::from_polar(r, th);
            let chart = if k % 2 == 0 { Chart::Z } else { Chart::W };
            ChartPoint { chart, p }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{enneper_patch, round_sphere};
    use crate::quat::K;

    #[test]
    fn round_sphere_normals_at_origin() {
        let s = round_sphere();
        let (n, r) = s.normals(ChartPoint::z(C::new(0.0, 0.0))).unwrap();
        assert!((n + K).norm() < 1e-12, "N(0) = {n}");
        assert!((r + K).norm() < 1e-12, "R(0) = {r}");
    }

    #[test]
    fn round_sphere_conformality_and_unit_curvature() {
        let s = round_sphere();
        for pt in sample_disk_points(100, 7) {
            let fr = s.frame(pt).unwrap();
            assert!(fr.conformality_residual() < 1e-10);
            assert!(
                (fr.h.norm() - 1.0).abs() < 1e-8,
                "|H| = {} at {:?}",
                fr.h.norm(),
                pt
            );
            assert!(fr.s_squared_residual() < 1e-8);
            assert!(fr.s_fixes_point_residual() < 1e-8);
        }
    }

    #[test]
    fn round_sphere_sphere_congruence_constant() {
        let s = round_sphere();
        let s0 = s.sphere_congruence(ChartPoint::z(C::new(0.1, 0.2))).unwrap();
        for pt in sample_disk_points(50, 8) {
            let s1 = s.sphere_congruence(pt).unwrap();
            assert!(s1.sub(s0).norm() < 1e-8, "S varies: {}", s1.sub(s0).norm());
        }
    }

    #[test]
    fn round_sphere_hopf_fields_vanish() {
        let s = round_sphere();
        for pt in sample_disk_points(25, 9) {
            let fr = s.frame(pt).unwrap();
            assert!(fr.a_x.norm() < 1e-7, "A = {:?}", fr.a_x.norm());
            assert!(fr.q_x.norm() < 1e-7, "Q = {:?}", fr.q_x.norm());
        }
    }

    #[test]
    fn planar_map_constant_normals() {
        // z -> Re(z) i + Im(z) j stays in the ij-plane; normals constant +-k
        let f = SurfaceMap::exact(
            |z: C| Quaternion::from_imag(z.re, z.im, 0.0),
            |_z: C| (crate::quat::I, crate::quat::J),
        );
        let (n0, r0) = f.normals(ChartPoint::z(C::new(0.3, -0.4))).unwrap();
        for pt in sample_disk_points(30, 10) {
            if pt.chart != Chart::Z {
                continue;
            }
            let (n, r) = f.normals(pt).unwrap();
            assert!((n - n0).norm() < 1e-12);
            assert!((r - r0).norm() < 1e-12);
            assert!((n * n + ONE).norm() < 1e-12);
        }
        assert!((n0 - K).norm() < 1e-12 || (n0 + K).norm() < 1e-12);
        assert!((r0 - K).norm() < 1e-12 || (r0 + K).norm() < 1e-12);
    }

    #[test]
    fn enneper_is_minimal_with_constant_line_q_image() {
        let f = enneper_patch();
        for pt in sample_disk_points(40, 11) {
            if pt.chart != Chart::Z {
                continue;
            }
            let fr = f.frame(pt).unwrap();
            assert!(fr.h.norm() < 1e-8, "|H| = {}", fr.h.norm());
            // dN' = df H vanishes for minimal surfaces
            assert!(fr.dnp_x.norm() / fr.fx.norm() < 1e-7);
            // im(*Q) is contained in the constant line through infinity:
            // the lower row of *Q vanishes
            let low = fr.star_q_x.c.norm().max(fr.star_q_x.d.norm());
            let scale = fr.star_q_x.norm().max(1e-12);
            assert!(low / scale < 1e-6, "lower row of *Q: {low:.3e}");
        }
    }

    #[test]
    fn numeric_and_exact_partials_agree() {
        let s = round_sphere();
        for pt in sample_disk_points(100, 12) {
            let (ex, ey) = s.partials(pt);
            let (nx, ny) = s.partials_numeric(pt);
            assert!((ex - nx).norm() < 1e-6 * ex.norm().max(1.0));
            assert!((ey - ny).norm() < 1e-6 * ey.norm().max(1.0));
        }
    }

    #[test]
    fn chart_transition_consistency() {
        let s = round_sphere();
        // invariants agree between charts on the overlap annulus
        for k in 0..40 {
            let th = 0.157 * k as f64;
            let r = 0.6 + 0.02 * k as f64; // 0.6 .. 1.4
            let pz = ChartPoint::z(C::from_polar(r, th));
            let pw = SurfaceMap::transit(pz);
            let fz = s.eval(pz);
            let fw = s.eval(pw);
            assert!((fz - fw).norm() < 1e-12);
            let hz = s.mean_curvature(pz).unwrap().norm();
            let hw = s.mean_curvature(pw).unwrap().norm();
            assert!((hz - hw).abs() < 1e-6);
        }
    }

    #[test]
    fn hopf_routes_agree_on_curved_input() {
        // catenoid-cousin-like curved surface exercises both Hopf routes
        let f = enneper_patch();
        let pt = ChartPoint::z(C::new(0.4, 0.2));
        let fr = f.frame(pt).unwrap();
        let hn = f.hopf_via_nabla_s(pt).unwrap();
        let scale = hn.q_x.norm().max(1e-9);
        assert!(fr.q_x.sub(hn.q_x).norm() / scale < 1e-4);
        assert!(hn.type_identity_residual() < 1e-5);
    }

    #[test]
    fn branch_point_detection() {
        // f = z^2 as a map into the ij-plane has a branch point at 0
        let f = SurfaceMap::exact(
            |z: C| {
                let w = z * z;
                Quaternion::from_imag(w.re, w.im, 0.0)
            },
            |z: C| {
                let d = 2.0 * z;
                (
                    Quaternion::from_imag(d.re, d.im, 0.0),
                    Quaternion::from_imag(-d.im, d.re, 0.0),
                )
            },
        );
        assert!(matches!(
            f.normals(ChartPoint::z(C::new(0.0, 0.0))),
            Err(Error::BranchPoint(_, _))
        ));
        assert!(f.normals(ChartPoint::z(C::new(0.5, 0.0))).is_ok());
    }
}
