//! Global invariants: Willmore energy by the extrinsic and potential routes,
//! the integer quantization gate, the spin-bundle arithmetic identity, and
//! branch-point scanning.

use crate::quad::{adaptive_simpson, integrate_disk};
use crate::spectral::SpinBasis;
use crate::surface::{Chart, ChartPoint, SurfaceMap};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

type C = Complex64;

pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
/// Default quantization tolerance in units of `W / 4 pi`.
pub const QUANTIZATION_TOL: f64 = 0.02;
/// Default relative tolerance of the 2-D energy quadrature.
pub const ENERGY_REL_TOL: f64 = 1e-3;

/// Which route produced an energy value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnergyRoute {
    Extrinsic,
    Potential,
}

/// Verdict of the `W = 4 pi d` quantization gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "d")]
pub enum QuantizationVerdict {
    /// Within tolerance of an admissible integer.
    Pass(u32),
    /// Within tolerance of one of the excluded integers 2, 3, 5, 7.
    FailGap(u32),
    /// Not within tolerance of any admissible integer.
    FailNonInteger,
}

impl QuantizationVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, QuantizationVerdict::Pass(_))
    }
}

/// `d` is admissible when `d` is a positive integer outside `{2, 3, 5, 7}`.
pub fn admissible_integer(d: u32) -> bool {
    d != 0 && !matches!(d, 2 | 3 | 5 | 7)
}

/// Nearest-integer quantization check of a Willmore energy.
pub fn quantization_check(w: f64, tol: f64) -> QuantizationVerdict {
    let ratio = w / FOUR_PI;
    let d = ratio.round();
    if d >= 0.0 && (ratio - d).abs() < tol {
        let d = d as u32;
        if admissible_integer(d) {
            QuantizationVerdict::Pass(d)
        } else if matches!(d, 2 | 3 | 5 | 7) {
            QuantizationVerdict::FailGap(d)
        } else {
            QuantizationVerdict::FailNonInteger
        }
    } else {
        QuantizationVerdict::FailNonInteger
    }
}

/// Energy measurement with its quantization verdict.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub w: f64,
    pub w_over_4pi: f64,
    pub route: EnergyRoute,
    pub quadrature_error: f64,
    pub verdict: QuantizationVerdict,
    pub admissible: bool,
}

impl EnergyReport {
    fn new(w: f64, route: EnergyRoute, err: f64) -> Self {
        let verdict = quantization_check(w, QUANTIZATION_TOL);
        EnergyReport {
            w,
            w_over_4pi: w / FOUR_PI,
            route,
            quadrature_error: err,
            verdict,
            admissible: verdict.passed(),
        }
    }
}

/// Extrinsic Willmore energy `W = integral |H|^2 |df|^2 dx dy` over the two
/// chart disks, by adaptive quadrature at relative tolerance `rel_tol`.
/// `hotspots` lists chart points (branch points, ends) whose neighborhoods
/// may be refined deeper.
pub fn willmore_energy_extrinsic(
    map: &SurfaceMap,
    rel_tol: f64,
    hotspots: &[ChartPoint],
) -> Result<EnergyReport> {
    let mut total = 0.0;
    let mut err = 0.0;
    for chart in [Chart::Z, Chart::W] {
        let spots: Vec<C> = hotspots
            .iter()
            .filter(|pt| pt.chart == chart)
            .map(|pt| pt.p)
            .collect();
        let density = |p: C| -> f64 {
            let pt = ChartPoint { chart, p };
            let (fx, _) = map.partials(pt);
            match map.mean_curvature(pt) {
                Ok(h) => h.norm_sq() * fx.norm_sq(),
                Err(_) => 0.0,
            }
        };
        let q = integrate_disk(&density, rel_tol * 0.5, &spots);
        if !q.converged {
            return Err(Error::QuadratureNonConvergence(
                q.worst_cell.re,
                q.worst_cell.im,
                q.err_estimate,
            ));
        }
        total += q.value;
        err += q.err_estimate;
    }
    Ok(EnergyReport::new(total, EnergyRoute::Extrinsic, err))
}

/// Potential-route Willmore energy `W = 4 integral q^2 dx dy`. For the
/// rotational potentials this reduces to the radial trace integral
/// `W = 8 pi integral U^2 dx`.
pub fn willmore_energy_potential(basis: &SpinBasis) -> EnergyReport {
    let u = &basis.potential;
    let value = adaptive_simpson(
        &|x: f64| {
            let v = u.eval(x);
            v * v
        },
        -u.x_max,
        u.x_max,
        1e-10,
        40,
    );
    EnergyReport::new(8.0 * std::f64::consts::PI * value, EnergyRoute::Potential, 1e-8)
}

/// General-chart potential energy `4 integral q^2` over both disks; agrees
/// with the radial reduction for rotational potentials (used as a
/// cross-check).
pub fn willmore_energy_potential_2d(basis: &SpinBasis, rel_tol: f64) -> Result<EnergyReport> {
    let mut total = 0.0;
    let mut err = 0.0;
    for chart in [Chart::Z, Chart::W] {
        let density = |p: C| -> f64 {
            let q = match chart {
                Chart::Z => basis.q(p),
                // q transforms with the |dz| weight: q_w(w) = q(1/w)/|w|^2
                Chart::W => {
                    if p.norm() < 1e-12 {
                        0.0
                    } else {
                        basis.q(p.inv()) / p.norm_sqr()
                    }
                }
            };
            4.0 * q * q
        };
        let q = integrate_disk(&density, rel_tol * 0.5, &[]);
        if !q.converged {
            return Err(Error::QuadratureNonConvergence(
                q.worst_cell.re,
                q.worst_cell.im,
                q.err_estimate,
            ));
        }
        total += q.value;
        err += q.err_estimate;
    }
    Ok(EnergyReport::new(total, EnergyRoute::Potential, err))
}

/// Spin-bundle arithmetic identity `W = 4 pi [(n+1)^2 + |ord H|]` for a
/// genus-zero `(n+1)`-dimensional linear system, plus the bookkeeping
/// `W(moebius) = W - 4 pi`.
#[derive(Debug, Clone, Serialize)]
pub struct PluckerSpinReport {
    pub w: f64,
    pub n: u32,
    pub ord_h: u32,
    pub target: f64,
    pub passes: bool,
    /// Energy of the Moebius-invariant bundle, `W - 4 pi`.
    pub w_moebius: f64,
    /// `W/4pi - (n+1)^2`, the order the identity would require.
    pub inferred_ord_h: f64,
}

pub fn plucker_spin_check(w: f64, n: u32, ord_h: u32, tol: f64) -> PluckerSpinReport {
    let target = FOUR_PI * (((n + 1) * (n + 1)) as f64 + ord_h as f64);
    PluckerSpinReport {
        w,
        n,
        ord_h,
        target,
        passes: (w - target).abs() < tol * target.max(1.0),
        w_moebius: w - FOUR_PI,
        inferred_ord_h: w / FOUR_PI - (((n + 1) * (n + 1)) as f64),
    }
}

/// A located branch point with its estimated order.
#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub chart: Chart,
    pub location: [f64; 2],
    pub order: u32,
    /// Root-mean-square deviation of the per-ray decay exponents from the
    /// reported integer order.
    pub confidence: f64,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BranchReport {
    pub points: Vec<BranchPoint>,
}

/// Scans both chart disks for zeros of `|f_x|` and estimates branch orders
/// from the decay exponent along 4 rays (radii `eps` and `2 eps`).
pub fn branch_scan(map: &SurfaceMap) -> BranchReport {
    let mut report = BranchReport::default();
    // global derivative scale for thresholding
    let mut scale: f64 = 0.0;
    for pt in crate::surface::sample_disk_points(200, 77) {
        let (fx, _) = map.partials(pt);
        if fx.is_finite() {
            scale = scale.max(fx.norm());
        }
    }
    if scale == 0.0 {
        return report;
    }

    let mut candidates: Vec<ChartPoint> = Vec::new();
    for chart in [Chart::Z, Chart::W] {
        // chart centers are the usual suspects (axis points)
        candidates.push(ChartPoint { chart, p: C::new(0.0, 0.0) });
        // coarse interior scan
        let nr = 16;
        let nt = 32;
        let mut best: Option<(f64, C)> = None;
        for i in 1..=nr {
            let r = i as f64 / nr as f64 * 0.95;
            for j in 0..nt {
                let t = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
                let p = C::from_polar(r, t);
                let (fx, _) = map.partials(ChartPoint { chart, p });
                let v = fx.norm();
                if best.as_ref().map(|(b, _)| v < *b).unwrap_or(true) {
                    best = Some((v, p));
                }
            }
        }
        if let Some((v, p)) = best {
            if v < 1e-3 * scale {
                // refine by shrinking grid descent
                let mut center = p;
                let mut radius = 0.1;
                for _ in 0..24 {
                    let mut local_best = (f64::INFINITY, center);
                    for a in -2..=2 {
                        for b in -2..=2 {
                            let q = center + C::new(a as f64, b as f64) * (radius / 2.0);
                            let (fx, _) = map.partials(ChartPoint { chart, p: q });
                            let v = fx.norm();
                            if v < local_best.0 {
                                local_best = (v, q);
                            }
                        }
                    }
                    center = local_best.1;
                    radius *= 0.5;
                }
                candidates.push(ChartPoint { chart, p: center });
            }
        }
    }

    for cand in candidates {
        let eps = 1e-3;
        let probe = |rad: f64, k: usize| -> f64 {
            let t = std::f64::consts::PI * 0.5 * k as f64 + 0.3;
            let p = cand.p + C::from_polar(rad, t);
            let (fx, _) = map.partials(ChartPoint { chart: cand.chart, p });
            fx.norm()
        };
        let near: f64 = (0..4).map(|k| probe(eps, k)).sum::<f64>() / 4.0;
        if near > 1e-2 * scale {
            continue; // not a branch point
        }
        // avoid duplicates (the same point found from both passes)
        if report.points.iter().any(|bp| {
            bp.chart == cand.chart
                && (C::new(bp.location[0], bp.location[1]) - cand.p).norm() < 1e-2
        }) {
            continue;
        }
        let mut exponents = [0.0; 4];
        for (k, e) in exponents.iter_mut().enumerate() {
            let v1 = probe(eps, k).max(1e-300);
            let v2 = probe(2.0 * eps, k).max(1e-300);
            *e = (v2 / v1).ln() / 2.0f64.ln();
        }
        let mean = exponents.iter().sum::<f64>() / 4.0;
        let order = mean.round().max(0.0) as u32;
        let spread = exponents
            .iter()
            .map(|e| (e - order as f64).powi(2))
            .sum::<f64>()
            .sqrt()
            / 2.0;
        if order == 0 {
            continue;
        }
        report.points.push(BranchPoint {
            chart: cand.chart,
            location: [cand.p.re, cand.p.im],
            order,
            confidence: spread,
            ambiguous: spread > 0.1,
        });
    }
    report
}
