//! Adaptive quadrature: 1-D Simpson for line integrals and a worst-cell-first
//! 2-D rule for integrals over chart disks in polar coordinates.

use num_complex::Complex64;
use std::collections::BinaryHeap;

type C = Complex64;

/// Recursive adaptive Simpson with absolute tolerance.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
    }
}

const GL3_NODES: [f64; 3] = [-0.774596669241483, 0.0, 0.774596669241483];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
const GL5_NODES: [f64; 5] = [
    -0.906179845938664,
    -0.538469310105683,
    0.0,
    0.538469310105683,
    0.906179845938664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236926885056189,
    0.478628670499366,
    0.568888888888889,
    0.478628670499366,
    0.236926885056189,
];

#[derive(Debug, Clone, Copy)]
struct Cell {
    r0: f64,
    r1: f64,
    t0: f64,
    t1: f64,
    value: f64,
    err: f64,
    depth: u32,
    near_hotspot: bool,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| self.r0.partial_cmp(&other.r0).unwrap_or(std::cmp::Ordering::Equal))
            .then_with(|| self.t0.partial_cmp(&other.t0).unwrap_or(std::cmp::Ordering::Equal))
    }
}

/// Result of a 2-D disk integration.
#[derive(Debug, Clone, Copy)]
pub struct DiskQuad {
    pub value: f64,
    pub err_estimate: f64,
    pub converged: bool,
    /// Center of the worst remaining cell in disk coordinates.
    pub worst_cell: C,
    pub cells: usize,
    pub max_depth: u32,
}

/// Adaptive integral of `g` over the unit disk `|p| <= 1`, worked in polar
/// coordinates. Cells are refined worst-first (Gauss 5x5 value, 3x3 error
/// gauge) until the error estimate drops under `rel_tol` of the running
/// value. Depth is capped at 14, extended to 18 for cells near one of the
/// `hotspots` (flagged branch points or ends).
pub fn integrate_disk<G>(g: &G, rel_tol: f64, hotspots: &[C]) -> DiskQuad
where
    G: Fn(C) -> f64 + Sync + ?Sized,
{
    let fr = |r: f64, t: f64| -> f64 {
        let p = C::from_polar(r, t);
        g(p) * r
    };
    let eval_cell = |r0: f64, r1: f64, t0: f64, t1: f64| -> (f64, f64) {
        let mut v5 = 0.0;
        for (ri, rw) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            let r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * ri;
            for (ti, tw) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
                let t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * ti;
                v5 += rw * tw * fr(r, t);
            }
        }
        v5 *= 0.25 * (r1 - r0) * (t1 - t0);
        let mut v3 = 0.0;
        for (ri, rw) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
            let r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * ri;
            for (ti, tw) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
                let t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * ti;
                v3 += rw * tw * fr(r, t);
            }
        }
        v3 *= 0.25 * (r1 - r0) * (t1 - t0);
        (v5, (v5 - v3).abs())
    };
    let near_hotspot = |r0: f64, r1: f64, t0: f64, t1: f64| -> bool {
        if hotspots.is_empty() {
            return false;
        }
        let rc = 0.5 * (r0 + r1);
        let tc = 0.5 * (t0 + t1);
        let center = C::from_polar(rc, tc);
        let diag = ((r1 - r0).powi(2) + (rc * (t1 - t0)).powi(2)).sqrt();
        hotspots.iter().any(|h| (center - h).norm() < 1e-2 + diag)
    };

    let mut heap: BinaryHeap<Cell> = BinaryHeap::new();
    let two_pi = 2.0 * std::f64::consts::PI;
    let init_r = 4usize;
    let init_t = 8usize;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for i in 0..init_r {
        for j in 0..init_t {
            let r0 = i as f64 / init_r as f64;
            let r1 = (i + 1) as f64 / init_r as f64;
            let t0 = two_pi * j as f64 / init_t as f64;
            let t1 = two_pi * (j + 1) as f64 / init_t as f64;
            let (v, e) = eval_cell(r0, r1, t0, t1);
            total += v;
            total_err += e;
            heap.push(Cell {
                r0,
                r1,
                t0,
                t1,
                value: v,
                err: e,
                depth: 0,
                near_hotspot: near_hotspot(r0, r1, t0, t1),
            });
        }
    }

    let max_cells = 60_000usize;
    let mut max_depth_seen = 0u32;
    while total_err > rel_tol * total.abs().max(1e-12) && heap.len() < max_cells {
        let Some(worst) = heap.pop() else { break };
        let depth_cap = if worst.near_hotspot { 18 } else { 14 };
        if worst.depth >= depth_cap {
            // put it back; nothing at smaller error can help either, stop
            heap.push(worst);
            break;
        }
        total -= worst.value;
        total_err -= worst.err;
        let rm = 0.5 * (worst.r0 + worst.r1);
        let tm = 0.5 * (worst.t0 + worst.t1);
        for (r0, r1, t0, t1) in [
            (worst.r0, rm, worst.t0, tm),
            (rm, worst.r1, worst.t0, tm),
            (worst.r0, rm, tm, worst.t1),
            (rm, worst.r1, tm, worst.t1),
        ] {
            let (v, e) = eval_cell(r0, r1, t0, t1);
            total += v;
            total_err += e;
            let depth = worst.depth + 1;
            max_depth_seen = max_depth_seen.max(depth);
            heap.push(Cell {
                r0,
                r1,
                t0,
                t1,
                value: v,
                err: e,
                depth,
                near_hotspot: near_hotspot(r0, r1, t0, t1),
            });
        }
    }

    let converged = total_err <= rel_tol * total.abs().max(1e-12);
    let worst = heap.peek();
    let worst_cell = worst
        .map(|c| C::from_polar(0.5 * (c.r0 + c.r1), 0.5 * (c.t0 + c.t1)))
        .unwrap_or_else(|| C::new(0.0, 0.0));
    DiskQuad {
        value: total,
        err_estimate: total_err,
        converged,
        worst_cell,
        cells: heap.len(),
        max_depth: max_depth_seen,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_sech_squared() {
        // integral of sech^2 over R is 2
        let v = adaptive_simpson(&|x: f64| 1.0 / x.cosh().powi(2), -30.0, 30.0, 1e-10, 40);
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn disk_area() {
        let q = integrate_disk(&|_p: C| 1.0, 1e-6, &[]);
        assert!(q.converged);
        assert!((q.value - std::f64::consts::PI).abs() < 1e-8, "{}", q.value);
    }

    #[test]
    fn disk_gaussian() {
        // integral over unit disk of e^{-|p|^2} = pi (1 - e^{-1})
        let q = integrate_disk(&|p: C| (-p.norm_sqr()).exp(), 1e-8, &[]);
        let expect = std::f64::consts::PI * (1.0 - (-1.0f64).exp());
        assert!((q.value - expect).abs() < 1e-7 * expect, "{} vs {expect}", q.value);
    }

    #[test]
    fn disk_peaked_integrand_refines() {
        // sharp bump at p = 0.5: adaptive refinement required
        let center = C::new(0.5, 0.0);
        let g = |p: C| 1.0 / (1e-4 + (p - center).norm_sqr());
        let q = integrate_disk(&g, 1e-4, &[center]);
        assert!(q.converged, "err {}", q.err_estimate);
        // reference by a fine fixed grid in polar coordinates
        let mut reference = 0.0;
        let nr = 4000;
        let nt = 4000;
        for i in 0..nr {
            let r = (i as f64 + 0.5) / nr as f64;
            for j in 0..nt {
                let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / nt as f64;
                reference += g(C::from_polar(r, t)) * r;
            }
        }
        reference *= 2.0 * std::f64::consts::PI / (nr as f64 * nt as f64);
        assert!(
            (q.value - reference).abs() < 2e-3 * reference,
            "{} vs {reference}",
            q.value
        );
    }
}
