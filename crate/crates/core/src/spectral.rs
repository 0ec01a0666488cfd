//! The 1-D spectral machinery behind the rotational families: bound states of
//! the off-diagonal first-order operator `L = [[-d/dx, 2U], [2U, d/dx]]`,
//! trace integrals, reflectionless potential synthesis, spinor sections of
//! the associated Dirac equation, and integration of the induced surface
//! one-form.

use crate::quat::{Quaternion, I as QI, J as QJ};
use crate::surface::SurfaceMap;
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

type C = Complex64;

/// Default half-width of the truncated line; bound states with
/// `kappa >= 1/2` decay below 1e-12 well inside it.
pub const DEFAULT_X_MAX: f64 = 30.0;
/// Default integration step for the shooting integrator.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Rapidly decaying real potential on the line.
#[derive(Clone)]
pub struct Potential {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub x_max: f64,
}

impl Potential {
    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Potential { eval: Arc::new(eval), x_max: DEFAULT_X_MAX }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// `U(x) = (n+1) / (2 cosh x)`: the maximally symmetric reflectionless
    /// potential with bound states `kappa = 1/2, 3/2, ..., n + 1/2`.
    pub fn sech_family(n: u32) -> Self {
        let amp = (n + 1) as f64;
        Potential::new(move |x: f64| amp / (2.0 * x.cosh()))
    }

    pub fn zero() -> Self {
        Potential::new(|_| 0.0)
    }

    /// Two-column `x,U` CSV, one sample per line. Rows outside the truncation
    /// are dropped; evaluation interpolates linearly and decays to zero
    /// outside the samples.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut xs: Vec<f64> = Vec::new();
        let mut us: Vec<f64> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',');
            let x: f64 = it
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Validation(format!("csv line {}: bad x", lineno + 1)))?;
            let u: f64 = it
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Validation(format!("csv line {}: bad U", lineno + 1)))?;
            xs.push(x);
            us.push(u);
        }
        if xs.len() < 2 {
            return Err(Error::Validation("csv potential needs at least 2 samples".into()));
        }
        if !xs.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Validation("csv potential x-column must increase".into()));
        }
        let x_max = xs.last().unwrap().abs().max(xs[0].abs()).max(DEFAULT_X_MAX);
        let mut p = Potential::new(move |x: f64| {
            if x <= xs[0] || x >= *xs.last().unwrap() {
                return 0.0;
            }
            let idx = xs.partition_point(|&t| t <= x) - 1;
            let t = (x - xs[idx]) / (xs[idx + 1] - xs[idx]);
            us[idx] * (1.0 - t) + us[idx + 1] * t
        });
        p.x_max = x_max;
        Ok(p)
    }

    pub fn to_csv(&self, n_samples: usize) -> String {
        let mut out = String::new();
        for k in 0..n_samples {
            let x = -self.x_max + 2.0 * self.x_max * k as f64 / (n_samples - 1) as f64;
            out.push_str(&format!("{:.12e},{:.12e}\n", x, self.eval(x)));
        }
        out
    }
}

/// The truncated spectral problem for `L nu = -kappa nu`.
#[derive(Clone)]
pub struct AknsProblem {
    pub potential: Potential,
    pub x_max: f64,
    pub step: f64,
}

impl AknsProblem {
    pub fn new(potential: Potential) -> Self {
        let x_max = potential.x_max;
        AknsProblem { potential, x_max, step: DEFAULT_STEP }
    }

    /// First-order system for `L nu = -kappa nu`:
    /// `nu1' = kappa nu1 + 2U nu2`, `nu2' = -2U nu1 - kappa nu2`.
    fn rhs(&self, kappa: f64, x: f64, nu: [f64; 2]) -> [f64; 2] {
        let u2 = 2.0 * self.potential.eval(x);
        [kappa * nu[0] + u2 * nu[1], -u2 * nu[0] - kappa * nu[1]]
    }

    /// Integrates from `x0` to `x1` with classic fixed-step RK4, renormalizing
    /// by a positive factor to avoid overflow; returns the (renormalized)
    /// solution direction at `x1`.
    fn shoot(&self, kappa: f64, x0: f64, x1: f64, start: [f64; 2]) -> [f64; 2] {
        let n = ((x1 - x0).abs() / self.step).ceil() as usize;
        let h = (x1 - x0) / n as f64;
        let mut x = x0;
        let mut v = start;
        for _ in 0..n {
            let k1 = self.rhs(kappa, x, v);
            let k2 = self.rhs(kappa, x + 0.5 * h, [v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]]);
            let k3 = self.rhs(kappa, x + 0.5 * h, [v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]]);
            let k4 = self.rhs(kappa, x + h, [v[0] + h * k3[0], v[1] + h * k3[1]]);
            v = [
                v[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                v[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            x += h;
            let m = v[0].abs().max(v[1].abs());
            if m > 1e100 {
                v = [v[0] / m, v[1] / m];
            }
        }
        v
    }

    /// Matching determinant whose zeros are the eigenvalues: the Wronskian of
    /// the decaying solutions shot from both ends, evaluated at `x = 0`.
    pub fn matching_determinant(&self, kappa: f64) -> f64 {
        // decaying directions: e^{kappa x}(1,0) at -inf, e^{-kappa x}(0,1) at +inf
        let left = self.shoot(kappa, -self.x_max, 0.0, [1.0, 0.0]);
        let right = self.shoot(kappa, self.x_max, 0.0, [0.0, 1.0]);
        let ln = (left[0].powi(2) + left[1].powi(2)).sqrt();
        let rn = (right[0].powi(2) + right[1].powi(2)).sqrt();
        (left[0] * right[1] - left[1] * right[0]) / (ln * rn)
    }
}

/// A bound state: eigenvalue parameter `kappa > 0` with `L nu = -kappa nu`,
/// plus the normalized eigenfunction on the integration grid.
#[derive(Clone)]
pub struct BoundState {
    pub kappa: f64,
    /// Grid origin and step; samples run over `x0 + i h`.
    pub x0: f64,
    pub h: f64,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    potential: Potential,
}

impl BoundState {
    /// Eigenfunction value with analytic exponential tails outside the grid.
    pub fn eval(&self, x: f64) -> [f64; 2] {
        let x_last = self.x0 + self.h * (self.nu1.len() - 1) as f64;
        if x < self.x0 {
            let s = (self.kappa * (x - self.x0)).exp();
            return [self.nu1[0] * s, self.nu2[0] * s];
        }
        if x > x_last {
            let s = (-self.kappa * (x - x_last)).exp();
            let m = self.nu1.len() - 1;
            return [self.nu1[m] * s, self.nu2[m] * s];
        }
        // cubic Hermite using ODE slopes at the cell endpoints
        let fi = (x - self.x0) / self.h;
        let i = (fi.floor() as usize).min(self.nu1.len() - 2);
        let t = fi - i as f64;
        let xa = self.x0 + self.h * i as f64;
        let pa = [self.nu1[i], self.nu2[i]];
        let pb = [self.nu1[i + 1], self.nu2[i + 1]];
        let ma = self.slope(xa, pa);
        let mb = self.slope(xa + self.h, pb);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let mut out = [0.0; 2];
        for c in 0..2 {
            out[c] = h00 * pa[c] + h10 * self.h * ma[c] + h01 * pb[c] + h11 * self.h * mb[c];
        }
        out
    }

    /// Value together with the ODE-consistent derivative.
    pub fn eval_with_deriv(&self, x: f64) -> ([f64; 2], [f64; 2]) {
        let v = self.eval(x);
        (v, self.slope(x, v))
    }

    fn slope(&self, x: f64, nu: [f64; 2]) -> [f64; 2] {
        let u2 = 2.0 * self.potential.eval(x);
        [self.kappa * nu[0] + u2 * nu[1], -u2 * nu[0] - self.kappa * nu[1]]
    }

    /// Relative L2 eigen-residual using 5-point finite differences of the
    /// stored grid (independent of the integrator's own derivative).
    pub fn eigen_residual(&self) -> f64 {
        let n = self.nu1.len();
        let mut num = 0.0;
        let mut den = 0.0;
        let d5 = |v: &Vec<f64>, i: usize| -> f64 {
            (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * self.h)
        };
        for i in 2..n - 2 {
            let x = self.x0 + self.h * i as f64;
            let u2 = 2.0 * self.potential.eval(x);
            let r1 = -d5(&self.nu1, i) + u2 * self.nu2[i] + self.kappa * self.nu1[i];
            let r2 = u2 * self.nu1[i] + d5(&self.nu2, i) + self.kappa * self.nu2[i];
            num += r1 * r1 + r2 * r2;
            den += self.nu1[i] * self.nu1[i] + self.nu2[i] * self.nu2[i];
        }
        (num / den.max(1e-300)).sqrt()
    }

    /// Plain L2 pairing of two eigenfunction grids.
    pub fn l2_dot(&self, o: &BoundState) -> f64 {
        let n = self.nu1.len().min(o.nu1.len());
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.nu1[i] * o.nu1[i] + self.nu2[i] * o.nu2[i];
        }
        acc * self.h
    }

    /// The pairing `integral(nu1 mu2 + nu2 mu1)`, which the operator's
    /// symmetry makes vanish across distinct eigenvalues.
    pub fn flip_dot(&self, o: &BoundState) -> f64 {
        let n = self.nu1.len().min(o.nu1.len());
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.nu1[i] * o.nu2[i] + self.nu2[i] * o.nu1[i];
        }
        acc * self.h
    }
}

/// All bound states with `kappa` in `(0, kappa_max]`, found by scanning the
/// matching determinant on a grid of step 0.05 and bisecting each sign change
/// to `1e-10`.
pub fn akns_bound_states(problem: &AknsProblem, kappa_max: f64) -> Result<Vec<BoundState>> {
    if problem.potential.eval(problem.x_max).abs() > 1e-10
        || problem.potential.eval(-problem.x_max).abs() > 1e-10
    {
        return Err(Error::Spectral(format!(
            "potential does not decay at +-{}",
            problem.x_max
        )));
    }
    let grid_step = 0.05;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut kappa = grid_step * 0.5;
    let mut prev = problem.matching_determinant(kappa);
    let mut prev_kappa = kappa;
    while kappa < kappa_max {
        kappa = (kappa + grid_step).min(kappa_max);
        let here = problem.matching_determinant(kappa);
        if prev * here < 0.0 {
            brackets.push((prev_kappa, kappa));
        }
        prev = here;
        prev_kappa = kappa;
        if (kappa - kappa_max).abs() < 1e-15 {
            break;
        }
    }
    let mut states = Vec::new();
    for (mut lo, mut hi) in brackets {
        let mut flo = problem.matching_determinant(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fmid = problem.matching_determinant(mid);
            if flo * fmid <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fmid;
            }
            if hi - lo < 1e-10 {
                break;
            }
        }
        let kappa = 0.5 * (lo + hi);
        states.push(assemble_state(problem, kappa)?);
    }
    // missed-state check: the determinant changed sign exactly once per state
    for pair in states.windows(2) {
        if (pair[0].kappa - pair[1].kappa).abs() < 1e-8 {
            return Err(Error::Spectral("duplicate eigenvalue after bisection".into()));
        }
    }
    Ok(states)
}

/// Integrates the eigenfunction at a converged `kappa`, gluing the two
/// one-sided shots at `x = 0` and normalizing to unit L2.
fn assemble_state(problem: &AknsProblem, kappa: f64) -> Result<BoundState> {
    let x_max = problem.x_max;
    let h = problem.step;
    let n_half = (x_max / h).round() as usize;
    let n = 2 * n_half + 1;
    let mut nu1 = vec![0.0; n];
    let mut nu2 = vec![0.0; n];

    // left sweep, storing as we go
    let mut v = [1e-30, 0.0];
    nu1[0] = v[0];
    nu2[0] = v[1];
    let mut x = -x_max;
    for i in 1..=n_half {
        v = problem.shoot(kappa, x, x + h, v);
        x += h;
        let m = v[0].abs().max(v[1].abs());
        if m > 1e50 {
            for j in 0..i {
                nu1[j] /= m;
                nu2[j] /= m;
            }
            v = [v[0] / m, v[1] / m];
        }
        nu1[i] = v[0];
        nu2[i] = v[1];
    }
    let left_mid = v;

    let mut v = [0.0, 1e-30];
    nu1[n - 1] = v[0];
    nu2[n - 1] = v[1];
    let mut x = x_max;
    for i in 1..=n_half {
        v = problem.shoot(kappa, x, x - h, v);
        x -= h;
        let m = v[0].abs().max(v[1].abs());
        if m > 1e50 {
            for j in 0..i {
                nu1[n - 1 - j] /= m;
                nu2[n - 1 - j] /= m;
            }
            v = [v[0] / m, v[1] / m];
        }
        nu1[n - 1 - i] = v[0];
        nu2[n - 1 - i] = v[1];
    }
    let right_mid = v;

    // scale the right half to match the left at x = 0
    let (num, den) = if right_mid[0].abs() > right_mid[1].abs() {
        (left_mid[0], right_mid[0])
    } else {
        (left_mid[1], right_mid[1])
    };
    if den.abs() < 1e-300 {
        return Err(Error::Spectral("degenerate matching at x = 0".into()));
    }
    let scale = num / den;
    for i in n_half..n {
        nu1[i] *= scale;
        nu2[i] *= scale;
    }
    // weld exactly at the midpoint
    nu1[n_half] = left_mid[0];
    nu2[n_half] = left_mid[1];

    // unit L2 norm, sign fixed by nu1 > 0 on the left tail
    let mut norm2 = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        norm2 += w * (nu1[i] * nu1[i] + nu2[i] * nu2[i]);
    }
    norm2 *= h;
    let mut s = 1.0 / norm2.sqrt();
    // orient so the left tail rises with positive first component
    let probe = nu1[n / 4];
    if probe < 0.0 {
        s = -s;
    }
    for i in 0..n {
        nu1[i] *= s;
        nu2[i] *= s;
    }

    let state = BoundState {
        kappa,
        x0: -x_max,
        h,
        nu1,
        nu2,
        potential: problem.potential.clone(),
    };
    let res = state.eigen_residual();
    if res > 1e-8 {
        return Err(Error::Spectral(format!(
            "eigenfunction residual {res:.3e} at kappa = {kappa:.6}"
        )));
    }
    Ok(state)
}

/// `2 * integral of U^2` by adaptive Simpson quadrature (absolute tolerance
/// 1e-8); by the trace formula this equals `W / 4pi` for the induced spin
/// bundle.
pub fn trace_integral(potential: &Potential) -> f64 {
    let f = |x: f64| {
        let u = potential.eval(x);
        u * u
    };
    2.0 * crate::quad::adaptive_simpson(&f, -potential.x_max, potential.x_max, 1e-9, 40)
}

/// Transmission magnitude of the scattering problem at real wavenumber `k`;
/// reflectionless potentials give exactly 1.
pub fn transmission_magnitude(potential: &Potential, k: f64) -> f64 {
    // Jost solution from the left: v ~ e^{-i k x} (1, 0)
    let x0 = -potential.x_max;
    let x1 = potential.x_max;
    let h = 1e-3;
    let n = ((x1 - x0) / h).ceil() as usize;
    let rhs = |x: f64, v: [C; 2]| -> [C; 2] {
        let q = C::new(2.0 * potential.eval(x), 0.0);
        let ik = C::new(0.0, k);
        [-ik * v[0] + q * v[1], ik * v[1] - q * v[0]]
    };
    // start as e^{-ik x0} (1, 0)
    let mut v = [(-C::new(0.0, 1.0) * k * x0).exp(), C::new(0.0, 0.0)];
    let mut x = x0;
    let hstep = (x1 - x0) / n as f64;
    for _ in 0..n {
        let k1 = rhs(x, v);
        let k2 = rhs(x + 0.5 * hstep, [v[0] + k1[0] * 0.5 * hstep, v[1] + k1[1] * 0.5 * hstep]);
        let k3 = rhs(x + 0.5 * hstep, [v[0] + k2[0] * 0.5 * hstep, v[1] + k2[1] * 0.5 * hstep]);
        let k4 = rhs(x + hstep, [v[0] + k3[0] * hstep, v[1] + k3[1] * hstep]);
        v = [
            v[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (hstep / 6.0),
            v[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (hstep / 6.0),
        ];
        x += hstep;
    }
    let a = v[0] * (C::new(0.0, 1.0) * k * x1).exp();
    1.0 / a.norm()
}

/// Reflectionless potential with prescribed bound-state parameters
/// `kappa_j > 0` (pairwise distinct) and positive norming constants `c_j`.
///
/// Evaluation uses the tau-function form of the multi-soliton determinant
/// ansatz: with `gamma_j = c_j / (2 kappa_j)`,
/// `W_S = prod_{j<k in S} ((kappa_j - kappa_k)/(kappa_j + kappa_k))^2`, and
/// `A_S(x) = W_S prod_{j in S} gamma_j e^{-2 kappa_j x}`,
///
/// `det(I + i P) = sum_S i^{|S|} A_S = R(x) + i I(x)` and
/// `U(x) = -(I' R - I R') / (R^2 + I^2)`.
///
/// Factoring out the dominant subset term keeps every ratio bounded, so the
/// evaluation is stable on both tails (the plain determinant solve degrades
/// catastrophically for x << 0). A single bound state reproduces
/// `U = kappa sech(2 kappa (x - x0))` with `c = 2 kappa e^{2 kappa x0}`.
pub fn synthesize_reflectionless(kappas: &[f64], normings: &[f64]) -> Result<Potential> {
    if kappas.len() != normings.len() || kappas.is_empty() {
        return Err(Error::Validation("kappa and norming lists must match and be nonempty".into()));
    }
    if kappas.len() > 12 {
        return Err(Error::Validation("at most 12 bound states are supported".into()));
    }
    for (i, k) in kappas.iter().enumerate() {
        if *k <= 0.0 {
            return Err(Error::Validation("kappa values must be positive".into()));
        }
        for m in 0..i {
            if (kappas[m] - k).abs() < 1e-9 {
                return Err(Error::Validation("kappa values must be pairwise distinct".into()));
            }
        }
    }
    if normings.iter().any(|c| *c <= 0.0) {
        return Err(Error::Validation("norming constants must be positive".into()));
    }
    let n = kappas.len();
    // per-subset data: log-gamma sum, decay rate, interaction weight, parity
    let mut subsets: Vec<(f64, f64, f64, usize)> = Vec::with_capacity(1 << n);
    for mask in 0usize..(1 << n) {
        let mut log_coeff = 0.0;
        let mut rate = 0.0;
        let mut size = 0;
        for j in 0..n {
            if mask & (1 << j) != 0 {
                log_coeff += (normings[j] / (2.0 * kappas[j])).ln();
                rate += 2.0 * kappas[j];
                size += 1;
                for k in 0..j {
                    if mask & (1 << k) != 0 {
                        let w = (kappas[j] - kappas[k]) / (kappas[j] + kappas[k]);
                        log_coeff += 2.0 * w.abs().ln();
                    }
                }
            }
        }
        subsets.push((log_coeff, rate, 0.0, size));
    }
    Ok(Potential::new(move |x: f64| {
        // factor out the dominant exponential so all terms stay bounded
        let m = subsets
            .iter()
            .map(|(lc, rate, _, _)| lc - rate * x)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut r = 0.0;
        let mut im = 0.0;
        let mut dr = 0.0;
        let mut dim = 0.0;
        for (lc, rate, _, size) in &subsets {
            let a = (lc - rate * x - m).exp();
            let da = -rate * a;
            let sign = if (size / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if size % 2 == 0 {
                r += sign * a;
                dr += sign * da;
            } else {
                im += sign * a;
                dim += sign * da;
            }
        }
        let den = r * r + im * im;
        if den < 1e-300 {
            return 0.0;
        }
        -(dim * r - im * dr) / den
    }))
}

/// A basis of rotational spinor sections over one potential: bound state `j`
/// carries the vanishing order `n_j = kappa_j - 1/2` at the two axis points.
pub struct SpinBasis {
    pub potential: Potential,
    pub states: Vec<BoundState>,
    pub orders: Vec<u32>,
}

impl SpinBasis {
    /// The Weierstrass potential in the plane chart, `q(z) = U(ln|z|)/|z|`.
    pub fn q(&self, z: C) -> f64 {
        let r = z.norm();
        if r < 1e-300 {
            return match self.limit_q0() {
                Some(v) => v,
                None => 0.0,
            };
        }
        self.potential.eval(r.ln()) / r
    }

    fn limit_q0(&self) -> Option<f64> {
        // U(x) ~ c e^{kappa_min x} as x -> -inf with kappa_min >= 1/2,
        // so q extends continuously by 0 only when kappa_min > 1; the
        // families here have q(0) finite positive, recovered by sampling.
        let x = -20.0;
        Some(self.potential.eval(x) * (-x).exp())
    }

    /// Rotational section components of basis section `j` at cylinder
    /// coordinates `(x, y)`, `z = e^{x+iy}`, together with their cylinder
    /// partials. Solves the plane-chart Dirac equation exactly.
    ///
    /// `mu1 = e^{-x/2} nu2(x) e^{-i(n+1)y}`, `mu2 = -e^{-x/2} nu1(x) e^{-i n y}`.
    pub fn section_components(&self, j: usize, x: f64, y: f64) -> SectionJet {
        let st = &self.states[j];
        let n = self.orders[j] as f64;
        let (nu, dnu) = st.eval_with_deriv(x);
        let w = (-0.5 * x).exp();
        let ph1 = (-C::new(0.0, 1.0) * ((n + 1.0) * y)).exp();
        let ph2 = (-C::new(0.0, 1.0) * (n * y)).exp();
        let mu1 = ph1 * (w * nu[1]);
        let mu2 = ph2 * (-w * nu[0]);
        let mu1_x = ph1 * (w * (dnu[1] - 0.5 * nu[1]));
        let mu2_x = ph2 * (-w * (dnu[0] - 0.5 * nu[0]));
        let mu1_y = mu1 * C::new(0.0, -(n + 1.0));
        let mu2_y = mu2 * C::new(0.0, -n);
        SectionJet { mu1, mu2, mu1_x, mu2_x, mu1_y, mu2_y }
    }
}

/// Section components and cylinder partials at a point.
#[derive(Debug, Clone, Copy)]
pub struct SectionJet {
    pub mu1: C,
    pub mu2: C,
    pub mu1_x: C,
    pub mu2_x: C,
    pub mu1_y: C,
    pub mu2_y: C,
}

impl SectionJet {
    fn zero() -> Self {
        let z = C::new(0.0, 0.0);
        SectionJet { mu1: z, mu2: z, mu1_x: z, mu2_x: z, mu1_y: z, mu2_y: z }
    }

    /// Quaternionic right-multiplication rule on components: for
    /// `lambda = alpha + j beta`, sections combine as
    /// `mu1' = mu1 alpha - i conj(mu2) beta`, `mu2' = mu2 alpha + i conj(mu1) beta`.
    fn accumulate(&mut self, term: SectionJet, alpha: C, beta: C) {
        let i = C::new(0.0, 1.0);
        self.mu1 += term.mu1 * alpha - i * term.mu2.conj() * beta;
        self.mu2 += term.mu2 * alpha + i * term.mu1.conj() * beta;
        self.mu1_x += term.mu1_x * alpha - i * term.mu2_x.conj() * beta;
        self.mu2_x += term.mu2_x * alpha + i * term.mu1_x.conj() * beta;
        self.mu1_y += term.mu1_y * alpha - i * term.mu2_y.conj() * beta;
        self.mu2_y += term.mu2_y * alpha + i * term.mu1_y.conj() * beta;
    }
}

/// A (possibly combined) holomorphic section of the spin bundle, stored as
/// quaternion coefficients against the rotational basis.
pub struct SpinSection {
    pub basis: Arc<SpinBasis>,
    /// Complex splits `(alpha_j, beta_j)` of the combination coefficients.
    pub coeffs: Vec<(C, C)>,
}

impl SpinSection {
    pub fn single(basis: Arc<SpinBasis>, j: usize) -> Self {
        let mut coeffs = vec![(C::new(0.0, 0.0), C::new(0.0, 0.0)); basis.states.len()];
        coeffs[j] = (C::new(1.0, 0.0), C::new(0.0, 0.0));
        SpinSection { basis, coeffs }
    }

    pub fn combine(basis: Arc<SpinBasis>, lambdas: &[Quaternion]) -> Result<Self> {
        if lambdas.len() != basis.states.len() {
            return Err(Error::Validation(format!(
                "expected {} combination coefficients, got {}",
                basis.states.len(),
                lambdas.len()
            )));
        }
        let coeffs = lambdas.iter().map(|l| l.complex_split()).collect();
        Ok(SpinSection { basis, coeffs })
    }

    pub fn jet(&self, x: f64, y: f64) -> SectionJet {
        let mut out = SectionJet::zero();
        for (j, (alpha, beta)) in self.coeffs.iter().enumerate() {
            if alpha.norm() == 0.0 && beta.norm() == 0.0 {
                continue;
            }
            let term = self.basis.section_components(j, x, y);
            out.accumulate(term, *alpha, *beta);
        }
        out
    }

    /// Is this section rotational (a single basis section, possibly scaled)?
    pub fn single_index(&self) -> Option<usize> {
        let mut found = None;
        for (j, (a, b)) in self.coeffs.iter().enumerate() {
            if a.norm() > 0.0 || b.norm() > 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some(j);
            }
        }
        found
    }
}

/// Combines basis sections with quaternion coefficients; the mixing rule on
/// complex components follows the frame expansion of right multiplication.
pub fn spin_combine(basis: &Arc<SpinBasis>, lambdas: &[Quaternion]) -> Result<SpinSection> {
    SpinSection::combine(basis.clone(), lambdas)
}

/// Max Dirac-equation residual `|q mu1 + d mu2| + |-dbar mu1 + q mu2|`
/// (plane-chart operators) over a deterministic cylinder sample set,
/// normalized by the local `|mu|`.
pub fn dirac_residual(section: &SpinSection) -> f64 {
    let mut worst: f64 = 0.0;
    let basis = &section.basis;
    for ix in 0..40 {
        let x = -8.0 + 16.0 * ix as f64 / 39.0;
        for iy in 0..16 {
            let y = 2.0 * std::f64::consts::PI * iy as f64 / 16.0;
            let jet = section.jet(x, y);
            let z = C::from_polar(x.exp(), y);
            let q = basis.q(z);
            // d = e^{-x-iy} (d_x - i d_y)/2 on the cylinder
            let i = C::new(0.0, 1.0);
            let conv = (C::new(-x, -y)).exp();
            let dmu2 = conv * (jet.mu2_x - i * jet.mu2_y) * 0.5;
            let conv_bar = (C::new(-x, y)).exp();
            let dbar_mu1 = conv_bar * (jet.mu1_x + i * jet.mu1_y) * 0.5;
            let r1 = q * jet.mu1 + dmu2;
            let r2 = -dbar_mu1 + q * jet.mu2;
            let scale = (jet.mu1.norm() + jet.mu2.norm()).max(1e-14);
            worst = worst.max((r1.norm() + r2.norm()) / scale);
        }
    }
    worst
}

/// Integrates the surface one-form `df = -i 2Re(conj(mu2) mu1 dz) +
/// j (mu2^2 dzbar - mu1^2 dz)` of a holomorphic section into a surface map.
///
/// Rotational sections integrate in closed form; combinations integrate
/// radially from the south axis point on a precomputed cylinder grid.
/// The result is `Im H`-valued with exact first partials from the form.
pub fn integrate_weierstrass(section: SpinSection) -> Result<SurfaceMap> {
    let res = dirac_residual(&section);
    if res > 1e-6 {
        return Err(Error::Validation(format!(
            "section fails the Dirac equation: residual {res:.3e}"
        )));
    }
    let basis = section.basis.clone();
    let x_max = basis.potential.x_max.min(DEFAULT_X_MAX);

    // df evaluated in cylinder coordinates
    let section = Arc::new(section);
    let sec = section.clone();
    let df_cyl = move |x: f64, y: f64| -> (Quaternion, Quaternion) {
        let jet = sec.jet(x, y);
        weierstrass_form(&jet, x, y)
    };
    let df_cyl = Arc::new(df_cyl);

    if let Some(j) = section.single_index() {
        // closed-form rotational surface: for the unit coefficient
        // f0 = i * axis(x) + j * rho(x) e^{-i(2n+1)y}, and a quaternion
        // coefficient acts by f = conj(lambda) f0 lambda.
        let (alpha, beta) = section.coeffs[j];
        let lam = Quaternion::from_split(alpha, beta);
        let st = basis.states[j].clone();
        let n = basis.orders[j] as f64;
        let kappa = st.kappa;
        // axis(x) = 2 integral nu1 nu2; cumulative on the state's grid with
        // analytic exponential tails on both sides
        let m = st.nu1.len();
        let mut axis = vec![0.0; m];
        let mut acc = st.nu1[0] * st.nu2[0] / (2.0 * kappa);
        axis[0] = 2.0 * acc;
        for idx in 1..m {
            acc += 0.5 * (st.nu1[idx - 1] * st.nu2[idx - 1] + st.nu1[idx] * st.nu2[idx]) * st.h;
            axis[idx] = 2.0 * acc;
        }
        let x0 = st.x0;
        let h = st.h;
        let st_eval = st.clone();
        let axis_last = axis[m - 1];
        let tail_last = st.nu1[m - 1] * st.nu2[m - 1] / kappa;
        let axis_eval = move |x: f64| -> f64 {
            if x <= x0 {
                let v = st_eval.eval(x);
                return v[0] * v[1] / kappa;
            }
            let x_last = x0 + h * (m - 1) as f64;
            if x >= x_last {
                let v = st_eval.eval(x);
                return axis_last + tail_last - v[0] * v[1] / kappa;
            }
            let fi = (x - x0) / h;
            let i = (fi.floor() as usize).min(m - 2);
            let t = fi - i as f64;
            axis[i] * (1.0 - t) + axis[i + 1] * t
        };
        let rho = {
            let st = st.clone();
            move |x: f64| -> f64 {
                let v = st.eval(x);
                (v[0] * v[0] + v[1] * v[1]) / (2.0 * n + 1.0)
            }
        };
        let eval_cyl = move |x: f64, y: f64| -> Quaternion {
            let a = axis_eval(x);
            let r = rho(x);
            let ph = (-C::new(0.0, 1.0) * ((2.0 * n + 1.0) * y)).exp() * r;
            let f0 = QI * a + QJ * Quaternion::from_complex(ph);
            lam.conj() * f0 * lam
        };
        return Ok(cylinder_surface_map(eval_cyl, df_cyl, x_max));
    }

    // general combination: radial cumulative integration on a cylinder grid,
    // integrating the exact form from the south axis and storing |x| <= 14
    let n_cols = 256usize;
    let x_store = 14.0_f64.min(x_max);
    let x_step = 0.01;
    let fine = 2usize;
    let n_rows = (2.0 * x_store / x_step).round() as usize + 1;
    let mut grid = vec![Quaternion::default(); n_cols * n_rows];
    use rayon::prelude::*;
    grid.par_chunks_mut(n_rows).enumerate().for_each(|(col, column)| {
        let y = 2.0 * std::f64::consts::PI * col as f64 / n_cols as f64;
        let mut f = Quaternion::default();
        // two-point Gauss per substep keeps the cumulative error at h^4
        let gauss = 0.5 / 3.0f64.sqrt();
        let sub = x_step / fine as f64;
        let step = |f: &mut Quaternion, x: f64| {
            let (d1, _) = df_cyl(x + sub * (0.5 - gauss), y);
            let (d2, _) = df_cyl(x + sub * (0.5 + gauss), y);
            *f = *f + (d1 + d2) * (0.5 * sub);
        };
        let lead = ((x_store - x_max).abs() / sub).round() as usize;
        let mut x = -x_max;
        for _ in 0..lead {
            step(&mut f, x);
            x += sub;
        }
        column[0] = f;
        for row in 1..n_rows {
            for _ in 0..fine {
                step(&mut f, x);
                x += sub;
            }
            column[row] = f;
        }
    });
    let grid = Arc::new(grid);
    let eval_cyl = move |x: f64, y: f64| -> Quaternion {
        let tau = y.rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        let fc = tau * n_cols as f64;
        let c0 = (fc.floor() as usize) % n_cols;
        let c1 = (c0 + 1) % n_cols;
        let tc = fc - fc.floor();
        let xr = ((x + x_store) / x_step).clamp(0.0, (n_rows - 1) as f64);
        let r0 = (xr.floor() as usize).min(n_rows - 2);
        let tr = xr - r0 as f64;
        let gv = |c: usize, r: usize| grid[c * n_rows + r];
        let a = gv(c0, r0) * (1.0 - tr) + gv(c0, r0 + 1) * tr;
        let b = gv(c1, r0) * (1.0 - tr) + gv(c1, r0 + 1) * tr;
        a * (1.0 - tc) + b * tc
    };
    Ok(cylinder_surface_map(eval_cyl, df_cyl, x_max))
}

/// The one-form of a section jet in cylinder coordinates.
fn weierstrass_form(jet: &SectionJet, x: f64, y: f64) -> (Quaternion, Quaternion) {
    let z = C::from_polar(x.exp(), y);
    let i = C::new(0.0, 1.0);
    let m21 = jet.mu2.conj() * jet.mu1;
    let m22 = jet.mu2 * jet.mu2;
    let m11 = jet.mu1 * jet.mu1;
    // df(dx) with dz(dx) = z, dzbar(dx) = conj z
    let gx = m22 * z.conj() - m11 * z;
    let fx = -QI * (2.0 * (m21 * z).re) + QJ * Quaternion::from_complex(gx);
    // df(dy) with dz(dy) = i z, dzbar(dy) = -i conj z
    let gy = m22 * (-i * z.conj()) - m11 * (i * z);
    let fy = -QI * (2.0 * (m21 * i * z).re) + QJ * Quaternion::from_complex(gy);
    (fx, fy)
}

/// Wraps cylinder-coordinate data `(x, y) = (ln r, theta)` as a plane-chart
/// surface map with exact partials from the one-form.
fn cylinder_surface_map<E>(
    eval_cyl: E,
    df_cyl: Arc<dyn Fn(f64, f64) -> (Quaternion, Quaternion) + Send + Sync>,
    x_max: f64,
) -> SurfaceMap
where
    E: Fn(f64, f64) -> Quaternion + Send + Sync + 'static,
{
    let clamp = move |z: C| -> (f64, f64) {
        let r = z.norm().max((-x_max).exp()).min(x_max.exp());
        (r.ln(), z.arg())
    };
    let eval = move |z: C| {
        let (x, y) = clamp(z);
        eval_cyl(x, y)
    };
    let partials = move |z: C| {
        let r = z.norm().max((-x_max).exp()).min(x_max.exp());
        let (x, y) = (r.ln(), z.arg());
        let (fx_cyl, fy_cyl) = df_cyl(x, y);
        // chain rule through log z: d(x+iy)/dz = 1/z
        let s = z.inv();
        (
            fx_cyl * s.re + fy_cyl * s.im,
            fx_cyl * (-s.im) + fy_cyl * s.re,
        )
    };
    SurfaceMap::exact(eval, partials)
}

/// Circulation of the one-form around random small grid loops, relative to
/// loop length; closedness is the coordinate expression of holomorphicity.
pub fn closedness_residual(section: &SpinSection, loops: usize) -> f64 {
    let mut worst: f64 = 0.0;
    let mut state = 0x2462_ab1e_u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as f64) / (2.0f64.powi(31))
    };
    for _ in 0..loops {
        let cx = -4.0 + 8.0 * next();
        let cy = 2.0 * std::f64::consts::PI * next();
        let half = 0.05 + 0.1 * next();
        // rectangle loop, 4th-order Gauss on each edge
        let nodes = [-0.861136311594053, -0.339981043584856, 0.339981043584856, 0.861136311594053];
        let weights = [0.347854845137454, 0.652145154862546, 0.652145154862546, 0.347854845137454];
        let mut circ = Quaternion::default();
        let jet_df = |x: f64, y: f64| {
            let jet = section.jet(x, y);
            weierstrass_form(&jet, x, y)
        };
        // bottom and top edges (dx), right and left edges (dy)
        for (dir, fixed, sign) in [
            (0usize, cy - half, 1.0),
            (0, cy + half, -1.0),
            (1, cx + half, 1.0),
            (1, cx - half, -1.0),
        ] {
            for (t, w) in nodes.iter().zip(weights.iter()) {
                let s = half * t;
                let (x, y) = if dir == 0 { (cx + s, fixed) } else { (fixed, cy + s) };
                let (dfx, dfy) = jet_df(x, y);
                let d = if dir == 0 { dfx } else { dfy };
                circ = circ + d * (w * half * sign);
            }
        }
        let len = 8.0 * half;
        // normalize by the local form magnitude so the residual is relative
        let (dfx, dfy) = jet_df(cx, cy);
        let scale = (dfx.norm() + dfy.norm()).max(1e-30) * len;
        worst = worst.max(circ.norm() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech_family_bound_states() {
        // U = (n+1)/(2 cosh x) has exactly n+1 states at kappa = j + 1/2
        for n in 0..=3u32 {
            let problem = AknsProblem::new(Potential::sech_family(n));
            let states = akns_bound_states(&problem, (n as f64) + 1.0).unwrap();
            assert_eq!(states.len(), (n + 1) as usize, "state count for n = {n}");
            for (j, st) in states.iter().enumerate() {
                let expect = j as f64 + 0.5;
                assert!(
                    (st.kappa - expect).abs() < 1e-6,
                    "kappa {} vs {} for n = {n}",
                    st.kappa,
                    expect
                );
                assert!(st.eigen_residual() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_potential_has_no_bound_states() {
        let problem = AknsProblem::new(Potential::zero());
        let states = akns_bound_states(&problem, 3.0).unwrap();
        assert!(states.is_empty());
    }

    #[test]
    fn eigenfunctions_flip_orthogonal() {
        let problem = AknsProblem::new(Potential::sech_family(2));
        let states = akns_bound_states(&problem, 3.0).unwrap();
        for a in 0..states.len() {
            for b in 0..a {
                let d = states[a].flip_dot(&states[b]);
                assert!(d.abs() < 1e-8, "flip pairing {} for ({a},{b})", d);
            }
        }
    }

    #[test]
    fn trace_integral_sech() {
        // 2 int U^2 = (n+1)^2 for U = (n+1)/(2 cosh x)
        for n in 0..=3u32 {
            let t = trace_integral(&Potential::sech_family(n));
            let expect = ((n + 1) * (n + 1)) as f64;
            assert!((t - expect).abs() < 1e-6, "n = {n}: {t} vs {expect}");
        }
        assert!(trace_integral(&Potential::zero()).abs() < 1e-12);
    }

    #[test]
    fn sech_potentials_are_reflectionless() {
        for n in [0u32, 1, 2] {
            let p = Potential::sech_family(n);
            for k in [0.5, 1.0, 2.0] {
                let t = transmission_magnitude(&p, k);
                assert!((t - 1.0).abs() < 1e-4, "n = {n}, k = {k}: |T| = {t}");
            }
        }
    }

    #[test]
    fn synthesis_matches_single_sech() {
        // one bound state at kappa: U = kappa sech(2 kappa (x - x0))
        let u = synthesize_reflectionless(&[0.5], &[1.0]).unwrap();
        // find the peak and compare shapes
        let mut best_x = 0.0;
        let mut best = 0.0;
        for k in 0..4001 {
            let x = -10.0 + k as f64 * 0.005;
            let v = u.eval(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        assert!((best - 0.5).abs() < 1e-6, "peak {best}");
        for k in 0..100 {
            let dx = -3.0 + 0.06 * k as f64;
            let expect = 0.5 / (1.0f64 * dx).cosh();
            assert!((u.eval(best_x + dx) - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn synthesis_validated_by_shooting() {
        let kappas = [0.5, 1.5, 2.5];
        let u = synthesize_reflectionless(&kappas, &[2.0, 6.0, 3.0]).unwrap();
        let problem = AknsProblem::new(u.clone());
        let states = akns_bound_states(&problem, 3.0).unwrap();
        assert_eq!(states.len(), 3);
        for (st, expect) in states.iter().zip(kappas.iter()) {
            assert!((st.kappa - expect).abs() < 1e-6, "{} vs {expect}", st.kappa);
        }
        for k in [0.5, 1.0, 2.0] {
            let t = transmission_magnitude(&u, k);
            assert!((t - 1.0).abs() < 1e-4, "|T| = {t} at k = {k}");
        }
        // trace identity at equality: 2 int U^2 = sum (2 n_j + 1) = 9
        let tr = trace_integral(&u);
        assert!((tr - 9.0).abs() < 1e-4, "trace {tr}");
    }

    #[test]
    fn csv_roundtrip() {
        let p = Potential::sech_family(1);
        let text = p.to_csv(4001);
        let q = Potential::from_csv(&text).unwrap();
        for k in 0..40 {
            let x = -8.0 + 0.4 * k as f64;
            assert!((p.eval(x) - q.eval(x)).abs() < 1e-4);
        }
    }
}
