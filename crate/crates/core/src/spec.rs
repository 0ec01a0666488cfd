//! Surface-spec JSON and the build pipeline: spec -> surface -> mesh plus a
//! complete verification report (energy, quantization, branch points,
//! residual maxima).

use crate::constructions::{
    bryant_surface, catenoid_cousin, deform_ends, dirac_sphere, hyperbolic_gauss,
    hyperbolic_gauss_surface, taimanov_sphere, willmore_twistor, OutputRecipe, TwistorLift,
};
use crate::invariants::{
    branch_scan, willmore_energy_extrinsic, willmore_energy_potential, BranchReport, EnergyReport,
    ENERGY_REL_TOL,
};
use crate::mesh::{build_mesh, Mesh};
use crate::quat::{QVec2, Quaternion};
use crate::spectral::SpinBasis;
use crate::surface::{residuals, sample_disk_points, ChartPoint, ResidualReport, SurfaceMap};
use crate::transforms::{backlund1_forward, darboux, darboux_datum_from_target};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type C = Complex64;

fn default_res() -> usize {
    64
}

/// Sampling options of a build.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sampling {
    #[serde(default = "default_res")]
    pub res: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { res: default_res() }
    }
}

/// Family-specific parameters. Complex numbers are two-element arrays,
/// quaternions four-element arrays.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<[f64; 2]>,
    /// Dirac sphere index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Axis vanishing orders of a multi-soliton family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    /// Which basis section to integrate (default 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section: Option<usize>,
    /// Quaternion coefficients of a section combination.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<[f64; 4]>>,
    /// Twistor recipe vector `a` as two quaternions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<[[f64; 4]; 2]>,
    /// Target-space offset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<[f64; 4]>,
    /// Lift deformation `phi -> phi + e2 j * shift * z`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// Twistor output recipe: "hermitian" (default) or "e2_star_e1".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
    /// Base spec for transform families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<SurfaceSpec>>,
    /// Transform kind for `backlund_of`: "backlund1".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

/// A buildable surface description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub family: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub sampling: Sampling,
}

impl SurfaceSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn quat_of(a: [f64; 4]) -> Quaternion {
    Quaternion::new(a[0], a[1], a[2], a[3])
}

fn complex_of(a: [f64; 2]) -> C {
    C::new(a[0], a[1])
}

/// A constructed surface with everything the verification pipeline needs.
pub struct BuiltSurface {
    pub map: SurfaceMap,
    /// Spin basis when the family has a potential route.
    pub basis: Option<Arc<SpinBasis>>,
    /// Chart points needing deeper quadrature (ends, branch points).
    pub hotspots: Vec<ChartPoint>,
    /// End locations in the `z` chart, when the family has ends.
    pub ends: Vec<[f64; 2]>,
    /// Whether the quantization verdict is a mandatory gate for this family.
    pub quantization_mandatory: bool,
}

/// Resolves a spec into a surface map (without meshing it).
pub fn construct(spec: &SurfaceSpec) -> Result<BuiltSurface> {
    let p = &spec.params;
    match spec.family.as_str() {
        "round_sphere" => Ok(BuiltSurface {
            map: crate::constructions::round_sphere(),
            basis: None,
            hotspots: vec![],
            ends: vec![],
            quantization_mandatory: true,
        }),
        "catenoid_cousin" | "bryant_deformed" => {
            let mu = p.mu.ok_or_else(|| Error::Validation("missing parameter mu".into()))?;
            let cc = catenoid_cousin(mu)?;
            let (immersion, surface);
            if spec.family == "bryant_deformed" {
                let s = complex_of(p.s.unwrap_or([0.0, 0.0]));
                let t = complex_of(p.t.unwrap_or([0.0, 0.0]));
                let curve = deform_ends(&cc.curve, s, t);
                curve.validate()?;
                immersion = curve.immersion();
                surface = bryant_surface(&immersion);
            } else {
                immersion = cc.immersion;
                surface = cc.surface;
            }
            if immersion.det_residual() > 1e-8 {
                return Err(Error::Validation("null frame lost det F = 1".into()));
            }
            if immersion.null_residual() > 1e-8 {
                return Err(Error::Validation("frame derivative is not null".into()));
            }
            let (finite_poles, inf_order) = immersion.log_deriv_pole_orders();
            for (z0, ord) in &finite_poles {
                if *ord != 2 {
                    return Err(Error::Validation(format!(
                        "end at z = {z0} has order {ord}, smooth ends need order 2"
                    )));
                }
            }
            if inf_order != 0 && inf_order != 2 {
                return Err(Error::Validation(format!(
                    "end at infinity has order {inf_order}, smooth ends need order 2"
                )));
            }
            let mut ends: Vec<[f64; 2]> = finite_poles.iter().map(|(z, _)| [z.re, z.im]).collect();
            let mut hotspots = Vec::new();
            for (z0, _) in &finite_poles {
                if z0.norm() <= 1.0 {
                    hotspots.push(ChartPoint::z(*z0));
                }
                if z0.norm() >= 1.0 {
                    hotspots.push(ChartPoint::w(z0.inv()));
                }
            }
            if inf_order == 2 {
                hotspots.push(ChartPoint::w(C::new(0.0, 0.0)));
                ends.push([f64::INFINITY, 0.0]);
            }
            Ok(BuiltSurface {
                map: surface,
                basis: None,
                hotspots,
                ends,
                quantization_mandatory: true,
            })
        }
        "dirac_sphere" | "taimanov" => {
            let family = if spec.family == "dirac_sphere" {
                let n = p.n.ok_or_else(|| Error::Validation("missing parameter n".into()))?;
                dirac_sphere(n)?
            } else {
                let ns = p
                    .ns
                    .as_ref()
                    .ok_or_else(|| Error::Validation("missing parameter ns".into()))?;
                let lambda = p
                    .lambda
                    .as_ref()
                    .ok_or_else(|| Error::Validation("missing parameter lambda".into()))?;
                taimanov_sphere(ns, lambda)?
            };
            let (surface, immersed) = if let Some(coeffs) = &p.coeffs {
                let lambdas: Vec<Quaternion> = coeffs.iter().map(|q| quat_of(*q)).collect();
                (family.combined_surface(&lambdas)?.surface, None)
            } else {
                let j = p.section.unwrap_or(0);
                let surf = family.section_surface(j)?.surface;
                (surf, Some(j == 0))
            };
            let basis = family.basis.clone();
            Ok(BuiltSurface {
                map: surface,
                basis: Some(basis),
                hotspots: vec![
                    ChartPoint::z(C::new(0.0, 0.0)),
                    ChartPoint::w(C::new(0.0, 0.0)),
                ],
                ends: vec![],
                quantization_mandatory: immersed.unwrap_or(true),
            })
        }
        "willmore_twistor" => {
            let lift = match p.shift {
                Some(s) => TwistorLift::energy_16pi_shifted(s),
                None => TwistorLift::energy_16pi(),
            };
            let recipe = match p.recipe.as_deref().unwrap_or("hermitian") {
                "e2_star_e1" => OutputRecipe::E2StarE1 {
                    c: p.c.map(quat_of).unwrap_or_default(),
                },
                "hermitian" => {
                    let a = p
                        .a
                        .map(|rows| QVec2::new(quat_of(rows[0]), quat_of(rows[1])))
                        .unwrap_or_else(|| {
                            QVec2::new(
                                crate::quat::ZERO,
                                crate::quat::ONE + crate::quat::J,
                            )
                        });
                    OutputRecipe::Hermitian { a, c: p.c.map(quat_of).unwrap_or_default() }
                }
                other => {
                    return Err(Error::Validation(format!("unknown recipe '{other}'")));
                }
            };
            let wt = willmore_twistor(lift, recipe)?;
            Ok(BuiltSurface {
                map: wt.surface,
                basis: None,
                hotspots: vec![],
                ends: vec![],
                quantization_mandatory: true,
            })
        }
        "darboux_of" => {
            let base = p
                .base
                .as_ref()
                .ok_or_else(|| Error::Validation("darboux_of needs a base spec".into()))?;
            if base.family != "catenoid_cousin" && base.family != "bryant_deformed" {
                return Err(Error::Validation(
                    "darboux_of supports null-curve bases (catenoid_cousin, bryant_deformed)".into(),
                ));
            }
            let mu = base
                .params
                .mu
                .ok_or_else(|| Error::Validation("missing parameter mu".into()))?;
            let cc = catenoid_cousin(mu)?;
            let (curve, immersion, surface);
            if base.family == "bryant_deformed" {
                let s = complex_of(base.params.s.unwrap_or([0.0, 0.0]));
                let t = complex_of(base.params.t.unwrap_or([0.0, 0.0]));
                curve = deform_ends(&cc.curve, s, t);
                curve.validate()?;
                immersion = curve.immersion();
                surface = bryant_surface(&immersion);
            } else {
                immersion = cc.immersion;
                surface = cc.surface;
            }
            let gauss = hyperbolic_gauss(&immersion)?;
            let target = hyperbolic_gauss_surface(&gauss);
            let base_pt = C::new(0.7, 0.2);
            let (g, h0) = darboux_datum_from_target(&surface, &target, base_pt);
            let pair = darboux(&surface, &g, base_pt, h0)?;
            Ok(BuiltSurface {
                map: pair.f_sharp,
                basis: None,
                hotspots: vec![],
                ends: vec![],
                quantization_mandatory: false,
            })
        }
        "backlund_of" => {
            let base = p
                .base
                .as_ref()
                .ok_or_else(|| Error::Validation("backlund_of needs a base spec".into()))?;
            let kind = p.kind.as_deref().unwrap_or("backlund1");
            if kind != "backlund1" {
                return Err(Error::Validation(format!(
                    "unsupported transform kind '{kind}' for meshing"
                )));
            }
            let built = construct(base)?;
            let g = backlund1_forward(&built.map, C::new(0.3, 0.1))?;
            Ok(BuiltSurface {
                map: g,
                basis: None,
                hotspots: vec![],
                ends: vec![],
                quantization_mandatory: false,
            })
        }
        other => Err(Error::Validation(format!("unknown family '{other}'"))),
    }
}

/// Everything a build produces.
pub struct BuildOutput {
    pub mesh: Mesh,
    pub report: Report,
}

/// The verification report emitted with every build.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub family: String,
    pub w: f64,
    pub w_over_4pi: f64,
    pub verdict: crate::invariants::QuantizationVerdict,
    pub admissible: bool,
    pub quadrature_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential_route: Option<EnergyReport>,
    pub branch_points: BranchReport,
    pub residuals: ResidualReport,
    /// Relative size of the real part over the sample set (must vanish for
    /// surfaces in `Im H`).
    pub im_residual: f64,
    /// End locations in the `z` chart, empty unless the family has ends.
    pub ends: Vec<[f64; 2]>,
    pub runtime_seconds: f64,
}

/// Builds the mesh and the full verification report. Validation failures and
/// numerical non-convergence surface as errors (distinct CLI exit codes).
pub fn build(spec: &SurfaceSpec) -> Result<BuildOutput> {
    let start = std::time::Instant::now();
    let built = construct(spec)?;

    let sample = sample_disk_points(200, 0xfeed);
    let res_report = residuals(&built.map, &sample);
    let im_residual = crate::constructions::imaginary_part_residual(&built.map, 200);

    let branch = branch_scan(&built.map);
    let mut hotspots = built.hotspots.clone();
    for bp in &branch.points {
        hotspots.push(ChartPoint {
            chart: bp.chart,
            p: C::new(bp.location[0], bp.location[1]),
        });
    }
    let energy = willmore_energy_extrinsic(&built.map, ENERGY_REL_TOL, &hotspots)?;
    let potential_route = built.basis.as_ref().map(|b| willmore_energy_potential(b));

    // mandatory gates
    if im_residual > 1e-8 {
        return Err(Error::Validation(format!(
            "surface left Im H: relative real part {im_residual:.3e}"
        )));
    }
    if res_report.conformality_max > 1e-5 {
        return Err(Error::NotConformal(res_report.conformality_max));
    }
    if res_report.s_squared_max > 1e-6 {
        return Err(Error::Validation(format!(
            "sphere congruence defect {:.3e}",
            res_report.s_squared_max
        )));
    }
    if built.quantization_mandatory && !energy.admissible {
        return Err(Error::Validation(format!(
            "Willmore energy {:.6} = {:.4} x 4pi fails the quantization gate",
            energy.w, energy.w_over_4pi
        )));
    }
    if let Some(pot) = &potential_route {
        let rel = (pot.w - energy.w).abs() / energy.w.max(1e-12);
        if rel > 0.015 {
            return Err(Error::Validation(format!(
                "energy routes disagree by {:.2}%: extrinsic {:.6}, potential {:.6}",
                rel * 100.0,
                energy.w,
                pot.w
            )));
        }
    }

    let mesh = build_mesh(&built.map, spec.sampling.res)?;
    let report = Report {
        family: spec.family.clone(),
        w: energy.w,
        w_over_4pi: energy.w_over_4pi,
        verdict: energy.verdict,
        admissible: energy.admissible,
        quadrature_error: energy.quadrature_error,
        potential_route,
        branch_points: branch,
        residuals: res_report,
        im_residual,
        ends: built.ends,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(BuildOutput { mesh, report })
}

/// Classifies errors into the CLI exit codes: 2 validation, 3 numerical.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Validation(_) | Error::SingularMatrix | Error::StereographicPole => 2,
        Error::Io(_) | Error::Json(_) => 2,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_spec_roundtrip_and_build() {
        let spec = SurfaceSpec {
            family: "round_sphere".into(),
            params: Params::default(),
            sampling: Sampling { res: 8 },
        };
        let json = spec.to_json().unwrap();
        let back = SurfaceSpec::from_json(&json).unwrap();
        assert_eq!(back.family, "round_sphere");
        let out = build(&back).unwrap();
        assert!((out.report.w_over_4pi - 1.0).abs() < 2e-3);
        assert!(out.report.admissible);
        assert!(out.report.branch_points.points.is_empty());
        assert!(out.report.im_residual < 1e-12);
        assert!(!out.mesh.vertices.is_empty());
    }

    #[test]
    fn unknown_family_is_validation_error() {
        let spec = SurfaceSpec {
            family: "klein_bottle".into(),
            params: Params::default(),
            sampling: Sampling::default(),
        };
        let Err(err) = build(&spec) else {
            panic!("expected a validation error");
        };
        assert_eq!(exit_code_for(&err), 2);
    }

    #[test]
    fn spec_json_complexes_are_two_element_arrays() {
        let text = r#"{
            "family": "bryant_deformed",
            "params": { "mu": 2, "s": [0.22, 0.0], "t": [0.0, 0.0] },
            "sampling": { "res": 16 }
        }"#;
        let spec = SurfaceSpec::from_json(text).unwrap();
        assert_eq!(spec.params.mu, Some(2));
        assert_eq!(spec.params.s, Some([0.22, 0.0]));
    }
}
