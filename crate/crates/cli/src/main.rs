//! `solitonsphere`: construct explicit conformal 2-spheres, verify their
//! Willmore energies and residual identities, export meshes, apply
//! transforms, and run the 1-D spectral solver.

use clap::{Parser, Subcommand};
use soliton_core::invariants::FOUR_PI;
use soliton_core::mesh::{export, MeshFormat};
use soliton_core::spec::{build, construct, exit_code_for, Params, Sampling, SurfaceSpec};
use soliton_core::spectral::{
    akns_bound_states, trace_integral, transmission_magnitude, AknsProblem, Potential,
};
use soliton_core::transforms::{backlund2, Backlund2Kind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "solitonsphere", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a surface mesh and its verification report.
    Gen {
        /// Family: round_sphere, catenoid_cousin, bryant_deformed,
        /// dirac_sphere, taimanov, willmore_twistor, darboux_of, backlund_of.
        family: String,
        #[arg(long)]
        mu: Option<u32>,
        /// Complex parameter as re,im (e.g. --s 0.22,0 or --s 0,2.3).
        #[arg(long, value_parser = parse_complex)]
        s: Option<[f64; 2]>,
        #[arg(long, value_parser = parse_complex)]
        t: Option<[f64; 2]>,
        #[arg(long)]
        n: Option<u32>,
        /// Axis orders, comma separated (e.g. --ns 0,1,2).
        #[arg(long, value_parser = parse_u32_list)]
        ns: Option<std::vec::Vec<u32>>,
        /// Norming constants, comma separated (e.g. --lambda 2,6,3).
        #[arg(long, value_parser = parse_f64_list)]
        lambda: Option<std::vec::Vec<f64>>,
        /// Basis section index to integrate.
        #[arg(long)]
        section: Option<usize>,
        /// Twistor lift deformation coefficient.
        #[arg(long)]
        shift: Option<f64>,
        /// Twistor recipe: hermitian | e2_star_e1.
        #[arg(long)]
        recipe: Option<String>,
        /// Mesh resolution per chart side.
        #[arg(long, default_value_t = 64)]
        res: usize,
        /// Output mesh path (.obj or .ply).
        #[arg(long)]
        out: PathBuf,
        /// Verification report path (JSON).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compute the Willmore energy of a spec without meshing.
    Energy {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run the full verification gate on a spec.
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Apply a transform to the surface of a spec.
    Transform {
        /// darboux | backlund1 | backlund2-forward | backlund2-backward.
        kind: String,
        #[arg(long)]
        spec: PathBuf,
        /// Output mesh of the transformed surface (darboux/backlund1 only).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 24)]
        res: usize,
    },
    /// Solve the 1-D spectral problem of a potential.
    Spectrum {
        /// Potential: "dirac:N" or "csv:FILE" (two-column x,U).
        #[arg(long)]
        potential: String,
        /// Largest eigenvalue parameter scanned.
        #[arg(long, default_value_t = 6.0)]
        kappa_max: f64,
        /// Write bound states as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn parse_complex(text: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [re] => Ok([re.trim().parse().map_err(|e| format!("{e}"))?, 0.0]),
        [re, im] => Ok([
            re.trim().parse().map_err(|e| format!("{e}"))?,
            im.trim().parse().map_err(|e| format!("{e}"))?,
        ]),
        _ => Err("expected re or re,im".into()),
    }
}

fn parse_u32_list(text: &str) -> Result<Vec<u32>, String> {
    text.split(',')
        .map(|p| p.trim().parse().map_err(|e| format!("{e}")))
        .collect()
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|p| p.trim().parse().map_err(|e| format!("{e}")))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = err
                .downcast_ref::<soliton_core::Error>()
                .map(exit_code_for)
                .unwrap_or(2);
            ExitCode::from(code as u8)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen {
            family,
            mu,
            s,
            t,
            n,
            ns,
            lambda,
            section,
            shift,
            recipe,
            res,
            out,
            report,
        } => {
            let spec = SurfaceSpec {
                family,
                params: Params {
                    mu,
                    s,
                    t,
                    n,
                    ns,
                    lambda,
                    section,
                    shift,
                    recipe,
                    ..Params::default()
                },
                sampling: Sampling { res },
            };
            let output = build(&spec)?;
            let format = match out.extension().and_then(|e| e.to_str()) {
                Some("obj") => MeshFormat::Obj,
                Some("ply") => MeshFormat::PlyBinary,
                _ => anyhow::bail!("output extension must be .obj or .ply"),
            };
            let mut file = std::fs::File::create(&out)?;
            export(&output.mesh, format, &mut file)?;
            println!(
                "{}: W = {:.6} = {:.4} x 4pi, verdict {:?}, {} vertices, {} triangles",
                spec.family,
                output.report.w,
                output.report.w_over_4pi,
                output.report.verdict,
                output.mesh.vertices.len(),
                output.mesh.triangles.len()
            );
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&output.report)?)?;
            }
            Ok(())
        }
        Command::Energy { spec } => {
            let spec = SurfaceSpec::from_json(&std::fs::read_to_string(&spec)?)?;
            let built = construct(&spec)?;
            let energy = soliton_core::invariants::willmore_energy_extrinsic(
                &built.map,
                soliton_core::invariants::ENERGY_REL_TOL,
                &built.hotspots,
            )?;
            println!(
                "W = {:.8} = {:.6} x 4pi (quadrature error {:.2e}), verdict {:?}",
                energy.w, energy.w_over_4pi, energy.quadrature_error, energy.verdict
            );
            if let Some(basis) = &built.basis {
                let pot = soliton_core::invariants::willmore_energy_potential(basis);
                println!(
                    "potential route: W = {:.8} = {:.6} x 4pi",
                    pot.w, pot.w_over_4pi
                );
            }
            Ok(())
        }
        Command::Check { spec } => {
            let spec = SurfaceSpec::from_json(&std::fs::read_to_string(&spec)?)?;
            let output = build(&spec)?;
            println!("{}", serde_json::to_string_pretty(&output.report)?);
            println!("check passed: W/4pi = {:.4}", output.report.w_over_4pi);
            Ok(())
        }
        Command::Transform { kind, spec, out, res } => {
            let spec = SurfaceSpec::from_json(&std::fs::read_to_string(&spec)?)?;
            match kind.as_str() {
                "darboux" => {
                    let wrapped = SurfaceSpec {
                        family: "darboux_of".into(),
                        params: Params { base: Some(Box::new(spec)), ..Params::default() },
                        sampling: Sampling { res },
                    };
                    let output = build(&wrapped)?;
                    print_transform_result(&wrapped, &output, out)?;
                }
                "backlund1" => {
                    let wrapped = SurfaceSpec {
                        family: "backlund_of".into(),
                        params: Params {
                            base: Some(Box::new(spec)),
                            kind: Some("backlund1".into()),
                            ..Params::default()
                        },
                        sampling: Sampling { res },
                    };
                    let built = construct(&wrapped)?;
                    let mesh = soliton_core::mesh::build_mesh(&built.map, res)?;
                    println!("backlund1: {} vertices", mesh.vertices.len());
                    if let Some(path) = out {
                        let mut file = std::fs::File::create(&path)?;
                        export(&mesh, MeshFormat::Obj, &mut file)?;
                    }
                }
                "backlund2-forward" | "backlund2-backward" => {
                    let built = construct(&spec)?;
                    let kind = if kind.ends_with("forward") {
                        Backlund2Kind::Forward
                    } else {
                        Backlund2Kind::Backward
                    };
                    let rep = backlund2(&built.map, kind, 60)?;
                    let v = rep.points[0];
                    println!(
                        "{:?}: constancy residual {:.3e}, line [{} : {}]",
                        rep.kind, rep.constancy, v.x1, v.x2
                    );
                }
                other => anyhow::bail!("unknown transform kind '{other}'"),
            }
            Ok(())
        }
        Command::Spectrum { potential, kappa_max, json } => {
            let pot = if let Some(rest) = potential.strip_prefix("dirac:") {
                let n: u32 = rest.parse()?;
                Potential::sech_family(n)
            } else if let Some(path) = potential.strip_prefix("csv:") {
                Potential::from_csv(&std::fs::read_to_string(path)?)?
            } else {
                anyhow::bail!("potential must be dirac:N or csv:FILE");
            };
            let problem = AknsProblem::new(pot.clone());
            let states = akns_bound_states(&problem, kappa_max)?;
            println!("{} bound states in (0, {kappa_max}]:", states.len());
            for st in &states {
                println!(
                    "  kappa = {:.10} (eigen-residual {:.2e})",
                    st.kappa,
                    st.eigen_residual()
                );
            }
            let tr = trace_integral(&pot);
            println!("trace integral 2 int U^2 = {tr:.10} (W = {:.6} x 4pi)", tr);
            for k in [0.5, 1.0, 2.0] {
                println!("|T({k})| = {:.8}", transmission_magnitude(&pot, k));
            }
            if let Some(path) = json {
                #[derive(serde::Serialize)]
                struct StateOut {
                    kappa: f64,
                    eigen_residual: f64,
                }
                let out: Vec<StateOut> = states
                    .iter()
                    .map(|st| StateOut { kappa: st.kappa, eigen_residual: st.eigen_residual() })
                    .collect();
                std::fs::write(&path, serde_json::to_string_pretty(&out)?)?;
            }
            Ok(())
        }
    }
}

fn print_transform_result(
    spec: &SurfaceSpec,
    output: &soliton_core::spec::BuildOutput,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    println!(
        "{}: W = {:.6} ({:.4} x 4pi)",
        spec.family,
        output.report.w,
        output.report.w / FOUR_PI
    );
    if let Some(path) = out {
        let mut file = std::fs::File::create(&path)?;
        export(&output.mesh, MeshFormat::Obj, &mut file)?;
    }
    Ok(())
}
