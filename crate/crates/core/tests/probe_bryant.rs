#[test]
fn probe_energies() {
    use soliton_core::constructions::*;
    use soliton_core::invariants::*;
    use num_complex::Complex64 as C;
    let t0 = std::time::Instant::now();
    // catenoid cousins: W = 8 pi (mu + 1)
    for mu in [1u32, 2] {
        let cc = catenoid_cousin(mu).unwrap();
        let rep = willmore_energy_extrinsic(&cc.surface, 1e-3, &[]).unwrap();
        println!("catenoid mu={mu}: W/4pi = {:.5} (expect {}) [{:.1}s]", rep.w_over_4pi, 2*(mu+1), t0.elapsed().as_secs_f64());
    }
    // deformed: (mu=2, s=0.22, t=0) -> W = 16pi
    let cc = catenoid_cousin(2).unwrap();
    let def = deform_ends(&cc.curve, C::new(0.22,0.0), C::new(0.0,0.0));
    let im = def.immersion();
    let surf = bryant_surface(&im);
    let rep = willmore_energy_extrinsic(&surf, 1e-3, &[]).unwrap();
    println!("deformed mu=2 s=0.22: W/4pi = {:.5} (expect 4) [{:.1}s]", rep.w_over_4pi, t0.elapsed().as_secs_f64());
}

#[test]
fn probe_willmore_16pi() {
    use soliton_core::constructions::*;
    use soliton_core::invariants::*;
    use soliton_core::quat::*;
    let t0 = std::time::Instant::now();
    let lift = TwistorLift::energy_16pi();
    for (name, a) in [("e2+e2j", QVec2::new(ZERO, ONE + J)), ("-e1+e2", QVec2::new(-ONE, ONE))] {
        let wt = willmore_twistor(lift.clone(), OutputRecipe::Hermitian { a, c: Quaternion::default() }).unwrap();
        let rep = willmore_energy_extrinsic(&wt.surface, 1e-3, &[]).unwrap();
        println!("willmore a={name}: W/4pi = {:.5} (expect 4) [{:.1}s]", rep.w_over_4pi, t0.elapsed().as_secs_f64());
    }
}

#[test]
fn probe_dirac_taimanov() {
    use soliton_core::constructions::*;
    use soliton_core::invariants::*;
    let t0 = std::time::Instant::now();
    for n in [1u32, 2] {
        let fam = dirac_sphere(n).unwrap();
        let pot = willmore_energy_potential(&fam.basis);
        let surf = fam.section_surface(0).unwrap();
        let ext = willmore_energy_extrinsic(&surf.surface, 1e-3, &[]).unwrap();
        println!("dirac N={n}: potential {:.5}, extrinsic {:.5} (expect {}) [{:.1}s]",
            pot.w_over_4pi, ext.w_over_4pi, (n+1)*(n+1), t0.elapsed().as_secs_f64());
    }
    let fam = taimanov_sphere(&[0,1,2], &[2.0,6.0,3.0]).unwrap();
    let pot = willmore_energy_potential(&fam.basis);
    let surf = fam.section_surface(0).unwrap();
    let ext = willmore_energy_extrinsic(&surf.surface, 1e-3, &[]).unwrap();
    println!("taimanov (0,1,2): potential {:.5}, extrinsic {:.5} (expect 9) [{:.1}s]",
        pot.w_over_4pi, ext.w_over_4pi, t0.elapsed().as_secs_f64());
    // branch orders of sections 1, 2
    for j in [1usize, 2] {
        let s = fam.section_surface(j).unwrap();
        let br = branch_scan(&s.surface);
        println!("section {j} branch points: {:?}", br.points.iter().map(|b| (b.chart, b.order, b.confidence)).collect::<Vec<_>>());
    }
}
