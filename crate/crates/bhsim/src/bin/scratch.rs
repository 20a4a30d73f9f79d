// temporary measurement harness; removed before release
use bhsim::*;
use std::time::Instant;

fn ring_initial(n: u32) -> (LatticeSpec, StateVector) {
    let g = 1.0;
    let spec_full = ring_spec(1.0, 2.0).with_interaction(interaction_from_g(g, n).unwrap());
    let trimer = spec_full.restricted_to(&[0, 1, 2]).unwrap();
    let mf = solve_ground_state(&trimer, g, 0.5, 1e-12).unwrap();
    let unit = mf.unit_coefficients();
    let cond = CondensateSpec::new(unit, n / 2, vec![0, 1, 2]).unwrap();
    let one = condensate_state(&cond).unwrap();
    (spec_full, product_state(&one, &one))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("bench");

    match mode {
        "bench" => {
            // matvec + step cost at ring desk scale
            let n: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(30);
            let (spec, psi) = ring_initial(n);
            println!("dim = {}", psi.basis().dimension());
            let t0 = Instant::now();
            let mut out = psi.clone();
            for _ in 0..5 {
                out = apply_hamiltonian(&spec, &out).unwrap();
                let s = 1.0 / out.norm();
                for a in out.amplitudes_mut() {
                    *a *= s;
                }
            }
            println!("matvec: {:.1} ms", t0.elapsed().as_secs_f64() * 1000.0 / 5.0);
            let t0 = Instant::now();
            let mut cur = psi.clone();
            for _ in 0..5 {
                cur = rk4_step(&spec, &cur, 1e-3).unwrap();
            }
            println!("rk4 step: {:.1} ms", t0.elapsed().as_secs_f64() * 1000.0 / 5.0);
            let t0 = Instant::now();
            let _c = bhsim::observables::correlators(&cur, &[0, 1, 2, 3, 4, 5]).unwrap();
            println!("full correlators: {:.1} ms", t0.elapsed().as_secs_f64() * 1000.0);
        }
        "ringscan" => {
            // purity time series at small N to find oscillation scales
            let n: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10);
            let j2: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2.0);
            let t_final: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(20.0);
            let dt: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(2e-3);
            let g = 1.0;
            let spec = ring_spec(1.0, j2).with_interaction(interaction_from_g(g, n).unwrap());
            let trimer = ring_spec(1.0, 0.0).restricted_to(&[0, 1, 2]).unwrap();
            let mf = solve_ground_state(&trimer, g, 0.5, 1e-12).unwrap();
            let cond = CondensateSpec::new(mf.unit_coefficients(), n / 2, vec![0, 1, 2]).unwrap();
            let one = condensate_state(&cond).unwrap();
            let psi0 = product_state(&one, &one);
            let sample_every = (0.05 / dt).round() as usize;
            let mut plan =
                PropagationPlan::new(t_final, dt).unwrap().with_sample_every(sample_every).unwrap();
            plan.norm_drift_bound = 1e-5;
            let t0 = Instant::now();
            let series = evolve(&spec, &psi0, &plan, &Observers::default()).unwrap();
            eprintln!("run took {:.1} s", t0.elapsed().as_secs_f64());
            let mut max_drift = 0.0f64;
            let e0 = series.records[0].energy;
            let mut max_de = 0.0f64;
            println!("# t P_sub1 P_tot n1 n2 nu12");
            for (i, &t) in series.times.iter().enumerate() {
                let sub = series.spdm_at(i, &[0, 1, 2]).unwrap();
                let tot = series.spdm_at(i, &[0, 1, 2, 3, 4, 5]).unwrap();
                let p_sub = purity(&sub, 3).unwrap().value;
                let p_tot = purity(&tot, 6).unwrap().value;
                let nu = contrast(&tot, 0, 1).unwrap();
                let r = &series.records[i];
                max_drift = max_drift.max((r.norm - 1.0).abs());
                max_de = max_de.max((r.energy - e0).abs() / e0.abs());
                println!(
                    "{t:.3} {p_sub:.6} {p_tot:.6} {:.4} {:.4} {nu:.4}",
                    r.fillings[0], r.fillings[1]
                );
            }
            eprintln!("max norm drift {max_drift:.3e}, max rel energy drift {max_de:.3e}");
        }
        "chain" => {
            // chain preset accuracy vs the one-body oracle as a function of dt
            let dt: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5e-4);
            let t_final: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(30.0);
            let spec = chain_spec(2.0, 4); // g = 0
            let left = spec.restricted_to(&[0, 1]).unwrap();
            let right = spec.restricted_to(&[2, 3]).unwrap();
            let mf_l = solve_ground_state(&left, 0.0, 20.0 / 21.0, 1e-12).unwrap();
            let mf_r = solve_ground_state(&right, 0.0, 1.0 / 21.0, 1e-12).unwrap();
            let a = condensate_state(
                &CondensateSpec::new(mf_l.unit_coefficients(), 20, vec![0, 1]).unwrap(),
            )
            .unwrap();
            let b = condensate_state(
                &CondensateSpec::new(mf_r.unit_coefficients(), 1, vec![2, 3]).unwrap(),
            )
            .unwrap();
            let psi0 = product_state(&a, &b);
            let sigma0 = spdm(&psi0, &[0, 1, 2, 3]).unwrap();
            let sample_every = (0.1 / dt).round() as usize;
            let mut plan =
                PropagationPlan::new(t_final, dt).unwrap().with_sample_every(sample_every).unwrap();
            plan.norm_drift_bound = 1e-5;
            let t0 = Instant::now();
            let series = evolve(&spec, &psi0, &plan, &Observers::default()).unwrap();
            eprintln!("run took {:.1} s", t0.elapsed().as_secs_f64());
            let mut max_err = 0.0f64;
            let mut max_drift = 0.0f64;
            let mut p_tot_dev = 0.0f64;
            let tot0 = purity(&series.spdm_at(0, &[0, 1, 2, 3]).unwrap(), 4).unwrap().value;
            let mut min_p1 = f64::INFINITY;
            for (i, &t) in series.times.iter().enumerate() {
                let mb = series.spdm_at(i, &[0, 1, 2, 3]).unwrap();
                let oracle = noninteracting_spdm_oracle(&spec, &sigma0, t).unwrap();
                let err = (&mb.matrix - &oracle.matrix)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                max_err = max_err.max(err);
                max_drift = max_drift.max((series.records[i].norm - 1.0).abs());
                let p_tot = purity(&mb, 4).unwrap().value;
                p_tot_dev = p_tot_dev.max((p_tot - tot0).abs());
                let p1 = purity(&series.spdm_at(i, &[0, 1]).unwrap(), 2).unwrap().value;
                min_p1 = min_p1.min(p1);
            }
            eprintln!("dt = {dt}: max spdm err {max_err:.3e}, norm drift {max_drift:.3e}, P_tot dev {p_tot_dev:.3e}, min P_sub1 {min_p1:.4}");
        }
        "chainseries" => {
            let spec = chain_spec(2.0, 4);
            let left = spec.restricted_to(&[0, 1]).unwrap();
            let right = spec.restricted_to(&[2, 3]).unwrap();
            let mf_l = solve_ground_state(&left, 0.0, 20.0 / 21.0, 1e-12).unwrap();
            let mf_r = solve_ground_state(&right, 0.0, 1.0 / 21.0, 1e-12).unwrap();
            let a = condensate_state(
                &CondensateSpec::new(mf_l.unit_coefficients(), 20, vec![0, 1]).unwrap(),
            )
            .unwrap();
            let b = condensate_state(
                &CondensateSpec::new(mf_r.unit_coefficients(), 1, vec![2, 3]).unwrap(),
            )
            .unwrap();
            let psi0 = product_state(&a, &b);
            let plan =
                PropagationPlan::new(30.0, 5e-4).unwrap().with_sample_every(200).unwrap();
            let series = evolve(&spec, &psi0, &plan, &Observers::default()).unwrap();
            println!("# t N1 N2 P1 P2 Ptot nu12 nu34");
            for (i, &t) in series.times.iter().enumerate() {
                let r = &series.records[i];
                let n1 = r.fillings[0] + r.fillings[1];
                let n2 = r.fillings[2] + r.fillings[3];
                let p1 = purity(&series.spdm_at(i, &[0, 1]).unwrap(), 2).unwrap().value;
                let p2 = purity(&series.spdm_at(i, &[2, 3]).unwrap(), 2).unwrap().value;
                let pt = purity(&series.spdm_at(i, &[0, 1, 2, 3]).unwrap(), 4).unwrap().value;
                let full = series.spdm_at(i, &[0, 1, 2, 3]).unwrap();
                let nu12 = contrast(&full, 0, 1).unwrap();
                let nu34 = contrast(&full, 2, 3).unwrap();
                println!("{t:.2} {n1:.4} {n2:.4} {p1:.5} {p2:.5} {pt:.6} {nu12:.4} {nu34:.4}");
            }
        }
        other => eprintln!("unknown mode {other}"),
    }
}
