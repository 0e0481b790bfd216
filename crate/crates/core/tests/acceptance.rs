//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use spinmeter::linalg::{identity_deviation, max_abs};
use spinmeter::measurement::{null_band_g, MeasurementModel};
use spinmeter::random::{random_density, random_ket, random_unit_vector, rng};
use spinmeter::symbols::{
    contravariant_symbol_real, covariant_symbol_real, p_function, q_function,
};
use spinmeter::tomography::{reconstruct, reconstruct_counts, sample_outcomes};
use spinmeter::type2::{convergence_study, ConvergenceRow};
use spinmeter::{
    make_completely_optimal, make_retrodictively_optimal, CoherentGrid, DensityMatrix, Povm, Spin,
    UnitVector,
};

fn frame(twice: u32) -> Arc<CoherentGrid> {
    CoherentGrid::for_spin(Spin::from_twice(twice).unwrap())
}

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.pass &= elapsed < limit;
    o.detail = format!("{}; {:.2?} (limit {:?})", o.detail, elapsed, limit);
    o
}

fn bound_saturation() -> Outcome {
    let mut worst = 0.0f64;
    for twice in 1..=5 {
        let f = frame(twice);
        let s = f.s();
        let r = make_completely_optimal(f, None).unwrap().fidelity_report();
        for err in [
            r.eta_i - s,
            r.eta_f - s,
            r.eta_d - s * s,
            r.delta_ei - s.sqrt(),
            r.delta_ef - s.sqrt(),
            r.delta_d - (2.0 * s).sqrt(),
        ] {
            worst = worst.max(err.abs());
        }
    }
    outcome(worst < 1e-9, format!("max deviation {worst:.2e}"))
}

fn error_relations() -> Outcome {
    let mut r = rng(2);
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for twice in 1..=3 {
        let f = frame(twice);
        let s = f.s();
        for i in 0..100 {
            let model = MeasurementModel::random_isometric(f.clone(), 1 + i % 3, &mut r);
            let rep = model.fidelity_report();
            worst = worst.max(rep.eta_i - s).max(rep.eta_f - s);
            count += 1;
        }
    }
    outcome(
        worst <= 1e-10,
        format!("{count} models, max(eta - s) = {worst:.2e}"),
    )
}

fn q_function_theorem() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for twice in 1..=4 {
        let f = frame(twice);
        let povm = Povm::optimal(f.clone());
        for _ in 0..50 {
            let rho = random_density(&mut r, f.dim());
            let val = povm.outcome_distribution(&rho).unwrap();
            let q = q_function(&f, &rho).unwrap();
            worst = worst.max(val.max_abs_diff(q.values()));
        }
    }
    let f = frame(2);
    let g = null_band_g(&f, 0.5, &UnitVector::Z);
    let model = make_retrodictively_optimal(f.clone(), Some(&g), None).unwrap();
    let povm = model.povm();
    let eta = povm.retrodictive_fidelity();
    let iso = povm.isotropy();
    let perturbed_ok = (eta - f.s()).abs() < 1e-9 && !iso.isotropic;
    outcome(
        worst < 1e-10 && perturbed_ok,
        format!(
            "max |val - Q| {worst:.2e}; perturbed eta_i - s {:.2e}, anisotropy {:.2e}",
            eta - f.s(),
            iso.max_deviation
        ),
    )
}

fn coherent_calculus() -> Outcome {
    let mut r = rng(4);
    let mut eig = 0.0f64;
    for _ in 0..200 {
        let twice = r.random_range(1..=5u32);
        let f = frame(twice);
        let sys = f.sys();
        let n = random_unit_vector(&mut r);
        let ms = sys.m_values();
        let m = ms[r.random_range(0..ms.len())];
        let ket = sys.coherent_ket(&n, m).unwrap().amplitudes;
        let resid = (sys.along(&n) * &ket - ket.scale(m)).norm();
        eig = eig.max(resid);
    }
    let mut resolution = 0.0f64;
    let mut variance = 0.0f64;
    let mut reproducing = 0.0f64;
    for twice in 1..=5 {
        let f = frame(twice);
        let ones = vec![spinmeter::linalg::c(1.0); f.len()];
        resolution = resolution.max(identity_deviation(&f.synthesize(&ones).unwrap()));
        for _ in 0..10 {
            let n = random_unit_vector(&mut r);
            let v = f.sys().variance_sum(&f.sys().coherent(&n)).unwrap();
            variance = variance.max((v - f.s()).abs());
        }
        let rho = random_density(&mut r, f.dim());
        let q = q_function(&f, &rho).unwrap();
        let projected = f.kernel().project(f.grid(), q.values()).unwrap();
        reproducing = reproducing.max(q.max_abs_diff(&projected));
        for k in (0..f.len()).step_by(7) {
            let col: Vec<f64> = (0..f.len())
                .map(|l| f.kernel().eval(f.node(k), f.node(l)))
                .collect();
            let again = f.kernel().project(f.grid(), &col).unwrap();
            let diff = col
                .iter()
                .zip(&again)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            reproducing = reproducing.max(diff);
        }
    }
    outcome(
        eig < 1e-10 && resolution < 1e-10 && variance < 1e-10 && reproducing < 1e-10,
        format!(
            "eigen {eig:.2e}, identity {resolution:.2e}, variance {variance:.2e}, kernel {reproducing:.2e}"
        ),
    )
}

fn symbol_duality() -> Outcome {
    let mut worst = 0.0f64;
    for twice in 1..=5 {
        let f = frame(twice);
        let s = f.s();
        for a in 0..3 {
            let op = f.sys().op(a);
            let cov = covariant_symbol_real(&f, op).unwrap();
            let con = contravariant_symbol_real(&f, op).unwrap();
            for k in 0..f.len() {
                let na = f.node(k).components()[a];
                worst = worst.max((cov.values()[k] - s * na).abs());
                worst = worst.max((con.values()[k] - (s + 1.0) * na).abs());
            }
        }
    }
    outcome(worst < 1e-9, format!("max deviation {worst:.2e}"))
}

fn mean_relations() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for twice in 1..=5 {
        let f = frame(twice);
        let s = f.s();
        let model = make_completely_optimal(f.clone(), None).unwrap();
        for _ in 0..20 {
            let rho = random_density(&mut r, f.dim());
            let mv = model.mean_relations(&rho).unwrap();
            for a in 0..3 {
                worst = worst.max((mv.initial_spin[a] - (s + 1.0) * mv.pointer[a]).abs());
                worst = worst.max((mv.final_spin[a] - s * mv.pointer[a]).abs());
            }
        }
    }
    outcome(worst < 1e-9, format!("max deviation {worst:.2e}"))
}

fn final_state_p_function() -> Outcome {
    let mut r = rng(7);
    let mut worst_p = 0.0f64;
    let mut worst_single = 0.0f64;
    for twice in 1..=2 {
        let f = frame(twice);
        let model = make_completely_optimal(f.clone(), None).unwrap();
        for _ in 0..10 {
            let rho = random_density(&mut r, f.dim());
            let mut region: Vec<usize> = (0..f.len()).filter(|_| r.random_bool(0.4)).collect();
            if region.is_empty() {
                region.push(0);
            }
            let (post, p) = model.selective_update(&rho, &region).unwrap();
            let pf = p_function(&f, &post).unwrap();
            let val = model.outcome_distribution(&rho).unwrap();
            for k in 0..f.len() {
                let want: f64 = region
                    .iter()
                    .map(|&l| f.weight(l) * f.kernel().eval(f.node(k), f.node(l)) * val.values()[l])
                    .sum::<f64>()
                    / p;
                worst_p = worst_p.max((pf.values()[k] - want).abs());
            }
            let k = r.random_range(0..f.len());
            let (single, _) = model.selective_update(&rho, &[k]).unwrap();
            let target = DensityMatrix::pure(f.ket(k)).unwrap();
            worst_single = worst_single.max(max_abs(&(single.matrix() - target.matrix())));
        }
    }
    outcome(
        worst_p < 1e-8 && worst_single < 1e-10,
        format!("P relation {worst_p:.2e}, single node {worst_single:.2e}"),
    )
}

fn dilation_consistency() -> Outcome {
    let mut r = rng(8);
    let mut iso = 0.0f64;
    let mut dynamics = 0.0f64;
    for twice in 1..=4 {
        let f = frame(twice);
        let models = [
            make_completely_optimal(f.clone(), None).unwrap(),
            MeasurementModel::random_isometric(f.clone(), 2, &mut r),
        ];
        for model in &models {
            let v = model.dilation().unwrap();
            iso = iso.max(v.isometry_deviation());
            for _ in 0..5 {
                let rho = random_density(&mut r, f.dim());
                let joint = v.evolve(rho.matrix());
                let nonsel = model.nonselective_update(&rho).unwrap();
                dynamics = dynamics.max(max_abs(&(v.reduce(&joint, None) - nonsel.matrix())));
                let region: Vec<usize> = (0..f.len())
                    .filter(|_| r.random_bool(0.5))
                    .chain([0])
                    .collect();
                let (post, p) = model.selective_update(&rho, &region).unwrap();
                let partial = v.reduce(&joint, Some(&region)).unscale(p);
                dynamics = dynamics.max(max_abs(&(partial - post.matrix())));
                let probs = model.povm().probabilities(&rho).unwrap();
                for (a, b) in probs.iter().zip(v.pointer_marginal(&joint)) {
                    dynamics = dynamics.max((a - b).abs());
                }
            }
            let psi = random_ket(&mut r, f.dim());
            dynamics = dynamics.max((v.apply(&psi).norm() - 1.0).abs());
        }
    }
    outcome(
        iso < 1e-10 && dynamics < 1e-10,
        format!("isometry {iso:.2e}, dynamics {dynamics:.2e}"),
    )
}

fn type2_convergence() -> Outcome {
    let f = frame(1);
    let floor = f.s().sqrt();
    let rows: Vec<ConvergenceRow> = convergence_study(f, &[1.0, 0.5, 0.25, 0.1]).unwrap();
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].delta_ei < w[0].delta_ei && w[1].delta_ef < w[0].delta_ef);
    let above = rows
        .iter()
        .all(|r| r.delta_ei > floor && r.delta_ef > floor);
    let gap = rows[3].delta_ei - floor;
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("{}:{:.5}/{:.5}", r.sigma, r.delta_ei, r.delta_ef))
        .collect();
    outcome(
        decreasing && above && gap < 0.05,
        format!("{}; gap at 0.1 {gap:.4}", table.join(" ")),
    )
}

fn tomography() -> Outcome {
    let mut r = rng(10);
    let mut exact = 0.0f64;
    for twice in 1..=5 {
        let f = frame(twice);
        let povm = Povm::optimal(f.clone());
        for _ in 0..5 {
            let rho = random_density(&mut r, f.dim());
            let res = reconstruct(&povm, &povm.probabilities(&rho).unwrap()).unwrap();
            exact = exact.max(res.estimate.trace_distance(&rho).unwrap());
        }
    }

    let f = frame(1);
    let povm = Povm::optimal(f.clone());
    let mut min_fid = f64::INFINITY;
    for trial in 0..20u64 {
        let rho = DensityMatrix::pure(&random_ket(&mut r, 2)).unwrap();
        let counts = sample_outcomes(&povm, &rho, 100_000, 1000 + trial).unwrap();
        let res = reconstruct_counts(&povm, &counts).unwrap();
        min_fid = min_fid.min(res.estimate.fidelity(&rho).unwrap());
    }

    let sizes = [1_000u64, 10_000, 100_000];
    let trials = 40u64;
    let mut logs = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let mut total = 0.0;
        for t in 0..trials {
            let rho = random_density(&mut r, 2);
            let counts = sample_outcomes(&povm, &rho, n, 5000 + 100 * i as u64 + t).unwrap();
            let res = reconstruct_counts(&povm, &counts).unwrap();
            total += res.estimate.trace_distance(&rho).unwrap();
        }
        logs.push(((n as f64).ln(), (total / trials as f64).ln()));
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / logs.len() as f64;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / logs.len() as f64;
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();

    outcome(
        exact < 1e-8 && min_fid > 0.99 && (slope + 0.5).abs() <= 0.15,
        format!("exact TD {exact:.2e}, min fidelity {min_fid:.5}, slope {slope:.3}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 bound saturation", || {
            timed(Duration::from_secs(5), bound_saturation)
        }),
        ("2 error relations", || {
            timed(Duration::from_secs(30), error_relations)
        }),
        ("3 Q-function theorem", q_function_theorem),
        ("4 coherent-state calculus", coherent_calculus),
        ("5 symbol duality", symbol_duality),
        ("6 mean relations", mean_relations),
        ("7 final-state P-function", final_state_p_function),
        ("8 dilation consistency", dilation_consistency),
        ("9 type-2 convergence", || {
            timed(Duration::from_secs(60), type2_convergence)
        }),
        ("10 tomography", tomography),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
