//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetx::envelope::{
    bounded_extend_with, extend, lipschitz_extend, paraconvex_envelope_grid, EnvelopeOptions,
    ExtendConfig, Variant,
};
use jetx::jet::{
    check_equivalences, check_mg, check_wells_w11, compute_a, m_omega_g, threshold_w11,
};
use jetx::modulus::{check_modulus_identities, fenchel_conjugate_numeric};
use jetx::verify::{golden_jet, grid_tol, holder_trace_factor, verify_extension};
use jetx::{GridFunction, GridSpec, Jet, Modulus, NormMode, SearchBox};

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: String) -> Outcome {
    Outcome { pass, summary }
}

/// `count` distinct grid nodes with every coordinate in `[-r, r]`.
fn random_nodes(rng: &mut ChaCha8Rng, grid: &GridSpec, count: usize, r: f64) -> Vec<Vec<f64>> {
    let h = grid.spacing();
    let ranges: Vec<(usize, usize)> = (0..grid.dim())
        .map(|k| {
            let lo = ((-r - grid.lo[k]) / h[k]).ceil() as usize;
            let hi = ((r - grid.lo[k]) / h[k]).floor() as usize;
            (lo, hi)
        })
        .collect();
    let mut picked: Vec<Vec<usize>> = Vec::new();
    while picked.len() < count {
        let idx: Vec<usize> = ranges.iter().map(|&(a, b)| rng.gen_range(a..=b)).collect();
        if !picked.contains(&idx) {
            picked.push(idx);
        }
    }
    picked.iter().map(|i| grid.coord(i)).collect()
}

/// Values in `[-1, 1]` and gradients in `[-1, 1]^n` at random nodes.
fn random_jet(rng: &mut ChaCha8Rng, grid: &GridSpec, count: usize) -> Jet {
    let pts = random_nodes(rng, grid, count, 1.0);
    let vals = pts.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let grads = pts
        .iter()
        .map(|_| (0..grid.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    Jet::new(grid.dim(), pts, vals, grads).unwrap()
}

fn grid_for(dim: usize) -> GridSpec {
    match dim {
        1 => GridSpec::cube(1, -4.0, 4.0, 257).unwrap(),
        2 => GridSpec::cube(2, -4.0, 4.0, 65).unwrap(),
        _ => GridSpec::cube(dim, -3.0, 3.0, 33).unwrap(),
    }
}

fn tabulated() -> Modulus {
    let knots: Vec<[f64; 2]> = [0.0, 0.1, 0.3, 0.7, 1.5, 3.0, 6.0, 12.0]
        .iter()
        .map(|&t: &f64| [t, (1.0 + t).ln()])
        .collect();
    Modulus::tabulated(&knots).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let jet = golden_jet();
    let m = Modulus::holder(0.5).unwrap();
    let mog = m_omega_g(&jet, &m).unwrap().constant;
    let a = compute_a(&jet, &m, &SearchBox::default()).unwrap().constant;
    let took = start.elapsed();
    let pass = (mog - std::f64::consts::SQRT_2).abs() <= 1e-3
        && (1.30..=1.3076).contains(&a)
        && a < mog
        && took <= Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "M_omega(G) = {mog:.6}, A(f,G) = {a:.6}, {:.2} s",
            took.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ts: Vec<f64> = (0..1000).map(|_| rng.gen_range(1e-6..=100.0)).collect();
    let moduli = [
        ("t", Modulus::linear(1.0).unwrap()),
        ("t^1/2", Modulus::holder(0.5).unwrap()),
        ("t^1/4", Modulus::holder(0.25).unwrap()),
        ("tabulated", tabulated()),
    ];
    let mut pass = true;
    let mut worst_slack = f64::INFINITY;
    let mut worst_fy = 0.0f64;
    for (_, m) in &moduli {
        let rep = check_modulus_identities(m, &ts).unwrap();
        worst_slack = worst_slack.min(rep.worst_slack);
        pass &= rep.worst_slack >= -1e-6;
        // equality case against a numeric conjugate
        for &t in ts.iter().take(200) {
            let s = m.omega(t);
            let phi = |u: f64| m.phi(u);
            let numeric = fenchel_conjugate_numeric(phi, 4.0 * t + 1.0, 4000, s).unwrap();
            let rel = (m.phi(t) + numeric - t * s).abs() / (t * s).max(1.0);
            worst_fy = worst_fy.max(rel);
        }
    }
    pass &= worst_fy <= 1e-6;
    outcome(
        pass,
        format!("worst identity slack {worst_slack:.3e}, worst Fenchel-Young gap {worst_fy:.3e}"),
    )
}

fn criterion_3() -> Outcome {
    let lin = Modulus::linear(1.0).unwrap();
    let search = SearchBox::default();
    let (mut agree, mut total) = (0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let dim = 1 + (seed % 2) as usize;
        let count = rng.gen_range(2..=6);
        let jet = random_jet(&mut rng, &grid_for(dim), count);
        let Some(th) = threshold_w11(&jet).unwrap() else {
            continue;
        };
        if th == 0.0 {
            continue;
        }
        for factor in [0.9, 1.1] {
            let big_m = factor * th;
            let w = check_wells_w11(&jet, big_m).unwrap().passed;
            let mg = check_mg(&jet, &lin, big_m, &search).unwrap().passed;
            total += 1;
            if w == mg {
                agree += 1;
            }
        }
    }
    outcome(
        agree == total && total == 200,
        format!("{agree}/{total} verdicts agree"),
    )
}

fn criterion_4() -> Outcome {
    let moduli = [
        Modulus::holder(0.5).unwrap(),
        Modulus::linear(1.0).unwrap(),
        tabulated(),
    ];
    let mut pass = true;
    let mut worst_f = 0.0f64;
    let mut worst_g = 0.0f64;
    let mut worst_sandwich = f64::NEG_INFINITY;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
        let dim = 1 + (seed % 2) as usize;
        let grid = grid_for(dim);
        let count = rng.gen_range(1..=8);
        let jet = random_jet(&mut rng, &grid, count);
        let m = &moduli[seed as usize % 3];
        let ext = extend(&jet, m, Variant::General, &ExtendConfig::new(grid.clone())).unwrap();
        for (k, &node) in ext.e_nodes.iter().enumerate() {
            let df = (ext.extension.values[node] - jet.values()[k]).abs();
            worst_f = worst_f.max(df);
            pass &= df == 0.0;
            let err: f64 = ext.gradient[node]
                .iter()
                .zip(&jet.gradients()[k])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let allowed = 10.0 * ext.m_used * m.omega(grid.h());
            worst_g = worst_g.max(if allowed > 0.0 { err / allowed } else { err });
            pass &= err <= allowed + 1e-12;
        }
        for i in 0..grid.len() {
            let v = ext.extension.values[i];
            let gap = (ext.lower.values[i] - v).max(v - ext.upper.values[i]);
            worst_sandwich = worst_sandwich.max(gap);
            pass &= gap <= 0.0;
        }
    }
    outcome(
        pass,
        format!(
            "max |F - f| = {worst_f:.1e}, max |gradF - G|/(10 M omega(h)) = {worst_g:.3}, max sandwich gap = {worst_sandwich:.1e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    let mut runs = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let dim = 1 + (seed % 2) as usize;
        let grid = grid_for(dim);
        let count = rng.gen_range(2..=6);
        let jet = random_jet(&mut rng, &grid, count);
        let cases = [
            (Variant::General, Modulus::holder(0.5).unwrap()),
            (Variant::Holder, Modulus::holder(0.25).unwrap()),
            (Variant::Holder, Modulus::holder(0.5).unwrap()),
            (Variant::Holder, Modulus::holder(1.0).unwrap()),
        ];
        for (variant, m) in cases {
            let ext = extend(&jet, &m, variant, &ExtendConfig::new(grid.clone())).unwrap();
            let rep = verify_extension(&jet, &m, &ext, 10_000, seed).unwrap();
            let tol = rep.grid_tol;
            let a = ext.a_jet;
            let factor = match variant {
                Variant::Holder => 2f64.powf(1.0 - m.holder_exponent().unwrap()),
                _ => 2.0,
            };
            let a_f = rep.check("A(F,gradF)").unwrap().value_observed;
            let mut bounds = vec![(a_f, factor * a, "A(F,gradF)")];
            if variant == Variant::Holder {
                let alpha = m.holder_exponent().unwrap();
                let mo = rep.detail("M_omega_gradF_sampled").unwrap();
                bounds.push((mo, holder_trace_factor(alpha) * a, "M_omega(gradF)"));
            }
            for (obs, bound, name) in bounds {
                runs += 1;
                if bound > 0.0 {
                    worst = worst.max(obs / bound);
                }
                if obs > bound * (1.0 + tol) + 1e-9 {
                    violations.push(format!(
                        "seed {seed} {variant:?} {name}: {obs:.4e} > {bound:.4e}"
                    ));
                }
            }
        }
    }
    let summary = match violations.first() {
        None => format!("0 violations in {runs} checks, worst observed/bound = {worst:.4}"),
        Some(v) => format!(
            "{} violations in {runs} checks, first: {v}",
            violations.len()
        ),
    };
    outcome(violations.is_empty(), summary)
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let variants = [
        Variant::General,
        Variant::Holder,
        Variant::C11,
        Variant::Bounded,
        Variant::Lipschitz,
        Variant::Lp,
    ];
    for (i, &variant) in variants.iter().enumerate() {
        for dim in [1usize, 2] {
            let seed = 600 + 10 * i as u64 + dim as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let grid = grid_for(dim);
            let count = rng.gen_range(2..=5);
            let jet = random_jet(&mut rng, &grid, count);
            let m = if variant == Variant::C11 {
                Modulus::linear(1.0).unwrap()
            } else {
                Modulus::holder(0.5).unwrap()
            };
            let mut cfg = ExtendConfig::new(grid.clone());
            cfg.p = Some(1.5);
            let ext = extend(&jet, &m, variant, &cfg).unwrap();
            let rep = verify_extension(&jet, &m, &ext, 10_000, seed).unwrap();
            for name in ["paraconvexity_F", "paraconvexity_minus_F"] {
                let c = rep.check(name).unwrap();
                worst = worst.max(c.value_observed / c.bound_claimed);
                if !c.passed {
                    failures.push(format!(
                        "{variant:?} n={dim} {name}: {:.4e} > {:.4e}",
                        c.value_observed, c.bound_claimed
                    ));
                }
            }
        }
    }
    let summary = match failures.first() {
        None => format!("12 builds, worst effective C / C_used = {worst:.4}"),
        Some(f) => format!("{} failures, first: {f}", failures.len()),
    };
    outcome(failures.is_empty(), summary)
}

/// Lower convex hull by brute force over chords.
fn hull_oracle(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut out = ys.to_vec();
    for i in 0..n {
        for j in i + 2..n {
            for k in i + 1..j {
                let t = (xs[k] - xs[i]) / (xs[j] - xs[i]);
                let chord = ys[i] + t * (ys[j] - ys[i]);
                if chord < out[k] {
                    out[k] = chord;
                }
            }
        }
    }
    out
}

fn criterion_7() -> Outcome {
    let lin = Modulus::linear(1.0).unwrap();
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut tol_used = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let grid = GridSpec::cube(1, -3.0, 3.0, 241).unwrap();
        let count = rng.gen_range(2..=6);
        let jet = random_jet(&mut rng, &grid, count);
        let big_m = compute_a(&jet, &lin, &SearchBox::default())
            .unwrap()
            .constant
            * (1.0 + 1e-9);
        let xs: Vec<f64> = (0..grid.len()).map(|i| grid.coord_flat(i)[0]).collect();
        let g: Vec<f64> = xs
            .iter()
            .map(|&x| jetx::envelope::eval_g(&jet, &lin, big_m, &[x]))
            .collect();
        let floor: Vec<f64> = xs
            .iter()
            .zip(&g)
            .map(|(&x, gv)| jetx::envelope::eval_m(&jet, &lin, big_m, &[x]).min(*gv))
            .collect();
        let u0 = GridFunction::new(grid.clone(), g.clone(), NormMode::Euclidean).unwrap();
        let fl = GridFunction::new(grid.clone(), floor, NormMode::Euclidean).unwrap();
        let range = u0.max() - fl.min();
        let opts = EnvelopeOptions::new(1, 1e-9 * range.max(1e-12));
        let env = paraconvex_envelope_grid(&u0, &fl, big_m, &lin, &opts).unwrap();
        let psi: Vec<f64> = xs.iter().map(|x| 0.5 * big_m * x * x).collect();
        let lifted: Vec<f64> = g.iter().zip(&psi).map(|(a, b)| a + b).collect();
        let oracle = hull_oracle(&xs, &lifted);
        let tol = grid_tol(&lin, &grid);
        tol_used = tol;
        for i in 0..xs.len() {
            let err = (env.result.values[i] - (oracle[i] - psi[i])).abs();
            worst = worst.max(err);
            pass &= err <= 3.0 * tol;
        }
    }
    outcome(
        pass,
        format!(
            "max node error {worst:.3e} (allowed {:.3e})",
            3.0 * tol_used
        ),
    )
}

fn criterion_8() -> Outcome {
    let m = Modulus::holder(0.5).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    let mut worst_sup = 0.0f64;
    let mut worst_grad = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        let dim = 1 + (seed % 2) as usize;
        let grid = grid_for(dim);
        let count = rng.gen_range(1..=6);
        let jet = random_jet(&mut rng, &grid, count);
        let cfg = ExtendConfig::new(grid.clone());
        let ext = bounded_extend_with(&jet, &m, &cfg, None).unwrap();
        let rep = verify_extension(&jet, &m, &ext, 10_000, seed).unwrap();
        let cap = 2.0 * (jet.sup_f() + jet.sup_g());
        let sup_f = ext.extension.sup_norm();
        worst_sup = worst_sup.max(sup_f / cap);
        pass &= sup_f <= cap + 1e-9;
        let c = rep.check("bounded_sup_gradF").unwrap();
        worst_grad = worst_grad.max(c.value_observed / c.bound_claimed);
        pass &= c.passed;
    }
    notes.push(format!(
        "max |F|/cap = {worst_sup:.4}, max |gradF|/bound = {worst_grad:.4}"
    ));

    // continuity of the fixed-A operator under halving perturbations
    let mut rng = ChaCha8Rng::seed_from_u64(880);
    let grid = grid_for(1);
    let base = random_jet(&mut rng, &grid, 4);
    let df: Vec<f64> = (0..base.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dg: Vec<f64> = (0..base.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let perturbed = |eps: f64| {
        Jet::new(
            1,
            base.points().to_vec(),
            base.values()
                .iter()
                .zip(&df)
                .map(|(v, d)| v + eps * d)
                .collect(),
            base.gradients()
                .iter()
                .zip(&dg)
                .map(|(g, d)| vec![g[0] + eps * d])
                .collect(),
        )
        .unwrap()
    };
    let eps0 = 0.05;
    let jets: Vec<Jet> = (0..4).map(|k| perturbed(eps0 / 2f64.powi(k))).collect();
    let a_bound = jets
        .iter()
        .chain([&base])
        .map(|j| compute_a(j, &m, &SearchBox::default()).unwrap().constant)
        .fold(0.0, f64::max)
        * 1.05;
    let cfg = ExtendConfig::new(grid.clone());
    let f0 = bounded_extend_with(&base, &m, &cfg, Some(a_bound)).unwrap();
    let dists: Vec<f64> = jets
        .iter()
        .map(|j| {
            let fk = bounded_extend_with(j, &m, &cfg, Some(a_bound)).unwrap();
            fk.extension
                .values
                .iter()
                .zip(&f0.extension.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let monotone = dists.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    pass &= monotone;
    notes.push(format!(
        "sup|F_k - F| = [{}]",
        dists
            .iter()
            .map(|d| format!("{d:.3e}"))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    outcome(pass, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let m = Modulus::holder(0.5).unwrap();
    let mut pass = true;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let dim = 1 + (seed % 2) as usize;
        let grid = grid_for(dim);
        let count = rng.gen_range(1..=6);
        let jet = random_jet(&mut rng, &grid, count);
        let ext = lipschitz_extend(&jet, &m, &ExtendConfig::new(grid.clone())).unwrap();
        let rep = verify_extension(&jet, &m, &ext, 10_000, seed).unwrap();
        let c = rep.check("lipschitz_F").unwrap();
        let m_tilde = ext.detail("M_tilde").unwrap();
        let bound = jet.sup_g() + m.omega(1.0) * m_tilde;
        worst = worst.max(c.value_observed / bound);
        pass &= c.value_observed <= bound * (1.0 + rep.grid_tol) + 1e-9;
    }
    outcome(
        pass,
        format!("max sampled lip(F)/(|G| + omega(1) M~) = {worst:.4}"),
    )
}

fn criterion_10() -> Outcome {
    let search = SearchBox::default();
    let moduli = [
        Modulus::holder(0.5).unwrap(),
        Modulus::linear(1.0).unwrap(),
        tabulated(),
    ];
    let mut pass = true;
    let mut worst = [0.0f64; 3];
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let dim = 1 + (seed % 2) as usize;
        let count = rng.gen_range(2..=6);
        let jet = random_jet(&mut rng, &grid_for(dim), count);
        let m = &moduli[seed as usize % 3];
        let rep = check_equivalences(&jet, m, &search).unwrap();
        let mw = rep.detail_value("M_W").unwrap();
        let mmg = rep.detail_value("M_mg").unwrap();
        let mog = rep.detail_value("M_omega_G").unwrap();
        let ratios = [mmg / (4.0 * mw), mw / mmg, mog / (4.0 * mw)];
        for (w, r) in worst.iter_mut().zip(ratios) {
            *w = w.max(r);
            pass &= r <= 1.0 + 1e-3;
        }
    }
    outcome(
        pass,
        format!(
            "max M_mg/4M_W = {:.4}, max M_W/M_mg = {:.4}, max M_omega(G)/4M_W = {:.4}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn criterion_11() -> Outcome {
    let m = Modulus::holder(0.5).unwrap();
    let mut ratio = [0.0f64; 2];
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1100 + seed);
        let g1 = GridSpec::cube(1, -3.0, 3.0, 257).unwrap();
        let jet1 = random_jet(&mut rng, &GridSpec::cube(1, -3.0, 3.0, 33).unwrap(), 3);
        // the same jet on the first axis of R^3
        let jet3 = Jet::new(
            3,
            jet1.points().iter().map(|p| vec![p[0], 0.0, 0.0]).collect(),
            jet1.values().to_vec(),
            jet1.gradients()
                .iter()
                .map(|g| vec![g[0], 0.0, 0.0])
                .collect(),
        )
        .unwrap();
        let g3 = GridSpec::cube(3, -3.0, 3.0, 33).unwrap();
        for (slot, (jet, grid)) in [(&jet1, g1), (&jet3, g3)].into_iter().enumerate() {
            let ext = extend(jet, &m, Variant::General, &ExtendConfig::new(grid)).unwrap();
            let rep = verify_extension(jet, &m, &ext, 10_000, seed).unwrap();
            let r = rep.detail("A_F_sampled").unwrap() / ext.a_jet;
            ratio[slot] = ratio[slot].max(r);
        }
    }
    outcome(
        ratio[1] <= 1.1 * ratio[0],
        format!(
            "max sampled A(F)/A(f,G): n=1 {:.4}, n=3 {:.4}",
            ratio[0], ratio[1]
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("golden example", criterion_1),
        ("modulus identities", criterion_2),
        ("Wells equivalence", criterion_3),
        ("extension interpolation", criterion_4),
        ("constant bounds", criterion_5),
        ("paraconvexity of F and -F", criterion_6),
        ("hull oracle, linear modulus", criterion_7),
        ("bounded variant", criterion_8),
        ("Lipschitz variant", criterion_9),
        ("equivalence constants", criterion_10),
        ("dimension-free sanity", criterion_11),
    ];
    let only: Vec<usize> = std::env::args().filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let status = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} {:>2} {name}: {} [{:.1} s]",
            i + 1,
            out.summary,
            start.elapsed().as_secs_f64()
        );
        if !out.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
