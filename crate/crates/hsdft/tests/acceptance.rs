//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use hsdft::eos::{self, EosModel};
use hsdft::field::{DensityField, FieldSolver, Launch, Monotone, SolverSettings};
use hsdft::functionals::{evaluate, p_stability, pressure_functional};
use hsdft::kernels::{ball_volume, KernelSpec};
use hsdft::phase::{droplet_criterion, droplet_trial, grand_canonical_transition, n_hat, petit_canonical_transition};
use hsdft::quadrature::adaptive;
use hsdft::spectral::spectral_radius;
use hsdft::uniform::{gamma_boundaries, solve_uniform, TriplicityRegion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Values from the first verified run of criterion 8.
const GOLDEN_GAMMA_GL: f64 = -4.848100784608203;
const GOLDEN_N_VD: f64 = 2239.871519421823;

struct Outcome {
    pass: bool,
    detail: String,
}

type Legendre = Vec<(String, f64)>;

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    if el > limit {
        o.pass = false;
    }
    o.detail = format!("{} [{:.2?} / limit {:?}]", o.detail, el, limit);
    o
}

fn record(solver: &FieldSolver, leg: &mut Legendre, label: &str, alpha: f64, gamma: f64, values: &[f64]) {
    let d = evaluate(solver, alpha, gamma, values, true).ok().and_then(|f| f.legendre_defect()).unwrap_or(f64::INFINITY);
    leg.push((label.to_string(), d));
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn criterion_1() -> Outcome {
    let (ew, gw, k) = eos::find_inflection();
    let g249 = eos::g2(0.49).unwrap();
    let g2p = eos::g2_derivs(ew, 1).unwrap();
    // The quoted third derivative belongs to the inflection point rounded to 0.130.
    let g2ppp = eos::g2_derivs(0.130, 3).unwrap();
    let g2ppp_exact = eos::g2_derivs(ew, 3).unwrap();
    let g4 = eos::speedy_g4(0.54).unwrap();
    let pass = close(ew, 0.130, 0.002)
        && close(gw, -0.67, 0.02)
        && close(k, 0.047, 0.002)
        && close(g249, 15.208, 1e-3)
        && close(g2p, 21.20, 0.1)
        && close(g2ppp, 1235.22, 2.0)
        && close(g4, 15.208, 1e-2);
    Outcome {
        pass,
        detail: format!(
            "eta={ew:.6} gamma={gw:.6} K={k:.6} g2(0.49)={g249:.6} g2'={g2p:.4} g2'''(0.130)={g2ppp:.3} (at exact root {g2ppp_exact:.3}) g4(0.54)={g4:.6}"
        ),
    }
}

fn criterion_2() -> Outcome {
    let tol = 1e-13;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for x in [0.1, 1.0, 10.0, 100.0] {
        for spec in [KernelSpec::van_der_waals(1.0), KernelSpec::yukawa(1.0), KernelSpec::newton()] {
            let radius = x;
            for f in [0.0, 0.25, 0.5, 0.9, 1.0, 1.5] {
                let r = f * radius;
                let a = spec.ball_potential(r, radius);
                let b = spec.ball_potential_quadrature(r, radius);
                worst = worst.max((a / b - 1.0).abs());
                count += 1;
            }
            let (l1, _) = adaptive(|s| -4.0 * PI * s * s * spec.eval(s.max(1e-300)).unwrap(), 0.0, radius, tol, tol);
            worst = worst.max((spec.ball_l1(radius) / l1 - 1.0).abs());
            let (dbl, _) = adaptive(|r| 4.0 * PI * r * r * spec.ball_potential(r, radius), 0.0, radius, tol, tol);
            worst = worst.max((spec.ball_double_integral(radius) / dbl - 1.0).abs());
            count += 2;
        }
    }
    Outcome { pass: worst < 1e-6, detail: format!("{count} closed-form values, max rel err {worst:.2e}") }
}

fn criterion_3(leg: &Legendre) -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let e = 0.49 * (i as f64 + 0.5) / 1000.0;
        worst = worst.max((e * eos::g2_derivs(e, 1).unwrap() - eos::g1_prime(e).unwrap()).abs());
    }
    let (name, lw) = leg.iter().fold((String::new(), 0.0f64), |acc, (n, d)| if *d > acc.1 { (n.clone(), *d) } else { acc });
    Outcome {
        pass: worst < 1e-10 && lw < 1e-8 && !leg.is_empty(),
        detail: format!("|eta g2' - g1'| max {worst:.2e}; Legendre defect max {lw:.2e} over {} solutions (worst: {name})", leg.len()),
    }
}

fn criterion_4(leg: &mut Legendre) -> Outcome {
    let eos = EosModel::hard_sphere();
    let alpha = 31.0 / (4.0 * PI);
    let gamma = -5.0;
    let mut ok = true;
    let mut notes = Vec::new();
    for radius in [5.0, 15.0, 30.0] {
        let s = FieldSolver::new(eos, KernelSpec::yukawa(1.0), radius, 512).unwrap();
        let pr = hsdft::field::predicates(&s.eos, s.spec(), alpha, gamma, radius);
        ok &= pr.existence_sufficient;
        let lower = eos.density(gamma).unwrap();
        let run = |start: DensityField| {
            let mut p_drop: f64 = 0.0;
            let mut last: Option<f64> = None;
            let rep = s.picard_observed(alpha, gamma, &start, &mut |_, v| {
                let p = pressure_functional(&s, alpha, gamma, v).unwrap();
                if let Some(q) = last {
                    p_drop = p_drop.max((q - p) / p.abs());
                }
                last = Some(p);
            });
            (rep, p_drop)
        };
        let dom = s.domain().clone();
        let (m, mdrop) = run(DensityField::constant(dom.clone(), lower));
        let (level, _) = s.supersolution_level(alpha, gamma).unwrap();
        let (big, bdrop) = run(DensityField::constant(dom, level));
        let (Ok(m), Ok(big)) = (m, big) else {
            ok = false;
            notes.push(format!("R={radius}: launch failed"));
            continue;
        };
        let mono = m.monotone == Monotone::Up && big.monotone == Monotone::Down && m.monotone_violation <= 1e-12 && big.monotone_violation <= 1e-12;
        let above = m.field.values.iter().chain(&big.field.values).all(|&v| v > lower);
        let ordered = m.field.values.iter().zip(&big.field.values).all(|(a, b)| a <= b);
        let p_up = mdrop <= 1e-12 && bdrop <= 1e-12;
        ok &= mono && above && ordered && p_up;
        record(&s, leg, &format!("c4 minimal R={radius}"), alpha, gamma, &m.field.values);
        record(&s, leg, &format!("c4 maximal R={radius}"), alpha, gamma, &big.field.values);
        notes.push(format!(
            "R={radius}: it {}/{} viol {:.1e}/{:.1e} max P drop {:.1e} ordered={ordered} above={above}",
            m.iterations, big.iterations, m.monotone_violation, big.monotone_violation, mdrop.max(bdrop)
        ));
    }
    Outcome { pass: ok, detail: notes.join("; ") }
}

fn criterion_5(leg: &mut Legendre) -> Outcome {
    let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 5.0, 512)
        .unwrap()
        .with_settings(SolverSettings { tol: 1e-13, residual_tol: 1e-12, ..SolverSettings::default() });
    let alpha = 15.0 / s.phi();
    let gamma = -3.0;
    let k = s.eos.k_gamma_fs;
    let pr = hsdft::field::predicates(&s.eos, s.spec(), alpha, gamma, 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let reference = s.minimal_solution(alpha, gamma).unwrap();
    record(&s, leg, "c5 minimal", alpha, gamma, &reference.field.values);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let v: Vec<f64> = (0..512).map(|_| rng.gen_range(1e-6..0.49)).collect();
        let start = DensityField::new(s.domain().clone(), v).unwrap();
        match s.picard_iterate(alpha, gamma, &start) {
            Ok(r) => worst = worst.max(r.field.sup_distance(&reference.field)),
            Err(_) => worst = f64::INFINITY,
        }
    }
    Outcome {
        pass: alpha * s.phi() * k < 1.0 && pr.uniqueness_contraction && worst < 2e-10,
        detail: format!("alpha Phi K = {:.4}; max sup distance of 10 random starts {worst:.2e}", alpha * s.phi() * k),
    }
}

fn criterion_6(leg: &mut Legendre) -> Outcome {
    let spec = KernelSpec::van_der_waals(1.0);
    let radius = 0.15;
    let (s_grave, psi) = spec.optimal_scaling(2.0 * radius, ball_volume(radius));
    let phi = spec.phi_lambda(radius);
    let big = TriplicityRegion::new(phi, false);
    let small = TriplicityRegion::new(psi, false);
    // Alpha with the widest gamma overlap of the two regions.
    let (mut alpha, mut width) = (f64::NAN, f64::NEG_INFINITY);
    for i in 1..400 {
        let a = (21.3 + 0.2 * i as f64) / phi;
        if let (Ok(c1), Ok(h1), Ok(c2), Ok(h2)) = (big.gamma_check(a), big.gamma_hat(a), small.gamma_check(a), small.gamma_hat(a)) {
            let w = h1.min(h2) - c1.max(c2);
            if w > width {
                width = w;
                alpha = a;
            }
        }
    }
    let gamma = 0.5 * (big.gamma_check(alpha).unwrap().max(small.gamma_check(alpha).unwrap()) + big.gamma_hat(alpha).unwrap().min(small.gamma_hat(alpha).unwrap()));
    let s = FieldSolver::new(EosModel::cs_extended(), spec, radius, 64).unwrap();
    let mut run = || -> hsdft::Result<(bool, String)> {
        let m = s.subsolution_launch(alpha, gamma, Launch::Small, s_grave)?;
        let mm = s.subsolution_launch(alpha, gamma, Launch::Large, s_grave)?;
        let minimal = s.minimal_solution(alpha, gamma)?;
        let mid_root = solve_uniform(alpha * phi, gamma)?.roots[1];
        let mid = s.newton_solve(alpha, gamma, &DensityField::constant(s.domain().clone(), mid_root), 1e-11)?;
        for (n, r) in [("m", &m), ("M", &mm), ("middle", &mid)] {
            record(&s, leg, &format!("c6 {n}"), alpha, gamma, &r.field.values);
        }
        let st = p_stability(&s, alpha, gamma, &mid.field.values, 100, 6)?;
        let d1 = m.field.sup_distance(&mm.field);
        let d2 = m.field.sup_distance(&mid.field);
        let d3 = mid.field.sup_distance(&mm.field);
        let distinct = d1.min(d2).min(d3) > 1e-3;
        let mono = m.monotone == Monotone::Up && mm.monotone == Monotone::Up;
        let m_is_minimal = m.field.sup_distance(&minimal.field) < 1e-9;
        let above = mm.field.values.iter().zip(&m.field.values).all(|(a, b)| a > b);
        let ok = distinct && mono && st.indefinite() && m_is_minimal && above;
        Ok((
            ok,
            format!(
                "alpha={alpha:.2} gamma={gamma:.4} Phi/Psi={:.4} distances {d1:.3}/{d2:.3}/{d3:.3} middle P'' eigen [{:.3e}, {:.3e}] m=minimal:{m_is_minimal} monotone-up:{mono}",
                phi / psi, st.opposite_eigenvalue, st.extreme_eigenvalue
            ),
        ))
    };
    let inside = big.contains(alpha, gamma) && small.contains(alpha, gamma);
    match run() {
        Ok((ok, d)) => Outcome {
            pass: ok && inside,
            detail: d,
        },
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn criterion_7() -> Outcome {
    let c = droplet_criterion(31.0).unwrap();
    let values = close(c.eta_hat_big_m, 0.41, 0.01) && close(c.eta_hat_m, 0.045, 0.003) && close(c.rhs, 28.75, 0.2) && close(c.volume_ratio, 9.0, 0.5) && c.fires;
    let alpha = 31.0 / (4.0 * PI);
    // The criterion neglects O(1/diam B) surface terms, so the trial comparison
    // needs a macroscopic container; R = 30 is reported for reference.
    let compare = |radius: f64, n: usize| {
        let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), radius, n).unwrap();
        let (nh, vapor) = n_hat(&s, alpha).unwrap();
        let dom = s.domain().clone();
        let trial = droplet_trial(&dom, nh, nh / c.eta_hat_big_m / dom.volume()).unwrap();
        let f_trial = evaluate(&s, alpha, vapor.gamma, &trial.values, false).unwrap().f;
        (nh, f_trial, vapor.functionals.f)
    };
    let (nh, f_trial, f_vapor) = compare(100.0, 1024);
    let (_, small_trial, small_vapor) = compare(30.0, 512);
    let beats = f_trial < f_vapor;
    Outcome {
        pass: values && beats,
        detail: format!(
            "eta_M={:.4} eta_m={:.4} rhs={:.4} ratio={:.3} fires={}; R=100: N-hat={nh:.1}, F trial {f_trial:.2} vs vapor {f_vapor:.2}; (R=30: {small_trial:.2} vs {small_vapor:.2})",
            c.eta_hat_big_m, c.eta_hat_m, c.rhs, c.volume_ratio, c.fires
        ),
    }
}

fn criterion_8(leg: &mut Legendre) -> Outcome {
    let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 30.0, 512).unwrap();
    let alpha = 31.0 / (4.0 * PI);
    let mut run = || -> hsdft::Result<Outcome> {
        let gc = grand_canonical_transition(&s, alpha, None, 16)?;
        let (gchk, ghat) = gamma_boundaries(alpha * s.phi(), false)?;
        let (nh, _) = n_hat(&s, alpha)?;
        let pc = petit_canonical_transition(&s, alpha, Some((gc.gas.n(), nh)))?;
        for (n, bp) in [("gas", &gc.gas), ("liquid", &gc.liquid), ("vapor", &pc.vapor), ("droplet", &pc.droplet)] {
            record(&s, leg, &format!("c8 {n}"), alpha, bp.gamma, &bp.solution.field.values);
        }
        let dp = (gc.liquid.functionals.p - gc.gas.functionals.p).abs() / gc.gas.functionals.p.abs();
        let df = (pc.vapor.functionals.f + pc.vapor.gamma * (pc.n_vd - pc.vapor.n()) - pc.droplet.functionals.f).abs() / pc.droplet.functionals.f.abs();
        let gc_ok = dp < 1e-8 && gc.delta_n > 0.0 && gc.gamma_gl > gchk && gc.gamma_gl < ghat && gc.gas.solution.field.sup_distance(&gc.liquid.solution.field) > 1e-3;
        let pc_ok = df < 1e-8 && pc.delta_gamma < 0.0;
        let embedding = gc.gas.n() <= pc.n_vd && pc.n_vd < gc.liquid.n();
        let golden = close(gc.gamma_gl, GOLDEN_GAMMA_GL, 1e-6 * GOLDEN_GAMMA_GL.abs()) && close(pc.n_vd, GOLDEN_N_VD, 1e-4 * GOLDEN_N_VD);
        Ok(Outcome {
            pass: gc_ok && pc_ok && embedding && golden,
            detail: format!(
                "gamma_gl={:.10} |dP|/P={dp:.1e} dN={:.2}; N_vd={:.4} |dF|/F={df:.1e} dGamma={:.4} dE={:.2} dS={:.2}; N_g={:.2} <= N_vd < N_l={:.2}: {embedding}; goldens {golden}; crossings {}",
                gc.gamma_gl, gc.delta_n, pc.n_vd, pc.delta_gamma, pc.delta_e, pc.delta_s, gc.gas.n(), gc.liquid.n(), pc.rearrangement_crossings
            ),
        })
    };
    run().unwrap_or_else(|e| Outcome { pass: false, detail: e.to_string() })
}

fn criterion_9() -> Outcome {
    let newton = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::newton(), 1.0, 256).unwrap();
    let rn = spectral_radius(&newton.op, 100_000).unwrap();
    let inside = rn.v_lambda > 2.0 * PI / 15.0 && rn.v_lambda < 2.0 * PI && rn.within_bounds();
    // Exact principal eigenvalue of the Newton operator on the unit ball: 16 R^2 / pi.
    let exact = (rn.v_lambda / (16.0 / PI) - 1.0).abs();
    let yuk = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 50.0, 256).unwrap();
    let ry = spectral_radius(&yuk.op, 100_000).unwrap();
    let rel = (ry.v_lambda / (4.0 * PI) - 1.0).abs();
    Outcome {
        pass: inside && rel < 0.01 && exact < 1e-8 && ry.within_bounds(),
        detail: format!(
            "Newton R=1: v={:.6} in ({:.4}, {:.4}), mean bound {:.4}, rel dev from 16/pi {exact:.1e}; Yukawa R=50: v={:.6}, rel dev from 4 pi {rel:.2e}",
            rn.v_lambda,
            2.0 * PI / 15.0,
            2.0 * PI,
            rn.lower_bound,
            ry.v_lambda
        ),
    }
}

fn criterion_10(leg: &mut Legendre) -> Outcome {
    let mut res = Vec::new();
    let mut bnd: f64 = 0.0;
    for n in [256, 512, 1024] {
        let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 5.0, n).unwrap();
        let alpha = 15.0 / s.phi();
        let rep = s.minimal_solution(alpha, -3.0).unwrap();
        record(&s, leg, &format!("c10 n={n}"), alpha, -3.0, &rep.field.values);
        res.push(hsdft::field::pde_residual(&s, &rep, n).unwrap());
        let (a, b) = hsdft::field::boundary_values(&s, &rep).unwrap();
        bnd = bnd.max((a - b).abs());
    }
    let o1 = (res[0] / res[1]).log2();
    let o2 = (res[1] / res[2]).log2();
    Outcome {
        pass: o1 >= 1.9 && o2 >= 1.9 && bnd < 1e-6,
        detail: format!("residuals {:.2e}/{:.2e}/{:.2e}, orders {o1:.3}/{o2:.3}, boundary mismatch {bnd:.1e}", res[0], res[1], res[2]),
    }
}

fn criterion_11() -> Outcome {
    let (_, gh) = gamma_boundaries(1e4, false).unwrap();
    let asym = -(1e4f64).ln() - 1.0;
    Outcome { pass: close(gh, asym, 0.01), detail: format!("gamma-hat(1e4)={gh:.6}, -ln(1e4)-1={asym:.6}") }
}

fn criterion_12() -> Outcome {
    let spec = KernelSpec::yukawa(0.5);
    let radius = 200.0;
    let (_, psi) = spec.optimal_scaling(2.0 * radius, ball_volume(radius));
    let ratio = spec.phi_lambda(radius) / psi;
    let exact = 6.0 * 1f64.exp().powi(2);
    Outcome { pass: (35.0..=55.0).contains(&ratio) && close(ratio, exact, 1e-2 * exact), detail: format!("Phi/Psi={ratio:.4} (large-ball limit 6 e^2 = {exact:.4})") }
}

fn main() -> ExitCode {
    let mut leg = Legendre::new();
    let mut results: Vec<(usize, Outcome)> = vec![
        (1, timed(Duration::from_secs(1), criterion_1)),
        (2, timed(Duration::from_secs(10), criterion_2)),
        (4, timed(Duration::from_secs(60), || criterion_4(&mut leg))),
        (5, timed(Duration::from_secs(60), || criterion_5(&mut leg))),
        (6, timed(Duration::from_secs(300), || criterion_6(&mut leg))),
        (7, timed(Duration::from_secs(60), criterion_7)),
        (8, timed(Duration::from_secs(900), || criterion_8(&mut leg))),
        (9, timed(Duration::from_secs(30), criterion_9)),
        (10, timed(Duration::from_secs(120), || criterion_10(&mut leg))),
        (11, timed(Duration::from_secs(1), criterion_11)),
        (12, timed(Duration::from_secs(1), criterion_12)),
        (3, timed(Duration::from_secs(60), || criterion_3(&leg))),
    ];
    results.sort_by_key(|r| r.0);
    let mut all = true;
    for (i, o) in &results {
        all &= o.pass;
        println!("criterion {i:>2}: {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
