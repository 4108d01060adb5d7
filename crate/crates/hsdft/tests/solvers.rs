use hsdft::field::{Branch, DensityField, FieldSolver, Launch};
use hsdft::functionals::{branch_derivatives, evaluate, f_stability, p_stability, pressure_functional, Stability};
use hsdft::phase::constrained_solve;
use hsdft::uniform::TriplicityRegion;
use hsdft::{EosModel, KernelSpec};

fn yukawa(radius: f64, n: usize) -> FieldSolver {
    FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), radius, n).unwrap()
}

#[test]
fn newton_converges_quadratically() {
    let s = yukawa(5.0, 128);
    let alpha = 15.0 / s.phi();
    let start = DensityField::constant(s.domain().clone(), 0.05);
    let rep = s.newton_solve(alpha, -3.0, &start, 1e-13).unwrap();
    let h = &rep.residual_history;
    let last = h.len() - 1;
    assert!(h[last] < 1e-13);
    // Once in the basin, each residual is bounded by a multiple of the square of its predecessor.
    let k = (1..=last).rev().take_while(|&i| h[i - 1] < 1e-2).last().unwrap();
    for i in k..=last {
        assert!(h[i] <= 10.0 * h[i - 1] * h[i - 1], "history {h:?}");
    }
    let m = s.minimal_solution(alpha, -3.0).unwrap();
    assert!(rep.field.sup_distance(&m.field) < 1e-10);
}

#[test]
fn small_launch_reaches_minimal_solution() {
    let spec = KernelSpec::van_der_waals(1.0);
    let s = FieldSolver::new(EosModel::cs_extended(), spec, 0.15, 64).unwrap();
    let (sg, _) = spec.optimal_scaling(0.3, hsdft::kernels::ball_volume(0.15));
    assert!(s.subsolution_launch(20.0 / s.phi(), -2.0, Launch::Small, sg).unwrap_err().to_string().contains("triplicity"));
    let alpha = 101.1 / s.phi();
    let psi = spec.psi_lambda(0.3 * sg, hsdft::kernels::ball_volume(0.15)) * sg.powi(3);
    let (a_phi, a_psi) = (TriplicityRegion::new(s.phi(), false), TriplicityRegion::new(psi, false));
    let lo = a_phi.gamma_check(alpha).unwrap().max(a_psi.gamma_check(alpha).unwrap());
    let hi = a_phi.gamma_hat(alpha).unwrap().min(a_psi.gamma_hat(alpha).unwrap());
    assert!(lo < hi);
    let gamma = 0.5 * (lo + hi);
    let a = s.subsolution_launch(alpha, gamma, Launch::Small, sg).unwrap();
    let b = s.minimal_solution(alpha, gamma).unwrap();
    assert!(a.field.sup_distance(&b.field) < 1e-9);
}

#[test]
fn pressure_derivative_is_particle_number() {
    let s = yukawa(10.0, 256);
    let alpha = 20.0 / s.phi();
    let (g, d) = (-4.0, 1e-4);
    let p = |g: f64| {
        let r = s.minimal_solution(alpha, g).unwrap();
        pressure_functional(&s, alpha, g, &r.field.values).unwrap()
    };
    let fd = (p(g + d) - p(g - d)) / (2.0 * d);
    let r = s.minimal_solution(alpha, g).unwrap();
    let n = branch_derivatives(&s, g, &r.field.values).dp_dgamma;
    assert!((fd / n - 1.0).abs() < 1e-6, "{fd} vs {n}");
}

#[test]
fn free_energy_derivative_is_gamma() {
    let s = yukawa(10.0, 256);
    let alpha = 20.0 / s.phi();
    let n0 = 0.03 * s.domain().volume();
    let dn = 1e-3 * n0;
    let f = |n: f64| constrained_solve(&s, alpha, n, Branch::Minimal, None).unwrap();
    let (lo, mid, hi) = (f(n0 - dn), f(n0), f(n0 + dn));
    let fd = (hi.functionals.f - lo.functionals.f) / (2.0 * dn);
    assert!((fd - mid.gamma).abs() < 1e-5 * mid.gamma.abs(), "{fd} vs {}", mid.gamma);
}

#[test]
fn zero_coupling_gives_uniform_density() {
    let s = yukawa(5.0, 64);
    let n = 0.2 * s.domain().volume();
    let bp = constrained_solve(&s, 0.0, n, Branch::Minimal, None).unwrap();
    assert!(bp.solution.field.values.iter().all(|v| (v - 0.2).abs() < 1e-9));
    let g = s.eos.gamma_of_eta(0.2).unwrap();
    assert!((bp.gamma - g).abs() < 1e-8);
}

#[test]
fn minimal_solution_is_locally_stable() {
    let s = yukawa(5.0, 128);
    let alpha = 15.0 / s.phi();
    let m = s.minimal_solution(alpha, -3.0).unwrap();
    let p = p_stability(&s, alpha, -3.0, &m.field.values, 50, 1).unwrap();
    let f = f_stability(&s, alpha, &m.field.values, 50, 1).unwrap();
    assert_eq!(p.classification, Stability::Stable);
    assert_eq!(f.classification, Stability::Stable);
    assert!(p.probe_max <= 0.0 && f.probe_min >= 0.0);
}

#[test]
fn solutions_are_radially_decreasing() {
    let s = yukawa(15.0, 256);
    let alpha = 31.0 / (4.0 * std::f64::consts::PI);
    for rep in [s.minimal_solution(alpha, -5.0).unwrap(), s.maximal_solution(alpha, -5.0).unwrap()] {
        assert!(rep.field.values.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        let f = evaluate(&s, alpha, -5.0, &rep.field.values, true).unwrap();
        assert!(f.legendre_defect().unwrap() < 1e-8);
    }
}
