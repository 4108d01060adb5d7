//! Three solutions in a small van der Waals ball (CS-extended model).
use hsdft::field::{DensityField, FieldSolver, Launch};
use hsdft::functionals::p_stability;
use hsdft::kernels::ball_volume;
use hsdft::uniform::{solve_uniform, TriplicityRegion};
use hsdft::{EosModel, KernelSpec};

fn main() -> hsdft::Result<()> {
    let spec = KernelSpec::van_der_waals(1.0);
    let radius = 0.15;
    let s = FieldSolver::new(EosModel::cs_extended(), spec, radius, 64)?;
    let (sg, psi) = spec.optimal_scaling(2.0 * radius, ball_volume(radius));
    let alpha = 101.1 / s.phi();
    let (a, b) = (TriplicityRegion::new(s.phi(), false), TriplicityRegion::new(psi, false));
    let gamma = 0.5 * (a.gamma_check(alpha)?.max(b.gamma_check(alpha)?) + a.gamma_hat(alpha)?.min(b.gamma_hat(alpha)?));
    let small = s.subsolution_launch(alpha, gamma, Launch::Small, sg)?;
    let large = s.subsolution_launch(alpha, gamma, Launch::Large, sg)?;
    let root = solve_uniform(alpha * s.phi(), gamma)?.roots[1];
    let middle = s.newton_solve(alpha, gamma, &DensityField::constant(s.domain().clone(), root), 1e-12)?;
    println!("alpha = {alpha:.2}, gamma = {gamma:.4}");
    for (name, r) in [("small", &small), ("middle", &middle), ("large", &large)] {
        let st = p_stability(&s, alpha, gamma, &r.field.values, 50, 0)?;
        println!("{name:>6}: eta in [{:.4}, {:.4}], {:?}", r.field.min(), r.field.max(), st.classification);
    }
    Ok(())
}
