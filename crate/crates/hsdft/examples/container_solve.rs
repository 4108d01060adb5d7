//! Minimal and maximal solutions in a ball with their functionals.
use hsdft::field::FieldSolver;
use hsdft::functionals::evaluate;
use hsdft::{EosModel, KernelSpec};

fn main() -> hsdft::Result<()> {
    let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 15.0, 256)?;
    let alpha = 31.0 / (4.0 * std::f64::consts::PI);
    let gamma = -5.0;
    for rep in [s.minimal_solution(alpha, gamma)?, s.maximal_solution(alpha, gamma)?] {
        let f = evaluate(&s, alpha, gamma, &rep.field.values, true)?;
        println!(
            "{:?}: {} iterations, eta(0) = {:.5}, eta(R) = {:.5}, N = {:.3}, P = {:.5}, F = {:.5}",
            rep.branch, rep.iterations, rep.field.values[0], rep.field.values[rep.field.values.len() - 1], f.n, f.p, f.f
        );
    }
    Ok(())
}
