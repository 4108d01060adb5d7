//! Screened Poisson residual of the Yukawa potential under grid refinement.
use hsdft::field::{boundary_values, pde_residual, FieldSolver};
use hsdft::{EosModel, KernelSpec};

fn main() -> hsdft::Result<()> {
    for n in [128, 256, 512] {
        let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 5.0, n)?;
        let alpha = 15.0 / s.phi();
        let sol = s.minimal_solution(alpha, -3.0)?;
        let (psi, integral) = boundary_values(&s, &sol)?;
        println!("n = {n}: residual {:.3e}, boundary {psi:.10} vs {integral:.10}", pde_residual(&s, &sol, n)?);
    }
    Ok(())
}
