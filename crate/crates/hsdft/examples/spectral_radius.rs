//! Spectral radius of the attraction operator.
use hsdft::field::FieldSolver;
use hsdft::spectral::spectral_radius;
use hsdft::{EosModel, KernelSpec};

fn main() -> hsdft::Result<()> {
    for (name, spec, radius) in [("Newton", KernelSpec::newton(), 1.0), ("Yukawa", KernelSpec::yukawa(1.0), 20.0)] {
        let s = FieldSolver::new(EosModel::hard_sphere(), spec, radius, 256)?;
        let r = spectral_radius(&s.op, 100_000)?;
        println!(
            "{name} R={radius}: v = {:.6} in [{:.6}, {:.6}], {} iterations, decreasing eigenfield: {}",
            r.v_lambda, r.lower_bound, r.upper_bound, r.iterations, r.radially_decreasing
        );
    }
    Ok(())
}
