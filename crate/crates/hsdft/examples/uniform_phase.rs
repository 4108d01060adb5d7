//! Uniform (algebraic) theory: roots, triplicity boundaries and coexistence.
use hsdft::uniform::{coexistence_gamma, gamma_boundaries, solve_uniform};

fn main() -> hsdft::Result<()> {
    for at in [25.0, 31.0, 50.0] {
        let (lo, hi) = gamma_boundaries(at, false)?;
        let mid = 0.5 * (lo + hi);
        println!("alpha tau = {at}: gamma in ({lo:.5}, {hi:.5}), coexistence {:.5}", coexistence_gamma(at)?);
        println!("  roots at gamma = {mid:.5}: {:?}", solve_uniform(at, mid)?.roots);
    }
    Ok(())
}
