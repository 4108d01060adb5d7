//! Grand- and petit-canonical transitions in a ball (takes about a minute).
use hsdft::field::FieldSolver;
use hsdft::phase::{grand_canonical_transition, n_hat, petit_canonical_transition};
use hsdft::{EosModel, KernelSpec};

fn main() -> hsdft::Result<()> {
    let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 30.0, 512)?;
    let alpha = 31.0 / (4.0 * std::f64::consts::PI);
    let gc = grand_canonical_transition(&s, alpha, None, 16)?;
    println!("gamma_gl = {:.8}: N gas {:.2}, N liquid {:.2}", gc.gamma_gl, gc.gas.n(), gc.liquid.n());
    let (nh, _) = n_hat(&s, alpha)?;
    let pc = petit_canonical_transition(&s, alpha, Some((gc.gas.n(), nh)))?;
    println!("N_vd = {:.4}: gamma jump {:.5}, crossings {}", pc.n_vd, pc.delta_gamma, pc.rearrangement_crossings);
    Ok(())
}
