//! Droplet criterion and a droplet solution at fixed particle number.
use hsdft::field::FieldSolver;
use hsdft::phase::{droplet_criterion, droplet_solve, droplet_trial, n_hat};
use hsdft::{EosModel, KernelSpec};

fn main() -> hsdft::Result<()> {
    let c = droplet_criterion(31.0)?;
    println!("criterion: rhs {:.4} < 31: {}, eta_M/eta_m = {:.3}", c.rhs, c.fires, c.volume_ratio);
    let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 30.0, 512)?;
    let alpha = 31.0 / (4.0 * std::f64::consts::PI);
    let (nh, vapor) = n_hat(&s, alpha)?;
    let trial = droplet_trial(s.domain(), nh, nh / c.eta_hat_big_m / s.domain().volume())?;
    let drop = droplet_solve(&s, alpha, nh, &trial)?;
    println!("N-hat = {nh:.2}: vapor gamma {:.5}, droplet gamma {:.5}", vapor.gamma, drop.gamma);
    println!("droplet core {:.4}, atmosphere {:.4}", drop.field.max(), drop.field.min());
    Ok(())
}
