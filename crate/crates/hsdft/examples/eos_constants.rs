//! Constants of the hard-sphere equation of state.
use hsdft::eos::{self, EosModel};

fn main() -> hsdft::Result<()> {
    let (eta_wr, gamma_wr, k) = eos::find_inflection();
    println!("inflection eta = {eta_wr:.6}, gamma = {gamma_wr:.6}, K = {k:.6}");
    println!("gamma_fs = {:.9}", eos::gamma_fs());
    let hs = EosModel::hard_sphere();
    for gamma in [-5.0, 0.0, 10.0, 15.0, 20.0] {
        println!("gamma {gamma:>5}: eta = {:.6}, p = {:.6}", hs.density(gamma)?, hs.wp(gamma)?);
    }
    Ok(())
}
