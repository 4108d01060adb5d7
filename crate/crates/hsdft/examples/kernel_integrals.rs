//! Closed-form ball potentials against direct quadrature.
use hsdft::KernelSpec;

fn main() {
    let radius = 3.0;
    for (name, k) in [("van der Waals", KernelSpec::van_der_waals(1.0)), ("Yukawa", KernelSpec::yukawa(1.0)), ("Newton", KernelSpec::newton())] {
        println!("{name}: Phi = {:.8}, double integral = {:.8}", k.phi_lambda(radius), k.ball_double_integral(radius));
        for r in [0.0, 1.5, 3.0, 4.5] {
            println!("  r = {r}: closed {:.12}  quadrature {:.12}", k.ball_potential(r, radius), k.ball_potential_quadrature(r, radius));
        }
    }
}
