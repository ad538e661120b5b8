//! Interference of small circuits: permutations, phases and Hadamard layers.

use std::f64::consts::FRAC_PI_4;

use qinterference::gates::{walsh_layer, Circuit, Gate};
use qinterference::interference::interference_circuit;

fn main() -> qinterference::Result<()> {
    let swap_like = Circuit::new(2)?
        .with(Gate::pauli_x(0))?
        .with(Gate::pauli_z(1))?;
    report("X on 0, Z on 1", &swap_like)?;

    for n in 1..=5 {
        report(
            &format!("Walsh layer on {n} qubits"),
            &walsh_layer(&vec![FRAC_PI_4; n])?,
        )?;
    }

    for theta in [0.0, 0.3, FRAC_PI_4, 1.2] {
        let c = Circuit::new(1)?.with(Gate::perturbed_hadamard(theta, 0))?;
        report(&format!("rotated Hadamard, theta = {theta:.3}"), &c)?;
    }
    Ok(())
}

fn report(label: &str, c: &Circuit) -> qinterference::Result<()> {
    let r = interference_circuit(c)?;
    println!(
        "{label:<32} I = {:>10.6}  ibits = {:>8.4}",
        r.value, r.ibits
    );
    Ok(())
}
