//! The same decohered channel evaluated through every interference route.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use qinterference::channels::{ErrorModel, FactoredChannel, PauliError, PauliLayer};
use qinterference::gates::{circuit_unitary, walsh_layer};
use qinterference::interference::{
    interference_factored, interference_kraus, interference_kraus_naive,
    interference_superoperator, superoperator_from_kraus,
};

fn main() -> qinterference::Result<()> {
    let n = 3;
    let w = Arc::new(circuit_unitary(&walsh_layer(&vec![FRAC_PI_4; n])?)?);
    for kind in [PauliError::BitFlip, PauliError::PhaseFlip] {
        for p in [0.0, 0.1, 0.5] {
            let layer = PauliLayer::new(n, ErrorModel::new(kind, p, vec![0, 2])?)?;
            let factored = FactoredChannel::new(Arc::clone(&w), layer)?;
            let kraus = factored.to_kraus()?;
            let gram = interference_kraus(&kraus)?.value;
            let naive = interference_kraus_naive(&kraus)?.value;
            let superop = interference_superoperator(&superoperator_from_kraus(&kraus)?)?.value;
            let fast = interference_factored(&factored)?.value;
            println!(
                "{kind} p={p:.1}: gram {gram:.9} naive {naive:.9} superop {superop:.9} factored {fast:.9}"
            );
        }
    }
    Ok(())
}
