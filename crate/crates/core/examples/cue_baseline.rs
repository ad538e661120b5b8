//! Mean interference of Haar-random unitaries, the reference for a generic circuit.

use qinterference::harness::cue_baseline;

fn main() -> qinterference::Result<()> {
    for n in 1..=5 {
        let s = cue_baseline(n, 200, 11)?;
        println!(
            "n={} samples={} mean={:.4} stddev={:.4} (max {})",
            s.n,
            s.samples,
            s.mean,
            s.stddev,
            (1usize << n) - 1
        );
    }
    Ok(())
}
