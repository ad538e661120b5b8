//! Self-checks against known analytic results and qualitative behavior.
//!
//! Each check builds its own experiments, measures wall time against a
//! budget and returns a [`CriterionReport`]; nothing here panics on a
//! failed expectation.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{
    build_grover, build_shor, first_register_distribution, grover_success, shor_success,
    GroverSpec, ShorParams, ShorSpec,
};
use crate::channels::{KrausChannel, PauliError};
use crate::error::Result;
use crate::gates::{circuit_apply_basis, walsh_layer};
use crate::harness::{
    cue_baseline, haar_unitary, random_kraus_channel, render_csv, run_experiment,
    run_experiment_with_threads, Algorithm, ErrorFamily, ExperimentSpec, Grid, Outputs, ResultRow,
    SubsetPolicy,
};
use crate::interference::{
    interference_circuit, interference_kraus, interference_kraus_naive, interference_superoperator,
    interference_unitary, superoperator_from_kraus,
};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} ({:.2} s, budget {} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

/// Collects named conditions and their evidence.
struct Checks {
    ok: bool,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            ok: true,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, cond: bool, note: String) {
        self.ok &= cond;
        self.notes
            .push(if cond { note } else { format!("NOT {note}") });
    }
}

fn timed(
    id: u8,
    title: &'static str,
    budget_secs: u64,
    body: impl FnOnce(&mut Checks) -> Result<()>,
) -> CriterionReport {
    let start = Instant::now();
    let mut checks = Checks::new();
    let outcome = body(&mut checks);
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    if let Err(e) = outcome {
        checks.check(false, format!("ran without error ({e})"));
    }
    checks.check(elapsed <= budget, "within time budget".into());
    CriterionReport {
        id,
        title,
        passed: checks.ok,
        detail: checks.notes.join("; "),
        elapsed,
        budget,
    }
}

fn grover(n: usize, alpha: usize) -> Result<GroverSpec> {
    GroverSpec::new(n, alpha)
}

fn exact_thetas(spec: &GroverSpec) -> Vec<f64> {
    vec![FRAC_PI_4; spec.hadamard_count()]
}

fn experiment(algorithm: Algorithm, family: ErrorFamily, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        algorithm,
        family,
        average_over_alpha: false,
        master_seed: seed,
        outputs: Outputs::default(),
    }
}

fn decoherence(kind: PauliError, nf: Vec<usize>, policy: SubsetPolicy) -> ErrorFamily {
    ErrorFamily::Decoherence {
        kind,
        grid: Grid::default_probability(),
        nf,
        subset_policy: policy,
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

fn column(rows: &[ResultRow], f: impl Fn(&ResultRow) -> Option<f64>) -> Vec<f64> {
    rows.iter().map(|r| f(r).unwrap_or(f64::NAN)).collect()
}

pub fn criterion_1() -> CriterionReport {
    timed(1, "Walsh-Hadamard interference", 5, |c| {
        let mut worst: f64 = 0.0;
        for n in 1..=10 {
            let v = interference_circuit(&walsh_layer(&vec![FRAC_PI_4; n])?)?.value;
            worst = worst.max((v - ((1u64 << n) as f64 - 1.0)).abs());
        }
        c.check(
            worst <= 1e-9,
            format!("max |I(W_n) - (2^n-1)| = {worst:.3e} <= 1e-9 for n=1..10"),
        );
        Ok(())
    })
}

pub fn criterion_2(seed: u64) -> CriterionReport {
    timed(2, "cross-oracle equivalence", 30, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut sup_gap, mut naive_gap, mut unit_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for _ in 0..50 {
            let dim = 1usize << rng.random_range(1..=4);
            let count = rng.random_range(1..=8);
            let ch = random_kraus_channel(dim, count, &mut rng)?;
            let gram = interference_kraus(&ch)?.value;
            let naive = interference_kraus_naive(&ch)?.value;
            let sup = interference_superoperator(&superoperator_from_kraus(&ch)?)?.value;
            sup_gap = sup_gap.max((sup - gram).abs());
            naive_gap = naive_gap.max((naive - gram).abs());
            let u = haar_unitary(dim, &mut rng);
            let single = interference_kraus(&KrausChannel::unitary(u.clone())?)?.value;
            unit_gap = unit_gap.max((single - interference_unitary(&u)?.value).abs());
        }
        c.check(
            sup_gap <= 1e-9,
            format!("superoperator vs Kraus {sup_gap:.2e} <= 1e-9"),
        );
        c.check(
            naive_gap <= 1e-9,
            format!("Gram vs naive {naive_gap:.2e} <= 1e-9"),
        );
        c.check(
            unit_gap <= 1e-12,
            format!("single Kraus vs unitary {unit_gap:.2e} <= 1e-12"),
        );
        Ok(())
    })
}

pub fn criterion_3() -> CriterionReport {
    timed(3, "exact Grover", 120, |c| {
        let mut worst: f64 = 0.0;
        for n in 4..=8 {
            for alpha in 0..1usize << n {
                let spec = grover(n, alpha)?;
                let circuits = build_grover(&spec, &exact_thetas(&spec))?;
                let s = grover_success(&circuit_apply_basis(&circuits.full, 0)?, alpha)?;
                worst = worst.max((s - spec.exact_success()).abs());
            }
        }
        c.check(
            worst <= 1e-9,
            format!("max success deviation {worst:.2e} <= 1e-9 for n=4..8, all alpha"),
        );
        let spec = grover(4, 0)?;
        let au = interference_circuit(&build_grover(&spec, &exact_thetas(&spec))?.rest)?.value;
        c.check(
            (3.0..=4.5).contains(&au),
            format!("I_au(n=4, k=3) = {au:.6} in [3, 4.5]"),
        );
        let one = grover(4, 0)?.with_iterations(1);
        let first = interference_circuit(&build_grover(&one, &exact_thetas(&one))?.rest)?.value;
        let target = 8.0 - 24.0 / 16.0;
        c.check(
            ((first - target) / target).abs() <= 0.05,
            format!("I after one iteration = {first:.6} within 5% of {target}"),
        );
        Ok(())
    })
}

pub fn criterion_4() -> CriterionReport {
    timed(4, "systematic sweep shape", 600, |c| {
        let mut cases: Vec<(String, Algorithm)> = Vec::new();
        for n in 4..=6 {
            cases.push((format!("Grover n={n}"), Algorithm::Grover(grover(n, 0)?)));
        }
        cases.push(("Shor L=2".into(), Algorithm::Shor(ShorSpec::new(3, 2)?)));
        cases.push(("Shor L=3".into(), Algorithm::Shor(ShorSpec::new(7, 3)?)));
        let grid = Grid::default_theta();
        let centre = grid
            .values()
            .iter()
            .position(|&t| t == FRAC_PI_4)
            .expect("grid contains pi/4");
        for (name, alg) in cases {
            let mut spec = experiment(alg, ErrorFamily::Systematic { grid: grid.clone() }, 0);
            spec.average_over_alpha = matches!(alg, Algorithm::Grover(_));
            spec.outputs = "pa".parse()?;
            let rows = run_experiment(&spec)?;
            let s = column(&rows, |r| Some(r.success));
            let pa = column(&rows, |r| r.interference_pa);
            let (is, ip) = (argmax(&s), argmax(&pa));
            c.check(
                is == centre,
                format!("{name}: argmax S at index {is} (pi/4 is {centre})"),
            );
            c.check(
                ip == centre,
                format!(
                    "{name}: argmax I_pa at index {ip} (theta={:.4})",
                    grid.values()[ip]
                ),
            );
            let (first, last) = (pa[0], pa[pa.len() - 1]);
            c.check(
                first.abs() <= 1e-9 && last.abs() <= 1e-9,
                format!("{name}: I_pa(0) = {first:.1e}, I_pa(pi/2) = {last:.1e}"),
            );
        }
        Ok(())
    })
}

pub fn criterion_5() -> CriterionReport {
    timed(5, "Grover bit-flip immunity", 300, |c| {
        let spec = experiment(
            Algorithm::Grover(grover(4, 2)?),
            decoherence(PauliError::BitFlip, vec![1, 2, 3, 4], SubsetPolicy::Prefix),
            0,
        );
        let rows = run_experiment(&spec)?;
        let s0 = rows[0].success;
        let drift = rows
            .iter()
            .map(|r| (r.success - s0).abs())
            .fold(0.0, f64::max);
        c.check(
            drift <= 1e-9,
            format!("max |S(p) - S(0)| = {drift:.2e} <= 1e-9"),
        );
        let half = rows
            .iter()
            .find(|r| r.n_f == Some(4) && r.sweep_value == 0.5)
            .expect("p=0.5 on the grid");
        let pa = half.interference_pa.unwrap_or(f64::NAN);
        let au = half.interference_au.unwrap_or(f64::NAN);
        c.check(pa <= 1e-6, format!("I_pa(p=0.5, n_f=4) = {pa:.2e} <= 1e-6"));
        c.check(au > 0.1, format!("I_au(p=0.5, n_f=4) = {au:.4} > 0.1"));
        Ok(())
    })
}

pub fn criterion_6() -> CriterionReport {
    timed(6, "Grover phase-flip destruction", 300, |c| {
        let spec = experiment(
            Algorithm::Grover(grover(4, 2)?),
            decoherence(PauliError::PhaseFlip, vec![4], SubsetPolicy::Prefix),
            0,
        );
        let rows = run_experiment(&spec)?;
        let s_end = rows[rows.len() - 1].success;
        c.check(
            (s_end - 0.0025).abs() <= 0.001,
            format!("S(p=1) = {s_end:.5} within 0.0025 +- 0.001"),
        );
        c.check(s_end < 0.0625, format!("S(p=1) = {s_end:.5} < 0.0625"));
        let s: Vec<f64> = rows
            .iter()
            .filter(|r| r.sweep_value <= 0.5)
            .map(|r| r.success)
            .collect();
        let monotone = s.windows(2).all(|w| w[1] <= w[0]);
        c.check(
            monotone,
            format!("S non-increasing on p in [0, 0.5] ({} points)", s.len()),
        );
        Ok(())
    })
}

pub fn criterion_7() -> CriterionReport {
    timed(7, "exact Shor", 60, |c| {
        let spec = ShorSpec::new(3, 2)?;
        let circuits = build_shor(&spec, &ShorParams::exact(&spec))?;
        let probs = circuit_apply_basis(&circuits.full, 0)?.probabilities();
        let reg = first_register_distribution(&spec, &probs)?;
        let dev = reg
            .iter()
            .enumerate()
            .map(|(i, p)| (p - if i == 0 || i == 8 { 0.5 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        c.check(
            dev <= 1e-9,
            format!("register-1 distribution off by {dev:.2e} from 1/2 at 0 and 8"),
        );
        let selfs = shor_success(&probs, &probs)?;
        c.check(selfs == 1.0, format!("self-success = {selfs}"));
        let au2 = interference_circuit(&circuits.rest)?.value;
        let l3 = ShorSpec::new(7, 3)?;
        let au3 = interference_circuit(&build_shor(&l3, &ShorParams::exact(&l3))?.rest)?.value;
        c.check(
            au3 / au2 > 4.0,
            format!(
                "I_au(L=3)/I_au(L=2) = {au3:.4}/{au2:.4} = {:.3} > 4",
                au3 / au2
            ),
        );
        Ok(())
    })
}

pub fn criterion_8() -> CriterionReport {
    timed(8, "Shor bit-flip on first register", 1800, |c| {
        for spec in [ShorSpec::new(3, 2)?, ShorSpec::new(7, 3)?] {
            let e = experiment(
                Algorithm::Shor(spec),
                decoherence(PauliError::BitFlip, vec![1, 2, 3, 4], SubsetPolicy::All),
                0,
            );
            let rows = run_experiment(&e)?;
            let l = spec.l();
            let dev = rows
                .iter()
                .map(|r| (r.success - 1.0).abs())
                .fold(0.0, f64::max);
            c.check(dev <= 1e-9, format!("L={l}: max |S - 1| = {dev:.2e}"));
            for nf in 1..=4 {
                let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.n_f == Some(nf)).collect();
                let min_pa = sel
                    .iter()
                    .filter_map(|r| r.interference_pa)
                    .fold(f64::INFINITY, f64::min);
                let min_au = sel
                    .iter()
                    .filter_map(|r| r.interference_au)
                    .fold(f64::INFINITY, f64::min);
                c.check(
                    min_pa > 0.0 && min_au > 0.0,
                    format!("L={l} n_f={nf}: min I_pa = {min_pa:.4}, min I_au = {min_au:.4} > 0"),
                );
            }
        }
        Ok(())
    })
}

pub fn criterion_9() -> CriterionReport {
    timed(9, "Shor phase-flip", 600, |c| {
        let e = experiment(
            Algorithm::Shor(ShorSpec::new(3, 2)?),
            decoherence(PauliError::PhaseFlip, vec![4], SubsetPolicy::All),
            0,
        );
        let rows = run_experiment(&e)?;
        let half = rows
            .iter()
            .find(|r| r.sweep_value == 0.5)
            .expect("p=0.5 on the grid");
        let au = half.interference_au.unwrap_or(f64::NAN);
        let pa = half.interference_pa.unwrap_or(f64::NAN);
        c.check(au <= 1e-6, format!("I_au(p=0.5) = {au:.2e} <= 1e-6"));
        c.check(pa > 1e-4, format!("I_pa(p=0.5) = {pa:.4} > 1e-4"));
        let s: Vec<f64> = rows
            .iter()
            .filter(|r| r.sweep_value <= 0.5)
            .map(|r| r.success)
            .collect();
        let strict = s.windows(2).all(|w| w[1] < w[0]);
        c.check(
            strict,
            format!(
                "S strictly decreasing on p in [0, 0.5]: {:.4} -> {:.4}",
                s[0],
                s[s.len() - 1]
            ),
        );
        Ok(())
    })
}

pub fn criterion_10(seed: u64) -> CriterionReport {
    timed(10, "random-error anticorrelation", 900, |c| {
        let e = experiment(
            Algorithm::Grover(grover(5, 2)?),
            ErrorFamily::Random {
                grid: Grid::new(vec![0.0, 2.0])?,
                realizations: 100,
            },
            seed,
        );
        let rows = run_experiment(&e)?;
        let n = 32.0;
        let au = rows[1].interference_au.unwrap_or(f64::NAN);
        c.check(
            au > 0.5 * n,
            format!("mean I_au(eps=2) = {au:.3} > {}", 0.5 * n),
        );
        let (s0, s2) = (rows[0].success, rows[1].success);
        c.check(
            s2 < 0.5 * s0,
            format!("mean S(eps=2) = {s2:.4} < 0.5 * {s0:.4}"),
        );
        Ok(())
    })
}

pub fn criterion_11(seed: u64) -> CriterionReport {
    timed(11, "CUE baseline", 60, |c| {
        let stats = cue_baseline(6, 100, seed)?;
        c.check(
            (60.0..=63.0).contains(&stats.mean),
            format!(
                "mean I = {:.4} (sd {:.4}) in [60, 63]",
                stats.mean, stats.stddev
            ),
        );
        Ok(())
    })
}

fn max_row_gap(a: &[ResultRow], b: &[ResultRow]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let vals = |r: &ResultRow| {
        [
            Some(r.sweep_value),
            r.interference_pa,
            r.interference_au,
            Some(r.success),
            Some(r.success_stderr),
        ]
    };
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| vals(x).into_iter().zip(vals(y)))
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

pub fn criterion_12(seed: u64) -> CriterionReport {
    timed(12, "determinism", 600, |c| {
        let specs = [
            (
                "Grover random",
                experiment(
                    Algorithm::Grover(grover(4, 2)?),
                    ErrorFamily::Random {
                        grid: Grid::linspace(0.0, 3.0, 4)?,
                        realizations: 50,
                    },
                    seed,
                ),
            ),
            (
                "Shor random",
                experiment(
                    Algorithm::Shor(ShorSpec::new(3, 2)?),
                    ErrorFamily::Random {
                        grid: Grid::linspace(0.0, 2.0, 3)?,
                        realizations: 20,
                    },
                    seed,
                ),
            ),
            (
                "Shor decoherence",
                experiment(
                    Algorithm::Shor(ShorSpec::new(3, 2)?),
                    decoherence(PauliError::PhaseFlip, vec![2, 3], SubsetPolicy::All),
                    seed,
                ),
            ),
        ];
        for (name, spec) in specs {
            let first = run_experiment_with_threads(&spec, 2)?;
            let again = run_experiment_with_threads(&spec, 2)?;
            c.check(
                render_csv(&first)? == render_csv(&again)?,
                format!("{name}: byte-identical CSV at fixed parallelism"),
            );
            let mut gap: f64 = 0.0;
            for threads in [1, 8] {
                gap = gap.max(max_row_gap(
                    &first,
                    &run_experiment_with_threads(&spec, threads)?,
                ));
            }
            c.check(
                gap <= 1e-12,
                format!("{name}: max gap across 1/2/8 threads {gap:.1e}"),
            );
        }
        Ok(())
    })
}

/// Every criterion in order.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    vec![
        criterion_1(),
        criterion_2(seed),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(seed),
        criterion_11(seed),
        criterion_12(seed),
    ]
}
