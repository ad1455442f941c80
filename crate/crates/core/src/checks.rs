//! Seeded invariant suites run by `entmeas verify`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dilation::verify_dilation_with_tol;
use crate::extops::{extend, extended_entangling, extended_entangling_abd};
use crate::infomeasures::coherent_information_measurement;
use crate::qmat::{gram_factor, hermitian_eig, is_psd, kron, ComplexMatrix, DensityMatrix, TOL_PSD};
use crate::sampling;
use crate::superop::{dephasing, entangling_measurement, projective, EntanglementMatrix};

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    /// Threshold for numerical deviations.
    pub tol: f64,
    /// Replace the sampled entanglement matrices in the CP suite with
    /// non-positive ones. Negative control for the harness itself.
    pub corrupt_r: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            tol: crate::qmat::TOL_EIG,
            corrupt_r: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub pass: bool,
    pub trials: usize,
    pub max_dev: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub all_pass: bool,
    pub checks: BTreeMap<String, SuiteResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, r)| !r.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Accumulates a worst deviation and the first failure message.
struct Tally {
    tol: f64,
    trials: usize,
    max_dev: f64,
    detail: Option<String>,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            trials: 0,
            max_dev: 0.0,
            detail: None,
        }
    }

    fn dev(&mut self, dev: f64, what: impl FnOnce() -> String) {
        self.max_dev = self.max_dev.max(dev);
        if (dev.is_nan() || dev > self.tol) && self.detail.is_none() {
            self.detail = Some(format!("{} (deviation {dev:e})", what()));
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.detail.is_none() {
            self.detail = Some(what());
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            pass: self.detail.is_none(),
            trials: self.trials,
            max_dev: self.max_dev,
            detail: self.detail,
        }
    }
}

type Suite = fn(&mut ChaCha8Rng, usize, &SuiteOptions) -> SuiteResult;

const SUITES: &[(&str, Suite)] = &[
    ("kron_algebra", kron_algebra),
    ("partial_trace", partial_trace_consistency),
    ("eig_reconstruction", eig_reconstruction),
    ("gram_factor", gram_factorization),
    ("outputs_valid", outputs_valid),
    ("dephasing_cp_iff_psd", dephasing_cp_iff_psd),
    ("entangling_cp", entangling_cp),
    ("marginal_decoherence", marginal_decoherence),
    ("apparatus_invariance", apparatus_invariance),
    ("ext_trace_preserving", ext_trace_preserving),
    ("dilation_d2", dilation_d2),
    ("dilation_d3", dilation_d3),
    ("coherent_information", coherent_information),
];

/// Runs every suite with its own generator derived from `seed`.
pub fn run_suites(seed: u64, trials: usize, options: &SuiteOptions) -> VerifyReport {
    let mut checks = BTreeMap::new();
    for (i, (name, suite)) in SUITES.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        checks.insert((*name).to_owned(), suite(&mut rng, trials, options));
    }
    VerifyReport {
        seed,
        trials,
        all_pass: checks.values().all(|r| r.pass),
        checks,
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(rows, cols, data).expect("finite")
}

fn kron_algebra(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let (a, b, c) = (random_matrix(rng, 2, 3), random_matrix(rng, 3, 2), random_matrix(rng, 2, 2));
        t.dev(kron(&kron(&a, &b), &c).max_abs_diff(&kron(&a, &kron(&b, &c))), || "associativity".into());
        let b2 = random_matrix(rng, 3, 2);
        let s = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let lhs = kron(&a, &(&b + &b2.scale(s)));
        let rhs = &kron(&a, &b) + &kron(&a, &b2).scale(s);
        t.dev(lhs.max_abs_diff(&rhs), || "bilinearity".into());
    }
    t.finish()
}

fn partial_trace_consistency(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let m = sampling::mixed_state(rng, 12);
        let rho = DensityMatrix::new(m.into_matrix(), vec![2, 3, 2]).expect("layout matches");
        // Tracing A then B equals tracing {A, B} at once.
        let stepwise = rho.partial_trace(&[1, 2]).and_then(|x| x.partial_trace(&[1]));
        let direct = rho.partial_trace(&[2]);
        match (stepwise, direct) {
            (Ok(s), Ok(d)) => {
                t.dev(s.matrix().max_abs_diff(d.matrix()), || "stepwise vs direct trace".into());
                t.dev((d.matrix().trace().re - 1.0).abs(), || "trace preservation".into());
            }
            _ => t.require(false, || "partial trace failed".into()),
        }
    }
    t.finish()
}

fn eig_reconstruction(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(1..=16);
        let h = sampling::hermitian(rng, d);
        match hermitian_eig(&h) {
            Ok(e) => {
                t.dev(e.reconstruct().max_abs_diff(&h), || format!("reconstruction at d = {d}"));
                t.dev(e.vectors.unitarity_error(), || format!("eigenvector orthonormality at d = {d}"));
                t.require(e.values.windows(2).all(|w| w[0] >= w[1]), || "eigenvalues not descending".into());
            }
            Err(e) => t.require(false, || e.to_string()),
        }
    }
    t.finish()
}

fn gram_factorization(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(1..=4);
        let r = sampling::psd_unit_diagonal(rng, d);
        match gram_factor(r.matrix()) {
            Ok(v) => {
                for i in 0..d {
                    for j in 0..d {
                        t.dev((v[i].inner(&v[j]) - r.matrix()[(i, j)]).norm(), || format!("Gram entry ({i}, {j})"));
                    }
                }
            }
            Err(e) => t.require(false, || e.to_string()),
        }
    }
    t.finish()
}

fn outputs_valid(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(2..=3);
        let r = sampling::psd_unit_diagonal(rng, d);
        let rho_a = sampling::mixed_state(rng, d);
        let rho_ab = rho_a.tensor(&sampling::mixed_state(rng, d));
        let results = [
            projective(d).apply(&rho_a).err(),
            dephasing(&r).apply(&rho_a).err(),
            entangling_measurement(&r).apply(&rho_ab).err(),
            extended_entangling(&r).apply(&rho_a).err(),
            extended_entangling_abd(&r).and_then(|e| e.apply(&rho_a)).err(),
        ];
        for err in results.into_iter().flatten() {
            t.require(false, || err.to_string());
        }
    }
    t.finish()
}

fn dephasing_cp_iff_psd(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(2..=3);
        let r = sampling::hermitian_unit_diagonal(rng, d, 1.2);
        let psd = is_psd(r.matrix(), TOL_PSD).unwrap_or(false);
        let cp = dephasing(&r).is_completely_positive(TOL_PSD);
        t.require(psd == cp, || format!("dephasing CP = {cp} but R PSD = {psd}"));
    }
    t.finish()
}

fn entangling_cp(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(2..=3);
        let r = if o.corrupt_r {
            sampling::non_psd_unit_diagonal(rng, d, 1e-3)
        } else {
            sampling::psd_unit_diagonal(rng, d)
        };
        let m = entangling_measurement(&r);
        t.require(m.is_completely_positive(TOL_PSD), || "entangling measurement is not completely positive".into());
        t.require(m.is_trace_preserving(o.tol), || "entangling measurement is not trace preserving".into());
    }
    t.finish()
}

fn marginal_decoherence(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(2..=3);
        let r = sampling::psd_unit_diagonal(rng, d);
        let rho_a = sampling::mixed_state(rng, d);
        let input = rho_a.tensor(&sampling::mixed_state(rng, d));
        let expected = projective(d).apply(&rho_a);
        let out = entangling_measurement(&r).apply(&input);
        match (out, expected) {
            (Ok(out), Ok(expected)) => {
                let a = out.partial_trace(&[0]).expect("valid keep");
                let b = out.partial_trace(&[1]).expect("valid keep");
                t.dev(a.matrix().max_abs_diff(expected.matrix()), || "object marginal".into());
                t.dev(b.matrix().max_abs_diff(expected.matrix()), || "apparatus marginal".into());
                for i in 0..d {
                    for j in 0..d {
                        if i != j {
                            t.dev(out.matrix()[(i * d + j, i * d + j)].norm(), || format!("cross population ({i}, {j})"));
                        }
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => t.require(false, || e.to_string()),
        }
    }
    t.finish()
}

fn apparatus_invariance(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(2..=3);
        let m = entangling_measurement(&sampling::psd_unit_diagonal(rng, d));
        let reference = extend(&m, &sampling::mixed_state(rng, d)).expect("dimensions agree");
        for _ in 0..10 {
            let other = extend(&m, &sampling::mixed_state(rng, d)).expect("dimensions agree");
            t.dev(other.max_deviation(&reference), || "extension depends on apparatus state".into());
        }
    }
    t.finish()
}

fn ext_trace_preserving(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(2..=3);
        let r = sampling::psd_unit_diagonal(rng, d);
        let rho_a = sampling::mixed_state(rng, d);
        match extended_entangling_abd(&r).and_then(|e| e.apply_operator(rho_a.matrix())) {
            Ok(out) => t.dev((out.trace() - Complex64::new(1.0, 0.0)).norm(), || "trace".into()),
            Err(e) => t.require(false, || e.to_string()),
        }
    }
    t.finish()
}

fn dilation(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions, d: usize) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let r = sampling::psd_unit_diagonal(rng, d);
        let report = verify_dilation_with_tol(&r, o.tol);
        t.dev(report.max_dev(), || format!("dilation checks failed: {:?}", report.failures()));
    }
    t.finish()
}

fn dilation_d2(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    dilation(rng, trials, o, 2)
}

fn dilation_d3(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    dilation(rng, trials, o, 3)
}

fn coherent_information(rng: &mut ChaCha8Rng, trials: usize, o: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(o.tol);
    for _ in 0..trials {
        t.trials += 1;
        let d = rng.gen_range(2..=3);
        let r: EntanglementMatrix = sampling::psd_unit_diagonal(rng, d);
        let rho_a = sampling::pure_state(rng, d);
        match coherent_information_measurement(&rho_a, &r) {
            Ok(rep) => {
                t.dev((-rep.i_c_formula).max(0.0), || "negative coherent information".into());
                t.dev((rep.i_c_formula - rep.i_c_general).abs(), || "formula and general routes disagree".into());
                t.dev((rep.s_d - rep.s_red).max(0.0), || "microstate entropy exceeds measured entropy".into());
            }
            Err(e) => t.require(false, || e.to_string()),
        }
    }
    t.finish()
}
