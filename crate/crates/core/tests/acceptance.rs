//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero when any criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p shadowqpt --test acceptance -- 4 10`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shadowqpt::acquire::{
    acquire_ancilla, acquire_ancilla_exhaustive, acquire_two_sided, exhaustive_labels, Block, MeasurementRecord, PairingPlan,
    Scheme, Source,
};
use shadowqpt::channels::{ghz_process, propagator};
use shadowqpt::gates::rotation::{rotation_unitary, RotationLabel};
use shadowqpt::hamlearn::{
    bound_hamlearn, default_probes, disorder_instance, disorder_sweep, renormalized_coefficients, summarize, HamLearnResult,
};
use shadowqpt::postprocess::{
    cp_project, mle_from_effects, mle_reconstruct, overlap_pipeline, purify, tp_project, trace_out_output, Effect, MleConfig,
    MleInit, OverlapMode,
};
use shadowqpt::qmat::{eig_hermitian, kron, trace_distance, CMatrix, C64, ONE, ZERO};
use shadowqpt::shadows::{
    bound_overlap, bound_reduced, estimate_choi, estimate_reduced, snapshot, EstimatorConfig, OverlapScheme, ReducedScheme,
};
use shadowqpt::ChoiMatrix;

type Check = fn() -> (bool, String);

fn main() {
    let criteria: [(usize, &str, Check); 10] = [
        (1, "unbiasedness brute force", c1_unbiased),
        (2, "scheme equivalence", c2_scheme_equivalence),
        (3, "convergence rate", c3_convergence),
        (4, "projection suite", c4_projections),
        (5, "purification efficacy", c5_purification),
        (6, "maximum likelihood", c6_mle),
        (7, "overlap presets", c7_overlap),
        (8, "reduced processes", c8_reduced),
        (9, "hamiltonian learning", c9_hamlearn),
        (10, "bound calculators", c10_bounds),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {name}: {verdict} ({detail}) [{:.1}s]", start.elapsed().as_secs_f64());
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

// ---------- helpers ----------

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mat(rows: &[[C64; 2]; 2]) -> CMatrix {
    CMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn pauli_x() -> CMatrix {
    mat(&[[ZERO, ONE], [ONE, ZERO]])
}

fn ry(theta: f64) -> CMatrix {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    mat(&[[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]])
}

fn rx(theta: f64) -> CMatrix {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    mat(&[[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]])
}

fn kron_list(ms: &[CMatrix]) -> CMatrix {
    ms.iter().skip(1).fold(ms[0].clone(), |acc, m| kron(&acc, m))
}

fn basis(d: usize, k: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d];
    v[k] = ONE;
    v
}

/// `Σ_ij |i⟩⟨j| ⊗ U|i⟩⟨j|U†` entry by entry.
fn choi_oracle(u: &CMatrix) -> CMatrix {
    let d = u.dim();
    CMatrix::from_fn(d * d, |r, s| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (s / d, s % d);
        u[(a, i)] * u[(b, j)].conj()
    })
}

fn unnorm(n: usize, m: CMatrix) -> ChoiMatrix {
    ChoiMatrix::unnormalized(n, m).unwrap()
}

fn sandwich(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u.matmul(rho).unwrap().matmul(&u.adjoint()).unwrap()
}

fn bits(b: usize, width: usize) -> String {
    (0..width).map(|q| if (b >> (width - 1 - q)) & 1 == 1 { '1' } else { '0' }).collect()
}

fn record(scheme: Scheme, n: usize, blocks: Vec<Block>, outcome: String) -> MeasurementRecord {
    MeasurementRecord { scheme, n, index: 0, blocks, outcomes: vec![outcome], seed: None, source: Source::Ingested }
}

/// Exact `E[snapshot]` of the single-qubit ancilla scheme with Pauli-6 settings.
fn ancilla_expectation(lambda: &CMatrix) -> CMatrix {
    let rho = lambda.scale_real(0.5);
    let mut acc = CMatrix::zeros(4);
    for l0 in RotationLabel::MEASURE {
        for l1 in RotationLabel::MEASURE {
            let u = kron(&l0.matrix(), &l1.matrix());
            let out = sandwich(&u, &rho);
            for b in 0..4 {
                let p = out[(b, b)].re / 9.0;
                let rec = record(Scheme::Ancilla, 1, vec![Block::rotation(vec![0, 1], vec![l0, l1])], bits(b, 2));
                snapshot(&rec, 0).unwrap().accumulate(&mut acc, p);
            }
        }
    }
    acc
}

/// Exact `E[snapshot]` of the single-qubit two-sided scheme for the unitary `v`.
fn two_sided_expectation(v: &CMatrix) -> CMatrix {
    let mut acc = CMatrix::zeros(4);
    for left in RotationLabel::ALL {
        let psi = left.matrix().adjoint().apply(&basis(2, 0)).unwrap();
        let evolved = sandwich(v, &CMatrix::projector(&psi));
        for right in RotationLabel::MEASURE {
            let out = sandwich(&right.matrix(), &evolved);
            for b in 0..2 {
                let p = out[(b, b)].re / 18.0;
                let blocks = vec![Block::rotation(vec![0], vec![left]), Block::rotation(vec![1], vec![right])];
                let rec = record(Scheme::TwoSided, 1, blocks, bits(b, 1));
                snapshot(&rec, 0).unwrap().accumulate(&mut acc, p);
            }
        }
    }
    acc
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    CMatrix::from_fn(dim, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    eig_hermitian(m).unwrap().values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Nearest PSD matrix of trace `t`: shift the spectrum by the `μ` with `Σ max(λ - μ, 0) = t`.
fn kkt_cp_oracle(h: &CMatrix, t: f64) -> CMatrix {
    let dm = nalgebra::DMatrix::from_fn(h.dim(), h.dim(), |i, j| h[(i, j)]);
    let eig = dm.symmetric_eigen();
    let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mass = |mu: f64| lam.iter().map(|l| (l - mu).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (lam.iter().copied().fold(f64::INFINITY, f64::min) - t, lam.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let d = h.dim();
    CMatrix::from_fn(d, |i, j| {
        (0..d).map(|k| eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)].conj() * (lam[k] - mu).max(0.0)).sum()
    })
}

/// Least-squares solution of `min ‖x - x₀‖` subject to `tr_out X = I`, via the normal equations.
fn kkt_tp_oracle(l: &CMatrix, n: usize) -> CMatrix {
    use nalgebra::{DMatrix, DVector};
    let d = 1usize << n;
    let dim = d * d;
    let rows = d * d;
    let mut a = DMatrix::<C64>::zeros(rows, dim * dim);
    for i in 0..d {
        for j in 0..d {
            for o in 0..d {
                a[(i * d + j, (i * d + o) * dim + (j * d + o))] = ONE;
            }
        }
    }
    let x0 = DVector::from_fn(dim * dim, |k, _| l[(k / dim, k % dim)]);
    let b = DVector::from_fn(rows, |k, _| if k / d == k % d { ONE } else { ZERO });
    let aat = &a * a.adjoint();
    let y = aat.lu().solve(&(&a * &x0 - b)).unwrap();
    let x = x0 - a.adjoint() * y;
    CMatrix::from_fn(dim, |i, j| x[i * dim + j])
}

/// Reduced Choi matrix by direct summation over the traced bits.
fn reduced_oracle(l: &CMatrix, n: usize, sub: &[usize]) -> CMatrix {
    let k = sub.len();
    let keep: Vec<usize> = sub.iter().copied().chain(sub.iter().map(|q| q + n)).collect();
    let rest: Vec<usize> = (0..2 * n).filter(|w| !keep.contains(w)).collect();
    let place = |wires: &[usize], value: usize| -> usize {
        let w = wires.len();
        wires.iter().enumerate().map(|(i, &q)| ((value >> (w - 1 - i)) & 1) << (2 * n - 1 - q)).sum()
    };
    let dk = 1usize << (2 * k);
    let scale = 1.0 / (1u64 << (n - k)) as f64;
    CMatrix::from_fn(dk, |a, b| {
        let (ia, ib) = (place(&keep, a), place(&keep, b));
        (0..1usize << rest.len()).map(|r| l[(ia + place(&rest, r), ib + place(&rest, r))]).sum::<C64>() * scale
    })
}

fn ghz_unitary(n: usize) -> CMatrix {
    ghz_process(n).unwrap().resolve().unwrap().0
}

// ---------- criteria ----------

fn c1_unbiased() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for v in [CMatrix::identity(2), pauli_x()] {
        let exact = choi_oracle(&v);
        worst = worst.max(ancilla_expectation(&exact).max_abs_diff(&exact));
        worst = worst.max(two_sided_expectation(&v).max_abs_diff(&exact));
    }
    (worst < 1e-10, format!("max entry error {worst:.2e}, tol 1e-10"))
}

fn bootstrap_se(records: &[MeasurementRecord], est: &ChoiMatrix, resamples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sq = 0.0;
    for _ in 0..resamples {
        let sample: Vec<MeasurementRecord> =
            (0..records.len()).map(|_| records[rng.random_range(0..records.len())].clone()).collect();
        let b = estimate_choi(&sample, &EstimatorConfig::Mean).unwrap();
        sq += trace_distance(&b, est).unwrap().powi(2);
    }
    (sq / resamples as f64).sqrt()
}

fn c2_scheme_equivalence() -> (bool, String) {
    let h = mat(&[[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]]).scale_real(1.0 / 2f64.sqrt());
    let mut brute: f64 = 0.0;
    for v in [CMatrix::identity(2), pauli_x(), h.matmul(&rx(0.3)).unwrap()] {
        let a = ancilla_expectation(&choi_oracle(&v));
        let t = two_sided_expectation(&v);
        brute = brute.max(a.max_abs_diff(&t));
    }
    let spec = ghz_process(2).unwrap();
    let shots = 20_000;
    let ra = acquire_ancilla(&spec, &PairingPlan::Pauli, shots, 1, 101).unwrap();
    let rt = acquire_two_sided(&spec, &PairingPlan::Pauli, shots, 1, 202).unwrap();
    let ea = estimate_choi(&ra, &EstimatorConfig::Mean).unwrap();
    let et = estimate_choi(&rt, &EstimatorConfig::Mean).unwrap();
    let td = trace_distance(&ea, &et).unwrap();
    let se = (bootstrap_se(&ra, &ea, 40, 1).powi(2) + bootstrap_se(&rt, &et, 40, 2).powi(2)).sqrt();
    let pass = brute < 1e-10 && td < 3.0 * se;
    (pass, format!("n=1 brute diff {brute:.2e}; n=2 distance {td:.4} vs 3 x SE {:.4}", 3.0 * se))
}

fn c3_convergence() -> (bool, String) {
    let spec = ghz_process(2).unwrap();
    let exact = spec.choi().unwrap();
    let ns = [1_000usize, 3_162, 10_000, 31_623, 100_000];
    let seeds = 4u64;
    let tds: Vec<f64> = ns
        .iter()
        .map(|&n| {
            (0..seeds)
                .map(|s| {
                    let recs = acquire_ancilla(&spec, &PairingPlan::Pauli, n, 1, 1000 + s).unwrap();
                    trace_distance(&estimate_choi(&recs, &EstimatorConfig::Mean).unwrap(), &exact).unwrap()
                })
                .sum::<f64>()
                / seeds as f64
        })
        .collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let s = slope(&xs, &tds);
    ((s + 0.5).abs() <= 0.1, format!("slope {s:.3}, target -0.5 +/- 0.1"))
}

fn c4_projections() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let (mut psd, mut tr_err, mut idem, mut tp_err, mut tp_idem, mut pur_err): (f64, f64, f64, f64, f64, f64) =
        (f64::INFINITY, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..500 {
        let n = if i < 250 { 1 } else { 2 };
        let d = 1usize << (2 * n);
        let mut h = random_hermitian(d, &mut rng);
        let shift = ((1u64 << n) as f64 - h.trace().re) / d as f64;
        for k in 0..d {
            h[(k, k)] += c(shift, 0.0);
        }
        let l = unnorm(n, h);
        let p = cp_project(&l).unwrap();
        psd = psd.min(min_eigenvalue(p.matrix()));
        tr_err = tr_err.max((p.trace() - l.trace()).abs());
        idem = idem.max(cp_project(&p).unwrap().matrix().max_abs_diff(p.matrix()));
        let t = tp_project(&l).unwrap();
        tp_err = tp_err.max(trace_out_output(&t).unwrap().max_abs_diff(&CMatrix::identity(1 << n)));
        tp_idem = tp_idem.max(tp_project(&t).unwrap().matrix().max_abs_diff(t.matrix()));
        let pu = purify(&l).unwrap();
        pur_err = pur_err.max((shadowqpt::qmat::purity(&pu) - 1.0).abs());
    }
    let mut kkt: f64 = 0.0;
    for _ in 0..100 {
        let h = random_hermitian(4, &mut rng);
        let t = 2.0;
        let mut shifted = h.clone();
        let s = (t - h.trace().re) / 4.0;
        for k in 0..4 {
            shifted[(k, k)] += c(s, 0.0);
        }
        let ours = cp_project(&unnorm(1, shifted.clone())).unwrap();
        kkt = kkt.max((ours.matrix() - &kkt_cp_oracle(&shifted, t)).frobenius_norm());
    }
    let mut tp_kkt: f64 = 0.0;
    for _ in 0..10 {
        let h = random_hermitian(16, &mut rng);
        let ours = tp_project(&unnorm(2, h.clone())).unwrap();
        tp_kkt = tp_kkt.max(ours.matrix().max_abs_diff(&kkt_tp_oracle(&h, 2)));
    }
    let pass = psd >= -1e-10 && tr_err < 1e-10 && idem < 1e-10 && kkt < 1e-6 && tp_err < 1e-10 && tp_idem < 1e-10 && tp_kkt < 1e-10 && pur_err < 1e-10;
    (
        pass,
        format!(
            "cp: min eig {psd:.1e}, trace {tr_err:.1e}, idempotence {idem:.1e}, KKT {kkt:.1e}; tp: tr_out {tp_err:.1e}, idempotence {tp_idem:.1e}, KKT {tp_kkt:.1e}; purity {pur_err:.1e}"
        ),
    )
}

fn c5_purification() -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2, 3] {
        let ideal = unnorm(n, choi_oracle(&ghz_unitary(n)));
        let spec = ghz_process(n).unwrap().depolarized(0.1);
        let recs = acquire_ancilla(&spec, &PairingPlan::default_mixed(n), 1024, 50, 500 + n as u64).unwrap();
        let raw = estimate_choi(&recs, &EstimatorConfig::Mean).unwrap();
        let td_raw = trace_distance(&raw, &ideal).unwrap();
        let td_pur = trace_distance(&purify(&raw).unwrap(), &ideal).unwrap();
        pass &= td_pur < td_raw && td_pur < 0.05;
        parts.push(format!("n={n}: raw {td_raw:.4}, purified {td_pur:.4}"));
    }
    (pass, parts.join("; "))
}

fn c6_mle() -> (bool, String) {
    let u = ghz_unitary(2);
    let truth = choi_oracle(&u).scale_real(0.25);
    let mut effects = Vec::new();
    for i in 0..81 {
        let r = rotation_unitary(&exhaustive_labels(i, 4));
        let out = sandwich(&r, &truth);
        let rd = r.adjoint();
        for b in 0..16 {
            let p = out[(b, b)].re;
            if p > 1e-14 {
                effects.push(Effect { vector: rd.apply(&basis(16, b)).unwrap(), frequency: p / 81.0 });
            }
        }
    }
    let cfg = MleConfig { init: MleInit::MaximallyMixed, max_iter: 20_000, min_iter: 100, tol: 1e-12 };
    let (rho, _) = mle_from_effects(&effects, 16, &cfg).unwrap();
    let fixed = rho.max_abs_diff(&truth);

    let recs = acquire_ancilla_exhaustive(&ghz_process(2).unwrap(), 51_200, 66).unwrap();
    let (_, report) = mle_reconstruct(&recs, &MleConfig::default()).unwrap();
    let ll = &report.log_likelihood;
    let monotone = ll.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs());
    let iters = report.iterations.unwrap_or(usize::MAX);
    let converged = report.converged == Some(true) && iters <= 500;
    (
        fixed < 1e-6 && monotone && converged,
        format!("exact-frequency error {fixed:.1e}; sampled: {iters} iterations, converged {converged}, monotone {monotone}"),
    )
}

/// Largest purified-mode overlap error per `n` over the preset families, and the
/// largest error when the exact Choi matrix is fed through both modes.
fn overlap_errors(seed: u64) -> (Vec<(usize, f64)>, f64) {
    const PHI: [f64; 4] = [0.1717, 0.1234, 0.9876, 0.888];
    let mut per_n = Vec::new();
    let mut exact_worst: f64 = 0.0;
    for n in [2, 3] {
        let u = ghz_unitary(n);
        let exact_choi = unnorm(n, choi_oracle(&u));
        let recs = acquire_ancilla(&ghz_process(n).unwrap(), &PairingPlan::default_mixed(n), 1024, 50, seed + n as u64).unwrap();
        let raw = estimate_choi(&recs, &EstimatorConfig::Mean).unwrap();
        let zero = basis(1 << n, 0);
        let inputs = [
            CMatrix::projector(&zero),
            CMatrix::projector(&kron_list(&(0..n).map(|j| rx(PHI[j])).collect::<Vec<_>>()).apply(&zero).unwrap()),
        ];
        let mut worst: f64 = 0.0;
        for rho in &inputs {
            let out = sandwich(&u, rho);
            for rot in [ry as fn(f64) -> CMatrix, rx] {
                for i in 0..51 {
                    let theta = 2.0 * PI * i as f64 / 50.0;
                    let prep = kron_list(&vec![rot(theta); n]);
                    let sigma = CMatrix::projector(&u.matmul(&prep).unwrap().apply(&zero).unwrap());
                    let exact = out.trace_product(&sigma).unwrap().re;
                    let pur = overlap_pipeline(&raw, rho, &sigma, OverlapMode::Purified).unwrap();
                    worst = worst.max((pur - exact).abs());
                    for mode in [OverlapMode::Full, OverlapMode::Purified] {
                        let e = overlap_pipeline(&exact_choi, rho, &sigma, mode).unwrap();
                        exact_worst = exact_worst.max((e - exact).abs());
                    }
                }
            }
        }
        per_n.push((n, worst));
    }
    (per_n, exact_worst)
}

fn c7_overlap() -> (bool, String) {
    let (per_n, exact_worst) = overlap_errors(700);
    let pass = per_n.iter().all(|&(_, w)| w < 0.05) && exact_worst < 1e-9;
    let parts: Vec<String> = per_n.iter().map(|(n, w)| format!("n={n} {w:.4}")).collect();
    // repeat on fresh seeds to show how often a single run clears the tolerance
    let extra = (1..=10).filter(|k| overlap_errors(700 + 100 * k).0.iter().all(|&(_, w)| w < 0.05)).count();
    (
        pass,
        format!(
            "max purified error {} (tol 0.05); exact-input error {exact_worst:.1e}; {extra}/10 further seeds within tolerance",
            parts.join(", ")
        ),
    )
}

fn c8_reduced() -> (bool, String) {
    let n = 3;
    let spec = ghz_process(n).unwrap();
    let exact = choi_oracle(&ghz_unitary(n));
    let recs = acquire_ancilla(&spec, &PairingPlan::Pauli, 51_200, 1, 808).unwrap();
    let subs: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]];
    let mut parts = Vec::new();
    let mut pass = true;
    for sub in &subs {
        let reference = unnorm(sub.len(), reduced_oracle(&exact, n, sub));
        let est = cp_project(&estimate_reduced(&recs, sub, &EstimatorConfig::Mean).unwrap()).unwrap();
        let td = trace_distance(&est, &reference).unwrap();
        pass &= td < 0.05;
        parts.push(format!("{sub:?} {td:.3}"));
    }
    (pass, format!("CP trace distances {} (tol 0.05)", parts.join(", ")))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn statistical(rs: &[HamLearnResult]) -> f64 {
    summarize(rs).unwrap().statistical
}

fn c9_hamlearn() -> (bool, String) {
    let seeds = 10;
    let master = 9;
    let base = disorder_sweep(5, &[0.1], 100_000, seeds, Scheme::TwoSided, master).unwrap();
    let mean_err = summarize(&base[0]).unwrap().mean_error;

    let shots = [1_000usize, 10_000];
    let mut stat_n: Vec<f64> = shots
        .iter()
        .map(|&s| statistical(&disorder_sweep(5, &[0.1], s, seeds, Scheme::TwoSided, master).unwrap()[0]))
        .collect();
    stat_n.push(statistical(&base[0]));
    let slope_n = slope(&[1e3, 1e4, 1e5], &stat_n);

    let grid = [0.05, 0.1, 0.2, 0.4, 0.8];
    let sweep = disorder_sweep(5, &grid, 20_000, seeds, Scheme::TwoSided, master).unwrap();
    let stat_t: Vec<f64> = sweep.iter().map(|r| statistical(r)).collect();
    let slope_t = slope(&grid, &stat_t);

    let sys_t: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let errs: Vec<f64> = (0..seeds)
                .map(|r| {
                    let ht = disorder_instance(5, master, r).unwrap();
                    let probes = default_probes(&ht).unwrap();
                    let exact = propagator(&ht, t).choi().unwrap();
                    let ren = renormalized_coefficients(&exact, &probes, t).unwrap();
                    mean(&probes.iter().zip(&ren).map(|(p, c)| (c - ht.terms[p.term].coeff).abs()).collect::<Vec<_>>())
                })
                .collect();
            mean(&errs)
        })
        .collect();
    let slope_sys = slope(&grid, &sys_t);

    let mut by_n = Vec::new();
    for n in [3, 4, 6] {
        by_n.push(summarize(&disorder_sweep(n, &[0.1], 100_000, seeds, Scheme::TwoSided, master).unwrap()[0]).unwrap().mean_error);
    }
    by_n.insert(2, mean_err);
    let spread = (by_n.iter().copied().fold(f64::NEG_INFINITY, f64::max) - by_n.iter().copied().fold(f64::INFINITY, f64::min)) / mean(&by_n);

    let pass = mean_err <= 0.2
        && (slope_n + 0.5).abs() <= 0.1
        && (slope_t + 1.0).abs() <= 0.2
        && (slope_sys - 2.0).abs() <= 0.3
        && spread < 0.5;
    (
        pass,
        format!(
            "mean error {mean_err:.4}; statistical slope in N {slope_n:.3}, in t {slope_t:.3}; systematic slope {slope_sys:.3}; n=3..6 errors {by_n:.4?}, spread {:.0}%",
            100.0 * spread
        ),
    )
}

fn c10_bounds() -> (bool, String) {
    use OverlapScheme as O;
    use ReducedScheme as R;
    let cases: [(u64, u64); 10] = [
        (bound_reduced(3, 1, 0.1, 0.1, R::GlobalClifford).unwrap(), 48_839_049),
        (bound_reduced(5, 2, 0.05, 0.01, R::GlobalClifford).unwrap(), 26_810_662_109),
        (bound_reduced(3, 1, 0.1, 0.1, R::Pauli6Frobenius).unwrap(), 2_289_331),
        (bound_reduced(6, 2, 0.2, 0.05, R::Pauli6Frobenius).unwrap(), 42_243_460),
        (bound_reduced(3, 1, 0.1, 0.1, R::Pauli6Trace).unwrap(), 416_868),
        (bound_reduced(4, 2, 0.1, 0.01, R::Pauli6Trace).unwrap(), 126_420_829),
        (bound_overlap(1000, 0.1, 0.1, O::GlobalClifford).unwrap(), 202_032),
        (bound_overlap(100, 0.05, 0.05, O::LocalClifford { k: 2 }).unwrap(), 3_609_571),
        (bound_hamlearn(5, 2, 0.1, 0.1, 0.1).unwrap(), 440_326_827),
        (bound_hamlearn(10, 1, 0.05, 0.2, 0.01).unwrap(), 14_529_585),
    ];
    let bad: Vec<usize> = cases.iter().enumerate().filter(|(_, (a, b))| a != b).map(|(i, _)| i).collect();
    (bad.is_empty(), format!("{} of 10 tuples match exactly{}", 10 - bad.len(), if bad.is_empty() { String::new() } else { format!(", mismatched {bad:?}") }))
}
