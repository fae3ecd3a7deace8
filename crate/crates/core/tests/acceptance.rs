//! Acceptance criteria 1–10, one PASS/FAIL line each. Runs without the
//! libtest harness; the process fails if any criterion fails.

use std::time::{Duration, Instant};

use asep_duality::evolution::{dense_propagator, expm_action, position_lists, DrivingSpec, ExpmOptions, Method};
use asep_duality::measures::{closed_form_density_k1, closed_form_density_k2, FugacityProfile, SamKind, SamSpec};
use asep_duality::operators::{GeneratorSpec, Sign};
use asep_duality::verify::{
    check_duality_theorem1, check_lemmas, check_proposition1, check_shock_theorem, run_suite, IntertwiningParams,
    LemmaParams, ShockParams, ShockTheorem, SuiteConfig, VerificationReport,
};
use asep_duality::{Configuration, Mode, NumericField, PositionList, QExponent, Space, StateVector};
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Check = fn() -> Outcome;

fn failures(reports: &[VerificationReport]) -> Vec<String> {
    reports
        .iter()
        .filter(|r| !r.pass)
        .take(5)
        .map(|r| format!("{r} {} {:?}", r.params, r.notes))
        .collect()
}

fn all_pass(reports: &[VerificationReport], what: &str) -> Outcome {
    let bad = failures(reports);
    let worst = reports
        .iter()
        .filter(|r| r.expectation == asep_duality::verify::Expectation::Zero)
        .map(|r| r.residual)
        .fold(0.0, f64::max);
    Outcome::new(
        bad.is_empty(),
        format!("{} {what}, max residual {worst:e}{}", reports.len(), if bad.is_empty() { String::new() } else { format!("; failing: {bad:?}") }),
    )
}

fn c1_algebra() -> Outcome {
    let config = SuiteConfig {
        max_sites: 6,
        mode: Mode::Exact,
        ..SuiteConfig::default()
    };
    match run_suite("algebra", &config) {
        Ok(r) => all_pass(&r, "exact algebra checks L<=6"),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn c2_proposition1() -> Outcome {
    let mut reports = Vec::new();
    let mut witnesses = Vec::new();
    for l in [4usize, 6, 8] {
        let li = l as i64;
        let alphas = [
            QExponent::ZERO,
            QExponent::ONE,
            QExponent::new(3, 2 * li).unwrap(),
            QExponent::new(-1, li).unwrap(),
        ];
        for k in 0..=l {
            for power in 0..=2 {
                for sign in [Sign::Plus, Sign::Minus] {
                    for alpha in alphas {
                        let p = IntertwiningParams {
                            sites: l,
                            particles: k,
                            power,
                            sign,
                            alpha,
                            perturb: false,
                        };
                        reports.push(check_proposition1(&p, Mode::Exact, 1.5, 0.0));
                        if power > 0 {
                            witnesses.push(check_proposition1(&IntertwiningParams { perturb: true, ..p }, Mode::Exact, 1.5, 0.0));
                        }
                    }
                }
            }
        }
    }
    let nonzero = witnesses.iter().filter(|r| r.residual > 0.0).count();
    let mut out = all_pass(&reports, "exact instances");
    let witnesses_ok = witnesses.iter().all(|r| r.pass);
    out.pass &= witnesses_ok && nonzero > 0;
    out.detail += &format!("; {nonzero}/{} wrong-beta witnesses nonzero", witnesses.len());
    out
}

fn c3_theorem1() -> Outcome {
    let l = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let states = Space::full(l).unwrap().states();
    let opts = ExpmOptions::default().with_tol(1e-14);
    let mut reports = Vec::new();
    for t in [0.1, 0.7, 2.0] {
        for _ in 0..7 {
            let k = rng.gen_range(1..=l);
            let x = position_lists(Space::sector(l, k).unwrap()).choose(&mut rng).unwrap().clone();
            let eta = Configuration::from_bits(l, *states.choose(&mut rng).unwrap()).unwrap();
            let q = rng.gen_range(1.1..2.5);
            match check_duality_theorem1(&x, &eta, q, t, 1e-12, &opts) {
                Ok(r) => reports.push(r),
                Err(e) => return Outcome::new(false, e.to_string()),
            }
        }
    }
    all_pass(&reports, "random instances at L=6, relative tolerance 1e-12")
}

fn shock_grid(theorem: ShockTheorem) -> Outcome {
    let opts = ExpmOptions::default().with_tol(1e-14);
    let mut reports = Vec::new();
    for (l, n, k) in [(6usize, 2usize, 1usize), (8, 3, 1), (8, 3, 2)] {
        for x in position_lists(Space::sector(l, k).unwrap()) {
            for q in [1.3, 2.0] {
                for z in [0.5, 1.0] {
                    for t in [0.1, 1.0] {
                        let p = ShockParams {
                            sites: l,
                            particles: n,
                            shocks: x.clone(),
                            z,
                            q,
                            t,
                        };
                        match check_shock_theorem(theorem, &p, 1e-9, &opts) {
                            Ok(r) => reports.push(r),
                            Err(e) => return Outcome::new(false, format!("{p:?}: {e}")),
                        }
                    }
                }
            }
        }
    }
    let metric = |name: &str| reports.iter().map(|r| r.metrics[name]).fold(0.0, f64::max);
    let (dev, decomp) = (metric("deviation"), metric("decomposition_residual"));
    let pass = reports.iter().all(|r| r.pass) && dev <= 1e-9 && decomp <= 1e-10;
    Outcome::new(
        pass,
        format!(
            "{} grid points over all shock sets, max deviation {dev:e}, max decomposition residual {decomp:e}{}",
            reports.len(),
            failures(&reports).join("; ")
        ),
    )
}

fn c4_theorem2() -> Outcome {
    shock_grid(ShockTheorem::Global)
}

fn c5_theorem3() -> Outcome {
    shock_grid(ShockTheorem::Boundary)
}

fn c6_appendix() -> Outcome {
    let config = SuiteConfig {
        max_sites: 5,
        ..SuiteConfig::default()
    };
    let reports = match run_suite("appendix", &config) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let witnesses = reports
        .iter()
        .filter(|r| r.expectation == asep_duality::verify::Expectation::Nonzero)
        .count();
    let mut out = all_pass(&reports, "appendix checks L=3..5");
    out.pass &= witnesses > 0;
    out.detail += &format!("; {witnesses} wrong-beta witnesses nonzero");
    out
}

fn c7_lemmas() -> Outcome {
    let mut reports: Vec<_> = (1..=6)
        .map(|l| check_lemmas(&LemmaParams::new(l), Mode::Exact, 1.5, 0.0))
        .collect();
    let sampled = LemmaParams {
        samples: Some(40),
        seed: 7,
        ..LemmaParams::new(8)
    };
    reports.push(check_lemmas(&sampled, Mode::Numeric, 1.5, 1e-12));
    all_pass(&reports, "lemma sweeps (exact L<=6, numeric L=8 sample)")
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn c8_propagators() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut instances = vec![(15usize, 5usize)];
    while instances.len() < 50 {
        let l = rng.gen_range(3..=15);
        let n = rng.gen_range(1..l);
        if binomial(l, n) <= 3003 {
            instances.push((l, n));
        }
    }
    let mut worst: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    let mut max_dim = 0;
    for (i, &(l, n)) in instances.iter().enumerate() {
        let q: f64 = rng.gen_range(1.1..2.5);
        let stochastic = i % 2 == 0;
        let (alpha, beta) = if stochastic {
            (q, 1.0)
        } else {
            (q.powf(rng.gen_range(-1.0..1.0)), q.powf(rng.gen_range(-2.0..2.0)))
        };
        let t = rng.gen_range(0.05..1.5);
        let space = Space::sector(l, n).unwrap();
        max_dim = max_dim.max(space.dim());
        let h = GeneratorSpec::periodic(l, q, alpha, beta).build(space).unwrap();
        let v0: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = v0.iter().sum();
        let v0 = StateVector::from_coeffs(space, v0.into_iter().map(|c| c / total).collect()).unwrap();
        let oracle = match dense_propagator(&h.to_dense(), t) {
            Ok(p) => p * DVector::from_column_slice(v0.coeffs()),
            Err(e) => return Outcome::new(false, e.to_string()),
        };
        let scale = oracle.amax();
        for method in [Method::Krylov, Method::Uniformization] {
            let opts = ExpmOptions::default().with_method(method).with_tol(1e-14);
            let v = match expm_action(&h, &v0, t, &opts) {
                Ok(v) => v,
                Err(e) => return Outcome::new(false, format!("{method} at L={l} N={n}: {e}")),
            };
            let err = v.coeffs().iter().zip(oracle.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            worst = worst.max(err);
            if stochastic {
                worst_sum = worst_sum.max((v.total() - 1.0).abs());
            }
        }
        if stochastic {
            worst_sum = worst_sum.max((oracle.sum() - 1.0).abs());
        }
    }
    Outcome::new(
        worst <= 1e-12 && worst_sum <= 1e-12,
        format!(
            "{} sectors up to dim {max_dim}, max relative error {worst:e}, max |sum-1| {worst_sum:e}",
            instances.len()
        ),
    )
}

fn c9_profiles() -> Outcome {
    let l = 100;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for q in [1.1, 1.5] {
        for z in [0.5, 1.0, 2.0] {
            let mut compare = |shocks: Vec<usize>, closed: Vec<f64>| {
                let spec = SamSpec::new(PositionList::new(l, shocks).unwrap(), z, SamKind::II).unwrap();
                let rho = FugacityProfile::of_sam(q, &spec).unwrap().densities();
                let err = rho.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst = worst.max(err);
                cases += 1;
            };
            for x in [1, 30, 100] {
                compare(vec![x], closed_form_density_k1(l, x, q, z).unwrap());
            }
            for (x, y) in [(1, 2), (30, 70), (10, 100)] {
                compare(vec![x, y], closed_form_density_k2(l, x, y, q, z).unwrap());
            }
        }
    }
    Outcome::new(worst <= 1e-12, format!("{cases} K=1,2 profiles at L=100, max deviation {worst:e}"))
}

fn peak_rss_mib() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib / 1024.0)
}

fn c10_performance() -> Outcome {
    let (l, n) = (20, 10);
    let field = NumericField::new(1.5).unwrap();
    let space = Space::sector(l, n).unwrap();
    let h = DrivingSpec::global(5).generator(&field, l).unwrap().build(space).unwrap();
    let x = PositionList::new(l, (1..=n).collect()).unwrap();
    let v0 = StateVector::basis(space, &x.to_configuration()).unwrap();
    let opts = ExpmOptions::default().with_method(Method::Krylov).with_tol(1e-10);
    let started = Instant::now();
    let result = expm_action(&h, &v0, 1.0, &opts);
    let elapsed = started.elapsed();
    let rss = peak_rss_mib();
    match result {
        Ok(v) => {
            let within_memory = rss.is_none_or(|m| m < 2048.0);
            Outcome::new(
                elapsed < Duration::from_secs(10) && within_memory && v.coeffs().iter().all(|c| c.is_finite()),
                format!(
                    "dim {} in {:.2}s, peak RSS {}",
                    space.dim(),
                    elapsed.as_secs_f64(),
                    rss.map_or("n/a".into(), |m| format!("{m:.0} MiB"))
                ),
            )
        }
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn main() {
    let criteria: [(u8, &str, Duration, Check); 10] = [
        (1, "exact algebra suite", Duration::from_secs(60), c1_algebra),
        (2, "proposition 1 intertwining", Duration::from_secs(600), c2_proposition1),
        (3, "theorem 1 self-duality", Duration::from_secs(60), c3_theorem1),
        (4, "theorem 2 global driving", Duration::from_secs(300), c4_theorem2),
        (5, "theorem 3 boundary driving", Duration::from_secs(300), c5_theorem3),
        (6, "appendix relations", Duration::from_secs(120), c6_appendix),
        (7, "lemmas 1 and 3", Duration::from_secs(120), c7_lemmas),
        (8, "propagator oracle equivalence", Duration::MAX, c8_propagators),
        (9, "closed-form profiles", Duration::MAX, c9_profiles),
        (10, "large-sector performance", Duration::MAX, c10_performance),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let started = Instant::now();
        let mut out = check();
        let elapsed = started.elapsed();
        if elapsed > budget {
            out.pass = false;
            out.detail += &format!("; over the {}s budget", budget.as_secs());
        }
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} {id:>2} {name}: {} [{:.2}s]",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
