//! Acceptance suite. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p homology-census --test acceptance -- --nocapture`.
//!
//! Tests hold a shared lock so the runtime budgets are measured one at a time.

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use homology_census::exact_count::{
    asymptotic_deviation, centralizer_order, count_r, count_report, gl_order, limit_probs,
    ratio_closed_form, Parity,
};
use homology_census::finite_field::{is_prime, FieldSpec};
use homology_census::linalg::{Differential, MatrixGF};
use homology_census::oracle::{
    enumerate_centralizer, enumerate_differentials, EnumOptions, ScanPath, HARD_COST_LIMIT,
};
use homology_census::sampler::{is_involution_shift, monte_carlo, DifferentialSampler, RngState};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

static SERIAL: Mutex<()> = Mutex::new(());

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    start: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn start(id: u32, title: &'static str, budget: Duration) -> Self {
        Criterion {
            id,
            title,
            budget,
            start: Instant::now(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        if elapsed > self.budget {
            self.failures
                .push(format!("took {elapsed:.2?}, budget {:?}", self.budget));
        }
        let verdict = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {}: {verdict} [{:.2?}] {}",
            self.id, elapsed, self.title
        );
        for f in &self.failures {
            println!("    - {f}");
        }
        assert!(self.failures.is_empty(), "criterion {} failed", self.id);
    }
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn two_sig_figs(x: f64) -> String {
    format!("{x:.1e}")
}

fn field(q: u64) -> FieldSpec {
    FieldSpec::from_order(q).unwrap()
}

#[test]
fn criterion_1_headline_limits() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = Criterion::start(1, "limits at q=2, even parity", Duration::from_secs(1));
    let report = limit_probs(2, Parity::Even, 1e-9, 4).unwrap();
    let cases = [
        (0usize, 0.6, 0.59546),
        (2, 0.4, 0.39697),
        (4, 0.0075, 0.00756),
    ];
    for (r, rounded, computed) in cases {
        let p = report.p_limit[&r].to_f64().unwrap();
        c.check((p - computed).abs() <= 0.5 * 10f64.powi(-5), || {
            format!("p_{r} = {p:.7}, expected {computed} to 5 decimals")
        });
        c.check(two_sig_figs(p) == two_sig_figs(rounded), || {
            format!(
                "p_{r} = {p:.7} rounds to {} at two significant figures, expected {rounded}",
                two_sig_figs(p)
            )
        });
    }
    c.finish();
}

#[test]
fn criterion_2_oracle_matches_counts() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = Criterion::start(
        2,
        "exhaustive differential census equals exact counts",
        Duration::from_secs(5 * 60 + 10),
    );
    let cases = [
        (2, 2),
        (2, 3),
        (2, 4),
        (2, 5),
        (3, 2),
        (3, 3),
        (4, 2),
        (5, 2),
    ];
    for (q, n) in cases {
        let spec = field(q);
        let mut paths = vec![ScanPath::Auto];
        if q == 2 && n == 5 {
            paths.push(ScanPath::Generic);
        }
        for path in paths {
            let t = Instant::now();
            let rep =
                enumerate_differentials(&spec, n, &EnumOptions::default().with_path(path)).unwrap();
            let elapsed = t.elapsed();
            let budget = if path == ScanPath::Generic {
                Duration::from_secs(5 * 60)
            } else {
                Duration::from_secs(10)
            };
            c.check(rep.agrees, || {
                format!("({q},{n}) {path:?}: {:?} vs {:?}", rep.counts, rep.expected)
            });
            c.check(elapsed < budget, || {
                format!("({q},{n}) {path:?} took {elapsed:.2?}, budget {budget:?}")
            });
        }
    }
    let rep = enumerate_differentials(&field(2), 4, &EnumOptions::default()).unwrap();
    let want = BTreeMap::from([(0, 210), (2, 105), (4, 1)]);
    c.check(rep.counts == want && rep.differential_count == 316, || {
        format!("(2,4) gave {:?}", rep.counts)
    });
    c.finish();
}

#[test]
fn criterion_3_centralizer_orders() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = Criterion::start(
        3,
        "centralizer scans equal |GL_m||GL_r|q^(2mr+m^2)",
        Duration::from_secs(60),
    );
    let opts = EnumOptions::default().with_max_cost(HARD_COST_LIMIT);
    for q in [2u64, 3] {
        let spec = field(q);
        for n in 1..=4usize {
            for m in 0..=n / 2 {
                let r = n - 2 * m;
                let rep = enumerate_centralizer(&spec, m, r, &opts).unwrap();
                let formula = gl_order(q, m).unwrap()
                    * gl_order(q, r).unwrap()
                    * BigUint::from(q).pow((2 * m * r + m * m) as u32);
                c.check(BigUint::from(rep.count) == formula && rep.agrees, || {
                    format!(
                        "q={q} m={m} r={r}: scanned {}, formula {formula}",
                        rep.count
                    )
                });
                c.check(rep.block_form_violations == 0, || {
                    format!(
                        "q={q} m={m} r={r}: {} block-form violations",
                        rep.block_form_violations
                    )
                });
            }
        }
    }
    for (m, r, want) in [(1usize, 0usize, 2u64), (1, 1, 8)] {
        let rep = enumerate_centralizer(&field(2), m, r, &opts).unwrap();
        c.check(rep.count == want, || {
            format!("(2,{m},{r}) gave {}", rep.count)
        });
    }
    c.finish();
}

fn round_trip_exact(d: &Differential) -> bool {
    let nf = d.normal_form();
    let Ok(p_inv) = nf.basis.inverse() else {
        return false;
    };
    let conj: MatrixGF = p_inv.mul(d.matrix()).unwrap().mul(&nf.basis).unwrap();
    let canonical = Differential::canonical(d.matrix().spec(), nf.m, nf.r);
    nf.r == d.homology_dim() && conj == *canonical.matrix()
}

#[test]
fn criterion_4_normal_form_round_trip() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = Criterion::start(
        4,
        "normal-form round trip on enumerated and sampled differentials",
        Duration::from_secs(60),
    );
    let spec = field(2);
    for n in 1..=4 {
        let opts = EnumOptions::default().with_normal_form_check();
        let rep = enumerate_differentials(&spec, n, &opts).unwrap();
        c.check(
            rep.normal_form_failures == 0 && rep.normal_form_checked == rep.differential_count,
            || {
                format!(
                    "(2,{n}): {} of {} checked, {} failures",
                    rep.normal_form_checked, rep.differential_count, rep.normal_form_failures
                )
            },
        );
    }
    for (q, n) in [(2u64, 8usize), (3, 6)] {
        let sampler = DifferentialSampler::new(&field(q), n).unwrap();
        let mut rng = RngState::new(2024);
        let bad = (0..1000)
            .filter(|_| !round_trip_exact(&sampler.sample(&mut rng).unwrap()))
            .count();
        c.check(bad == 0, || {
            format!("({q},{n}): {bad} of 1000 samples failed")
        });
    }
    c.finish();
}

#[test]
fn criterion_5_sampler_correctness() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = Criterion::start(
        5,
        "uniformity, chi-square consistency and involution shift",
        Duration::from_secs(120),
    );
    let draws = 1_000_000u64;
    for (n, support) in [(2usize, 4usize), (3, 22)] {
        let spec = field(2);
        let sampler = DifferentialSampler::new(&spec, n).unwrap();
        let mut rng = RngState::new(7 + n as u64);
        let mut freq: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        let mut not_involution = 0u64;
        for _ in 0..draws {
            let d = sampler.sample(&mut rng).unwrap();
            if !is_involution_shift(&d) {
                not_involution += 1;
            }
            let key = d.matrix().entries().iter().map(|e| e.index()).collect();
            *freq.entry(key).or_insert(0) += 1;
        }
        c.check(freq.len() == support, || {
            format!(
                "(2,{n}): {} distinct matrices, expected {support}",
                freq.len()
            )
        });
        let p = 1.0 / support as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        let worst = freq
            .values()
            .map(|&f| (f as f64 - mean).abs() / sigma)
            .fold(0.0, f64::max);
        c.check(worst < 5.0, || {
            format!("(2,{n}): max deviation {worst:.2} sigma")
        });
        c.check(not_involution == 0, || {
            format!("(2,{n}): {not_involution} samples with (I+D)^2 != I")
        });
    }
    let rep = monte_carlo(&field(2), 8, 200_000, 42, 1).unwrap();
    c.check(rep.consistent && rep.p_value > 0.001, || {
        format!(
            "(2,8): chi-square {:.3}, p = {:.5}",
            rep.chi_square, rep.p_value
        )
    });
    c.check(rep.involution_violations == Some(0), || {
        format!(
            "(2,8): involution violations {:?}",
            rep.involution_violations
        )
    });
    c.finish();
}

#[test]
fn criterion_6_exactness() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = Criterion::start(
        6,
        "normalization, exact division and closed-form ratios",
        Duration::from_secs(30),
    );
    for q in [2u64, 3, 4, 5] {
        for n in 1..=50usize {
            let rep = count_report(q, n).unwrap();
            let sum: BigRational = rep.probs.values().sum();
            c.check(sum.is_one(), || {
                format!("q={q} n={n}: probabilities sum to {sum}")
            });
            let gl = gl_order(q, n).unwrap();
            for &r in rep.counts.keys() {
                let cent = centralizer_order(q, (n - r) / 2, r).unwrap();
                let exact = (&gl % &cent).is_zero() && &rep.counts[&r] * &cent == gl;
                c.check(exact, || {
                    format!("q={q} n={n} r={r}: |C_r| does not divide |GL_n|")
                });
            }
        }
    }
    for q in [2u64, 3, 4] {
        for n in (2..=20usize).step_by(2) {
            let base = BigInt::from(count_r(q, n, 0).unwrap());
            for r in (0..=n).step_by(2) {
                let quotient =
                    BigRational::new(BigInt::from(count_r(q, n, r).unwrap()), base.clone());
                let closed = ratio_closed_form(q, n, r).unwrap();
                c.check(quotient == closed, || {
                    format!("q={q} n={n} r={r}: closed form {closed} vs quotient {quotient}")
                });
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_7_limits_and_concentration() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = Criterion::start(
        7,
        "convergence, monotonicity, concentration and large-q deviation",
        Duration::from_secs(60),
    );
    let tol = BigRational::new(BigInt::one(), BigInt::from(10u64.pow(9)));
    let finite = count_report(2, 100).unwrap();
    let limit = limit_probs(2, Parity::Even, 1e-15, 6).unwrap();
    for r in (0..=6).step_by(2) {
        let diff = &finite.probs[&r] - &limit.p_limit[&r];
        let gap = if diff < BigRational::zero() {
            -diff
        } else {
            diff
        };
        c.check(gap < tol, || {
            format!(
                "r={r}: |p_r(2,100) - p_r(2)| = {:.3e}",
                gap.to_f64().unwrap()
            )
        });
    }

    for q in [2u64, 3, 5] {
        for n in 1..=30usize {
            let rep = count_report(q, n).unwrap();
            let counts: Vec<&BigUint> = rep.counts.values().collect();
            let decreasing = counts.windows(2).all(|w| w[0] > w[1]);
            c.check(decreasing, || {
                format!("q={q} n={n}: counts not strictly decreasing")
            });
        }
    }

    let primes: Vec<u64> = (11..=997).filter(|&q| is_prime(q)).collect();
    for &q in &primes {
        let p0 = count_report(q, 6).unwrap().probs[&0].clone();
        let bound = BigRational::one() - rat(10, q as i64);
        c.check(p0 > bound, || {
            format!("q={q}: p_0(q,6) = {p0} not above 1 - 10/q")
        });
    }

    let small_primes: Vec<u64> = (3..=97).filter(|&q| is_prime(q)).collect();
    let devs: Vec<BigRational> = small_primes
        .iter()
        .map(|&q| asymptotic_deviation(q, 10, 2).unwrap())
        .collect();
    for (i, &q) in small_primes.iter().enumerate() {
        let d = &devs[i];
        let upper = BigRational::one() + rat(5, 2 * q as i64);
        c.check(*d >= BigRational::one() && *d <= upper, || {
            format!(
                "q={q}: deviation {:.6} outside [1, 1 + 2.5/q]",
                d.to_f64().unwrap()
            )
        });
        if i > 0 {
            c.check(devs[i - 1] > *d, || {
                format!("q={q}: deviation did not decrease")
            });
        }
    }
    c.finish();
}

fn cli_stdout(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_homology-census"))
        .args(args)
        .env_remove("HOMOLOGY_CENSUS_WORKERS")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn criterion_8_reproducible_cli() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = Criterion::start(
        8,
        "repeated CLI invocations are byte-identical",
        Duration::from_secs(120),
    );
    let invocations: [&[&str]; 6] = [
        &["count", "--q", "3", "--n", "6"],
        &["limit", "--q", "2", "--parity", "odd", "--eps", "1e-9"],
        &[
            "sample", "--q", "2", "--n", "8", "--num", "200000", "--seed", "42",
        ],
        &[
            "sample",
            "--q",
            "3",
            "--n",
            "5",
            "--num",
            "50000",
            "--seed",
            "9",
            "--workers",
            "3",
        ],
        &["verify", "--q", "2", "--max-n", "4"],
        &["table", "--q", "2,3", "--n", "2,4,6", "--format", "json"],
    ];
    for args in invocations {
        let first = cli_stdout(args);
        let second = cli_stdout(args);
        c.check(!first.is_empty() && first == second, || {
            format!("{} differs between runs", args.join(" "))
        });
    }
    c.finish();
}
