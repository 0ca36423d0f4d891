//! Exactly uniform sampling of differentials and Monte Carlo checks of the
//! homology-dimension distribution.
//!
//! A uniform differential is drawn in two stages. First the homology
//! dimension `r` is drawn with probability `c_r(q,n) / c(q,n)` by comparing
//! one uniform integer in `[0, c(q,n))` against the cumulative exact counts.
//! Then a uniform `X ∈ GL_n(q)` conjugates the canonical differential:
//! every element of the orbit of `D_r` has exactly `|C_r|` preimages under
//! `X ↦ X D_r X^{-1}`, so the result is uniform within the orbit.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`; both are value-stable across platforms.
//! Bounded integers are produced by rejection from raw 64-bit words, so the
//! stream of samples depends only on the seed.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Serialize, Serializer};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::exact_count::{count_report, render_decimal, CountError, CountReport, ExactValue};
use crate::finite_field::{FieldElement, FieldSpec};
use crate::linalg::{Differential, LinalgError, MatrixGF};

/// Name of the generator recorded in every report.
pub const RNG_ALGORITHM: &str = "chacha20 (rand_chacha 0.3, seed_from_u64)";
/// Attempts allowed when drawing an invertible matrix by rejection.
pub const GL_ATTEMPT_CAP: usize = 10_000;
/// Categories whose expected count falls below this are pooled.
pub const POOLING_THRESHOLD: f64 = 5.0;
/// Significance level for [`EmpiricalReport::consistent`].
pub const SIGNIFICANCE: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no invertible matrix after {0} attempts")]
    RngFailure(usize),
    #[error("dimension n must be at least 1")]
    EmptySpace,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("worker count must be at least 1")]
    NoWorkers,
}

/// Deterministic pseudorandom stream.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    inner: ChaCha20Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            seed,
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let limit = (u64::MAX / bound) * bound;
        loop {
            let x = self.next_u64();
            if x < limit {
                return x % bound;
            }
        }
    }

    /// Uniform big integer in `[0, bound)`.
    pub fn below_big(&mut self, bound: &BigUint) -> BigUint {
        assert!(bound.bits() > 0, "empty range");
        let bits = bound.bits();
        let words = bits.div_ceil(64) as usize;
        let top_bits = bits - 64 * (words as u64 - 1);
        let top_mask = if top_bits == 64 {
            u64::MAX
        } else {
            (1u64 << top_bits) - 1
        };
        loop {
            let mut digits: Vec<u64> = (0..words).map(|_| self.next_u64()).collect();
            digits[words - 1] &= top_mask;
            let candidate = BigUint::from_slice(
                &digits
                    .iter()
                    .flat_map(|d| [*d as u32, (d >> 32) as u32])
                    .collect::<Vec<_>>(),
            );
            if &candidate < bound {
                return candidate;
            }
        }
    }

    pub fn element(&mut self, spec: &FieldSpec) -> FieldElement {
        let idx = self.below(spec.order() as u64) as u32;
        spec.element(idx).expect("index below field order")
    }

    pub fn matrix(&mut self, spec: &FieldSpec, rows: usize, cols: usize) -> MatrixGF {
        let entries = (0..rows * cols).map(|_| self.element(spec)).collect();
        MatrixGF::from_entries(spec, rows, cols, entries).expect("shape and entries are valid")
    }
}

/// Uniform element of `GL_n(q)` by rejection: i.i.d. uniform entries,
/// accepted when the rank is full.
pub fn random_gl(spec: &FieldSpec, n: usize, rng: &mut RngState) -> Result<MatrixGF, SampleError> {
    if n == 0 {
        return Err(SampleError::EmptySpace);
    }
    for _ in 0..GL_ATTEMPT_CAP {
        let candidate = rng.matrix(spec, n, n);
        if candidate.rank() == n {
            return Ok(candidate);
        }
    }
    Err(SampleError::RngFailure(GL_ATTEMPT_CAP))
}

/// Samples differentials on `F_q^n`, caching the exact census.
#[derive(Debug, Clone)]
pub struct DifferentialSampler {
    spec: FieldSpec,
    n: usize,
    report: CountReport,
    cumulative: Vec<(usize, BigUint)>,
}

impl DifferentialSampler {
    pub fn new(spec: &FieldSpec, n: usize) -> Result<Self, SampleError> {
        if n == 0 {
            return Err(SampleError::EmptySpace);
        }
        let report = count_report(spec.order() as u64, n)?;
        let cumulative = report.cumulative();
        Ok(DifferentialSampler {
            spec: spec.clone(),
            n,
            report,
            cumulative,
        })
    }

    pub fn report(&self) -> &CountReport {
        &self.report
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Homology dimension drawn with probability exactly `p_r(q, n)`.
    pub fn sample_r(&self, rng: &mut RngState) -> usize {
        let u = rng.below_big(&self.report.total);
        self.cumulative
            .iter()
            .find(|(_, cum)| &u < cum)
            .map(|&(r, _)| r)
            .expect("u is below the total count")
    }

    pub fn sample(&self, rng: &mut RngState) -> Result<Differential, SampleError> {
        let r = self.sample_r(rng);
        let m = (self.n - r) / 2;
        let x = random_gl(&self.spec, self.n, rng)?;
        let x_inv = x.inverse()?;
        let canonical = Differential::canonical(&self.spec, m, r);
        let conjugated = x.mul(canonical.matrix())?.mul(&x_inv)?;
        let d = Differential::new(conjugated)?;
        if d.homology_dim() != r {
            return Err(CountError::Invariant(format!(
                "conjugation changed homology dimension {r} to {}",
                d.homology_dim()
            ))
            .into());
        }
        Ok(d)
    }
}

pub fn sample_r(q: u64, n: usize, rng: &mut RngState) -> Result<usize, SampleError> {
    if n == 0 {
        return Err(SampleError::EmptySpace);
    }
    let report = count_report(q, n)?;
    let u = rng.below_big(&report.total);
    Ok(report
        .cumulative()
        .into_iter()
        .find(|(_, cum)| &u < cum)
        .map(|(r, _)| r)
        .expect("u is below the total count"))
}

pub fn sample_differential(
    spec: &FieldSpec,
    n: usize,
    rng: &mut RngState,
) -> Result<Differential, SampleError> {
    DifferentialSampler::new(spec, n)?.sample(rng)
}

/// `(I + D)^2 == I`.
pub fn is_involution_shift(d: &Differential) -> bool {
    let a = d.matrix();
    let spec = a.spec();
    let mut shifted = a.clone();
    for i in 0..a.rows() {
        shifted.set(i, i, spec.add(a.get(i, i), FieldElement::ONE));
    }
    shifted
        .mul(&shifted)
        .map(|sq| sq == MatrixGF::identity(spec, a.rows()))
        .unwrap_or(false)
}

/// A chi-square category after pooling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledBin {
    pub dims: Vec<usize>,
    pub observed: u64,
    pub expected: f64,
}

/// Histogram of sampled homology dimensions against exact probabilities.
#[derive(Debug, Clone)]
pub struct EmpiricalReport {
    pub q: u64,
    pub n: usize,
    pub num_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub rng_algorithm: &'static str,
    pub histogram: BTreeMap<usize, u64>,
    pub exact_probs: BTreeMap<usize, BigRational>,
    pub bins: Vec<PooledBin>,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub p_value_bracket: &'static str,
    pub consistent: bool,
    /// Samples with `(I + D)^2 != I`; only recorded for `q = 2`.
    pub involution_violations: Option<u64>,
    pub precision: usize,
}

fn bracket(p: f64) -> &'static str {
    if p > 0.05 {
        "p > 0.05"
    } else if p > 0.01 {
        "0.01 < p <= 0.05"
    } else if p > SIGNIFICANCE {
        "0.001 < p <= 0.01"
    } else {
        "p <= 0.001"
    }
}

/// Pools every category with expected count below the threshold into its
/// smaller-`r` neighbour; a deficient smallest category joins the next one up.
pub fn pool_bins(
    histogram: &BTreeMap<usize, u64>,
    probs: &BTreeMap<usize, BigRational>,
    num: u64,
) -> Vec<PooledBin> {
    let mut bins: Vec<PooledBin> = probs
        .iter()
        .map(|(&r, p)| PooledBin {
            dims: vec![r],
            observed: histogram.get(&r).copied().unwrap_or(0),
            expected: p.to_f64().unwrap_or(0.0) * num as f64,
        })
        .collect();
    let mut i = bins.len();
    while i > 1 {
        i -= 1;
        if bins[i].expected < POOLING_THRESHOLD {
            let bin = bins.remove(i);
            let target = &mut bins[i - 1];
            target.dims.extend(bin.dims);
            target.observed += bin.observed;
            target.expected += bin.expected;
        }
    }
    if bins.len() > 1 && bins[0].expected < POOLING_THRESHOLD {
        let first = bins.remove(0);
        let target = &mut bins[0];
        let mut dims = first.dims;
        dims.append(&mut target.dims);
        target.dims = dims;
        target.observed += first.observed;
        target.expected += first.expected;
    }
    bins
}

/// Chi-square statistic, degrees of freedom and upper-tail p-value.
pub fn chi_square(bins: &[PooledBin]) -> (f64, usize, f64) {
    let stat: f64 = bins
        .iter()
        .map(|b| {
            let diff = b.observed as f64 - b.expected;
            diff * diff / b.expected
        })
        .sum();
    let dof = bins.len().saturating_sub(1);
    if dof == 0 {
        return (stat, 0, 1.0);
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (stat, dof, dist.sf(stat))
}

/// Draws `num` differentials split across `workers` independent streams and
/// compares the homology histogram with the exact distribution.
///
/// Worker `w` uses seed `seed ^ w` and draws `num / workers` samples, plus
/// one more when `w < num % workers`. Histograms are merged by addition, so
/// the report depends only on `(q, n, num, seed, workers)`.
pub fn monte_carlo(
    spec: &FieldSpec,
    n: usize,
    num: u64,
    seed: u64,
    workers: usize,
) -> Result<EmpiricalReport, SampleError> {
    if num == 0 {
        return Err(SampleError::NoSamples);
    }
    if workers == 0 {
        return Err(SampleError::NoWorkers);
    }
    let sampler = DifferentialSampler::new(spec, n)?;
    let check_involution = spec.order() == 2;

    let run_worker = |w: usize| -> Result<(BTreeMap<usize, u64>, u64), SampleError> {
        let share = num / workers as u64 + u64::from((w as u64) < num % workers as u64);
        let mut rng = RngState::new(seed ^ w as u64);
        let mut hist = BTreeMap::new();
        let mut violations = 0;
        for _ in 0..share {
            let d = sampler.sample(&mut rng)?;
            *hist.entry(d.homology_dim()).or_insert(0) += 1;
            if check_involution && !is_involution_shift(&d) {
                violations += 1;
            }
        }
        Ok((hist, violations))
    };

    let partials: Vec<Result<_, SampleError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || run_worker(w)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling worker panicked"))
            .collect()
    });

    let mut histogram = BTreeMap::new();
    let mut violations = 0;
    for partial in partials {
        let (hist, v) = partial?;
        for (r, c) in hist {
            *histogram.entry(r).or_insert(0) += c;
        }
        violations += v;
    }

    let exact_probs = sampler.report().probs.clone();
    let bins = pool_bins(&histogram, &exact_probs, num);
    let (stat, dof, p_value) = chi_square(&bins);
    Ok(EmpiricalReport {
        q: spec.order() as u64,
        n,
        num_samples: num,
        seed,
        workers,
        rng_algorithm: RNG_ALGORITHM,
        histogram,
        exact_probs,
        bins,
        chi_square: stat,
        degrees_of_freedom: dof,
        p_value,
        p_value_bracket: bracket(p_value),
        consistent: p_value > SIGNIFICANCE,
        involution_violations: check_involution.then_some(violations),
        precision: crate::exact_count::DEFAULT_PRECISION,
    })
}

impl EmpiricalReport {
    pub fn with_precision(mut self, precision: usize) -> Self {
        self.precision = precision;
        self
    }

    /// CSV with header `q,n,r,observed,expected_count,probability,decimal,precision`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,n,r,observed,expected_count,probability,decimal,precision\n");
        for (r, p) in &self.exact_probs {
            let observed = self.histogram.get(r).copied().unwrap_or(0);
            let expected = p.to_f64().unwrap_or(0.0) * self.num_samples as f64;
            out.push_str(&format!(
                "{},{},{},{},{:.6},{},{},{}\n",
                self.q,
                self.n,
                r,
                observed,
                expected,
                p,
                render_decimal(p, self.precision),
                self.precision
            ));
        }
        out
    }
}

impl Serialize for EmpiricalReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            q: u64,
            n: usize,
            num_samples: u64,
            seed: u64,
            workers: usize,
            rng_algorithm: &'a str,
            histogram: &'a BTreeMap<usize, u64>,
            exact_probs: BTreeMap<usize, ExactValue>,
            bins: &'a [PooledBin],
            chi_square: f64,
            degrees_of_freedom: usize,
            p_value: f64,
            p_value_bracket: &'a str,
            consistent: bool,
            involution_violations: Option<u64>,
            precision: usize,
        }
        View {
            q: self.q,
            n: self.n,
            num_samples: self.num_samples,
            seed: self.seed,
            workers: self.workers,
            rng_algorithm: self.rng_algorithm,
            histogram: &self.histogram,
            exact_probs: self
                .exact_probs
                .iter()
                .map(|(&r, p)| (r, ExactValue::new(p, self.precision)))
                .collect(),
            bins: &self.bins,
            chi_square: self.chi_square,
            degrees_of_freedom: self.degrees_of_freedom,
            p_value: self.p_value,
            p_value_bracket: self.p_value_bracket,
            consistent: self.consistent,
            involution_violations: self.involution_violations,
            precision: self.precision,
        }
        .serialize(serializer)
    }
}
