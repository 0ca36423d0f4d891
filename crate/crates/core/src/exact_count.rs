//! Exact counts and probabilities of differentials by homology dimension.
//!
//! All quantities are computed with arbitrary-precision integers and
//! rationals. A differential on `F_q^n` with `r`-dimensional homology has
//! rank `m = (n - r) / 2`; it is conjugate to the canonical block
//! differential, and the number of such differentials is the orbit size
//! `|GL_n(q)| / |C_r|`, where the centralizer has order
//! `|GL_m(q)| |GL_r(q)| q^{2mr + m^2}`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::finite_field::prime_power;

/// Default number of decimal places in rendered probabilities.
pub const DEFAULT_PRECISION: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CountError {
    #[error("q = {0} is not a prime power")]
    NotPrimePower(u64),
    #[error("homology dimension r = {r} has the wrong parity for n = {n}")]
    ParityMismatch { n: usize, r: usize },
    #[error("homology dimension r = {r} exceeds n = {n}")]
    RankOutOfRange { n: usize, r: usize },
    #[error("dimension n must be at least 1")]
    EmptySpace,
    #[error("error tolerance {0} must lie in (0, 1)")]
    InvalidTolerance(f64),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Smallest homology dimension of this parity.
    pub fn baseline(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl std::str::FromStr for Parity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(format!("parity must be 'even' or 'odd', got '{other}'")),
        }
    }
}

fn check_order(q: u64) -> Result<(), CountError> {
    prime_power(q)
        .map(|_| ())
        .ok_or(CountError::NotPrimePower(q))
}

fn check_pair(n: usize, r: usize) -> Result<usize, CountError> {
    if r > n {
        return Err(CountError::RankOutOfRange { n, r });
    }
    if !(n - r).is_multiple_of(2) {
        return Err(CountError::ParityMismatch { n, r });
    }
    Ok((n - r) / 2)
}

fn pow(q: u64, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(q), exp)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `∏_{j=from}^{to} (q^j - 1)`.
fn q_factorial_range(q: u64, from: usize, to: usize) -> BigUint {
    (from..=to).fold(BigUint::one(), |acc, j| acc * (pow(q, j) - 1u32))
}

fn gl_order_unchecked(q: u64, k: usize) -> BigUint {
    pow(q, k * k.saturating_sub(1) / 2) * q_factorial_range(q, 1, k)
}

/// `|GL_k(q)| = q^{k(k-1)/2} ∏_{j=1}^k (q^j - 1)`.
pub fn gl_order(q: u64, k: usize) -> Result<BigUint, CountError> {
    check_order(q)?;
    Ok(gl_order_unchecked(q, k))
}

fn centralizer_unchecked(q: u64, m: usize, r: usize) -> BigUint {
    gl_order_unchecked(q, m) * gl_order_unchecked(q, r) * pow(q, 2 * m * r + m * m)
}

/// Order of the centralizer of the canonical differential with `m`
/// two-dimensional blocks and `r` one-dimensional blocks.
pub fn centralizer_order(q: u64, m: usize, r: usize) -> Result<BigUint, CountError> {
    check_order(q)?;
    Ok(centralizer_unchecked(q, m, r))
}

fn count_unchecked(q: u64, n: usize, r: usize, m: usize) -> Result<BigUint, CountError> {
    let (count, rem) = gl_order_unchecked(q, n).div_rem(&centralizer_unchecked(q, m, r));
    if !rem.is_zero() {
        return Err(CountError::Invariant(format!(
            "|GL_{n}({q})| not divisible by |C_{r}|"
        )));
    }
    Ok(count)
}

/// Number of differentials on `F_q^n` whose homology has dimension `r`.
pub fn count_r(q: u64, n: usize, r: usize) -> Result<BigUint, CountError> {
    check_order(q)?;
    let m = check_pair(n, r)?;
    count_unchecked(q, n, r, m)
}

/// Exact per-dimension census of differentials on `F_q^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub q: u64,
    pub n: usize,
    pub counts: BTreeMap<usize, BigUint>,
    pub total: BigUint,
    pub probs: BTreeMap<usize, BigRational>,
    pub precision: usize,
}

pub fn count_report(q: u64, n: usize) -> Result<CountReport, CountError> {
    check_order(q)?;
    if n == 0 {
        return Err(CountError::EmptySpace);
    }
    let mut counts = BTreeMap::new();
    for r in (n % 2..=n).step_by(2) {
        counts.insert(r, count_unchecked(q, n, r, (n - r) / 2)?);
    }
    let total: BigUint = counts.values().sum();
    let probs: BTreeMap<usize, BigRational> = counts
        .iter()
        .map(|(&r, c)| (r, ratio(c.clone(), total.clone())))
        .collect();
    let sum: BigRational = probs.values().sum();
    if !sum.is_one() {
        return Err(CountError::Invariant(format!(
            "probabilities for q={q}, n={n} sum to {sum}"
        )));
    }
    Ok(CountReport {
        q,
        n,
        counts,
        total,
        probs,
        precision: DEFAULT_PRECISION,
    })
}

impl CountReport {
    pub fn with_precision(mut self, precision: usize) -> Self {
        self.precision = precision;
        self
    }

    /// Running totals `c_{r_0}, c_{r_0} + c_{r_1}, ...` in increasing `r`.
    pub fn cumulative(&self) -> Vec<(usize, BigUint)> {
        let mut acc = BigUint::zero();
        self.counts
            .iter()
            .map(|(&r, c)| {
                acc += c;
                (r, acc.clone())
            })
            .collect()
    }

    /// CSV with header `q,n,r,count,probability,decimal,precision`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,n,r,count,probability,decimal,precision\n");
        for (r, c) in &self.counts {
            let p = &self.probs[r];
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.q,
                self.n,
                r,
                c,
                p,
                render_decimal(p, self.precision),
                self.precision
            ));
        }
        out
    }
}

/// An exact rational together with a rounded decimal rendering.
#[derive(Debug, Clone, Serialize)]
pub struct ExactValue {
    pub exact: String,
    pub decimal: String,
}

impl ExactValue {
    pub fn new(value: &BigRational, precision: usize) -> Self {
        ExactValue {
            exact: value.to_string(),
            decimal: render_decimal(value, precision),
        }
    }
}

impl Serialize for CountReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View {
            q: u64,
            n: usize,
            precision: usize,
            counts: BTreeMap<usize, String>,
            total: String,
            probs: BTreeMap<usize, ExactValue>,
        }
        View {
            q: self.q,
            n: self.n,
            precision: self.precision,
            counts: self
                .counts
                .iter()
                .map(|(&r, c)| (r, c.to_string()))
                .collect(),
            total: self.total.to_string(),
            probs: self
                .probs
                .iter()
                .map(|(&r, p)| (r, ExactValue::new(p, self.precision)))
                .collect(),
        }
        .serialize(serializer)
    }
}

/// Closed form of `c_r(q,n) / c_b(q,n)` with `b` the baseline of the parity:
///
/// * even: `q^{r/2} / ∏_{j=1}^r (q^j - 1) · ∏_{j=1}^{r/2} (1 - q^{-(m+j)})`
/// * odd:  `(q-1) q^{(r-1)/2} / ∏_{j=1}^r (q^j - 1) · ∏_{j=1}^{(r-1)/2} (1 - q^{-(m+j)})`
pub fn ratio_closed_form(q: u64, n: usize, r: usize) -> Result<BigRational, CountError> {
    check_order(q)?;
    let m = check_pair(n, r)?;
    Ok(closed_form_unchecked(q, m, r))
}

fn closed_form_unchecked(q: u64, m: usize, r: usize) -> BigRational {
    let mut value = limit_ratio_unchecked(q, r);
    let qq = BigInt::from(q);
    for j in 1..=r / 2 {
        let power = num_traits::pow(qq.clone(), m + j);
        value *= BigRational::new(&power - 1, power);
    }
    value
}

/// `c_r(q,n) / c_b(q,n)`, `b ∈ {0, 1}` the smallest dimension of the same
/// parity. The closed form is checked against the quotient of exact counts.
pub fn ratio_finite(q: u64, n: usize, r: usize) -> Result<BigRational, CountError> {
    check_order(q)?;
    check_pair(n, r)?;
    let baseline = Parity::of(n).baseline();
    let quotient = ratio(count_r(q, n, r)?, count_r(q, n, baseline)?);
    let closed = ratio_closed_form(q, n, r)?;
    if quotient != closed {
        return Err(CountError::Invariant(format!(
            "closed-form ratio {closed} differs from count quotient {quotient} at q={q}, n={n}, r={r}"
        )));
    }
    Ok(quotient)
}

fn limit_ratio_unchecked(q: u64, r: usize) -> BigRational {
    let den = q_factorial_range(q, 1, r);
    let num = if r.is_multiple_of(2) {
        pow(q, r / 2)
    } else {
        BigUint::from(q - 1) * pow(q, (r - 1) / 2)
    };
    ratio(num, den)
}

/// `lim_{n→∞} p_r(q,n) / p_b(q,n)` with `b` the baseline of the parity of `r`.
pub fn limit_ratio(q: u64, r: usize) -> Result<BigRational, CountError> {
    check_order(q)?;
    Ok(limit_ratio_unchecked(q, r))
}

/// `q^{r²/2} · c_r(q,n)/c_0(q,n)`; tends to 1 as `q` grows.
///
/// The closed form is a rational function of `q`, so any integer `q ≥ 2` is
/// accepted; for prime powers the value is cross-checked against exact counts.
pub fn asymptotic_deviation(q: u64, n: usize, r: usize) -> Result<BigRational, CountError> {
    if !r.is_multiple_of(2) || !n.is_multiple_of(2) {
        return Err(CountError::ParityMismatch { n, r });
    }
    if q < 2 {
        return Err(CountError::NotPrimePower(q));
    }
    let m = check_pair(n, r)?;
    let ratio = if prime_power(q).is_some() {
        ratio_finite(q, n, r)?
    } else {
        closed_form_unchecked(q, m, r)
    };
    let scale = BigRational::from_integer(BigInt::from(pow(q, r * r / 2)));
    Ok(scale * ratio)
}

/// Limits `p_r(q) = lim_n p_r(q,n)` for one parity, truncated with a
/// certified error bound.
#[derive(Debug, Clone)]
pub struct LimitReport {
    pub q: u64,
    pub parity: Parity,
    pub eps: f64,
    /// Index of the last series term included.
    pub kmax: usize,
    /// Partial sum of the series (`S` for even, `S'` for odd).
    pub series: BigRational,
    /// Upper bound on the omitted tail of the series.
    pub tail_bound: BigRational,
    pub r_cap: usize,
    pub p_limit: BTreeMap<usize, BigRational>,
    pub precision: usize,
}

/// Term `k ≥ 1` of the series: `q^k / ∏_{j=1}^{2k}(q^j-1)` for even parity,
/// `(q-1) q^k / ∏_{j=1}^{2k+1}(q^j-1)` for odd.
pub fn series_term(q: u64, parity: Parity, k: usize) -> BigRational {
    match parity {
        Parity::Even => ratio(pow(q, k), q_factorial_range(q, 1, 2 * k)),
        Parity::Odd => ratio(
            BigUint::from(q - 1) * pow(q, k),
            q_factorial_range(q, 1, 2 * k + 1),
        ),
    }
}

/// Computes `p_b(q) = 1/(1 + S)` (or `1/(1 + S')`) and `p_r(q)` for every
/// `r ≤ r_cap` of the given parity, each within `eps` of the true limit.
///
/// Consecutive series terms shrink by `q / ((q^{2k+1}-1)(q^{2k+2}-1)) ≤ 2/105`,
/// so the tail after term `k` is at most `2 t_{k+1}`; summation stops once
/// that bound drops to `eps / 4`.
pub fn limit_probs(
    q: u64,
    parity: Parity,
    eps: f64,
    r_cap: usize,
) -> Result<LimitReport, CountError> {
    check_order(q)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CountError::InvalidTolerance(eps));
    }
    let eps_exact = BigRational::from_float(eps).ok_or(CountError::InvalidTolerance(eps))?;
    let budget = eps_exact / BigInt::from(4);
    let two = BigRational::from_integer(BigInt::from(2));

    let mut series = BigRational::zero();
    let mut k = 0;
    let tail_bound = loop {
        let next = series_term(q, parity, k + 1);
        let bound = &two * &next;
        if bound <= budget {
            break bound;
        }
        series += next;
        k += 1;
    };

    let base = BigRational::one() / (BigRational::one() + &series);
    let mut p_limit = BTreeMap::new();
    for r in (parity.baseline()..=r_cap).step_by(2) {
        p_limit.insert(r, limit_ratio_unchecked(q, r) * &base);
    }
    Ok(LimitReport {
        q,
        parity,
        eps,
        kmax: k,
        series,
        tail_bound,
        r_cap,
        p_limit,
        precision: DEFAULT_PRECISION,
    })
}

impl LimitReport {
    pub fn with_precision(mut self, precision: usize) -> Self {
        self.precision = precision;
        self
    }

    /// CSV with header `q,parity,r,p_limit,decimal,precision,eps`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,parity,r,p_limit,decimal,precision,eps\n");
        for (r, p) in &self.p_limit {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:e}\n",
                self.q,
                self.parity,
                r,
                p,
                render_decimal(p, self.precision),
                self.precision,
                self.eps
            ));
        }
        out
    }
}

impl Serialize for LimitReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View {
            q: u64,
            parity: Parity,
            eps: f64,
            kmax: usize,
            series: ExactValue,
            tail_bound: ExactValue,
            r_cap: usize,
            precision: usize,
            p_limit: BTreeMap<usize, ExactValue>,
        }
        let p = self.precision;
        View {
            q: self.q,
            parity: self.parity,
            eps: self.eps,
            kmax: self.kmax,
            series: ExactValue::new(&self.series, p),
            tail_bound: ExactValue {
                exact: self.tail_bound.to_string(),
                decimal: format!("{:e}", self.tail_bound.to_f64().unwrap_or(f64::NAN)),
            },
            r_cap: self.r_cap,
            precision: p,
            p_limit: self
                .p_limit
                .iter()
                .map(|(&r, v)| (r, ExactValue::new(v, p)))
                .collect(),
        }
        .serialize(serializer)
    }
}

/// Rounds `value` half away from zero to `digits` decimal places.
pub fn render_decimal(value: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = value.abs() * BigRational::from_integer(scale);
    let rounded = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
    let magnitude = rounded.to_integer().to_string();
    let sign = if value.is_negative() && magnitude.chars().any(|c| c != '0') {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        return format!("{sign}{magnitude}");
    }
    let padded = format!("{magnitude:0>width$}", width = digits + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - digits);
    format!("{sign}{int_part}.{frac_part}")
}
