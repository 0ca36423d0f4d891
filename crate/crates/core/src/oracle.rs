//! Brute-force ground truth by exhaustive enumeration.
//!
//! Every `n x n` matrix over `F_q` is visited as a base-`q` integer whose
//! digits are the canonical element indices in row-major order, entry
//! `(0, 0)` most significant. The index range is cut into fixed intervals,
//! scanned in parallel, and the per-interval histograms are added, so the
//! result does not depend on the worker count.
//!
//! Nothing here uses the counting formulas except to compare against them.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact_count::{self, CountError};
use crate::finite_field::{FieldElement, FieldSpec};
use crate::linalg::{Differential, MatrixGF};

/// Absolute ceiling on the number of matrices a single scan may visit.
pub const HARD_COST_LIMIT: u64 = 1 << 36;
/// Default ceiling, overridable per call.
pub const DEFAULT_MAX_COST: u64 = 1 << 25;
/// Index intervals per scan.
const CHUNKS: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("scan of {cost} matrices exceeds the limit of {limit}")]
    TooLarge { cost: String, limit: u64 },
    #[error("the {0} scan requires q = 2")]
    NotBinary(&'static str),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

/// Which scan implementation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanPath {
    /// `Binary` when `q = 2`, otherwise `Generic`.
    Auto,
    /// Field-table arithmetic on element indices; any `q`.
    Generic,
    /// Rows as bit masks; `q = 2` only.
    Binary,
}

#[derive(Debug, Clone)]
pub struct EnumOptions {
    pub max_cost: u64,
    /// Zero means the rayon default.
    pub workers: usize,
    pub path: ScanPath,
    /// Run the normal-form round trip on every differential found.
    pub check_normal_form: bool,
    pub record_timing: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            max_cost: DEFAULT_MAX_COST,
            workers: 0,
            path: ScanPath::Auto,
            check_normal_form: false,
            record_timing: true,
        }
    }
}

impl EnumOptions {
    pub fn with_max_cost(mut self, max_cost: u64) -> Self {
        self.max_cost = max_cost;
        self
    }

    pub fn with_path(mut self, path: ScanPath) -> Self {
        self.path = path;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_normal_form_check(mut self) -> Self {
        self.check_normal_form = true;
        self
    }

    pub fn without_timing(mut self) -> Self {
        self.record_timing = false;
        self
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T, OracleError> {
        if self.workers == 0 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| OracleError::Pool(e.to_string()))?;
        Ok(pool.install(job))
    }
}

/// `q^{n^2}`, or an error when it exceeds the requested or absolute limit.
pub fn scan_cost(q: u64, n: usize, max_cost: u64) -> Result<u64, OracleError> {
    let limit = max_cost.min(HARD_COST_LIMIT);
    let cost = BigUint::from(q).pow((n * n) as u32);
    match u64::try_from(&cost) {
        Ok(c) if c <= limit => Ok(c),
        _ => Err(OracleError::TooLarge {
            cost: cost.to_string(),
            limit,
        }),
    }
}

fn elapsed_ms(start: Instant, record: bool) -> Option<u64> {
    record.then(|| start.elapsed().as_millis() as u64)
}

fn ser_biguint_map<S: Serializer>(
    map: &BTreeMap<usize, BigUint>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.collect_map(map.iter().map(|(k, v)| (k, v.to_string())))
}

fn ser_biguint<S: Serializer>(value: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&value.to_string())
}

/// Census of all differentials on `F_q^n` by exhaustive scan.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub q: u64,
    pub n: usize,
    pub total_matrices: u64,
    pub differential_count: u64,
    pub counts: BTreeMap<usize, u64>,
    #[serde(serialize_with = "ser_biguint_map")]
    pub expected: BTreeMap<usize, BigUint>,
    pub agrees: bool,
    pub path: ScanPath,
    pub normal_form_checked: u64,
    pub normal_form_failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Debug, Default, Clone)]
struct Tally {
    counts: BTreeMap<usize, u64>,
    nf_checked: u64,
    nf_failures: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (r, c) in other.counts {
            *self.counts.entry(r).or_insert(0) += c;
        }
        self.nf_checked += other.nf_checked;
        self.nf_failures += other.nf_failures;
        self
    }
}

/// Iterator state over a contiguous interval of matrix indices.
struct Odometer {
    digits: Vec<FieldElement>,
    q: u32,
}

impl Odometer {
    fn starting_at(mut index: u64, q: u32, len: usize) -> Self {
        let mut digits = vec![FieldElement::ZERO; len];
        for slot in digits.iter_mut().rev() {
            *slot = FieldElement::from_index((index % q as u64) as u32);
            index /= q as u64;
        }
        Odometer { digits, q }
    }

    fn advance(&mut self) {
        for slot in self.digits.iter_mut().rev() {
            let next = slot.index() + 1;
            if next < self.q {
                *slot = FieldElement::from_index(next);
                return;
            }
            *slot = FieldElement::ZERO;
        }
    }
}

fn chunk_bounds(total: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let chunks = CHUNKS.min(total);
    let width = total.div_ceil(chunks);
    (0..chunks)
        .into_par_iter()
        .map(move |c| (c * width, ((c + 1) * width).min(total)))
        .filter(|(lo, hi)| lo < hi)
}

/// `(A B)_{ij}` over row-major entry slices of square size `n`.
#[inline]
fn product_entry(
    spec: &FieldSpec,
    a: &[FieldElement],
    b: &[FieldElement],
    n: usize,
    i: usize,
    j: usize,
) -> FieldElement {
    (0..n).fold(FieldElement::ZERO, |acc, k| {
        spec.add(acc, spec.mul(a[i * n + k], b[k * n + j]))
    })
}

/// Rank of a square matrix of side `n ≤ 6` without heap allocation.
fn small_rank(spec: &FieldSpec, m: &[FieldElement], n: usize) -> usize {
    let mut a = [FieldElement::ZERO; 36];
    a[..n * n].copy_from_slice(&m[..n * n]);
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..n).find(|&i| !a[i * n + col].is_zero()) else {
            continue;
        };
        for j in 0..n {
            a.swap(rank * n + j, pivot * n + j);
        }
        let inv = spec.inv(a[rank * n + col]).expect("pivot is nonzero");
        for i in rank + 1..n {
            let factor = spec.mul(a[i * n + col], inv);
            if factor.is_zero() {
                continue;
            }
            for j in col..n {
                let sub = spec.mul(factor, a[rank * n + j]);
                a[i * n + j] = spec.sub(a[i * n + j], sub);
            }
        }
        rank += 1;
    }
    rank
}

fn squares_to_zero(spec: &FieldSpec, m: &[FieldElement], n: usize) -> bool {
    (0..n).all(|i| (0..n).all(|j| product_entry(spec, m, m, n, i, j).is_zero()))
}

fn scan_generic(spec: &FieldSpec, n: usize, total: u64, check_nf: bool) -> Tally {
    chunk_bounds(total)
        .map(|(lo, hi)| {
            let mut tally = Tally::default();
            let mut odo = Odometer::starting_at(lo, spec.order(), n * n);
            for _ in lo..hi {
                if squares_to_zero(spec, &odo.digits, n) {
                    let r = n - 2 * small_rank(spec, &odo.digits, n);
                    *tally.counts.entry(r).or_insert(0) += 1;
                    if check_nf {
                        let matrix = MatrixGF::from_entries(spec, n, n, odo.digits.clone())
                            .expect("odometer digits are valid entries");
                        tally.nf_checked += 1;
                        let ok = Differential::new(matrix)
                            .map(|d| d.normal_form().conjugates(&d))
                            .unwrap_or(false);
                        if !ok {
                            tally.nf_failures += 1;
                        }
                    }
                }
                odo.advance();
            }
            tally
        })
        .reduce(Tally::default, Tally::merge)
}

/// Rows of the matrix with index `k`: row `i` holds entry `(i, j)` at bit
/// `n - 1 - j`, matching the generic digit order.
#[inline]
fn binary_rows(k: u64, n: usize, rows: &mut [u64]) {
    let mask = (1u64 << n) - 1;
    for (i, row) in rows.iter_mut().enumerate() {
        *row = (k >> (n * (n - 1 - i))) & mask;
    }
}

/// Row `i` of `A B` for bit-row matrices.
#[inline]
fn binary_product_row(a_row: u64, b: &[u64], n: usize) -> u64 {
    let mut acc = 0;
    let mut bits = a_row;
    while bits != 0 {
        let b_idx = bits.trailing_zeros() as usize;
        acc ^= b[n - 1 - b_idx];
        bits &= bits - 1;
    }
    acc
}

fn binary_rank(rows: &[u64]) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &row in rows {
        let mut v = row;
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                rank += 1;
                break;
            }
            v ^= basis[top];
        }
    }
    rank
}

fn binary_to_matrix(spec: &FieldSpec, rows: &[u64], n: usize) -> MatrixGF {
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            FieldElement::from_index(((rows[i] >> (n - 1 - j)) & 1) as u32)
        })
        .collect();
    MatrixGF::from_entries(spec, n, n, entries).expect("bits are valid F_2 entries")
}

fn scan_binary(spec: &FieldSpec, n: usize, total: u64, check_nf: bool) -> Tally {
    chunk_bounds(total)
        .map(|(lo, hi)| {
            let mut tally = Tally::default();
            let mut rows = vec![0u64; n];
            for k in lo..hi {
                binary_rows(k, n, &mut rows);
                if rows
                    .iter()
                    .all(|&row| binary_product_row(row, &rows, n) == 0)
                {
                    let r = n - 2 * binary_rank(&rows);
                    *tally.counts.entry(r).or_insert(0) += 1;
                    if check_nf {
                        tally.nf_checked += 1;
                        let ok = Differential::new(binary_to_matrix(spec, &rows, n))
                            .map(|d| d.normal_form().conjugates(&d))
                            .unwrap_or(false);
                        if !ok {
                            tally.nf_failures += 1;
                        }
                    }
                }
            }
            tally
        })
        .reduce(Tally::default, Tally::merge)
}

/// Counts every differential on `F_q^n` by scanning all `q^{n^2}` matrices
/// and compares the histogram with the exact counts.
pub fn enumerate_differentials(
    spec: &FieldSpec,
    n: usize,
    opts: &EnumOptions,
) -> Result<OracleReport, OracleError> {
    let q = spec.order() as u64;
    let total = scan_cost(q, n, opts.max_cost)?;
    let path = match opts.path {
        ScanPath::Auto if q == 2 => ScanPath::Binary,
        ScanPath::Auto => ScanPath::Generic,
        ScanPath::Binary if q != 2 => return Err(OracleError::NotBinary("bit-row")),
        other => other,
    };
    let start = Instant::now();
    let tally = opts.run(|| match path {
        ScanPath::Binary => scan_binary(spec, n, total, opts.check_normal_form),
        _ => scan_generic(spec, n, total, opts.check_normal_form),
    })?;
    let wall_time_ms = elapsed_ms(start, opts.record_timing);

    let expected = exact_count::count_report(q, n)?.counts;
    let agrees = expected.len() == tally.counts.len()
        && expected
            .iter()
            .all(|(r, c)| tally.counts.get(r).map(|&v| BigUint::from(v)) == Some(c.clone()));
    Ok(OracleReport {
        q,
        n,
        total_matrices: total,
        differential_count: tally.counts.values().sum(),
        counts: tally.counts,
        expected,
        agrees,
        path,
        normal_form_checked: tally.nf_checked,
        normal_form_failures: tally.nf_failures,
        wall_time_ms,
    })
}

/// Invertible matrices commuting with the canonical differential.
#[derive(Debug, Clone, Serialize)]
pub struct CentralizerReport {
    pub q: u64,
    pub m: usize,
    pub r: usize,
    pub total_matrices: u64,
    pub count: u64,
    #[serde(serialize_with = "ser_biguint")]
    pub expected: BigUint,
    pub agrees: bool,
    /// Commuting invertible matrices that are not of the form
    /// `X11 = X33, X21 = X31 = X32 = 0` in the (image, homology, preimage)
    /// block layout.
    pub block_form_violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

fn commutes(spec: &FieldSpec, x: &[FieldElement], d: &[FieldElement], n: usize) -> bool {
    (0..n).all(|i| {
        (0..n).all(|j| product_entry(spec, x, d, n, i, j) == product_entry(spec, d, x, n, i, j))
    })
}

fn has_block_form(x: &[FieldElement], n: usize, m: usize, r: usize) -> bool {
    let at = |i: usize, j: usize| x[i * n + j];
    let (b2, b3) = (m, m + r);
    let diagonal_match = (0..m).all(|i| (0..m).all(|j| at(i, j) == at(b3 + i, b3 + j)));
    let zero_block = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        rows.clone()
            .all(|i| cols.clone().all(|j| at(i, j).is_zero()))
    };
    diagonal_match
        && zero_block(b2..b3, 0..b2)
        && zero_block(b3..n, 0..b2)
        && zero_block(b3..n, b2..b3)
}

/// Counts `X ∈ GL_n(q)` with `X D = D X` for the canonical differential with
/// `m` two-dimensional and `r` one-dimensional blocks, by exhaustive scan.
pub fn enumerate_centralizer(
    spec: &FieldSpec,
    m: usize,
    r: usize,
    opts: &EnumOptions,
) -> Result<CentralizerReport, OracleError> {
    let q = spec.order() as u64;
    let n = 2 * m + r;
    let total = scan_cost(q, n, opts.max_cost)?;
    let canonical = Differential::canonical(spec, m, r);
    let d = canonical.matrix().entries().to_vec();
    let start = Instant::now();
    let (count, violations) = opts.run(|| {
        chunk_bounds(total)
            .map(|(lo, hi)| {
                let mut odo = Odometer::starting_at(lo, spec.order(), n * n);
                let (mut count, mut violations) = (0u64, 0u64);
                for _ in lo..hi {
                    let x = &odo.digits;
                    if commutes(spec, x, &d, n) && small_rank(spec, x, n) == n {
                        count += 1;
                        if !has_block_form(x, n, m, r) {
                            violations += 1;
                        }
                    }
                    odo.advance();
                }
                (count, violations)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    })?;
    let expected = exact_count::centralizer_order(q, m, r)?;
    Ok(CentralizerReport {
        q,
        m,
        r,
        total_matrices: total,
        count,
        agrees: BigUint::from(count) == expected,
        expected,
        block_form_violations: violations,
        wall_time_ms: elapsed_ms(start, opts.record_timing),
    })
}

/// Number of involutions `A^2 = I` of `F_2^n` against the number of
/// differentials `c(2, n)`.
#[derive(Debug, Clone, Serialize)]
pub struct InvolutionReport {
    pub n: usize,
    pub total_matrices: u64,
    pub count: u64,
    #[serde(serialize_with = "ser_biguint")]
    pub differentials: BigUint,
    pub agrees: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

/// Scans all `n x n` matrices over `F_2` for involutions.
pub fn involution_census(
    spec: &FieldSpec,
    n: usize,
    opts: &EnumOptions,
) -> Result<InvolutionReport, OracleError> {
    if spec.order() != 2 {
        return Err(OracleError::NotBinary("involution"));
    }
    let total = scan_cost(2, n, opts.max_cost)?;
    let start = Instant::now();
    let count = opts.run(|| {
        chunk_bounds(total)
            .map(|(lo, hi)| {
                let mut rows = vec![0u64; n];
                let mut count = 0u64;
                for k in lo..hi {
                    binary_rows(k, n, &mut rows);
                    let is_involution = rows
                        .iter()
                        .enumerate()
                        .all(|(i, &row)| binary_product_row(row, &rows, n) == 1 << (n - 1 - i));
                    count += u64::from(is_involution);
                }
                count
            })
            .sum::<u64>()
    })?;
    let differentials = exact_count::count_report(2, n)?.total;
    Ok(InvolutionReport {
        n,
        total_matrices: total,
        count,
        agrees: BigUint::from(count) == differentials,
        differentials,
        wall_time_ms: elapsed_ms(start, opts.record_timing),
    })
}

/// Every oracle check up to a given dimension.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub q: u64,
    pub max_n: usize,
    pub differentials: Vec<OracleReport>,
    pub centralizers: Vec<CentralizerReport>,
    pub involutions: Vec<InvolutionReport>,
    pub all_agree: bool,
}

/// Runs the differential census for `1 ≤ n ≤ max_n`, the centralizer scan
/// for every `2m + r ≤ max_n` with `m + r ≥ 1`, and for `q = 2` the
/// involution census. All costs are checked before any scan starts.
pub fn verify_all(
    spec: &FieldSpec,
    max_n: usize,
    opts: &EnumOptions,
) -> Result<VerifyReport, OracleError> {
    let q = spec.order() as u64;
    scan_cost(q, max_n, opts.max_cost)?;
    let mut differentials = Vec::new();
    let mut centralizers = Vec::new();
    let mut involutions = Vec::new();
    for n in 1..=max_n {
        differentials.push(enumerate_differentials(spec, n, opts)?);
        for m in 0..=n / 2 {
            centralizers.push(enumerate_centralizer(spec, m, n - 2 * m, opts)?);
        }
        if q == 2 {
            involutions.push(involution_census(spec, n, opts)?);
        }
    }
    let all_agree = differentials
        .iter()
        .all(|d| d.agrees && d.normal_form_failures == 0)
        && centralizers
            .iter()
            .all(|c| c.agrees && c.block_form_violations == 0)
        && involutions.iter().all(|i| i.agrees);
    Ok(VerifyReport {
        q,
        max_n,
        differentials,
        centralizers,
        involutions,
        all_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::from_order(q).unwrap()
    }

    fn quiet() -> EnumOptions {
        EnumOptions::default().without_timing()
    }

    #[test]
    fn small_censuses() {
        let rep = enumerate_differentials(&f(2), 2, &quiet()).unwrap();
        assert_eq!(rep.counts, BTreeMap::from([(0, 3), (2, 1)]));
        assert_eq!((rep.differential_count, rep.total_matrices), (4, 16));
        assert!(rep.agrees);

        let rep = enumerate_differentials(&f(2), 3, &quiet()).unwrap();
        assert_eq!(rep.counts, BTreeMap::from([(1, 21), (3, 1)]));
        assert_eq!((rep.differential_count, rep.total_matrices), (22, 512));

        let rep = enumerate_differentials(&f(3), 2, &quiet()).unwrap();
        assert_eq!(rep.counts, BTreeMap::from([(0, 8), (2, 1)]));
        assert_eq!((rep.differential_count, rep.total_matrices), (9, 81));
        assert!(rep.agrees);
    }

    #[test]
    fn binary_and_generic_paths_agree() {
        for n in 1..=4 {
            let generic = quiet().with_path(ScanPath::Generic);
            let binary = quiet().with_path(ScanPath::Binary);
            let a = enumerate_differentials(&f(2), n, &generic).unwrap();
            let b = enumerate_differentials(&f(2), n, &binary).unwrap();
            assert_eq!(a.counts, b.counts, "n={n}");
            assert_eq!(a.path, ScanPath::Generic);
            assert_eq!(b.path, ScanPath::Binary);
        }
        assert!(matches!(
            enumerate_differentials(&f(3), 2, &quiet().with_path(ScanPath::Binary)),
            Err(OracleError::NotBinary(_))
        ));
    }

    #[test]
    fn binary_rows_match_generic_digits() {
        let spec = f(2);
        let n = 3;
        let mut rows = vec![0; n];
        for k in [0u64, 1, 5, 0b100_010_001, 511] {
            binary_rows(k, n, &mut rows);
            let odo = Odometer::starting_at(k, 2, n * n);
            let from_bits = binary_to_matrix(&spec, &rows, n);
            assert_eq!(from_bits.entries(), &odo.digits[..]);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let a = enumerate_differentials(&f(3), 3, &quiet().with_workers(1)).unwrap();
        let b = enumerate_differentials(&f(3), 3, &quiet().with_workers(3)).unwrap();
        assert_eq!(a.counts, b.counts);
        assert!(a.agrees);
    }

    #[test]
    fn normal_forms_of_every_small_differential() {
        let rep = enumerate_differentials(&f(3), 3, &quiet().with_normal_form_check()).unwrap();
        assert_eq!(rep.normal_form_checked, rep.differential_count);
        assert_eq!(rep.normal_form_failures, 0);
    }

    #[test]
    fn centralizers() {
        let rep = enumerate_centralizer(&f(2), 1, 0, &quiet()).unwrap();
        assert_eq!(rep.count, 2);
        assert!(rep.agrees);
        let rep = enumerate_centralizer(&f(2), 0, 2, &quiet()).unwrap();
        assert_eq!(rep.count, 6);
        let rep = enumerate_centralizer(&f(2), 1, 1, &quiet()).unwrap();
        assert_eq!(rep.count, 8);
        assert_eq!(rep.block_form_violations, 0);
    }

    #[test]
    fn stack_rank_matches_elimination() {
        let spec = f(3);
        let n = 3;
        let mut odo = Odometer::starting_at(0, 3, n * n);
        for _ in 0..3u64.pow(9) {
            let m = MatrixGF::from_entries(&spec, n, n, odo.digits.clone()).unwrap();
            assert_eq!(small_rank(&spec, &odo.digits, n), m.rank());
            odo.advance();
        }
    }

    #[test]
    fn block_form_detection() {
        // X = I except X21 != 0 in the m = 1, r = 1 layout
        let mut x = vec![FieldElement::ZERO; 9];
        for i in 0..3 {
            x[i * 3 + i] = FieldElement::ONE;
        }
        assert!(has_block_form(&x, 3, 1, 1));
        x[3] = FieldElement::ONE;
        assert!(!has_block_form(&x, 3, 1, 1));
        x[3] = FieldElement::ZERO;
        x[8] = FieldElement::from_index(2);
        assert!(!has_block_form(&x, 3, 1, 1));
    }

    #[test]
    fn involutions() {
        for (n, expected) in [(1, 1), (2, 4), (3, 22)] {
            let rep = involution_census(&f(2), n, &quiet()).unwrap();
            assert_eq!(rep.count, expected);
            assert!(rep.agrees);
        }
        assert!(matches!(
            involution_census(&f(3), 2, &quiet()),
            Err(OracleError::NotBinary(_))
        ));
    }

    #[test]
    fn feasibility_guard() {
        assert!(matches!(
            enumerate_differentials(&f(2), 6, &quiet()),
            Err(OracleError::TooLarge { .. })
        ));
        assert!(matches!(
            scan_cost(2, 7, u64::MAX),
            Err(OracleError::TooLarge {
                limit: HARD_COST_LIMIT,
                ..
            })
        ));
        assert_eq!(scan_cost(2, 6, u64::MAX).unwrap(), 1 << 36);
        assert!(matches!(
            verify_all(&f(2), 12, &quiet()),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn verify_small() {
        let rep = verify_all(&f(3), 2, &quiet().with_normal_form_check()).unwrap();
        assert!(rep.all_agree);
        assert_eq!(rep.differentials.len(), 2);
        // (m, r) = (0,1), (0,2), (1,0)
        assert_eq!(rep.centralizers.len(), 3);
        assert!(rep.involutions.is_empty());
    }
}
