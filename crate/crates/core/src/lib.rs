//! Exact counting, uniform sampling and brute-force verification of random
//! ungraded chain complexes `(F_q^n, D)` with `D^2 = 0`.

pub mod cli;
pub mod exact_count;
pub mod finite_field;
pub mod linalg;
pub mod oracle;
pub mod sampler;

pub use exact_count::{CountError, CountReport, LimitReport, Parity};
pub use finite_field::{FieldElement, FieldError, FieldSpec};
pub use linalg::{Differential, LinalgError, MatrixGF, NormalForm};
