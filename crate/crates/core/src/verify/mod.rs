//! Finite checks behind the proven results: term enumeration, the theorem
//! families, the identity suite, property suites and the global valuation formula.

pub mod backing;
pub mod cgen;
pub mod four;
pub mod identities;
pub mod properties;
pub mod single_double;
pub mod report;
pub mod terms;
pub mod worked;

pub use report::{CheckRecord, Report, Status};
pub use terms::{enumerate_min_terms, term_nu, MinTerms, TermKey, TermSum};
