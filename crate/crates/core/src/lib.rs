//! Robustness monitoring for signal temporal logic with averaged temporal
//! operators, plus a black-box falsification loop driven by it.
//!
//! Traces are piecewise-constant multi-channel signals ([`trace::Trace`]).
//! Formulas ([`formula::Formula`]) extend STL with averaged eventually,
//! always, until and release, which reward satisfying a property *early* or
//! *for long*. [`robustness::robust_signal`] computes the positive and
//! negative robustness of a formula as exact piecewise-linear signals in time
//! linear in the trace length.
//!
//! ```
//! use avstl::formula::parse;
//! use avstl::robustness::evaluate;
//! use avstl::trace::Trace;
//!
//! // airbag goes off at t = 2.5: the averaged deadline is met by 75%
//! let trace = Trace::from_csv_reader("time,airbag\n0,-1\n2.5,1\n".as_bytes()).unwrap();
//! let r = evaluate(&trace, &parse("AvF[0,10] airbag").unwrap()).unwrap();
//! assert!((r.pos.value() - 0.75).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod ext;
pub mod falsify;
pub mod formula;
pub mod gen;
pub mod numfmt;
pub mod oracle;
pub mod robustness;
pub mod signal;
pub mod trace;

pub use error::{Error, Result};
pub use ext::ExtendedReal;
pub use formula::{parse, Formula, Interval};
pub use robustness::{evaluate, robust_signal, RobustnessPair, RobustnessSignal};
pub use signal::{FpcSignal, FplSignal, Segment};
pub use trace::Trace;
