//! Polar subcodes with dynamic frozen symbols over extended BCH parent codes.
pub mod binmat;
pub mod construct;
pub mod decode;
pub mod error;
pub mod galois;
pub mod parentcodes;
pub mod polarize;
pub mod pscf;
pub mod simulate;

pub use binmat::BitMatrix;
pub use construct::CodeSpec;
pub use error::{Error, Result};
pub use galois::Field;
pub use polarize::{ConstraintSystem, ReliabilityProfile};
pub use simulate::ChannelSpec;
