//! Classical-shadow process tomography on small simulated channels.
//!
//! Choi matrices live on a `2n`-qubit register: the input copy occupies
//! qubits `0..n`, the channel output `n..2n`, and qubit 0 is the most
//! significant tensor factor (the leftmost character of a bitstring).

pub mod acquire;
pub mod channels;
pub mod error;
pub mod gates;
pub mod hamlearn;
pub mod postprocess;
pub mod qmat;
pub mod shadows;

pub use channels::{ChannelSpec, ChoiMatrix};
pub use error::{Error, Result};
pub use qmat::CMatrix;
