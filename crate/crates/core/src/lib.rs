//! Routing of quantum circuits onto architectures whose CNOTs only run along directed
//! couplings, by per-layer A* search over SWAP insertions.
//!
//! The pipeline is [`qasm::parse_circuit`] → [`mapper::map_circuit`] → [`emit::assemble`],
//! with [`verify`] checking the result.

pub mod circuit;
pub mod coupling;
pub mod emit;
pub mod mapper;
pub mod qasm;
pub mod verify;

pub use circuit::{Circuit, Gate, Layer};
pub use coupling::CouplingMap;
pub use emit::{assemble, to_qasm, MappedCircuit};
pub use mapper::{map_circuit, MappedPlan, MapperConfig, Mapping, Strategy};
