//! Operator algebra: second-quantized fermion operators, Pauli sums, the
//! Jordan–Wigner map and excitation-operator pools.

mod fermion;
mod jw;
mod pauli;
mod pool;

pub use fermion::{FermionOperator, Ladder, Occupancy, Spin, SpinOrbital};
pub use jw::jordan_wigner;
pub use pauli::{PauliString, PauliSum};
pub use pool::{
    anti_hermitian, build_pool, momentum_conserved, ExcitationRank, PoolGenerator, PoolKind,
};
