pub mod energy;
pub mod solver;
pub mod state;

pub use energy::{hamiltonian, semiclassical_energy, EnergyReading};
pub use solver::{evolve, nonlinear_pointwise_step, Evolution, Observer, Snapshot, SolverConfig, TrajectorySample};
pub use state::WaveState;
