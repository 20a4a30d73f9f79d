//! Many-body dynamics of lattice bosons with coherence tracking.
//!
//! The crate simulates bosons hopping on small lattices (a six-site ring of
//! two coupled three-well subsystems, or an open chain of wells) in the full
//! occupation-number basis. Initial states are built as products of
//! independent condensates, each seeded by a discrete Gross-Pitaevskii
//! ground state, and propagated with fixed-step fourth-order Runge-Kutta.
//! Observables center on the reduced single-particle density matrix:
//! filling levels, subsystem and total purity, two-site purity, particle
//! imbalance, and the interference contrast they bound.
//!
//! The `runner` module and the `bhsim` binary wrap all of this into
//! config-driven, reproducible experiment runs with plot-ready output.

pub mod basis;
pub mod error;
pub mod gpe;
mod kernels;
pub mod lattice;
pub mod observables;
pub mod propagate;
pub mod runner;
pub mod state;

pub use basis::{dimension, hop, Basis};
pub use error::{Error, Result};
pub use gpe::{gpe_residual, solve_ground_state, MeanFieldState};
pub use lattice::{
    apply_hamiltonian, chain_spec, dense_hamiltonian, interaction_from_g, ring_spec, LatticeSpec,
    StateVector, DENSE_CAP,
};
pub use observables::{
    contrast, filling_levels, imbalance, purity, spdm, two_site_purity, PurityReport, Spdm,
};
pub use propagate::{
    dense_evolve_oracle, evolve, noninteracting_spdm_oracle, rk4_step, EnergyShift, Observers,
    PropagationPlan, Record, TimeSeries,
};
pub use state::{condensate_state, product_state, CondensateSpec};

#[cfg(test)]
pub(crate) mod testutil {
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::basis::Basis;
    use crate::lattice::StateVector;

    /// Normalized state with reproducible pseudo-random complex amplitudes.
    pub fn random_state(basis: &Basis, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..basis.dimension())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut state = StateVector::from_amplitudes(basis.clone(), amps).unwrap();
        state.normalize();
        state
    }
}
