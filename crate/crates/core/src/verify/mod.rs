//! Independent checks of a computed phase: Monte Carlo ray tracing through
//! the generalized laws, binning on the sphere, energy balance on subsets of
//! the source, and finite-difference checks of the Jacobian identities.

mod energy;
pub mod frame;
mod histogram;
pub mod jacobian;
mod trace;

pub use energy::{energy_balance, energy_balance_traced, EnergyBalance};
pub use frame::SphericalFrame;
pub use histogram::{density_distance, sphere_histogram, BinIndex, DensityDistance, SphericalHistogram, LINF_MIN_EXPECTED};
pub use jacobian::{jacobian_identity_check, AnalyticPhase, JacobianReport, QuadraticPhase, WavePhase};
pub use trace::{sample_rays, trace, trace_batch, RayBatch, Traced, BLOCK_SIZE};
