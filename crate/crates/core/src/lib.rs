//! Hierarchical Laplacians on homogeneous ultrametric spaces.
//!
//! A homogeneous ultrametric space is a nested hierarchy of balls, with
//! levels indexed by ℤ (perfect spaces like the p-adic line) or ℕ (discrete
//! groups like direct sums and the symmetric group) and a fixed number
//! of successors per level. A strictly decreasing eigenvalue sequence λ_k
//! determines the hierarchical Laplacian, whose heat kernel is an explicit
//! spectral series. This crate provides:
//!
//! * exact finite-window realizations of the operator and its eigenfunctions
//!   ([`window`]);
//! * certified evaluation of the on-diagonal kernel, spectral step functions,
//!   Legendre transform, and doubling/order diagnostics ([`heat`]);
//! * the log-periodic oscillation envelope of the p-adic fractional
//!   Laplacian, with its stationary-point analysis and large-p limits
//!   ([`padic`]);
//! * the diverging envelope pair and saddle machinery of factorial-volume
//!   hierarchies on the symmetric group ([`sinf`]);
//! * isotropic random walks on discrete ultrametric groups with a dense
//!   convolution oracle and reproducible parallel Monte-Carlo ([`walk`]);
//! * a declarative JSON configuration layer shared by the CLI ([`config`]).

// negated comparisons like `!(x > 0.0)` are deliberate NaN-rejecting guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod group;
pub mod heat;
pub mod numerics;
pub mod padic;
pub mod rng;
pub mod rules;
pub mod sinf;
pub mod space;
pub mod walk;
pub mod window;

pub use error::{Error, Result};
pub use heat::{Certified, DoublingReport, DoublingVerdict, HeatKernelEvaluator, SpectralStep};
pub use padic::{Envelope, PAdicModel, StationaryPoints, TimeDirection, TwoExponentModel};
pub use rules::{Domain, SequenceRule, SlowlyVarying};
pub use sinf::{SaddleState, SymmetricModel};
pub use space::{
    validate_profile, CaseKind, EigenvalueProfile, HomogeneousSpace, ProfileReport, Provenance,
};
pub use walk::{
    convolution_oracle, exact_return, finite_spectral_return, sample_step, simulate_return,
    EstimateReport, FiniteGroup, GroupKind, StepDistribution, TailPolicy, WalkConfig,
};
pub use window::{
    eigenfunction, laplacian_matrix, BallAddress, TreeFunction, Window, WindowOperator,
};
