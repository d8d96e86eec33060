//! Withdrawal-capacity quantification for data centers on radial grids and
//! allocation of the resulting capacity products by simultaneous ascending
//! auction.
//!
//! - [`network`]: rooted radial trees and their path (shift-factor) matrices.
//! - [`risk`]: scenario sets, box bounds, empirical CVaR.
//! - [`qp`]: separable convex QP / LP engine with KKT certification.
//! - [`capacity`]: firm (robust) and flexible (CVaR) capacity models.
//! - [`auction`]: valuations, demand, the ascending auction, and equilibrium checks.
//! - [`sweep`]: randomized instance generators and property sweeps.

pub mod auction;
pub mod capacity;
pub mod linalg;
pub mod network;
pub mod qp;
pub mod risk;
pub mod sweep;

pub use linalg::DenseMatrix;
