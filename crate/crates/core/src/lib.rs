//! Diffusion auctions on social networks.
//!
//! A seller with one item reaches buyers through a social network: each
//! participant reports a bid and chooses which of her neighbors to invite.
//! This crate provides
//!
//! * [`network`]: the graph, reports and the diffusion closure,
//! * [`mechanisms`]: monotonic allocation policies, critical bids, and the
//!   revenue-optimal, alpha-family and VCG payment rules,
//! * [`verifier`]: exhaustive checks of incentive compatibility, individual
//!   rationality and the payment properties behind them, with replayable
//!   counterexamples,
//! * [`generate`] and [`cli`]: seeded instances and the `dak` command-line
//!   front end.
//!
//! All money is exact ([`Money`]); no check uses a tolerance.

pub mod cli;
pub mod error;
pub mod generate;
pub mod instance;
pub mod mechanisms;
pub mod money;
pub mod network;
pub mod verifier;

pub use error::{Error, Result};
pub use instance::Instance;
pub use money::Money;
pub use network::{BuyerId, BuyerSet, Report, ReportProfile, SocialGraph};
