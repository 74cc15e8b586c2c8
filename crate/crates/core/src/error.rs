use thiserror::Error;

use crate::network::BuyerId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid money value {0:?}")]
    InvalidMoney(String),

    #[error("buyer id {0} is out of range for a market with {1} buyers")]
    UnknownBuyer(u32, usize),

    #[error("buyer {0} lists herself as a neighbor")]
    SelfLoop(BuyerId),

    #[error("duplicate neighbor {neighbor} in the neighbor list of {owner}")]
    DuplicateNeighbor { owner: String, neighbor: BuyerId },

    #[error("buyer ids must be dense 0..{expected}; {detail}")]
    BuyerIds { expected: usize, detail: String },

    #[error("negative amount {0} where a nonnegative bid or valuation is required")]
    NegativeAmount(String),

    #[error("report profile has {got} reports but the graph has {expected} buyers")]
    ProfileSize { expected: usize, got: usize },

    #[error("buyer {buyer} diffuses to {target}, which is not one of her neighbors")]
    InfeasibleDiffusion { buyer: BuyerId, target: BuyerId },

    #[error("buyer {buyer} has {size} neighbors, above the enumeration cap of {cap}")]
    EnumerationCap { buyer: BuyerId, size: usize, cap: usize },

    #[error("bid candidates must be nonempty, sorted, distinct and nonnegative")]
    BadBidCandidates,

    #[error("cannot compare nil reports")]
    NilComparison,

    #[error("invalid depth bound {0}; depth must be at least 1")]
    BadDepth(u64),

    #[error("alpha must be nonnegative, got {0}")]
    NegativeAlpha(String),

    #[error("policy `{0}` is not comparison-based and provides no critical-bid method")]
    UnsupportedPolicy(String),

    #[error("policy `{policy}` is not monotonic: buyer {buyer} has an infinite critical bid with empty diffusion but a finite one with her reported diffusion")]
    NonMonotonic { policy: String, buyer: BuyerId },

    #[error("policy `{policy}` gives buyer {buyer} a finite critical bid with empty diffusion but an infinite one with her reported diffusion; the payment is unbounded")]
    UnboundedPayment { policy: String, buyer: BuyerId },

    #[error("policy `{policy}` produced an infeasible allocation: winner {winner} has a nil report")]
    InfeasibleAllocation { policy: String, winner: BuyerId },

    #[error("unknown allocation policy `{0}`")]
    UnknownPolicy(String),

    #[error("unknown payment rule `{0}`")]
    UnknownPayment(String),

    #[error("invalid check configuration: {0}")]
    BadConfig(String),

    #[error("bid grid does not contain the true valuation {valuation} of buyer {buyer}")]
    GridMissingValuation { buyer: BuyerId, valuation: String },

    #[error("invalid generator parameters: {0}")]
    BadGenerator(String),

    #[error("instance format: {0}")]
    Format(String),
}
