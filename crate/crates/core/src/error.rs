use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `x * hazard(x) < 1` over the whole support, so no reserve price exists.
    #[error("no reserve price: x * hazard(x) stays below 1 up to {searched_to}")]
    NoRoot { searched_to: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The event "every bidder is below the reserve" has (numerically) zero
    /// probability. Callers treat the conditional loss as 0.
    #[error("degenerate conditioning: cdf at reserve is {cdf_at_reserve:e}")]
    DegenerateConditioning { cdf_at_reserve: f64 },

    #[error("no counterexample found for k={k}, m={m} with eps above {floor:e}")]
    SearchExhausted { k: u32, m: u32, floor: f64 },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}
