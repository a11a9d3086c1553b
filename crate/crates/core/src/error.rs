use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime supported by this build")]
    BadPrime(u32),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("invalid ring: {0}")]
    BadRing(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("read at h^{index} outside the window [{floor}, {prec})")]
    OutsideWindow { index: i32, floor: i32, prec: i32 },
    #[error("pole of order {order} exceeds the valuation floor {floor}")]
    PoleOverflow { order: i32, floor: i32 },
    #[error("window too small to decide: {0}")]
    Undecidable(String),
    #[error("degree overflow in window-truncated ring (K = {0})")]
    Overflow(u32),
    #[error("division by h: valuation {0} is below 1")]
    NotDivisible(i32),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degree bookkeeping: {0}")]
    Degree(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
