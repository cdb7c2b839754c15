use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument is out of its allowed range.
    InvalidParameter(String),
    /// Instance data violates an indexing or typing invariant.
    InvalidInstance(String),
    /// A compatibility mask admits no feasible model.
    InvalidCompat(String),
    /// A subtour cut over the empty set or the whole node set.
    InvalidCut(String),
    /// Some node does not have exactly two incident edges.
    NotTwoFactor { node: usize, degree: usize },
    /// Edges do not form one alternating cycle over all nodes.
    InvalidCycle(String),
    /// A node sequence does not alternate or does not start on a placeholder.
    InvalidOrder(String),
    UnknownVariable(String),
    /// Instance size outside the range an exhaustive routine supports.
    TooLarge { n: usize, min: usize, max: usize },
    /// No tour satisfies the constraints.
    Infeasible,
    /// The time limit expired before any tour was found.
    TimeoutWithoutSolution,
    /// Internal bookkeeping went wrong; always a bug.
    Inconsistent(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::InvalidInstance(m) => write!(f, "invalid instance: {m}"),
            Error::InvalidCompat(m) => write!(f, "invalid compatibility: {m}"),
            Error::InvalidCut(m) => write!(f, "invalid subtour cut: {m}"),
            Error::NotTwoFactor { node, degree } => {
                write!(f, "not a 2-factor: node {node} has degree {degree}")
            }
            Error::InvalidCycle(m) => write!(f, "invalid cycle: {m}"),
            Error::InvalidOrder(m) => write!(f, "invalid order: {m}"),
            Error::UnknownVariable(m) => write!(f, "unknown variable `{m}`"),
            Error::TooLarge { n, min, max } => {
                write!(f, "n = {n} outside supported range [{min}, {max}]")
            }
            Error::Infeasible => f.write_str("no feasible tour exists"),
            Error::TimeoutWithoutSolution => {
                f.write_str("time limit reached before any tour was found")
            }
            Error::Inconsistent(m) => write!(f, "internal inconsistency: {m}"),
        }
    }
}

impl core::error::Error for Error {}
