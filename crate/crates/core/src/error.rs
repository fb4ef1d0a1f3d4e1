use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("generator index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: i32, rank: usize },
    #[error("invalid letter {0:?} in word")]
    InvalidLetter(char),
    #[error("empty word where a nontrivial element is required")]
    EmptyWord,
    #[error("basis mismatch: rank {left} vs rank {right}")]
    BasisMismatch { left: usize, right: usize },
    #[error("malformed Whitehead move: {0}")]
    MalformedMove(String),
    #[error("multiword is not Whitehead-minimal")]
    NotMinimal,
    #[error("vertex set is not a connected subtree containing the identity: {0}")]
    DisconnectedSubtree(String),
    #[error("edge words have commensurable roots; vertex spaces are not quasi-isometrically embedded")]
    CommensurableRoots,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("torsion in kernel: {0}")]
    TorsionInKernel(String),
    #[error("element has finite order")]
    FiniteOrder,
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Budget exhaustion is reported separately from input errors by the CLI.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
