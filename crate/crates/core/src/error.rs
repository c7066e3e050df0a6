use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    // presentations
    #[error("presentation is not finite dimensional: no power of x{generator} is a leading monomial")]
    NotFiniteDimensional { generator: usize },
    #[error("presentation is not local: {reason}")]
    NotLocal { reason: String },
    #[error("{n_gens} generators but no relations: the quotient is infinite dimensional")]
    EmptyRelationsWithGenerators { n_gens: usize },
    #[error("polynomial has {found} variables, algebra has {expected} generators")]
    WrongVariableCount { expected: usize, found: usize },
    #[error("operands live in different Weil algebras")]
    AlgebraMismatch,
    #[error("expected {expected} coordinates, got {found}")]
    CoordinateCount { expected: usize, found: usize },
    #[error("element has a nonzero unit coordinate where a nilpotent one is required")]
    NotNilpotent,

    // morphisms
    #[error("expected {expected} generator images, got {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("image of generator x{generator} has nonzero unit coordinate")]
    NotLocalMorphism { generator: usize },
    #[error("relation {relation} does not map to zero")]
    RelationNotKilled { relation: String },
    #[error("target of the first morphism is not the source of the second")]
    CompositionMismatch,

    // expressions
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("variable x{index} used but arity is {arity}")]
    ArityViolation { index: usize, arity: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("exact (rational) mode cannot evaluate {0}")]
    ModeMismatch(String),
    #[error("expression is not a polynomial: {0}")]
    NotPolynomial(String),
    #[error("map has arity {found}, expected {expected}")]
    MapArity { expected: usize, found: usize },

    // laws and limits
    #[error("probe set is not closed: {0}")]
    ProbeSetNotClosed(String),
    #[error("diagram is not connected")]
    NotConnected,
    #[error("diagram edge {edge} does not match its node algebras")]
    EdgeMismatch { edge: usize },
    #[error("limit leaves the category of Weil algebras: {0}")]
    LimitNotWeil(String),
    #[error("cone is not a verified limit: {0}")]
    ConeNotVerified(String),
    #[error("unsupported bundle: {0}")]
    UnsupportedBundle(String),
    #[error("map is not affine: component {component}")]
    NonAffineMap { component: usize },
}
