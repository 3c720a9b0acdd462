use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid resolution {0} is below the minimum of 8")]
    Resolution(usize),
    #[error("non-finite field value at vertex ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("grid mismatch: expected n = {expected}, got n = {actual}")]
    GridMismatch { expected: usize, actual: usize },
    #[error("matrix [[{0}, {1}], [{2}, {3}]] is not in SL(2, Z)")]
    NotUnimodular(i64, i64, i64, i64),
    #[error("map does not preserve the grid triangulation")]
    BreaksTriangulation,
    #[error("level {0} coincides with a vertex value; resample")]
    IrregularLevel(f64),
    #[error("expression error: {0}")]
    Expr(String),
    #[error("raster error: {0}")]
    Raster(String),
    #[error("loop is essential; it bounds no disk")]
    EssentialLoop,
    #[error("loop is not on the boundary of the subsurface")]
    NotOnBoundary,
    #[error("subsurfaces are not disjoint")]
    NotDisjoint,
    #[error("topology error: {0}")]
    Topology(String),
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
