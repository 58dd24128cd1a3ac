use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("SingularMetric: determinant {det:e} is at or below 1e-14")]
    SingularMetric { det: f64 },
    #[error("NotSPD: leading minors {minors:?}")]
    NotSpd { minors: [f64; 3] },
    #[error("SingularMap: |det F| = {det:e} is at or below 1e-14")]
    SingularMap { det: f64 },
    #[error("DomainError: point ({x}, {y}, {z}) lies outside the declared domain")]
    OutsideDomain { x: f64, y: f64, z: f64 },
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("DomainConflict: {0}")]
    DomainConflict(String),
    #[error("InvalidDomain: {0}")]
    InvalidDomain(String),
    #[error("NotUnit: |N.N - 1| = {defect:e}")]
    NotUnit { defect: f64 },
    #[error("NotSkew: |K + K^T| = {defect:e}")]
    NotSkew { defect: f64 },
    #[error("NotOrthogonal: |R^T R - I| = {defect:e}")]
    NotOrthogonal { defect: f64 },
    #[error("NotFlat: max |Ric| = {max_ricci:e} at ({x}, {y}, {z})")]
    NotFlat {
        max_ricci: f64,
        x: f64,
        y: f64,
        z: f64,
    },
    #[error("DegenerateDenominator: |g^2 - f h| = {value:e}")]
    DegenerateDenominator { value: f64 },
    #[error("ZeroDenominator: coframe coefficient a or c vanishes")]
    ZeroDenominator,
    #[error("BlowUp: trajectory left the SPD region at Z = {z}")]
    BlowUp { z: f64 },
    #[error("InconsistentInitialData: reduced flatness {value:e} exceeds 1e-8")]
    InconsistentInitialData { value: f64 },
}
