pub mod error;
pub mod jets;
pub mod linalg;
pub mod metric;
pub mod norden;
pub mod base;
pub mod catalog;
pub mod chart;
pub mod connection;
pub mod curvature;
pub mod frame;
pub mod tensor;
pub mod suite;
