//! Secret-sharing access structures on qudit graph states.

pub mod fq;
pub mod access;
pub mod bounds;
pub mod multigraph;
pub mod oracle;
pub mod search;
