//! Caption metrics and their meta-evaluation against human judgments.

pub mod corpus;
pub mod error;
pub mod fusion;
pub mod learned;
pub mod linalg;
pub mod metaeval;
pub mod metrics;
pub mod qualitative;
pub mod textproc;

pub use error::{Error, Result};
