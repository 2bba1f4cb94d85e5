//! Certification tools: invariant checks, Monte-Carlo hitting estimates,
//! concentration, and local decrease certificates.

pub mod concentration;
pub mod flow;
pub mod mc;
pub mod progress;
pub mod report;
pub mod stats;
pub mod suite;

pub use concentration::{concentration_check, ConcentrationReport};
pub use flow::{local_decrease_certificate, subgradient_flow, DecreaseCertificate, FlowResult, FlowStatus};
pub use mc::{mc_hitting, HittingParams, HittingReport};
pub use progress::{progress_process, ProgressProcess};
pub use report::{CertificateReport, Check};
pub use stats::Proportion;
pub use suite::{inject_slope_fault, invariant_suite, SuiteParams};
