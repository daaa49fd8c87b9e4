//! Library surface of the `splinecast` command line: ingestion, the
//! run pipeline, report encodings, and plot-data emission.

pub mod emit;
pub mod error;
pub mod ingest;
pub mod report;
pub mod run;
