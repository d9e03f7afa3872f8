pub mod builtins;
pub mod classify;
pub mod error;
pub mod growth;
pub mod measure;
pub mod scalar;
pub mod spectra;
pub mod verify;
pub mod zeros;

pub use error::{Error, Result};
pub use measure::{AffineMap, AtomPiece, LineDir, Matrix, Measure, Point, SegmentPiece};
pub use scalar::ExactScalar;
pub use spectra::{PeriodicSet1D, SpectrumSpec};
pub use verify::{Verdict, VerificationReport};
pub use zeros::CrossConfig;
