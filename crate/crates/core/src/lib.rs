//! Short-support dual windows for Gabor frames generated by compactly
//! supported windows.
//!
//! * [`window`]: catalog windows and exact evaluators.
//! * [`membership`]: numerical checks of the window class `V_{N,a}`.
//! * [`dual`]: pointwise `3x3` synthesis of a dual window on `[-3a/2, 3a/2]`.
//! * [`duality`]: independent verification of the duality conditions.
//! * [`atlas`]: classification of lattice parameters `(a, b)`.

pub mod atlas;
pub mod dual;
pub mod duality;
pub mod error;
pub mod exec;
pub mod grid;
pub mod io;
pub mod membership;
pub mod svg;
pub mod window;

pub use atlas::{classify, scan_region, AtlasOptions, GaborParams, LatticeRange, Param, RegionClassification, Rule, Status};
pub use dual::{build_g, det_g, det_scan, minors, synthesize_dual, DualResult, GMatrix};
pub use duality::{duality_residuals, DualityReport};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::GridFunction;
pub use membership::{check_axioms, check_cor19, check_lemma45_extension, check_prop41, MembershipReport};
pub use window::{make_window, sample, RealFn, Window, WindowKind, WindowSpec};
