//! Dispersion of finite point sets in the unit cube and on the torus.
//!
//! * [`geometry`]: points, axis-parallel boxes and periodic boxes.
//! * [`exact`]: exact (k-)dispersion and torus dispersion by pruned enumeration.
//! * [`nets`]: delta-approximation families of boxes and their verification.
//! * [`bounds`]: closed-form upper and lower bounds on the inverse of minimal dispersion.
//! * [`montecarlo`]: seeded experiments with uniformly random points.
//! * [`io`]: the point-set and net file formats.
//! * [`cli`]: the `dispkit` command line.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod io;
pub mod montecarlo;
pub mod nets;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
pub use exact::{DispersionResult, Witness};
pub use geometry::{ArcKind, AxisBox, PeriodicBox, PointSet, Region};
