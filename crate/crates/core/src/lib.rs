//! Discrete measures, curve systems, generalized Young measures and Young varifolds for
//! evaluating generalized Willmore energies in the plane.

pub mod curves;
pub mod error;
pub mod field;
pub mod geom;
pub mod identify;
pub mod io;
pub mod lsq;
pub mod measure;
pub mod radial;
pub mod registry;
pub mod relax;
pub mod scenes;
pub mod spatial;
pub mod sum;
pub mod varifold;
pub mod young;

pub use error::{GwvError, Result};
pub use geom::{Mat2, Rect, Vec2};
