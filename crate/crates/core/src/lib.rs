//! Λ-coalescents, the ultrametric measure trees they induce, and empirical
//! diagnostics for compactness of the limiting tree.
//!
//! * [`measure`]: finite measures on `[0, 1]` and merger rates `λ_{b,k}`.
//! * [`classification`]: comes down from infinity / dust-free / dust.
//! * [`sim`]: exact (Gillespie) and Poisson-construction simulation.
//! * [`mmspace`]: finite metric measure spaces and their functionals.
//! * [`diagnostics`]: scaling studies across sample sizes.

pub mod classification;
pub mod diagnostics;
pub mod error;
pub mod measure;
pub mod quadrature;
pub mod mmspace;
pub mod rng;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
pub use measure::{parse_measure, Atom, Density, LambdaMeasure, MeasureSpec, WeightedDensity, ZeroBehavior};
