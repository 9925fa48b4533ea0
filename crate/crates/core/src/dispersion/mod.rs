//! Material dispersion and guided modes of a circular step-index waveguide.

mod glass;
mod mode;
mod table;

pub use glass::{refractive_index, CladdingModel, SellmeierGlass, SellmeierTerm};
pub use mode::{
    characteristic_residual, solve_mode, solve_neff, CrossSection, FieldModel, ModeFamily, ModeField,
    ModeLabel, ModeSolution, RadialQuadrature, SCAN_POINTS,
};
pub use table::{neff_table, NeffTable};
