//! Taylor-Hood spaces, quadrature and assembly.

pub mod assembly;
pub mod constraints;
pub mod convection;
pub mod dofmap;
pub mod element;
pub mod field;
pub mod quadrature;
pub mod sparse;

pub use assembly::{
    assemble_bilinear, assemble_scalar, for_each_quad_point, pressure_load, velocity_load,
    AssemblyError, BilinearForm, QuadPoint, ScalarForm,
};
pub use constraints::{apply_constraints, Block, ReducedLinearSystem, ReducedSystem};
pub use convection::{
    assemble_convection, evaluate_trilinear, ConvectionForm, ConvectionMatrices, ConvectionMode,
};
pub use dofmap::{
    build_taylor_hood, BoundaryConditions, ConstrainedSpace, Constraint, Disk, DofError, DofMap,
    DofTarget, ScalarSpace, Trace, VectorFn, VelocityBc,
};
pub use field::{FeField, FieldError, SpaceKind};
pub use quadrature::QuadratureRule;
pub use sparse::{Pattern, SparseMatrix};
