pub mod basis;
pub mod harness;
pub mod kernels;
pub mod linsys;
pub mod mesh;
pub mod quadrature;
pub mod real;
pub mod solver;

pub use real::Real;

/// Double-precision aliases.
pub type PrimaryMesh = mesh::PrimaryMesh<f64>;
pub type DualMesh = mesh::DualMesh<f64>;
pub type ElementGeometry = mesh::ElementGeometry<f64>;
pub type ReferenceBasis = basis::ReferenceBasis<f64>;
pub type ReferenceTensors = kernels::ReferenceTensors<f64>;
pub type ElementMatrices = kernels::ElementMatrices<f64>;
pub type BlockSparseMatrix = linsys::BlockSparseMatrix<f64>;
pub type Discretization = solver::Discretization<f64>;
pub type SpaceTimeState = solver::SpaceTimeState<f64>;
pub type FluidParams = solver::FluidParams<f64>;
pub type TimeStepControl = solver::TimeStepControl<f64>;
pub type Vec2 = real::Vec2<f64>;
