//! Dense kernels for the small projected matrices.

pub mod hessenberg;
pub mod mat;
pub mod qr_sweep;
pub mod svd;
pub mod tridiag;

pub use hessenberg::{general_eigenvalues, hessenberg_eig, hessenberg_eigenvalues, hessenberg_reduce, EigPair, Hessenberg};
pub use mat::Mat;
pub use qr_sweep::shifted_qr_sweep;
pub use svd::{smallest_singular_triplet, SingularTriplet};
pub use tridiag::{Indefinite, SymTridiag, TridiagLdlt};
