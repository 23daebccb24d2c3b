//! Certification and falsification of positivity properties for the radial
//! kernel family `f_r(x) = (1 - |x|) / (1 - |x|^r)` and its reciprocal.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] evaluates `f_r`, `g_r = 1/f_r`, `h_r(s) = f_r(sqrt s)`, their
//!   derivatives and the complex quotient used by the Pick probe.
//! * [`poly`] runs the exact Descartes sign analysis of the numerators of
//!   `f''` and `f f'' - f'^2` over arbitrary-precision rationals.
//! * [`matrix`] builds kernel matrices on point configurations and decides
//!   psd / cnd / infinite divisibility by symmetric eigensolves.
//! * [`probes`] holds function-level probes (complete monotonicity, Bernstein,
//!   Pick, log-convexity, Polya, growth, quadrature identities).
//! * [`lift`] turns Hankel violations of `h_r` into explicit configurations.
//! * [`radial`] samples radial Fourier transforms (Bochner's criterion).
//! * [`search`] runs sweep and bisection campaigns on the open range of `r`.
//! * [`reproduce`] is the fixed suite of claims replayed by the CLI.

pub mod bessel;
pub mod error;
pub mod kernel;
pub mod lift;
pub mod matrix;
pub mod poly;
pub mod precise;
pub mod probes;
pub mod quadrature;
pub mod radial;
pub mod reproduce;
pub mod search;

pub use error::{Error, Result};
pub use kernel::{
    eval_f, eval_f_complex, eval_f_prime, eval_f_second, eval_g, eval_h, Direction, EvalGrid,
    EvalRow, ExactRatio, KernelParams, PickPair, RadialKernel,
};
pub use matrix::{
    build_kernel_matrix, cnd_verdict, hadamard_power, infdiv_probe, min_eigenvalue, psd_verdict,
    ConfigRef, Generator, PointConfig, PositivityVerdict, Status, Subspace, SymMatrix,
};
pub use poly::{RationalPoly, SignReport, TheoremVerdict};
pub use probes::{ProbeReport, ProbeVerdict};
pub use search::{CampaignPlan, SearchRecord};
pub use reproduce::{ClaimRow, ReproduceOptions, RowStatus};
