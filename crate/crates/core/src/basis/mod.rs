//! Directional bases over the sphere of incoming light.
//!
//! Conventions: `+y` is up. Lat-long maps have `width = 2·height`; row `j`
//! covers polar angle θ ∈ [jπ/H, (j+1)π/H] measured from `+y`, column `i`
//! covers azimuth φ ∈ [2πi/W, 2π(i+1)/W), and a direction is
//! `(sin θ cos φ, cos θ, sin θ sin φ)`.

mod direction;
mod envmap;
mod sh;
mod softcube;

pub use direction::Direction;
pub use envmap::EnvironmentMap;
pub use sh::{eval_irradiance_sh, project_sh9, sh9_basis, Sh9};
pub use softcube::{eval_softcube, split_envmap, SoftCubeBasis, CUBE_FACES, FACE_NAMES};
