//! Matrix groups over Z/p^r and their parabolic-level structure:
//! congruence-pattern subgroups, membership predicates, exact counting and
//! enumeration, block factorizations, and Haar volumes normalized by
//! Vol(GL_n(O)) = 1.

mod factorize;
mod mat;
mod spec;
mod volume;

pub use factorize::{block_ldu, iwahori_factorize, modulus_character, x_set_factorize};
pub use mat::{QMat, ResMat};
pub use spec::{gl_count, gl_count_fp, EntryReq, Pattern, SetSpec, Shape, FULL};
pub use volume::{
    big_cell_constant, count, enumerate, volume, volume_identity_check, VolumeIdentityReport,
};
