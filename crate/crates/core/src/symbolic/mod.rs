//! Exact symbolic dynamics: eventually periodic bi-infinite sequences and
//! memory-1 subshifts of finite type.

mod seq;
mod sft;

pub use seq::{dyadic, shift_metric, BiInfSeq};
pub(crate) use seq::symbol_char;
pub use sft::{
    dyadic_radius, expansive_constant_sft, homoclinic_pair_fullshift, round_down_dyadic, shadow_sft,
    shadow_sft_tailed, SftSystem, SHIFT_EXPANSIVE_CONSTANT,
};
