#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bilinear;
pub mod certifier;
pub mod interval;
pub mod kgfun;
pub mod sharpness;
