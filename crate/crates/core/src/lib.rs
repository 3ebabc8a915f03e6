pub mod context;
pub mod error;
pub mod grammar;
pub mod logval;
pub mod poly;
pub mod qcalc;
pub mod qapps;
pub mod qcore;
pub mod qspecial;
pub mod qsymbolic;
pub mod qtransform;
pub mod qtransform2;
pub mod rsexpr;
pub mod scalar;
pub mod verify;
