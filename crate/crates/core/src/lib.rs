pub mod bloore;
pub mod ensemble;
pub mod exactnum;
pub mod moments;
pub mod reconstruct;
pub mod sampler;
pub mod summation;
