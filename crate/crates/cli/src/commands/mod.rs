pub mod combine;
pub mod emulate;
pub mod fit;
pub mod plotdata;
pub mod serve;
