pub mod bratteli;
pub mod chain;
pub mod error;
pub mod probcore;
pub mod scalar;
pub mod serial;
pub mod standardness;
pub mod transport;
