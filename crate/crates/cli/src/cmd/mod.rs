pub mod embed;
pub mod eulerian;
pub mod export;
pub mod metrics;
pub mod simulate;
pub mod standardness;
