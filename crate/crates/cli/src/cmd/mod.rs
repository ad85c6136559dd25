pub mod mps_check;
pub mod percolate;
pub mod sample;
pub mod threshold;
pub mod verify;
