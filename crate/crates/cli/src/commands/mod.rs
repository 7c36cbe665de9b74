pub mod broadband;
pub mod compare;
pub mod curve;
pub mod spectrum;
