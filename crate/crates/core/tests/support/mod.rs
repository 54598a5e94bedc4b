pub mod brute;
pub mod compare;
pub mod gauss;
