pub mod evaluate;
pub mod reproduce;
pub mod solve;
pub mod train;
