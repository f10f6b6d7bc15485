pub mod eval;
pub mod gen_data;
pub mod render;
pub mod tidy;
pub mod train;
