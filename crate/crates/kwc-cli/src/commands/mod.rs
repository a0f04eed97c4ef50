pub mod denoise;
pub mod elpf_check;
pub mod gamma_check;
pub mod metric_demo;
pub mod sigma_table;
pub mod staircase;
