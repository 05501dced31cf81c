pub mod classes;
pub mod exact;
pub mod nonexist;
pub mod pipeline;
pub mod poly;
pub mod seidel;
pub mod tpenum;
