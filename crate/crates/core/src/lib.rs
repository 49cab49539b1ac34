pub mod dsl;
pub mod model;
pub mod elaborate;
pub mod simulate;
pub mod conform;
pub mod check;
