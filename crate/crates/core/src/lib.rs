pub mod linalg;
pub mod generate;
pub mod model;
pub mod dynamics;
pub mod measure;
pub mod transform;
pub mod cli;
