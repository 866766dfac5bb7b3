pub mod augmentation;
pub mod dataset;
pub mod map_oracle;
pub mod pipeline;
pub mod registration;
pub mod tables;
