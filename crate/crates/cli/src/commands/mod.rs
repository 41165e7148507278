pub mod generate;
pub mod learn;
pub mod report;
pub mod verify;
