#![allow(dead_code)]

pub mod fixtures;
pub mod golden;
pub mod oracles;
pub mod stub;
