#![allow(dead_code)]

pub mod escauriaza;
pub mod fd;
