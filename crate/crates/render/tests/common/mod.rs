#![allow(dead_code)]

pub mod glsl;
