//! Who/what/when/where extraction from basketball recaps and coupling of the
//! extracted story elements to structured game data.

pub mod classifier;
pub mod coupler;
pub mod domain;
pub mod gamedata;
pub mod grammar;
pub mod lexicon;
pub mod segmenter;
pub mod validation;
