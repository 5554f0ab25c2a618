//! Elementary automorphisms of C^N and finite words of them.

mod deviation;
mod letter;
pub mod poly;
mod wire;
mod word;

pub use deviation::{sup_deviation, DeviationEstimate};
pub use letter::{ElementaryAut, Frame};
pub use poly::Poly;
pub use wire::{load_word, save_word, word_from_str, word_to_string, WireError};
pub use word::{ApplyError, AutWord, ESCAPE_THRESHOLD};
