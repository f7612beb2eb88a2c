//! Deterministic crowd-and-traffic simulator that writes MOT Challenge
//! sequences, plus the IOU and SORT trackers and CLEAR-MOT evaluation used to
//! study tracking accuracy under varying density and weather.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bbox;
pub mod harness;
pub mod keyval;
pub mod metrics;
pub mod motio;
pub mod sensor;
pub mod sim;
pub mod tracking;
pub mod traffic;
