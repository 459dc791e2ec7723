//! State-vector QAOA simulator and benchmark harness for a constrained EV
//! charging and trip-assignment problem, comparing a binary (one flag per
//! EV-trip pair) and an integer (one multi-level variable per trip) encoding
//! of the trip assignment.

pub mod harness;
pub mod hilbert;
pub mod optimizer;
pub mod oracle;
pub mod problem;
pub mod qaoa;
