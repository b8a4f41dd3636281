//! Link-level simulator for a dynamic metasurface antenna (DMA) receiver with
//! strong inter-element mutual coupling.
//!
//! * [`physics`]: coupled-scatterer ground truth mapping configurations to channels.
//! * [`optimize`]: configuration strategies (OPT, MAX, LIN, RAND).
//! * [`ofdm`]: QPSK-OFDM transceiver with a narrowband jammer.
//! * [`harness`]: experiment runner and file outputs.

pub mod physics;
pub mod ofdm;
pub mod optimize;
pub mod harness;
pub mod rng;
