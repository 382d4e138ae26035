//! Wavelet variance ratio tests for serial correlation.
//!
//! A series is split into `2^m` frequency bands by the maximal-overlap
//! discrete wavelet packet transform. Under white noise every band carries
//! an equal share `2^-m` of the energy; the multiple-frequency-band (MFB)
//! test checks that jointly. The level-only (GSM) variant uses the MODWT.

pub mod dist;
pub mod error;
pub mod filters;
pub mod hypothesis;
pub mod longrun;
pub mod sim;
pub mod transform;
pub mod wvr;

pub use error::{Error, Result};
pub use filters::{get_filter, packet_filters, FilterPair, PacketFilterBank, Wavelet};
pub use hypothesis::{
    aq_test, gsm_test, ljung_box, mfb_test, TestKind, TestReport, TestSpec, Variant,
};
pub use longrun::{Bandwidth, HacConfig};
pub use transform::{modwpt, modwt, Series};
