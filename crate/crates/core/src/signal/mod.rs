//! Detection signals of the interferometric setup.

pub mod dyson;
pub mod gated;
pub mod gate;
pub mod hom;
pub mod misc;
pub mod scan;
pub mod spdc;

pub use dyson::{all_fourth_order, FourthOrderResult};
pub use gate::{DetectionGate, GateKind};
pub use gated::{
    exchange_cross_term, fixed_delay_scan, fixed_delay_signal, gated_coincidence, time_frequency_coincidence,
    time_frequency_map, CenterScan, GatedConfig,
};
pub use hom::{hom_coincidence, otoc_term, Contribution, HomConfig};
pub use misc::{phase_matching, retarded_field_contribution};
pub use scan::SignalScan;
pub use spdc::{narrowband_spdc_coincidence, NarrowbandResult};
