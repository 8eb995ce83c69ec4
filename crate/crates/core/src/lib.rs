//! Time-average Value of Information (VoI) at the receiver of a single-server
//! status update queue with packet deadlines.
//!
//! Two independent routes evaluate the same quantity:
//!
//! - [`analytics`]: renewal-reward formulas evaluated by closed forms and
//!   adaptive [`quadrature`];
//! - [`sim`]: a seeded discrete-event simulation that also reports the
//!   average Age of Information (AoI).
//!
//! Three packet management disciplines are supported: no buffer
//! (M/GI/1/1), one FCFS buffer slot (M/GI/1/2) and one replacing buffer slot
//! (M/GI/1/2*).

pub mod analytics;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    Admission, DescendFunction, DescendKind, Discipline, InitialValueDist, Packet, PacketClass, Scenario, ServiceDist,
    ServiceMap, ServiceModel,
};
