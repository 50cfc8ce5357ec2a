//! Instance manager, key store, clocks and the event log.

mod clock;
mod events;
mod keystore;
mod manager;

pub use clock::{Clock, ManualClock, SystemClock};
pub use events::{Event, EventKind, EventSink, JsonLinesSink, MemorySink, NullSink};
pub use keystore::KeyStore;
pub use manager::{
    InstanceManager, InstanceRecord, InstanceState, ManagerConfig, ManagerCounters, PollResult, Step, Work,
};
