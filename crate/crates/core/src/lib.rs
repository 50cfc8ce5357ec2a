//! Round-based threshold protocols and the machinery that runs many of them
//! at once on one party.

pub mod error;
pub mod message;
pub mod orchestration;
pub mod protocol;

pub use error::{OrchestrationError, ProtocolError};
pub use message::{Channel, InstanceId, Payload, ProtocolMessage};
pub use orchestration::{
    Clock, Event, EventKind, EventSink, InstanceManager, InstanceRecord, InstanceState, KeyStore, ManagerConfig,
    ManualClock, MemorySink, NullSink, PollResult, Step, SystemClock, Work,
};
pub use protocol::{FrostProtocol, MessageStats, Progress, SingleRoundProtocol, ThresholdRoundProtocol};
