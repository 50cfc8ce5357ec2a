//! Structured instance events, one JSON object per line.

use std::io::Write;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use tcs_schemes::SchemeId;

use crate::message::InstanceId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Started,
    Finished,
    Failed { reason: String },
    ShareRejected { sender: u16 },
    Late { sender: u16 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Seconds on the manager's clock.
    pub time: f64,
    pub node: u16,
    pub instance: InstanceId,
    pub scheme: SchemeId,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl Event {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("event serialization is infallible")
    }
}

pub trait EventSink: Send + Sync {
    fn emit(&self, event: Event);
}

pub struct NullSink;

impl EventSink for NullSink {
    fn emit(&self, _event: Event) {}
}

/// Buffers events in memory; the bench client drains them.
#[derive(Default)]
pub struct MemorySink {
    events: Mutex<Vec<Event>>,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn drain(&self) -> Vec<Event> {
        std::mem::take(&mut *self.events.lock())
    }

    pub fn snapshot(&self) -> Vec<Event> {
        self.events.lock().clone()
    }
}

impl EventSink for MemorySink {
    fn emit(&self, event: Event) {
        self.events.lock().push(event);
    }
}

/// Writes JSON lines to any writer (a log file, stderr).
pub struct JsonLinesSink<W: Write + Send> {
    out: Mutex<W>,
}

impl<W: Write + Send> JsonLinesSink<W> {
    pub fn new(out: W) -> Self {
        JsonLinesSink { out: Mutex::new(out) }
    }
}

impl<W: Write + Send> EventSink for JsonLinesSink<W> {
    fn emit(&self, event: Event) {
        let mut out = self.out.lock();
        let _ = writeln!(out, "{}", event.to_json_line());
        let _ = out.flush();
    }
}
