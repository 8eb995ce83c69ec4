//! Event trace of a simulation run.

use std::fmt;

/// Server occupancy: idle, busy with an empty buffer, busy with a full one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ServerState {
    Idle,
    Busy1,
    Busy2,
}

impl ServerState {
    pub const ALL: [ServerState; 3] = [ServerState::Idle, ServerState::Busy1, ServerState::Busy2];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ServerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ServerState::Idle => "I",
            ServerState::Busy1 => "B1",
            ServerState::Busy2 => "B2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A packet is generated.
    Arrive,
    /// The admission policy turned the packet away.
    Reject,
    /// Dropped on a full system, or replaced in the buffer.
    Drop,
    /// Enters service.
    Start,
    /// Service completed; the packet reaches the receiver.
    Depart,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Arrive => "arrive",
            EventKind::Reject => "reject",
            EventKind::Drop => "drop",
            EventKind::Start => "start",
            EventKind::Depart => "depart",
        })
    }
}

/// One event; `state` is the server state just before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    pub packet: u64,
    pub state: ServerState,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9} {} {} {}", self.time, self.kind, self.packet, self.state)
    }
}
