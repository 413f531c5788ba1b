//! Message taxonomy and the per-message metadata the queue uses to make
//! replacement decisions.

use std::fmt;
use std::str::FromStr;

use crate::error::TraceError;

/// The three kinds of traffic exchanged between tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageKind {
    /// A state description; obsolete as soon as a newer one from the same
    /// sender exists.
    Status,
    /// An instruction; acknowledged by the application, never obsolete.
    Command,
    /// An occurrence notification; never obsolete, no application ack.
    Event,
}

impl MessageKind {
    pub const ALL: [MessageKind; 3] = [
        MessageKind::Status,
        MessageKind::Command,
        MessageKind::Event,
    ];

    /// Whether the application layer expects an acknowledgement.
    pub fn requires_ack(self) -> bool {
        matches!(self, MessageKind::Command)
    }

    /// Whether a newer message of this kind may replace an older one.
    pub fn replaceable(self) -> bool {
        matches!(self, MessageKind::Status)
    }

    /// One-letter code used in trace files.
    pub fn code(self) -> char {
        match self {
            MessageKind::Status => 'S',
            MessageKind::Command => 'C',
            MessageKind::Event => 'E',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c {
            "S" => Some(MessageKind::Status),
            "C" => Some(MessageKind::Command),
            "E" => Some(MessageKind::Event),
            _ => None,
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MessageKind::Status => "status",
            MessageKind::Command => "command",
            MessageKind::Event => "event",
        };
        f.write_str(name)
    }
}

/// Returns `(requires_ack, replaceable)` for a kind.
pub fn classify(kind: MessageKind) -> (bool, bool) {
    (kind.requires_ack(), kind.replaceable())
}

/// Identity of the task or node that produced a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SenderId(pub u32);

impl fmt::Display for SenderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A unit of traffic. Times are simulation seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub seq: u64,
    pub sender: SenderId,
    pub kind: MessageKind,
    pub size_bytes: u32,
    pub t_created: f64,
    pub t_enqueued: Option<f64>,
    pub t_dequeued: Option<f64>,
}

impl Message {
    pub fn new(
        seq: u64,
        sender: SenderId,
        kind: MessageKind,
        size_bytes: u32,
        t_created: f64,
    ) -> Self {
        assert!(size_bytes > 0, "message size must be positive");
        Message {
            seq,
            sender,
            kind,
            size_bytes,
            t_created,
            t_enqueued: None,
            t_dequeued: None,
        }
    }

    pub fn status(sender: u32, seq: u64) -> Self {
        Message::new(seq, SenderId(sender), MessageKind::Status, 1, 0.0)
    }

    pub fn command(sender: u32, seq: u64) -> Self {
        Message::new(seq, SenderId(sender), MessageKind::Command, 1, 0.0)
    }

    pub fn event(sender: u32, seq: u64) -> Self {
        Message::new(seq, SenderId(sender), MessageKind::Event, 1, 0.0)
    }

    pub fn is_status(&self) -> bool {
        self.kind == MessageKind::Status
    }

    pub fn size_bits(&self) -> u64 {
        u64::from(self.size_bytes) * 8
    }

    /// Time spent waiting in a queue, if the message has been dequeued.
    pub fn time_in_queue(&self) -> Option<f64> {
        Some(self.t_dequeued? - self.t_enqueued?)
    }
}

/// True iff both messages are status updates from the same sender.
pub fn same_sender_status_pair(a: &Message, b: &Message) -> bool {
    a.is_status() && b.is_status() && a.sender == b.sender
}

/// One line of a trace file: `t_send,sender_id,seq,kind,size_bytes`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t_send: f64,
    pub message: Message,
}

impl TraceRecord {
    pub fn new(t_send: f64, message: Message) -> Self {
        TraceRecord { t_send, message }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.message;
        write!(
            f,
            "{},{},{},{},{}",
            self.t_send,
            m.sender,
            m.seq,
            m.kind.code(),
            m.size_bytes
        )
    }
}

impl FromStr for TraceRecord {
    type Err = TraceError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.trim().split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(TraceError::FieldCount(fields.len()));
        }
        let bad = |field: &'static str| TraceError::BadField {
            field,
            value: line.trim().to_string(),
        };
        let t_send: f64 = fields[0].parse().map_err(|_| bad("t_send"))?;
        if !t_send.is_finite() || t_send < 0.0 {
            return Err(bad("t_send"));
        }
        let sender: u32 = fields[1].parse().map_err(|_| bad("sender_id"))?;
        let seq: u64 = fields[2].parse().map_err(|_| bad("seq"))?;
        let kind = MessageKind::from_code(fields[3]).ok_or_else(|| bad("kind"))?;
        let size_bytes: u32 = fields[4].parse().map_err(|_| bad("size_bytes"))?;
        if size_bytes == 0 {
            return Err(bad("size_bytes"));
        }
        Ok(TraceRecord {
            t_send,
            message: Message::new(seq, SenderId(sender), kind, size_bytes, t_send),
        })
    }
}

/// Parses a whole trace, skipping blank lines and `#` comments. Line numbers
/// in errors are 1-based.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec = trimmed
            .parse::<TraceRecord>()
            .map_err(|e| TraceError::Line {
                line: i + 1,
                source: Box::new(e),
            })?;
        out.push(rec);
    }
    Ok(out)
}

/// Renders records one per line with LF endings.
pub fn write_trace(records: &[TraceRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}
