//! Framed, ordered, bidirectional byte channels for the two-party
//! protocols: an in-process pair backed by queues and a TCP stream
//! wrapper. Both count bytes per direction for the cost reports.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, Sender};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("channel closed by peer")]
    Closed,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown message type tag {0:#04x}")]
    UnknownType(u8),
    #[error("expected message {expected:?}, received {got:?}")]
    UnexpectedMessage { expected: MsgType, got: MsgType },
}

/// One-byte message tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MsgType {
    Circuit = 0x01,
    GarbledMaterial = 0x02,
    Labels = 0x03,
    Ot = 0x04,
    PublicKey = 0x05,
    HybridR1 = 0x10,
    HybridR2 = 0x11,
    HybridR3 = 0x12,
    HybridR4 = 0x13,
    TestDecode = 0x7f,
}

impl MsgType {
    pub fn from_tag(tag: u8) -> Result<Self, TransportError> {
        Ok(match tag {
            0x01 => MsgType::Circuit,
            0x02 => MsgType::GarbledMaterial,
            0x03 => MsgType::Labels,
            0x04 => MsgType::Ot,
            0x05 => MsgType::PublicKey,
            0x10 => MsgType::HybridR1,
            0x11 => MsgType::HybridR2,
            0x12 => MsgType::HybridR3,
            0x13 => MsgType::HybridR4,
            0x7f => MsgType::TestDecode,
            other => return Err(TransportError::UnknownType(other)),
        })
    }
}

/// `type(1) + len(4, big-endian) + payload`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub ty: MsgType,
    pub payload: Vec<u8>,
}

impl Message {
    pub fn new(ty: MsgType, payload: Vec<u8>) -> Self {
        Message { ty, payload }
    }

    pub fn frame_len(&self) -> usize {
        5 + self.payload.len()
    }

    fn to_frame(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.frame_len());
        out.push(self.ty as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }
}

/// Per-direction accounting, itemized by message type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransportStats {
    /// Framed bytes (payload plus 5-byte header) per direction.
    pub sent_bytes: usize,
    pub received_bytes: usize,
    pub sent_messages: usize,
    pub received_messages: usize,
    /// Payload bytes by message tag (framing excluded).
    pub sent_by_type: HashMap<u8, usize>,
    pub received_by_type: HashMap<u8, usize>,
}

impl TransportStats {
    fn record_sent(&mut self, msg: &Message) {
        self.sent_bytes += msg.frame_len();
        self.sent_messages += 1;
        *self.sent_by_type.entry(msg.ty as u8).or_default() += msg.payload.len();
    }

    fn record_received(&mut self, msg: &Message) {
        self.received_bytes += msg.frame_len();
        self.received_messages += 1;
        *self.received_by_type.entry(msg.ty as u8).or_default() += msg.payload.len();
    }
}

pub trait Transport: Send {
    fn send(&mut self, msg: &Message) -> Result<(), TransportError>;
    fn recv(&mut self) -> Result<Message, TransportError>;
    fn stats(&self) -> &TransportStats;

    /// Receive and require a specific message type.
    fn expect(&mut self, ty: MsgType) -> Result<Message, TransportError> {
        let msg = self.recv()?;
        if msg.ty != ty {
            return Err(TransportError::UnexpectedMessage { expected: ty, got: msg.ty });
        }
        Ok(msg)
    }
}

/// In-process transport over paired unbounded queues.
pub struct InProcTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    stats: TransportStats,
}

impl InProcTransport {
    /// Two connected endpoints.
    pub fn pair() -> (InProcTransport, InProcTransport) {
        let (tx_ab, rx_ab) = channel();
        let (tx_ba, rx_ba) = channel();
        (
            InProcTransport { tx: tx_ab, rx: rx_ba, stats: TransportStats::default() },
            InProcTransport { tx: tx_ba, rx: rx_ab, stats: TransportStats::default() },
        )
    }
}

impl Transport for InProcTransport {
    fn send(&mut self, msg: &Message) -> Result<(), TransportError> {
        self.tx.send(msg.to_frame()).map_err(|_| TransportError::Closed)?;
        self.stats.record_sent(msg);
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, TransportError> {
        let frame = self.rx.recv().map_err(|_| TransportError::Closed)?;
        let msg = parse_frame(&frame)?;
        self.stats.record_received(&msg);
        Ok(msg)
    }

    fn stats(&self) -> &TransportStats {
        &self.stats
    }
}

fn parse_frame(frame: &[u8]) -> Result<Message, TransportError> {
    if frame.len() < 5 {
        return Err(TransportError::Closed);
    }
    let ty = MsgType::from_tag(frame[0])?;
    let len = u32::from_be_bytes(frame[1..5].try_into().unwrap()) as usize;
    debug_assert_eq!(len, frame.len() - 5);
    Ok(Message::new(ty, frame[5..].to_vec()))
}

/// Framed TCP transport.
pub struct TcpTransport {
    stream: TcpStream,
    stats: TransportStats,
}

impl TcpTransport {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self, TransportError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(TcpTransport { stream, stats: TransportStats::default() })
    }

    /// Accepts a single connection on `addr`.
    pub fn listen(addr: impl ToSocketAddrs) -> Result<Self, TransportError> {
        let listener = TcpListener::bind(addr)?;
        let (stream, _) = listener.accept()?;
        stream.set_nodelay(true)?;
        Ok(TcpTransport { stream, stats: TransportStats::default() })
    }

    pub fn from_stream(stream: TcpStream) -> Result<Self, TransportError> {
        stream.set_nodelay(true)?;
        Ok(TcpTransport { stream, stats: TransportStats::default() })
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, msg: &Message) -> Result<(), TransportError> {
        self.stream.write_all(&msg.to_frame())?;
        self.stats.record_sent(msg);
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, TransportError> {
        let mut header = [0u8; 5];
        self.stream.read_exact(&mut header)?;
        let ty = MsgType::from_tag(header[0])?;
        let len = u32::from_be_bytes(header[1..5].try_into().unwrap()) as usize;
        let mut payload = vec![0u8; len];
        self.stream.read_exact(&mut payload)?;
        let msg = Message::new(ty, payload);
        self.stats.record_received(&msg);
        Ok(msg)
    }

    fn stats(&self) -> &TransportStats {
        &self.stats
    }
}
