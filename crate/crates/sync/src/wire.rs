//! Binary bundle encoding.
//!
//! Every frame is length-prefixed; integers are big-endian and ids are UTF-8.
//!
//! ```text
//! size  field
//! 4     frame length N: u32, number of bytes after this field
//! 4     magic "RPMB"
//! 1     format version = 1
//! 16    bundle id (UUID bytes)
//! 2+L   origin: u16 length, UTF-8 bytes
//! 1     destination tag: 0 = node, 1 = broadcast
//! 2+L   destination node: u16 length, UTF-8 bytes (tag 0 only)
//! 1     payload kind: 0 = response_set, 1 = observation, 2 = ack
//! 1     priority: 0 = routine, 1 = elevated
//! 8     created_at: i64 milliseconds since the Unix epoch
//! 8     lamport: u64
//! 8     ttl_seconds: u64
//! 4     hop_count: u32
//! 4+P   payload: u32 length, bytes
//! ```
//!
//! A message body carrying several bundles is the plain concatenation of
//! their frames.

use chrono::DateTime;
use thiserror::Error;
use uuid::Uuid;

use crate::bundle::{Bundle, BundleId, Destination, NodeId, PayloadKind, Priority};

pub const MAGIC: &[u8; 4] = b"RPMB";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("frame truncated")]
    Truncated,
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("invalid UTF-8 in {0}")]
    InvalidUtf8(&'static str),
    #[error("invalid {field} tag {value}")]
    InvalidTag { field: &'static str, value: u8 },
    #[error("frame length {declared} does not match content length {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("{0} too long to encode")]
    TooLong(&'static str),
    #[error("timestamp out of range")]
    BadTimestamp,
}

fn put_str(out: &mut Vec<u8>, s: &str, field: &'static str) -> Result<(), WireError> {
    let len = u16::try_from(s.len()).map_err(|_| WireError::TooLong(field))?;
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

pub fn encode(bundle: &Bundle) -> Result<Vec<u8>, WireError> {
    let mut body = Vec::with_capacity(80 + bundle.payload.len());
    body.extend_from_slice(MAGIC);
    body.push(FORMAT_VERSION);
    body.extend_from_slice(bundle.id.0.as_bytes());
    put_str(&mut body, bundle.origin.as_str(), "origin")?;
    match &bundle.destination {
        Destination::Node(n) => {
            body.push(0);
            put_str(&mut body, n.as_str(), "destination")?;
        }
        Destination::Broadcast => body.push(1),
    }
    body.push(match bundle.kind {
        PayloadKind::ResponseSet => 0,
        PayloadKind::Observation => 1,
        PayloadKind::Ack => 2,
    });
    body.push(match bundle.priority {
        Priority::Routine => 0,
        Priority::Elevated => 1,
    });
    body.extend_from_slice(&bundle.created_at.timestamp_millis().to_be_bytes());
    body.extend_from_slice(&bundle.lamport.to_be_bytes());
    body.extend_from_slice(&bundle.ttl_seconds.to_be_bytes());
    body.extend_from_slice(&bundle.hop_count.to_be_bytes());
    let plen = u32::try_from(bundle.payload.len()).map_err(|_| WireError::TooLong("payload"))?;
    body.extend_from_slice(&plen.to_be_bytes());
    body.extend_from_slice(&bundle.payload);

    let flen = u32::try_from(body.len()).map_err(|_| WireError::TooLong("frame"))?;
    let mut out = Vec::with_capacity(4 + body.len());
    out.extend_from_slice(&flen.to_be_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn encode_all<'a>(bundles: impl IntoIterator<Item = &'a Bundle>) -> Result<Vec<u8>, WireError> {
    let mut out = Vec::new();
    for b in bundles {
        out.extend_from_slice(&encode(b)?);
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        let end = self.pos.checked_add(n).ok_or(WireError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(WireError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], WireError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn string(&mut self, field: &'static str) -> Result<String, WireError> {
        let len = u16::from_be_bytes(self.array()?) as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| WireError::InvalidUtf8(field))
    }
}

/// Decodes one frame from the front of `buf`, returning the bundle and the
/// number of bytes consumed.
pub fn decode(buf: &[u8]) -> Result<(Bundle, usize), WireError> {
    let mut r = Reader { buf, pos: 0 };
    let declared = u32::from_be_bytes(r.array()?) as usize;
    let frame = r.take(declared)?;
    let mut r = Reader { buf: frame, pos: 0 };

    if r.take(4)? != MAGIC {
        return Err(WireError::BadMagic);
    }
    let version = r.u8()?;
    if version != FORMAT_VERSION {
        return Err(WireError::UnsupportedVersion(version));
    }
    let id = BundleId(Uuid::from_bytes(r.array()?));
    let origin = NodeId::new(r.string("origin")?);
    let destination = match r.u8()? {
        0 => Destination::Node(NodeId::new(r.string("destination")?)),
        1 => Destination::Broadcast,
        value => {
            return Err(WireError::InvalidTag {
                field: "destination",
                value,
            })
        }
    };
    let kind = match r.u8()? {
        0 => PayloadKind::ResponseSet,
        1 => PayloadKind::Observation,
        2 => PayloadKind::Ack,
        value => {
            return Err(WireError::InvalidTag {
                field: "payload kind",
                value,
            })
        }
    };
    let priority = match r.u8()? {
        0 => Priority::Routine,
        1 => Priority::Elevated,
        value => {
            return Err(WireError::InvalidTag {
                field: "priority",
                value,
            })
        }
    };
    let created_ms = i64::from_be_bytes(r.array()?);
    let created_at = DateTime::from_timestamp_millis(created_ms).ok_or(WireError::BadTimestamp)?;
    let lamport = u64::from_be_bytes(r.array()?);
    let ttl_seconds = u64::from_be_bytes(r.array()?);
    let hop_count = u32::from_be_bytes(r.array()?);
    let plen = u32::from_be_bytes(r.array()?) as usize;
    let payload = r.take(plen)?.to_vec();
    if r.pos != declared {
        return Err(WireError::LengthMismatch {
            declared,
            actual: r.pos,
        });
    }
    Ok((
        Bundle {
            id,
            origin,
            destination,
            kind,
            payload,
            created_at,
            lamport,
            ttl_seconds,
            priority,
            hop_count,
        },
        4 + declared,
    ))
}

/// Decodes a concatenation of frames.
pub fn decode_all(mut buf: &[u8]) -> Result<Vec<Bundle>, WireError> {
    let mut out = Vec::new();
    while !buf.is_empty() {
        let (b, used) = decode(buf)?;
        out.push(b);
        buf = &buf[used..];
    }
    Ok(out)
}
