use serde::{Deserialize, Serialize};

use super::Group;
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::imaging::Aoi;
use crate::oculomotor::UserId;

/// One client-to-server wire message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Join { session: String, user: UserId, group: Group },
    Gaze { t: i64, x: f64, y: f64 },
    Click { t: i64, x: f64, y: f64 },
    Face { t: i64, present: bool },
    Leave,
}

/// The post-join subset of [`ClientMessage`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClientEvent {
    Gaze { t: i64, x: f64, y: f64 },
    Click { t: i64, x: f64, y: f64 },
    Face { t: i64, present: bool },
    Leave,
}

impl ClientMessage {
    /// Parses one NDJSON line or WebSocket text frame.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text.trim()).map_err(|e| Error::Protocol(e.to_string()))
    }

    pub fn into_event(self) -> Option<ClientEvent> {
        Some(match self {
            ClientMessage::Join { .. } => return None,
            ClientMessage::Gaze { t, x, y } => ClientEvent::Gaze { t, x, y },
            ClientMessage::Click { t, x, y } => ClientEvent::Click { t, x, y },
            ClientMessage::Face { t, present } => ClientEvent::Face { t, present },
            ClientMessage::Leave => ClientEvent::Leave,
        })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("client messages always serialize")
    }
}

impl From<ClientEvent> for ClientMessage {
    fn from(e: ClientEvent) -> Self {
        match e {
            ClientEvent::Gaze { t, x, y } => ClientMessage::Gaze { t, x, y },
            ClientEvent::Click { t, x, y } => ClientMessage::Click { t, x, y },
            ClientEvent::Face { t, present } => ClientMessage::Face { t, present },
            ClientEvent::Leave => ClientMessage::Leave,
        }
    }
}

/// One server-to-client wire message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Joined { slide: String, aois: Vec<Aoi>, feedback: bool },
    PeerRegion { window: u64, aoi: usize, rect: Rect },
    Pace { t: i64, aois: Vec<usize> },
    Error { code: String, msg: String },
    End,
}

impl ServerMessage {
    pub fn error(e: &Error) -> Self {
        ServerMessage::Error {
            code: e.code().to_string(),
            msg: e.to_string(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_messages_parse() {
        let m = ClientMessage::parse(r#"{"type":"join","session":"s1","user":"u1","group":"feedback"}"#).unwrap();
        assert_eq!(
            m,
            ClientMessage::Join {
                session: "s1".into(),
                user: UserId::new("u1"),
                group: Group::Feedback
            }
        );
        assert_eq!(
            ClientMessage::parse(r#"{"type":"gaze","t":33,"x":1.5,"y":2}"#).unwrap(),
            ClientMessage::Gaze { t: 33, x: 1.5, y: 2.0 }
        );
        assert_eq!(
            ClientMessage::parse(r#"{"type":"face","t":1,"present":false}"#).unwrap(),
            ClientMessage::Face { t: 1, present: false }
        );
        assert_eq!(ClientMessage::parse(r#"{"type":"leave"}"#).unwrap(), ClientMessage::Leave);
    }

    #[test]
    fn malformed_is_protocol_error() {
        for bad in ["", "{", r#"{"type":"warp"}"#, r#"{"type":"gaze","t":1}"#, r#"{"type":"gaze","t":"a","x":1,"y":1}"#] {
            assert!(matches!(ClientMessage::parse(bad), Err(Error::Protocol(_))), "{bad}");
        }
    }

    #[test]
    fn server_messages_serialize() {
        let m = ServerMessage::PeerRegion {
            window: 3,
            aoi: 1,
            rect: Rect { x: 1, y: 2, w: 3, h: 4 },
        };
        assert_eq!(m.to_line(), r#"{"type":"peer_region","window":3,"aoi":1,"rect":[1,2,3,4]}"#);
        assert_eq!(ServerMessage::End.to_line(), r#"{"type":"end"}"#);
        assert_eq!(
            ServerMessage::Pace { t: 0, aois: vec![0, 2] }.to_line(),
            r#"{"type":"pace","t":0,"aois":[0,2]}"#
        );
        let e = ServerMessage::error(&Error::DuplicateUser("u1".into()));
        assert_eq!(
            e.to_line(),
            r#"{"type":"error","code":"duplicate_user","msg":"user `u1` already joined"}"#
        );
        let joined = ServerMessage::Joined {
            slide: "s".into(),
            aois: vec![],
            feedback: true,
        };
        assert_eq!(joined.to_line(), r#"{"type":"joined","slide":"s","aois":[],"feedback":true}"#);
    }
}
