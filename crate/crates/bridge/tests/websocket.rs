mod common;

use std::time::Duration;

use exswarm_bridge::protocol::{decode_ack, decode_error, ErrorCode};
use exswarm_bridge::{
    decode_snapshot, encode_command, start, ClientCommand, OperatorMessage, ServeOptions, ServerHandle, Snapshot,
};
use exswarm_core::swarm::PostureCommand;
use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn server(tick_rate: f64, grace: Duration) -> ServerHandle {
    let opts = ServeOptions {
        port: 0,
        tick_rate,
        disconnect_grace: grace,
        ..ServeOptions::default()
    };
    start(common::setup(12, 3), opts).await.unwrap()
}

async fn connect(h: &ServerHandle) -> Ws {
    let (ws, _) = connect_async(format!("ws://{}/ws", h.local_addr())).await.unwrap();
    ws
}

async fn next_text(ws: &mut Ws) -> String {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("server went quiet")
            .expect("stream ended")
            .unwrap();
        if let Message::Text(t) = msg {
            return t.to_string();
        }
    }
}

async fn next_snapshot(ws: &mut Ws) -> Snapshot {
    loop {
        if let Ok(s) = decode_snapshot(&next_text(ws).await) {
            return s;
        }
    }
}

async fn send(ws: &mut Ws, tick: u64, message: OperatorMessage) {
    let text = encode_command(&ClientCommand { tick, message });
    ws.send(Message::Text(text.into())).await.unwrap();
}

#[tokio::test]
async fn posture_visible_within_two_ticks() {
    let h = server(20.0, Duration::from_secs(30)).await;
    let mut ws = connect(&h).await;
    for trial in 0..5 {
        let seen = next_snapshot(&mut ws).await;
        let command = if trial % 2 == 0 { PostureCommand::Contract } else { PostureCommand::Disperse };
        send(&mut ws, seen.tick, OperatorMessage::Posture { command }).await;
        let applied = loop {
            let s = next_snapshot(&mut ws).await;
            if s.posture == Some(command) {
                break s;
            }
        };
        assert!(applied.tick - seen.tick <= 2, "sent after tick {} visible at {}", seen.tick, applied.tick);
    }
    h.shutdown().await.unwrap();
}

#[tokio::test]
async fn malformed_message_gets_error_and_session_continues() {
    let h = server(50.0, Duration::from_secs(30)).await;
    let mut ws = connect(&h).await;
    let before = next_snapshot(&mut ws).await;
    ws.send(Message::Text("{not json".into())).await.unwrap();
    ws.send(Message::Text(r#"{"type":"command","tick":0,"payload":{"kind":"warp"}}"#.into()))
        .await
        .unwrap();
    let mut errors = Vec::new();
    while errors.len() < 2 {
        if let Ok((_, e)) = decode_error(&next_text(&mut ws).await) {
            errors.push(e.code);
        }
    }
    assert_eq!(errors, vec![ErrorCode::Malformed, ErrorCode::Malformed]);

    send(&mut ws, before.tick, OperatorMessage::Posture { command: PostureCommand::Contract }).await;
    let ack = loop {
        if let Ok((_, a)) = decode_ack(&next_text(&mut ws).await) {
            break a;
        }
    };
    assert_eq!(ack.kind, "posture");
    assert_eq!(ack.client_tick, before.tick);
    let after = next_snapshot(&mut ws).await;
    assert!(after.tick > before.tick);
    let session = h.shutdown().await.unwrap();
    assert_eq!(session.journal().len(), 1);
}

#[tokio::test]
async fn invalid_command_is_rejected_with_structured_error() {
    let h = server(50.0, Duration::from_secs(30)).await;
    let mut ws = connect(&h).await;
    let limb = PostureCommand::ExtendLimb { bearing: 0.0, length: 1e6 };
    send(&mut ws, 0, OperatorMessage::Posture { command: limb }).await;
    let err = loop {
        if let Ok((_, e)) = decode_error(&next_text(&mut ws).await) {
            break e;
        }
    };
    assert_eq!(err.code, ErrorCode::InvalidCommand);
    let session = h.shutdown().await.unwrap();
    assert!(session.journal().is_empty());
}

#[tokio::test]
async fn pause_freezes_tick_while_streaming() {
    let h = server(50.0, Duration::from_secs(30)).await;
    let mut ws = connect(&h).await;
    let s = next_snapshot(&mut ws).await;
    send(&mut ws, s.tick, OperatorMessage::Pause).await;
    let frozen = loop {
        let s = next_snapshot(&mut ws).await;
        if s.paused {
            break s;
        }
    };
    for _ in 0..10 {
        assert_eq!(next_snapshot(&mut ws).await, frozen);
    }
    send(&mut ws, frozen.tick, OperatorMessage::Resume).await;
    let resumed = loop {
        let s = next_snapshot(&mut ws).await;
        if !s.paused {
            break s;
        }
    };
    assert_eq!(resumed.tick, frozen.tick + 1);
    h.shutdown().await.unwrap();
}

#[tokio::test]
async fn disconnect_pauses_after_grace() {
    let h = server(50.0, Duration::from_millis(200)).await;
    let mut ws = connect(&h).await;
    next_snapshot(&mut ws).await;
    ws.close(None).await.unwrap();
    drop(ws);
    tokio::time::sleep(Duration::from_millis(700)).await;
    let mut ws = connect(&h).await;
    let a = next_snapshot(&mut ws).await;
    let b = next_snapshot(&mut ws).await;
    assert!(a.paused);
    assert_eq!(a.tick, b.tick);
    let session = h.shutdown().await.unwrap();
    assert!(session.journal().iter().any(|e| e.message == OperatorMessage::Pause));
    exswarm_bridge::SessionLog::of(&session).verify().unwrap();
}

#[tokio::test]
async fn schema_route_serves_protocol() {
    let h = server(20.0, Duration::from_secs(30)).await;
    let mut stream = TcpStream::connect(h.local_addr()).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream
        .write_all(b"GET /schema HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut body = String::new();
    stream.read_to_string(&mut body).await.unwrap();
    assert!(body.starts_with("HTTP/1.1 200"));
    assert!(body.contains("\"snapshot\""));
    h.shutdown().await.unwrap();
}
