//! WebSocket server around a [`Session`].
//!
//! One task owns the session and ticks it at a fixed rate. Client sockets
//! forward decoded commands to that task over a channel and receive
//! snapshots from a broadcast channel, so command order is arrival order
//! at the tick task.

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::task::JoinHandle;
use tokio::time::{Instant, MissedTickBehavior};
use tower_http::services::ServeDir;

use crate::protocol::{decode_command, encode_ack, encode_error, encode_snapshot, Ack, ClientCommand, OperatorMessage, ProtocolError, SCHEMA};
use crate::session::{Session, SessionSetup};
use crate::BridgeError;

pub const DEFAULT_PORT: u16 = 8787;
pub const DEFAULT_TICK_RATE: f64 = 20.0;
pub const DEFAULT_GRACE: Duration = Duration::from_secs(5);
pub const PORT_ENV: &str = "SWARM_BRIDGE_PORT";

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub host: IpAddr,
    /// 0 asks the OS for a free port.
    pub port: u16,
    /// Ticks per second.
    pub tick_rate: f64,
    /// Static files served at `/`.
    pub ui_dir: Option<PathBuf>,
    /// With no client connected for this long, the session pauses.
    pub disconnect_grace: Duration,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: DEFAULT_PORT,
            tick_rate: DEFAULT_TICK_RATE,
            ui_dir: None,
            disconnect_grace: DEFAULT_GRACE,
        }
    }
}

/// Port from the flag, then `SWARM_BRIDGE_PORT`, then the default.
pub fn resolve_port(flag: Option<u16>) -> Result<u16, BridgeError> {
    if let Some(p) = flag {
        return Ok(p);
    }
    match std::env::var(PORT_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| BridgeError::Setup(format!("{PORT_ENV}={v:?} is not a port number"))),
        Err(_) => Ok(DEFAULT_PORT),
    }
}

enum Inbound {
    Connected,
    Disconnected,
    Command {
        command: ClientCommand,
        reply: mpsc::UnboundedSender<String>,
    },
}

struct Shared {
    inbound: mpsc::UnboundedSender<Inbound>,
    outbound: broadcast::Sender<Arc<str>>,
    tick: AtomicU64,
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    ticker: JoinHandle<Result<Session, BridgeError>>,
    http: JoinHandle<std::io::Result<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops ticking and returns the session for inspection or logging.
    pub async fn shutdown(mut self) -> Result<Session, BridgeError> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        let session = self.ticker.await.map_err(|e| BridgeError::Runtime(e.to_string()))?;
        self.http.abort();
        session
    }
}

/// Binds the listener and starts ticking. Must run inside a tokio runtime.
pub async fn start(setup: SessionSetup, opts: ServeOptions) -> Result<ServerHandle, BridgeError> {
    if !(opts.tick_rate.is_finite() && opts.tick_rate > 0.0) {
        return Err(BridgeError::Setup(format!("tick rate {} must be > 0", opts.tick_rate)));
    }
    let session = Session::new(setup)?;
    let (in_tx, in_rx) = mpsc::unbounded_channel();
    let (out_tx, _) = broadcast::channel(256);
    let shared = Arc::new(Shared {
        inbound: in_tx,
        outbound: out_tx,
        tick: AtomicU64::new(session.tick()),
    });

    let mut app = Router::new()
        .route("/ws", get(ws_route))
        .route("/schema", get(|| async { ([(header::CONTENT_TYPE, "application/json")], SCHEMA) }));
    if let Some(dir) = &opts.ui_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let app = app.with_state(shared.clone());

    let listener = tokio::net::TcpListener::bind((opts.host, opts.port)).await?;
    let addr = listener.local_addr()?;
    let http = tokio::spawn(async move { axum::serve(listener, app).await });

    let (stop_tx, stop_rx) = oneshot::channel();
    let period = Duration::from_secs_f64(1.0 / opts.tick_rate);
    let ticker = tokio::spawn(tick_loop(session, shared, in_rx, stop_rx, period, opts.disconnect_grace));
    Ok(ServerHandle {
        addr,
        stop: Some(stop_tx),
        ticker,
        http,
    })
}

/// Runs a server until Ctrl-C on a fresh runtime and returns the session.
pub fn serve_blocking(setup: SessionSetup, opts: ServeOptions) -> Result<Session, BridgeError> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let handle = start(setup, opts).await?;
        eprintln!("listening on ws://{}/ws", handle.local_addr());
        tokio::signal::ctrl_c().await?;
        handle.shutdown().await
    })
}

async fn tick_loop(
    mut session: Session,
    shared: Arc<Shared>,
    mut inbound: mpsc::UnboundedReceiver<Inbound>,
    mut stop: oneshot::Receiver<()>,
    period: Duration,
    grace: Duration,
) -> Result<Session, BridgeError> {
    let mut interval = tokio::time::interval(period);
    interval.set_missed_tick_behavior(MissedTickBehavior::Delay);
    let mut clients = 0usize;
    let mut alone_since: Option<Instant> = None;
    loop {
        tokio::select! {
            _ = &mut stop => return Ok(session),
            _ = interval.tick() => {}
        }
        while let Ok(event) = inbound.try_recv() {
            match event {
                Inbound::Connected => {
                    clients += 1;
                    alone_since = None;
                }
                Inbound::Disconnected => {
                    clients = clients.saturating_sub(1);
                    if clients == 0 {
                        alone_since = Some(Instant::now());
                    }
                }
                Inbound::Command { command, reply } => {
                    let kind = command.message.kind().to_string();
                    let text = match session.submit(command.message) {
                        Ok(()) => encode_ack(
                            session.tick(),
                            &Ack {
                                kind,
                                client_tick: command.tick,
                            },
                        ),
                        Err(e) => encode_error(session.tick(), &e.reply()),
                    };
                    let _ = reply.send(text);
                }
            }
        }
        if let Some(since) = alone_since {
            if since.elapsed() >= grace {
                if !session.is_paused() {
                    session.submit(OperatorMessage::Pause).expect("pause is always valid");
                }
                alone_since = None;
            }
        }
        let snap = session.advance()?;
        shared.tick.store(snap.tick, Ordering::Relaxed);
        let _ = shared.outbound.send(encode_snapshot(&snap).into());
    }
}

async fn ws_route(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, shared))
}

async fn client(socket: WebSocket, shared: Arc<Shared>) {
    let (mut sink, mut source) = socket.split();
    let mut snapshots = shared.outbound.subscribe();
    let (reply_tx, mut reply_rx) = mpsc::unbounded_channel::<String>();
    let _ = shared.inbound.send(Inbound::Connected);

    let writer = tokio::spawn(async move {
        loop {
            let text: String = tokio::select! {
                r = reply_rx.recv() => match r {
                    Some(t) => t,
                    None => break,
                },
                s = snapshots.recv() => match s {
                    Ok(t) => t.to_string(),
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => break,
                },
            };
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = source.next().await {
        let result = match msg {
            Message::Text(t) => decode_command(t.as_str()),
            Message::Binary(_) => Err(ProtocolError::Malformed("binary frames are not accepted".into())),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        match result {
            Ok(command) => {
                let _ = shared.inbound.send(Inbound::Command {
                    command,
                    reply: reply_tx.clone(),
                });
            }
            Err(e) => {
                let _ = reply_tx.send(encode_error(shared.tick.load(Ordering::Relaxed), &e.reply()));
            }
        }
    }
    let _ = shared.inbound.send(Inbound::Disconnected);
    drop(reply_tx);
    writer.abort();
}
