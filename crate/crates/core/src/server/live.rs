//! Wall-clock paced session loop with TCP and in-process clients.
//!
//! One thread owns the [`Session`]. Client frames arrive over a channel and
//! are drained once before every tick, so a command never lands mid-tick.
//! Every client has a bounded outgoing queue; when a slow client falls
//! behind, its oldest telemetry frames are dropped (replies never are) and
//! the gap shows up in `seq`. The session's own log is never decimated or
//! dropped.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::protocol::ServerMessage;
use super::session::{transport_error, Phase, Session};
use crate::sim::write_csv;

pub const DEFAULT_DECIMATION: u32 = 4;
pub const DEFAULT_QUEUE_CAPACITY: usize = 256;
const IDLE_POLL: Duration = Duration::from_millis(20);

#[derive(Debug, Clone, PartialEq)]
pub struct LiveOptions {
    /// Simulated seconds per wall-clock second; `0` runs unpaced.
    pub speed: f64,
    /// Telemetry frames buffered per client before the oldest is dropped.
    pub queue_capacity: usize,
    /// Written with the full run log whenever a run completes.
    pub log_path: Option<PathBuf>,
}

impl Default for LiveOptions {
    fn default() -> Self {
        LiveOptions {
            speed: 1.0,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            log_path: None,
        }
    }
}

#[derive(Debug, Default)]
struct QueueState {
    items: VecDeque<ServerMessage>,
    telemetry: usize,
    dropped: u64,
    closed: bool,
}

/// Bounded outgoing queue of one client.
#[derive(Debug)]
pub struct ClientQueue {
    state: Mutex<QueueState>,
    ready: Condvar,
    capacity: usize,
}

impl ClientQueue {
    pub fn new(capacity: usize) -> Self {
        ClientQueue {
            state: Mutex::new(QueueState::default()),
            ready: Condvar::new(),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&self, msg: ServerMessage) {
        let mut st = self.state.lock().expect("queue lock");
        if st.closed {
            return;
        }
        if msg.is_telemetry() {
            if st.telemetry >= self.capacity {
                if let Some(pos) = st.items.iter().position(ServerMessage::is_telemetry) {
                    st.items.remove(pos);
                    st.telemetry -= 1;
                    st.dropped += 1;
                }
            }
            st.telemetry += 1;
        }
        st.items.push_back(msg);
        self.ready.notify_one();
    }

    /// Waits up to `timeout`; `None` on timeout or once closed and drained.
    pub fn pop(&self, timeout: Duration) -> Option<ServerMessage> {
        let deadline = Instant::now() + timeout;
        let mut st = self.state.lock().expect("queue lock");
        loop {
            if let Some(msg) = st.items.pop_front() {
                if msg.is_telemetry() {
                    st.telemetry -= 1;
                }
                return Some(msg);
            }
            let now = Instant::now();
            if st.closed || now >= deadline {
                return None;
            }
            st = self.ready.wait_timeout(st, deadline - now).expect("queue lock").0;
        }
    }

    pub fn dropped(&self) -> u64 {
        self.state.lock().expect("queue lock").dropped
    }

    pub fn close(&self) {
        self.state.lock().expect("queue lock").closed = true;
        self.ready.notify_all();
    }

    pub fn is_closed(&self) -> bool {
        self.state.lock().expect("queue lock").closed
    }
}

enum Inbound {
    Line { client: u64, line: String },
    Joined { client: u64, queue: Arc<ClientQueue> },
    Left(u64),
}

/// Handle to a running session loop.
pub struct LiveServer {
    inbound: Sender<Inbound>,
    stop: Arc<AtomicBool>,
    next_client: Arc<AtomicU64>,
    queue_capacity: usize,
    worker: Option<JoinHandle<Session>>,
    streams: Arc<Mutex<Vec<TcpStream>>>,
    acceptor: Option<JoinHandle<()>>,
}

/// A client living in the same process, used by tests and embedders.
pub struct LocalClient {
    id: u64,
    inbound: Sender<Inbound>,
    queue: Arc<ClientQueue>,
}

impl LocalClient {
    pub fn send(&self, line: &str) {
        let _ = self.inbound.send(Inbound::Line {
            client: self.id,
            line: line.to_string(),
        });
    }

    pub fn recv(&self, timeout: Duration) -> Option<ServerMessage> {
        self.queue.pop(timeout)
    }

    pub fn dropped(&self) -> u64 {
        self.queue.dropped()
    }
}

impl Drop for LocalClient {
    fn drop(&mut self) {
        let _ = self.inbound.send(Inbound::Left(self.id));
    }
}

impl LiveServer {
    pub fn start(session: Session, options: LiveOptions) -> Self {
        let (tx, rx) = mpsc::channel();
        let stop = Arc::new(AtomicBool::new(false));
        let queue_capacity = options.queue_capacity;
        let worker = {
            let stop = stop.clone();
            thread::spawn(move || session_loop(session, rx, stop, options))
        };
        LiveServer {
            inbound: tx,
            stop,
            next_client: Arc::new(AtomicU64::new(0)),
            queue_capacity,
            worker: Some(worker),
            streams: Arc::new(Mutex::new(Vec::new())),
            acceptor: None,
        }
    }

    pub fn connect_local(&self) -> LocalClient {
        self.connect_local_with_capacity(self.queue_capacity)
    }

    pub fn connect_local_with_capacity(&self, capacity: usize) -> LocalClient {
        let id = self.next_client.fetch_add(1, Ordering::SeqCst);
        let queue = Arc::new(ClientQueue::new(capacity));
        let _ = self.inbound.send(Inbound::Joined {
            client: id,
            queue: queue.clone(),
        });
        LocalClient {
            id,
            inbound: self.inbound.clone(),
            queue,
        }
    }

    /// Accepts TCP clients on `listener` until shutdown.
    pub fn serve_tcp(&mut self, listener: TcpListener) -> std::io::Result<()> {
        listener.set_nonblocking(true)?;
        let stop = self.stop.clone();
        let inbound = self.inbound.clone();
        let next_client = self.next_client.clone();
        let capacity = self.queue_capacity;
        let streams = self.streams.clone();
        self.acceptor = Some(thread::spawn(move || {
            while !stop.load(Ordering::SeqCst) {
                match listener.accept() {
                    Ok((stream, _)) => {
                        let id = next_client.fetch_add(1, Ordering::SeqCst);
                        if let Ok(clone) = stream.try_clone() {
                            streams.lock().expect("stream list").push(clone);
                        }
                        spawn_connection(id, stream, inbound.clone(), capacity);
                    }
                    Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => thread::sleep(IDLE_POLL),
                    Err(_) => thread::sleep(IDLE_POLL),
                }
            }
        }));
        Ok(())
    }

    /// Blocks until the session loop exits (it only does so on shutdown).
    pub fn wait(mut self) -> Option<Session> {
        self.worker.take().and_then(|w| w.join().ok())
    }

    /// Stops the loop and closes every connection; returns the session.
    pub fn shutdown(mut self) -> Option<Session> {
        self.stop.store(true, Ordering::SeqCst);
        for s in self.streams.lock().expect("stream list").drain(..) {
            let _ = s.shutdown(std::net::Shutdown::Both);
        }
        if let Some(a) = self.acceptor.take() {
            let _ = a.join();
        }
        self.worker.take().and_then(|w| w.join().ok())
    }
}

fn spawn_connection(id: u64, stream: TcpStream, inbound: Sender<Inbound>, capacity: usize) {
    let _ = stream.set_nonblocking(false);
    let queue = Arc::new(ClientQueue::new(capacity));
    if inbound
        .send(Inbound::Joined {
            client: id,
            queue: queue.clone(),
        })
        .is_err()
    {
        return;
    }
    let Ok(read_half) = stream.try_clone() else {
        let _ = inbound.send(Inbound::Left(id));
        return;
    };
    {
        let queue = queue.clone();
        let mut stream = stream;
        thread::spawn(move || {
            loop {
                let Some(msg) = queue.pop(Duration::from_millis(500)) else {
                    if queue.is_closed() {
                        break;
                    }
                    continue;
                };
                let mut line = msg.to_line();
                line.push('\n');
                if stream.write_all(line.as_bytes()).is_err() {
                    queue.close();
                    break;
                }
            }
        });
    }
    thread::spawn(move || {
        let mut reader = BufReader::new(read_half);
        let mut buf = Vec::new();
        loop {
            buf.clear();
            match reader.read_until(b'\n', &mut buf) {
                Ok(0) | Err(_) => break,
                Ok(_) => {
                    let line = String::from_utf8_lossy(&buf).trim().to_string();
                    if line.is_empty() {
                        continue;
                    }
                    if inbound.send(Inbound::Line { client: id, line }).is_err() {
                        break;
                    }
                }
            }
        }
        let _ = inbound.send(Inbound::Left(id));
    });
}

struct Clients(Vec<(u64, Arc<ClientQueue>)>);

impl Clients {
    fn send_to(&self, id: u64, msg: ServerMessage) {
        if let Some((_, q)) = self.0.iter().find(|(c, _)| *c == id) {
            q.push(msg);
        }
    }

    fn broadcast(&self, msg: &ServerMessage) {
        for (_, q) in &self.0 {
            q.push(msg.clone());
        }
    }

    fn remove(&mut self, id: u64) {
        self.0.retain(|(c, q)| {
            if *c == id {
                q.close();
            }
            *c != id
        });
    }
}

fn handle_inbound(session: &mut Session, clients: &mut Clients, msg: Inbound) {
    match msg {
        Inbound::Joined { client, queue } => clients.0.push((client, queue)),
        Inbound::Left(client) => clients.remove(client),
        Inbound::Line { client, line } => {
            if line.len() > 1 << 20 {
                clients.send_to(client, transport_error("frame_too_large"));
                return;
            }
            for reply in session.handle_line(&line) {
                clients.send_to(client, reply);
            }
        }
    }
}

fn session_loop(mut session: Session, rx: Receiver<Inbound>, stop: Arc<AtomicBool>, options: LiveOptions) -> Session {
    let mut clients = Clients(Vec::new());
    let mut deadline = Instant::now();
    while !stop.load(Ordering::SeqCst) {
        if session.phase() != Phase::Running {
            match rx.recv_timeout(IDLE_POLL) {
                Ok(msg) => handle_inbound(&mut session, &mut clients, msg),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => break,
            }
            deadline = Instant::now();
            continue;
        }

        while let Ok(msg) = rx.try_recv() {
            handle_inbound(&mut session, &mut clients, msg);
        }
        if session.phase() != Phase::Running {
            continue;
        }
        for msg in session.tick().broadcast {
            if matches!(msg, ServerMessage::RunComplete { .. }) {
                if let Some(path) = &options.log_path {
                    if let Ok(file) = std::fs::File::create(path) {
                        let _ = write_csv(std::io::BufWriter::new(file), session.log());
                    }
                }
            }
            clients.broadcast(&msg);
        }

        if options.speed > 0.0 {
            deadline += Duration::from_secs_f64(session.scenario().dt() / options.speed);
            let now = Instant::now();
            if deadline > now {
                thread::sleep(deadline - now);
            } else if now - deadline > Duration::from_secs(1) {
                // fell far behind (e.g. suspended); do not try to catch up
                deadline = now;
            }
        }
    }
    for (_, q) in &clients.0 {
        q.close();
    }
    session
}
