use super::{BuiltKernel, HostError};
use crate::elf;
use serde::Serialize;
use std::collections::HashMap;
use std::io::{BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

pub const OP_LOAD: u8 = 0x01;
pub const OP_OUTPUT: u8 = 0x02;
pub const OP_EXIT: u8 = 0x03;
pub const OP_TIMING: u8 = 0x04;
pub const LOAD_OK: u8 = 0x00;
pub const LOAD_UNKNOWN: u8 = 0x01;

/// Upper bound on a function name in a LOAD request.
const MAX_NAME: u32 = 4096;
/// Upper bound on one OUTPUT frame.
const MAX_OUTPUT: u32 = 64 << 20;

/// One entry of the session log; `t` is seconds since launch.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum Event {
    Load { t: f64, name: String, bytes: usize, status: u8, error: Option<String> },
    Output { t: f64, text: String },
    Timing { t: f64, seconds: f64 },
    Exit { t: f64, status: i32 },
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Kill the device process after this long.
    pub timeout: Option<Duration>,
    /// Extra environment variables for the device process.
    pub env: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    /// Status from the EXIT message.
    pub status: i32,
    pub output: String,
    pub stderr: String,
    pub events: Vec<Event>,
    /// Device-measured compute time, load waits excluded.
    pub compute_seconds: Option<f64>,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn loads(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Load { name, .. } => Some(name.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Runtime error name printed on stderr (`oly: <Name>`), if any.
    pub fn error_name(&self) -> Option<&str> {
        self.stderr.lines().find_map(|l| l.strip_prefix("oly: ")).map(str::trim)
    }

    pub fn events_json_lines(&self) -> String {
        self.events.iter().map(|e| serde_json::to_string(e).expect("events serialise") + "\n").collect()
    }
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<(), HostError> {
    r.read_exact(buf).map_err(|e| HostError::Channel(format!("{what}: {e}")))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32, HostError> {
    let mut b = [0u8; 4];
    read_exact_or(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

/// Serves code blobs for LOAD requests; each object is extracted once.
struct Loader<'a> {
    kernel: &'a BuiltKernel,
    cache: HashMap<String, Result<Vec<u8>, String>>,
}

impl Loader<'_> {
    fn blob(&mut self, name: &str) -> Result<Vec<u8>, String> {
        if let Some(hit) = self.cache.get(name) {
            return hit.clone();
        }
        let result = (|| {
            let entry = self.kernel.symtab.lookup(name).ok_or_else(|| format!("`{name}` is not in the symbol table"))?;
            let path = self.kernel.dir.join(&entry.object_file);
            let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let img = elf::parse(&bytes).map_err(|e| e.to_string())?;
            let f = img.extract_unit(&entry.mangled, self.kernel.machine).map_err(|e| e.to_string())?;
            Ok(f.code)
        })();
        self.cache.insert(name.to_string(), result.clone());
        result
    }
}

/// Launch the kernel and serve its channel until EXIT.
pub fn run_kernel(kernel: &BuiltKernel, opts: &RunOptions) -> Result<RunReport, HostError> {
    let start = Instant::now();
    let mut child = Command::new(&kernel.executable)
        .current_dir(&kernel.dir)
        .envs(opts.env.iter().map(|(k, v)| (k, v)))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| HostError::io(&kernel.executable, e))?;
    let mut to_dev = child.stdin.take().expect("piped stdin");
    let mut from_dev = BufReader::new(child.stdout.take().expect("piped stdout"));
    let mut err_pipe = child.stderr.take().expect("piped stderr");
    let stderr_thread = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = err_pipe.read_to_string(&mut s);
        s
    });
    let child: Arc<Mutex<Child>> = Arc::new(Mutex::new(child));
    let (done_tx, done_rx) = mpsc::channel::<()>();
    let timed_out = Arc::new(Mutex::new(false));
    let watchdog = opts.timeout.map(|limit| {
        let child = Arc::clone(&child);
        let timed_out = Arc::clone(&timed_out);
        std::thread::spawn(move || {
            if let Err(mpsc::RecvTimeoutError::Timeout) = done_rx.recv_timeout(limit) {
                *timed_out.lock().expect("flag lock") = true;
                let _ = child.lock().expect("child lock").kill();
            }
        })
    });

    let mut loader = Loader { kernel, cache: HashMap::new() };
    let mut events = Vec::new();
    let mut output = String::new();
    let mut compute = None;
    let t = |start: &Instant| start.elapsed().as_secs_f64();
    let result: Result<i32, HostError> = (|| loop {
        let mut op = [0u8; 1];
        read_exact_or(&mut from_dev, &mut op, "message opcode")?;
        match op[0] {
            OP_LOAD => {
                let len = read_u32(&mut from_dev, "load name length")?;
                if len > MAX_NAME {
                    return Err(HostError::Channel(format!("load name of {len} bytes")));
                }
                let mut name = vec![0u8; len as usize];
                read_exact_or(&mut from_dev, &mut name, "load name")?;
                let name = String::from_utf8_lossy(&name).into_owned();
                let (status, body, error) = match loader.blob(&name) {
                    Ok(code) => (LOAD_OK, code, None),
                    Err(e) => (LOAD_UNKNOWN, Vec::new(), Some(e)),
                };
                let mut msg = Vec::with_capacity(5 + body.len());
                msg.push(status);
                msg.extend_from_slice(&(body.len() as u32).to_le_bytes());
                msg.extend_from_slice(&body);
                to_dev.write_all(&msg).and_then(|_| to_dev.flush()).map_err(|e| HostError::Channel(format!("load response: {e}")))?;
                events.push(Event::Load { t: t(&start), name, bytes: body.len(), status, error });
            }
            OP_OUTPUT => {
                let len = read_u32(&mut from_dev, "output length")?;
                if len > MAX_OUTPUT {
                    return Err(HostError::Channel(format!("output frame of {len} bytes")));
                }
                let mut text = vec![0u8; len as usize];
                read_exact_or(&mut from_dev, &mut text, "output text")?;
                let text = String::from_utf8_lossy(&text).into_owned();
                output.push_str(&text);
                events.push(Event::Output { t: t(&start), text });
            }
            OP_TIMING => {
                let mut b = [0u8; 8];
                read_exact_or(&mut from_dev, &mut b, "timing")?;
                let seconds = f64::from_le_bytes(b);
                compute = Some(seconds);
                events.push(Event::Timing { t: t(&start), seconds });
            }
            OP_EXIT => {
                let status = read_u32(&mut from_dev, "exit status")? as i32;
                events.push(Event::Exit { t: t(&start), status });
                return Ok(status);
            }
            other => return Err(HostError::Channel(format!("unknown opcode {other:#04x}"))),
        }
    })();
    drop(to_dev);
    if result.is_err() {
        let _ = child.lock().expect("child lock").kill();
    }
    let wait = child.lock().expect("child lock").wait();
    let wall_seconds = t(&start);
    let _ = done_tx.send(());
    if let Some(w) = watchdog {
        let _ = w.join();
    }
    let stderr = stderr_thread.join().unwrap_or_default();
    if *timed_out.lock().expect("flag lock") {
        return Err(HostError::Timeout { seconds: opts.timeout.map(|d| d.as_secs_f64()).unwrap_or(0.0), output });
    }
    let status = match result {
        Ok(s) => s,
        Err(HostError::Channel(msg)) => {
            let how = match wait {
                Ok(st) => format!("{st}"),
                Err(e) => e.to_string(),
            };
            return Err(HostError::Channel(format!("{msg} (device {how}; stderr: {})", stderr.trim())));
        }
        Err(e) => return Err(e),
    };
    Ok(RunReport { status, output, stderr, events, compute_seconds: compute, wall_seconds })
}
