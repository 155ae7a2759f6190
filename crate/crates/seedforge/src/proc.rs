//! Subprocess execution with deadlines: used for git clones, target
//! executions in the crash filter, and external minimizer invocations.

use std::io::{Read, Write};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::time::{Duration, Instant};

/// Poll interval while waiting on a child process.
const POLL: Duration = Duration::from_millis(20);

#[derive(Debug)]
pub struct ProcOutput {
    /// Exit status; `None` when we killed the process ourselves.
    pub status: Option<ExitStatus>,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    /// True when the deadline elapsed and the process was killed.
    pub timed_out: bool,
    /// True when the caller's watchdog requested the kill.
    pub killed_by_watchdog: bool,
}

impl ProcOutput {
    pub fn success(&self) -> bool {
        self.status.map(|s| s.success()).unwrap_or(false)
    }

    /// The signal that terminated the process, if any. A signal exit is how
    /// crashes (SIGSEGV, SIGABRT, ...) manifest.
    #[cfg(unix)]
    pub fn signal(&self) -> Option<i32> {
        use std::os::unix::process::ExitStatusExt;
        self.status.and_then(|s| s.signal())
    }

    #[cfg(not(unix))]
    pub fn signal(&self) -> Option<i32> {
        None
    }
}

/// Runs `cmd` to completion or until `timeout` elapses, whichever comes
/// first. `stdin_bytes` is written to the child's stdin (closed immediately
/// when `None`). `watchdog` is polled periodically; returning `true` kills
/// the process early.
pub fn run_with_deadline(
    mut cmd: Command,
    timeout: Duration,
    stdin_bytes: Option<Vec<u8>>,
    watchdog: Option<&(dyn Fn() -> bool + Sync)>,
) -> std::io::Result<ProcOutput> {
    cmd.stdout(Stdio::piped()).stderr(Stdio::piped());
    cmd.stdin(if stdin_bytes.is_some() {
        Stdio::piped()
    } else {
        Stdio::null()
    });
    let mut child = cmd.spawn()?;

    // Feed stdin from a helper thread so a full pipe buffer can't deadlock
    // against our output readers.
    let stdin_handle = stdin_bytes.and_then(|bytes| {
        child.stdin.take().map(|mut pipe| {
            std::thread::spawn(move || {
                // The child may exit without draining stdin; broken pipe is fine.
                let _ = pipe.write_all(&bytes);
            })
        })
    });

    let stdout_handle = reader_thread(child.stdout.take());
    let stderr_handle = reader_thread(child.stderr.take());

    let deadline = Instant::now() + timeout;
    let mut timed_out = false;
    let mut killed_by_watchdog = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if Instant::now() >= deadline {
            timed_out = true;
            kill_and_reap(&mut child);
            break None;
        }
        if let Some(w) = watchdog {
            if w() {
                killed_by_watchdog = true;
                kill_and_reap(&mut child);
                break None;
            }
        }
        std::thread::sleep(POLL);
    };

    if let Some(h) = stdin_handle {
        let _ = h.join();
    }
    let stdout = stdout_handle.map(|h| h.join().unwrap_or_default()).unwrap_or_default();
    let stderr = stderr_handle.map(|h| h.join().unwrap_or_default()).unwrap_or_default();

    Ok(ProcOutput {
        status,
        stdout,
        stderr,
        timed_out,
        killed_by_watchdog,
    })
}

fn reader_thread<R: Read + Send + 'static>(
    pipe: Option<R>,
) -> Option<std::thread::JoinHandle<Vec<u8>>> {
    pipe.map(|mut p| {
        std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = p.read_to_end(&mut buf);
            buf
        })
    })
}

fn kill_and_reap(child: &mut Child) {
    let _ = child.kill();
    let _ = child.wait();
}
