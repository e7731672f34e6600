//! Adapter for black-box SUT executables.
//!
//! Protocol, one evaluation per exchange over the child's stdin/stdout:
//! the request is one line of `n` space-separated decimal inputs, the
//! response one line of `m` space-separated decimal fitness values. The
//! process is kept alive across evaluations and restarted lazily after a
//! failure.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::SutError;
use crate::problem::FitnessEvaluator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSutConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub objective_count: usize,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    /// Number of worker processes used for batch evaluation.
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
}

fn default_timeout_secs() -> f64 {
    30.0
}

fn default_pool_size() -> usize {
    1
}

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Drop for Worker {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct ExternalSut {
    config: ExternalSutConfig,
    workers: Vec<Mutex<Option<Worker>>>,
}

impl std::fmt::Debug for ExternalSut {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalSut").field("config", &self.config).finish()
    }
}

impl ExternalSut {
    pub fn new(config: ExternalSutConfig) -> Self {
        let pool = config.pool_size.max(1);
        Self {
            workers: (0..pool).map(|_| Mutex::new(None)).collect(),
            config,
        }
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.config.timeout_secs)
    }

    fn spawn(&self) -> Result<Worker, SutError> {
        let (program, args) = self
            .config
            .command
            .split_first()
            .ok_or_else(|| SutError::Spawn(std::io::Error::other("empty command")))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(SutError::Spawn)?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Worker {
            child,
            stdin,
            lines: rx,
        })
    }

    fn exchange(&self, worker: &mut Worker, input: &[f64]) -> Result<Vec<f64>, SutError> {
        let request = input.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        writeln!(worker.stdin, "{request}").map_err(|_| SutError::ProcessExited)?;
        worker.stdin.flush().map_err(|_| SutError::ProcessExited)?;
        let line = match worker.lines.recv_timeout(self.timeout()) {
            Ok(line) => line?,
            Err(RecvTimeoutError::Timeout) => return Err(SutError::Timeout(self.timeout())),
            Err(RecvTimeoutError::Disconnected) => return Err(SutError::ProcessExited),
        };
        parse_response(&line, self.config.objective_count)
    }

    fn evaluate_on(&self, slot: &Mutex<Option<Worker>>, input: &[f64]) -> Result<Vec<f64>, SutError> {
        let mut guard = slot.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            *guard = Some(self.spawn()?);
        }
        let result = self.exchange(guard.as_mut().expect("worker present"), input);
        if result.is_err() {
            // drop (and kill) the worker; the next evaluation restarts it
            *guard = None;
        }
        result
    }
}

/// Parses one response line into exactly `expected` finite values.
pub(crate) fn parse_response(line: &str, expected: usize) -> Result<Vec<f64>, SutError> {
    let values = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| SutError::Malformed(format!("{t:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(SutError::Malformed(format!(
            "expected {expected} values, got {} in {line:?}",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(SutError::NonFinite(*v));
    }
    Ok(values)
}

impl FitnessEvaluator for ExternalSut {
    fn evaluate(&self, input: &[f64]) -> Result<Vec<f64>, SutError> {
        self.evaluate_on(&self.workers[0], input)
    }

    fn evaluate_batch(&self, inputs: &[&[f64]]) -> Vec<Result<Vec<f64>, SutError>> {
        if self.workers.len() == 1 || inputs.len() <= 1 {
            return inputs.iter().map(|x| self.evaluate(x)).collect();
        }
        // strided assignment keeps the output order independent of timing
        let pool = self.workers.len();
        let mut results: Vec<Option<Result<Vec<f64>, SutError>>> = (0..inputs.len()).map(|_| None).collect();
        thread::scope(|scope| {
            let handles: Vec<_> = (0..pool)
                .map(|w| {
                    scope.spawn(move || {
                        (w..inputs.len())
                            .step_by(pool)
                            .map(|i| (i, self.evaluate_on(&self.workers[w], inputs[i])))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("worker thread panicked") {
                    results[i] = Some(r);
                }
            }
        });
        results.into_iter().map(|r| r.expect("every slot filled")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_accepts_exact_field_count() {
        assert_eq!(parse_response("0.9 0.5", 2).unwrap(), vec![0.9, 0.5]);
        assert!(matches!(parse_response("0.9", 2), Err(SutError::Malformed(_))));
        assert!(matches!(parse_response("0.9 x", 2), Err(SutError::Malformed(_))));
        assert!(matches!(parse_response("0.9 NaN", 2), Err(SutError::NonFinite(_))));
    }
}
