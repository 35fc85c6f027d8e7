//! The engine lives on one thread; requests reach it through a queue, so
//! mutations are applied one at a time in arrival order.

use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use evocraft_core::{Engine, TickRate};
use tokio::sync::oneshot;

type Job = Box<dyn FnOnce(&mut Engine) + Send>;

#[derive(Debug, thiserror::Error)]
#[error("engine thread has stopped")]
pub struct EngineGone;

/// Cloneable handle to the engine thread. The thread exits once every handle is dropped.
#[derive(Clone, Debug)]
pub struct EngineHandle {
    tx: mpsc::Sender<Job>,
}

impl EngineHandle {
    /// With `free_run`, the world also advances on its own at the engine's
    /// tick rate (as a game server does) whenever the queue is idle.
    pub fn spawn(engine: Engine, free_run: bool) -> Self {
        let (tx, rx) = mpsc::channel::<Job>();
        thread::Builder::new()
            .name("engine".into())
            .spawn(move || run(engine, rx, free_run))
            .expect("spawning the engine thread");
        EngineHandle { tx }
    }

    /// Runs `f` on the engine thread and waits for its result.
    pub async fn call<T, F>(&self, f: F) -> Result<T, EngineGone>
    where
        T: Send + 'static,
        F: FnOnce(&mut Engine) -> T + Send + 'static,
    {
        let (reply, rx) = oneshot::channel();
        let job: Job = Box::new(move |e| {
            let _ = reply.send(f(e));
        });
        self.tx.send(job).map_err(|_| EngineGone)?;
        rx.await.map_err(|_| EngineGone)
    }
}

fn run(mut engine: Engine, rx: mpsc::Receiver<Job>, free_run: bool) {
    let mut next_tick = Instant::now();
    loop {
        let period = match engine.tick_rate() {
            TickRate::PerSecond(r) if free_run => Some(Duration::from_secs_f64(1.0 / r)),
            _ => None,
        };
        let job = match period {
            None => match rx.recv() {
                Ok(j) => Some(j),
                Err(_) => return,
            },
            Some(p) => {
                let now = Instant::now();
                if next_tick <= now {
                    engine.world.step(1);
                    next_tick = (next_tick + p).max(now);
                    None
                } else {
                    match rx.recv_timeout(next_tick - now) {
                        Ok(j) => Some(j),
                        Err(RecvTimeoutError::Timeout) => None,
                        Err(RecvTimeoutError::Disconnected) => return,
                    }
                }
            }
        };
        if let Some(job) = job {
            job(&mut engine);
        }
    }
}
