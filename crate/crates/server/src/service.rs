//! gRPC services: the three-call base protocol and the simulation controls.

use std::io;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};

use evocraft_core::{BackendError, Engine, TickRate, World};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tokio_stream::wrappers::TcpListenerStream;
use tonic::{Request, Response, Status};

use crate::actor::{EngineGone, EngineHandle};
use crate::convert;
use crate::pb::base::minecraft_service_server::{MinecraftService, MinecraftServiceServer};
use crate::pb::base::{Blocks, FillCubeRequest};
use crate::pb::sim::simulation_service_server::{SimulationService, SimulationServiceServer};
use crate::pb::sim::{CenterOfMassReply, StepReply, StepRequest, TickRateRequest};
use crate::pb::base;
use crate::{DEFAULT_PORT, MAX_MESSAGE_BYTES};

#[derive(Clone, Debug, PartialEq)]
pub struct ServeConfig {
    pub host: IpAddr,
    /// 0 picks a free port.
    pub port: u16,
    /// Run `Step` as fast as possible instead of at 20 ticks/s.
    pub unthrottled: bool,
    /// Advance the world on a wall clock between requests, like a game server.
    pub free_run: bool,
    /// Reserved; the simulation has no randomness yet.
    pub world_seed: Option<u64>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig { host: IpAddr::V4(Ipv4Addr::LOCALHOST), port: DEFAULT_PORT, unthrottled: false, free_run: false, world_seed: None }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error(transparent)]
    Transport(#[from] tonic::transport::Error),
    #[error("server task failed: {0}")]
    Join(String),
}

fn gone(_: EngineGone) -> Status {
    Status::unavailable("engine_stopped")
}

/// Implements both services over one engine.
#[derive(Clone, Debug)]
pub struct WorldService {
    engine: EngineHandle,
}

impl WorldService {
    pub fn new(engine: EngineHandle) -> Self {
        WorldService { engine }
    }

    async fn run<T, F>(&self, f: F) -> Result<T, Status>
    where
        T: Send + 'static,
        F: FnOnce(&mut Engine) -> Result<T, BackendError> + Send + 'static,
    {
        self.engine.call(f).await.map_err(gone)?.map_err(|e| {
            tracing::debug!(reason = %convert::reason(&e), "request rejected");
            convert::status(&e)
        })
    }
}

#[tonic::async_trait]
impl MinecraftService for WorldService {
    async fn spawn_blocks(&self, req: Request<Blocks>) -> Result<Response<()>, Status> {
        let blocks = convert::blocks(req.into_inner().blocks).map_err(|e| convert::status(&e))?;
        self.run(move |e| {
            e.world.spawn_blocks(&blocks);
            Ok(())
        })
        .await?;
        Ok(Response::new(()))
    }

    async fn read_cube(&self, req: Request<base::Cube>) -> Result<Response<Blocks>, Status> {
        let cube = convert::cube(Some(req.into_inner())).map_err(|e| convert::status(&e))?;
        let blocks = self.run(move |e| Ok(e.world.read_cube(cube)?)).await?;
        Ok(Response::new(Blocks { blocks: blocks.into_iter().map(convert::block_msg).collect() }))
    }

    async fn fill_cube(&self, req: Request<FillCubeRequest>) -> Result<Response<()>, Status> {
        let req = req.into_inner();
        let cube = convert::cube(req.cube).map_err(|e| convert::status(&e))?;
        let kind = evocraft_core::BlockType::from_id(req.r#type)
            .ok_or_else(|| convert::status(&evocraft_core::VoxelError::UnknownBlockType(req.r#type).into()))?;
        self.run(move |e| Ok(e.world.fill_cube(cube, kind)?)).await?;
        Ok(Response::new(()))
    }
}

#[tonic::async_trait]
impl SimulationService for WorldService {
    async fn step(&self, req: Request<StepRequest>) -> Result<Response<StepReply>, Status> {
        let n = req.into_inner().n_ticks;
        if n == 0 {
            return Err(convert::status(&BackendError::InvalidArgument("step needs n_ticks >= 1".into())));
        }
        let tick = self.run(move |e| Ok(e.advance(n))).await?;
        Ok(Response::new(StepReply { tick }))
    }

    async fn reset(&self, _req: Request<()>) -> Result<Response<()>, Status> {
        self.run(|e| {
            e.world = World::new();
            Ok(())
        })
        .await?;
        Ok(Response::new(()))
    }

    async fn set_tick_rate(&self, req: Request<TickRateRequest>) -> Result<Response<()>, Status> {
        let r = req.into_inner();
        let rate = if r.unthrottled { TickRate::Unthrottled } else { TickRate::PerSecond(r.ticks_per_second) };
        self.run(move |e| Ok(e.set_tick_rate(rate)?)).await?;
        Ok(Response::new(()))
    }

    async fn center_of_mass(&self, req: Request<base::Cube>) -> Result<Response<CenterOfMassReply>, Status> {
        let cube = convert::cube(Some(req.into_inner())).map_err(|e| convert::status(&e))?;
        let com = self.run(move |e| Ok(e.world.center_of_mass(cube)?)).await?;
        let reply = match com {
            Some(c) => CenterOfMassReply { present: true, x: c.x, y: c.y, z: c.z },
            None => CenterOfMassReply::default(),
        };
        Ok(Response::new(reply))
    }
}

/// A running server. Dropping it without [`shutdown`](Self::shutdown) leaves the task running.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: oneshot::Sender<()>,
    task: JoinHandle<Result<(), tonic::transport::Error>>,
    pub engine: EngineHandle,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://host:port`, as a client expects it.
    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub async fn shutdown(self) -> Result<(), ServeError> {
        let _ = self.shutdown.send(());
        self.task.await.map_err(|e| ServeError::Join(e.to_string()))??;
        Ok(())
    }

    /// Serves until the task ends; the shutdown sender is kept alive meanwhile.
    pub async fn wait(self) -> Result<(), ServeError> {
        let ServerHandle { task, shutdown, .. } = self;
        let result = task.await;
        drop(shutdown);
        result.map_err(|e| ServeError::Join(e.to_string()))??;
        Ok(())
    }
}

/// Binds the port and starts serving both services on it.
pub async fn serve(config: &ServeConfig) -> Result<ServerHandle, ServeError> {
    let addr = SocketAddr::new(config.host, config.port);
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| match source.kind() {
        io::ErrorKind::AddrInUse => ServeError::PortInUse(config.port),
        _ => ServeError::Bind { addr, source },
    })?;
    let local = listener.local_addr().map_err(|source| ServeError::Bind { addr, source })?;
    let engine = if config.unthrottled { Engine::unthrottled(World::new()) } else { Engine::new(World::new()) };
    let engine = EngineHandle::spawn(engine, config.free_run);
    let svc = WorldService::new(engine.clone());
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(
        tonic::transport::Server::builder()
            .add_service(
                MinecraftServiceServer::new(svc.clone())
                    .max_decoding_message_size(MAX_MESSAGE_BYTES)
                    .max_encoding_message_size(MAX_MESSAGE_BYTES),
            )
            .add_service(SimulationServiceServer::new(svc))
            .serve_with_incoming_shutdown(TcpListenerStream::new(listener), async {
                let _ = rx.await;
            }),
    );
    tracing::info!(addr = %local, unthrottled = config.unthrottled, free_run = config.free_run, "world server listening");
    Ok(ServerHandle { addr: local, shutdown: tx, task, engine })
}

/// A server on its own runtime, for synchronous callers. Stops when dropped.
pub struct BackgroundServer {
    handle: Option<ServerHandle>,
    runtime: tokio::runtime::Runtime,
}

impl BackgroundServer {
    pub fn start(config: &ServeConfig) -> Result<Self, ServeError> {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .map_err(|source| ServeError::Bind { addr: SocketAddr::new(config.host, config.port), source })?;
        let handle = runtime.block_on(serve(config))?;
        Ok(BackgroundServer { handle: Some(handle), runtime })
    }

    pub fn endpoint(&self) -> String {
        self.handle.as_ref().expect("running").endpoint()
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.handle.as_ref().expect("running").local_addr()
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(h) = self.handle.take() {
            let _ = self.runtime.block_on(h.shutdown());
        }
    }
}
