//! Blocking client backend over the gRPC services.

use std::time::Instant;

use evocraft_core::{BackendError, Block, BlockType, CenterOfMass, Cube, TickRate, WorldBackend};
use tokio::runtime::Runtime;
use tonic::transport::Channel;

use crate::convert;
use crate::pb::base::minecraft_service_client::MinecraftServiceClient;
use crate::pb::base::{Blocks, FillCubeRequest};
use crate::pb::sim::simulation_service_client::SimulationServiceClient;
use crate::pb::sim::{StepRequest, TickRateRequest};
use crate::MAX_MESSAGE_BYTES;

/// A [`WorldBackend`] talking to this simulator or to any server of the base
/// protocol. Simulation controls report `Unsupported` against servers that
/// lack them.
///
/// Calls block on a private runtime, so this must not be used from inside
/// another async runtime.
pub struct RemoteBackend {
    runtime: Runtime,
    base: MinecraftServiceClient<Channel>,
    sim: SimulationServiceClient<Channel>,
}

fn transport(e: impl std::fmt::Display) -> BackendError {
    BackendError::Transport(e.to_string())
}

impl RemoteBackend {
    /// `address` is `host:port` or a full `http://` URI.
    pub fn connect(address: &str) -> Result<Self, BackendError> {
        let uri = if address.contains("://") { address.to_string() } else { format!("http://{address}") };
        let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().map_err(transport)?;
        let channel = runtime.block_on(async { Channel::from_shared(uri).map_err(transport)?.connect().await.map_err(transport) })?;
        let base = MinecraftServiceClient::new(channel.clone())
            .max_decoding_message_size(MAX_MESSAGE_BYTES)
            .max_encoding_message_size(MAX_MESSAGE_BYTES);
        Ok(RemoteBackend { runtime, base, sim: SimulationServiceClient::new(channel) })
    }
}

impl WorldBackend for RemoteBackend {
    fn spawn_blocks(&mut self, blocks: &[Block]) -> Result<(), BackendError> {
        let req = Blocks { blocks: blocks.iter().copied().map(convert::block_msg).collect() };
        self.runtime.block_on(self.base.spawn_blocks(req)).map_err(|s| convert::backend_error(s, "spawn_blocks"))?;
        Ok(())
    }

    fn read_cube(&mut self, cube: Cube) -> Result<Vec<Block>, BackendError> {
        let reply = self.runtime.block_on(self.base.read_cube(convert::cube_msg(cube))).map_err(|s| convert::backend_error(s, "read_cube"))?;
        convert::blocks(reply.into_inner().blocks)
    }

    fn fill_cube(&mut self, cube: Cube, kind: BlockType) -> Result<(), BackendError> {
        let req = FillCubeRequest { cube: Some(convert::cube_msg(cube)), r#type: i32::from(kind.id()) };
        self.runtime.block_on(self.base.fill_cube(req)).map_err(|s| convert::backend_error(s, "fill_cube"))?;
        Ok(())
    }

    fn step(&mut self, n_ticks: u64) -> Result<u64, BackendError> {
        let reply = self.runtime.block_on(self.sim.step(StepRequest { n_ticks })).map_err(|s| convert::backend_error(s, "step"))?;
        Ok(reply.into_inner().tick)
    }

    fn reset(&mut self) -> Result<(), BackendError> {
        self.runtime.block_on(self.sim.reset(())).map_err(|s| convert::backend_error(s, "reset"))?;
        Ok(())
    }

    fn set_tick_rate(&mut self, rate: TickRate) -> Result<(), BackendError> {
        let req = match rate {
            TickRate::Unthrottled => TickRateRequest { ticks_per_second: 0.0, unthrottled: true },
            TickRate::PerSecond(r) => TickRateRequest { ticks_per_second: r, unthrottled: false },
        };
        self.runtime.block_on(self.sim.set_tick_rate(req)).map_err(|s| convert::backend_error(s, "set_tick_rate"))?;
        Ok(())
    }

    fn center_of_mass(&mut self, region: Cube) -> Result<Option<CenterOfMass>, BackendError> {
        let reply = self
            .runtime
            .block_on(self.sim.center_of_mass(convert::cube_msg(region)))
            .map_err(|s| convert::backend_error(s, "center_of_mass"))?
            .into_inner();
        Ok(reply.present.then_some(CenterOfMass { x: reply.x, y: reply.y, z: reply.z }))
    }
}

/// One base-protocol call, for latency measurements.
#[derive(Clone, Debug, PartialEq)]
pub enum RpcOp {
    Spawn(Vec<Block>),
    Read(Cube),
    Fill(Cube, BlockType),
}

/// Wall-clock milliseconds of one round trip of `op`.
pub fn measure_rpc_latency(backend: &mut dyn WorldBackend, op: &RpcOp) -> Result<f64, BackendError> {
    let t = Instant::now();
    match op {
        RpcOp::Spawn(blocks) => backend.spawn_blocks(blocks)?,
        RpcOp::Read(cube) => {
            backend.read_cube(*cube)?;
        }
        RpcOp::Fill(cube, kind) => backend.fill_cube(*cube, *kind)?,
    }
    Ok(t.elapsed().as_secs_f64() * 1e3)
}
