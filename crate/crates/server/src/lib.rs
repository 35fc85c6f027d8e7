//! Network side of the simulator: the wire-compatible gRPC world service, a
//! client backend for it, and the HTTP API for interactive evolution sessions.

pub mod actor;
pub mod convert;
pub mod http;
pub mod remote;
pub mod service;

/// Generated protocol types.
pub mod pb {
    pub mod dk {
        pub mod itu {
            pub mod real {
                pub mod ooe {
                    tonic::include_proto!("dk.itu.real.ooe");
                }
            }
        }
    }

    pub mod evocraft {
        pub mod sim {
            pub mod v1 {
                tonic::include_proto!("evocraft.sim.v1");
            }
        }
    }

    pub use dk::itu::real::ooe as base;
    pub use evocraft::sim::v1 as sim;
}

/// The vendored base service definition, shipped for clients and schema checks.
pub const BASE_PROTO: &str = include_str!("../proto/minecraft.proto");
pub const SIM_PROTO: &str = include_str!("../proto/simulation.proto");

/// Port the base protocol listens on by default.
pub const DEFAULT_PORT: u16 = 5001;

/// Large reads (a 64-cube is 262144 blocks) exceed tonic's 4 MiB default.
pub const MAX_MESSAGE_BYTES: usize = 64 << 20;

pub use remote::RemoteBackend;
pub use service::{ServeConfig, ServeError, ServerHandle};
