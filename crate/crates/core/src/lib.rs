//! Construction, fusion, enrichment and search of an API knowledge graph
//! and a programming-task knowledge graph mined from documentation.

pub mod resources;
pub mod textproc;
pub mod apikg;
pub mod packet;
pub mod taskkg;
pub mod graphstore;
pub mod fusion;
pub mod enrich_api;
pub mod enrich_task;
pub mod search;
pub mod pipeline;
