//! `focinet` builds temporal, multilayer affiliation networks out of
//! registry-style tables and analyzes them.
//!
//! The pipeline runs in stages:
//!
//! 1. [`registry`] loads and validates the seven input tables (persons,
//!    parent links, residences, addresses, employment, enrollment, income).
//! 2. [`synth`] generates deterministic synthetic registries so the whole
//!    pipeline can run without access to restricted data.
//! 3. [`household`] assigns yearly household identifiers with the couple,
//!    child-attachment, and id-stability rules.
//! 4. [`layers`] builds the five yearly relation layers (family, household,
//!    neighborhood, colleague, classmate) in both the individual-centered
//!    and the bipartite representation.
//! 5. [`graph`] merges slices over years and layers into immutable views,
//!    projects bipartite views, and answers degree queries.
//! 6. [`weights`], [`metrics`], [`hocc`], and [`paths`] compute edge
//!    weights, descriptive statistics, higher-order clustering, and sampled
//!    shortest-path distributions on those views.
//!
//! All randomness is driven by explicit seeds through [`rng`]; rerunning any
//! stage with the same inputs and seed reproduces identical output bytes.

pub mod graph;
pub mod hocc;
pub mod household;
pub mod layers;
pub mod metrics;
pub mod paths;
pub mod registry;
pub mod rng;
pub mod synth;
pub mod weights;

pub use registry::{PersonId, RegistryBundle};
