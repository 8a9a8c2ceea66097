//! Per-site driving randomness.
//!
//! Every trajectory is a deterministic function of one master seed. Each
//! lattice site gets its own stream derived by a fixed 64-bit mixer, and a
//! stream yields, per arrival: the arrival time of a unit-rate Poisson
//! clock, a uniform variate that selects the arriving type, and a uniform
//! ordering of the two neighbors. All three are consumed together for every
//! arrival, even when the event turns out to be a no-op or needs no
//! tie-break, so replaying a prefix of events never shifts the stream.
//!
//! The mixer identifier is recorded in run metadata; changing the mixing
//! function is a format break for recorded seeds.

use serde::{Deserialize, Serialize};

use crate::model::{GasCount, ModelSpec, NeighborOrder, State};

/// The master seed of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterSeed(pub u64);

/// Identifier of the sub-seed derivation scheme, stored in run metadata.
pub const MIXER_ID: &str = "splitmix64/v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_B: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_C: u64 = 0x94D0_49BB_1331_11EB;

/// Sub-seed domains keep site streams, replica seeds and coupling draws on
/// disjoint parts of the seed space.
pub(crate) const DOMAIN_SITE: u64 = 0x51;
pub(crate) const DOMAIN_RUN: u64 = 0x52;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_B);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_C);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit sub-seed from (master, domain, index).
pub fn sub_seed(master: MasterSeed, domain: u64, index: u64) -> u64 {
    let a = mix64(master.0 ^ domain.wrapping_mul(GOLDEN));
    mix64(a.wrapping_add(index.wrapping_mul(GOLDEN)).wrapping_add(MIX_B))
}

/// SplitMix64 generator (Vigna's finalizer-based PRNG).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64) / DEN
    }
}

/// The type component of one arrival.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeDraw {
    Gas(State),
    /// Infinite-gas variant: a brand-new molecule (the caller assigns the id).
    FreshNonOne,
}

/// One raw arrival: time, the uniform type variate, the neighbor ordering.
#[derive(Clone, Copy, Debug)]
pub struct RawArrival {
    pub time: f64,
    pub type_u: f64,
    pub order: NeighborOrder,
}

/// The driving randomness of a single site.
#[derive(Clone, Debug)]
pub struct SiteStream {
    site: usize,
    rng: SplitMix64,
    next_time: f64,
    arrivals: u64,
}

impl SiteStream {
    pub fn site(&self) -> usize {
        self.site
    }

    /// Number of arrivals consumed so far.
    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }

    /// Time of the pending arrival.
    pub fn peek_time(&self) -> f64 {
        self.next_time
    }

    /// Consumes the pending arrival: returns its (time, type variate,
    /// ordering) and schedules the next one.
    pub fn next_raw(&mut self) -> RawArrival {
        let time = self.next_time;
        let type_u = self.rng.next_f64();
        let order = if self.rng.next_u64() & 1 == 0 {
            NeighborOrder::PreferLeft
        } else {
            NeighborOrder::PreferRight
        };
        self.next_time = time + exponential(&mut self.rng);
        self.arrivals += 1;
        RawArrival { time, type_u, order }
    }

    /// Consumes the pending arrival and maps its type through the model's
    /// arrival law.
    pub fn next_arrival(&mut self, spec: &ModelSpec) -> (f64, TypeDraw, NeighborOrder) {
        let raw = self.next_raw();
        (raw.time, draw_type(spec, raw.type_u), raw.order)
    }
}

#[inline]
fn exponential(rng: &mut SplitMix64) -> f64 {
    // u < 1, so 1 - u > 0 and the log is finite.
    -(1.0 - rng.next_f64()).ln()
}

/// Maps a uniform variate to an arriving type under the spec's rates.
pub fn draw_type(spec: &ModelSpec, u: f64) -> TypeDraw {
    match spec.gases() {
        GasCount::Finite(n) => {
            let mut acc = 0.0;
            for (i, &p) in spec.rates().iter().enumerate() {
                acc += p;
                if u < acc {
                    return TypeDraw::Gas(i as State + 1);
                }
            }
            TypeDraw::Gas(n)
        }
        GasCount::Infinite => {
            if u < spec.p1() {
                TypeDraw::Gas(1)
            } else {
                TypeDraw::FreshNonOne
            }
        }
    }
}

/// Derives the stream of one site from the master seed. Deterministic:
/// identical inputs produce bit-identical streams.
pub fn derive_stream(seed: MasterSeed, site: usize) -> SiteStream {
    let mut rng = SplitMix64::new(sub_seed(seed, DOMAIN_SITE, site as u64));
    let first = exponential(&mut rng);
    SiteStream { site, rng, next_time: first, arrivals: 0 }
}

/// Everything needed to replay a trajectory bit-exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub master_seed: u64,
    pub mixer: String,
    pub spec: ModelSpec,
}

impl RunMeta {
    pub fn new(seed: MasterSeed, spec: &ModelSpec) -> Self {
        RunMeta { master_seed: seed.0, mixer: MIXER_ID.to_string(), spec: spec.clone() }
    }
}
