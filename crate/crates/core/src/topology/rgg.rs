use super::{CommGraph, NodeId, Position};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Side length of the deployment square, in meters.
pub const DEFAULT_SIDE: f64 = 100.0;

/// Parameters of a random geometric graph on a square field.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RggParams {
    pub n: usize,
    /// Transmission range in meters.
    pub radius: f64,
    pub seed: u64,
    #[serde(default = "default_side")]
    pub side: f64,
}

fn default_side() -> f64 {
    DEFAULT_SIDE
}

impl RggParams {
    pub fn new(n: usize, radius: f64, seed: u64) -> Self {
        Self {
            n,
            radius,
            seed,
            side: DEFAULT_SIDE,
        }
    }

    /// Places `n` nodes uniformly on a `side`×`side` square and links every
    /// pair within `radius`. Node ids are `0..n`.
    ///
    /// Panics if `n < 2`, `radius` is negative or NaN, or `side` is not a
    /// positive finite number.
    pub fn generate(&self) -> CommGraph {
        assert!(self.n >= 2, "need at least two nodes");
        assert!(self.radius >= 0.0, "radius must be non-negative");
        assert!(self.side.is_finite() && self.side > 0.0, "bad side length");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let nodes: Vec<(NodeId, Position)> = (0..self.n)
            .map(|i| {
                let x = rng.gen::<f64>() * self.side;
                let y = rng.gen::<f64>() * self.side;
                (NodeId(i as u32), Position::new(x, y))
            })
            .collect();
        // Coincident draws have probability ~0; they would surface as a
        // zero-length edge error here.
        CommGraph::unit_disk(nodes, self.radius).expect("generated nodes are valid")
    }
}

/// Random geometric graph on the default square field.
pub fn generate_rgg(n: usize, radius: f64, seed: u64) -> CommGraph {
    RggParams::new(n, radius, seed).generate()
}
