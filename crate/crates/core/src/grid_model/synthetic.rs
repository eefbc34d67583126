use super::{BranchRecord, BusId, BusType, GridCase, GridError};

/// Parameters for [`tile_case`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileOptions {
    pub copies: usize,
    /// Tie lines between consecutive copies.
    pub ties_per_seam: usize,
    pub tie_r: f64,
    pub tie_x: f64,
}

impl Default for TileOptions {
    fn default() -> Self {
        Self {
            copies: 2,
            ties_per_seam: 4,
            tie_r: 0.005,
            tie_x: 0.05,
        }
    }
}

/// Larger test network made of `copies` replicas of `base` joined by unlimited tie lines.
///
/// Bus ids of copy `k` are shifted by `k·10^d` where `10^d` exceeds every base id.
/// Only the first copy keeps its slack bus; the others become PV buses.
pub fn tile_case(base: &GridCase, options: &TileOptions) -> Result<GridCase, GridError> {
    let max_id = base.buses.iter().map(|b| b.id.0).max().unwrap_or(0);
    let mut stride = 10u64;
    while stride <= max_id {
        stride *= 10;
    }
    let shift = |id: BusId, k: usize| BusId(id.0 + k as u64 * stride);

    let mut buses = Vec::with_capacity(base.buses.len() * options.copies);
    let mut gens = Vec::with_capacity(base.gens.len() * options.copies);
    let mut branches = Vec::with_capacity(base.branches.len() * options.copies);
    for k in 0..options.copies {
        for b in &base.buses {
            let mut b = b.clone();
            b.id = shift(b.id, k);
            if k > 0 && b.bus_type == BusType::Slack {
                b.bus_type = BusType::Pv;
            }
            buses.push(b);
        }
        for g in &base.gens {
            let mut g = g.clone();
            g.bus = shift(g.bus, k);
            gens.push(g);
        }
        for br in &base.branches {
            let mut br = br.clone();
            br.from_bus = shift(br.from_bus, k);
            br.to_bus = shift(br.to_bus, k);
            branches.push(br);
        }
    }

    let n = base.buses.len();
    let ties = options.ties_per_seam.min(n);
    for k in 1..options.copies {
        for t in 0..ties {
            let id = base.buses[(t * n) / ties.max(1)].id;
            branches.push(BranchRecord {
                from_bus: shift(id, k - 1),
                to_bus: shift(id, k),
                r: options.tie_r,
                x: options.tie_x,
                b_charging: 0.0,
                tap_ratio: 1.0,
                phase_shift: 0.0,
                rate_a: 0.0,
                in_service: true,
            });
        }
    }
    let name = format!("{}x{}", base.name, options.copies);
    GridCase::new(name, base.base_mva, buses, gens, branches)
}
