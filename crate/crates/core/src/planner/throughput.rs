use std::time::Instant;

use serde::Serialize;

use super::mppi::{MppiParams, MppiPlanner};
use crate::costmap::CostMap;
use crate::grid::Grid;
use crate::rng;
use crate::world::VehicleParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub samples: usize,
    pub horizon: usize,
    pub cells: usize,
    pub calls: usize,
    pub median_ms: f64,
    pub hz: f64,
}

/// A square cost map of `cells × cells` with smooth pseudo-random texture.
pub fn benchmark_map(cells: usize) -> CostMap {
    let grid = Grid::from_fn(cells, cells, |x, y| 100.0 * rng::uniform(&[0xbe9c, (x / 4) as u64, (y / 4) as u64]));
    CostMap::new(grid, 0.1, 100.0)
}

/// Median wall-clock rate of warm-started planner calls.
pub fn measure_throughput(params: MppiParams, cells: usize, calls: usize) -> ThroughputReport {
    let map = benchmark_map(cells);
    let mut planner = MppiPlanner::new(params, VehicleParams::default());
    planner.plan(&map, 0);
    let mut times: Vec<f64> = (0..calls.max(1))
        .map(|i| {
            let start = Instant::now();
            std::hint::black_box(planner.plan(&map, i as u64 + 1));
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    ThroughputReport {
        samples: params.samples,
        horizon: params.horizon,
        cells,
        calls: times.len(),
        median_ms: median * 1e3,
        hz: 1.0 / median,
    }
}
