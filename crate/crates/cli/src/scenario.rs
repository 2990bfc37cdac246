//! Evaluating a scenario at one point or over its sweep.

use rayon::prelude::*;

use qfim_core::grid::{oscillation_criteria, qfim_grid, DeformationMap};
use qfim_core::qfim::qcrb_scalar;
use qfim_core::RMatrix;

use crate::config::{AxisValues, AxisVariable, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coord {
    Int(usize),
    Real(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub coords: Vec<(String, Coord)>,
    pub info: RMatrix,
    pub qcrb: Option<f64>,
    /// `1/(ν I_pp)` per parameter, infinite when `I_pp = 0`.
    pub diagonal_qcrb: Vec<f64>,
    pub oscillation: Option<bool>,
    pub wall_time_ms: Option<f64>,
}

/// One point of the sweep, as a list of axis assignments.
#[derive(Debug, Clone)]
struct Point {
    n_cols: usize,
    n_rows: usize,
    params: Vec<f64>,
    coords: Vec<(String, Coord)>,
}

fn sweep_points(cfg: &ScenarioConfig) -> Vec<Point> {
    let base = Point {
        n_cols: cfg.grid.n_cols,
        n_rows: cfg.grid.n_rows,
        params: cfg.params.clone(),
        coords: Vec::new(),
    };
    let mut points = vec![base];
    for axis in &cfg.sweep {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for p in &points {
            for k in 0..axis.values.len() {
                let mut q = p.clone();
                match (&axis.variable, &axis.values) {
                    (AxisVariable::Cols, AxisValues::Integers(v)) => {
                        q.n_cols = v[k];
                        q.coords.push(("N".into(), Coord::Int(v[k])));
                    }
                    (AxisVariable::Rows, AxisValues::Integers(v)) => {
                        q.n_rows = v[k];
                        q.coords.push(("M".into(), Coord::Int(v[k])));
                    }
                    (AxisVariable::Square, AxisValues::Integers(v)) => {
                        q.n_cols = v[k];
                        q.n_rows = v[k];
                        q.coords.push(("N".into(), Coord::Int(v[k])));
                        q.coords.push(("M".into(), Coord::Int(v[k])));
                    }
                    (AxisVariable::Param(i), AxisValues::Reals(v)) => {
                        q.params[*i] = v[k];
                        q.coords.push((axis.name.clone(), Coord::Real(v[k])));
                    }
                    _ => unreachable!("axis kind and values always match"),
                }
                next.push(q);
            }
        }
        points = next;
    }
    points
}

fn evaluate(cfg: &ScenarioConfig, p: &Point, timing: bool) -> qfim_core::Result<ResultRow> {
    let start = std::time::Instant::now();
    let grid = cfg.grid.build(p.n_cols, p.n_rows)?;
    let info = qfim_grid(&grid, &cfg.map, &p.params)?;
    let qcrb = match &cfg.cost {
        Some(cost) => Some(qcrb_scalar(&info, cost, cfg.repetitions)?),
        None => None,
    };
    let nu = cfg.repetitions as f64;
    let diagonal_qcrb = (0..info.dim()).map(|m| 1.0 / (nu * info.get(m, m))).collect();
    let oscillation = matches!(cfg.map, DeformationMap::Rotation).then(|| oscillation_criteria(&grid).oscillates);
    Ok(ResultRow {
        coords: p.coords.clone(),
        info: info.entries,
        qcrb,
        diagonal_qcrb,
        oscillation,
        wall_time_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// The configured single point, ignoring any sweep block.
pub fn compute(cfg: &ScenarioConfig, timing: bool) -> qfim_core::Result<ResultRow> {
    let point = Point {
        n_cols: cfg.grid.n_cols,
        n_rows: cfg.grid.n_rows,
        params: cfg.params.clone(),
        coords: Vec::new(),
    };
    evaluate(cfg, &point, timing)
}

/// All sweep points in sweep order (outer axis slow, inner fast), evaluated
/// in parallel.
pub fn sweep(cfg: &ScenarioConfig, timing: bool) -> qfim_core::Result<Vec<ResultRow>> {
    sweep_points(cfg).par_iter().map(|p| evaluate(cfg, p, timing)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ScenarioConfig {
        ScenarioConfig::parse(text).unwrap()
    }

    #[test]
    fn stretch_point() {
        let c = cfg("grid.N = 3\ngrid.M = 2\ngrid.d_x = 1\ngrid.d_y = 2\ngrid.sigma = 1\ndeformation.kind = stretch\n");
        let row = compute(&c, false).unwrap();
        assert!((row.info[(0, 0)] - 4.0).abs() < 1e-13);
        assert!((row.info[(1, 1)] - 6.0).abs() < 1e-13);
        assert!((row.diagonal_qcrb[0] - 0.25).abs() < 1e-14);
        assert_eq!(row.oscillation, None);
        assert!(row.wall_time_ms.is_none());
    }

    #[test]
    fn sweep_order_is_outer_slow() {
        let c = cfg("grid.N = 1\ngrid.M = 1\ngrid.d_x = 1\ngrid.d_y = 1\ngrid.sigma = 1\ndeformation.kind = stretch\nsweep.variable = N\nsweep.from = 1\nsweep.to = 2\nsweep.inner.variable = M\nsweep.inner.from = 1\nsweep.inner.to = 3\n");
        let rows = sweep(&c, false).unwrap();
        let coords: Vec<(usize, usize)> = rows
            .iter()
            .map(|r| match (r.coords[0].1, r.coords[1].1) {
                (Coord::Int(n), Coord::Int(m)) => (n, m),
                _ => panic!(),
            })
            .collect();
        assert_eq!(coords, vec![(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]);
    }

    #[test]
    fn singular_cost_request_fails() {
        let c = cfg("grid.N = 1\ngrid.M = 1\ngrid.d_x = 1\ngrid.d_y = 1\ngrid.sigma = 1\ndeformation.kind = stretch\ncost_matrix = 1,0;0,1\n");
        assert!(matches!(compute(&c, false), Err(qfim_core::Error::SingularInformation { .. })));
    }
}
