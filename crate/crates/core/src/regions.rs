//! Torus scans of the root pattern of `Ĝ`, elliptic components, and the
//! constancy/transport checks for genuine integrals.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hydro::analyze_point;
use crate::integral::{bracket_residual, IntegralCoeffs};
use crate::metric::{Lattice, Metric, Model, SemiGeodesicMetric, TorusPoint};
use crate::roots::RootClass;

pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct NodeSummary {
    pub class: RootClass,
    /// Pair members first, then real roots ascending.
    pub roots: Vec<Complex64>,
    /// `r_i` aligned with `roots`; empty when unavailable.
    pub invariants: Vec<Complex64>,
    /// `(Re, Im)` of the pair invariant (of `r²` for odd degree).
    pub pair: Option<(f64, f64)>,
    /// `(s, λ, r)` for each real root, ascending in `s`.
    pub real: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionMap {
    pub nx: usize,
    pub ny: usize,
    pub lattice: Lattice,
    pub degree: usize,
    /// Row-major in `(i, j)`: node `(i L1/nx, j L2/ny)` is `nodes[i * ny + j]`.
    pub nodes: Vec<NodeSummary>,
}

impl RegionMap {
    pub fn class(&self, i: usize, j: usize) -> RootClass {
        self.nodes[i * self.ny + j].class
    }

    pub fn point(&self, i: usize, j: usize) -> TorusPoint {
        self.lattice.grid_point(i, j, self.nx, self.ny)
    }

    pub fn count(&self, class: RootClass) -> usize {
        self.nodes.iter().filter(|n| n.class == class).count()
    }

    /// Binary PGM (P5), `u2` down the rows and `u1` along the columns.
    /// Hyperbolic 255, elliptic 128, degenerate 0.
    pub fn to_pgm(&self, comments: &[String]) -> Vec<u8> {
        let mut out = b"P5\n".to_vec();
        for c in comments {
            out.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        out.extend_from_slice(format!("{} {}\n255\n", self.nx, self.ny).as_bytes());
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(match self.class(i, j) {
                    RootClass::Hyperbolic => 255,
                    RootClass::Elliptic => 128,
                    RootClass::Degenerate => 0,
                });
            }
        }
        out
    }
}

fn summarize(a: &[f64], g: f64, tol: f64) -> Result<NodeSummary> {
    let pa = analyze_point(a, g, tol)?;
    let roots = pa.roots.as_ref().map(|r| r.all_roots()).unwrap_or_default();
    let invariants = pa
        .riemann
        .as_ref()
        .map(|d| d.entries.iter().map(|e| e.r).collect())
        .unwrap_or_default();
    let (pair, real) = match &pa.riemann {
        Some(d) => {
            let pair = d.entries.iter().find(|e| e.s.im > 0.0).map(|e| {
                let w = if pa.n % 2 == 1 { e.r_squared } else { e.r };
                (w.re, w.im)
            });
            let real = d.real_entries().map(|e| (e.s.re, e.lambda.re, e.r.re)).collect();
            (pair, real)
        }
        None => (None, Vec::new()),
    };
    Ok(NodeSummary {
        class: pa.class,
        roots,
        invariants,
        pair,
        real,
    })
}

/// Classify every node of an `nx × ny` grid.
pub fn scan_torus(f: &IntegralCoeffs, metric: &SemiGeodesicMetric, nx: usize, ny: usize, tol: f64) -> Result<RegionMap> {
    if nx < MIN_RESOLUTION || ny < MIN_RESOLUTION {
        return Err(Error::GridTooSmall {
            nx,
            ny,
            min: MIN_RESOLUTION,
        });
    }
    if f.model() != Model::SemiGeodesic {
        return Err(Error::ModelMismatch("region scans need a semi-geodesic integral".into()));
    }
    if !(f.degree() == 3 || f.degree() == 4) {
        return Err(Error::UnsupportedDegree(f.degree()));
    }
    let lattice = metric.g.lattice();
    let nodes = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let q = lattice.grid_point(k / ny, k % ny, nx, ny);
            let a = f.values_at(q);
            if let Some(i) = a.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            summarize(&a, metric.g.value(q), tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionMap {
        nx,
        ny,
        lattice,
        degree: f.degree(),
        nodes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub nodes: Vec<(usize, usize)>,
    /// Some node has a non-elliptic 4-neighbour.
    pub touches_boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSet {
    pub components: Vec<Component>,
}

fn neighbours(i: usize, j: usize, nx: usize, ny: usize) -> [(usize, usize); 4] {
    [
        ((i + 1) % nx, j),
        ((i + nx - 1) % nx, j),
        (i, (j + 1) % ny),
        (i, (j + ny - 1) % ny),
    ]
}

/// Elliptic components under periodic 4-adjacency, in scan order.
pub fn connected_components(map: &RegionMap) -> ComponentSet {
    let (nx, ny) = (map.nx, map.ny);
    let mut seen = vec![false; nx * ny];
    let mut components = Vec::new();
    for start in 0..nx * ny {
        if seen[start] || map.nodes[start].class != RootClass::Elliptic {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([(start / ny, start % ny)]);
        let mut comp = Component {
            nodes: Vec::new(),
            touches_boundary: false,
        };
        while let Some((i, j)) = queue.pop_front() {
            comp.nodes.push((i, j));
            for (a, b) in neighbours(i, j, nx, ny) {
                let k = a * ny + b;
                if map.nodes[k].class != RootClass::Elliptic {
                    comp.touches_boundary = true;
                } else if !seen[k] {
                    seen[k] = true;
                    queue.push_back((a, b));
                }
            }
        }
        comp.nodes.sort_unstable();
        components.push(comp);
    }
    ComponentSet { components }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentDeviation {
    pub size: usize,
    pub touches_boundary: bool,
    pub u_deviation: f64,
    pub v_deviation: f64,
    /// `max |v|` when the component has a boundary.
    pub max_abs_v: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstancyReport {
    pub applicable: bool,
    pub message: String,
    pub bracket_max: f64,
    pub components: Vec<ComponentDeviation>,
    /// Largest `|(r_i)_t + λ_i (r_i)_x|` over real invariants.
    pub transport_max: f64,
    pub transport_nodes: usize,
}

pub const INTEGRAL_PRECONDITION_TOL: f64 = 1e-8;

/// Constancy of the pair invariant on elliptic components and transport of
/// the real invariants, by centered differences on the scan grid.
pub fn constancy_and_transport_check(map: &RegionMap, metric: &SemiGeodesicMetric, f: &IntegralCoeffs) -> ConstancyReport {
    let m = Metric::SemiGeodesic(metric.clone());
    let (nx, ny) = (map.nx, map.ny);
    let bracket_max = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            bracket_residual(f, &m, map.point(k / ny, k % ny))
                .map(|r| r.iter().fold(0.0f64, |m, c| m.max(c.abs())))
                .unwrap_or(f64::INFINITY)
        })
        .reduce(|| 0.0, f64::max);
    if !(bracket_max <= INTEGRAL_PRECONDITION_TOL) {
        return ConstancyReport {
            applicable: false,
            message: format!("not an integral (bracket residual {bracket_max:.3e}); constancy checks inapplicable"),
            bracket_max,
            components: Vec::new(),
            transport_max: 0.0,
            transport_nodes: 0,
        };
    }
    let components = connected_components(map)
        .components
        .iter()
        .map(|c| {
            let pairs: Vec<(f64, f64)> = c
                .nodes
                .iter()
                .filter_map(|&(i, j)| map.nodes[i * ny + j].pair)
                .collect();
            let n = pairs.len().max(1) as f64;
            let (mu, mv) = pairs.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
            let dev = |f: &dyn Fn(&(f64, f64)) -> f64| pairs.iter().map(f).fold(0.0, f64::max);
            ComponentDeviation {
                size: c.nodes.len(),
                touches_boundary: c.touches_boundary,
                u_deviation: dev(&|p| (p.0 - mu).abs()),
                v_deviation: dev(&|p| (p.1 - mv).abs()),
                max_abs_v: c.touches_boundary.then(|| dev(&|p| p.1.abs())),
            }
        })
        .collect();
    let ht = map.lattice.l1 / nx as f64;
    let hx = map.lattice.l2 / ny as f64;
    let residuals: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .flat_map_iter(|k| {
            let (i, j) = (k / ny, k % ny);
            let node = &map.nodes[k];
            let nb = neighbours(i, j, nx, ny).map(|(a, b)| &map.nodes[a * ny + b]);
            let usable = node.class != RootClass::Degenerate
                && nb.iter().all(|o| o.class == node.class && o.real.len() == node.real.len());
            let out: Vec<f64> = if usable {
                (0..node.real.len())
                    .map(|r| {
                        let rt = (nb[0].real[r].2 - nb[1].real[r].2) / (2.0 * ht);
                        let rx = (nb[2].real[r].2 - nb[3].real[r].2) / (2.0 * hx);
                        (rt + node.real[r].1 * rx).abs()
                    })
                    .collect()
            } else {
                Vec::new()
            };
            out
        })
        .collect();
    ConstancyReport {
        applicable: true,
        message: "integral confirmed on the grid".into(),
        bracket_max,
        components,
        transport_max: residuals.iter().fold(0.0, |m: f64, r| m.max(*r)),
        transport_nodes: residuals.len(),
    }
}
