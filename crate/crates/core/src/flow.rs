//! Symplectic integration of the geodesic flow and conservation monitoring.

use crate::error::{Error, Result};
use crate::integral::IntegralCoeffs;
use crate::metric::{Metric, TorusPoint};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseState {
    pub q: TorusPoint,
    pub p: [f64; 2],
    pub time: f64,
}

impl PhaseState {
    pub fn new(u1: f64, u2: f64, p1: f64, p2: f64) -> Self {
        PhaseState {
            q: TorusPoint::new(u1, u2),
            p: [p1, p2],
            time: 0.0,
        }
    }

    fn to_vec(self) -> [f64; 4] {
        [self.q.u1, self.q.u2, self.p[0], self.p[1]]
    }

    fn from_vec(y: [f64; 4], time: f64) -> Self {
        PhaseState {
            q: TorusPoint::new(y[0], y[1]),
            p: [y[2], y[3]],
            time,
        }
    }

    /// Same point with reversed momentum and time reset.
    pub fn reversed(&self) -> Self {
        PhaseState {
            q: self.q,
            p: [-self.p[0], -self.p[1]],
            time: 0.0,
        }
    }

    /// Max-norm distance in `(q, p)`, without reduction modulo the lattice.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        let (a, b) = (self.to_vec(), other.to_vec());
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

/// Gauss-Legendre collocation with one stage (implicit midpoint, order 2)
/// or two stages (order 4). Both are symplectic and symmetric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    ImplicitMidpoint,
    #[default]
    Gauss4,
}

impl Scheme {
    pub fn order(&self) -> u32 {
        match self {
            Scheme::ImplicitMidpoint => 2,
            Scheme::Gauss4 => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Record every `stride` steps (the final state is always recorded).
    pub stride: usize,
    pub scheme: Scheme,
    pub tol: f64,
    pub max_iter: usize,
}

impl FlowOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        FlowOptions {
            t_end,
            dt,
            stride: 1,
            scheme: Scheme::default(),
            tol: 1e-13,
            max_iter: 100,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<PhaseState>,
    pub energy: Vec<f64>,
    /// `monitors[i][k]`: monitor `k` at sample `i`.
    pub monitors: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory is never empty")
    }
}

fn vector_field(metric: &Metric, y: [f64; 4], time: f64) -> Result<[f64; 4]> {
    let (_, hq, hp, scale) = metric.hamiltonian_gradient(TorusPoint::new(y[0], y[1]), [y[2], y[3]]);
    if !(scale > 0.0) {
        return Err(Error::PositivityLost { time });
    }
    Ok([hp[0], hp[1], -hq[0], -hq[1]])
}

const SQRT3_6: f64 = 0.288_675_134_594_812_9;

fn gauss_step(metric: &Metric, y: [f64; 4], h: f64, time: f64, opts: &FlowOptions) -> Result<[f64; 4]> {
    let (a, b): (&[&[f64]], &[f64]) = match opts.scheme {
        Scheme::ImplicitMidpoint => (&[&[0.5]], &[1.0]),
        Scheme::Gauss4 => (
            &[&[0.25, 0.25 - SQRT3_6], &[0.25 + SQRT3_6, 0.25]],
            &[0.5, 0.5],
        ),
    };
    let s = b.len();
    let f0 = vector_field(metric, y, time)?;
    let mut k = vec![f0; s];
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let mut next = Vec::with_capacity(s);
        for row in a.iter() {
            let mut z = y;
            for (j, aij) in row.iter().enumerate() {
                for d in 0..4 {
                    z[d] += h * aij * k[j][d];
                }
            }
            next.push(vector_field(metric, z, time)?);
        }
        let change = next
            .iter()
            .zip(&k)
            .flat_map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        k = next;
        if h * change <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            time,
            iterations: opts.max_iter,
        });
    }
    let mut out = y;
    for (bi, ki) in b.iter().zip(&k) {
        for d in 0..4 {
            out[d] += h * bi * ki[d];
        }
    }
    Ok(out)
}

fn record(metric: &Metric, monitors: &[IntegralCoeffs], st: &PhaseState, traj: &mut Trajectory) -> Result<()> {
    traj.states.push(*st);
    traj.energy.push(metric.hamiltonian(st.q, st.p));
    traj.monitors.push(
        monitors
            .iter()
            .map(|m| m.eval(metric, st.q, st.p))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(())
}

/// Integrate Hamilton's equations of `H` from `initial` over `[0, t_end]`.
pub fn integrate(
    metric: &Metric,
    initial: PhaseState,
    opts: &FlowOptions,
    monitors: &[IntegralCoeffs],
) -> Result<Trajectory> {
    if !(opts.dt > 0.0 && opts.t_end > 0.0) || !opts.dt.is_finite() || !opts.t_end.is_finite() {
        return Err(Error::Invalid(format!("need dt > 0 and T > 0 (dt = {}, T = {})", opts.dt, opts.t_end)));
    }
    if initial.to_vec().iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite initial state".into()));
    }
    if metric.hamiltonian(initial.q, initial.p) <= 0.0 {
        return Err(Error::Invalid("initial state must have H > 0".into()));
    }
    let steps = (opts.t_end / opts.dt - 1e-9).ceil().max(1.0) as usize;
    let h = opts.t_end / steps as f64;
    let mut traj = Trajectory {
        states: Vec::with_capacity(steps / opts.stride.max(1) + 2),
        energy: Vec::new(),
        monitors: Vec::new(),
    };
    let t0 = initial.time;
    let mut y = initial.to_vec();
    record(metric, monitors, &initial, &mut traj)?;
    for n in 0..steps {
        let time = t0 + h * n as f64;
        y = gauss_step(metric, y, h, time, opts)?;
        if (n + 1) % opts.stride.max(1) == 0 || n + 1 == steps {
            record(metric, monitors, &PhaseState::from_vec(y, t0 + h * (n + 1) as f64), &mut traj)?;
        }
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Drift {
    pub name: String,
    pub initial: f64,
    pub max_drift: f64,
    pub relative_drift: f64,
}

/// Max deviation from the initial value for `H` and each monitor.
pub fn conservation_report(traj: &Trajectory) -> Vec<Drift> {
    let drift = |name: String, vals: &mut dyn Iterator<Item = f64>| {
        let first = vals.next().unwrap_or(0.0);
        let max = vals.fold(0.0f64, |m, v| m.max((v - first).abs()));
        Drift {
            name,
            initial: first,
            max_drift: max,
            relative_drift: if first != 0.0 { max / first.abs() } else { max },
        }
    };
    let mut out = vec![drift("H".into(), &mut traj.energy.iter().copied())];
    let nmon = traj.monitors.first().map_or(0, Vec::len);
    for k in 0..nmon {
        out.push(drift(format!("F{k}"), &mut traj.monitors.iter().map(|m| m[k])));
    }
    out
}
