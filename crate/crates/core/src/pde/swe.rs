//! Coupled 1D shallow-water solver and the velocity history it records.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::pde::rk3::tvdrk3_step;
use crate::pde::weno::{flux_difference, Boundary};
use crate::scalar::{first_non_finite, Real};

pub const GRAVITY: f64 = 9.81;

/// How the Lax–Friedrichs splitting speed is chosen for the depth-transport model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TransportSpeed {
    /// `max(|u| + sqrt(g h))` on the transported depth, as for the coupled system.
    #[default]
    GravityWave,
    /// `max |u|`, the characteristic speed of the transport equation alone.
    Advective,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub cfl: T,
    pub gravity: T,
    pub boundary: Boundary,
    pub transport_speed: TransportSpeed,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(cfl: T) -> Result<Self> {
        if !(cfl > T::zero() && cfl < T::one()) {
            return Err(Error::InvalidParameter(format!("CFL number {cfl} outside (0, 1)")));
        }
        Ok(Self {
            cfl,
            gravity: T::lit(GRAVITY),
            boundary: Boundary::Fixed,
            transport_speed: TransportSpeed::default(),
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_transport_speed(mut self, speed: TransportSpeed) -> Self {
        self.transport_speed = speed;
        self
    }

    pub fn dt(&self, grid: &Grid1D<T>) -> T {
        self.cfl * grid.dx()
    }

    /// Number of steps covering `[0, t_end]`.
    pub fn steps_for(&self, grid: &Grid1D<T>, t_end: T) -> usize {
        (t_end / self.dt(grid)).round().to_usize().unwrap_or(0)
    }
}

/// Water depth and momentum on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SWEState<T> {
    pub h: Vec<T>,
    pub hu: Vec<T>,
}

impl<T: Real> SWEState<T> {
    pub fn at_rest(h: Vec<T>) -> Self {
        let hu = vec![T::zero(); h.len()];
        Self { h, hu }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn velocity(&self) -> Vec<T> {
        self.h.iter().zip(&self.hu).map(|(&h, &hu)| hu / h).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.len() != self.hu.len() {
            return Err(Error::Dimension("depth and momentum lengths differ".into()));
        }
        if let Some(index) = first_non_finite(&self.h) {
            return Err(Error::NonFinite { what: "depth", index });
        }
        if let Some(index) = first_non_finite(&self.hu) {
            return Err(Error::NonFinite { what: "momentum", index });
        }
        check_depth(&self.h)
    }

    fn flatten(&self) -> Vec<T> {
        let mut v = self.h.clone();
        v.extend_from_slice(&self.hu);
        v
    }

    fn unflatten(mut v: Vec<T>) -> Self {
        let hu = v.split_off(v.len() / 2);
        Self { h: v, hu }
    }
}

fn check_depth<T: Real>(h: &[T]) -> Result<()> {
    match h.iter().position(|&d| !(d > T::zero())) {
        Some(index) => Err(Error::NonPositiveDepth { index, depth: h[index].to_f64_lossy() }),
        None => Ok(()),
    }
}

/// Depth-averaged velocity recorded at every solver step of the coupled run.
///
/// Entry `s` is the velocity at `t0 + s * dt`, the start of step `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField<T> {
    pub dt: T,
    pub t0: T,
    u_history: Vec<Vec<T>>,
}

impl<T: Real> VelocityField<T> {
    pub fn new(dt: T, t0: T, u_history: Vec<Vec<T>>) -> Result<Self> {
        if let Some(first) = u_history.first() {
            if u_history.iter().any(|u| u.len() != first.len()) {
                return Err(Error::Dimension("velocity snapshots differ in length".into()));
            }
        }
        Ok(Self { dt, t0, u_history })
    }

    /// Zero velocity for `steps + 1` step indices.
    pub fn at_rest(n: usize, steps: usize, dt: T) -> Self {
        Self { dt, t0: T::zero(), u_history: vec![vec![T::zero(); n]; steps + 1] }
    }

    pub fn steps(&self) -> usize {
        self.u_history.len()
    }

    pub fn at(&self, step: usize) -> Result<&[T]> {
        self.u_history
            .get(step)
            .map(Vec::as_slice)
            .ok_or(Error::StepOutOfRange { requested: step, available: self.u_history.len() })
    }

    /// CSV cache with columns `step,x_index,u`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "x_index", "u"])?;
        w.write_record(["#dt", "", &format!("{:.16e}", self.dt)])?;
        w.write_record(["#t0", "", &format!("{:.16e}", self.t0)])?;
        for (s, u) in self.u_history.iter().enumerate() {
            for (i, v) in u.iter().enumerate() {
                w.write_record([s.to_string(), i.to_string(), format!("{v:.16e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut dt = None;
        let mut t0 = T::zero();
        let mut history: Vec<Vec<T>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| -> Result<T> {
                s.parse::<T>().map_err(|_| Error::Parse(format!("bad number {s:?} in velocity cache")))
            };
            match &rec[0] {
                "#dt" => dt = Some(parse(&rec[2])?),
                "#t0" => t0 = parse(&rec[2])?,
                s => {
                    let step: usize =
                        s.parse().map_err(|_| Error::Parse(format!("bad step {s:?}")))?;
                    let idx: usize = rec[1]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad index {:?}", &rec[1])))?;
                    if step == history.len() {
                        history.push(Vec::new());
                    }
                    if step + 1 != history.len() || idx != history[step].len() {
                        return Err(Error::Parse(format!(
                            "velocity cache out of order at step {step}, index {idx}"
                        )));
                    }
                    history[step].push(parse(&rec[2])?);
                }
            }
        }
        let dt = dt.ok_or_else(|| Error::Parse("velocity cache missing #dt row".into()))?;
        Self::new(dt, t0, history)
    }
}

/// Semi-discrete right-hand side of the conservative shallow-water system.
pub fn swe_rhs<T: Real>(flat: &[T], dx: T, config: &SolverConfig<T>) -> Result<Vec<T>> {
    let n = flat.len() / 2;
    let (h, hu) = flat.split_at(n);
    check_depth(h)?;
    let g = config.gravity;
    let half = T::lit(0.5);
    let ph = config.boundary.pad(h);
    let phu = config.boundary.pad(hu);
    let mut lambda = T::zero();
    let mut f2 = Vec::with_capacity(ph.len());
    for (&d, &m) in ph.iter().zip(&phu) {
        let u = m / d;
        lambda = lambda.max(u.abs() + (g * d).sqrt());
        f2.push(m * u + half * g * d * d);
    }
    let mut rh = flux_difference(&ph, &phu, lambda, dx);
    let mut rhu = flux_difference(&phu, &f2, lambda, dx);
    match config.boundary {
        Boundary::Fixed => {
            for r in [&mut rh, &mut rhu] {
                r[0] = T::zero();
                let last = r.len() - 1;
                r[last] = T::zero();
            }
        }
        Boundary::Periodic => {
            rh.push(rh[0]);
            rhu.push(rhu[0]);
        }
    }
    rh.extend(rhu);
    Ok(rh)
}

/// One TVD-RK3 step of the coupled system.
pub fn swe_step<T: Real>(
    state: &SWEState<T>,
    grid: &Grid1D<T>,
    config: &SolverConfig<T>,
    step: usize,
) -> Result<SWEState<T>> {
    let dx = grid.dx();
    let next = tvdrk3_step(&state.flatten(), config.dt(grid), step, |u| swe_rhs(u, dx, config))?;
    let next = SWEState::unflatten(next);
    check_depth(&next.h)?;
    Ok(next)
}

/// Integrates `steps` steps, handing every state (including the initial one) to `observe`.
pub fn integrate_coupled_swe<T: Real>(
    initial: &SWEState<T>,
    grid: &Grid1D<T>,
    config: &SolverConfig<T>,
    steps: usize,
    mut observe: impl FnMut(usize, &SWEState<T>),
) -> Result<SWEState<T>> {
    if initial.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "state has {} points, grid has {}",
            initial.len(),
            grid.len()
        )));
    }
    initial.validate()?;
    let mut state = initial.clone();
    if config.boundary == Boundary::Fixed {
        let last = state.len() - 1;
        state.hu[0] = T::zero();
        state.hu[last] = T::zero();
    }
    observe(0, &state);
    for s in 0..steps {
        state = swe_step(&state, grid, config, s)?;
        observe(s + 1, &state);
    }
    Ok(state)
}

/// Full trajectory to `t_end` together with the velocity at every step.
pub fn solve_coupled_swe<T: Real>(
    initial: &SWEState<T>,
    grid: &Grid1D<T>,
    config: &SolverConfig<T>,
    t_end: T,
) -> Result<(Vec<SWEState<T>>, VelocityField<T>)> {
    if !(t_end > T::zero()) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must be positive")));
    }
    let steps = config.steps_for(grid, t_end);
    let mut trajectory = Vec::with_capacity(steps + 1);
    let mut u = Vec::with_capacity(steps + 1);
    integrate_coupled_swe(initial, grid, config, steps, |_, s| {
        u.push(s.velocity());
        trajectory.push(s.clone());
    })?;
    let velocity = VelocityField::new(config.dt(grid), T::zero(), u)?;
    Ok((trajectory, velocity))
}
