//! The 2π-periodic limit orbit and its monodromy.
//!
//! The generating oscillator `ẍ = −2d x^{2d−1}` is integrated at the energy
//! `E*` where its period is 2π, starting from the turning point `x = E*^{1/(2d)}`.
//! The limit profile is `q̄ = c·x` with `c = (2d(2+ε)/|⟨a⟩|)^{1/(2d−2)}`, which
//! solves `(2+ε)q̈ + |⟨a⟩| q^{2d−1} = 0`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use super::period::{period_derivative, solve_period_equation};
use crate::error::{precondition, Error, Result};
use crate::fourier::Series2D;
use crate::numerics::{linear_fit, S15ODR8};

/// Integration steps per period.
pub const ORBIT_STEPS: usize = 4096;
/// Largest admissible relative energy drift.
pub const ENERGY_DRIFT_MAX: f64 = 1e-10;
/// Points in the exported orbit table.
pub const ORBIT_CSV_POINTS: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitOrbit {
    pub d: u32,
    pub mean_a: f64,
    pub eps: f64,
    pub e_star: f64,
    pub scale: f64,
    /// `q̄(φ₂)` as a series in the box `(0, K)`; only odd `l₂` are nonzero.
    pub qbar: Series2D,
    /// Cosine coefficients `b_j` with `q̄ = Σ b_j cos(jφ₂)`.
    pub cosine: Vec<f64>,
    pub monodromy: [[f64; 2]; 2],
    pub dt_de: f64,
    pub energy_drift: f64,
    /// Geometric ratio between consecutive odd harmonics, fitted on the resolved spectrum.
    pub decay_rate: f64,
    /// `(φ₂, x, ẋ)` of the generating orbit on the integration grid.
    #[serde(skip)]
    samples: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromyReport {
    pub matrix: [[f64; 2]; 2],
    pub trace: f64,
    /// Frobenius norm of `M − I`.
    pub distance_from_identity: f64,
    /// `|Mv − v|` for `v = (q̄′(0), q̄″(0))`; zero vector for the harmonic control.
    pub floquet_defect: f64,
    pub nondegenerate: bool,
}

/// Orbit and variational state: `(x, ẋ)` and the two columns of the fundamental matrix.
#[derive(Clone, Copy)]
struct State {
    x: f64,
    v: f64,
    h: [[f64; 2]; 2],
}

fn force(d: u32, x: f64) -> f64 {
    -2.0 * f64::from(d) * x.powi(2 * d as i32 - 1)
}

fn force_gradient(d: u32, x: f64) -> f64 {
    let k = 2.0 * f64::from(d);
    -k * (k - 1.0) * x.powi(2 * d as i32 - 2)
}

fn energy(d: u32, x: f64, v: f64) -> f64 {
    0.5 * v * v + x.powi(2 * d as i32)
}

/// One kick-drift-kick step of length `tau`; the fundamental matrix is advanced
/// by the exact linearization, so it stays symplectic.
fn verlet(d: u32, s: &mut State, tau: f64) {
    let half = 0.5 * tau;
    let k = force_gradient(d, s.x);
    s.v += half * force(d, s.x);
    for col in &mut s.h {
        col[1] += half * k * col[0];
    }
    s.x += tau * s.v;
    for col in &mut s.h {
        col[0] += tau * col[1];
    }
    let k = force_gradient(d, s.x);
    s.v += half * force(d, s.x);
    for col in &mut s.h {
        col[1] += half * k * col[0];
    }
}

fn step(d: u32, s: &mut State, dt: f64) {
    for w in S15ODR8 {
        verlet(d, s, w * dt);
    }
}

struct Trajectory {
    samples: Vec<(f64, f64, f64)>,
    end: State,
    drift: f64,
}

fn integrate(d: u32, e: f64, period: f64, steps: usize) -> Trajectory {
    let x0 = e.powf(1.0 / (2.0 * f64::from(d)));
    let mut s = State {
        x: x0,
        v: 0.0,
        h: [[1.0, 0.0], [0.0, 1.0]],
    };
    let e0 = energy(d, s.x, s.v);
    let dt = period / steps as f64;
    let mut samples = Vec::with_capacity(steps);
    let mut drift: f64 = 0.0;
    for i in 0..steps {
        samples.push((i as f64 * dt, s.x, s.v));
        step(d, &mut s, dt);
        drift = drift.max((energy(d, s.x, s.v) - e0).abs() / e0);
    }
    Trajectory {
        samples,
        end: s,
        drift,
    }
}

fn matrix(end: &State) -> [[f64; 2]; 2] {
    // Columns of h are the solutions from (1, 0) and (0, 1).
    [[end.h[0][0], end.h[1][0]], [end.h[0][1], end.h[1][1]]]
}

fn report(m: [[f64; 2]; 2], v: [f64; 2]) -> MonodromyReport {
    let trace = m[0][0] + m[1][1];
    let distance_from_identity =
        ((m[0][0] - 1.0).powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + (m[1][1] - 1.0).powi(2))
            .sqrt();
    let mv = [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ];
    let floquet_defect = ((mv[0] - v[0]).powi(2) + (mv[1] - v[1]).powi(2)).sqrt();
    MonodromyReport {
        matrix: m,
        trace,
        distance_from_identity,
        floquet_defect,
        nondegenerate: (trace - 2.0).abs() < 1e-6 && distance_from_identity > 1e-3,
    }
}

/// Builds the limit orbit for `⟨a_{2d−1}⟩ = mean_a` with `K` stored harmonics.
pub fn limit_orbit(d: u32, mean_a: f64, eps: f64, harmonics: i32) -> Result<LimitOrbit> {
    if d < 2 {
        return Err(precondition("the limit orbit needs d ≥ 2"));
    }
    let sign = if eps < 0.0 { -1.0 } else { 1.0 };
    if !(sign * mean_a > 0.0) {
        return Err(precondition(format!(
            "sign hypothesis violated: ε·⟨a⟩ must be positive (ε = {eps}, ⟨a⟩ = {mean_a})"
        )));
    }
    if harmonics < 1 {
        return Err(precondition("at least one harmonic is needed"));
    }
    let e_star = solve_period_equation(d, 2.0 * PI)?;
    let traj = integrate(d, e_star, 2.0 * PI, ORBIT_STEPS);
    if traj.drift > ENERGY_DRIFT_MAX {
        return Err(Error::Integrator(format!(
            "relative energy drift {:.3e} exceeds {ENERGY_DRIFT_MAX:.0e}",
            traj.drift
        )));
    }
    let scale =
        (2.0 * f64::from(d) * (2.0 + eps) / mean_a.abs()).powf(1.0 / (2.0 * f64::from(d) - 2.0));

    let n = traj.samples.len() as f64;
    let mut qbar = Series2D::zero(0, harmonics);
    let mut cosine = Vec::with_capacity(harmonics as usize + 1);
    for j in 0..=harmonics {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(t, x, _) in &traj.samples {
            acc += Complex64::from_polar(x, -f64::from(j) * t);
        }
        // The orbit is even about t = 0: the coefficients are real.
        let c = scale * acc.re / n;
        qbar.set((0, j), Complex64::new(c, 0.0));
        cosine.push(if j == 0 { c } else { 2.0 * c });
    }

    let floor = 1e-13 * cosine[1].abs();
    let (js, logs): (Vec<f64>, Vec<f64>) = (1..=harmonics)
        .step_by(2)
        .filter(|&j| cosine[j as usize].abs() > floor)
        .map(|j| (f64::from(j), cosine[j as usize].abs().ln()))
        .unzip();
    let decay_rate = if js.len() >= 2 {
        linear_fit(&js, &logs).0.exp()
    } else {
        0.0
    };

    Ok(LimitOrbit {
        d,
        mean_a,
        eps,
        e_star,
        scale,
        qbar,
        cosine,
        monodromy: matrix(&traj.end),
        dt_de: period_derivative(e_star, d)?,
        energy_drift: traj.drift,
        decay_rate,
        samples: traj.samples,
    })
}

impl LimitOrbit {
    /// `q̄` placed in a box `(m1, m2)`.
    pub fn qbar_in(&self, m1: i32, m2: i32) -> Series2D {
        self.qbar.rebox(m1, m2)
    }

    pub fn value(&self, phi2: f64) -> f64 {
        self.cosine
            .iter()
            .enumerate()
            .map(|(j, b)| b * (j as f64 * phi2).cos())
            .sum()
    }

    /// `max q̄ = c E*^{1/(2d)}`.
    pub fn amplitude(&self) -> f64 {
        self.scale * self.e_star.powf(1.0 / (2.0 * f64::from(self.d)))
    }

    /// Sup of `(2+ε)q̈ + |⟨a⟩| q^{2d−1}` on `points` equispaced nodes, shifted by `theta`.
    pub fn collocation_residual(&self, points: usize, theta: f64) -> f64 {
        let q = self.qbar.translate(0.0, theta);
        let qdd = q
            .partial(crate::fourier::Axis::Phi2)
            .partial(crate::fourier::Axis::Phi2);
        let k = 2 * self.d as i32 - 1;
        (0..points)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / points as f64;
                ((2.0 + self.eps) * qdd.evaluate(0.0, t)
                    + self.mean_a.abs() * q.evaluate(0.0, t).powi(k))
                .abs()
            })
            .fold(0.0, f64::max)
    }

    /// Writes `phi2,qbar` rows on [`ORBIT_CSV_POINTS`] equispaced points.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let stride = self.samples.len() / ORBIT_CSV_POINTS;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["phi2", "qbar"])?;
        for &(t, x, _) in self.samples.iter().step_by(stride) {
            w.write_record([format!("{t:.17e}"), format!("{:.17e}", self.scale * x)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Same table as [`LimitOrbit::write_csv`] into any writer.
    pub fn write_csv_to(&self, out: impl Write) -> Result<()> {
        let stride = self.samples.len() / ORBIT_CSV_POINTS;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["phi2", "qbar"])?;
        for &(t, x, _) in self.samples.iter().step_by(stride) {
            w.write_record([format!("{t:.17e}"), format!("{:.17e}", self.scale * x)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Monodromy verdict for the orbit; the Floquet vector is `(q̄′(0), q̄″(0))`.
pub fn monodromy(orbit: &LimitOrbit) -> MonodromyReport {
    let x0 = orbit.e_star.powf(1.0 / (2.0 * f64::from(orbit.d)));
    report(orbit.monodromy, [0.0, orbit.scale * force(orbit.d, x0)])
}

/// Monodromy of the generating oscillator at energy `e` over time `period`.
///
/// With `d = 1` and `period = π√2` this is the isochronous control, `M = I`.
pub fn monodromy_over(d: u32, e: f64, period: f64) -> Result<MonodromyReport> {
    if d < 1 || !(e > 0.0) || !(period > 0.0) {
        return Err(precondition(
            "monodromy needs d ≥ 1, E > 0 and a positive period",
        ));
    }
    let traj = integrate(d, e, period, ORBIT_STEPS);
    if traj.drift > ENERGY_DRIFT_MAX {
        return Err(Error::Integrator(format!(
            "relative energy drift {:.3e}",
            traj.drift
        )));
    }
    let x0 = e.powf(1.0 / (2.0 * f64::from(d)));
    Ok(report(matrix(&traj.end), [0.0, force(d, x0)]))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::SQRT_2;

    use super::*;

    #[test]
    fn quartic_orbit_shape() {
        let o = limit_orbit(2, 2.0, 0.0, 32).unwrap();
        assert_eq!(o.scale, 2.0);
        assert!((o.e_star.powf(0.25) - 0.5901702995).abs() < 1e-9);
        assert!((o.value(0.0) - o.amplitude()).abs() < 1e-12);
        assert!(o.energy_drift < ENERGY_DRIFT_MAX);
        for j in (0..=32).step_by(2) {
            assert!(
                o.cosine[j].abs() < 1e-14,
                "even harmonic {j}: {}",
                o.cosine[j]
            );
        }
        assert!(o.cosine[1] > 0.0);
        assert!(
            o.decay_rate > 0.15 && o.decay_rate < 0.3,
            "{}",
            o.decay_rate
        );
        assert!(o.qbar.reality_defect() < 1e-15);
    }

    #[test]
    fn orbit_solves_limit_equation() {
        for (d, a, eps) in [(2, 2.0, 0.0), (2, -1.5, -0.01), (3, 1.0, 0.02)] {
            let o = limit_orbit(d, a, eps, 32).unwrap();
            for theta in [0.0, 0.7, 2.0, 4.5] {
                let r = o.collocation_residual(256, theta);
                assert!(r < 1e-9, "d={d} θ={theta}: {r}");
            }
        }
    }

    #[test]
    fn sign_hypothesis() {
        assert!(limit_orbit(2, -1.0, 1e-4, 16).is_err());
        assert!(limit_orbit(2, 1.0, -1e-4, 16).is_err());
        assert!(limit_orbit(2, 0.0, 1e-4, 16).is_err());
        assert!(limit_orbit(1, 1.0, 1e-4, 16).is_err());
    }

    #[test]
    fn quartic_monodromy_is_parabolic() {
        let o = limit_orbit(2, 2.0, 0.0, 32).unwrap();
        let r = monodromy(&o);
        assert!((r.trace - 2.0).abs() < 1e-6);
        assert!(r.distance_from_identity > 1e-3);
        assert!(r.floquet_defect < 1e-8);
        assert!(r.nondegenerate);
        let m = r.matrix;
        assert!((m[0][0] * m[1][1] - m[0][1] * m[1][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monodromy_shear_matches_period_slope() {
        // Along the family, a shift δE delays the return by (dT/dE)·δE, so
        // M₂₁ = −ẍ(0)·∂T/∂x₀ with ∂T/∂x₀ = dT/dE · dE/dx₀.
        let o = limit_orbit(2, 2.0, 0.0, 16).unwrap();
        let x0 = o.e_star.powf(0.25);
        let de_dx0 = 4.0 * x0.powi(3);
        let expected = -force(2, x0) * o.dt_de * de_dx0;
        assert!((o.monodromy[1][0] - expected).abs() < 1e-8 * expected.abs());
    }

    #[test]
    fn harmonic_control_is_degenerate() {
        let r = monodromy_over(1, 0.3, PI * SQRT_2).unwrap();
        assert!(r.distance_from_identity < 1e-10);
        assert!(!r.nondegenerate);
    }

    #[test]
    fn csv_has_expected_rows() {
        let o = limit_orbit(2, 1.0, 1e-4, 8).unwrap();
        let mut buf = Vec::new();
        o.write_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), ORBIT_CSV_POINTS + 1);
        assert!(text.starts_with("phi2,qbar\n"));
    }
}
