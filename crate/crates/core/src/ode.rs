//! Dormand–Prince 5(4) stepping for the scalar oscillator `a'' = -|a|^{2σ} a`.

/// The restoring force of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerForce {
    Cubic,
    IntegerPower(i32),
    Power(f64),
}

impl PowerForce {
    pub fn new(sigma: f64) -> Self {
        let twice = 2.0 * sigma;
        if sigma == 1.0 {
            PowerForce::Cubic
        } else if twice.fract() == 0.0 && twice.abs() < 64.0 {
            PowerForce::IntegerPower(twice as i32)
        } else {
            PowerForce::Power(twice)
        }
    }

    /// `-|a|^{2σ} a`
    #[inline(always)]
    pub fn eval(&self, a: f64) -> f64 {
        match *self {
            PowerForce::Cubic => -a * a * a,
            PowerForce::IntegerPower(p) => -a.abs().powi(p) * a,
            PowerForce::Power(p) => -a.abs().powf(p) * a,
        }
    }
}

/// ODE energy `½b² + |a|^{2σ+2}/(2σ+2)`.
#[inline]
pub fn oscillator_energy(sigma: f64, a: f64, b: f64) -> f64 {
    let p = 2.0 * sigma + 2.0;
    0.5 * b * b + a.abs().powf(p) / p
}

/// Amplitude `A` of the orbit through `(a, b)`: `A^{2σ+2}/(2σ+2)` is its energy.
#[inline]
pub fn oscillator_amplitude(sigma: f64, a: f64, b: f64) -> f64 {
    let p = 2.0 * sigma + 2.0;
    (p * oscillator_energy(sigma, a, b)).powf(1.0 / p)
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step (the system is autonomous, so the stage times
/// never appear) of size `h`. Returns the 5th order solution and
/// the embedded error estimate.
#[inline(always)]
pub fn dopri_step(force: PowerForce, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    // y = (a, b), y' = (b, F(a))
    let [a, b] = y;
    let k1 = [b, force.eval(a)];
    let s2 = [a + h * A21 * k1[0], b + h * A21 * k1[1]];
    let k2 = [s2[1], force.eval(s2[0])];
    let s3 = [a + h * (A31 * k1[0] + A32 * k2[0]), b + h * (A31 * k1[1] + A32 * k2[1])];
    let k3 = [s3[1], force.eval(s3[0])];
    let s4 = [
        a + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
        b + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
    ];
    let k4 = [s4[1], force.eval(s4[0])];
    let s5 = [
        a + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
        b + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
    ];
    let k5 = [s5[1], force.eval(s5[0])];
    let s6 = [
        a + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
        b + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
    ];
    let k6 = [s6[1], force.eval(s6[0])];
    let out = [
        a + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0]),
        b + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1]),
    ];
    let k7 = [out[1], force.eval(out[0])];
    let err = [
        h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]),
        h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]),
    ];
    (out, err)
}

/// `substeps` equal Dormand–Prince steps covering `h`.
pub fn dopri_fixed(force: PowerForce, mut y: [f64; 2], h: f64, substeps: usize) -> [f64; 2] {
    let dh = h / substeps as f64;
    for _ in 0..substeps {
        y = dopri_step(force, y, dh).0;
    }
    y
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOutcome {
    pub state: [f64; 2],
    pub accepted: usize,
    pub rejected: usize,
}

/// Adaptive integration of the oscillator over `duration` (may be negative).
///
/// The error is measured relative to the orbit's own scales `A` and
/// `A^{σ+1}`, so the controller behaves the same at every amplitude.
pub fn integrate_adaptive(
    sigma: f64,
    force: PowerForce,
    y0: [f64; 2],
    duration: f64,
    tol: f64,
) -> Option<AdaptiveOutcome> {
    let amp = oscillator_amplitude(sigma, y0[0], y0[1]);
    if amp == 0.0 || duration == 0.0 {
        return Some(AdaptiveOutcome {
            state: y0,
            accepted: 0,
            rejected: 0,
        });
    }
    let freq = amp.powf(sigma);
    let scale = [tol * amp, tol * amp * freq];
    let dir = duration.signum();
    let total = duration.abs();
    // Initial step: a small fraction of the local oscillation period.
    let mut h = (0.05 / freq.max(1e-300)).min(total);
    let mut t = 0.0;
    let mut y = y0;
    let mut accepted = 0;
    let mut rejected = 0;
    while t < total {
        if total - t < h * (1.0 + 1e-12) {
            h = total - t;
        }
        let (next, err) = dopri_step(force, y, dir * h);
        let e = (err[0] / scale[0]).abs().max((err[1] / scale[1]).abs());
        if !e.is_finite() {
            return None;
        }
        if e <= 1.0 {
            t += h;
            y = next;
            accepted += 1;
        } else {
            rejected += 1;
            if rejected > 10_000 {
                return None;
            }
        }
        let factor = if e == 0.0 {
            5.0
        } else {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Some(AdaptiveOutcome {
        state: y,
        accepted,
        rejected,
    })
}
