//! Complex exponential integral `E₁(z) = ∫_z^∞ e^{-t}/t dt`, principal branch.

use num_complex::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn use_series(z: Complex64) -> bool {
    z.norm() < 2.0 || (z.re < 0.0 && z.im.abs() <= z.re.abs())
}

fn series(z: Complex64) -> Complex64 {
    // -γ - ln z - Σ (-z)^k / (k·k!)
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..400 {
        let kf = k as f64;
        term *= -z / kf;
        let add = term / kf;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

// modified Lentz evaluation of e^z E₁(z)
fn continued_fraction(z: Complex64) -> Complex64 {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (d * an + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h
}

pub fn exp1(z: Complex64) -> Complex64 {
    if use_series(z) {
        series(z)
    } else {
        continued_fraction(z) * (-z).exp()
    }
}

/// `e^z E₁(z)`, bounded away from the origin and free of overflow for large
/// arguments.
pub fn scaled_exp1(z: Complex64) -> Complex64 {
    if use_series(z) {
        series(z) * z.exp()
    } else {
        continued_fraction(z)
    }
}
