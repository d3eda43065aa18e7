//! Fixed-step classic Runge–Kutta for complex first-order systems.

use num_complex::Complex64;

/// Scratch buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advance `y` from `t` to `t + h`. `rhs(t, y, dy)` writes `dy/dt`.
    pub fn step<F>(&mut self, rhs: &mut F, t: f64, y: &mut [Complex64], h: f64)
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        debug_assert_eq!(n, self.tmp.len());
        rhs(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k1[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k2[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k3[i] * h;
        }
        rhs(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * (h / 6.0);
        }
    }

    /// Advance from `t0` to `t1` in `steps` equal steps.
    pub fn advance<F>(&mut self, rhs: &mut F, t0: f64, t1: f64, steps: u64, y: &mut [Complex64])
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        if steps == 0 {
            return;
        }
        let h = (t1 - t0) / steps as f64;
        for i in 0..steps {
            self.step(rhs, t0 + i as f64 * h, y, h);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_fourth_order() {
        // y'' = -y as (y, y'), exact y = cos t
        let err = |steps: u64| {
            let mut y = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
            let mut rk = Rk4::new(2);
            let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            };
            rk.advance(&mut rhs, 0.0, 10.0, steps, &mut y);
            (y[0].re - 10f64.cos()).abs()
        };
        let ratio = err(200) / err(400);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn complex_exponential() {
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let mut rk = Rk4::new(1);
        let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::i() * y[0];
        rk.advance(&mut rhs, 0.0, 1.0, 1000, &mut y);
        let exact = Complex64::from_polar(1.0, 1.0);
        assert!((y[0] - exact).norm() < 1e-12);
    }
}
