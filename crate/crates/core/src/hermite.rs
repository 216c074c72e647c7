//! Quintic Hermite interpolation from values and first two derivatives.

/// One interpolation cell on `[x0, x1]`, stored as monomial coefficients in
/// the normalized variable `t = (x - x0) / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Quintic {
    pub x0: f64,
    pub h: f64,
    c: [f64; 6],
}

impl Quintic {
    /// `a` and `b` are `(value, first derivative, second derivative)` at the
    /// left and right ends.
    pub fn new(x0: f64, x1: f64, a: (f64, f64, f64), b: (f64, f64, f64)) -> Self {
        let h = x1 - x0;
        let c0 = a.0;
        let c1 = h * a.1;
        let c2 = 0.5 * h * h * a.2;
        let ea = b.0 - (c0 + c1 + c2);
        let eb = h * b.1 - (c1 + 2.0 * c2);
        let ec = h * h * b.2 - 2.0 * c2;
        let c3 = 10.0 * ea - 4.0 * eb + 0.5 * ec;
        let c4 = -15.0 * ea + 7.0 * eb - ec;
        let c5 = 6.0 * ea - 3.0 * eb + 0.5 * ec;
        Quintic { x0, h, c: [c0, c1, c2, c3, c4, c5] }
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let t = (x - self.x0) / self.h;
        let c = &self.c;
        let p = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let dp = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let ddp = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        (p, dp / self.h, ddp / (self.h * self.h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(x: f64) -> (f64, f64, f64) {
        let p = 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.25 * x.powi(4) + 0.1 * x.powi(5);
        let dp = -2.0 + 1.5 * x * x - x.powi(3) + 0.5 * x.powi(4);
        let ddp = 3.0 * x - 3.0 * x * x + 2.0 * x.powi(3);
        (p, dp, ddp)
    }

    #[test]
    fn reproduces_quintic_polynomials() {
        let (a, b) = (0.3, 1.7);
        let q = Quintic::new(a, b, poly(a), poly(b));
        for i in 0..=20 {
            let x = a + (b - a) * i as f64 / 20.0;
            let (p, dp, ddp) = q.eval(x);
            let (e, de, dde) = poly(x);
            assert!((p - e).abs() < 1e-13);
            assert!((dp - de).abs() < 1e-12);
            assert!((ddp - dde).abs() < 1e-11);
        }
    }

    #[test]
    fn works_for_reversed_cells() {
        let q = Quintic::new(2.0, 1.0, poly(2.0), poly(1.0));
        let (p, dp, _) = q.eval(1.5);
        assert!((p - poly(1.5).0).abs() < 1e-13);
        assert!((dp - poly(1.5).1).abs() < 1e-12);
    }
}
