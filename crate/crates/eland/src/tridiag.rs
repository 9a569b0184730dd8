//! Tridiagonal systems (Thomas algorithm).

/// A tridiagonal matrix stored by diagonals; `lower[0]` and
/// `upper[len-1]` are unused.
#[derive(Clone, Debug)]
pub struct Tridiag {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Self { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// y = M x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for k in 0..n {
            let mut v = self.diag[k] * x[k];
            if k > 0 {
                v += self.lower[k] * x[k - 1];
            }
            if k + 1 < n {
                v += self.upper[k] * x[k + 1];
            }
            y[k] = v;
        }
    }

    /// Solve M x = b. Returns `None` on a vanishing pivot.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut piv = self.diag[0];
        if piv.abs() < 1e-300 {
            return None;
        }
        c[0] = self.upper[0] / piv;
        d[0] = b[0] / piv;
        for k in 1..n {
            piv = self.diag[k] - self.lower[k] * c[k - 1];
            if piv.abs() < 1e-300 {
                return None;
            }
            if k + 1 < n {
                c[k] = self.upper[k] / piv;
            }
            d[k] = (b[k] - self.lower[k] * d[k - 1]) / piv;
        }
        for k in (0..n - 1).rev() {
            d[k] -= c[k] * d[k + 1];
        }
        Some(d)
    }

    /// Copy with `shift` added to the diagonal.
    pub fn shifted(&self, shift: f64) -> Tridiag {
        let mut m = self.clone();
        for d in &mut m.diag {
            *d += shift;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let m = Tridiag {
            lower: vec![0.0, 1.0, 1.0],
            diag: vec![4.0, 4.0, 4.0],
            upper: vec![1.0, 1.0, 0.0],
        };
        let b = vec![5.0, 6.0, 5.0];
        let x = m.solve(&b).unwrap();
        let mut y = vec![0.0; 3];
        m.matvec(&x, &mut y);
        for (a, b) in y.iter().zip(b.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
