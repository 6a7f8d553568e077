//! Dense univariate polynomials with ascending coefficients.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly(Vec<f64>);

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.0.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn deriv(&self) -> Poly {
        if self.0.len() == 1 {
            return Poly::zero();
        }
        Poly::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| (i as f64 + 1.0) * c)
                .collect(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Poly {
        let mut out = vec![0.0];
        out.extend(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &c)| c / (i as f64 + 1.0)),
        );
        Poly::new(out)
    }

    /// Antiderivative `A` normalized so that `A(base) = 0`.
    pub fn anchored_antiderivative(&self, base: f64) -> Poly {
        let mut a = self.antiderivative();
        let shift = a.eval(base);
        a.0[0] -= shift;
        Poly::new(a.0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Poly::new(out)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.0.iter().map(|&c| c * k).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::constant(1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.0.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let mag = c.abs();
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{mag}")?,
                1 if mag == 1.0 => write!(f, "z")?,
                1 => write!(f, "{mag}*z")?,
                _ if mag == 1.0 => write!(f, "z^{i}")?,
                _ => write!(f, "{mag}*z^{i}")?,
            }
        }
        Ok(())
    }
}
