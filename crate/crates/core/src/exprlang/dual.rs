//! Forward-mode dual numbers with one derivative slot per independent
//! variable.  Expressions here are tiny with at most three variables, so
//! forward mode is the right trade-off.

/// Value together with partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub derivs: Vec<f64>,
}

impl Dual {
    pub fn constant(value: f64, slots: usize) -> Self {
        Dual {
            value,
            derivs: vec![0.0; slots],
        }
    }

    /// Seeds the independent variable occupying `slot`.
    pub fn var(value: f64, slot: usize, slots: usize) -> Self {
        let mut derivs = vec![0.0; slots];
        derivs[slot] = 1.0;
        Dual { value, derivs }
    }

    fn map2(&self, other: &Dual, value: f64, f: impl Fn(f64, f64) -> f64) -> Dual {
        debug_assert_eq!(self.derivs.len(), other.derivs.len());
        Dual {
            value,
            derivs: self
                .derivs
                .iter()
                .zip(&other.derivs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn map1(&self, value: f64, factor: f64) -> Dual {
        Dual {
            value,
            derivs: self.derivs.iter().map(|&d| factor * d).collect(),
        }
    }

    pub fn neg(&self) -> Dual {
        self.map1(-self.value, -1.0)
    }

    pub fn add(&self, other: &Dual) -> Dual {
        self.map2(other, self.value + other.value, |a, b| a + b)
    }

    pub fn sub(&self, other: &Dual) -> Dual {
        self.map2(other, self.value - other.value, |a, b| a - b)
    }

    pub fn mul(&self, other: &Dual) -> Dual {
        let (u, v) = (self.value, other.value);
        self.map2(other, u * v, |du, dv| du * v + u * dv)
    }

    pub fn div(&self, other: &Dual) -> Result<Dual, String> {
        let (u, v) = (self.value, other.value);
        if v == 0.0 {
            return Err("division by zero".into());
        }
        Ok(self.map2(other, u / v, |du, dv| (du * v - u * dv) / (v * v)))
    }

    pub fn pow(&self, other: &Dual) -> Result<Dual, String> {
        let (u, v) = (self.value, other.value);
        let exponent_is_literal = other.derivs.iter().all(|&d| d == 0.0);
        if exponent_is_literal && v.fract() == 0.0 {
            // Integer power: valid for any base, including negatives.
            if v == 0.0 {
                return Ok(Dual::constant(1.0, self.derivs.len()));
            }
            if u == 0.0 && v < 0.0 {
                return Err("zero base with negative exponent".into());
            }
            let value = u.powi(v as i32);
            let factor = if u == 0.0 && v >= 2.0 {
                0.0
            } else {
                v * u.powi(v as i32 - 1)
            };
            return Ok(self.map1(value, factor));
        }
        if u <= 0.0 {
            return Err(format!("power with non-positive base {u}"));
        }
        let value = u.powf(v);
        Ok(self.map2(other, value, |du, dv| {
            value * (dv * u.ln() + v * du / u)
        }))
    }

    pub fn sin(&self) -> Dual {
        self.map1(self.value.sin(), self.value.cos())
    }

    pub fn cos(&self) -> Dual {
        self.map1(self.value.cos(), -self.value.sin())
    }

    pub fn tan(&self) -> Result<Dual, String> {
        let c = self.value.cos();
        if c == 0.0 {
            return Err("tangent pole".into());
        }
        Ok(self.map1(self.value.tan(), 1.0 / (c * c)))
    }

    pub fn exp(&self) -> Dual {
        let v = self.value.exp();
        self.map1(v, v)
    }

    pub fn log(&self) -> Result<Dual, String> {
        if self.value <= 0.0 {
            return Err(format!("log of non-positive value {}", self.value));
        }
        Ok(self.map1(self.value.ln(), 1.0 / self.value))
    }

    pub fn sqrt(&self) -> Result<Dual, String> {
        if self.value < 0.0 {
            return Err(format!("sqrt of negative value {}", self.value));
        }
        if self.value == 0.0 {
            if self.derivs.iter().all(|&d| d == 0.0) {
                return Ok(Dual::constant(0.0, self.derivs.len()));
            }
            return Err("sqrt not differentiable at 0".into());
        }
        let v = self.value.sqrt();
        Ok(self.map1(v, 0.5 / v))
    }

    pub fn abs(&self) -> Result<Dual, String> {
        if self.value == 0.0 && self.derivs.iter().any(|&d| d != 0.0) {
            return Err("abs not differentiable at 0".into());
        }
        Ok(self.map1(self.value.abs(), self.value.signum()))
    }

    pub fn atan2(&self, x: &Dual) -> Result<Dual, String> {
        let (y, xv) = (self.value, x.value);
        let r2 = xv * xv + y * y;
        if r2 == 0.0 {
            return Err("atan2 at the origin".into());
        }
        Ok(self.map2(x, y.atan2(xv), |dy, dx| (xv * dy - y * dx) / r2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_rule_exact() {
        let u = Dual::var(1.5, 0, 2);
        let v = Dual::var(-2.0, 1, 2);
        let p = u.mul(&v);
        assert_eq!(p.value, -3.0);
        assert_eq!(p.derivs, vec![-2.0, 1.5]);
    }

    #[test]
    fn integer_power_of_negative_base() {
        let u = Dual::var(-2.0, 0, 1);
        let p = u.pow(&Dual::constant(3.0, 1)).unwrap();
        assert_eq!(p.value, -8.0);
        assert_eq!(p.derivs[0], 12.0);
    }

    #[test]
    fn atan2_partials() {
        let y = Dual::var(1.0, 0, 2);
        let x = Dual::var(2.0, 1, 2);
        let a = y.atan2(&x).unwrap();
        assert!((a.derivs[0] - 2.0 / 5.0).abs() < 1e-15);
        assert!((a.derivs[1] + 1.0 / 5.0).abs() < 1e-15);
    }
}
