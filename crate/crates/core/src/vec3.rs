use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Point of ℝ³ over a generic scalar.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_f64(v: Vec3<f64>) -> Self {
        Vec3::new(T::from_f64(v.x), T::from_f64(v.y), T::from_f64(v.z))
    }

    pub fn to_f64(self) -> Vec3<f64> {
        Vec3::new(self.x.to_f64(), self.y.to_f64(), self.z.to_f64())
    }

    pub fn norm(self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn norm_inf(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn scale(self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Vec3<f64> {
    pub const fn xyz(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Uniform grid of `per_axis³` points on `[-half, half]³`; a single point
/// grid is the origin.
pub fn cube_grid(per_axis: usize, half: f64) -> Vec<Vec3> {
    if per_axis == 0 {
        return Vec::new();
    }
    let coord = |i: usize| {
        if per_axis == 1 {
            0.0
        } else {
            -half + 2.0 * half * i as f64 / (per_axis - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(per_axis.pow(3));
    for i in 0..per_axis {
        for j in 0..per_axis {
            for k in 0..per_axis {
                out.push(Vec3::xyz(coord(i), coord(j), coord(k)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(cube_grid(11, 1.0).len(), 1331);
        assert_eq!(cube_grid(1, 1.0), vec![Vec3::xyz(0.0, 0.0, 0.0)]);
        let g = cube_grid(3, 1.0);
        assert_eq!(g[0], Vec3::xyz(-1.0, -1.0, -1.0));
        assert_eq!(g[26], Vec3::xyz(1.0, 1.0, 1.0));
    }

    #[test]
    fn norms() {
        let v = Vec3::xyz(3.0, -4.0, 0.0);
        assert_eq!(v.norm(), 5.0);
        assert_eq!(v.norm_inf(), 4.0);
    }
}
