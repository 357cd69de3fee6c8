//! Compactly supported bump functions and the perturbations built from them.

use crate::scalar::Real;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Smooth step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, `g(u)/(g(u)+g(1−u))` with
/// `g(u) = exp(−1/u)` in between.
pub fn smooth_step<T: Real>(u: T) -> T {
    if u <= T::zero() {
        return T::zero();
    }
    if u >= T::one() {
        return T::one();
    }
    let g = |t: T| (-(T::one() / t)).exp();
    let a = g(u);
    // Keep the open ramp strictly inside (0, 1) even where the true value
    // rounds to an endpoint.
    let lo = T::from_f64(f64::MIN_POSITIVE);
    let hi = T::one() - T::from_f64(f64::EPSILON);
    (a / (a + g(T::one() - u))).max(lo).min(hi)
}

/// `b_ρ(x)`: 1 on `|x| ≤ ρ/2`, 0 on `|x| ≥ ρ`, strictly between otherwise.
pub fn bump1<T: Real>(rho: T, x: T) -> T {
    let half = rho * T::from_f64(0.5);
    smooth_step((rho - x.abs()) / half)
}

/// `B_ρ(v) = b_ρ(x) b_ρ(y) b_ρ(z)`.
pub fn bump3<T: Real>(rho: T, v: Vec3<T>) -> T {
    bump1(rho, v.x) * bump1(rho, v.y) * bump1(rho, v.z)
}

/// Translation-like perturbation `v ↦ v + b_ρ(‖v − center‖)·w`, the identity
/// outside the open ball of radius ρ.
///
/// The radial profile keeps the map continuous on the sphere `‖v − c‖ = ρ`
/// and maps the ball onto itself whenever `‖w‖` is below the inverse
/// Lipschitz constant of the bump. Its plateau is the ball of radius ρ/2.
pub fn translation_perturb<T: Real>(center: Vec3<T>, w: Vec3<T>, rho: T, v: Vec3<T>) -> Vec3<T> {
    let r = (v - center).norm();
    if r >= rho {
        return v;
    }
    v + w.scale(bump1(rho, r))
}

/// Axis of a rotation-like perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Applies the linear rotation `I^axis` given the cosine and sine of its angle.
pub fn rotation_matrix_apply<T: Real>(axis: Axis, c: T, s: T, v: Vec3<T>) -> Vec3<T> {
    match axis {
        Axis::X => Vec3::new(v.x, c * v.y - s * v.z, s * v.y + c * v.z),
        Axis::Y => Vec3::new(c * v.x - s * v.z, v.y, s * v.x + c * v.z),
    }
}

/// Rotation-like perturbation: `I^axis` with angle `2π·omega·b_ρ(‖v‖)`.
pub fn rotation_perturb<T: Real>(axis: Axis, omega: T, rho: T, v: Vec3<T>) -> Vec3<T> {
    let b = bump1(rho, v.norm());
    if b == T::zero() {
        return v;
    }
    let angle = T::two_pi() * omega * b;
    rotation_matrix_apply(axis, angle.cos(), angle.sin(), v)
}
