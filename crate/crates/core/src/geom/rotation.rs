//! 3×3 rotation matrices acting on sphere embedding vectors.

use super::{norm3, scale3};
use crate::scalar::Real;

pub type Mat3<S> = [[S; 3]; 3];

pub fn identity<S: Real>() -> Mat3<S> {
    let (o, z) = (S::one(), S::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

/// Right-handed rotation by `angle` about the unit vector `axis`.
pub fn about_axis<S: Real>(axis: [S; 3], angle: S) -> Mat3<S> {
    let u = scale3(axis, S::one() / norm3(axis));
    let (s, c) = angle.sin_cos();
    let t = S::one() - c;
    [
        [c + u[0] * u[0] * t, u[0] * u[1] * t - u[2] * s, u[0] * u[2] * t + u[1] * s],
        [u[1] * u[0] * t + u[2] * s, c + u[1] * u[1] * t, u[1] * u[2] * t - u[0] * s],
        [u[2] * u[0] * t - u[1] * s, u[2] * u[1] * t + u[0] * s, c + u[2] * u[2] * t],
    ]
}

pub fn mul<S: Real>(a: &Mat3<S>, b: &Mat3<S>) -> Mat3<S> {
    let mut out = [[S::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn apply<S: Real>(m: &Mat3<S>, v: [S; 3]) -> [S; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn transpose<S: Real>(m: &Mat3<S>) -> Mat3<S> {
    let mut t = *m;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t[j][i] = *v;
        }
    }
    t
}

/// Axis and angle in `[0, π]` of a rotation matrix. Returns `None` for the
/// axis when the rotation is numerically the identity.
pub fn axis_angle<S: Real>(m: &Mat3<S>) -> (Option<[S; 3]>, S) {
    let one = S::one();
    let two = S::lit(2.0);
    let trace = m[0][0] + m[1][1] + m[2][2];
    let cos = ((trace - one) / two).max(-one).min(one);
    let skew = [m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]];
    let sin = norm3(skew) / two;
    let angle = sin.atan2(cos);
    if angle <= S::lit(1e-9) {
        // the axis cannot be recovered reliably this close to the identity
        return (None, angle);
    }
    if sin > S::lit(1e-6) {
        return (Some(scale3(skew, one / norm3(skew))), angle);
    }
    // near a half turn: the axis spans the column space of M + I
    let b = [[m[0][0] + one, m[0][1], m[0][2]], [m[1][0], m[1][1] + one, m[1][2]], [m[2][0], m[2][1], m[2][2] + one]];
    let col =
        (0..3).map(|j| [b[0][j], b[1][j], b[2][j]]).max_by(|a, c| norm3(*a).partial_cmp(&norm3(*c)).unwrap()).unwrap();
    let mut axis = scale3(col, one / norm3(col));
    // fix the sign so that the skew part agrees with the axis direction
    if skew[0] * axis[0] + skew[1] * axis[1] + skew[2] * axis[2] < S::zero() {
        axis = scale3(axis, -one);
    }
    (Some(axis), angle)
}
