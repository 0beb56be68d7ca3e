//! Array-of-structures rung: scalar loops over `[x, y, z]` records.

use super::{AccelerationBuffer, PairTerm, PowDivide};
use crate::real::Real;

pub(super) fn accelerations<T: Real>(
    positions: &[[T; 3]],
    masses: &[T],
    g: T,
    eps2: T,
    out: &mut AccelerationBuffer<T>,
) {
    let zero = T::zero();
    for (i, pi) in positions.iter().enumerate() {
        let mut acc = [zero; 3];
        for (j, (pj, &mj)) in positions.iter().zip(masses).enumerate() {
            let dx = pj[0] - pi[0];
            let dy = pj[1] - pi[1];
            let dz = pj[2] - pi[2];
            let d2 = dx * dx + dy * dy + dz * dz + eps2;
            let f = <PowDivide as PairTerm<T>>::factor(d2);
            let own = i == j;
            acc[0] = acc[0] + if own { zero } else { <PowDivide as PairTerm<T>>::apply(mj * dx, f) };
            acc[1] = acc[1] + if own { zero } else { <PowDivide as PairTerm<T>>::apply(mj * dy, f) };
            acc[2] = acc[2] + if own { zero } else { <PowDivide as PairTerm<T>>::apply(mj * dz, f) };
        }
        out.x[i] = g * acc[0];
        out.y[i] = g * acc[1];
        out.z[i] = g * acc[2];
    }
}

pub(super) fn integrate<T: Real>(
    positions: &mut [[T; 3]],
    velocities: &mut [[T; 3]],
    acc: &AccelerationBuffer<T>,
    dt: T,
) {
    let half = T::from_f64(0.5);
    for (i, (p, v)) in positions.iter_mut().zip(velocities.iter_mut()).enumerate() {
        let a = acc.get(i);
        for c in 0..3 {
            let dv = a[c] * dt;
            p[c] = p[c] + (v[c] + dv * half) * dt;
            v[c] = v[c] + dv;
        }
    }
}
