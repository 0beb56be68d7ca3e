//! Structure-of-arrays rungs: unblocked, j-tiled, and statically
//! partitioned across threads.
//!
//! Targets are processed `LANES` at a time so the inner loop maps onto
//! vector registers. Each target still sums its sources one by one in
//! ascending `j`, so lane grouping, tiling, and thread partitioning never
//! change a body's result.

use std::ops::Range;

use super::schedule::{partition, run_static, split_by};
use super::{AccelerationBuffer, KernelVariant, PairTerm};
use crate::real::Real;
use crate::system::Columns;

const LANES: usize = 8;

pub(super) fn accelerations<T: Real, M: PairTerm<T>>(
    positions: &Columns<T>,
    masses: &[T],
    g: T,
    eps2: T,
    variant: &KernelVariant,
    out: &mut AccelerationBuffer<T>,
) {
    let n = masses.len();
    let block = variant.block.unwrap_or(n).max(1);
    let ranges = partition(n, variant.threads);
    let items: Vec<_> = ranges
        .iter()
        .cloned()
        .zip(split_by(&mut out.x, &ranges))
        .zip(split_by(&mut out.y, &ranges))
        .zip(split_by(&mut out.z, &ranges))
        .filter(|(((r, _), _), _)| !r.is_empty())
        .collect();
    run_static(items, |(((r, ox), oy), oz)| {
        accumulate_range::<T, M>(positions, masses, eps2, r.start, block, ox, oy, oz);
        for v in ox.iter_mut().chain(oy.iter_mut()).chain(oz.iter_mut()) {
            *v = g * *v;
        }
    });
}

#[allow(clippy::too_many_arguments)]
fn accumulate_range<T: Real, M: PairTerm<T>>(
    positions: &Columns<T>,
    masses: &[T],
    eps2: T,
    first: usize,
    block: usize,
    ox: &mut [T],
    oy: &mut [T],
    oz: &mut [T],
) {
    ox.fill(T::zero());
    oy.fill(T::zero());
    oz.fill(T::zero());
    let n = masses.len();
    let count = ox.len();
    let mut j0 = 0;
    while j0 < n {
        let sources = j0..(j0 + block).min(n);
        let mut c = 0;
        while c < count {
            let lanes = LANES.min(count - c);
            let end = c + lanes;
            tile::<T, M>(
                positions,
                masses,
                eps2,
                first + c,
                sources.clone(),
                &mut ox[c..end],
                &mut oy[c..end],
                &mut oz[c..end],
            );
            c = end;
        }
        j0 = sources.end;
    }
}

/// Adds the contributions of `sources` to up to `LANES` consecutive targets
/// starting at body `first`. Unused lanes are padded and discarded.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn tile<T: Real, M: PairTerm<T>>(
    positions: &Columns<T>,
    masses: &[T],
    eps2: T,
    first: usize,
    sources: Range<usize>,
    ox: &mut [T],
    oy: &mut [T],
    oz: &mut [T],
) {
    let zero = T::zero();
    let lanes = ox.len();
    let mut xi = [positions.x[first]; LANES];
    let mut yi = [positions.y[first]; LANES];
    let mut zi = [positions.z[first]; LANES];
    let mut idx = [usize::MAX; LANES];
    let mut ax = [zero; LANES];
    let mut ay = [zero; LANES];
    let mut az = [zero; LANES];
    for k in 0..lanes {
        xi[k] = positions.x[first + k];
        yi[k] = positions.y[first + k];
        zi[k] = positions.z[first + k];
        idx[k] = first + k;
        ax[k] = ox[k];
        ay[k] = oy[k];
        az[k] = oz[k];
    }

    let base = sources.start;
    let xs = &positions.x[sources.clone()];
    let ys = &positions.y[sources.clone()];
    let zs = &positions.z[sources.clone()];
    let ms = &masses[sources];
    for (jj, (((&xj, &yj), &zj), &mj)) in xs.iter().zip(ys).zip(zs).zip(ms).enumerate() {
        let j = base + jj;
        for k in 0..LANES {
            let dx = xj - xi[k];
            let dy = yj - yi[k];
            let dz = zj - zi[k];
            let d2 = dx * dx + dy * dy + dz * dz + eps2;
            let f = M::factor(d2);
            let own = idx[k] == j;
            ax[k] = ax[k] + if own { zero } else { M::apply(mj * dx, f) };
            ay[k] = ay[k] + if own { zero } else { M::apply(mj * dy, f) };
            az[k] = az[k] + if own { zero } else { M::apply(mj * dz, f) };
        }
    }

    ox.copy_from_slice(&ax[..lanes]);
    oy.copy_from_slice(&ay[..lanes]);
    oz.copy_from_slice(&az[..lanes]);
}

pub(super) fn integrate<T: Real>(
    positions: &mut Columns<T>,
    velocities: &mut Columns<T>,
    acc: &AccelerationBuffer<T>,
    dt: T,
    threads: usize,
) {
    let n = acc.len();
    let ranges = partition(n, threads);
    let items: Vec<_> = ranges
        .iter()
        .cloned()
        .zip(split_by(&mut positions.x, &ranges))
        .zip(split_by(&mut positions.y, &ranges))
        .zip(split_by(&mut positions.z, &ranges))
        .zip(split_by(&mut velocities.x, &ranges))
        .zip(split_by(&mut velocities.y, &ranges))
        .zip(split_by(&mut velocities.z, &ranges))
        .filter(|((((((r, _), _), _), _), _), _)| !r.is_empty())
        .collect();
    run_static(items, |((((((r, px), py), pz), vx), vy), vz)| {
        drift_kick(px, vx, &acc.x[r.clone()], dt);
        drift_kick(py, vy, &acc.y[r.clone()], dt);
        drift_kick(pz, vz, &acc.z[r], dt);
    });
}

#[inline]
fn drift_kick<T: Real>(p: &mut [T], v: &mut [T], a: &[T], dt: T) {
    let half = T::from_f64(0.5);
    for ((p, v), &a) in p.iter_mut().zip(v.iter_mut()).zip(a) {
        let dv = a * dt;
        *p = *p + (*v + dv * half) * dt;
        *v = *v + dv;
    }
}
