//! Seeded random instances: availability sets, poised data sets and
//! histories for property checks and benchmarks.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::basis::{basis_len, AvailableSet, MultiIndex};
use crate::data::{DataSet, Datum};
use crate::interp;

/// Rejection threshold on `rcond(M̂)` for [`random_poised`].
pub const MIN_RCOND: f64 = 1e-6;

/// Uniform point in `B(center, radius)`.
pub fn ball_point(rng: &mut impl Rng, center: &DVector<f64>, radius: f64) -> DVector<f64> {
    let n = center.len();
    loop {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            return center + v * radius;
        }
    }
}

/// `A` for a random (possibly empty) set of known coordinates.
pub fn random_available(rng: &mut impl Rng, n: usize) -> AvailableSet {
    let known: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    AvailableSet::from_known(n, &known)
}

fn pick(rng: &mut impl Rng, a: &AvailableSet) -> MultiIndex {
    let all: Vec<&MultiIndex> = a.iter().collect();
    (*all.choose(rng).expect("A contains 0")).clone()
}

/// A poised square data set with conditions drawn from `A`.
pub fn random_poised(rng: &mut impl Rng, n: usize, available: &AvailableSet) -> DataSet {
    let q1 = basis_len(n);
    loop {
        let center = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let radius = 10f64.powf(rng.gen_range(-2.0..1.0));
        let mut items = vec![Datum::value(center.clone())];
        while items.len() < q1 {
            // reuse points now and then so Hermite-type clusters appear
            let point = if rng.gen_bool(0.3) {
                items.choose(rng).expect("nonempty").point.clone()
            } else {
                ball_point(rng, &center, radius)
            };
            items.push(Datum::new(point, pick(rng, available)));
        }
        let data = DataSet::new(items).expect("finite points");
        if let Ok(p) = interp::birkhoff_polynomials(&data) {
            if p.rcond >= MIN_RCOND {
                return data;
            }
        }
    }
}

/// `len` conditions in `B(center, radius)` with indices from `A`.
pub fn random_history(
    rng: &mut impl Rng,
    center: &DVector<f64>,
    radius: f64,
    len: usize,
    available: &AvailableSet,
) -> Vec<Datum> {
    (0..len)
        .map(|_| Datum::new(ball_point(rng, center, radius), pick(rng, available)))
        .collect()
}

pub fn random_rhs(rng: &mut impl Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.gen_range(-1.0..1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_sets_are_poised_and_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=3 {
            for _ in 0..10 {
                let a = random_available(&mut rng, n);
                let d = random_poised(&mut rng, n, &a);
                assert!(d.is_square());
                assert!(d.items().iter().all(|x| a.contains(&x.index)));
            }
        }
    }
}
