//! Fixed and seeded problem data shared by the suites and their tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::galerkin::{BoundaryData, FaceData, Source, VolumeSources};

/// Lid moving in `t1` on `z = 1` over a wall heated on `x = 0`.
pub fn lid_and_hot_wall() -> BoundaryData {
    let mut bd = BoundaryData::default();
    bd.faces[5].u_t1 = 1.0;
    bd.faces[0].theta = 1.0;
    bd
}

/// Smooth shear force `b = (y − ½, 0, 0)` and heat source `r = x − ½`.
pub fn smooth_sources() -> VolumeSources {
    VolumeSources {
        b: [
            Source::Polynomial(vec![([0, 1, 0], 1.0), ([0, 0, 0], -0.5)]),
            Source::Zero,
            Source::Zero,
        ],
        r_src: Source::Polynomial(vec![([1, 0, 0], 1.0), ([0, 0, 0], -0.5)]),
        ..Default::default()
    }
}

fn affine(rng: &mut ChaCha8Rng) -> Source {
    let mut c = || rng.random_range(-1.0..1.0);
    Source::Polynomial(vec![
        ([0, 0, 0], c()),
        ([1, 0, 0], c()),
        ([0, 1, 0], c()),
        ([0, 0, 1], c()),
    ])
}

/// Random wall data on every face and random affine volume sources.
pub fn seeded_data(seed: u64) -> (VolumeSources, BoundaryData) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bd = BoundaryData::default();
    for f in bd.faces.iter_mut() {
        let mut c = || rng.random_range(-1.0..1.0);
        *f = FaceData {
            u_n: c(),
            u_t1: c(),
            u_t2: c(),
            p: c(),
            theta: c(),
        };
    }
    let src = VolumeSources {
        m_src: affine(&mut rng),
        b: [affine(&mut rng), affine(&mut rng), affine(&mut rng)],
        r_src: affine(&mut rng),
    };
    (src, bd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_data_is_reproducible() {
        let (a, b) = seeded_data(4);
        let (c, d) = seeded_data(4);
        assert_eq!(b, d);
        assert_eq!(a.b[1].eval([0.1, 0.2, 0.3]), c.b[1].eval([0.1, 0.2, 0.3]));
        assert_ne!(seeded_data(5).1, b);
    }
}
