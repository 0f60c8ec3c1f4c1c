//! Fixture models shared by the benchmarks.

use sis_atoms::{DMatrix, FeatureSpace, Incidence, SisModel};

pub fn zoonosis() -> SisModel {
    SisModel::from_rows(
        &[vec![2.0, 0.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 2.0]],
        vec![1.0; 3],
        Incidence::mass_action(),
    )
    .expect("fixture is valid")
}

/// `blocks` strongly connected communities of size `size`, each seeding the
/// next one; every community is supercritical.
pub fn community_chain(blocks: usize, size: usize) -> SisModel {
    let n = blocks * size;
    let kernel = DMatrix::from_fn(n, n, |x, y| {
        let (bx, by) = (x / size, y / size);
        if bx == by && (x + 1) % size == y % size {
            1.5
        } else if bx == by && x != y {
            0.2
        } else if bx == by + 1 && x % size == 0 && y % size == 0 {
            0.5
        } else {
            0.0
        }
    });
    SisModel::new(FeatureSpace::uniform(n).expect("n > 0"), kernel, vec![1.0; n], Incidence::mass_action())
        .expect("fixture is valid")
}

/// Dense positive matrix with a deterministic pseudo-random pattern.
pub fn dense_matrix(n: usize) -> DMatrix<f64> {
    let mut state = 0x9e37_79b9_7f4a_7c15_u64;
    DMatrix::from_fn(n, n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    })
}
