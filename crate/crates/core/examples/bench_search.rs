use chancert::channels::{random_channel, unitary_channel};
use chancert::distances::diamond_lower_bound;
use chancert::linalg::haar_unitary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    for d in [2usize, 3, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = random_channel(d, d, &mut rng).unwrap();
        let f = unitary_channel(haar_unitary(d, &mut rng)).unwrap();
        let t0 = Instant::now();
        let est = diamond_lower_bound(&e, &f, 32, &mut rng).unwrap();
        println!("d={d}: {:?} bound={:.6}", t0.elapsed(), est.lower_bound());
    }
}
