//! Random proof structures checked by contraction and by exhaustive
//! switchings; the two verdicts must agree.

use mill1::oracle::{confluence_check, criterion_check, random_structure, GenConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig::default();
    let (mut nets, mut total) = (0, 0);
    for _ in 0..2000 {
        let ps = random_structure(&mut rng, &cfg);
        match criterion_check(&ps) {
            Ok(net) => nets += net as usize,
            Err(d) => panic!("disagreement: {d:?}"),
        }
        assert!(confluence_check(&ps.contraction_graph(), 5, &mut rng));
        total += 1;
    }
    println!("seed {seed}: {total} structures, {nets} nets, verdicts agree");
}
