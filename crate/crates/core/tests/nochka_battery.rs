use nevlab::fixtures::random_system;
use nevlab::nochka::{compute_weights, verify_weights};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn solver_output_verifies_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut solved = 0;
    let mut strict = 0;
    while solved < 60 {
        let n = rng.gen_range(1..=3);
        let big_n = rng.gen_range(n..=4);
        let min_q = 2 * big_n - n + 2;
        if min_q > 10 {
            continue;
        }
        let q = rng.gen_range(min_q..=10);
        let Some(sys) = random_system(&mut rng, n, big_n, q, 50) else {
            continue;
        };
        let w = compute_weights(&sys).unwrap_or_else(|e| panic!("n={n} N={big_n} q={q}: {e}"));
        let cert = verify_weights(&w, &sys);
        assert!(
            cert.passed(),
            "n={n} N={big_n} q={q}: {:?}",
            cert.failures().collect::<Vec<_>>()
        );
        if big_n == n {
            assert!(w.weights.iter().all(|x| x.is_one()) && w.constant.is_one());
        } else {
            strict += 1;
        }
        solved += 1;
    }
    assert!(strict >= 20, "battery should exercise N > n, got {strict}");
}
