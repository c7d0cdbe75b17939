//! End-to-end properties across channels, inversions, the time flip and the
//! teleportation circuit.

use chronoflip::channels::{compose, random_mixed_unitary, Channel};
use chronoflip::inversion::{invert_channel, project_bistochastic, InversionKind};
use chronoflip::linalg::random;
use chronoflip::teleport::{postselected_channel, postselected_channel_of};
use chronoflip::timeflip::{time_flip, time_flip_choi};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bistochastic(seed: u64, d: usize, n: usize) -> Channel<f64> {
    random_mixed_unitary(d, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flipped_channels_stay_bistochastic(seed in any::<u64>(), d in 2usize..=3, n in 1usize..=4) {
        let c = bistochastic(seed, d, n);
        let f = time_flip(&c).unwrap();
        prop_assert!(f.is_bistochastic(1e-10));
        prop_assert!(f.choi().distance(&time_flip_choi(&c)) < 1e-12);
        // already in the bistochastic set, so the projection leaves it alone
        let j = c.choi();
        prop_assert!(project_bistochastic(&j).unwrap().distance(&j) < 1e-12);
    }

    #[test]
    fn composites_reverse_on_the_backward_branch(seed in any::<u64>(), d in 2usize..=3) {
        // the backward branch of a composite runs the inverted pieces in reverse order
        let a = bistochastic(seed, d, 2);
        let b = bistochastic(seed ^ 0x5555, d, 2);
        let ba = compose(&b, &a).unwrap();
        let inv = |c: &Channel<f64>| invert_channel(c, InversionKind::Transpose);
        let lhs = inv(&ba);
        let rhs = compose(&inv(&a), &inv(&b)).unwrap();
        prop_assert!(lhs.choi().distance(&rhs.choi()) < 1e-12);
        prop_assert!(time_flip(&ba).unwrap().is_cptp(1e-10));
    }

    #[test]
    fn teleportation_matches_the_flip(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random::haar_unitary::<f64, _>(d, &mut rng);
        let flip = time_flip(&Channel::unitary(&u).unwrap()).unwrap();
        prop_assert!(postselected_channel(&u).unwrap().choi().distance(&flip.choi()) < 1e-10);
        // with a nonunitary bistochastic input, enumerated Kraus branches
        let c = bistochastic(seed, d, 3);
        let p = postselected_channel_of(&c).unwrap();
        prop_assert!(p.choi().distance(&time_flip(&c).unwrap().choi()) < 1e-10);
    }

    #[test]
    fn channel_json_round_trip(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=3) {
        let c = bistochastic(seed, d, n);
        let text = serde_json::to_string(&c).unwrap();
        let back: Channel<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, c);
    }
}
