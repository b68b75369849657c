use dowry_core::counting::{t_closed_form, t_count, w_closed_form, w_count, win_probability, EvaluationPath};
use dowry_core::oracle::{exhaustive_choosable_count, exhaustive_win_count};
use dowry_core::rational::{factorial, ratio, Rational};
use dowry_core::Error;
use num_bigint::BigInt;
use proptest::prelude::*;

/// Every permutation of `1..=n`, by insertion.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for v in 1..=n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=p.len()).map(move |i| {
                    let mut q = p.clone();
                    q.insert(i, v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `(selections made, picked the maximum)` for one permutation.
fn play(perm: &[usize], ks: &[usize]) -> (usize, bool) {
    let n = perm.len();
    let mut best_so_far = 0;
    let mut made = 0;
    let mut won = false;
    for (i, &v) in perm.iter().enumerate() {
        let record = v > best_so_far;
        best_so_far = best_so_far.max(v);
        if record && made < ks.len() && i + 1 > ks[made] {
            made += 1;
            won |= v == n;
        }
    }
    (made, won)
}

fn brute(n: usize, ks: &[usize]) -> (u64, Vec<u64>) {
    let mut wins = 0;
    let mut hist = vec![0u64; ks.len() + 1];
    for p in permutations(n) {
        let (made, won) = play(&p, ks);
        wins += won as u64;
        hist[made] += 1;
    }
    (wins, hist)
}

fn monotone(max: usize, len: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..=max, len).prop_map(|mut v| {
        v.sort_unstable();
        v
    })
}

fn instance(n_max: usize, s_max: usize) -> impl Strategy<Value = (usize, Vec<usize>)> {
    (1..=n_max, 1..=s_max).prop_flat_map(|(n, s)| (Just(n), monotone(n, s)))
}

#[test]
fn spec_examples() {
    assert_eq!(t_count(0, 5, &[2]).unwrap(), BigInt::from(48));
    assert_eq!(w_count(4, &[0, 1]).unwrap(), BigInt::from(17));
    assert_eq!(w_count(4, &[1]).unwrap(), BigInt::from(11));
    assert_eq!(win_probability(4, &[0, 1]).unwrap().probability, ratio(17, 24));
    assert_eq!(win_probability(4, &[1]).unwrap().probability, ratio(11, 24));
    assert_eq!(win_probability(4, &[2, 1]).unwrap_err(), Error::NonMonotoneThresholds);
    assert_eq!(w_closed_form(5, &[0, 2]).unwrap_err(), Error::ClosedFormDomain);
}

#[test]
fn brute_force_helpers_agree_with_oracle_module() {
    for n in 1..=6 {
        for ks in [vec![0], vec![1], vec![0, 2], vec![1, 1, 3]] {
            if ks.iter().any(|&k| k > n) {
                continue;
            }
            let (wins, hist) = brute(n, &ks);
            assert_eq!(exhaustive_win_count(n, &ks).unwrap(), BigInt::from(wins));
            let at_most_one: u64 = hist.iter().take(2).sum();
            assert_eq!(exhaustive_choosable_count(n, 1, &ks).unwrap(), BigInt::from(at_most_one));
        }
    }
}

#[test]
fn exhaustive_agreement_up_to_seven() {
    for n in 1..=7 {
        for s in 1..=3 {
            for ks in dowry_core::oracle::monotone_vectors(n, s) {
                let (wins, hist) = brute(n, &ks);
                assert_eq!(w_count(n, &ks).unwrap(), BigInt::from(wins), "W n={n} k={ks:?}");
                for r in 1..=s {
                    let expected: u64 = hist.iter().take(r).sum();
                    assert_eq!(
                        t_count(r - 1, n, &ks).unwrap(),
                        BigInt::from(expected),
                        "T_{} n={n} k={ks:?}",
                        r - 1
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_forms_match_recurrences((n, ks) in instance(40, 4)) {
        let ks: Vec<usize> = ks.into_iter().map(|k| k.max(1)).collect();
        let s = ks.len();
        match w_closed_form(n, &ks) {
            Ok(dec) => {
                let exact = Rational::new(w_count(n, &ks).unwrap(), factorial(n).into());
                prop_assert_eq!(&dec.total, &exact);
                let sum = dec.h.iter().fold(Rational::from_integer(0.into()), |a, h| a + h);
                prop_assert_eq!(sum, exact);
                prop_assert_eq!(win_probability(n, &ks).unwrap().path, EvaluationPath::RecurrenceAndClosedForm);
            }
            Err(e) => {
                prop_assert_eq!(e, Error::ClosedFormDomain);
                prop_assert!(n <= ks[s - 1]);
            }
        }
        for r in 1..=s {
            for m in 0..=n {
                match t_closed_form(r - 1, m, &ks) {
                    Ok(v) => {
                        let exact = Rational::new(t_count(r - 1, m, &ks).unwrap(), factorial(m).into());
                        prop_assert_eq!(v, exact, "r-1={} m={}", r - 1, m);
                    }
                    Err(e) => prop_assert_eq!(e, Error::ClosedFormDomain),
                }
            }
        }
    }

    #[test]
    fn counts_are_bounded_and_monotone((n, ks) in instance(30, 4)) {
        let total = BigInt::from(factorial(n));
        let w = w_count(n, &ks).unwrap();
        prop_assert!(w >= BigInt::from(0) && w <= total);
        let mut prev = BigInt::from(0);
        for r in 1..=ks.len() {
            let t = t_count(r - 1, n, &ks).unwrap();
            prop_assert!(t >= prev && t <= total);
            prev = t;
        }
    }

    #[test]
    fn small_instances_match_enumeration((n, ks) in instance(7, 3)) {
        let (wins, _) = brute(n, &ks);
        prop_assert_eq!(w_count(n, &ks).unwrap(), BigInt::from(wins));
    }
}
