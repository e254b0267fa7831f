use ea_lab::config::RawConfig;
use ea_lab::record::{read_csv, read_jsonl, write_csv, write_jsonl, Record};
use ea_lab::stats::{quantile, Estimate};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

prop_compose! {
    fn record()(
        d in 1usize..4,
        l in 1usize..64,
        p in proptest::option::of(1e-9f64..1.0),
        replicate in any::<u64>(),
        seed in any::<u64>(),
        exact in any::<bool>(),
        delta in proptest::option::of(finite()),
        ratio in proptest::option::of(finite()),
        sizes in proptest::option::of((0usize..1000, 0usize..1000)),
        flags in (proptest::option::of(any::<bool>()), proptest::option::of(any::<bool>())),
        energies in (proptest::option::of(finite()), proptest::option::of(finite())),
    ) -> Record {
        Record {
            experiment: "tail".into(),
            d,
            l,
            topology: "open".into(),
            bc: "random-fixed".into(),
            kind: "-".into(),
            p,
            replicate,
            seed,
            exact,
            delta,
            ratio,
            droplet_size: sizes.map(|s| s.0),
            boundary_size: sizes.map(|s| s.1),
            size_ok: flags.0,
            event: flags.1,
            energy0: energies.0,
            energy1: energies.1,
            ..Record::default()
        }
    }
}

proptest! {
    #[test]
    fn records_round_trip_through_both_formats(records in proptest::collection::vec(record(), 1..20)) {
        let mut csv = Vec::new();
        write_csv(&records, &mut csv).unwrap();
        prop_assert_eq!(&read_csv(csv.as_slice()).unwrap(), &records);
        let mut jsonl = Vec::new();
        write_jsonl(&records, &mut jsonl).unwrap();
        prop_assert_eq!(&read_jsonl(jsonl.as_slice()).unwrap(), &records);
    }

    #[test]
    fn mean_interval_brackets_the_mean(values in proptest::collection::vec(-1e3f64..1e3, 1..50)) {
        let e = Estimate::mean_of(&values).unwrap();
        prop_assert_eq!(e.n, values.len());
        prop_assert!(e.stderr >= 0.0);
        prop_assert!(e.lo95 <= e.mean && e.mean <= e.hi95);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo - 1e-9 <= e.mean && e.mean <= hi + 1e-9);
    }

    #[test]
    fn proportion_interval_stays_in_unit_range(n in 1usize..2000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as usize;
        let e = Estimate::proportion(k, n).unwrap();
        prop_assert!(0.0 <= e.lo95 && e.lo95 <= e.mean && e.mean <= e.hi95 && e.hi95 <= 1.0);
    }

    #[test]
    fn quantiles_are_monotone(values in proptest::collection::vec(-1e3f64..1e3, 1..40), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantile(&values, lo).unwrap() <= quantile(&values, hi).unwrap());
    }

    #[test]
    fn overlay_prefers_the_later_layer(
        file_reps in proptest::option::of(1usize..1000),
        flag_reps in proptest::option::of(1usize..1000),
        file_seed in proptest::option::of(any::<u64>()),
        flag_seed in proptest::option::of(any::<u64>()),
    ) {
        let file = RawConfig { replicates: file_reps, seed: file_seed, ..RawConfig::default() };
        let flags = RawConfig { replicates: flag_reps, seed: flag_seed, ..RawConfig::default() };
        let merged = file.overlay(flags);
        prop_assert_eq!(merged.replicates, flag_reps.or(file_reps));
        prop_assert_eq!(merged.seed, flag_seed.or(file_seed));
    }
}
