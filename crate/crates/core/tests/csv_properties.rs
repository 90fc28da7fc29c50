use metarep_core::pipeline::ScoringTables;
use metarep_core::report::{build_report, read_csv, write_csv, write_results};
use metarep_core::sim::{run_simulation, GeneratorKind, SimConfig};
use proptest::prelude::*;

fn generators() -> impl Strategy<Value = Vec<GeneratorKind>> {
    proptest::sample::subsequence(GeneratorKind::STANDARD.to_vec(), 1..=4)
}

fn csv_bytes(config: &SimConfig) -> Vec<u8> {
    let records = run_simulation(config).unwrap();
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).unwrap();
    buf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equal_configs_give_identical_bytes(seed: u64, steps in 1u64..40, gens in generators()) {
        let config = SimConfig { seed, steps, generators: gens, ..SimConfig::default() };
        prop_assert_eq!(csv_bytes(&config), csv_bytes(&config.clone()));
    }

    #[test]
    fn csv_round_trip_preserves_report(seed: u64, steps in 1u64..40, gens in generators()) {
        let config = SimConfig { seed, steps, generators: gens, ..SimConfig::default() };
        let records = run_simulation(&config).unwrap();
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let parsed = read_csv(buf.as_slice(), &ScoringTables::default()).unwrap();
        prop_assert_eq!(build_report(&parsed).unwrap(), build_report(&records).unwrap());
        prop_assert_eq!(&parsed, &records);
    }
}

#[test]
fn result_directory_layout() {
    let dir = tempfile::tempdir().unwrap();
    let records = run_simulation(&SimConfig::default()).unwrap();
    let files = write_results(dir.path(), &records).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "result-all.csv",
            "result-random.csv",
            "result-random-good.csv",
            "result-random-bad.csv",
            "result-fifty-fifty.csv"
        ]
    );
    let all = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(all.lines().count(), 401);
    for f in &files[1..] {
        assert_eq!(std::fs::read_to_string(f).unwrap().lines().count(), 101);
    }
}
