use std::io::Write;
use std::path::Path;

use proptest::prelude::*;

use crankback::io::{load_scenario, parse_scenario};
use crankback::{Error, Policy};

fn file_with(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn minimal_file() {
    let f = file_with("n = 6\nhop_mean = 3\nhop_var = 1\ndeadline = 16\np_tr = 0.9\n");
    let loaded = load_scenario(f.path()).unwrap();
    let s = &loaded.scenario;
    assert_eq!(
        (s.n(), s.hop_mean(), s.hop_var(), s.deadline(), s.p_tr()),
        (6, 3.0, 1.0, 16.0, 0.9)
    );
    assert_eq!(s.hop_distance(), 3.0);
    let cfg = loaded.sim.to_config();
    assert_eq!((cfg.trials, cfg.seed, cfg.policy), (1_000_000, 0, Policy::Quantile));
}

#[test]
fn full_file() {
    let f = file_with(
        "schema_version = 1\nn = 4\nhop_mean = 2.5\nhop_var = 0.5\ndeadline = 12\np_tr = 0.8\nhop_distance = 7\n\n\
         [sim]\ntrials = 5000\nseed = 42\npolicy = \"rest_time\"\nt_tr = 3.5\nattempt_cap = 100\n",
    );
    let loaded = load_scenario(f.path()).unwrap();
    assert_eq!(loaded.scenario.hop_distance(), 7.0);
    let cfg = loaded.sim.to_config();
    assert_eq!((cfg.trials, cfg.seed, cfg.attempt_cap), (5000, 42, 100));
    assert_eq!(cfg.policy, Policy::RestTime { t_tr: 3.5 });
    cfg.validate(&loaded.scenario).unwrap();
}

#[test]
fn errors_name_the_line() {
    let cases = [
        (
            "n = 6\nhop_mean = 3\nhop_var = 1\ndeadline = 16\np_tr = 1.0\n",
            "line 5: p_tr must lie strictly inside (0,1)",
        ),
        (
            "n = 1\nhop_mean = 3\nhop_var = 1\ndeadline = 16\np_tr = 0.5\n",
            "line 1: n ≥ 2 required",
        ),
        (
            "n = 6\nhop_mean = 3\nhop_var = -1\ndeadline = 16\np_tr = 0.5\n",
            "line 3: ",
        ),
    ];
    for (text, want) in cases {
        let err = load_scenario(file_with(text).path()).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }), "{err:?}");
        assert!(err.to_string().starts_with(want), "{err} vs {want}");
        assert!(err.is_input_error());
    }
    let err =
        load_scenario(file_with("n = 6\nhop_mean = 3\nhop_var = 1\ndeadline = 16\np_tr = 0.5\ncolour = 2\n").path())
            .unwrap_err();
    assert!(matches!(err, Error::Parse { .. }));
    assert!(err.to_string().contains("line 6"), "{err}");
}

proptest! {
    #[test]
    fn arbitrary_text_never_panics(text in "[a-z_=\\[\\]\"0-9.\\- \n]{0,120}") {
        let _ = parse_scenario(&text, Path::new("fuzz.toml"));
    }

    #[test]
    fn numeric_fields_validate_without_panicking(
        n in -3i64..20,
        mean in -10.0f64..10.0,
        var in -1.0f64..5.0,
        deadline in -5.0f64..50.0,
        p_tr in -0.5f64..1.5,
    ) {
        let text = format!("n = {n}\nhop_mean = {mean:?}\nhop_var = {var:?}\ndeadline = {deadline:?}\np_tr = {p_tr:?}\n");
        match parse_scenario(&text, Path::new("gen.toml")) {
            Ok(loaded) => {
                prop_assert!(n >= 2 && var > 0.0 && deadline > 0.0 && p_tr > 0.0 && p_tr < 1.0);
                prop_assert_eq!(loaded.scenario.n(), n as usize);
            }
            Err(e) => prop_assert!(e.is_input_error() && e.to_string().starts_with("line "), "{}", e),
        }
    }
}
