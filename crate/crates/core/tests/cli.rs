use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> PathBuf {
    manifest_dir().join("tests/fixtures").join(name)
}

fn lexicons() -> PathBuf {
    manifest_dir().join("data/lexicons/manifest.toml")
}

fn mrforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrforge"))
        .args(args)
        .env_remove("MRFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn build_reviews(out: &Path, extra: &[&str]) -> Output {
    let (lex, conllu, meta) = (lexicons(), fixture("reviews.conllu"), fixture("reviews_meta.jsonl"));
    let mut args = vec![
        "build",
        "--lexicons",
        lex.to_str().unwrap(),
        "--conllu",
        conllu.to_str().unwrap(),
        "--meta",
        meta.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    mrforge(&args)
}

fn lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_writes_every_variant() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = build_reviews(&out, &["--split", "0.5,0.25,0.25", "--seed", "3"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    assert_eq!(lines(&out.join("corpus.jsonl")), 4);
    for variant in ["base", "adj", "sent", "style"] {
        let total: usize = ["train", "dev", "test"]
            .iter()
            .map(|s| lines(&out.join(variant).join(format!("{s}.jsonl"))))
            .sum();
        assert_eq!(total, 4, "{variant}");
    }
    let stats = json(&out.join("stats.json"));
    assert_eq!(stats["seed"], 3);
    assert!(stats["config_hash"].as_str().is_some_and(|h| h.len() == 16));
    let hist = &stats["corpus"]["mr_len_histogram"];
    assert_eq!(
        (hist["2"].as_u64(), hist["3"].as_u64(), hist["4"].as_u64()),
        (Some(2), Some(1), Some(1))
    );
    assert_eq!(stats["instances"], 4);

    let compounds = fs::read_to_string(out.join("compounds.tsv")).unwrap();
    assert!(compounds.contains("beef chicken kebabs\tfood"));

    // variant files drop the fields their variant lacks; references are lowercased
    let base = fs::read_to_string(out.join("base/train.jsonl")).unwrap();
    assert!(!base.contains("adj=") && !base.contains("sentiment"));
    for line in base.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let r = v["reference"].as_str().unwrap();
        assert_eq!(r, r.to_lowercase());
    }
}

#[test]
fn rebuild_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(build_reviews(&a, &["--seed", "9"]).status.success());
    assert!(build_reviews(&b, &["--seed", "9"]).status.success());
    for rel in [
        "corpus.jsonl",
        "stats.json",
        "stats.txt",
        "compounds.tsv",
        "style/train.jsonl",
        "base/test.jsonl",
    ] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn seed_env_overrides_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (lex, conllu, meta) = (lexicons(), fixture("reviews.conllu"), fixture("reviews_meta.jsonl"));
    let res = Command::new(env!("CARGO_BIN_EXE_mrforge"))
        .args(["build", "--seed", "1", "--lexicons"])
        .arg(&lex)
        .arg("--conllu")
        .arg(&conllu)
        .arg("--meta")
        .arg(&meta)
        .arg("--out")
        .arg(&out)
        .env("MRFORGE_SEED", "42")
        .output()
        .unwrap();
    assert!(res.status.success());
    assert_eq!(json(&out.join("stats.json"))["seed"], 42);
}

#[test]
fn nothing_extractable_is_a_format_error() {
    let tmp = tempfile::tempdir().unwrap();
    let conllu = tmp.path().join("none.conllu");
    fs::write(
        &conllu,
        "# sent_id = x-1\n# stars = 4\n# review_id = x\n\
         1\tThe\tthe\tDET\tDT\t_\t2\tdet\t_\t_\n\
         2\tpasta\tpasta\tNOUN\tNN\t_\t4\tnsubj\t_\t_\n\
         3\twas\tbe\tAUX\tVBD\t_\t4\tcop\t_\t_\n\
         4\tgreat\tgreat\tADJ\tJJ\t_\t0\troot\t_\t_\n\n",
    )
    .unwrap();
    let lex = lexicons();
    let res = mrforge(&[
        "build",
        "--lexicons",
        lex.to_str().unwrap(),
        "--conllu",
        conllu.to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("error[format]: no extractable sentences"));
}

#[test]
fn error_categories_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = build_reviews(&out, &["--split", "0.9,0.2,0.1"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).starts_with("error[config]"));

    let res = mrforge(&["stats", "--corpus", tmp.path().join("missing.jsonl").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).starts_with("error[io]"));

    let bad = tmp.path().join("bad.conllu");
    fs::write(&bad, "1\tonly\tthree\n\n").unwrap();
    let lex = lexicons();
    let res = mrforge(&[
        "build",
        "--lexicons",
        lex.to_str().unwrap(),
        "--conllu",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
}

fn built_corpus(dir: &Path) -> PathBuf {
    let out = dir.join("out");
    assert!(build_reviews(&out, &[]).status.success());
    out.join("corpus.jsonl")
}

#[test]
fn eval_of_references_is_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = built_corpus(tmp.path());
    let refs: Vec<String> = fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["reference"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    let outputs = tmp.path().join("outputs.txt");
    fs::write(&outputs, refs.join("\n") + "\n").unwrap();
    let lex = lexicons();
    let res = mrforge(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--outputs",
        outputs.to_str().unwrap(),
        "--lexicons",
        lex.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: Value = serde_json::from_slice(&res.stdout).unwrap();
    let m = &report["metrics"];
    assert_eq!(m["ser"]["average"], 0.0);
    assert_eq!(m["bleu"], 1.0);
    assert_eq!(m["style"]["first_person_hit_rate"], 1.0);
    assert_eq!(m["style"]["exclamation_hit_rate"], 1.0);
    assert_eq!(m["discourse"]["contrast"], 2);
    assert_eq!(m["templates"]["unique"], 4);
}

#[test]
fn eval_reports_only_requested_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = built_corpus(tmp.path());
    let res = mrforge(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--outputs",
        corpus.to_str().unwrap(),
        "--metrics",
        "entropy",
    ]);
    assert!(res.status.success());
    let report: Value = serde_json::from_slice(&res.stdout).unwrap();
    let keys: Vec<&String> = report["metrics"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["entropy"]);

    let res = mrforge(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--outputs",
        corpus.to_str().unwrap(),
        "--metrics",
        "meteor",
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn eval_rejects_misaligned_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = built_corpus(tmp.path());
    let outputs = tmp.path().join("short.txt");
    fs::write(&outputs, "the beef was good .\n").unwrap();
    let res = mrforge(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--outputs",
        outputs.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("misaligned"));
}

#[test]
fn templates_top_k() {
    let tmp = tempfile::tempdir().unwrap();
    let outputs = tmp.path().join("outs.txt");
    let body = "i had the beef .\ni had the rice .\ni had the steak .\nthe beef was good .\nthe crab was good .\nwe loved it !\n";
    fs::write(&outputs, body).unwrap();
    let lex = lexicons();
    let res = mrforge(&[
        "templates",
        "--outputs",
        outputs.to_str().unwrap(),
        "--lexicons",
        lex.to_str().unwrap(),
        "--top-k",
        "1",
    ]);
    assert!(res.status.success());
    let table = String::from_utf8(res.stdout).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 3, "{table}");
    assert!(rows[1].ends_with("i had the [FOOD] ."));
    assert!(rows[1].contains(" 3 "));
    assert_eq!(rows[2], "unique templates: 3 of 6");
}

#[test]
fn split_and_overlap_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = built_corpus(tmp.path());
    let out = tmp.path().join("resplit");
    let res = mrforge(&[
        "split",
        "--corpus",
        corpus.to_str().unwrap(),
        "--split",
        "0.5,0.25,0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let report: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(
        (
            report["train"].as_u64(),
            report["dev"].as_u64(),
            report["test"].as_u64()
        ),
        (Some(2), Some(1), Some(1))
    );

    let res = mrforge(&[
        "overlap",
        "--train",
        corpus.to_str().unwrap(),
        "--test",
        corpus.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let report: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["pct_test_mrs_in_train"], 100.0);
}
