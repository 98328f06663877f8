use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::TempDir;

const FIELD: &str = "Physical sciences and engineering";

struct Fixture {
    _dir: TempDir,
    bib: PathBuf,
    econ: PathBuf,
    pat: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let bib = dir.path().join("leiden.csv");
    let econ = dir.path().join("economy.csv");
    let pat = dir.path().join("patents.csv");

    let mut b = String::from("institution,country,period_start,period_end,field,counting,p,p_top50,p_top10,p_top5,p_top1\n");
    // (country as spelled in the source, P, P_top10%)
    let units = [
        ("United States", 60_000.0, 9_000.0),
        ("China", 55_000.0, 5_500.0),
        ("Germany", 15_000.0, 1_800.0),
        ("United Kingdom", 12_000.0, 1_700.0),
        ("Japan", 11_000.0, 850.0),
        ("Korea, Rep.", 8_000.0, 800.0),
        ("Switzerland", 4_000.0, 720.0),
        ("Spain", 6_000.0, 600.0),
        ("India", 9_000.0, 540.0),
        ("Norway", 1_500.0, 170.0),
        ("Singapore", 2_500.0, 400.0),
        ("Portugal", 2_000.0, 190.0),
        ("Greece", 1_800.0, 150.0),
    ];
    for (period, scale) in [((2006, 2009), 0.7), ((2016, 2019), 1.0)] {
        for (i, (country, p, top10)) in units.iter().enumerate() {
            // two institutions per country
            for part in [0.6, 0.4] {
                let p = p * scale * part;
                let t10 = top10 * scale * part;
                b.push_str(&format!(
                    "\"Univ {i}-{part}\",\"{country}\",{},{},{FIELD},fractional,{p},{},{t10},{},{}\n",
                    period.0,
                    period.1,
                    p * 0.5,
                    t10 * 0.5,
                    t10 * 0.1
                ));
            }
        }
    }
    std::fs::write(&bib, b).unwrap();

    let mut e = String::from("country,year,gdp_usd,population,gdp_per_capita\n");
    let eco = [
        ("USA", 328e6, 62_996.0),
        ("CHN", 1_400e6, 9_977.0),
        ("DEU", 83e6, 47_939.0),
        ("GBR", 66e6, 43_043.0),
        ("JPN", 126e6, 39_159.0),
        ("KOR", 51e6, 33_423.0),
        ("CHE", 8.5e6, 82_797.0),
        ("ESP", 46.7e6, 26_505.0),
        ("IND", 1_350e6, 1_997.0),
        ("NOR", 5.3e6, 70_459.0),
        ("SGP", 5.6e6, 56_828.0),
        ("PRT", 10.3e6, 19_978.0),
        ("GRC", 10.7e6, 18_117.0),
    ];
    for year in [2008, 2018] {
        for (c, pop, pc) in eco {
            e.push_str(&format!("{c},{year},{},{pop},{pc}\n", pop * pc));
        }
    }
    std::fs::write(&econ, e).unwrap();

    let mut p = String::from("country,year,families\n");
    let fams = [
        ("USA", 13_000.0),
        ("CHN", 5_000.0),
        ("DEU", 4_500.0),
        ("GBR", 1_700.0),
        ("JPN", 17_500.0),
        ("KOR", 2_800.0),
        ("CHE", 1_200.0),
        ("ESP", 250.0),
        ("IND", 300.0),
        ("NOR", 80.0),
        ("SGP", 120.0),
        ("PRT", 5.0),
        ("GRC", 14.0),
    ];
    for year in 2014..=2018 {
        for (c, f) in fams {
            let wobble = 1.0 + 0.02 * ((year - 2016) as f64);
            p.push_str(&format!("{c},{year},{}\n", f * wobble));
        }
    }
    std::fs::write(&pat, p).unwrap();

    Fixture {
        _dir: dir,
        bib,
        econ,
        pat,
    }
}

fn run(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("epindex").chain(args.iter().copied());
    let code = epindex_cli::run(argv, &mut out, &mut err);
    (code, out, String::from_utf8(err).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn expect_worked_example() {
    let (code, out, err) = run(&["expect", "--annual-papers", "15000", "--ep", "0.05", "--x", "0.005"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    let years = v["body"]["expectation"]["years_per_event"].as_f64().unwrap();
    assert!((25.5..=27.0).contains(&years), "{years}");
}

#[test]
fn rendering_is_byte_identical_and_replayable() {
    let f = fixture();
    let args = [
        "share",
        "--bibliometrics",
        path(&f.bib),
        "--period",
        "2016-2019",
        "--indicator",
        "all",
    ];
    let (c1, a, e1) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0), "{e1}");
    assert_eq!(a, b);

    let meta = json(&a)["metadata"].clone();
    let replay: Vec<String> = meta["argv"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect();
    let replay: Vec<&str> = replay.iter().map(String::as_str).collect();
    let (c3, again, _) = run(&replay);
    assert_eq!(c3, 0);
    assert_eq!(again, a);
    assert_eq!(meta["inputs"]["bibliometrics"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn share_table_heads_with_largest_producer() {
    let f = fixture();
    let (code, out, err) = run(&[
        "share",
        "--bibliometrics",
        path(&f.bib),
        "--period",
        "2016-2019",
        "--indicator",
        "p_top10",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("indicator,rank,country,value,cumulative_share"));
    assert!(lines.next().unwrap().starts_with("p_top10,1,USA,"));
}

#[test]
fn coverage_csv_schema() {
    let f = fixture();
    let (code, out, err) = run(&[
        "coverage",
        "--bibliometrics",
        path(&f.bib),
        "--economy",
        path(&f.econ),
        "--period",
        "2016-2019",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "indicator,weight,percent");
    assert_eq!(lines.len(), 1 + 5 * 2);
    for line in &lines[1..] {
        let pct: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=100.0).contains(&pct));
    }
}

#[test]
fn map_csv_schema() {
    let f = fixture();
    let (code, out, err) = run(&[
        "map",
        "--bibliometrics",
        path(&f.bib),
        "--economy",
        path(&f.econ),
        "--patents",
        path(&f.pat),
        "--period",
        "2016-2019",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "country,ratio,patents_per_billion");
    // Portugal has too few families and is screened out
    assert!(lines.iter().all(|l| !l.starts_with("PRT,")));
    assert!(lines.len() > 5);
}

#[test]
fn correlate_excludes_and_reports() {
    let f = fixture();
    let (code, out, err) = run(&[
        "correlate",
        "--bibliometrics",
        path(&f.bib),
        "--economy",
        path(&f.econ),
        "--patents",
        path(&f.pat),
        "--period",
        "2016-2019",
        "--x",
        "gdp_per_capita",
        "--y",
        "ratio",
        "--exclude",
        "USA,China",
    ]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    assert_eq!(v["metadata"]["exclusions"], serde_json::json!(["CHN", "USA"]));
    let r = v["body"]["correlation"]["study"]["result"]["r"].as_f64().unwrap();
    assert!(r > 0.5, "{r}");
    assert_eq!(v["body"]["correlation"]["study"]["result"]["n"], 11);
}

#[test]
fn out_flag_writes_file_and_inputs_untouched() {
    let f = fixture();
    let before: Vec<Vec<u8>> = [&f.bib, &f.econ, &f.pat].iter().map(|p| std::fs::read(p).unwrap()).collect();
    let target = f.bib.with_file_name("report.md");
    let (code, out, err) = run(&[
        "partition",
        "--bibliometrics",
        path(&f.bib),
        "--economy",
        path(&f.econ),
        "--patents",
        path(&f.pat),
        "--period",
        "2016-2019",
        "--format",
        "md",
        "--out",
        path(&target),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(&target).unwrap().contains('|'));
    let after: Vec<Vec<u8>> = [&f.bib, &f.econ, &f.pat].iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn timeseries_resolves_country_names() {
    let f = fixture();
    let (code, out, err) = run(&[
        "timeseries",
        "--bibliometrics",
        path(&f.bib),
        "--country",
        "Korea, Rep.",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "country,period,p,ratio");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("KOR,2006-2009,"));
}

#[test]
fn exit_codes() {
    let f = fixture();
    // usage: missing required input, unknown flag, bad format, out-of-range e_p
    assert_eq!(run(&["share", "--period", "2016-2019"]).0, 1);
    assert_eq!(run(&["share", "--nope"]).0, 1);
    assert_eq!(run(&["--format", "xml", "expect", "--annual-papers", "1", "--ep", "0.1", "--x", "1"]).0, 1);
    let (code, _, err) = run(&["expect", "--annual-papers", "1", "--ep", "1.5", "--x", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("--ep"), "{err}");
    assert_eq!(run(&["--help"]).0, 0);

    // data: unreadable file, malformed row, unknown period
    assert_eq!(
        run(&["share", "--bibliometrics", "/nonexistent.csv", "--period", "2016-2019"]).0,
        2
    );
    let bad = f.bib.with_file_name("bad.csv");
    std::fs::write(
        &bad,
        format!("institution,country,period_start,period_end,field,counting,p,p_top50,p_top10,p_top5,p_top1\nU,Atlantis,2016,2019,{FIELD},fractional,1,1,1,1,1\n"),
    )
    .unwrap();
    let (code, _, err) = run(&["share", "--bibliometrics", path(&bad), "--period", "2016-2019"]);
    assert_eq!(code, 2);
    assert!(err.contains("Atlantis"), "{err}");
    assert_eq!(run(&["share", "--bibliometrics", path(&f.bib), "--period", "1990-1993"]).0, 2);
    assert_eq!(run(&["fit", "--p", "100", "--counts", "50:10"]).0, 2);
}

#[test]
fn simulate_and_fit_reports() {
    let (code, out, err) = run(&["simulate", "--ep", "0.1", "--n", "20000", "--seeds", "3", "--seed", "7"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    let runs = v["body"]["simulation"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert_eq!(runs[2]["seed"], 9);

    let (code, out, err) = run(&["fit", "--p", "1000", "--counts", "50:500,10:100,1:10", "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    let ep = v["body"]["fit"]["estimate"]["value"].as_f64().unwrap();
    assert!((ep - 0.1).abs() < 1e-12, "{ep}");
}
