use std::path::Path;
use std::process::{Command, Output};

fn crowdsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crowdsim"))
        .args(args)
        .current_dir(cwd)
        .env("CROWDSIM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SCENARIO: &str =
    "place = square\ncameras = 2\nn_pedestrians = 15\nweather = rain\nduration_s = 4\nseed = 3\n";

#[test]
fn generate_track_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "s.cfg", SCENARIO);
    let out = ok(&crowdsim(
        &["generate", "s.cfg", "--out", "seqs"],
        tmp.path(),
    ));
    assert_eq!(out.lines().count(), 2);
    let seq = tmp.path().join("seqs/square-rain-n15-s3-cam1");
    assert!(seq.join("gt/gt.txt").is_file());

    for tracker in ["iou", "sort"] {
        let out = ok(&crowdsim(
            &["track", seq.to_str().unwrap(), "--tracker", tracker],
            tmp.path(),
        ));
        assert!(out.contains(&format!("{tracker}.txt")));
        let hyp = seq.join("hyp").join(format!("{tracker}.txt"));
        let out = ok(&crowdsim(
            &["evaluate", seq.to_str().unwrap(), hyp.to_str().unwrap()],
            tmp.path(),
        ));
        let mota: f64 = out
            .split_whitespace()
            .find_map(|w| w.strip_prefix("mota="))
            .unwrap()
            .parse()
            .unwrap();
        assert!(mota > 0.3 && mota <= 1.0, "{tracker}: {out}");
    }

    // gt scored against itself
    let gt = seq.join("gt/gt.txt");
    let out = ok(&crowdsim(
        &["evaluate", seq.to_str().unwrap(), gt.to_str().unwrap()],
        tmp.path(),
    ));
    assert!(
        out.contains("mota=1.000000") && out.contains("idsw=0"),
        "{out}"
    );
}

#[test]
fn generate_is_identical_across_processes() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "s.cfg", SCENARIO);
    ok(&crowdsim(&["generate", "s.cfg", "--out", "a"], tmp.path()));
    ok(&crowdsim(&["generate", "s.cfg", "--out", "b"], tmp.path()));
    for cam in ["cam1", "cam2"] {
        for f in ["seqinfo.ini", "gt/gt.txt", "det/det.txt"] {
            let p = format!("square-rain-n15-s3-{cam}/{f}");
            assert_eq!(
                std::fs::read(tmp.path().join("a").join(&p)).unwrap(),
                std::fs::read(tmp.path().join("b").join(&p)).unwrap(),
                "{p}"
            );
        }
    }
}

#[test]
fn perturb_drops_and_duplicates() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "s.cfg", SCENARIO);
    ok(&crowdsim(&["generate", "s.cfg"], tmp.path()));
    let det = tmp.path().join("out/square-rain-n15-s3-cam1/det/det.txt");
    let n = std::fs::read_to_string(&det).unwrap().lines().count();
    let det_s = det.to_str().unwrap();

    ok(&crowdsim(
        &["perturb", det_s, "--drop", "1", "--out", "none.txt"],
        tmp.path(),
    ));
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("none.txt")).unwrap(),
        ""
    );
    ok(&crowdsim(
        &["perturb", det_s, "--dup", "1", "--out", "dup.txt"],
        tmp.path(),
    ));
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("dup.txt"))
            .unwrap()
            .lines()
            .count(),
        2 * n
    );
    ok(&crowdsim(
        &[
            "perturb", det_s, "--drop", "0.3", "--seed", "4", "--out", "p1.txt",
        ],
        tmp.path(),
    ));
    ok(&crowdsim(
        &[
            "perturb", det_s, "--drop", "0.3", "--seed", "4", "--out", "p2.txt",
        ],
        tmp.path(),
    ));
    let p1 = std::fs::read(tmp.path().join("p1.txt")).unwrap();
    assert_eq!(p1, std::fs::read(tmp.path().join("p2.txt")).unwrap());
    let kept = String::from_utf8(p1).unwrap().lines().count() as f64 / n as f64;
    assert!((kept - 0.7).abs() < 0.1, "{kept}");
}

#[test]
fn sweep_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "sw.cfg",
        "places = square\nweathers = sun, snow\ndensities = 30\nseeds = 1\nduration_s = 4\nout_dir = sw\n",
    );
    let out = ok(&crowdsim(
        &["sweep", "sw.cfg", "--threads", "2"],
        tmp.path(),
    ));
    assert!(out.trim().ends_with("results.csv"));
    let results = tmp.path().join("sw/results.csv");
    assert_eq!(
        std::fs::read_to_string(&results).unwrap().lines().count(),
        1 + 4
    );

    let out = ok(&crowdsim(
        &["report", "sw/results.csv", "--group-by", "weather"],
        tmp.path(),
    ));
    assert!(out.starts_with("group,method,mota_mean"));
    let summary =
        std::fs::read_to_string(tmp.path().join("sw/results-by-weather.summary.csv")).unwrap();
    let groups: Vec<&str> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(groups, ["sun", "snow"]);
    assert!(tmp
        .path()
        .join("sw/results-by-weather.quantiles.csv")
        .is_file());

    ok(&crowdsim(
        &[
            "report",
            "sw/results.csv",
            "--group-by",
            "tracker",
            "--out",
            "r/t",
        ],
        tmp.path(),
    ));
    let t = std::fs::read_to_string(tmp.path().join("r/t.summary.csv")).unwrap();
    assert_eq!(t.lines().count(), 3);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| crowdsim(args, tmp.path()).status.code();
    write(tmp.path(), "bad.cfg", "n_pedestrians = 500\n");
    write(tmp.path(), "typo.cfg", "pedestrians = 5\n");
    write(tmp.path(), "r.csv", "place,weather\n");
    // configuration and usage errors
    assert_eq!(code(&["generate", "bad.cfg"]), Some(2));
    assert_eq!(code(&["generate", "typo.cfg"]), Some(2));
    assert_eq!(code(&["report", "r.csv", "--group-by", "colour"]), Some(2));
    assert_eq!(code(&["report", "r.csv"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["track", ".", "--tracker", "deep"]), Some(2));
    // missing files
    assert_eq!(code(&["generate", "missing.cfg"]), Some(3));
    assert_eq!(code(&["evaluate", "nowhere", "nothing.txt"]), Some(3));
    assert_eq!(code(&["perturb", "nothing.txt"]), Some(3));
    assert_eq!(code(&["report", "nothing.csv"]), Some(3));
    assert_eq!(code(&["--help"]), Some(0));

    let err = String::from_utf8(crowdsim(&["generate", "typo.cfg"], tmp.path()).stderr).unwrap();
    assert!(err.contains("line 1"), "{err}");
}
