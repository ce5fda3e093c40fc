use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use matchconv::data::pgm::{decode_pgm, encode_pgm};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_matchconv"))
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-2class")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small training run over the fixture; extra flags are appended.
fn train(out: &Path, extra: &[&str]) -> Output {
    let fixture = fixture();
    let mut args = vec![
        "train",
        "--dataset",
        s(&fixture),
        "--classes",
        "0,1",
        "--limit",
        "20",
        "--filters",
        "8,16,32",
        "--threads",
        "1",
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["train"])), 1);
    assert_eq!(code(&run(&["train", "--dataset", "/no/such/dir"])), 1);
    assert_eq!(code(&run(&["gradcheck", "--bogus"])), 1);
}

#[test]
fn gradcheck_passes_and_corruption_fails() {
    let ok = run(&["gradcheck", "--threads", "1"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    let report = stdout(&ok);
    for layer in ["dense", "global", "network"] {
        assert!(
            report.lines().any(|l| l.contains(layer) && l.contains("PASS")),
            "{report}"
        );
    }
    let bad = run(&["gradcheck", "--instances", "3", "--corrupt"]);
    assert_eq!(code(&bad), 3);
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn constant_image_convolves_to_uniform_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.pgm");
    std::fs::write(&input, encode_pgm(8, 8, &[77; 64]).unwrap()).unwrap();
    let output = dir.path().join("out.pgm");
    let out = run(&["convolve", "--input", s(&input), "--out", s(&output)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("range [0, 0]"), "{}", stdout(&out));
    let (w, h, pixels) = decode_pgm(&std::fs::read(&output).unwrap()).unwrap();
    assert_eq!((w, h), (8, 8));
    assert!(pixels.iter().all(|&p| p == pixels[0]));
}

#[test]
fn rotated_convolution_is_rotated_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("img.pgm");
    let pixels: Vec<u8> = (0..36u32).map(|i| ((i * 37 + i / 6 * 11) % 256) as u8).collect();
    std::fs::write(&input, encode_pgm(6, 6, &pixels).unwrap()).unwrap();
    let plain = dir.path().join("plain.pgm");
    let turned = dir.path().join("turned.pgm");
    assert_eq!(
        code(&run(&["convolve", "--input", s(&input), "--out", s(&plain)])),
        0
    );
    assert_eq!(
        code(&run(&[
            "convolve",
            "--input",
            s(&input),
            "--rotate",
            "90",
            "--out",
            s(&turned)
        ])),
        0
    );
    let (_, _, a) = decode_pgm(&std::fs::read(&plain).unwrap()).unwrap();
    let (_, _, b) = decode_pgm(&std::fs::read(&turned).unwrap()).unwrap();
    let rotated = matchconv::data::grid::rotate_square(&a, 6, matchconv::data::grid::Rotation::Quarter);
    assert_eq!(rotated, b);
}

#[test]
fn single_vertex_pair_has_one_map() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.graph");
    let f = dir.path().join("f.graph");
    std::fs::write(&g, "graph 1 0 1 0\nv 7 2.0\n").unwrap();
    std::fs::write(&f, "graph 1 0 1 0\nv 3 1.5\n").unwrap();
    let out = run(&["match", s(&g), s(&f)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("score 3"), "{text}");
    assert!(text.contains("filter 3 -> 7"), "{text}");
}

#[test]
fn brute_force_agrees_without_edges_and_gap_is_printed_with_them() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.graph");
    let f = dir.path().join("f.graph");
    std::fs::write(
        &g,
        "graph 4 4 1 1\nv 0 1\nv 1 -2\nv 2 0.5\nv 3 3\ne 0 1 1\ne 1 2 -1\ne 2 3 2\ne 0 3 0.5\n",
    )
    .unwrap();
    std::fs::write(&f, "graph 3 2 1 1\nv 0 1\nv 1 -1\nv 2 2\ne 0 1 1\ne 0 2 -1\n").unwrap();
    let score = |text: &str| {
        text.lines()
            .next()
            .unwrap()
            .split("score ")
            .nth(1)
            .unwrap()
            .to_string()
    };
    let lsap = stdout(&run(&["match", s(&g), s(&f)]));
    let brute = stdout(&run(&["match", s(&g), s(&f), "--brute"]));
    assert_eq!(score(&lsap), score(&brute));
    let with_edges = run(&["match", s(&g), s(&f), "--edges"]);
    assert_eq!(code(&with_edges), 0);
    let text = stdout(&with_edges);
    let gap_line = text.lines().find(|l| l.contains("gap")).expect("gap line");
    let gap: f64 = gap_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(gap >= 0.0);
}

#[test]
fn malformed_graph_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.graph");
    std::fs::write(&g, "graph 2 0 1 0\nv 0 1\n").unwrap();
    assert_eq!(code(&run(&["match", s(&g), s(&g)])), 2);
}

#[test]
fn twenty_digits_are_memorised() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path(), &["--lr", "3e-3", "--epochs", "20", "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let ckpt = dir.path().join("model.ckpt");
    let fixture = fixture();
    let eval = run(&[
        "eval",
        "--dataset",
        s(&fixture),
        "--classes",
        "0,1",
        "--limit",
        "20",
        "--checkpoint",
        s(&ckpt),
        "--split",
        "train",
    ]);
    assert_eq!(code(&eval), 0);
    assert!(
        stdout(&eval).contains("train accuracy 100.00% (20/20)"),
        "{}",
        stdout(&eval)
    );
}

#[test]
fn fixed_seed_reruns_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let flags = ["--epochs", "2", "--seed", "4"];
    assert_eq!(code(&train(a.path(), &flags)), 0);
    assert_eq!(code(&train(b.path(), &flags)), 0);
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    let csv = read(a.path(), "history.csv");
    assert_eq!(csv, read(b.path(), "history.csv"));
    assert_eq!(read(a.path(), "model.ckpt"), read(b.path(), "model.ckpt"));
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some("epoch,loss,valid_acc"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn eval_is_repeatable_and_rejects_corrupt_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&train(dir.path(), &["--epochs", "1"])), 0);
    let ckpt = dir.path().join("model.ckpt");
    let fixture = fixture();
    let eval = |ckpt: &Path| {
        run(&[
            "eval",
            "--dataset",
            s(&fixture),
            "--classes",
            "0,1",
            "--limit",
            "20",
            "--checkpoint",
            s(ckpt),
        ])
    };
    let first = eval(&ckpt);
    assert_eq!(code(&first), 0);
    assert!(stdout(&first).starts_with("test accuracy"));
    assert_eq!(first.stdout, eval(&ckpt).stdout);

    let text = std::fs::read_to_string(&ckpt).unwrap();
    let broken = dir.path().join("broken.ckpt");
    std::fs::write(&broken, &text[..text.len() / 2]).unwrap();
    assert_eq!(code(&eval(&broken)), 2);
    std::fs::write(
        &broken,
        text.replace("matchconv-checkpoint 1", "matchconv-checkpoint 9"),
    )
    .unwrap();
    assert_eq!(code(&eval(&broken)), 2);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(&config, "# desk run\nepochs = 2\nseed = 5\n").unwrap();
    let rows = |d: &Path| {
        std::fs::read_to_string(d.join("history.csv"))
            .unwrap()
            .lines()
            .count()
            - 1
    };

    let from_file = dir.path().join("file");
    assert_eq!(code(&train(&from_file, &["--config", s(&config)])), 0);
    assert_eq!(rows(&from_file), 2);

    let from_flag = dir.path().join("flag");
    assert_eq!(
        code(&train(&from_flag, &["--config", s(&config), "--epochs", "1"])),
        0
    );
    assert_eq!(rows(&from_flag), 1);

    std::fs::write(&config, "epochs = two\n").unwrap();
    assert_eq!(code(&train(&from_flag, &["--config", s(&config)])), 1);
}
