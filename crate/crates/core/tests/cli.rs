mod common;

use std::path::Path;
use std::process::{Command, Output};

use depthq::io::{load_gray, load_rgba, save_gray_png, save_rgb_png};
use depthq::model_variance::noise_channel;

fn depthq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depthq"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn quality_writes_maps_and_sidecars() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = common::scene(1);
    let rgb = tmp.path().join("a.png");
    let depth = tmp.path().join("a_depth.png");
    save_rgb_png(&sc.rgb, &rgb).unwrap();
    save_gray_png(&sc.depth, &depth).unwrap();
    let out = tmp.path().join("q");
    let o = depthq(&[
        "quality",
        "--rgb",
        s(&rgb),
        "--depth",
        s(&depth),
        "--out",
        s(&out),
        "--debug-superpixels",
        "--slic-seed",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "EC_a.png",
        "EC_a.json",
        "RU_a.png",
        "RU_a.json",
        "SP_a.png",
        "SP_a.csv",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert!(!out.join("MV_a.png").exists());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("EC_a.json")).unwrap()).unwrap();
    assert_eq!(meta["slic_seed"], 5);
}

#[test]
fn make_rgbr_embeds_seeded_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let rgb = tmp.path().join("a.png");
    save_rgb_png(&common::scene(0).rgb, &rgb).unwrap();
    let out = tmp.path().join("nested/a_rgbr.png");
    let o = depthq(&[
        "make-rgbr",
        "--rgb",
        s(&rgb),
        "--seed",
        "17",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (back, alpha) = load_rgba(&out).unwrap();
    assert_eq!(back, common::scene(0).rgb);
    let expected: Vec<u8> = noise_channel(64, 48, 17)
        .data()
        .iter()
        .map(|&v| depthq::io::to_u8(v))
        .collect();
    assert_eq!(alpha, expected);
}

#[test]
fn mv_and_fuse() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = common::scene(2);
    let a = tmp.path().join("x.png");
    let b = tmp.path().join("y.png");
    save_gray_png(&sc.sal_rgb, &a).unwrap();
    save_gray_png(&sc.sal_d, &b).unwrap();
    let out = tmp.path().join("o");
    let o = depthq(&[
        "mv",
        "--sal-rgbd",
        s(&a),
        "--sal-rgbr",
        s(&b),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let mv = load_gray(out.join("MV_x.png")).unwrap();
    let ones = tmp.path().join("ones.png");
    save_gray_png(&depthq::GrayMap::filled(64, 48, 1.0), &ones).unwrap();

    // full trust in depth when the quality map is all ones
    let o = depthq(&[
        "fuse",
        "--sal-rgb",
        s(&a),
        "--sal-d",
        s(&b),
        "--ec",
        s(&ones),
        "--components",
        "ec",
        "--out",
        s(&out),
        "--stem",
        "trust",
    ]);
    assert!(o.status.success());
    assert_eq!(
        load_gray(out.join("FUSED_trust.png")).unwrap(),
        load_gray(&b).unwrap()
    );

    // the same map is ignored when the component is switched off
    let o = depthq(&[
        "fuse",
        "--sal-rgb",
        s(&a),
        "--sal-d",
        s(&b),
        "--ec",
        s(&ones),
        "--components",
        "none",
        "--out",
        s(&out),
        "--stem",
        "base",
    ]);
    assert!(o.status.success());
    let base = load_gray(out.join("FUSED_base.png")).unwrap();
    let ra = load_gray(&a).unwrap();
    let rb = load_gray(&b).unwrap();
    for i in 0..base.len() {
        let mid = depthq::io::to_u8(0.5 * (ra.data()[i] + rb.data()[i]));
        assert_eq!(depthq::io::to_u8(base.data()[i]), mid);
    }
    assert_eq!(mv.width(), 64);
}

#[test]
fn eval_writes_report_and_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let pred = tmp.path().join("pred");
    let gt = tmp.path().join("gt");
    std::fs::create_dir_all(&pred).unwrap();
    std::fs::create_dir_all(&gt).unwrap();
    for i in 0..2 {
        let sc = common::scene(i);
        save_gray_png(&sc.sal_rgb, pred.join(format!("FUSED_s{i}.png"))).unwrap();
        save_gray_png(&sc.gt, gt.join(format!("s{i}.png"))).unwrap();
    }
    let report = tmp.path().join("r/report.json");
    let curves = tmp.path().join("pr");
    let csv = tmp.path().join("report.csv");
    let o = depthq(&[
        "eval",
        "--pred",
        s(&pred),
        "--gt",
        s(&gt),
        "--out",
        s(&report),
        "--pr-csv",
        s(&curves),
        "--csv",
        s(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["n_images"], 2);
    assert_eq!(v["per_image"][1]["stem"], "s1");
    let pr = std::fs::read_to_string(curves.join("s0.csv")).unwrap();
    assert_eq!(pr.lines().next(), Some("threshold,precision,recall,f"));
    assert_eq!(pr.lines().count(), 257);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);
}

#[test]
fn run_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    common::write_dataset(&data, 2);
    let out = tmp.path().join("out");
    let ok = depthq(&[
        "run",
        "--dataset",
        s(&data),
        "--out",
        s(&out),
        "--jobs",
        "2",
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(out.join("report.json").exists() && out.join("report.csv").exists());

    std::fs::write(data.join("RGB/s1.png"), b"garbage").unwrap();
    let partial = depthq(&["run", "--dataset", s(&data), "--out", s(&out)]);
    assert_eq!(partial.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&partial.stderr).contains("s1"));

    let fatal = depthq(&[
        "run",
        "--dataset",
        s(&tmp.path().join("nowhere")),
        "--out",
        s(&out),
    ]);
    assert_eq!(fatal.status.code(), Some(2));
    let bad_components = depthq(&["run", "--dataset", s(&data), "--components", "ec,xx"]);
    assert_eq!(bad_components.status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    common::write_dataset(&data, 1);
    let cfg = tmp.path().join("depthq.toml");
    let out_cfg = tmp.path().join("from_config");
    std::fs::write(
        &cfg,
        format!(
            "slic.seed = 3\nnoise.seed = 4\nrun.components = \"mv\"\nrun.out = \"{}\"\n",
            s(&out_cfg)
        ),
    )
    .unwrap();
    let o = depthq(&["run", "--dataset", s(&data), "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out_cfg.join("MV_s0.png").exists());
    assert!(!out_cfg.join("EC_s0.png").exists());

    let out_flag = tmp.path().join("from_flag");
    let o = depthq(&[
        "run",
        "--dataset",
        s(&data),
        "--config",
        s(&cfg),
        "--out",
        s(&out_flag),
        "--components",
        "ec",
        "--noise-seed",
        "8",
    ]);
    assert!(o.status.success());
    let fused: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_flag.join("FUSED_s0.json")).unwrap())
            .unwrap();
    assert_eq!(fused["components"], "ec");
    assert_eq!(fused["slic_seed"], 3);
    assert_eq!(fused["noise_seed"], 8);

    std::fs::write(&cfg, "ec.nonsense = 1\n").unwrap();
    let o = depthq(&["run", "--dataset", s(&data), "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
}
