use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lightlayers::basis::EnvironmentMap;
use lightlayers::datagen::Manifest;
use lightlayers::imagio::{
    gamma_decode, read_pfm_rgb, read_png, write_pfm, ImageRgb, LayerFile, LayerStem, PfmImage, STORAGE_GAMMA,
};
use lightlayers::metrics::parse_report;
use lightlayers::model::{compose, LayerSet};

const SUBCOMMANDS: [&str; 8] =
    ["gen-data", "compose", "compose-dir", "split-env", "prefilter", "upsample", "eval", "inspect"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lightlayers")).args(args).output().expect("spawn lightlayers")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Set LIGHTLAYERS_UPDATE_GOLDEN=1 to rewrite the files after an intended change.
#[test]
fn help_text_matches_golden_files() {
    let update = std::env::var_os("LIGHTLAYERS_UPDATE_GOLDEN").is_some();
    let mut cases = vec![("lightlayers".to_string(), vec!["--help"])];
    cases.extend(SUBCOMMANDS.iter().map(|c| (c.to_string(), vec![*c, "--help"])));
    for (name, args) in cases {
        let text = run_ok(&args);
        let path = golden_dir().join(format!("{name}.help.txt"));
        if update {
            fs::create_dir_all(golden_dir()).unwrap();
            fs::write(&path, &text).unwrap();
            continue;
        }
        let want = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
        assert_eq!(text, want, "help for {name} differs from {}", path.display());
    }
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["bogus"]), 1);
    assert_eq!(code(&["compose", "--layers", "x"]), 1);
    assert_eq!(code(&["--threads", "0", "inspect", "a.pfm"]), 1);
    assert_eq!(code(&["prefilter", "--env", "e.pfm", "--kind", "gloss", "--out", "o.pfm"]), 1);
    assert_eq!(code(&["inspect", "/nonexistent/file.pfm"]), 2);
    assert_eq!(code(&["compose", "--layers", "/nonexistent/rec", "--out", "/tmp/x.png"]), 2);

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.pfm");
    fs::write(&junk, b"not a pfm").unwrap();
    assert_eq!(code(&["inspect", s(&junk)]), 2);
    assert_eq!(code(&["compose", "--layers", "x", "--out", s(&dir.path().join("c.jpg"))]), 1);
}

fn small_dataset(dir: &Path, resolution: usize, seed: u64, directional: bool) -> Manifest {
    let res = resolution.to_string();
    let seed = seed.to_string();
    let mut args = vec![
        "--seed", &seed, "gen-data", "--out", s(dir), "--count", "2", "--resolution", &res, "--env-height", "32",
        "--occlusion-samples", "32",
    ];
    if directional {
        args.push("--directional");
    }
    run_ok(&args);
    Manifest::load(dir.join("manifest.jsonl")).unwrap()
}

fn max_abs_diff(a: &ImageRgb, b: &ImageRgb) -> f32 {
    assert_eq!(a.dims(), b.dims());
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f32::max)
}

#[test]
fn gen_data_then_compose_reproduces_composite() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_dataset(dir.path(), 24, 3, true);
    assert_eq!(manifest.entries.len(), 2);
    for entry in &manifest.entries {
        for f in &entry.files {
            assert!(dir.path().join(f).is_file(), "manifest lists missing {f}");
        }
        let stem = dir.path().join(&entry.stem);
        let out = dir.path().join(format!("{}.check.png", entry.stem));
        run_ok(&["compose", "--layers", s(&stem), "--out", s(&out)]);
        let stored = read_png(LayerStem::new(&stem).path(LayerFile::Composed)).unwrap();
        assert!(max_abs_diff(&read_png(&out).unwrap(), &stored) <= 1.0 / 255.0 + 1e-6);

        let flat = dir.path().join(format!("{}.flat.pfm", entry.stem));
        let dirl = dir.path().join(format!("{}.dir.pfm", entry.stem));
        run_ok(&["compose", "--layers", s(&stem), "--out", s(&flat)]);
        run_ok(&["compose-dir", "--layers", s(&stem), "--out", s(&dirl)]);
        let (a, b) = (read_pfm_rgb(&flat).unwrap(), read_pfm_rgb(&dirl).unwrap());
        let num: f64 = a.data().iter().zip(b.data()).map(|(x, y)| ((x - y) as f64).powi(2)).sum();
        let den: f64 = a.data().iter().map(|x| (*x as f64).powi(2)).sum();
        assert!((num / den).sqrt() < 0.02, "directional composite off by {}", (num / den).sqrt());
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "count = 1\nresolution = 16\nenv_height = 16\nocclusion_samples = 8\nseed = 11\n").unwrap();
    let out = dir.path().join("data");
    run_ok(&["gen-data", "--config", s(&cfg), "--out", s(&out), "--count", "2"]);
    let manifest = Manifest::load(out.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.entries.len(), 2);
    let layers = LayerSet::read(&LayerStem::new(out.join(&manifest.entries[0].stem))).unwrap();
    assert_eq!(layers.dims(), (16, 16));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "count = 1\nunknown_key = 3\n").unwrap();
    assert_eq!(code(&["gen-data", "--config", s(&bad), "--out", s(&out)]), 2);
}

#[test]
fn split_env_parts_sum_to_input() {
    let dir = tempfile::tempdir().unwrap();
    let env = EnvironmentMap::from_fn(16, |d| [1.0 + d.x(), 2.0 + d.y() * d.z(), (3.0 * d.x()).exp()]);
    let path = dir.path().join("env.pfm");
    write_pfm(&path, &PfmImage::from(env.image().clone())).unwrap();
    let stem = dir.path().join("split");
    run_ok(&["split-env", "--env", s(&path), "--out", s(&stem)]);
    let parts: Vec<ImageRgb> =
        (0..6).map(|i| read_pfm_rgb(LayerStem::new(&stem).path(LayerFile::Env(i))).unwrap()).collect();
    for (k, &v) in env.image().data().iter().enumerate() {
        let sum: f64 = parts.iter().map(|p| p.data()[k] as f64).sum();
        assert!((sum - v as f64).abs() <= 1e-6 * (v as f64).abs().max(1.0), "texel {k}: {sum} vs {v}");
    }
}

#[test]
fn prefilter_keeps_constant_maps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.pfm");
    write_pfm(&path, &PfmImage::from(EnvironmentMap::constant(32, [0.5, 1.0, 2.0]).into_image())).unwrap();
    let irr = dir.path().join("irr.pfm");
    let gloss = dir.path().join("gloss.pfm");
    run_ok(&["prefilter", "--env", s(&path), "--kind", "irr", "--out", s(&irr), "--height", "8"]);
    run_ok(&["prefilter", "--env", s(&path), "--kind", "gloss", "--n", "30", "--out", s(&gloss), "--height", "8", "--adaptive"]);
    for p in [&irr, &gloss] {
        let img = read_pfm_rgb(p).unwrap();
        assert_eq!(img.dims(), (16, 8));
        for px in img.pixels() {
            for (got, want) in px.iter().zip([0.5, 1.0, 2.0]) {
                assert!((got - want).abs() < 1e-3 * want, "{}: {got} vs {want}", p.display());
            }
        }
    }
    assert_eq!(code(&["prefilter", "--env", s(&path), "--kind", "irr", "--n", "3", "--out", s(&irr)]), 1);
}

#[test]
fn upsample_refines_to_hd_image() {
    let dir = tempfile::tempdir().unwrap();
    let (lo, hi) = (dir.path().join("lo"), dir.path().join("hi"));
    let m = small_dataset(&lo, 12, 5, false);
    small_dataset(&hi, 24, 5, false);
    let stem = &m.entries[0].stem;
    let hd = hi.join(format!("{stem}.composed.png"));
    let out = dir.path().join("up");
    run_ok(&["upsample", "--layers", s(&lo.join(stem)), "--hd", s(&hd), "--out", s(&out), "--iterations", "20"]);
    let refined = LayerSet::read(&LayerStem::new(&out)).unwrap();
    assert_eq!(refined.dims(), (24, 24));
    let target = gamma_decode(&read_png(&hd).unwrap(), STORAGE_GAMMA).unwrap();
    assert!(max_abs_diff(&compose(&refined), &target) < 1e-5);

    assert_eq!(code(&["upsample", "--layers", s(&hi.join(stem)), "--hd", s(&hd), "--out", s(&out), "--scale=-1"]), 2);
}

#[test]
fn eval_of_ground_truth_against_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_dataset(dir.path(), 16, 9, false);
    let stems: Vec<PathBuf> = m.entries.iter().map(|e| dir.path().join(&e.stem)).collect();
    let report = dir.path().join("report.txt");
    let stdout = run_ok(&[
        "eval", "--pred", s(&stems[0]), "--pred", s(&stems[1]), "--gt", s(&stems[0]), "--gt", s(&stems[1]),
        "--report", s(&report),
    ]);
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(stdout, text);
    let values = parse_report(&text);
    assert_eq!(values["records"], 2.0);
    for key in ["l2.occlusion", "l2.irradiance", "l2.albedo", "l2.specular", "albedo.dssim.mean", "albedo.nrmse.mean"] {
        assert_eq!(values[key], 0.0, "{key}");
    }
    assert_eq!(
        code(&["eval", "--pred", s(&stems[0]), "--gt", s(&stems[0]), "--gt", s(&stems[1]), "--report", s(&report)]),
        1
    );
}

#[test]
fn inspect_describes_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_dataset(dir.path(), 8, 1, false);
    let stem = LayerStem::new(dir.path().join(&m.entries[0].stem));
    let occ = stem.path(LayerFile::Occlusion);
    let png = stem.path(LayerFile::Composed);
    let out = run_ok(&["inspect", s(&occ), s(&png)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with(&format!("{}: 8x8 channels=1 encoding=linear min=", occ.display())), "{}", lines[0]);
    assert!(lines[1].starts_with(&format!("{}: 8x8 channels=3 encoding=gamma(2) min=", png.display())), "{}", lines[1]);
}
