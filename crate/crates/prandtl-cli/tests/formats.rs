use prandtl_cli::checkpoint::{decode, encode, read_checkpoint, write_checkpoint, CheckpointError, CheckpointHeader, HEADER_LEN};
use prandtl_cli::config::{default_config, RunConfig};
use prandtl_cli::output::{num, Check, Table, Verdict};
use prandtl_cli::CliError;
use prandtl_core::{Field, Grid, Wall};

fn header(nx: usize, ny: usize, wall: Wall) -> CheckpointHeader {
    CheckpointHeader {
        nx,
        ny,
        x_period: 2.0 * std::f64::consts::PI,
        y_max: 32.0,
        t: 0.37,
        dt: 0.01,
        wall,
        ell: 2.0,
        theta: 3.0,
        k: 2,
    }
}

fn awkward_field(g: &Grid) -> Field {
    let specials = [-0.0, f64::MIN_POSITIVE / 3.0, 1e308, -1.0 / 3.0, f64::EPSILON];
    Field::from_index_fn(g, |i, j| {
        if (i + j) % 7 == 0 {
            specials[(i * 3 + j) % specials.len()]
        } else {
            ((i * 31 + j * 17) as f64).sin() * 10f64.powi((j % 9) as i32 - 4)
        }
    })
}

#[test]
fn checkpoint_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    for wall in [Wall::Robin(50.0), Wall::Dirichlet] {
        let g = Grid::new(8, 33, 2.0 * std::f64::consts::PI, 32.0).unwrap();
        let u = awkward_field(&g);
        let h = header(8, 33, wall);
        let path = dir.path().join("a.ckpt");
        write_checkpoint(&path, &h, &u).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 8 * 33);
        let (h2, u2) = read_checkpoint(&path, Some(&g)).unwrap();
        assert_eq!(h2, h);
        let a: Vec<u64> = u.values().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = u2.values().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
        // no temporary left behind
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

#[test]
fn documented_layout() {
    let g = Grid::new(8, 9, 1.0, 2.0).unwrap();
    let u = Field::from_index_fn(&g, |i, j| (10 * i + j) as f64);
    let b = encode(&header(8, 9, Wall::Dirichlet), &u);
    assert_eq!(&b[..12], b"PRANDTLCKPT\0");
    assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(b[16..24].try_into().unwrap()), 8);
    assert_eq!(u64::from_le_bytes(b[24..32].try_into().unwrap()), 9);
    assert_eq!(f64::from_le_bytes(b[48..56].try_into().unwrap()), 0.37);
    assert_eq!(u64::from_le_bytes(b[64..72].try_into().unwrap()), 1);
    assert_eq!(f64::from_le_bytes(b[72..80].try_into().unwrap()), f64::INFINITY);
    // node (1, 2) sits at 104 + 8 (1 * 9 + 2)
    assert_eq!(f64::from_le_bytes(b[192..200].try_into().unwrap()), 12.0);
}

#[test]
fn wrong_magic_and_version() {
    let g = Grid::new(8, 9, 1.0, 1.0).unwrap();
    let good = encode(&header(8, 9, Wall::Robin(2.0)), &Field::zeros(&g));
    let mut bad = good.clone();
    bad[0] = b'X';
    assert_eq!(decode(&bad).unwrap_err(), CheckpointError::BadMagic);
    assert_eq!(decode(&good[..5]).unwrap_err(), CheckpointError::BadMagic);
    let mut v2 = good.clone();
    v2[12] = 2;
    let e = decode(&v2).unwrap_err();
    assert_eq!(e, CheckpointError::BadVersion { found: 2 });
    assert!(e.to_string().contains("offset 12"));
}

#[test]
fn truncation_names_the_offset() {
    let g = Grid::new(8, 9, 1.0, 1.0).unwrap();
    let good = encode(&header(8, 9, Wall::Robin(2.0)), &Field::zeros(&g));
    let e = decode(&good[..50]).unwrap_err();
    assert_eq!(
        e,
        CheckpointError::Truncated {
            offset: 48,
            needed: 8,
            available: 2
        }
    );
    assert!(e.to_string().contains("offset 48"));
    let e = decode(&good[..good.len() - 1]).unwrap_err();
    assert!(matches!(e, CheckpointError::Truncated { offset: 104, needed: 576, available: 575 }), "{e}");
    let mut long = good.clone();
    long.push(0);
    assert_eq!(decode(&long).unwrap_err(), CheckpointError::Trailing { offset: 680, trailing: 1 });
}

#[test]
fn corrupt_header_words() {
    let g = Grid::new(8, 9, 1.0, 1.0).unwrap();
    let good = encode(&header(8, 9, Wall::Robin(2.0)), &Field::zeros(&g));
    let mut flag = good.clone();
    flag[64] = 7;
    assert_eq!(decode(&flag).unwrap_err(), CheckpointError::BadHeader { name: "wall flag", offset: 64 });
    let mut beta = good.clone();
    beta[72..80].copy_from_slice(&(-1.0f64).to_le_bytes());
    assert_eq!(decode(&beta).unwrap_err(), CheckpointError::BadHeader { name: "beta", offset: 72 });
    let mut nx = good;
    nx[16..24].copy_from_slice(&0u64.to_le_bytes());
    assert_eq!(decode(&nx).unwrap_err(), CheckpointError::BadHeader { name: "nx", offset: 16 });
}

#[test]
fn cross_config_read_names_both_values() {
    let dir = tempfile::tempdir().unwrap();
    let small = Grid::new(8, 129, 2.0 * std::f64::consts::PI, 32.0).unwrap();
    let big = Grid::new(8, 257, 2.0 * std::f64::consts::PI, 32.0).unwrap();
    let path = dir.path().join("s.ckpt");
    write_checkpoint(&path, &header(8, 129, Wall::Robin(50.0)), &Field::zeros(&small)).unwrap();
    let e = read_checkpoint(&path, Some(&big)).unwrap_err();
    let msg = e.to_string();
    assert!(matches!(e, CliError::Checkpoint(CheckpointError::GridMismatch { name: "ny", .. })));
    assert!(msg.contains("129") && msg.contains("257"), "{msg}");
}

#[test]
fn shipped_config_matches_the_default_setup() {
    let cfg = default_config().load().unwrap();
    let mut want = prandtl_core::experiments::RunSetup::default_small_data();
    want.perturbation = None;
    assert_eq!(cfg.setup, want);
    assert_eq!(cfg.hash.len(), 64);
}

#[test]
fn config_survives_serialization() {
    let c = default_config();
    let back = RunConfig::from_toml(&c.to_toml()).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.hash(), c.hash());
    let mut d = c.clone();
    d.time.dt = 0.005;
    assert_ne!(d.hash(), c.hash());
}

#[test]
fn config_rejections() {
    let text = prandtl_cli::config::DEFAULT_TOML;
    let unknown = text.replace("[grid]", "[grid]\nspacing = 3");
    assert!(matches!(RunConfig::from_toml(&unknown), Err(CliError::Config(_))));
    let dirichlet_beta = text.replace("kind = \"robin\"", "kind = \"dirichlet\"");
    assert!(RunConfig::from_toml(&dirichlet_beta).unwrap().load().is_err());
    let dirichlet = dirichlet_beta.replace("beta = 50.0", "");
    assert!(RunConfig::from_toml(&dirichlet).unwrap().load().is_ok());
    // theta must exceed (ell + 1) / 2
    let theta = text.replace("theta = 3.0", "theta = 1.4");
    assert!(matches!(RunConfig::from_toml(&theta).unwrap().load(), Err(CliError::Config(_))));
    let negative = text.replace("beta = 50.0", "beta = -1.0");
    assert!(RunConfig::from_toml(&negative).unwrap().load().is_err());
    let norm = text.replace("norm_order = 1", "norm_order = 3");
    assert!(RunConfig::from_toml(&norm).unwrap().load().is_err());
}

#[test]
fn seed_controls_phases_only() {
    let mut c = default_config();
    let p0 = c.phase(0);
    assert_eq!(p0, c.phase(0));
    assert!((0.0..2.0 * std::f64::consts::PI).contains(&p0));
    assert_ne!(c.phase(0), c.phase(1));
    c.seed += 1;
    assert_ne!(c.phase(0), p0);
    let s = c.stability_perturbation(1e-3);
    assert_eq!((s.amplitude, s.mode), (1e-3, 1));
}

#[test]
fn tables_have_a_schema_row_and_round_trip_numbers() {
    let mut t = Table::new(["a", "b"]);
    let vals = [0.1 + 0.2, -1e-300, 6.02e23];
    for v in vals {
        t.push(vec![num(v), num(2.0 * v)]);
    }
    let text = String::from_utf8(t.to_bytes()).unwrap();
    assert!(text.starts_with("a,b\n"));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    t.write(&p).unwrap();
    let back = Table::read(&p).unwrap();
    assert_eq!(back, t);
    let col: Vec<f64> = back.column("a").unwrap().iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(col, vals);
}

#[test]
fn verdict_pass_ignores_reported_checks() {
    let v = Verdict::new("x", "h", vec![Check::new("a", true, ""), Check::new("b", false, "").reported()], vec![]);
    assert!(v.pass);
    let w = Verdict::new("x", "h", vec![Check::new("a", false, ""), Check::new("b", true, "")], vec![]);
    assert!(!w.pass);
    assert_eq!(w.failing(), vec!["a"]);
    let json: serde_json::Value = serde_json::from_slice(&w.to_json()).unwrap();
    assert_eq!(json["config_hash"], "h");
}
