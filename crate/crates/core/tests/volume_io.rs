use std::fs;

use proptest::prelude::*;
use salsi_core::volume::{load_volume_stem, save_volume_stem, volume_paths, VolumeHeader};
use salsi_core::{export_slice, load_volume, save_volume, Axis, Dims, Error, Volume3D};
use salsi_oracles::read_pgm;

fn write_header(path: &std::path::Path, dims: [usize; 3]) {
    let h = format!(
        r#"{{"dims":[{},{},{}],"dtype":"f32le","axes":["time","crossline","inline"],"provenance":"test"}}"#,
        dims[0], dims[1], dims[2]
    );
    fs::write(path, h).unwrap();
}

#[test]
fn zero_payload_loads() {
    let dir = tempfile::tempdir().unwrap();
    let (h, p) = (dir.path().join("z.json"), dir.path().join("z.raw"));
    write_header(&h, [2, 2, 2]);
    fs::write(&p, [0u8; 32]).unwrap();
    let v = load_volume(&h, &p).unwrap();
    assert_eq!(v.dims(), Dims::new(2, 2, 2));
    assert_eq!(v.data(), &[0.0; 8]);
    assert_eq!(v.provenance(), Some("test"));
}

#[test]
fn short_payload_is_size_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let (h, p) = (dir.path().join("z.json"), dir.path().join("z.raw"));
    write_header(&h, [2, 2, 2]);
    fs::write(&p, [0u8; 28]).unwrap();
    match load_volume(&h, &p) {
        Err(Error::SizeMismatch { expected, actual, .. }) => assert_eq!((expected, actual), (32, 28)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn nan_payload_reports_index() {
    let dir = tempfile::tempdir().unwrap();
    let (h, p) = (dir.path().join("z.json"), dir.path().join("z.raw"));
    write_header(&h, [1, 1, 3]);
    let mut bytes = Vec::new();
    for v in [1.0f32, f32::INFINITY, 0.0] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&p, bytes).unwrap();
    assert!(matches!(load_volume(&h, &p), Err(Error::NonFinite { index: 1, .. })));
}

#[test]
fn malformed_headers() {
    let dir = tempfile::tempdir().unwrap();
    let (h, p) = (dir.path().join("z.json"), dir.path().join("z.raw"));
    fs::write(&p, [0u8; 4]).unwrap();
    for text in [
        "not json",
        r#"{"dims":[1,1],"dtype":"f32le","axes":["a","b","c"]}"#,
        r#"{"dims":[1,1,1],"dtype":"f64le","axes":["a","b","c"]}"#,
        r#"{"dims":[0,1,1],"dtype":"f32le","axes":["a","b","c"]}"#,
    ] {
        fs::write(&h, text).unwrap();
        assert!(matches!(load_volume(&h, &p), Err(Error::MalformedHeader { .. })), "{text}");
    }
    assert!(matches!(
        load_volume(dir.path().join("missing.json"), &p),
        Err(Error::Io { .. })
    ));
}

#[test]
fn header_layout() {
    let dir = tempfile::tempdir().unwrap();
    let v = Volume3D::new(Dims::new(1, 1, 1), vec![3.5]).unwrap().with_provenance("x");
    save_volume_stem(&v, dir.path().join("one")).unwrap();
    let (h, p) = volume_paths(dir.path().join("one"));
    assert_eq!(fs::read(&p).unwrap(), vec![0x00, 0x00, 0x60, 0x40]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&h).unwrap()).unwrap();
    assert_eq!(json["dims"], serde_json::json!([1, 1, 1]));
    assert_eq!(json["dtype"], "f32le");
    assert_eq!(json["axes"], serde_json::json!(["time", "crossline", "inline"]));
    assert_eq!(VolumeHeader::read(&h).unwrap().payload_bytes(), 4);
}

#[test]
fn payload_is_c_order() {
    let dir = tempfile::tempdir().unwrap();
    let v = Volume3D::from_fn(Dims::new(2, 3, 4), |m, n, k| (100 * m + 10 * n + k) as f64).unwrap();
    save_volume_stem(&v, dir.path().join("c")).unwrap();
    let bytes = fs::read(dir.path().join("c.raw")).unwrap();
    let vals: Vec<f32> = bytes.chunks(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(vals[0..5], [0.0, 1.0, 2.0, 3.0, 10.0]);
    assert_eq!(vals[12], 100.0);
}

#[test]
fn exported_slice_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let v = Volume3D::from_fn(Dims::new(5, 7, 3), |m, n, k| (m * 7 + n) as f64 + k as f64 * 0.5).unwrap();
    for (axis, (w, h)) in [(Axis::Inline, (7, 5)), (Axis::Crossline, (3, 5)), (Axis::Time, (3, 7))] {
        let out = dir.path().join(format!("{axis}.pgm"));
        export_slice(&v, axis, 2, &out).unwrap();
        let (pw, ph, maxval, px) = read_pgm(&fs::read(&out).unwrap()).unwrap();
        assert_eq!((pw, ph, maxval), (w, h, 255));
        assert_eq!(*px.iter().min().unwrap(), 0);
        assert_eq!(*px.iter().max().unwrap(), 255);
    }
    // inline section: value at row m, column n
    let out = dir.path().join("inline.pgm");
    let (_, _, _, px) = read_pgm(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(px[0], 0);
    assert_eq!(px[5 * 7 - 1], 255);
    assert!(export_slice(&v, Axis::Inline, 3, dir.path().join("bad.pgm")).is_err());
}

#[test]
fn constant_slice_exports_mid_gray() {
    let dir = tempfile::tempdir().unwrap();
    let v = Volume3D::new(Dims::new(4, 4, 4), vec![2.0; 64]).unwrap();
    let out = dir.path().join("c.pgm");
    export_slice(&v, Axis::Time, 0, &out).unwrap();
    let (_, _, _, px) = read_pgm(&fs::read(&out).unwrap()).unwrap();
    assert!(px.iter().all(|&p| p == 128));
}

fn volume_strategy() -> impl Strategy<Value = Volume3D> {
    (1usize..6, 1usize..6, 1usize..6).prop_flat_map(|(m, n, k)| {
        proptest::collection::vec(proptest::num::f32::NORMAL | proptest::num::f32::ZERO | proptest::num::f32::SUBNORMAL, m * n * k)
            .prop_map(move |data| {
                Volume3D::new(Dims::new(m, n, k), data.into_iter().map(f64::from).collect()).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn save_load_round_trip(v in volume_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let (h, p) = (dir.path().join("v.json"), dir.path().join("v.raw"));
        save_volume(&v, &h, &p).unwrap();
        let back = load_volume(&h, &p).unwrap();
        prop_assert_eq!(back.dims(), v.dims());
        let a: Vec<u64> = back.data().iter().map(|x| x.to_bits()).collect();
        let b: Vec<u64> = v.data().iter().map(|x| x.to_bits()).collect();
        prop_assert_eq!(a, b);
        let again = load_volume_stem(dir.path().join("v")).unwrap();
        prop_assert_eq!(again, back);
    }

    #[test]
    fn export_matches_section_shape(v in volume_strategy(), axis_i in 0usize..3, idx in 0usize..6) {
        let axis = Axis::ALL[axis_i];
        prop_assume!(idx < v.dims().extent(axis));
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("s.pgm");
        export_slice(&v, axis, idx, &out).unwrap();
        let s = v.section(axis, idx).unwrap();
        let (w, h, _, px) = read_pgm(&fs::read(&out).unwrap()).unwrap();
        prop_assert_eq!((w, h), (s.width, s.height));
        prop_assert_eq!(px.len(), w * h);
    }
}
