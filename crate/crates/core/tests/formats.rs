use aan_core::data::metrics::append_metrics;
use aan_core::data::{
    encode_image_grid, parse_mnist_idx, read_metrics, Checkpoint, DatasetKind, MetricsWriter, Record, RngPosition,
    METRICS_COLUMNS,
};
use aan_core::{Error, StepMetrics, Tensor};
use proptest::prelude::*;

fn idx_images(n: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
    let mut b = Vec::new();
    for v in [0x0803u32, n, rows, cols] {
        b.extend_from_slice(&v.to_be_bytes());
    }
    b.extend_from_slice(pixels);
    b
}

fn idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut b = Vec::new();
    for v in [0x0801u32, labels.len() as u32] {
        b.extend_from_slice(&v.to_be_bytes());
    }
    b.extend_from_slice(labels);
    b
}

#[test]
fn idx_fixture_parses_and_scales() {
    let pixels = [0, 255, 51, 204, 0, 0, 255, 255, 255, 255, 255, 0];
    let ds = parse_mnist_idx(&idx_images(2, 2, 3, &pixels), &idx_labels(&[7, 3])).unwrap();
    assert_eq!(ds.samples.shape(), &[2, 1, 2, 3]);
    assert_eq!(ds.labels.as_deref(), Some(&[7u8, 3][..]));
    assert_eq!(ds.kind, DatasetKind::Mnist);
    let want: Vec<f64> = pixels.iter().map(|&p| p as f64 / 127.5 - 1.0).collect();
    for (a, b) in ds.samples.data().iter().zip(&want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(ds.samples.data()[0], -1.0);
    assert_eq!(ds.samples.data()[1], 1.0);
}

#[test]
fn idx_rejects_bad_files() {
    let good = idx_images(1, 2, 2, &[0; 4]);
    let labels = idx_labels(&[1]);
    let mut bad_magic = good.clone();
    bad_magic[3] = 0x01;
    assert!(matches!(parse_mnist_idx(&bad_magic, &labels), Err(Error::Format { .. })));
    assert!(matches!(parse_mnist_idx(&good[..good.len() - 1], &labels), Err(Error::Format { .. })));
    assert!(parse_mnist_idx(&good, &idx_labels(&[1, 2])).is_err());
    assert!(parse_mnist_idx(&good, &good).is_err());
}

/// Minimal independent P5 reader: header tokens, then raw bytes.
fn read_pgm(bytes: &[u8]) -> (usize, usize, Vec<u8>) {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap().to_string());
    }
    pos += 1;
    assert_eq!(fields[0], "P5");
    assert_eq!(fields[3], "255");
    let (w, h) = (fields[1].parse().unwrap(), fields[2].parse().unwrap());
    (w, h, bytes[pos..].to_vec())
}

#[test]
fn pgm_grid_reads_back() {
    // Three 2×2 tiles in a 2×2 grid: all black, all white, all mid-gray.
    let mut data = vec![-1.0; 4];
    data.extend([1.0; 4]);
    data.extend([0.0; 4]);
    let t = Tensor::new(vec![3, 1, 2, 2], data).unwrap();
    let (w, h, px) = read_pgm(&encode_image_grid(&t, 2, 2).unwrap());
    let sep = 2;
    assert_eq!((w, h), (2 * 2 + sep, 2 * 2 + sep));
    assert_eq!(px.len(), w * h);
    let at = |x: usize, y: usize| px[y * w + x];
    assert_eq!(at(0, 0), 0);
    assert_eq!(at(1, 1), 0);
    assert_eq!(at(4, 0), 255);
    assert_eq!(at(5, 1), 255);
    // 0.0 maps to 127.5, rounded half away from zero.
    assert_eq!(at(0, 4), 128);
    // Separators and the empty fourth cell stay background gray.
    assert_eq!(at(2, 0), 128);
    assert_eq!(at(5, 5), 128);
    assert!(encode_image_grid(&t, 1, 2).is_err());
}

fn metric_strategy() -> impl Strategy<Value = StepMetrics> {
    let f = prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 8.0),
        Just(f64::MAX),
        Just(-std::f64::consts::LN_2),
    ];
    (any::<u64>(), proptest::collection::vec(f, 8)).prop_map(|(step, v)| StepMetrics {
        step,
        log_d_real: v[0],
        log_1m_d_fake: v[1],
        log_d_fake: v[2],
        ratio: v[3],
        d_loss: v[4],
        g_loss: v[5],
        rbm_recon_error: v[6],
        sample_diversity: v[7],
    })
}

fn bits(m: &StepMetrics) -> [u64; 9] {
    [
        m.step,
        m.log_d_real.to_bits(),
        m.log_1m_d_fake.to_bits(),
        m.log_d_fake.to_bits(),
        m.ratio.to_bits(),
        m.d_loss.to_bits(),
        m.g_loss.to_bits(),
        m.rbm_recon_error.to_bits(),
        m.sample_diversity.to_bits(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_round_trip_bit_exact(rows in proptest::collection::vec(metric_strategy(), 1..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        {
            let mut w = MetricsWriter::open(&path).unwrap();
            for r in &rows {
                w.append(r).unwrap();
            }
        }
        let back = read_metrics(&path).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(bits(a), bits(b));
        }
    }

    #[test]
    fn checkpoint_round_trip(
        step in any::<u64>(),
        records in proptest::collection::vec(
            ("[a-z][a-z0-9._]{0,12}", proptest::collection::vec(any::<u64>(), 0..40)),
            0..6,
        ),
        config in "[ -~\n]{0,80}",
        seed in any::<[u8; 32]>(),
        stream in any::<u64>(),
        word_pos in any::<u128>(),
    ) {
        let records: Vec<Record> = records
            .into_iter()
            .map(|(name, raw)| {
                let n = raw.len();
                Record::new(name, vec![n], raw.into_iter().map(f64::from_bits).collect())
            })
            .collect();
        let ckpt = Checkpoint {
            step,
            records,
            config,
            rngs: vec![RngPosition { name: "data".into(), seed, stream, word_pos }],
        };
        let bytes = ckpt.encode().unwrap();
        let back = Checkpoint::decode(&bytes).unwrap();
        prop_assert_eq!(back.encode().unwrap(), bytes);
        prop_assert_eq!(back.step, step);
        prop_assert_eq!(&back.rngs, &ckpt.rngs);
        for (a, b) in back.records.iter().zip(&ckpt.records) {
            prop_assert_eq!(&a.name, &b.name);
            let (x, y): (Vec<u64>, Vec<u64>) =
                (a.data.iter().map(|v| v.to_bits()).collect(), b.data.iter().map(|v| v.to_bits()).collect());
            prop_assert_eq!(x, y);
        }
    }
}

fn sample_metric(step: u64) -> StepMetrics {
    StepMetrics {
        step,
        log_d_real: -0.5,
        log_1m_d_fake: -0.7,
        log_d_fake: -0.6,
        ratio: 0.5 / 0.6,
        d_loss: 1.2,
        g_loss: 0.6,
        rbm_recon_error: 0.1,
        sample_diversity: 0.2,
    }
}

#[test]
fn second_metrics_writer_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let mut first = MetricsWriter::open(&path).unwrap();
    first.append(&sample_metric(1)).unwrap();
    assert!(matches!(MetricsWriter::open(&path), Err(Error::Config(_))));
    assert!(append_metrics(&sample_metric(2), &path).is_err());
    drop(first);
    append_metrics(&sample_metric(2), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), METRICS_COLUMNS.join(","));
    assert_eq!(read_metrics(&path).unwrap().iter().map(|m| m.step).collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn metrics_with_foreign_header_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
    assert!(matches!(MetricsWriter::open(&path), Err(Error::Format { .. })));
    // The failed open must not leave its lock behind.
    std::fs::write(&path, "").unwrap();
    MetricsWriter::open(&path).unwrap();
}

#[test]
fn corrupted_checkpoint_names_record() {
    let ckpt = Checkpoint {
        step: 9,
        records: vec![Record::new("alpha", vec![3], vec![1.0, 2.0, 3.0]), Record::scalar("beta", 4.0)],
        config: "seed = 1\n".into(),
        rngs: Vec::new(),
    };
    let mut bytes = ckpt.encode().unwrap();
    let at = bytes.windows(8).position(|w| w == 4.0f64.to_le_bytes()).unwrap();
    bytes[at + 3] ^= 0x10;
    match Checkpoint::decode(&bytes) {
        Err(Error::Checksum { record }) => assert_eq!(record, "beta"),
        other => panic!("expected checksum error, got {other:?}"),
    }
}
