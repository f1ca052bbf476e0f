use proptest::prelude::*;
use rcg_core::data::{read_csv, CsvOptions, Dataset, FeatureMask, InstanceMask};

fn table() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<String>, Vec<String>)> {
    (2usize..20, 1usize..4).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(prop::collection::vec(-1e6f64..1e6, p), n),
            prop::collection::vec(prop::sample::select(vec!["red", "green", "blue"]).prop_map(String::from), n),
            prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]).prop_map(String::from), n),
        )
    })
}

fn to_csv(rows: &[Vec<f64>], colors: &[String], classes: &[String]) -> String {
    let p = rows[0].len();
    let mut s: String = (0..p).map(|j| format!("x{j},")).collect();
    s.push_str("color,class\n");
    for ((r, c), y) in rows.iter().zip(colors).zip(classes) {
        for v in r {
            s.push_str(&format!("{v},"));
        }
        s.push_str(&format!("{c},{y}\n"));
    }
    s
}

proptest! {
    #[test]
    fn write_then_read_is_identity((rows, colors, classes) in table()) {
        prop_assume!(classes.iter().any(|c| c != &classes[0]));
        let ds = read_csv(to_csv(&rows, &colors, &classes).as_bytes(), "class", &CsvOptions::default()).unwrap();
        let mut out = Vec::new();
        ds.write_csv(&mut out, &InstanceMask::full(ds.n_rows()), &FeatureMask::full(ds.n_features())).unwrap();
        let back: Dataset = read_csv(out.as_slice(), "class", &CsvOptions::default()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn masked_write_keeps_selected_cells((rows, colors, classes) in table(), seed in any::<u64>()) {
        prop_assume!(classes.iter().any(|c| c != &classes[0]));
        let ds = read_csv(to_csv(&rows, &colors, &classes).as_bytes(), "class", &CsvOptions::default()).unwrap();
        let keep_rows = InstanceMask::from_bools((0..ds.n_rows()).map(|i| (seed >> (i % 64)) & 1 == 1 || i == 0).collect());
        let keep_cols = FeatureMask::from_indices(ds.n_features(), [ds.n_features() - 1]);
        let mut out = Vec::new();
        ds.write_csv(&mut out, &keep_rows, &keep_cols).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        prop_assert_eq!(lines[0], "color,class");
        prop_assert_eq!(lines.len() - 1, keep_rows.alive_count());
        for (line, i) in lines[1..].iter().zip(keep_rows.indices()) {
            prop_assert_eq!(*line, format!("{},{}", colors[i], classes[i]));
        }
    }
}
