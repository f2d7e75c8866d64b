use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use degnn_ffi::*;

fn last_error() -> String {
    let p = degnn_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn graph(edges: &[(u64, u64)], n: u64) -> *mut DegnnGraph {
    let src: Vec<u64> = edges.iter().map(|e| e.0).collect();
    let dst: Vec<u64> = edges.iter().map(|e| e.1).collect();
    let mut g = ptr::null_mut();
    let s = unsafe { degnn_graph_from_edges(src.as_ptr(), dst.as_ptr(), edges.len(), n, &mut g) };
    assert_eq!(s, DegnnStatus::Ok);
    g
}

#[test]
fn graph_queries_and_buffer_protocol() {
    let g = graph(&[(0, 1), (1, 0), (1, 2), (2, 2), (3, 1)], 5);
    unsafe {
        let mut x = 0;
        assert_eq!(degnn_graph_num_nodes(g, &mut x), DegnnStatus::Ok);
        assert_eq!(x, 5);
        assert_eq!(degnn_graph_num_edges(g, &mut x), DegnnStatus::Ok);
        assert_eq!(x, 3);
        assert_eq!(degnn_graph_degree(g, 1, &mut x), DegnnStatus::Ok);
        assert_eq!(x, 3);

        let mut len = 0;
        assert_eq!(degnn_graph_neighbors(g, 1, ptr::null_mut(), 0, &mut len), DegnnStatus::BufferTooSmall);
        assert_eq!(len, 3);
        let mut buf = vec![0u64; len];
        assert_eq!(degnn_graph_neighbors(g, 1, buf.as_mut_ptr(), buf.len(), &mut len), DegnnStatus::Ok);
        assert_eq!(buf, [0, 2, 3]);
        assert_eq!(degnn_graph_neighbors(g, 4, ptr::null_mut(), 0, &mut len), DegnnStatus::Ok);
        assert_eq!(len, 0);

        assert_eq!(degnn_graph_degree(g, 5, &mut x), DegnnStatus::OutOfRange);
        assert!(last_error().contains('5'));
        degnn_graph_free(g);
    }
}

#[test]
fn bad_arguments_map_to_status_codes() {
    unsafe {
        let mut g = ptr::null_mut();
        let (src, dst) = ([0u64], [7u64]);
        assert_eq!(degnn_graph_from_edges(src.as_ptr(), dst.as_ptr(), 1, 3, &mut g), DegnnStatus::OutOfRange);
        assert!(g.is_null());
        assert_eq!(degnn_graph_from_edges(ptr::null(), dst.as_ptr(), 1, 3, &mut g), DegnnStatus::NullPointer);
        assert!(last_error().contains("src"));
        let mut n = 0;
        assert_eq!(degnn_graph_num_nodes(ptr::null(), &mut n), DegnnStatus::NullPointer);

        let g = graph(&[], 3);
        let mut h = 0.0;
        let labels = [0u64, 1, 0];
        assert_eq!(degnn_homophily(g, labels.as_ptr(), 3, 2, &mut h), DegnnStatus::InvalidArgument);
        assert_eq!(degnn_homophily(g, labels.as_ptr(), 2, 2, &mut h), DegnnStatus::InvalidArgument);
        assert_eq!(degnn_homophily(g, labels.as_ptr(), 3, 1, &mut h), DegnnStatus::OutOfRange);
        degnn_graph_free(g);
        degnn_graph_free(ptr::null_mut());
    }
}

#[test]
fn encodings_match_the_library() {
    let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (2, 4)];
    let g = graph(&edges, 6);
    let core = degnn::graph::Graph::from_edges(&edges.map(|(a, b)| (a as usize, b as usize)), 6).unwrap();
    unsafe {
        let mut cols = 0;
        let mut buf = vec![0.0; 6 * 4];
        assert_eq!(degnn_rw_encoding(g, 2, 4, buf.as_mut_ptr(), buf.len(), &mut cols), DegnnStatus::Ok);
        assert_eq!(cols, 4);
        let want = degnn::features::rw_landing_probabilities(&core, 2, 4).unwrap();
        assert_eq!(buf, want.iter().copied().collect::<Vec<_>>());

        let mut buf = vec![0.0; 6 * 5];
        assert_eq!(degnn_spd_encoding(g, 2, 3, buf.as_mut_ptr(), buf.len(), &mut cols), DegnnStatus::Ok);
        assert_eq!(cols, 5);
        let want = degnn::features::spd_onehot(&core, 2, 3).unwrap();
        assert_eq!(buf, want.iter().copied().collect::<Vec<_>>());
        // node 5 is isolated and lands in the last bucket
        assert_eq!(&buf[25..30], &[0.0, 0.0, 0.0, 0.0, 1.0]);

        assert_eq!(degnn_spd_encoding(g, 2, 3, buf.as_mut_ptr(), 29, &mut cols), DegnnStatus::BufferTooSmall);
        degnn_graph_free(g);
    }
}

#[test]
fn ego_subgraph_handles() {
    let g = graph(&[(0, 1), (1, 2), (2, 3), (3, 4)], 5);
    unsafe {
        let mut sub = ptr::null_mut();
        assert_eq!(degnn_ego_subgraph(g, 2, 1, &mut sub), DegnnStatus::Ok);
        let mut n = 0;
        assert_eq!(degnn_subgraph_num_nodes(sub, &mut n), DegnnStatus::Ok);
        assert_eq!(n, 3);
        let (mut map, mut dist, mut len) = (vec![0u64; 3], vec![0u64; 3], 0);
        assert_eq!(degnn_subgraph_node_map(sub, map.as_mut_ptr(), 3, &mut len), DegnnStatus::Ok);
        assert_eq!(degnn_subgraph_distances(sub, dist.as_mut_ptr(), 3, &mut len), DegnnStatus::Ok);
        assert_eq!(map[0], 2);
        assert_eq!(dist, [0, 1, 1]);

        let mut inner = ptr::null_mut();
        assert_eq!(degnn_subgraph_graph(sub, &mut inner), DegnnStatus::Ok);
        degnn_subgraph_free(sub);
        let mut m = 0;
        assert_eq!(degnn_graph_num_edges(inner, &mut m), DegnnStatus::Ok);
        assert_eq!(m, 2);
        degnn_graph_free(inner);
        degnn_graph_free(g);
    }
}

fn write_dataset(dir: &Path) {
    std::fs::write(
        dir.join("out1_node_feature_label.txt"),
        "node_id\tfeature\tlabel\n0\t1,0\t0\n1\t0,1\t1\n2\t1,1\t0\n3\t0,0\t0\n",
    )
    .unwrap();
    std::fs::write(dir.join("out1_graph_edges.txt"), "node_id\tnode_id\n0\t1\n1\t2\n2\t3\n").unwrap();
}

#[test]
fn dataset_load_stats_and_labels() {
    let tmp = tempfile::tempdir().unwrap();
    write_dataset(tmp.path());
    let dir = CString::new(tmp.path().to_str().unwrap()).unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(degnn_dataset_load(dir.as_ptr(), &mut ds), DegnnStatus::Ok, "{}", last_error());
        let mut st = DegnnStats {
            num_nodes: 0,
            num_edges: 0,
            num_features: 0,
            num_classes: 0,
            homophily: -1.0,
        };
        assert_eq!(degnn_dataset_stats(ds, &mut st), DegnnStatus::Ok);
        assert_eq!((st.num_nodes, st.num_edges, st.num_features, st.num_classes), (4, 3, 2, 2));
        assert!((st.homophily - 1.0 / 3.0).abs() < 1e-15);

        let (mut labels, mut len) = (vec![9u64; 4], 0);
        assert_eq!(degnn_dataset_labels(ds, labels.as_mut_ptr(), 4, &mut len), DegnnStatus::Ok);
        assert_eq!(labels, [0, 1, 0, 0]);
        let mut g = ptr::null_mut();
        assert_eq!(degnn_dataset_graph(ds, &mut g), DegnnStatus::Ok);
        degnn_dataset_free(ds);
        let mut n = 0;
        assert_eq!(degnn_graph_num_nodes(g, &mut n), DegnnStatus::Ok);
        assert_eq!(n, 4);
        degnn_graph_free(g);

        let missing = CString::new(tmp.path().join("nope").to_str().unwrap()).unwrap();
        assert_eq!(degnn_dataset_load(missing.as_ptr(), &mut ds), DegnnStatus::Io);
        assert!(last_error().contains("nope"));
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libdegnn_ffi.a");
    assert!(lib.is_file(), "{} missing", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(
        String::from_utf8_lossy(&run.stdout).trim(),
        "edges=4 spd02=1.0 rw20=0.50 h=0.00 oob=1"
    );
}
