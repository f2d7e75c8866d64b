//! C ABI over graphs, distance encodings, ego-subgraphs and datasets.
//!
//! Every function returns a [`DegnnStatus`]. On failure the message is kept
//! per thread and can be read with [`degnn_last_error_message`]. Handles are
//! opaque and must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use degnn::data::{dataset_report, load_dataset_dir, Dataset, FeatureEncoding};
use degnn::features::{rw_landing_probabilities, spd_onehot};
use degnn::graph::{extract_ego_subgraph, homophily_ratio, Graph, LabelVector, Subgraph};
use degnn::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegnnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    BufferTooSmall = 4,
    Io = 5,
    Parse = 6,
    Internal = 7,
}

/// Undirected simple graph in CSR form.
pub struct DegnnGraph(Graph);

/// Ego-subgraph around one target, nodes in BFS order.
pub struct DegnnSubgraph(Subgraph);

/// Graph, features and labels loaded from disk.
pub struct DegnnDataset(Dataset);

/// Summary statistics of a loaded dataset.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DegnnStats {
    pub num_nodes: u64,
    pub num_edges: u64,
    pub num_features: u64,
    pub num_classes: u64,
    pub homophily: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DegnnStatus {
    match e {
        Error::EdgeOutOfRange { .. } | Error::NodeOutOfRange { .. } | Error::LabelOutOfRange { .. } => {
            DegnnStatus::OutOfRange
        }
        Error::Io { .. } => DegnnStatus::Io,
        Error::Parse { .. } | Error::Csv(_) | Error::Checkpoint(_) => DegnnStatus::Parse,
        Error::NonFiniteLoss { .. } | Error::AllTrialsDiverged(_) => DegnnStatus::Internal,
        _ => DegnnStatus::InvalidArgument,
    }
}

struct Fail(DegnnStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DegnnStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DegnnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DegnnStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside degnn".into());
            DegnnStatus::Internal
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn to_usize(x: u64) -> Result<usize, Fail> {
    usize::try_from(x).map_err(|_| Fail(DegnnStatus::OutOfRange, format!("{x} does not fit in usize")))
}

fn check_node(g: &Graph, v: u64) -> Result<usize, Fail> {
    let v = to_usize(v)?;
    if v >= g.num_nodes() {
        return Err(Error::NodeOutOfRange {
            node: v,
            num_nodes: g.num_nodes(),
        }
        .into());
    }
    Ok(v)
}

/// Copies `src` into a caller buffer of `cap` elements. `out_len` always
/// receives the required length, so a first call with `cap == 0` sizes it.
unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, cap: usize, out_len: *mut usize) -> Result<(), Fail> {
    *out(out_len, "out_len")? = src.len();
    if src.len() > cap {
        return Err(Fail(
            DegnnStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

fn to_u64(v: &[usize]) -> Vec<u64> {
    v.iter().map(|&x| x as u64).collect()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn degnn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn degnn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph from `num_edges` pairs `(src[i], dst[i])`. Direction,
/// duplicates and self-loops are dropped.
///
/// # Safety
/// `src` and `dst` must point to `num_edges` values; `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_graph_from_edges(
    src: *const u64,
    dst: *const u64,
    num_edges: usize,
    num_nodes: u64,
    out_graph: *mut *mut DegnnGraph,
) -> DegnnStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        let s = slice(src, num_edges, "src")?;
        let d = slice(dst, num_edges, "dst")?;
        let edges = s
            .iter()
            .zip(d)
            .map(|(&a, &b)| Ok((to_usize(a)?, to_usize(b)?)))
            .collect::<Result<Vec<_>, Fail>>()?;
        let g = Graph::from_edges(&edges, to_usize(num_nodes)?)?;
        *slot = Box::into_raw(Box::new(DegnnGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn degnn_graph_free(graph: *mut DegnnGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn degnn_graph_num_nodes(graph: *const DegnnGraph, out_n: *mut u64) -> DegnnStatus {
    guard(|| {
        *out(out_n, "out_n")? = get(graph, "graph")?.0.num_nodes() as u64;
        Ok(())
    })
}

/// Number of undirected edges.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn degnn_graph_num_edges(graph: *const DegnnGraph, out_m: *mut u64) -> DegnnStatus {
    guard(|| {
        *out(out_m, "out_m")? = get(graph, "graph")?.0.num_edges() as u64;
        Ok(())
    })
}

/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn degnn_graph_degree(graph: *const DegnnGraph, node: u64, out_deg: *mut u64) -> DegnnStatus {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        let v = check_node(g, node)?;
        *out(out_deg, "out_deg")? = g.degree(v) as u64;
        Ok(())
    })
}

/// Sorted neighbours of `node`.
///
/// # Safety
/// `buf` must hold `cap` values; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_graph_neighbors(
    graph: *const DegnnGraph,
    node: u64,
    buf: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> DegnnStatus {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        let v = check_node(g, node)?;
        copy_out(&to_u64(g.neighbors(v)), buf, cap, out_len)
    })
}

/// Fraction of edges whose endpoints share a label. `labels` has one entry
/// per node, each below `num_classes`.
///
/// # Safety
/// `labels` must point to `num_labels` values.
#[no_mangle]
pub unsafe extern "C" fn degnn_homophily(
    graph: *const DegnnGraph,
    labels: *const u64,
    num_labels: usize,
    num_classes: u64,
    out_h: *mut f64,
) -> DegnnStatus {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        let ls = slice(labels, num_labels, "labels")?
            .iter()
            .map(|&y| to_usize(y))
            .collect::<Result<Vec<_>, Fail>>()?;
        if ls.len() != g.num_nodes() {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: g.num_nodes(),
                actual: ls.len(),
            }
            .into());
        }
        let lv = LabelVector::new(ls, to_usize(num_classes)?)?;
        *out(out_h, "out_h")? = homophily_ratio(g, &lv)?;
        Ok(())
    })
}

unsafe fn write_matrix(ncols: usize, data: &[f64], buf: *mut f64, cap: usize, out_cols: *mut usize) -> Result<(), Fail> {
    *out(out_cols, "out_cols")? = ncols;
    let mut len = 0;
    copy_out(data, buf, cap, &mut len)
}

/// Random-walk landing probabilities from `target`, written row-major as a
/// `num_nodes x k` matrix: entry `(v, j)` is the probability of being at `v`
/// after `j + 1` steps.
///
/// # Safety
/// `buf` must hold `cap` doubles; `out_cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_rw_encoding(
    graph: *const DegnnGraph,
    target: u64,
    k: u64,
    buf: *mut f64,
    cap: usize,
    out_cols: *mut usize,
) -> DegnnStatus {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        let t = check_node(g, target)?;
        let m = rw_landing_probabilities(g, t, to_usize(k)?)?;
        let data: Vec<f64> = m.iter().copied().collect();
        write_matrix(m.ncols(), &data, buf, cap, out_cols)
    })
}

/// One-hot shortest-path distance from `target`, row-major `num_nodes x (k + 2)`.
/// Column `d` marks distance `d` for `d <= k`; the last column marks farther
/// or unreachable nodes.
///
/// # Safety
/// `buf` must hold `cap` doubles; `out_cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_spd_encoding(
    graph: *const DegnnGraph,
    target: u64,
    k: u64,
    buf: *mut f64,
    cap: usize,
    out_cols: *mut usize,
) -> DegnnStatus {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        let t = check_node(g, target)?;
        let m = spd_onehot(g, t, to_usize(k)?)?;
        let data: Vec<f64> = m.iter().copied().collect();
        write_matrix(m.ncols(), &data, buf, cap, out_cols)
    })
}

/// Nodes within `hops` of `target`, relabelled in BFS order (target first).
///
/// # Safety
/// `out_sub` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_ego_subgraph(
    graph: *const DegnnGraph,
    target: u64,
    hops: u64,
    out_sub: *mut *mut DegnnSubgraph,
) -> DegnnStatus {
    guard(|| {
        let slot = out(out_sub, "out_sub")?;
        let g = &get(graph, "graph")?.0;
        let t = check_node(g, target)?;
        let sub = extract_ego_subgraph(g, t, to_usize(hops)?)?;
        *slot = Box::into_raw(Box::new(DegnnSubgraph(sub)));
        Ok(())
    })
}

/// # Safety
/// `sub` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn degnn_subgraph_free(sub: *mut DegnnSubgraph) {
    if !sub.is_null() {
        drop(Box::from_raw(sub));
    }
}

/// # Safety
/// `sub` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn degnn_subgraph_num_nodes(sub: *const DegnnSubgraph, out_n: *mut u64) -> DegnnStatus {
    guard(|| {
        *out(out_n, "out_n")? = get(sub, "sub")?.0.num_nodes() as u64;
        Ok(())
    })
}

/// Parent-graph id of each local node.
///
/// # Safety
/// `buf` must hold `cap` values; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_subgraph_node_map(
    sub: *const DegnnSubgraph,
    buf: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> DegnnStatus {
    guard(|| copy_out(&to_u64(&get(sub, "sub")?.0.node_map), buf, cap, out_len))
}

/// Hop distance of each local node from the target.
///
/// # Safety
/// `buf` must hold `cap` values; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_subgraph_distances(
    sub: *const DegnnSubgraph,
    buf: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> DegnnStatus {
    guard(|| copy_out(&to_u64(&get(sub, "sub")?.0.distances), buf, cap, out_len))
}

/// Copies the induced subgraph into a new, independently owned graph handle.
///
/// # Safety
/// `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_subgraph_graph(sub: *const DegnnSubgraph, out_graph: *mut *mut DegnnGraph) -> DegnnStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        let g = get(sub, "sub")?.0.graph.clone();
        *slot = Box::into_raw(Box::new(DegnnGraph(g)));
        Ok(())
    })
}

/// Loads `out_edges.txt` and `out1_node_feature_label.txt` from `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated UTF-8 path; `out_ds` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_dataset_load(dir: *const c_char, out_ds: *mut *mut DegnnDataset) -> DegnnStatus {
    guard(|| {
        let slot = out(out_ds, "out_ds")?;
        if dir.is_null() {
            return Err(null("dir"));
        }
        let dir = CStr::from_ptr(dir)
            .to_str()
            .map_err(|_| Fail(DegnnStatus::InvalidArgument, "dir is not valid UTF-8".into()))?;
        let ds = load_dataset_dir(Path::new(dir), FeatureEncoding::Auto)?;
        *slot = Box::into_raw(Box::new(DegnnDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `ds` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn degnn_dataset_free(ds: *mut DegnnDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a live handle or null; `out_stats` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_dataset_stats(ds: *const DegnnDataset, out_stats: *mut DegnnStats) -> DegnnStatus {
    guard(|| {
        let s = dataset_report(&get(ds, "ds")?.0)?;
        *out(out_stats, "out_stats")? = DegnnStats {
            num_nodes: s.num_nodes as u64,
            num_edges: s.num_edges as u64,
            num_features: s.num_features as u64,
            num_classes: s.num_classes as u64,
            homophily: s.homophily,
        };
        Ok(())
    })
}

/// Node labels of the dataset.
///
/// # Safety
/// `buf` must hold `cap` values; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_dataset_labels(
    ds: *const DegnnDataset,
    buf: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> DegnnStatus {
    guard(|| copy_out(&to_u64(get(ds, "ds")?.0.labels.labels()), buf, cap, out_len))
}

/// Copies the dataset graph into a new graph handle.
///
/// # Safety
/// `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn degnn_dataset_graph(ds: *const DegnnDataset, out_graph: *mut *mut DegnnGraph) -> DegnnStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        let g = get(ds, "ds")?.0.graph.clone();
        *slot = Box::into_raw(Box::new(DegnnGraph(g)));
        Ok(())
    })
}
