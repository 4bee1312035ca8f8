use archpursuit::distributed::{
    count_passes, distributed_weights, run_distributed, Partition, SUMMARY_ENTRY_BYTES,
};
use archpursuit::generators::gen_uniform_separable;
use archpursuit::nnls::{self, nnls_fit};
use archpursuit::pursuit::{pursue, PursuitConfig};

#[test]
fn any_partition_matches_serial() {
    let inst = gen_uniform_separable(90, 15, 6, 4).unwrap();
    let cfg = PursuitConfig::new(150, 77);
    let serial = pursue(&inst.x, &cfg).unwrap();
    // interleaved rows, uneven sizes and an idle worker
    let assignment = vec![
        (0..90).filter(|i| i % 3 == 0).collect(),
        (0..90).filter(|i| i % 3 == 1).collect(),
        Vec::new(),
        (0..90).filter(|i| i % 3 == 2).rev().collect(),
    ];
    let part = Partition::from_assignment(90, assignment).unwrap();
    let run = run_distributed(&inst.x, &part, &cfg).unwrap();
    assert_eq!(run.extremes, serial);
    assert_eq!(count_passes(&run.trace), 1);
}

#[test]
fn normalized_rows_match_serial() {
    let inst = gen_uniform_separable(50, 10, 4, 2).unwrap();
    let cfg = PursuitConfig::new(80, 3).with_normalize_rows(true);
    let serial = pursue(&inst.x, &cfg).unwrap();
    let run = run_distributed(&inst.x, &Partition::contiguous(50, 3).unwrap(), &cfg).unwrap();
    assert_eq!(run.extremes, serial);
}

#[test]
fn communication_is_fixed_per_functional() {
    let inst = gen_uniform_separable(64, 20, 5, 1).unwrap();
    let m = 120;
    let part = Partition::contiguous(64, 4).unwrap();
    let run = run_distributed(&inst.x, &part, &PursuitConfig::new(m, 0)).unwrap();
    for d in 0..4 {
        assert_eq!(run.trace.bytes_from(d), m * SUMMARY_ENTRY_BYTES);
    }
}

#[test]
fn weights_match_serial_fit_and_add_one_pass() {
    let inst = gen_uniform_separable(70, 12, 5, 8).unwrap();
    let part = Partition::contiguous(70, 4).unwrap();
    let mut run = run_distributed(&inst.x, &part, &PursuitConfig::new(200, 1)).unwrap();
    let rows = run.extremes.indices.clone();
    let fit = distributed_weights(&inst.x, &part, &rows, nnls::DEFAULT_TOL, nnls::DEFAULT_MAX_ITER, &mut run.trace).unwrap();
    let serial = nnls_fit(&inst.x, &inst.x.select_rows(&rows).unwrap(), nnls::DEFAULT_TOL, nnls::DEFAULT_MAX_ITER).unwrap();
    assert_eq!(fit.w, serial.w);
    assert_eq!(count_passes(&run.trace), 2);
    assert!(fit.relative_residual <= 1e-6);
}

#[test]
fn more_workers_than_rows() {
    let inst = gen_uniform_separable(3, 4, 2, 0).unwrap();
    let cfg = PursuitConfig::new(10, 5);
    let run = run_distributed(&inst.x, &Partition::contiguous(3, 8).unwrap(), &cfg).unwrap();
    assert_eq!(run.extremes, pursue(&inst.x, &cfg).unwrap());
    assert_eq!(count_passes(&run.trace), 1);
}
