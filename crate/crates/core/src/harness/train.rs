//! Mini-batch Adam training with early stopping, plus cross-resolution
//! evaluation over a held-out test split.
//!
//! Determinism contract: the split shuffle is seeded by the dataset
//! seed, each epoch's batch shuffle by the training seed and epoch
//! index, and all reductions run in index order, so a (dataset, config)
//! pair reproduces its history and parameters bit for bit.

use crate::adam::Adam;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::harness::metrics::{rl2e, MetricRecord};
use crate::models::{FunctionSample, OperatorModel};
use crate::pdegen::{Dataset, ResBlock};
use crate::rng;
use crate::tensor::Tensor;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use std::time::Instant;

/// Samples per evaluation graph; amortizes the shared trunk pass.
const EVAL_CHUNK: usize = 16;

/// Training schedule. The learning rate starts at `lr` and is
/// multiplied by `lr_decay` after every `lr_epochs` epochs.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_decay: f64,
    pub lr_epochs: usize,
    /// Resolution of the dataset block the model trains on.
    pub train_resolution: usize,
    pub seed: u64,
    /// Restore the parameters of the best-validation epoch at the end.
    pub early_stopping: bool,
    /// train : validation : test proportions; normalized internally.
    pub ratios: Vec<f64>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArg("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArg("batch size must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidArg(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay.is_finite()) {
            return Err(Error::InvalidArg(format!("lr decay must be positive, got {}", self.lr_decay)));
        }
        if self.lr_epochs == 0 {
            return Err(Error::InvalidArg("lr decay interval must be at least 1 epoch".into()));
        }
        Ok(())
    }
}

/// One epoch's history line.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean squared error over the training split.
    pub train_loss: f64,
    /// Mean relative L2 error over the validation split.
    pub val_rl2e: f64,
    pub lr: f64,
}

/// Outcome of a training run. `best_epoch`/`best_val` track the
/// validation minimum whether or not early stopping restored it.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val: f64,
}

/// Disjoint, exhaustive index partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of 0..n cut contiguously into train/validation/test.
/// Sizes are floor(r0 n) and floor(r1 n), with the remainder as test,
/// so 1000 samples at 6:2:2 give exactly 600/200/200.
pub fn split_indices(n: usize, ratios: &[f64], seed: u64) -> Result<Split> {
    if ratios.len() != 3 {
        return Err(Error::InvalidArg(format!(
            "need three split ratios (train:val:test), got {}",
            ratios.len()
        )));
    }
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidArg(format!("split ratios must be positive, got {ratios:?}")));
    }
    let total: f64 = ratios.iter().sum();
    let n_train = (ratios[0] / total * n as f64).floor() as usize;
    let n_val = (ratios[1] / total * n as f64).floor() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= n {
        return Err(Error::EmptySplit(format!(
            "ratios {ratios:?} over {n} samples leave train={n_train} val={n_val} test={}",
            n.saturating_sub(n_train + n_val)
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::rng_for(seed, rng::stream::SPLIT));
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    Ok(Split { train: idx, val, test })
}

/// Step-decay schedule: `lr0 * decay^floor((epoch - 1) / step)` for a
/// 1-based epoch, so epochs 1..=step run at lr0.
pub fn learning_rate(lr0: f64, decay: f64, step_epochs: usize, epoch: usize) -> f64 {
    lr0 * decay.powi(((epoch - 1) / step_epochs) as i32)
}

/// Errors that mean "this model cannot consume this resolution", as
/// opposed to a genuine failure: a fixed-width branch fed the wrong
/// width, a spectral layer asked for more modes than the grid resolves,
/// or a grid-locked output queried off its grid.
fn not_applicable(e: &Error) -> bool {
    matches!(e, Error::ResolutionMismatch { .. } | Error::ModeOverflow { .. })
        || matches!(e, Error::Shape { op, .. } if *op == "fno_forward")
}

/// One sample's RL2E on a fresh graph; None if the model or the metric
/// fails on it in a skippable way.
fn single_cell<M: OperatorModel>(
    model: &M,
    dataset: &Dataset,
    block: &ResBlock,
    queries: &crate::models::QuerySet,
    i: usize,
) -> Option<f64> {
    let sample = dataset.input_sample(block, i).ok()?;
    let mut g = Graph::new();
    let ids = model.store().bind(&mut g, false).ok()?;
    let outs = model.forward_batch(&mut g, &ids, &[&sample], queries).ok()?;
    let e = rl2e(g.value(outs[0]).data(), &block.targets[i]).ok()?;
    e.is_finite().then_some(e)
}

enum ChunkOut {
    Cells(Vec<f64>),
    NotApplicable,
}

/// Mean RL2E of `model` over the given sample indices of one block.
/// Ok((None, 0)) marks a not-applicable cell. Per-sample failures
/// (non-finite outputs, degenerate references) are skipped, not fatal;
/// the count says how many samples contributed to the mean.
fn rl2e_over_indices<M: OperatorModel + Sync>(
    model: &M,
    dataset: &Dataset,
    block: &ResBlock,
    indices: &[usize],
) -> Result<(Option<f64>, usize)> {
    let queries = dataset.query_set(block)?;
    let chunks: Vec<ChunkOut> = indices
        .par_chunks(EVAL_CHUNK)
        .map(|chunk| -> Result<ChunkOut> {
            let samples: Vec<FunctionSample> = chunk
                .iter()
                .map(|&i| dataset.input_sample(block, i))
                .collect::<Result<_>>()?;
            let refs: Vec<&FunctionSample> = samples.iter().collect();
            let mut g = Graph::new();
            let ids = model.store().bind(&mut g, false)?;
            match model.forward_batch(&mut g, &ids, &refs, &queries) {
                Ok(outs) => {
                    let mut cells = Vec::with_capacity(chunk.len());
                    for (k, &i) in chunk.iter().enumerate() {
                        if let Ok(e) = rl2e(g.value(outs[k]).data(), &block.targets[i]) {
                            if e.is_finite() {
                                cells.push(e);
                            }
                        }
                    }
                    Ok(ChunkOut::Cells(cells))
                }
                Err(e) if not_applicable(&e) => Ok(ChunkOut::NotApplicable),
                Err(Error::NonFinite { .. }) => {
                    // One bad sample poisons its whole chunk graph; redo
                    // the chunk sample by sample so the rest still count.
                    Ok(ChunkOut::Cells(
                        chunk
                            .iter()
                            .filter_map(|&i| single_cell(model, dataset, block, &queries, i))
                            .collect(),
                    ))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(indices.len());
    for c in chunks {
        match c {
            ChunkOut::NotApplicable => return Ok((None, 0)),
            ChunkOut::Cells(v) => cells.extend(v),
        }
    }
    if cells.is_empty() {
        return Ok((None, 0));
    }
    let mean = cells.iter().sum::<f64>() / cells.len() as f64;
    Ok((Some(mean), cells.len()))
}

/// Minimize mean squared error over the training split with Adam,
/// recording per-epoch train loss, validation RL2E, and learning rate.
/// With early stopping enabled the parameters of the best-validation
/// epoch are restored before returning. A non-finite value anywhere in
/// a batch aborts with the offending epoch and batch index.
pub fn train<M: OperatorModel + Sync>(
    model: &mut M,
    dataset: &Dataset,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    train_with(model, dataset, cfg, |_| {})
}

/// [`train`] with a per-epoch observer, called after each epoch's
/// record is complete (the CLI uses it for progress lines).
pub fn train_with<M: OperatorModel + Sync, F: FnMut(&EpochRecord)>(
    model: &mut M,
    dataset: &Dataset,
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainReport> {
    cfg.validate()?;
    let block = dataset.block(cfg.train_resolution)?;
    let queries = dataset.query_set(block)?;
    let n_q = block.n_queries();
    let samples: Vec<FunctionSample> = (0..dataset.n_samples())
        .map(|i| dataset.input_sample(block, i))
        .collect::<Result<_>>()?;
    let split = split_indices(dataset.n_samples(), &cfg.ratios, dataset.seed)?;

    let mut adam = Adam::new(model.store());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut best_params: Option<Vec<Vec<f64>>> = None;

    for epoch in 1..=cfg.epochs {
        let lr = learning_rate(cfg.lr, cfg.lr_decay, cfg.lr_epochs, epoch);
        let mut order = split.train.clone();
        order.shuffle(&mut rng::rng_for(rng::derive(cfg.seed, epoch as u64), rng::stream::BATCH));

        // Sum of squared errors over the epoch; one graph per batch so
        // the query-only trunk pass is shared across the batch.
        let mut sq_sum = 0.0;
        for (bi, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let step = (|| -> Result<f64> {
                let mut g = Graph::new();
                let ids = model.store().bind(&mut g, true)?;
                let batch: Vec<&FunctionSample> = chunk.iter().map(|&i| &samples[i]).collect();
                let outs = model.forward_batch(&mut g, &ids, &batch, &queries)?;
                let mut total = None;
                for (k, &i) in chunk.iter().enumerate() {
                    let t = g.constant(Tensor::column(&block.targets[i]))?;
                    let d = g.sub(outs[k], t)?;
                    let sq = g.mul(d, d)?;
                    let s = g.sum(sq)?;
                    total = Some(match total {
                        None => s,
                        Some(acc) => g.add(acc, s)?,
                    });
                }
                let total = total.expect("batches are non-empty");
                let loss = g.scale(total, 1.0 / (chunk.len() * n_q) as f64)?;
                g.backward(loss)?;
                let grads = model.store().collect_grads(&g, &ids)?;
                adam.step(model.store_mut(), &grads, lr)?;
                Ok(g.value(total).data()[0])
            })();
            match step {
                Ok(batch_sq) => sq_sum += batch_sq,
                Err(Error::NonFinite { .. }) => return Err(Error::NanLoss { epoch, batch: bi }),
                Err(e) => return Err(e),
            }
        }
        let train_loss = sq_sum / (split.train.len() * n_q) as f64;

        let (val_mean, val_n) = rl2e_over_indices(model, dataset, block, &split.val)?;
        let val_rl2e = match val_mean {
            Some(v) if val_n > 0 => v,
            _ => {
                return Err(Error::numerical(
                    "validation",
                    format!("no usable validation samples at epoch {epoch}"),
                ))
            }
        };
        if val_rl2e < best_val {
            best_val = val_rl2e;
            best_epoch = epoch;
            if cfg.early_stopping {
                best_params = Some(model.store().snapshot());
            }
        }
        history.push(EpochRecord { epoch, train_loss, val_rl2e, lr });
        on_epoch(history.last().unwrap());
    }

    if let Some(p) = best_params {
        model.store_mut().restore(&p);
    }
    Ok(TrainReport { history, best_epoch, best_val })
}

/// Mean test-split RL2E of one model at each requested resolution.
/// Cells the model cannot produce (resolution lock, mode overflow,
/// grid-locked queries) come back with `rl2e: None` rather than
/// failing the run; timing is opt-in so untimed output is reproducible.
pub fn evaluate_multi_resolution<M: OperatorModel + Sync>(
    model: &M,
    model_name: &str,
    dataset: &Dataset,
    test_resolutions: &[usize],
    train_resolution: usize,
    ratios: &[f64],
    timing: bool,
) -> Result<Vec<MetricRecord>> {
    let split = split_indices(dataset.n_samples(), ratios, dataset.seed)?;
    let mut records = Vec::with_capacity(test_resolutions.len());
    for &res in test_resolutions {
        let block = dataset.block(res)?;
        let t0 = Instant::now();
        let (mean, n) = rl2e_over_indices(model, dataset, block, &split.test)?;
        records.push(MetricRecord {
            experiment: dataset.experiment.clone(),
            model: model_name.to_string(),
            train_res: train_resolution,
            test_res: res,
            rl2e: mean,
            n,
            seconds: timing.then(|| t0.elapsed().as_secs_f64()),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VarId;
    use crate::models::{DeepOnetModel, QuerySet};
    use crate::params::ParamStore;
    use crate::tensor::Activation;
    use std::collections::HashSet;

    const RATIOS: [f64; 3] = [0.6, 0.2, 0.2];

    fn assert_partition(split: &Split, n: usize) {
        let mut seen = HashSet::new();
        for &i in split.train.iter().chain(&split.val).chain(&split.test) {
            assert!(seen.insert(i), "index {i} appears twice");
        }
        assert_eq!(seen.len(), n);
    }

    #[test]
    fn split_1000_gives_600_200_200() {
        let s = split_indices(1000, &RATIOS, 7).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (600, 200, 200));
        assert_partition(&s, 1000);
    }

    #[test]
    fn split_10_gives_6_2_2() {
        let s = split_indices(10, &RATIOS, 7).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));
        assert_partition(&s, 10);
    }

    #[test]
    fn split_is_seed_deterministic() {
        assert_eq!(split_indices(50, &RATIOS, 3).unwrap(), split_indices(50, &RATIOS, 3).unwrap());
        assert_ne!(
            split_indices(50, &RATIOS, 3).unwrap().train,
            split_indices(50, &RATIOS, 4).unwrap().train
        );
    }

    #[test]
    fn split_normalizes_ratio_scale() {
        assert_eq!(
            split_indices(100, &[6.0, 2.0, 2.0], 9).unwrap(),
            split_indices(100, &RATIOS, 9).unwrap()
        );
    }

    #[test]
    fn empty_partition_is_an_error() {
        match split_indices(4, &RATIOS, 0) {
            Err(Error::EmptySplit(_)) => {}
            other => panic!("expected EmptySplit, got {other:?}"),
        }
        assert!(split_indices(10, &[0.6, -0.2, 0.2], 0).is_err());
        assert!(split_indices(10, &[0.6, 0.2], 0).is_err());
    }

    #[test]
    fn lr_schedule_matches_hand_values() {
        for (epoch, want) in [(1, 1e-3), (100, 1e-3), (101, 5e-4), (200, 5e-4), (250, 2.5e-4)] {
            let got = learning_rate(1e-3, 0.5, 100, epoch);
            assert!((got - want).abs() < 1e-18, "epoch {epoch}: {got} vs {want}");
        }
    }

    // A one-parameter model, pred(x) = theta * x, ignoring the input
    // function entirely. Enough to exercise scheduling, early stopping,
    // and loss bookkeeping on problems with known optima.
    struct LinearModel {
        store: ParamStore,
    }

    impl LinearModel {
        fn new(theta0: f64) -> Self {
            let mut store = ParamStore::new();
            store.add("theta", Tensor::new(vec![1, 1], vec![theta0]).unwrap());
            LinearModel { store }
        }

        fn theta(&self) -> f64 {
            self.store.value(self.store.find("theta").unwrap()).data()[0]
        }
    }

    impl OperatorModel for LinearModel {
        fn store(&self) -> &ParamStore {
            &self.store
        }

        fn store_mut(&mut self) -> &mut ParamStore {
            &mut self.store
        }

        fn forward_batch(
            &self,
            g: &mut Graph,
            ids: &[VarId],
            samples: &[&FunctionSample],
            queries: &QuerySet,
        ) -> Result<Vec<VarId>> {
            let pts = g.constant(queries.points.clone())?;
            samples.iter().map(|_| g.matmul(pts, ids[0])).collect()
        }
    }

    // n samples, 2-node inputs, two query points, targets slope(i) * x.
    fn linear_dataset(n: usize, slope: impl Fn(usize) -> f64) -> Dataset {
        let coords = vec![1.0, 2.0];
        Dataset {
            experiment: "synthetic".into(),
            seed: 0,
            provenance: "test".into(),
            lo: 0.0,
            hi: 1.0,
            blocks: vec![ResBlock {
                resolution: 2,
                d2: 1,
                inputs: (0..n).map(|i| vec![i as f64, 1.0]).collect(),
                coords: coords.clone(),
                targets: (0..n).map(|i| coords.iter().map(|&x| slope(i) * x).collect()).collect(),
            }],
        }
    }

    fn quick_config(epochs: usize, lr: f64, early_stopping: bool) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 6,
            lr,
            lr_decay: 0.5,
            lr_epochs: 400,
            train_resolution: 2,
            seed: 1,
            early_stopping,
            ratios: RATIOS.to_vec(),
        }
    }

    #[test]
    fn convex_problem_drives_train_loss_monotonically_below_1e10() {
        // Every sample's target is 2x, so the loss is a 1-d quadratic
        // in theta with minimum 0 at theta = 2.
        let ds = linear_dataset(10, |_| 2.0);
        let mut model = LinearModel::new(0.0);
        let report = train(&mut model, &ds, &quick_config(1200, 0.02, false)).unwrap();
        let losses: Vec<f64> = report.history.iter().map(|e| e.train_loss).collect();
        let hit = losses
            .iter()
            .position(|&l| l < 1e-10)
            .unwrap_or_else(|| panic!("never reached 1e-10; final loss {}", losses.last().unwrap()));
        for k in 1..=hit {
            assert!(
                losses[k] < losses[k - 1],
                "loss rose at epoch {}: {} -> {}",
                k + 1,
                losses[k - 1],
                losses[k]
            );
        }
        assert!((model.theta() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn early_stopping_restores_the_best_validation_epoch() {
        // Train targets pull theta toward 2, validation targets prefer
        // 1.5, so validation error dips and then rises again.
        let split = split_indices(10, &RATIOS, 0).unwrap();
        let val: HashSet<usize> = split.val.iter().copied().collect();
        let ds = linear_dataset(10, |i| if val.contains(&i) { 1.5 } else { 2.0 });
        let mut model = LinearModel::new(0.0);
        let report = train(&mut model, &ds, &quick_config(120, 0.05, true)).unwrap();

        for e in &report.history {
            assert!(report.best_val <= e.val_rl2e);
        }
        assert_eq!(report.history[report.best_epoch - 1].val_rl2e, report.best_val);
        assert!(
            report.best_epoch < report.history.len(),
            "validation error never rose after epoch {}",
            report.best_epoch
        );
        // Restored parameters reproduce the recorded best validation
        // error: |theta/1.5 - 1| for this model and data.
        let val_err = (model.theta() / 1.5 - 1.0).abs();
        assert!(
            (val_err - report.best_val).abs() < 1e-12,
            "restored theta gives {val_err}, best recorded {}",
            report.best_val
        );
        // Without the restore, training ends pulled toward 2.
        let mut unrestored = LinearModel::new(0.0);
        let r2 = train(&mut unrestored, &ds, &quick_config(120, 0.05, false)).unwrap();
        assert_eq!(r2.best_val, report.best_val);
        assert!((unrestored.theta() - 2.0).abs() < (model.theta() - 2.0).abs());
    }

    #[test]
    fn non_finite_target_aborts_with_epoch_and_batch() {
        let ds = linear_dataset(10, |_| f64::NAN);
        let mut model = LinearModel::new(0.0);
        match train(&mut model, &ds, &quick_config(3, 0.05, false)) {
            Err(Error::NanLoss { epoch: 1, batch: 0 }) => {}
            other => panic!("expected NanLoss at epoch 1 batch 0, got {other:?}"),
        }
    }

    #[test]
    fn training_is_deterministic() {
        let ds = linear_dataset(12, |i| 1.0 + i as f64 * 0.1);
        let run = || {
            let mut m = LinearModel::new(0.3);
            let r = train(&mut m, &ds, &quick_config(8, 0.05, true)).unwrap();
            (r.history, m.store.snapshot())
        };
        assert_eq!(run(), run());
    }

    // Looks up the stored target row for each input: a perfect
    // predictor for dataset samples.
    struct OracleModel {
        ds: Dataset,
        store: ParamStore,
    }

    impl OperatorModel for OracleModel {
        fn store(&self) -> &ParamStore {
            &self.store
        }

        fn store_mut(&mut self) -> &mut ParamStore {
            &mut self.store
        }

        fn forward_batch(
            &self,
            g: &mut Graph,
            _ids: &[VarId],
            samples: &[&FunctionSample],
            _queries: &QuerySet,
        ) -> Result<Vec<VarId>> {
            samples
                .iter()
                .map(|s| {
                    let block = self.ds.block(s.resolution())?;
                    let i = block
                        .inputs
                        .iter()
                        .position(|row| row.as_slice() == s.values.data())
                        .expect("sample came from this dataset");
                    g.constant(Tensor::column(&block.targets[i]))
                })
                .collect()
        }
    }

    fn two_resolution_dataset(n: usize) -> Dataset {
        let coords = vec![0.25, 0.75];
        let block = |resolution: usize| ResBlock {
            resolution,
            d2: 1,
            inputs: (0..n).map(|i| vec![i as f64 + resolution as f64; resolution]).collect(),
            coords: coords.clone(),
            targets: (0..n)
                .map(|i| coords.iter().map(|&x| (i + 1) as f64 * x + 0.5).collect())
                .collect(),
        };
        Dataset {
            experiment: "synthetic".into(),
            seed: 0,
            provenance: "test".into(),
            lo: 0.0,
            hi: 1.0,
            blocks: vec![block(3), block(5)],
        }
    }

    #[test]
    fn oracle_predictor_scores_zero_at_every_resolution() {
        let ds = two_resolution_dataset(10);
        let model = OracleModel { ds: ds.clone(), store: ParamStore::new() };
        let records = evaluate_multi_resolution(&model, "oracle", &ds, &[3, 5], 3, &RATIOS, false).unwrap();
        assert_eq!(records.len(), 2);
        for (r, want_res) in records.iter().zip([3, 5]) {
            assert_eq!(r.experiment, "synthetic");
            assert_eq!(r.model, "oracle");
            assert_eq!(r.train_res, 3);
            assert_eq!(r.test_res, want_res);
            assert_eq!(r.rl2e, Some(0.0));
            assert_eq!(r.n, 2);
            assert_eq!(r.seconds, None);
        }
    }

    #[test]
    fn resolution_locked_model_yields_not_applicable_cells() {
        let ds = two_resolution_dataset(10);
        let model = DeepOnetModel::new(&[3, 4, 2], &[1, 4, 2], Activation::Tanh, 0).unwrap();
        let records = evaluate_multi_resolution(&model, "deeponet", &ds, &[3, 5], 3, &RATIOS, false).unwrap();
        assert!(records[0].rl2e.unwrap().is_finite());
        assert_eq!(records[0].n, 2);
        assert_eq!(records[1].rl2e, None);
        assert_eq!(records[1].n, 0);
    }

    #[test]
    fn timing_is_opt_in() {
        let ds = two_resolution_dataset(10);
        let model = OracleModel { ds: ds.clone(), store: ParamStore::new() };
        let rec = &evaluate_multi_resolution(&model, "oracle", &ds, &[3], 3, &RATIOS, true).unwrap()[0];
        assert!(rec.seconds.unwrap() >= 0.0);
    }
}
