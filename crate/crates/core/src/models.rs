//! Operator models and the function/query plumbing they share.
//!
//! All three models map a discretized input function to solution values
//! at arbitrary query points (the FNO's queries are fixed to its input
//! grid). The RDO branch runs integral-operator layers over the input
//! samples and collapses the result to a p-vector by quadrature, so its
//! weights never depend on the sampling resolution; the DeepONet branch
//! is a plain FNN over the raw samples and is locked to the resolution
//! it was built with.

use crate::attention::AioLayer;
use crate::error::{Error, Result};
use crate::graph::{Graph, VarId};
use crate::params::{Fnn, ParamStore};
use crate::rng;
use crate::spectral::FioLayer;
use crate::tensor::{Activation, Tensor};

// ── Grids, samples, queries ─────────────────────────────────────────

/// Uniform 1-D grid with m nodes including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidArg(format!("grid needs hi > lo, got [{lo}, {hi}]")));
        }
        if m < 2 {
            return Err(Error::InvalidArg(format!("grid needs at least 2 nodes, got {m}")));
        }
        Ok(GridSpec { lo, hi, m })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.m - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + self.h() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.node(i)).collect()
    }
}

/// A function discretized on a grid; values are [m, d_a].
#[derive(Debug, Clone)]
pub struct FunctionSample {
    pub grid: GridSpec,
    pub values: Tensor,
}

impl FunctionSample {
    pub fn new(grid: GridSpec, values: Tensor) -> Result<Self> {
        if values.rank() != 2 || values.rows() != grid.m {
            return Err(Error::shape(
                "function_sample",
                format!("values {:?} do not match {} grid nodes", values.shape(), grid.m),
            ));
        }
        Ok(FunctionSample { grid, values })
    }

    pub fn resolution(&self) -> usize {
        self.grid.m
    }

    pub fn channels(&self) -> usize {
        self.values.cols()
    }
}

/// Discretization operator: evaluate a scalar function at the grid
/// nodes. Linear and bounded in the function values by construction.
pub fn sample_function(f: impl Fn(f64) -> f64, grid: GridSpec) -> FunctionSample {
    let vals: Vec<f64> = grid.nodes().into_iter().map(f).collect();
    FunctionSample {
        grid,
        values: Tensor::column(&vals),
    }
}

/// Query points [n, d2] with optional reference values [n, 1].
#[derive(Debug, Clone)]
pub struct QuerySet {
    pub points: Tensor,
    pub values: Option<Tensor>,
}

impl QuerySet {
    pub fn new(points: Tensor) -> Result<Self> {
        if points.rank() != 2 || points.rows() == 0 {
            return Err(Error::shape(
                "query_set",
                format!("points must be a non-empty [n, d] tensor, got {:?}", points.shape()),
            ));
        }
        Ok(QuerySet { points, values: None })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }
}

// ── Quadrature reduction ────────────────────────────────────────────

/// Rule used to collapse branch features over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// h * [1/2, 1, ..., 1, 1/2]; second-order, weights sum to |D|.
    Trapezoid,
    /// Bare h * sum over nodes, mirroring the plain summation form.
    Riemann,
}

impl Quadrature {
    pub fn weights(self, grid: &GridSpec) -> Vec<f64> {
        let h = grid.h();
        match self {
            Quadrature::Trapezoid => (0..grid.m)
                .map(|i| if i == 0 || i == grid.m - 1 { 0.5 * h } else { h })
                .collect(),
            Quadrature::Riemann => vec![h; grid.m],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quadrature::Trapezoid => "trapezoid",
            Quadrature::Riemann => "riemann",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "trapezoid" => Ok(Quadrature::Trapezoid),
            "riemann" => Ok(Quadrature::Riemann),
            other => Err(Error::InvalidArg(format!("unknown quadrature '{other}'"))),
        }
    }
}

/// Integral reduction of [m, p] features to [1, p]: out = sum_i w_i x_i.
pub fn integral_reduce(
    g: &mut Graph,
    x: VarId,
    grid: &GridSpec,
    quadrature: Quadrature,
) -> Result<VarId> {
    let rows = g.value(x).rows();
    if rows != grid.m {
        return Err(Error::shape(
            "integral_reduce",
            format!("{} feature rows vs {} grid nodes", rows, grid.m),
        ));
    }
    g.weighted_colsum(x, quadrature.weights(grid))
}

// ── Shared forward plumbing ─────────────────────────────────────────

/// Branch input: sampled values with the node coordinate appended as an
/// extra channel, [m, d_a + 1].
pub fn branch_input(sample: &FunctionSample) -> Tensor {
    let m = sample.grid.m;
    let d = sample.values.cols();
    let vals = sample.values.data();
    let mut data = Vec::with_capacity(m * (d + 1));
    for i in 0..m {
        data.extend_from_slice(&vals[i * d..(i + 1) * d]);
        data.push(sample.grid.node(i));
    }
    Tensor::new(vec![m, d + 1], data).expect("branch input shape")
}

/// Common interface the training harness drives.
pub trait OperatorModel {
    fn store(&self) -> &ParamStore;
    fn store_mut(&mut self) -> &mut ParamStore;
    /// Predictions ([n, 1] each) for a batch of samples sharing one
    /// query set. Implementations reuse sample-independent subgraphs
    /// (the trunk) across the batch.
    fn forward_batch(
        &self,
        g: &mut Graph,
        ids: &[VarId],
        samples: &[&FunctionSample],
        queries: &QuerySet,
    ) -> Result<Vec<VarId>>;

    /// Values-only convenience: one sample, fresh graph, no gradients.
    fn predict(&self, sample: &FunctionSample, queries: &QuerySet) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let ids = self.store().bind(&mut g, false)?;
        let outs = self.forward_batch(&mut g, &ids, &[sample], queries)?;
        Ok(g.value(outs[0]).data().to_vec())
    }
}

// ── RDO ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct RdoConfig {
    /// Fourier integral layers.
    pub t1: usize,
    /// Attention integral layers.
    pub t2: usize,
    /// Retained Fourier modes per layer.
    pub modes: usize,
    /// Channel width of the integral-operator pipeline.
    pub d_phi: usize,
    /// Reduced branch dimension; must equal the last trunk width.
    pub p: usize,
    /// Trunk widths, starting at the query dimension.
    pub trunk_widths: Vec<usize>,
    pub activation: Activation,
    pub quadrature: Quadrature,
    /// Input function channels (excluding the coordinate channel).
    pub d_a: usize,
}

impl RdoConfig {
    fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::InvalidArg("modes must be positive".into()));
        }
        if self.t1 == 0 && self.t2 == 0 {
            return Err(Error::InvalidArg("need at least one integral layer".into()));
        }
        if self.trunk_widths.len() < 2 {
            return Err(Error::InvalidArg("trunk needs at least two widths".into()));
        }
        if *self.trunk_widths.last().unwrap() != self.p {
            return Err(Error::InvalidArg(format!(
                "trunk output width {} must equal p = {}",
                self.trunk_widths.last().unwrap(),
                self.p
            )));
        }
        if self.d_a == 0 || self.d_phi == 0 || self.p == 0 {
            return Err(Error::InvalidArg("widths must be positive".into()));
        }
        Ok(())
    }
}

/// Resolution-invariant deep operator: pointwise lift, T1 Fourier
/// integral layers, pointwise map, T2 attention integral layers,
/// pointwise projection, quadrature reduction, trunk inner product.
/// Construction never sees a resolution; any grid with enough nodes to
/// carry `modes` works at inference time.
#[derive(Debug, Clone)]
pub struct RdoModel {
    pub config: RdoConfig,
    pub store: ParamStore,
    p0: Fnn,
    fios: Vec<FioLayer>,
    p1: Fnn,
    aios: Vec<AioLayer>,
    p2: Fnn,
    trunk: Fnn,
}

impl RdoModel {
    pub fn new(config: RdoConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut store = ParamStore::new();
        let mut r = rng::rng_for(seed, rng::stream::INIT);
        let act = config.activation;
        let d = config.d_phi;
        let p0 = Fnn::new(&mut store, "p0", &[config.d_a + 1, d], act, &mut r)?;
        let fios = (0..config.t1)
            .map(|i| FioLayer::new(&mut store, &format!("fio{i}"), config.modes, d, act, &mut r))
            .collect();
        let p1 = Fnn::new(&mut store, "p1", &[d, d], act, &mut r)?;
        let aios = (0..config.t2)
            .map(|i| AioLayer::new(&mut store, &format!("aio{i}"), d, d, act, &mut r))
            .collect::<Result<Vec<_>>>()?;
        let p2 = Fnn::new(&mut store, "p2", &[d, config.p], act, &mut r)?;
        let trunk = Fnn::new(&mut store, "trunk", &config.trunk_widths, act, &mut r)?;
        Ok(RdoModel {
            config,
            store,
            p0,
            fios,
            p1,
            aios,
            p2,
            trunk,
        })
    }

    /// Reduced branch vector [1, p] for one sample.
    pub fn branch(&self, g: &mut Graph, ids: &[VarId], sample: &FunctionSample) -> Result<VarId> {
        if sample.channels() != self.config.d_a {
            return Err(Error::shape(
                "rdo_branch",
                format!("{} input channels, model expects {}", sample.channels(), self.config.d_a),
            ));
        }
        let x = g.constant(branch_input(sample))?;
        let mut phi = self.p0.forward(g, ids, x)?;
        for fio in &self.fios {
            phi = fio.forward(g, ids, phi)?;
        }
        phi = self.p1.forward(g, ids, phi)?;
        for aio in &self.aios {
            phi = aio.forward(g, ids, phi)?;
        }
        let feat = self.p2.forward(g, ids, phi)?;
        integral_reduce(g, feat, &sample.grid, self.config.quadrature)
    }

    /// Trunk features [n, p] for a query set.
    pub fn trunk_features(&self, g: &mut Graph, ids: &[VarId], queries: &QuerySet) -> Result<VarId> {
        let pts = g.constant(queries.points.clone())?;
        self.trunk.forward(g, ids, pts)
    }
}

impl OperatorModel for RdoModel {
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
        // The trunk depends only on the queries; evaluate it once.
        let t = self.trunk_features(g, ids, queries)?;
        samples
            .iter()
            .map(|s| {
                let b = self.branch(g, ids, s)?;
                let bt = g.transpose(b)?;
                g.matmul(t, bt)
            })
            .collect()
    }
}

// ── DeepONet ────────────────────────────────────────────────────────

/// Classic DeepONet: branch FNN over the raw input samples, trunk FNN
/// over query coordinates, inner product plus scalar bias. The branch
/// input width locks the model to one sampling resolution.
#[derive(Debug, Clone)]
pub struct DeepOnetModel {
    pub store: ParamStore,
    pub branch_widths: Vec<usize>,
    pub trunk_widths: Vec<usize>,
    pub activation: Activation,
    branch: Fnn,
    trunk: Fnn,
    b0: crate::params::ParamId,
}

impl DeepOnetModel {
    pub fn new(
        branch_widths: &[usize],
        trunk_widths: &[usize],
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        if branch_widths.len() < 2 || trunk_widths.len() < 2 {
            return Err(Error::InvalidArg("branch and trunk need at least two widths".into()));
        }
        if branch_widths.last() != trunk_widths.last() {
            return Err(Error::InvalidArg(format!(
                "branch output {} and trunk output {} must match",
                branch_widths.last().unwrap(),
                trunk_widths.last().unwrap()
            )));
        }
        let mut store = ParamStore::new();
        let mut r = rng::rng_for(seed, rng::stream::INIT);
        let branch = Fnn::new(&mut store, "branch", branch_widths, activation, &mut r)?;
        let trunk = Fnn::new(&mut store, "trunk", trunk_widths, activation, &mut r)?;
        let p = *branch_widths.last().unwrap();
        let b0 = store.add("b0", crate::params::init_bias(&mut r, p, 1));
        Ok(DeepOnetModel {
            store,
            branch_widths: branch_widths.to_vec(),
            trunk_widths: trunk_widths.to_vec(),
            activation,
            branch,
            trunk,
            b0,
        })
    }

    /// The sampling resolution this model is locked to.
    pub fn locked_resolution(&self) -> usize {
        self.branch_widths[0]
    }
}

impl OperatorModel for DeepOnetModel {
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
        let t = {
            let pts = g.constant(queries.points.clone())?;
            self.trunk.forward(g, ids, pts)?
        };
        samples
            .iter()
            .map(|s| {
                let flat = s.resolution() * s.channels();
                if flat != self.locked_resolution() {
                    return Err(Error::ResolutionMismatch {
                        expected: self.locked_resolution(),
                        got: flat,
                    });
                }
                let x = g.constant(s.values.clone())?;
                let row = g.reshape(x, vec![1, flat])?;
                let b = self.branch.forward(g, ids, row)?;
                let bt = g.transpose(b)?;
                let u = g.matmul(t, bt)?;
                g.add_scalar(u, ids[self.b0.0])
            })
            .collect()
    }
}

// ── FNO ─────────────────────────────────────────────────────────────

/// Fourier neural operator baseline: pointwise lift, a stack of Fourier
/// integral layers (last one unactivated), pointwise projection. Output
/// lives on the input grid, so queries must be exactly the grid nodes.
#[derive(Debug, Clone)]
pub struct FnoModel {
    pub store: ParamStore,
    pub width: usize,
    pub modes: usize,
    pub layers: usize,
    pub activation: Activation,
    pub d_a: usize,
    lift: Fnn,
    fios: Vec<FioLayer>,
    proj: Fnn,
}

impl FnoModel {
    pub fn new(
        width: usize,
        modes: usize,
        layers: usize,
        activation: Activation,
        d_a: usize,
        seed: u64,
    ) -> Result<Self> {
        if width == 0 || modes == 0 || layers == 0 {
            return Err(Error::InvalidArg("fno needs positive width, modes, layers".into()));
        }
        let mut store = ParamStore::new();
        let mut r = rng::rng_for(seed, rng::stream::INIT);
        let lift = Fnn::new(&mut store, "lift", &[d_a + 1, width], activation, &mut r)?;
        let fios = (0..layers)
            .map(|i| {
                let act = if i + 1 == layers { Activation::Identity } else { activation };
                FioLayer::new(&mut store, &format!("fio{i}"), modes, width, act, &mut r)
            })
            .collect();
        let proj = Fnn::new(&mut store, "proj", &[width, 1], activation, &mut r)?;
        Ok(FnoModel {
            store,
            width,
            modes,
            layers,
            activation,
            d_a,
            lift,
            fios,
            proj,
        })
    }
}

impl OperatorModel for FnoModel {
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
        samples
            .iter()
            .map(|s| {
                if queries.len() != s.resolution() || queries.dim() != 1 {
                    return Err(Error::shape(
                        "fno_forward",
                        format!(
                            "output lives on the {}-node input grid; got {} queries of dim {}",
                            s.resolution(),
                            queries.len(),
                            queries.dim()
                        ),
                    ));
                }
                let x = g.constant(branch_input(s))?;
                let mut phi = self.lift.forward(g, ids, x)?;
                for fio in &self.fios {
                    phi = fio.forward(g, ids, phi)?;
                }
                self.proj.forward(g, ids, phi)
            })
            .collect()
    }
}

// ── Model dispatch ──────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Rdo,
    DeepOnet,
    Fno,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Rdo => "rdo",
            ModelKind::DeepOnet => "deeponet",
            ModelKind::Fno => "fno",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rdo" => Ok(ModelKind::Rdo),
            "deeponet" => Ok(ModelKind::DeepOnet),
            "fno" => Ok(ModelKind::Fno),
            other => Err(Error::InvalidArg(format!("unknown model kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum AnyModel {
    Rdo(RdoModel),
    DeepOnet(DeepOnetModel),
    Fno(FnoModel),
}

impl AnyModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            AnyModel::Rdo(_) => ModelKind::Rdo,
            AnyModel::DeepOnet(_) => ModelKind::DeepOnet,
            AnyModel::Fno(_) => ModelKind::Fno,
        }
    }
}

impl OperatorModel for AnyModel {
    fn store(&self) -> &ParamStore {
        match self {
            AnyModel::Rdo(m) => m.store(),
            AnyModel::DeepOnet(m) => m.store(),
            AnyModel::Fno(m) => m.store(),
        }
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        match self {
            AnyModel::Rdo(m) => m.store_mut(),
            AnyModel::DeepOnet(m) => m.store_mut(),
            AnyModel::Fno(m) => m.store_mut(),
        }
    }

    fn forward_batch(
        &self,
        g: &mut Graph,
        ids: &[VarId],
        samples: &[&FunctionSample],
        queries: &QuerySet,
    ) -> Result<Vec<VarId>> {
        match self {
            AnyModel::Rdo(m) => m.forward_batch(g, ids, samples, queries),
            AnyModel::DeepOnet(m) => m.forward_batch(g, ids, samples, queries),
            AnyModel::Fno(m) => m.forward_batch(g, ids, samples, queries),
        }
    }
}
