//! Runnable samplers: Glauber, uniform ℓ-block, field dynamics and the
//! (k, ℓ)-projected block chain.
//!
//! RNG stream per step kind, in order of consumption:
//!
//! - Glauber: vertex index among free vertices, then one uniform for the
//!   conditional draw.
//! - Block: the ℓ-subset (`rand::seq::index::sample`), then one uniform for
//!   the inverse-CDF draw over block assignments in canonical order.
//! - Field: one coin per free `+1` vertex in vertex order, then one
//!   uniform for the block draw.
//! - Projected block: the hypergeometric vector, then the coins as in the
//!   field step, then one uniform.

pub mod hypergeo;
pub mod ktransform;

pub use hypergeo::{hypergeo_sample, HyperGeoParams};
pub use ktransform::{k_transform_sample, k_transform_table, project};

use crate::error::{param, Error, Result};
use crate::model::{Configuration, Pinning, TwoSpinSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest block resampled by exact enumeration.
pub const BLOCK_CAP: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DynamicsKind {
    Glauber,
    Block { ell: usize },
    Field { theta: f64 },
    ProjectedBlock { k: usize, ell: usize },
}

impl DynamicsKind {
    pub fn validate(&self, free: usize) -> Result<()> {
        match *self {
            Self::Glauber => Ok(()),
            Self::Block { ell } if ell == 0 || ell > free => {
                param(format!("ell must lie in [1, {free}], got {ell}"))
            }
            Self::Field { theta } if !(theta > 0.0 && theta < 1.0) => param("theta must lie in (0,1)"),
            Self::ProjectedBlock { k, ell } if k == 0 || ell == 0 || ell > k * free => {
                param(format!("projected block needs k >= 1 and 1 <= ell <= kn, got k={k}, ell={ell}"))
            }
            _ => Ok(()),
        }
    }
}

/// How the field step resamples its block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// Exact enumeration of the conditional.
    #[default]
    Exact,
    /// `sweeps · |S|` inner Glauber updates on `S` at the magnetized fields.
    /// Biased at finite length.
    InnerGlauber { sweeps: usize },
}

#[derive(Debug, Clone)]
pub struct DynamicsSpec {
    pub kind: DynamicsKind,
    pub system: TwoSpinSystem,
    pub pin: Pinning,
    pub field_mode: FieldMode,
}

impl DynamicsSpec {
    pub fn new(kind: DynamicsKind, system: TwoSpinSystem) -> Self {
        Self { kind, system, pin: Pinning::empty(), field_mode: FieldMode::Exact }
    }

    pub fn with_pin(mut self, pin: Pinning) -> Self {
        self.pin = pin;
        self
    }

    pub fn free_vertices(&self) -> Vec<usize> {
        (0..self.system.n()).filter(|&v| self.pin.get(v).is_none()).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub step: u64,
    /// Vertices whose spin changed.
    pub changed: usize,
    /// Size of the resampled set.
    pub block: usize,
}

#[derive(Debug, Clone)]
pub struct ChainState {
    system: TwoSpinSystem,
    pin: Pinning,
    free: Vec<usize>,
    config: Configuration,
    steps: u64,
    rng: ChaCha8Rng,
    field_mode: FieldMode,
}

impl ChainState {
    pub fn new(spec: &DynamicsSpec, start: Configuration, seed: u64) -> Result<Self> {
        let system = spec.system.clone();
        if start.len() != system.n() {
            return Err(Error::Dimension { expected: system.n(), got: start.len() });
        }
        if !system.is_feasible(&start) || !spec.pin.agrees(&start) {
            return Err(Error::Infeasible);
        }
        let free = spec.free_vertices();
        spec.kind.validate(free.len())?;
        Ok(Self {
            system,
            pin: spec.pin.clone(),
            free,
            config: start,
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            field_mode: spec.field_mode,
        })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn system(&self) -> &TwoSpinSystem {
        &self.system
    }

    pub fn pinning(&self) -> &Pinning {
        &self.pin
    }

    pub fn step(&mut self, kind: &DynamicsKind) -> Result<StepRecord> {
        match *kind {
            DynamicsKind::Glauber => Ok(self.glauber_step()),
            DynamicsKind::Block { ell } => self.block_step(ell),
            DynamicsKind::Field { theta } => self.field_step(theta),
            DynamicsKind::ProjectedBlock { k, ell } => self.projected_block_step(k, ell),
        }
    }

    pub fn glauber_step(&mut self) -> StepRecord {
        self.steps += 1;
        if self.free.is_empty() {
            return StepRecord { step: self.steps, changed: 0, block: 0 };
        }
        let v = self.free[self.rng.gen_range(0..self.free.len())];
        let p = self.system.local_plus_prob(&self.config, v, 1.0);
        let u: f64 = self.rng.gen();
        let s = if u < p { 1 } else { -1 };
        let changed = usize::from(self.config.get(v) != s);
        self.config.set(v, s);
        StepRecord { step: self.steps, changed, block: 1 }
    }

    pub fn block_step(&mut self, ell: usize) -> Result<StepRecord> {
        if ell == 0 || ell > self.free.len() {
            return param(format!("ell must lie in [1, {}], got {ell}", self.free.len()));
        }
        self.steps += 1;
        let mut block: Vec<usize> =
            rand::seq::index::sample(&mut self.rng, self.free.len(), ell).into_iter().map(|i| self.free[i]).collect();
        block.sort_unstable();
        let u: f64 = self.rng.gen();
        let changed = resample_block(&self.system, &mut self.config, &block, None, u)?;
        Ok(StepRecord { step: self.steps, changed, block: ell })
    }

    pub fn field_step(&mut self, theta: f64) -> Result<StepRecord> {
        if !(theta > 0.0 && theta < 1.0) {
            return param("theta must lie in (0,1)");
        }
        self.steps += 1;
        let mut block = Vec::new();
        for &v in &self.free {
            // Every −1 vertex joins; a +1 vertex joins with probability θ.
            if self.config.get(v) == -1 || self.rng.gen::<f64>() < theta {
                block.push(v);
            }
        }
        let mult = vec![theta; self.system.n()];
        let changed = match self.field_mode {
            FieldMode::Exact => {
                let u: f64 = self.rng.gen();
                resample_block(&self.system, &mut self.config, &block, Some(&mult), u)?
            }
            FieldMode::InnerGlauber { sweeps } => {
                let before = self.config.clone();
                if !block.is_empty() {
                    for _ in 0..sweeps * block.len() {
                        let v = block[self.rng.gen_range(0..block.len())];
                        let p = self.system.local_plus_prob(&self.config, v, theta);
                        let s = if self.rng.gen::<f64>() < p { 1 } else { -1 };
                        self.config.set(v, s);
                    }
                }
                (0..self.system.n()).filter(|&v| before.get(v) != self.config.get(v)).count()
            }
        };
        Ok(StepRecord { step: self.steps, changed, block: block.len() })
    }

    pub fn projected_block_step(&mut self, k: usize, ell: usize) -> Result<StepRecord> {
        let n = self.free.len();
        if k == 0 || ell == 0 || ell > k * n {
            return param(format!("projected block needs k >= 1 and 1 <= ell <= kn, got k={k}, ell={ell}"));
        }
        self.steps += 1;
        let a = HyperGeoParams::new(n, k, ell)?.sample(&mut self.rng);
        let mut mult = vec![1.0; self.system.n()];
        for (i, &v) in self.free.iter().enumerate() {
            mult[v] = a[i] as f64 / k as f64;
        }
        let mut block = Vec::new();
        for &v in &self.free {
            if self.config.get(v) == -1 || self.rng.gen::<f64>() < mult[v] {
                block.push(v);
            }
        }
        let u: f64 = self.rng.gen();
        let changed = resample_block(&self.system, &mut self.config, &block, Some(&mult), u)?;
        Ok(StepRecord { step: self.steps, changed, block: block.len() })
    }
}

/// Resamples `block` (sorted) from its exact conditional given the rest of
/// `config`, with activities `λ_v · mult_v` on the block. Assignments are
/// ordered lexicographically (first block vertex most significant) and `u`
/// selects one by inverse CDF. Returns the number of changed vertices.
fn resample_block(
    system: &TwoSpinSystem,
    config: &mut Configuration,
    block: &[usize],
    mult: Option<&[f64]>,
    u: f64,
) -> Result<usize> {
    let b = block.len();
    if b == 0 {
        return Ok(0);
    }
    if b > BLOCK_CAP {
        return Err(Error::Cap(format!("block of size {b} exceeds exact-resampling cap {BLOCK_CAP}")));
    }
    let g = system.graph();
    let n = system.n();
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in block.iter().enumerate() {
        pos[v] = i;
    }
    let lb = system.beta().ln();
    let lg = system.gamma().ln();
    let lf: Vec<f64> = block
        .iter()
        .map(|&v| (system.lambda(v) * mult.map_or(1.0, |m| m[v])).ln())
        .collect();
    // Assignment `a`: bit (b-1-i) set iff block[i] = +1.
    let spin = |a: usize, i: usize| a >> (b - 1 - i) & 1 == 1;
    let mut logs = Vec::with_capacity(1 << b);
    for a in 0..(1usize << b) {
        let mut s = 0.0;
        for (i, &v) in block.iter().enumerate() {
            let sv = spin(a, i);
            if sv {
                s += lf[i];
            }
            for &w in g.neighbors(v) {
                let sw = if pos[w] != usize::MAX {
                    if w < v {
                        continue;
                    }
                    spin(a, pos[w])
                } else {
                    config.get(w) == 1
                };
                match (sv, sw) {
                    (true, true) => s += lb,
                    (false, false) => s += lg,
                    _ => {}
                }
            }
        }
        logs.push(s);
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut pick = logs.iter().rposition(|l| *l > f64::NEG_INFINITY).expect("some assignment is feasible");
    for (a, l) in logs.iter().enumerate() {
        acc += (l - max).exp();
        if target < acc {
            pick = a;
            break;
        }
    }
    let mut changed = 0;
    for (i, &v) in block.iter().enumerate() {
        let s = if spin(pick, i) { 1 } else { -1 };
        if config.get(v) != s {
            changed += 1;
        }
        config.set(v, s);
    }
    Ok(changed)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub configs: Vec<(u64, Configuration)>,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    /// CSV with columns `step,spins`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["step", "spins"]).map_err(csv_err)?;
        for (t, c) in &self.configs {
            w.write_record([t.to_string(), c.to_string()]).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Empirical `Pr[σ_v = +1]` over the recorded configurations.
    pub fn empirical_marginals(&self) -> Vec<f64> {
        let Some((_, first)) = self.configs.first() else { return Vec::new() };
        let mut acc = vec![0.0; first.len()];
        for (_, c) in &self.configs {
            for (v, a) in acc.iter_mut().enumerate() {
                if c.get(v) == 1 {
                    *a += 1.0;
                }
            }
        }
        let m = self.configs.len() as f64;
        acc.iter().map(|a| a / m).collect()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Runs `steps` steps from `start`. With `thin = t`, records every t-th
/// configuration (the start is always recorded).
pub fn run_chain(spec: &DynamicsSpec, start: Configuration, steps: u64, seed: u64, thin: u64) -> Result<Trajectory> {
    let thin = thin.max(1);
    let mut state = ChainState::new(spec, start, seed)?;
    let mut configs = vec![(0, state.config().clone())];
    let mut records = Vec::new();
    for _ in 0..steps {
        let rec = state.step(&spec.kind)?;
        if rec.step % thin == 0 {
            configs.push((rec.step, state.config().clone()));
        }
        records.push(rec);
    }
    Ok(Trajectory { configs, records })
}

/// Visit counts per bitmask state over `steps` steps (the start excluded).
pub fn visit_counts(spec: &DynamicsSpec, start: Configuration, steps: u64, seed: u64) -> Result<Vec<u64>> {
    let n = spec.system.n();
    if n > 20 {
        return Err(Error::Cap("visit counting supports n <= 20".into()));
    }
    let mut counts = vec![0u64; 1 << n];
    let mut state = ChainState::new(spec, start, seed)?;
    for _ in 0..steps {
        state.step(&spec.kind)?;
        counts[state.config().to_mask()? as usize] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn edge_spec(kind: DynamicsKind) -> DynamicsSpec {
        DynamicsSpec::new(kind, TwoSpinSystem::hardcore(Graph::new(2, &[(0, 1)]).unwrap(), 1.0).unwrap())
    }

    #[test]
    fn zero_steps_returns_start() {
        let spec = edge_spec(DynamicsKind::Glauber);
        let t = run_chain(&spec, Configuration::all_minus(2), 0, 1, 1).unwrap();
        assert_eq!(t.configs.len(), 1);
    }

    #[test]
    fn seeded_runs_repeat() {
        for kind in [
            DynamicsKind::Glauber,
            DynamicsKind::Block { ell: 2 },
            DynamicsKind::Field { theta: 0.3 },
            DynamicsKind::ProjectedBlock { k: 3, ell: 3 },
        ] {
            let spec = edge_spec(kind);
            let a = run_chain(&spec, Configuration::all_minus(2), 200, 42, 1).unwrap();
            let b = run_chain(&spec, Configuration::all_minus(2), 200, 42, 1).unwrap();
            assert_eq!(a.configs, b.configs);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let spec = edge_spec(DynamicsKind::Field { theta: 1.5 });
        assert!(ChainState::new(&spec, Configuration::all_minus(2), 0).is_err());
        let spec = edge_spec(DynamicsKind::Glauber);
        assert!(ChainState::new(&spec, Configuration::parse("++").unwrap(), 0).is_err());
        let spec = edge_spec(DynamicsKind::Block { ell: 3 });
        assert!(ChainState::new(&spec, Configuration::all_minus(2), 0).is_err());
    }

    #[test]
    fn pinned_vertices_never_move() {
        let g = Graph::path(4).unwrap();
        let spec = DynamicsSpec::new(DynamicsKind::Field { theta: 0.4 }, TwoSpinSystem::hardcore(g, 2.0).unwrap())
            .with_pin(Pinning::new(&[(1, 1)]).unwrap());
        let mut st = ChainState::new(&spec, Configuration::parse("-+--").unwrap(), 3).unwrap();
        for kind in [DynamicsKind::Glauber, DynamicsKind::Block { ell: 2 }, DynamicsKind::Field { theta: 0.4 }] {
            for _ in 0..500 {
                st.step(&kind).unwrap();
                assert_eq!(st.config().get(1), 1);
                assert!(st.system().is_feasible(st.config()));
            }
        }
    }
}
