//! Cross-agent personalization: aggregation matrices and model blending.
//!
//! Agent `i`'s personalized model is `W_i = sum_j alpha[i][j] W_j`. The rows of
//! `alpha` come from one of four rules: uniform (FedAvg), environment-feature
//! similarity, model-weight similarity, or a softmax over each model's measured
//! reward in agent `i`'s own environment.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::agents::{
    evaluate_policy, pg_train, ActionCodec, GreedyController, PgTrainerConfig, SliceTask,
};
use crate::channel::{db_to_linear, prb_capacity};
use crate::env::{EnvConfig, SliceEnv};
use crate::exec::Executor;
use crate::nn::PolicyModel;
use crate::reward::RewardFn;
use crate::rng::{indexed_seed, indexed_substream};
use crate::{Error, Result};

const ROW_TOL: f64 = 1e-9;

/// Static description of an environment: `[d_max_ms, epsilon, users,
/// mean per-PRB capacity in bits, mean packets per slot]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvFeatureVector {
    pub d_max_ms: f64,
    pub epsilon: f64,
    pub k_tilde: f64,
    pub c_tilde: f64,
    pub t_tilde: f64,
}

impl EnvFeatureVector {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.d_max_ms,
            self.epsilon,
            self.k_tilde,
            self.c_tilde,
            self.t_tilde,
        ]
    }

    /// Features of a config. Capacity is the exact Rayleigh-fading
    /// expectation of the CQI-quantized per-PRB capacity, averaged over users.
    pub fn from_config(cfg: &EnvConfig) -> Self {
        let th = cfg.cqi.thresholds_db();
        let eff = cfg.cqi.efficiencies();
        let mut cap_sum = 0.0;
        for u in &cfg.users {
            let mean_snr =
                cfg.radio.tx_power_watts * db_to_linear(u.large_scale_db) / cfg.radio.noise_watts;
            // P(snr >= t) = exp(-t / mean) for exponentially distributed power.
            let tail = |i: usize| (-db_to_linear(th[i]) / mean_snr).exp();
            for (i, &e) in eff.iter().enumerate().take(th.len()) {
                let p = tail(i) - if i + 1 < th.len() { tail(i + 1) } else { 0.0 };
                cap_sum += p * f64::from(prb_capacity(&cfg.radio, e));
            }
        }
        let k = cfg.users.len() as f64;
        EnvFeatureVector {
            d_max_ms: f64::from(cfg.qos.d_max_ttis) * cfg.radio.tti_seconds * 1e3,
            epsilon: cfg.qos.epsilon,
            k_tilde: k,
            c_tilde: if k > 0.0 { cap_sum / k } else { 0.0 },
            t_tilde: cfg.mean_arrivals_per_slot(),
        }
    }
}

/// Per-feature kernel temperatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaVector(pub [f64; 5]);

impl SigmaVector {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().all(|s| *s > 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(
                "personalization.sigma",
                "must be strictly positive",
            ))
        }
    }

    /// `scale` times each feature's population variance across agents
    /// (floored so constant features stay well defined).
    pub fn from_spread(features: &[EnvFeatureVector], scale: f64) -> Self {
        let n = features.len().max(1) as f64;
        let mut out = [1.0; 5];
        for (m, o) in out.iter_mut().enumerate() {
            let mu = features.iter().map(|f| f.as_array()[m]).sum::<f64>() / n;
            let var = features
                .iter()
                .map(|f| (f.as_array()[m] - mu).powi(2))
                .sum::<f64>()
                / n;
            *o = (scale * var).max(1e-12);
        }
        SigmaVector(out)
    }
}

/// How distances become coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelSign {
    /// `exp(-d / t)`: nearer agents weigh more.
    #[default]
    Similarity,
    /// Distances used with a positive exponent (features) or directly
    /// (weights): farther agents weigh more. Kept for ablation.
    Printed,
}

/// Row-stochastic `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationMatrix {
    n: usize,
    data: Vec<f64>,
}

impl AggregationMatrix {
    /// Normalizes each row of non-negative weights.
    pub fn from_weights(n: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                actual: data.len(),
            });
        }
        for row in data.chunks_mut(n.max(1)) {
            let s: f64 = row.iter().sum();
            if !(s > 0.0 && s.is_finite()) || row.iter().any(|x| *x < 0.0) {
                return Err(Error::UnnormalizedRow { sum: s });
            }
            row.iter_mut().for_each(|x| *x /= s);
        }
        let m = AggregationMatrix { n, data };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for r in 0..self.n {
            check_row(self.row(r))?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1))
    }
}

fn check_row(row: &[f64]) -> Result<()> {
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > ROW_TOL || row.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(Error::UnnormalizedRow { sum: s });
    }
    Ok(())
}

pub fn alpha_fedavg(n: usize) -> Result<AggregationMatrix> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one agent"));
    }
    AggregationMatrix::from_weights(n, vec![1.0; n * n])
}

/// `alpha[i][j]` proportional to `sum_m exp(-(f_i^m - f_j^m)^2 / sigma_m)`.
pub fn alpha_feature(
    features: &[EnvFeatureVector],
    sigma: &SigmaVector,
    sign: KernelSign,
) -> Result<AggregationMatrix> {
    sigma.validate()?;
    let n = features.len();
    if n == 0 {
        return Err(Error::invalid("features", "need at least one agent"));
    }
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        let fi = features[i].as_array();
        for j in 0..n {
            let fj = features[j].as_array();
            w[i * n + j] = (0..5)
                .map(|m| {
                    let d = (fi[m] - fj[m]).powi(2) / sigma.0[m];
                    match sign {
                        KernelSign::Similarity => (-d).exp(),
                        KernelSign::Printed => d.min(700.0).exp(),
                    }
                })
                .sum();
        }
    }
    AggregationMatrix::from_weights(n, w)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `alpha[i][j]` proportional to `exp(-|W_i - W_j|^2 / tau)` with `tau` the
/// median pairwise squared distance.
pub fn alpha_model_weight(models: &[PolicyModel], sign: KernelSign) -> Result<AggregationMatrix> {
    let n = models.len();
    if n == 0 {
        return Err(Error::invalid("models", "need at least one agent"));
    }
    if models.iter().any(|m| m.arch() != models[0].arch()) {
        return Err(Error::ArchitectureMismatch);
    }
    let mut d = vec![0.0; n * n];
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let v = sq_dist(models[i].params(), models[j].params());
            d[i * n + j] = v;
            d[j * n + i] = v;
            pairs.push(v);
        }
    }
    let w = match sign {
        KernelSign::Similarity => {
            pairs.sort_by(f64::total_cmp);
            let tau = if pairs.is_empty() {
                1.0
            } else {
                let k = pairs.len();
                let med = if k % 2 == 1 {
                    pairs[k / 2]
                } else {
                    0.5 * (pairs[k / 2 - 1] + pairs[k / 2])
                };
                if med > 0.0 {
                    med
                } else {
                    1.0
                }
            };
            d.iter().map(|x| (-x / tau).exp()).collect()
        }
        KernelSign::Printed => {
            // Plain L2 distances; rows with no spread fall back to uniform.
            let mut w: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
            for row in w.chunks_mut(n) {
                if row.iter().sum::<f64>() <= 0.0 {
                    row.iter_mut().for_each(|x| *x = 1.0);
                }
            }
            w
        }
    };
    AggregationMatrix::from_weights(n, w)
}

/// Row-wise softmax of `beta * r_hat`.
pub fn alpha_reward(table: &RewardTable, beta: f64) -> Result<AggregationMatrix> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(
            "personalization.beta",
            "must be finite and >= 0",
        ));
    }
    let n = table.r_hat.len();
    if n == 0 || table.r_hat.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("r_hat", "must be a non-empty square matrix"));
    }
    let mut w = Vec::with_capacity(n * n);
    for row in &table.r_hat {
        let m = row
            .iter()
            .map(|r| beta * r)
            .fold(f64::NEG_INFINITY, f64::max);
        w.extend(row.iter().map(|r| (beta * r - m).exp()));
    }
    AggregationMatrix::from_weights(n, w)
}

/// Convex combination of the models' flat parameter vectors.
pub fn blend_models(models: &[PolicyModel], alpha_row: &[f64]) -> Result<PolicyModel> {
    if models.is_empty() || models.len() != alpha_row.len() {
        return Err(Error::Dimension {
            expected: models.len(),
            actual: alpha_row.len(),
        });
    }
    if models.iter().any(|m| m.arch() != models[0].arch()) {
        return Err(Error::ArchitectureMismatch);
    }
    check_row(alpha_row)?;
    let mut out = vec![0.0; models[0].params().len()];
    for (m, &a) in models.iter().zip(alpha_row) {
        if a == 0.0 {
            continue;
        }
        for (o, p) in out.iter_mut().zip(m.params()) {
            *o += a * p;
        }
    }
    // A one-hot row must reproduce its source exactly.
    if let Some(k) = alpha_row.iter().position(|&a| a == 1.0) {
        return Ok(models[k].clone());
    }
    PolicyModel::from_params(models[0].arch().clone(), out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    /// `r_hat[i][j]`: mean reward of model `j` in environment `i`.
    pub r_hat: Vec<Vec<f64>>,
    pub t_episodes: u32,
}

/// One member of a personalization study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyEnv {
    pub cfg: EnvConfig,
    pub reward: RewardFn,
    pub codec: ActionCodec,
}

/// Mean per-slot reward of `model` acting greedily in `env` over
/// `t_episodes` fresh episodes. Episode seeds depend only on `seed` and the
/// episode index, so every model sees the same traffic.
pub fn evaluate_episodes(
    model: &PolicyModel,
    env: &StudyEnv,
    t_episodes: u32,
    episode_slots: u32,
    seed: u64,
) -> Result<f64> {
    let mut total = 0.0;
    for e in 0..t_episodes {
        let mut c = GreedyController {
            model,
            codec: &env.codec,
        };
        let r = evaluate_policy(
            &mut c,
            &env.cfg,
            indexed_seed(seed, "episode", u64::from(e)),
            episode_slots,
            &env.reward,
        )?;
        total += r.mean_reward;
    }
    Ok(total / f64::from(t_episodes.max(1)))
}

pub fn build_reward_table<E: Executor>(
    models: &[PolicyModel],
    envs: &[StudyEnv],
    t_episodes: u32,
    episode_slots: u32,
    seed: u64,
    exec: &E,
) -> Result<RewardTable> {
    let n = envs.len();
    if models.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: models.len(),
        });
    }
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let vals: Vec<Result<f64>> = exec.map(cells, |(i, j)| {
        evaluate_episodes(
            &models[j],
            &envs[i],
            t_episodes,
            episode_slots,
            indexed_seed(seed, "table-env", i as u64),
        )
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(RewardTable {
        r_hat: vals.chunks(n).map(<[f64]>::to_vec).collect(),
        t_episodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    FedAvg,
    Feature,
    ModelWeight,
    Reward,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::FedAvg,
        Method::Feature,
        Method::ModelWeight,
        Method::Reward,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::FedAvg => "fedavg",
            Method::Feature => "feature",
            Method::ModelWeight => "model_weight",
            Method::Reward => "reward",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub seed: u64,
    pub trainer: PgTrainerConfig,
    pub train_slots: u64,
    pub hidden: Vec<usize>,
    pub t_episodes: u32,
    pub episode_slots: u32,
    pub beta: f64,
    /// Feature kernel temperatures as a multiple of each feature's variance.
    pub sigma_scale: f64,
    pub kernel_sign: KernelSign,
    pub methods: Vec<Method>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            seed: 0,
            trainer: PgTrainerConfig::desk(),
            train_slots: 20_000,
            hidden: vec![128, 64],
            t_episodes: 10,
            episode_slots: 200,
            beta: 3.0,
            sigma_scale: 1.0,
            kernel_sign: KernelSign::Similarity,
            methods: Method::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub alpha: AggregationMatrix,
    /// Personalized model `i` evaluated in environment `i`.
    pub per_env: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub features: Vec<EnvFeatureVector>,
    pub table: RewardTable,
    pub local: Vec<f64>,
    pub local_mean: f64,
    pub methods: Vec<MethodResult>,
    /// Training diagnostics per local model: trailing mean satisfaction.
    pub local_train_p_sat: Vec<f64>,
}

impl StudyReport {
    pub fn method(&self, m: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|r| r.method == m)
    }
}

/// Train one local model per environment from a shared initialization.
pub fn train_local_models<E: Executor>(
    envs: &[StudyEnv],
    cfg: &StudyConfig,
    exec: &E,
) -> Result<Vec<(PolicyModel, f64)>> {
    let first = envs
        .first()
        .ok_or_else(|| Error::invalid("suite", "empty"))?;
    let dim = first.cfg.observation_dim();
    let n_out = first.codec.len();
    if envs
        .iter()
        .any(|e| e.cfg.observation_dim() != dim || e.codec.len() != n_out)
    {
        return Err(Error::ArchitectureMismatch);
    }
    let arch = crate::nn::MlpArchitecture::new(dim, cfg.hidden.clone(), n_out)?;
    let init = PolicyModel::init(arch, &mut indexed_substream(cfg.seed, "init", 0));
    let jobs: Vec<usize> = (0..envs.len()).collect();
    exec.map(jobs, |i| {
        let e = &envs[i];
        let env = SliceEnv::new(e.cfg.clone(), indexed_seed(cfg.seed, "train-env", i as u64))?;
        let mut task = SliceTask::new(env, e.codec.clone(), e.reward);
        let mut rng = indexed_substream(cfg.seed, "agent", i as u64);
        let (m, log) = pg_train(
            &mut task,
            init.clone(),
            &cfg.trainer,
            cfg.train_slots,
            &mut rng,
        )?;
        let tail = log.len().clamp(1, 500);
        let p = log[log.len().saturating_sub(tail)..]
            .iter()
            .map(|r| r.metrics.p_sat)
            .sum::<f64>()
            / tail as f64;
        Ok((m, p))
    })
    .into_iter()
    .collect()
}

/// Personalize already-trained local models and score every method.
pub fn personalize<E: Executor>(
    envs: &[StudyEnv],
    models: &[PolicyModel],
    cfg: &StudyConfig,
    exec: &E,
) -> Result<(RewardTable, Vec<f64>, Vec<MethodResult>)> {
    let n = envs.len();
    let table = build_reward_table(
        models,
        envs,
        cfg.t_episodes,
        cfg.episode_slots,
        cfg.seed,
        exec,
    )?;
    let features: Vec<EnvFeatureVector> = envs
        .iter()
        .map(|e| EnvFeatureVector::from_config(&e.cfg))
        .collect();
    let score = |ms: Vec<PolicyModel>| -> Result<Vec<f64>> {
        let jobs: Vec<(usize, PolicyModel)> = ms.into_iter().enumerate().collect();
        exec.map(jobs, |(i, m)| {
            evaluate_episodes(
                &m,
                &envs[i],
                cfg.t_episodes,
                cfg.episode_slots,
                indexed_seed(cfg.seed, "study-env", i as u64),
            )
        })
        .into_iter()
        .collect()
    };
    let local = score(models.to_vec())?;
    let mut results = Vec::new();
    for &method in &cfg.methods {
        let alpha = match method {
            Method::FedAvg => alpha_fedavg(n)?,
            Method::Feature => alpha_feature(
                &features,
                &SigmaVector::from_spread(&features, cfg.sigma_scale),
                cfg.kernel_sign,
            )?,
            Method::ModelWeight => alpha_model_weight(models, cfg.kernel_sign)?,
            Method::Reward => alpha_reward(&table, cfg.beta)?,
        };
        let blended: Vec<PolicyModel> = alpha
            .rows()
            .map(|row| blend_models(models, row))
            .collect::<Result<_>>()?;
        let per_env = score(blended)?;
        let mean = per_env.iter().sum::<f64>() / n as f64;
        results.push(MethodResult {
            method,
            alpha,
            per_env,
            mean,
        });
    }
    Ok((table, local, results))
}

/// Train local models, personalize them by every configured method and
/// evaluate each personalized model in its own environment.
pub fn personalization_study<E: Executor>(
    envs: &[StudyEnv],
    cfg: &StudyConfig,
    exec: &E,
) -> Result<StudyReport> {
    if envs.len() < 2 {
        return Err(Error::invalid("suite", "need at least two environments"));
    }
    let trained = train_local_models(envs, cfg, exec)?;
    let (models, local_train_p_sat): (Vec<_>, Vec<_>) = trained.into_iter().unzip();
    let (table, local, methods) = personalize(envs, &models, cfg, exec)?;
    let local_mean = local.iter().sum::<f64>() / local.len() as f64;
    Ok(StudyReport {
        features: envs
            .iter()
            .map(|e| EnvFeatureVector::from_config(&e.cfg))
            .collect(),
        table,
        local,
        local_mean,
        methods,
        local_train_p_sat,
    })
}

/// Human-readable summary line per method.
pub fn summarize(report: &StudyReport, shift: f64) -> Vec<String> {
    let mut out = vec![alloc::format!(
        "local        {:.4}",
        report.local_mean + shift
    )];
    for m in &report.methods {
        out.push(alloc::format!(
            "{:<12} {:.4}",
            m.method.name(),
            m.mean + shift
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::MlpArchitecture;
    use crate::rng::substream;

    fn feat(d: f64, e: f64, k: f64, c: f64, t: f64) -> EnvFeatureVector {
        EnvFeatureVector {
            d_max_ms: d,
            epsilon: e,
            k_tilde: k,
            c_tilde: c,
            t_tilde: t,
        }
    }

    #[test]
    fn fedavg_examples() {
        assert_eq!(alpha_fedavg(1).unwrap().row(0), &[1.0]);
        let a = alpha_fedavg(4).unwrap();
        assert!(a.rows().all(|r| r.iter().all(|x| *x == 0.25)));
        assert!(alpha_fedavg(0).is_err());
    }

    #[test]
    fn reward_softmax_example() {
        let t = RewardTable {
            r_hat: vec![vec![-1.69, -4.39, -3.45]; 3],
            t_episodes: 10,
        };
        let a = alpha_reward(&t, 3.0).unwrap();
        for (x, y) in a.row(0).iter().zip([0.9945, 0.0003, 0.0052]) {
            assert!((x - y).abs() < 1e-3, "{x} vs {y}");
        }
        let u = alpha_reward(&t, 0.0).unwrap();
        assert!(u.row(1).iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn feature_kernel_limits() {
        let same = vec![feat(5.0, 0.1, 3.0, 500.0, 40.0); 3];
        let s = SigmaVector([1.0; 5]);
        let a = alpha_feature(&same, &s, KernelSign::Similarity).unwrap();
        assert!(a
            .rows()
            .all(|r| r.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12)));

        let distinct = vec![
            feat(5.0, 0.1, 2.0, 400.0, 30.0),
            feat(10.0, 0.3, 4.0, 600.0, 60.0),
        ];
        let a = alpha_feature(&distinct, &SigmaVector([1e-9; 5]), KernelSign::Similarity).unwrap();
        assert!((a.get(0, 0) - 1.0).abs() < 1e-12 && (a.get(1, 1) - 1.0).abs() < 1e-12);
        assert!(SigmaVector([0.0; 5]).validate().is_err());
    }

    #[test]
    fn model_weight_kernel() {
        let arch = MlpArchitecture::new(3, vec![4], 2).unwrap();
        let m = PolicyModel::init(arch.clone(), &mut substream(1, "m"));
        let a =
            alpha_model_weight(&[m.clone(), m.clone(), m.clone()], KernelSign::Similarity).unwrap();
        assert!(a
            .rows()
            .all(|r| r.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12)));
        let other = PolicyModel::zeros(MlpArchitecture::new(3, vec![5], 2).unwrap());
        assert_eq!(
            alpha_model_weight(&[m, other], KernelSign::Similarity),
            Err(Error::ArchitectureMismatch)
        );
    }

    #[test]
    fn blend_examples() {
        let arch = MlpArchitecture::new(2, vec![3], 2).unwrap();
        let a = PolicyModel::init(arch.clone(), &mut substream(1, "a"));
        let b = PolicyModel::init(arch.clone(), &mut substream(1, "b"));
        let ms = [a.clone(), b.clone()];
        assert_eq!(blend_models(&ms, &[1.0, 0.0]).unwrap(), a);
        let h = blend_models(&ms, &[0.5, 0.5]).unwrap();
        for ((x, y), z) in a.params().iter().zip(b.params()).zip(h.params()) {
            assert!((0.5 * (x + y) - z).abs() < 1e-15);
        }
        assert!(matches!(
            blend_models(&ms, &[0.7, 0.7]),
            Err(Error::UnnormalizedRow { .. })
        ));
        assert!(blend_models(&ms, &[1.0]).is_err());
    }

    #[test]
    fn capacity_feature_rises_with_snr() {
        let lo = EnvConfig::desk_env1();
        let mut hi = lo.clone();
        hi.users.iter_mut().for_each(|u| u.large_scale_db += 10.0);
        let (a, b) = (
            EnvFeatureVector::from_config(&lo),
            EnvFeatureVector::from_config(&hi),
        );
        assert!(b.c_tilde > a.c_tilde && b.c_tilde <= 999.0);
        assert_eq!(a.d_max_ms, 5.0);
    }
}
