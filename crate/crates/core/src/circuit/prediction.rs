use rayon::prelude::*;

use super::encoders::{build_u_f, build_u_lin, FeatureCircuit};
use super::oracle::{DataOracle, ORACLE_SEED};
use super::CircuitDims;
use crate::block_encoding::{log_factor, BlockEncoding, CostEstimate, MIN_SUCCESS_PROBABILITY};
use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::ngrc::FeatureConfig;
use crate::qsvt::encoded_spectrum;
use crate::sim::{Circuit, SparseState};
use crate::state::StateVector;

/// Qubit limit of the recursive circuit's register accounting.
pub const MAX_ITERATIVE_QUBITS: usize = 128;

/// Post-selected outputs of the prediction circuit, one per input index.
#[derive(Debug, Clone)]
pub struct PredictionOutput {
    pub states: Vec<StateVector>,
    pub probabilities: Vec<f64>,
    pub cost: CostEstimate,
}

/// Runs `U_W . (I (x) U^f)` on `|0>^a |0>^s |k>` for each index `k`, with the
/// feature register in the low qubits of the encoding's system register and
/// the index register reset to `|0>` before `U_W`. Returns the renormalized
/// post-selected block rows and the success probabilities.
fn run_circuit(be_w: &BlockEncoding, u_f: &FeatureCircuit, count: usize) -> Result<Vec<(StateVector, f64)>> {
    let (a, s) = (be_w.n_ancilla(), be_w.system_qubits());
    let (f, t) = (u_f.feature_qubits, u_f.index_qubits);
    if f > s {
        return Err(Error::DimensionMismatch(format!(
            "feature register of {f} qubits exceeds the {s}-qubit system register of U_W"
        )));
    }
    let n = a + s + t;
    let mut prep = Circuit::new(n);
    let map: Vec<usize> = (a + s - f..a + s).chain(a + s..n).collect();
    prep.append_mapped(&u_f.circuit, &map)?;
    let mut apply_w = Circuit::new(n);
    apply_w.append_mapped(be_w.circuit(), &(0..a + s).collect::<Vec<_>>())?;
    let rows = be_w.block_dims().0;
    let ancillas: Vec<(usize, bool)> = (0..a).map(|q| (q, false)).collect();

    (0..count)
        .into_par_iter()
        .map(|k| {
            let mut state = SparseState::basis(n, k);
            prep.apply(&mut state)?;
            let mut reset = Circuit::new(n);
            for bit in 0..t {
                if (k >> (t - 1 - bit)) & 1 == 1 {
                    reset.pauli_x("index reset", a + s + bit)?;
                }
            }
            reset.apply(&mut state)?;
            apply_w.apply(&mut state)?;
            let probability = state.project(&ancillas);
            if probability < MIN_SUCCESS_PROBABILITY {
                return Err(Error::DegeneratePostSelection {
                    probability,
                    threshold: MIN_SUCCESS_PROBABILITY,
                });
            }
            let mut out = state.register_amplitudes(a, s);
            out.truncate(rows);
            Ok((StateVector::normalized(out)?, probability))
        })
        .collect()
}

/// Predictions `W |x_k> / |W |x_k>|` for every index covered by the oracles,
/// where `|x_k>` is prepared by `U^f` built from `oracles_tilde`
/// (ordered by delay) at degree `p`.
///
/// Requires `be_w.epsilon <= delta |W| / (4 kappa_W)`. The cost instantiates
/// `kappa kappa_W log(kappa_W/delta) T_W + kappa_W T_O`.
pub fn prediction_circuit(
    be_w: &BlockEncoding,
    oracles_tilde: &[DataOracle],
    p: usize,
    dims: &CircuitDims,
    delta: f64,
    kappa: f64,
) -> Result<PredictionOutput> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    let u_lin = build_u_lin(oracles_tilde, oracles_tilde.len())?;
    let u_f = build_u_f(&u_lin, p)?;
    if u_f.feature_qubits > dims.n_reg {
        return Err(Error::DimensionMismatch(format!(
            "{} feature qubits exceed the register width {}",
            u_f.feature_qubits, dims.n_reg
        )));
    }
    let spec = encoded_spectrum(be_w)?;
    let (norm_w, kappa_w) = (spec.norm, spec.kappa);
    let bound = delta * norm_w / (4.0 * kappa_w);
    if be_w.epsilon() > bound {
        return Err(Error::precondition(
            "prediction requires delta_W <= delta |W| / (4 kappa_W)",
            format!("delta_W = {:e}, bound = {bound:e}", be_w.epsilon()),
        ));
    }
    let results = run_circuit(be_w, &u_f, oracles_tilde[0].count())?;
    let (states, probabilities) = results.into_iter().unzip();

    let t_w = be_w.queries().max(1.0);
    let t_o = u_f.oracle_calls as f64;
    let factor = kappa * kappa_w * log_factor(kappa_w / delta);
    let cost = CostEstimate::new(
        "prediction",
        "kappa kappa_W log(kappa_W/delta) T_W + kappa_W T_O~",
        "T_W, T_O~",
        factor,
        factor * t_w + kappa_w * t_o,
    )
    .with("kappa", kappa)
    .with("kappa_W", kappa_w)
    .with("norm_W", norm_w)
    .with("delta", delta)
    .with("T_W", t_w)
    .with("T_O~", t_o)
    .with("w_prime", dims.w_prime as f64);
    cost.validate()?;
    Ok(PredictionOutput {
        states,
        probabilities,
        cost,
    })
}

/// Modifies a level's prediction before later levels consume it.
pub type PerturbationHook<'a> = dyn Fn(usize, StateVector) -> Result<StateVector> + Sync + 'a;

#[derive(Debug, Clone)]
pub struct IterativeOutput {
    /// Level-`j` prediction at index `j - 1`.
    pub predictions: TimeSeries,
    pub probabilities: Vec<f64>,
    /// `w' + d + 1 + k (d + 3)`.
    pub total_qubits: usize,
}

/// Register count of the recursive circuit for `k` levels.
pub fn iterative_qubits(dims: &CircuitDims, k: usize) -> usize {
    dims.w_prime + dims.d + 1 + k * (dims.d + 3)
}

/// Recursive prediction over `k_levels` levels.
///
/// Level `j` loads its delay states from the outputs of the previous levels
/// (or from the last `(m-1) delta + 1` seed states) and applies one prediction
/// circuit. Each level's ancillas and garbage registers are disjoint from the
/// others and post-selected independently, so the post-selected output equals
/// running the levels one after another with renormalized states; that is how
/// it is simulated. `hook` may perturb each level's output.
pub fn iterative_circuit(
    be_w: &BlockEncoding,
    seed_oracle: &DataOracle,
    cfg: &FeatureConfig,
    dims: &CircuitDims,
    k_levels: usize,
    hook: Option<&PerturbationHook<'_>>,
) -> Result<IterativeOutput> {
    if k_levels == 0 {
        return Err(Error::InvalidArgument("k_levels must be at least 1".into()));
    }
    let total_qubits = iterative_qubits(dims, k_levels);
    if total_qubits > MAX_ITERATIVE_QUBITS {
        return Err(Error::RegisterBudget {
            required: total_qubits,
            limit: MAX_ITERATIVE_QUBITS,
        });
    }
    let needed = cfg.history() + 1;
    let seed = seed_oracle.states();
    if seed.len() < needed {
        return Err(Error::InvalidArgument(format!(
            "seed oracle holds {} states, the delay embedding needs {needed}",
            seed.len()
        )));
    }
    seed_oracle.record_call();
    let mut history: Vec<StateVector> = seed[seed.len() - needed..].to_vec();
    let mut states = Vec::with_capacity(k_levels);
    let mut probabilities = Vec::with_capacity(k_levels);
    for level in 1..=k_levels {
        let newest = history.len() - 1;
        let oracles = (0..cfg.m)
            .map(|j| {
                let lag = (j * cfg.delta) as i64;
                DataOracle::from_states(vec![history[newest - j * cfg.delta].clone()], -lag, ORACLE_SEED)
            })
            .collect::<Result<Vec<_>>>()?;
        let u_f = build_u_f(&build_u_lin(&oracles, cfg.m)?, cfg.p)?;
        let (mut out, probability) = run_circuit(be_w, &u_f, 1)?.remove(0);
        if let Some(h) = hook {
            out = h(level, out)?;
        }
        history.remove(0);
        history.push(out.clone());
        states.push(out);
        probabilities.push(probability);
    }
    let mut predictions = TimeSeries::new(states, 0.0, 0, "iterative circuit")?;
    predictions.start_step = 1;
    predictions.burn_in = 0;
    Ok(IterativeOutput {
        predictions,
        probabilities,
        total_qubits,
    })
}
