//! Breadth-first exploration of the reachable states modulo congruence.

use std::collections::{HashMap, VecDeque};

use super::{terminal_outcome, Mode, Outcome, RunConfig, SchedulerError};
use crate::congruence::{canonical_network, stable_hash};
use crate::engine::{self, enabled_redexes, EnergyConfig, Redex};
use crate::network::Network;
use crate::syntax::pretty;

/// Canonical term plus the multiset of log entries, which the calculus does
/// not see but the predicates do.
pub type StateKey = String;

pub fn state_key(net: &Network, energy: &EnergyConfig) -> StateKey {
    let mut log: Vec<String> = net
        .log
        .iter()
        .map(|e| format!("{}{}", e.intrinsic, pretty::values(&e.args)))
        .collect();
    log.sort();
    let mut key = canonical_network(net, energy);
    key.push_str("\nlog ");
    key.push_str(&log.join(" "));
    key
}

#[derive(Clone, Debug)]
pub struct ExploreReport {
    pub states: Vec<Network>,
    /// Predecessor and the redex leading here; `None` for the initial state.
    pub parents: Vec<Option<(usize, Redex)>>,
    pub depths: Vec<usize>,
    /// States without productive redexes, with their classification.
    pub terminals: Vec<(usize, Outcome)>,
    /// Some state at the depth bound still had successors.
    pub depth_limited: bool,
    /// The state bound stopped the search.
    pub state_limited: bool,
    /// Distinct keys that shared a 64-bit hash.
    pub collisions: usize,
}

impl ExploreReport {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// The whole reachable space within the bounds was covered.
    pub fn complete(&self) -> bool {
        !(self.depth_limited || self.state_limited)
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.state_limited.then_some(Outcome::StateLimit)
    }

    pub fn terminal_states(&self) -> impl Iterator<Item = &Network> {
        self.terminals.iter().map(|(i, _)| &self.states[*i])
    }

    pub fn all_terminals(&self, pred: impl Fn(&Network) -> bool) -> bool {
        self.terminal_states().all(pred)
    }

    pub fn any_terminal(&self, pred: impl Fn(&Network) -> bool) -> bool {
        self.terminal_states().any(pred)
    }

    /// Redexes leading from the initial state to state `i`.
    pub fn path(&self, mut i: usize) -> Vec<Redex> {
        let mut out = Vec::new();
        while let Some((p, r)) = &self.parents[i] {
            out.push(r.clone());
            i = *p;
        }
        out.reverse();
        out
    }
}

/// Explores every interleaving. Stutters are self-loops and are skipped.
pub fn explore(net: &Network, cfg: &RunConfig) -> Result<ExploreReport, SchedulerError> {
    cfg.validate()?;
    let Mode::Exhaustive { max_depth, max_states } = cfg.mode else {
        return Err(SchedulerError::Config("explore needs exhaustive mode".into()));
    };
    let energy = cfg.config.energy;
    let mut report = ExploreReport {
        states: vec![net.clone()],
        parents: vec![None],
        depths: vec![0],
        terminals: Vec::new(),
        depth_limited: false,
        state_limited: false,
        collisions: 0,
    };
    let mut keys: Vec<StateKey> = vec![state_key(net, &energy)];
    let mut index: HashMap<u64, Vec<usize>> = HashMap::new();
    index.entry(stable_hash(keys[0].as_bytes())).or_default().push(0);
    let mut queue = VecDeque::from([0usize]);

    while let Some(i) = queue.pop_front() {
        let enabled = enabled_redexes(&report.states[i], &cfg.config)?;
        if let Some(o) = terminal_outcome(&report.states[i], &enabled) {
            report.terminals.push((i, o));
            continue;
        }
        if report.depths[i] >= max_depth {
            report.depth_limited = true;
            continue;
        }
        for r in enabled.into_iter().filter(|r| r.rule.is_productive()) {
            let mut next = report.states[i].clone();
            engine::step(&mut next, &r, &cfg.config)?;
            let key = state_key(&next, &energy);
            let bucket = index.entry(stable_hash(key.as_bytes())).or_default();
            if bucket.iter().any(|&j| keys[j] == key) {
                continue;
            }
            if !bucket.is_empty() {
                report.collisions += 1;
            }
            if report.states.len() >= max_states {
                report.state_limited = true;
                return Ok(report);
            }
            let j = report.states.len();
            bucket.push(j);
            keys.push(key);
            report.states.push(next);
            report.parents.push(Some((i, r)));
            report.depths.push(report.depths[i] + 1);
            queue.push_back(j);
        }
    }
    Ok(report)
}
