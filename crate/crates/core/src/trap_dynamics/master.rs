use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::{DynamicsError, Illumination, RateModel, TrapState};

const MAX_STATES: usize = 5000;

/// Continuous-time Markov chain given as a list of transitions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkovChain {
    pub n_states: usize,
    /// `(from, to, rate)`.
    pub transitions: Vec<(usize, usize, f64)>,
}

impl MarkovChain {
    pub fn new(n_states: usize) -> Self {
        Self {
            n_states,
            transitions: Vec::new(),
        }
    }

    pub fn add(&mut self, from: usize, to: usize, rate: f64) {
        if rate > 0.0 && from != to {
            self.transitions.push((from, to, rate));
        }
    }

    /// The trap/donor chain under constant illumination, over the full
    /// state space of `template`.
    pub fn from_rates(
        rates: &RateModel,
        light: &Illumination,
        template: TrapState,
    ) -> Result<Self, DynamicsError> {
        let n = template.state_count();
        if n > MAX_STATES {
            return Err(DynamicsError::StateSpaceTooLarge(n));
        }
        let mut chain = Self::new(n);
        for i in 0..n {
            let s = template.from_index(i);
            let r = rates.rates(&s, light.wavelength, light.absorbed_rate);
            chain.add(
                i,
                s.with_trapped(s.n_trapped.wrapping_add(1)).index(),
                r.trap,
            );
            if s.n_trapped > 0 {
                chain.add(i, s.with_trapped(s.n_trapped - 1).index(), r.detrap);
            }
            chain.add(
                i,
                s.with_ionized(s.n_ionized.wrapping_add(1)).index(),
                r.ionize,
            );
        }
        Ok(chain)
    }

    pub fn steady_state(&self) -> Result<StationaryDistribution, DynamicsError> {
        if self.n_states > MAX_STATES {
            return Err(DynamicsError::StateSpaceTooLarge(self.n_states));
        }
        let mut graph = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.n_states).map(|_| graph.add_node(())).collect();
        for &(a, b, _) in &self.transitions {
            graph.update_edge(nodes[a], nodes[b], ());
        }
        let mut class_of = vec![0usize; self.n_states];
        let sccs = tarjan_scc(&graph);
        for (c, members) in sccs.iter().enumerate() {
            for m in members {
                class_of[m.index()] = c;
            }
        }
        let mut leaks = vec![false; sccs.len()];
        for &(a, b, _) in &self.transitions {
            if class_of[a] != class_of[b] {
                leaks[class_of[a]] = true;
            }
        }
        let mut classes = Vec::new();
        let mut distributions = Vec::new();
        for (c, members) in sccs.iter().enumerate() {
            if leaks[c] {
                continue;
            }
            let mut members: Vec<usize> = members.iter().map(|m| m.index()).collect();
            members.sort_unstable();
            distributions.push(self.solve_class(&members)?);
            classes.push(members);
        }
        let order = {
            let mut o: Vec<usize> = (0..classes.len()).collect();
            o.sort_by_key(|&i| classes[i][0]);
            o
        };
        let classes: Vec<_> = order.iter().map(|&i| classes[i].clone()).collect();
        let distributions: Vec<_> = order.iter().map(|&i| distributions[i].clone()).collect();
        if classes.len() > 1 {
            log::warn!(
                "chain has {} closed classes; reporting one stationary distribution per class",
                classes.len()
            );
        }
        Ok(StationaryDistribution {
            classes,
            distributions,
        })
    }

    fn solve_class(&self, members: &[usize]) -> Result<Vec<f64>, DynamicsError> {
        let k = members.len();
        let mut local = vec![usize::MAX; self.n_states];
        for (j, &m) in members.iter().enumerate() {
            local[m] = j;
        }
        // Rows of Qᵀ; the last is replaced by normalization.
        let mut a = DMatrix::<f64>::zeros(k, k);
        for &(from, to, rate) in &self.transitions {
            let (i, j) = (local[from], local[to]);
            if i == usize::MAX || j == usize::MAX {
                continue;
            }
            a[(j, i)] += rate;
            a[(i, i)] -= rate;
        }
        for j in 0..k {
            a[(k - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(k);
        b[k - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&b)
            .ok_or_else(|| DynamicsError::SingularChain(members.to_vec()))?;
        let mut full = vec![0.0; self.n_states];
        for (j, &m) in members.iter().enumerate() {
            full[m] = pi[j].max(0.0);
        }
        Ok(full)
    }
}

/// Stationary distributions of every closed communicating class.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub classes: Vec<Vec<usize>>,
    /// One full-length probability vector per class.
    pub distributions: Vec<Vec<f64>>,
}

impl StationaryDistribution {
    pub fn is_disconnected(&self) -> bool {
        self.classes.len() > 1
    }

    /// The distribution when the long-run behaviour is unique.
    pub fn unique(&self) -> Option<&[f64]> {
        match self.distributions.as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }
}

/// Stationary occupancy of the trap/donor chain under constant light.
pub fn master_equation_steady_state(
    rates: &RateModel,
    light: &Illumination,
    template: TrapState,
) -> Result<StationaryDistribution, DynamicsError> {
    MarkovChain::from_rates(rates, light, template)?.steady_state()
}
