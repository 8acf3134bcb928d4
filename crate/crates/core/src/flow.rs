//! Successive-shortest-paths min-cost flow for dense uncapacitated
//! transport problems.
//!
//! Nodes carry a signed supply; every ordered pair of nodes is joined by an
//! uncapacitated arc. Shortest paths use Dijkstra on reduced costs, so the
//! node potentials at termination are an optimal dual solution.

/// Optimal plan and dual potential for one transport problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    /// `(from, to, amount)` with `amount > 0`, in lexicographic order.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// `dual[i] - dual[j] <= cost(i, j)` and `sum(supply[i] * dual[i]) == cost`.
    pub dual: Vec<f64>,
}

struct Network<'a, C> {
    k: usize,
    cost: &'a C,
    flow: Vec<f64>,
    remaining_supply: Vec<f64>,
    remaining_demand: Vec<f64>,
    sent: Vec<f64>,
    received: Vec<f64>,
    potential: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Arc {
    Source(usize),
    Sink(usize),
    UnSource(usize),
    UnSink(usize),
    Forward(usize, usize),
    Backward(usize, usize),
}

impl<'a, C: Fn(usize, usize) -> f64> Network<'a, C> {
    fn source(&self) -> usize {
        self.k
    }

    fn sink(&self) -> usize {
        self.k + 1
    }

    /// Cheapest residual arc `u -> v` and its cost, if any.
    fn arc(&self, u: usize, v: usize) -> Option<(Arc, f64)> {
        let (s, t, k) = (self.source(), self.sink(), self.k);
        if u == v {
            return None;
        }
        match (u, v) {
            (u, v) if u == s && v < k => {
                (self.remaining_supply[v] > 0.0).then_some((Arc::Source(v), 0.0))
            }
            (u, v) if u < k && v == t => {
                (self.remaining_demand[u] > 0.0).then_some((Arc::Sink(u), 0.0))
            }
            (u, v) if u < k && v == s => (self.sent[u] > 0.0).then_some((Arc::UnSource(u), 0.0)),
            (u, v) if u == t && v < k => (self.received[v] > 0.0).then_some((Arc::UnSink(v), 0.0)),
            (u, v) if u < k && v < k => {
                let forward = (self.cost)(u, v);
                if self.flow[v * k + u] > 0.0 {
                    let backward = -(self.cost)(v, u);
                    if backward < forward {
                        return Some((Arc::Backward(u, v), backward));
                    }
                }
                Some((Arc::Forward(u, v), forward))
            }
            _ => None,
        }
    }

    fn capacity(&self, arc: Arc) -> f64 {
        match arc {
            Arc::Source(v) => self.remaining_supply[v],
            Arc::Sink(u) => self.remaining_demand[u],
            Arc::UnSource(u) => self.sent[u],
            Arc::UnSink(v) => self.received[v],
            Arc::Forward(..) => f64::INFINITY,
            Arc::Backward(u, v) => self.flow[v * self.k + u],
        }
    }

    fn push(&mut self, arc: Arc, amount: f64) {
        let k = self.k;
        match arc {
            Arc::Source(v) => {
                self.remaining_supply[v] -= amount;
                self.sent[v] += amount;
            }
            Arc::Sink(u) => {
                self.remaining_demand[u] -= amount;
                self.received[u] += amount;
            }
            Arc::UnSource(u) => {
                self.sent[u] -= amount;
                self.remaining_supply[u] += amount;
            }
            Arc::UnSink(v) => {
                self.received[v] -= amount;
                self.remaining_demand[v] += amount;
            }
            Arc::Forward(u, v) => self.flow[u * k + v] += amount,
            Arc::Backward(u, v) => self.flow[v * k + u] -= amount,
        }
    }

    /// Dense Dijkstra from the source on reduced costs. Ties are settled in
    /// index order.
    fn shortest_paths(&self) -> (Vec<f64>, Vec<Option<(usize, Arc)>>) {
        let nodes = self.k + 2;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut parent = vec![None; nodes];
        let mut done = vec![false; nodes];
        dist[self.source()] = 0.0;
        loop {
            let mut u = None;
            for v in 0..nodes {
                if !done[v] && dist[v].is_finite() && u.is_none_or(|w: usize| dist[v] < dist[w]) {
                    u = Some(v);
                }
            }
            let Some(u) = u else { break };
            done[u] = true;
            for v in 0..nodes {
                if done[v] {
                    continue;
                }
                if let Some((arc, c)) = self.arc(u, v) {
                    let reduced = (c + self.potential[u] - self.potential[v]).max(0.0);
                    let alt = dist[u] + reduced;
                    if alt < dist[v] {
                        dist[v] = alt;
                        parent[v] = Some((u, arc));
                    }
                }
            }
        }
        (dist, parent)
    }
}

/// Solves `min sum cost(i,j) * x_ij` subject to net outflow `supply[i]` at
/// every node. `cost` must be nonnegative and satisfy the triangle
/// inequality for the returned dual to be tight. Supplies are expected to
/// sum to zero up to rounding; any residue is left unrouted.
pub fn solve_transport<C: Fn(usize, usize) -> f64>(supply: &[f64], cost: &C) -> TransportSolution {
    let k = supply.len();
    let mut net = Network {
        k,
        cost,
        flow: vec![0.0; k * k],
        remaining_supply: supply.iter().map(|&s| s.max(0.0)).collect(),
        remaining_demand: supply.iter().map(|&s| (-s).max(0.0)).collect(),
        sent: vec![0.0; k],
        received: vec![0.0; k],
        potential: vec![0.0; k + 2],
    };
    let (source, sink) = (net.source(), net.sink());
    loop {
        let (dist, parent) = net.shortest_paths();
        if !dist[sink].is_finite() {
            break;
        }
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let (u, arc) = parent[v].expect("reachable node has a parent");
            path.push(arc);
            v = u;
        }
        let amount = path
            .iter()
            .map(|&a| net.capacity(a))
            .fold(f64::INFINITY, f64::min);
        for &arc in &path {
            net.push(arc, amount);
        }
        let far = dist
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max);
        for (p, d) in net.potential.iter_mut().zip(&dist) {
            *p += if d.is_finite() { *d } else { far };
        }
    }

    let mut flows = Vec::new();
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            let x = net.flow[i * k + j];
            if x > 0.0 && i != j {
                total += x * cost(i, j);
                flows.push((i, j, x));
            }
        }
    }
    let dual = net.potential[..k].iter().map(|p| -p).collect();
    TransportSolution {
        flows,
        cost: total,
        dual,
    }
}
