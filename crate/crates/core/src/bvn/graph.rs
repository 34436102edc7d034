use std::collections::BTreeSet;

use num_traits::One;

use crate::assignment::{Matching, ProbabilisticAssignment};
use crate::bvn::Frac;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{is_integral, Rat};

/// Bipartite graph of the fractional entries of an assignment.
///
/// Vertices are numbered `s = 0`, agents `1..=|N|`, objects after the
/// agents and `t` last. There is an edge `{s, i}` when row `i` has a
/// fractional sum, `{i, j}` when `x_ij` is fractional and `{j, t}` when
/// column `j` has a fractional sum. Read as arcs `s -> i -> j -> t`, every
/// edge is oriented from the smaller to the larger vertex number.
#[derive(Debug, Clone)]
pub struct FractionalityGraph {
    n: usize,
    m: usize,
    cells: Vec<Rat>,
    rows: Vec<Rat>,
    cols: Vec<Rat>,
    adj: Vec<BTreeSet<usize>>,
}

impl FractionalityGraph {
    pub fn from_assignment(inst: &Instance, x: &ProbabilisticAssignment) -> Result<Self> {
        x.check_dims(inst)?;
        let frac = Frac::from_assignment(inst, x);
        Ok(Self::build(&frac))
    }

    pub(crate) fn build(frac: &Frac) -> Self {
        let (n, m) = (frac.n, frac.m);
        let rows: Vec<Rat> = (0..n).map(|i| frac.row_sum(i)).collect();
        let cols: Vec<Rat> = (0..m).map(|j| frac.col_sum(j)).collect();
        let mut g = FractionalityGraph {
            n,
            m,
            cells: frac.x.clone(),
            rows,
            cols,
            adj: vec![BTreeSet::new(); n + m + 2],
        };
        for i in 0..n {
            if !is_integral(&g.rows[i]) {
                g.link(0, 1 + i);
            }
            for j in 0..m {
                if !is_integral(&g.cells[i * m + j]) {
                    g.link(1 + i, 1 + n + j);
                }
            }
        }
        let t = g.sink();
        for j in 0..m {
            if !is_integral(&g.cols[j]) {
                g.link(1 + n + j, t);
            }
        }
        g
    }

    fn sink(&self) -> usize {
        self.n + self.m + 1
    }

    fn link(&mut self, a: usize, b: usize) {
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    fn unlink(&mut self, a: usize, b: usize) {
        self.adj[a].remove(&b);
        self.adj[b].remove(&a);
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Every vertex touches zero or at least two fractional edges, which
    /// holds whenever the total `μ(X)` is an integer.
    pub fn degrees_are_valid(&self) -> bool {
        self.adj.iter().all(|a| a.len() != 1)
    }

    // value of edge {a, b} with a < b
    fn value_mut(&mut self, a: usize, b: usize) -> &mut Rat {
        let (n, m) = (self.n, self.m);
        if a == 0 {
            &mut self.rows[b - 1]
        } else if b == n + m + 1 {
            &mut self.cols[a - 1 - n]
        } else {
            &mut self.cells[(a - 1) * m + (b - 1 - n)]
        }
    }

    /// Walks from the lowest-numbered vertex with an edge, always leaving by
    /// the lowest-numbered neighbor other than the one just left, until the
    /// walk closes a cycle.
    fn find_cycle(&self) -> Result<Option<Vec<usize>>> {
        let Some(start) = (0..self.adj.len()).find(|&v| !self.adj[v].is_empty()) else {
            return Ok(None);
        };
        let mut on_path = vec![usize::MAX; self.adj.len()];
        let mut path = vec![start];
        on_path[start] = 0;
        let mut prev = usize::MAX;
        loop {
            let v = *path.last().unwrap();
            if self.adj[v].len() < 2 {
                return Err(Error::Internal(format!(
                    "vertex {v} of the fractionality graph has degree {}",
                    self.adj[v].len()
                )));
            }
            let w = *self.adj[v].iter().find(|&&w| w != prev).unwrap();
            if on_path[w] != usize::MAX {
                return Ok(Some(path[on_path[w]..].to_vec()));
            }
            on_path[w] = path.len();
            path.push(w);
            prev = v;
        }
    }

    /// Pushes the largest amount around one cycle that keeps every edge
    /// value between its floor and ceiling; at least one edge becomes
    /// integral and leaves the graph. Returns false when no edge is left.
    pub fn push_once(&mut self) -> Result<bool> {
        let Some(cycle) = self.find_cycle()? else {
            return Ok(false);
        };
        let len = cycle.len();
        let mut alpha: Option<Rat> = None;
        for k in 0..len {
            let (u, v) = (cycle[k], cycle[(k + 1) % len]);
            let (a, b) = (u.min(v), u.max(v));
            let val = self.value_mut(a, b).clone();
            let room = if u < v { val.ceil() - &val } else { &val - val.floor() };
            if alpha.as_ref().is_none_or(|x| room < *x) {
                alpha = Some(room);
            }
        }
        let alpha = alpha.expect("cycles are nonempty");
        for k in 0..len {
            let (u, v) = (cycle[k], cycle[(k + 1) % len]);
            let (a, b) = (u.min(v), u.max(v));
            let val = self.value_mut(a, b);
            if u < v {
                *val += &alpha;
            } else {
                *val -= &alpha;
            }
            if is_integral(val) {
                self.unlink(a, b);
            }
        }
        Ok(true)
    }

    /// Pushes until every edge value is integral.
    pub fn round(&mut self) -> Result<()> {
        if !self.degrees_are_valid() {
            return Err(Error::Internal(
                "fractionality graph has a vertex of degree one".into(),
            ));
        }
        let limit = self.edge_count() + 1;
        for _ in 0..=limit {
            if !self.push_once()? {
                return Ok(());
            }
        }
        Err(Error::Internal("rounding did not terminate".into()))
    }

    /// Reads the matching off a fully rounded graph.
    pub fn into_matching(self) -> Matching {
        let m = self.m;
        Matching::new(
            (0..self.n)
                .map(|i| (0..m).find(|&j| self.cells[i * m + j].is_one()))
                .collect(),
        )
    }
}
