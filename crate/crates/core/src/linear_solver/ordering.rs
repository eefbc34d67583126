//! Approximate minimum degree ordering on a symmetric pattern.
//!
//! Quotient-graph elimination with element absorption and the approximate
//! external degree bound of Amestoy, Davis and Duff. Supervariable detection
//! is not performed; the KKT systems handled here are small enough that the
//! plain quotient graph is fast.

use std::collections::BTreeSet;

use crate::sparse_core::{CscMatrix, Permutation};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Node {
    Variable,
    Element,
    Dead,
}

/// Fill-reducing ordering of `pattern(A) + pattern(Aᵀ)`.
pub fn amd_order(a: &CscMatrix) -> Permutation {
    amd_from_adjacency(a.symmetric_adjacency())
}

/// `adjacency[i]` lists the neighbours of `i` (no self loops, sorted, symmetric).
pub fn amd_from_adjacency(adjacency: Vec<Vec<usize>>) -> Permutation {
    let n = adjacency.len();
    let mut status = vec![Node::Variable; n];
    let mut var_adj = adjacency;
    let mut var_elems: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elem_vars: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut degree: Vec<usize> = var_adj.iter().map(Vec::len).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (degree[i], i)).collect();

    let mut in_lp = vec![false; n];
    let mut w: Vec<isize> = vec![-1; n];
    let mut w_touched: Vec<usize> = Vec::new();
    let mut order = Vec::with_capacity(n);
    let mut lp: Vec<usize> = Vec::new();

    for k in 0..n {
        let (_, p) = queue.pop_first().expect("queue holds every uneliminated variable");
        order.push(p);

        // new element p: union of p's variable neighbours and the variables of its elements
        lp.clear();
        for &v in &var_adj[p] {
            if status[v] == Node::Variable && !in_lp[v] && v != p {
                in_lp[v] = true;
                lp.push(v);
            }
        }
        let absorbed = std::mem::take(&mut var_elems[p]);
        for &e in &absorbed {
            if status[e] != Node::Element {
                continue;
            }
            for &v in &elem_vars[e] {
                if status[v] == Node::Variable && !in_lp[v] && v != p {
                    in_lp[v] = true;
                    lp.push(v);
                }
            }
            status[e] = Node::Dead;
            elem_vars[e] = Vec::new();
        }
        status[p] = Node::Element;
        var_adj[p] = Vec::new();

        // prune the quotient graph around the new element
        for &i in &lp {
            var_elems[i].retain(|&e| status[e] == Node::Element);
            var_elems[i].push(p);
            var_adj[i].retain(|&v| status[v] == Node::Variable && !in_lp[v] && v != i);
        }

        // |L_e \ L_p| for every element touching L_p
        for &i in &lp {
            for &e in &var_elems[i] {
                if e == p {
                    continue;
                }
                if w[e] < 0 {
                    elem_vars[e].retain(|&v| status[v] == Node::Variable);
                    w[e] = elem_vars[e].len() as isize;
                    w_touched.push(e);
                }
                w[e] -= 1;
            }
        }
        // elements fully covered by L_p are absorbed into p
        for &e in &w_touched {
            if w[e] == 0 {
                status[e] = Node::Dead;
                elem_vars[e] = Vec::new();
            }
        }

        let lp_len = lp.len();
        let remaining = n - k - 1;
        for &i in &lp {
            let mut d = lp_len - 1 + var_adj[i].len();
            for &e in &var_elems[i] {
                if e != p && status[e] == Node::Element {
                    d += w[e].max(0) as usize;
                }
            }
            var_elems[i].retain(|&e| status[e] == Node::Element);
            let d = d.min(degree[i] + lp_len - 1).min(remaining.saturating_sub(1));
            if d != degree[i] {
                queue.remove(&(degree[i], i));
                degree[i] = d;
                queue.insert((d, i));
            }
        }

        for &e in &w_touched {
            w[e] = -1;
        }
        w_touched.clear();
        for &i in &lp {
            in_lp[i] = false;
        }
        elem_vars[p] = lp.clone();
    }

    Permutation::new(order).expect("every node eliminated exactly once")
}
