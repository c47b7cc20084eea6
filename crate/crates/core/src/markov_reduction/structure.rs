use serde::Serialize;

use super::FiniteMarkovChain;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub irreducible: bool,
    /// Irreducible and aperiodic.
    pub primitive: bool,
    /// Period of the transition graph; `None` when reducible.
    pub period: Option<usize>,
    pub has_positive_diagonal: bool,
    pub components: Vec<Vec<usize>>,
    /// Components no transition leaves.
    pub closed_classes: Vec<Vec<usize>>,
    /// States outside every closed class.
    pub transient: Vec<usize>,
    /// Exactly one closed class, and it is aperiodic: `μ_n → μ∞` from any
    /// start. Implied by `primitive`.
    pub ergodic: bool,
}

/// Strongly connected components (Kosaraju), each sorted, listed by their
/// smallest state.
pub fn strongly_connected_components(chain: &FiniteMarkovChain) -> Vec<Vec<usize>> {
    let n = chain.len();
    let succ: Vec<Vec<usize>> = chain
        .rows()
        .iter()
        .map(|r| r.iter().map(|(b, _)| *b).collect())
        .collect();
    let mut pred = vec![Vec::new(); n];
    for (a, s) in succ.iter().enumerate() {
        for &b in s {
            pred[b].push(a);
        }
    }

    // finishing order, iteratively
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i < succ[v].len() {
                stack.push((v, i + 1));
                let w = succ[v][i];
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }

    let mut comp = vec![usize::MAX; n];
    let mut components = Vec::new();
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![root];
        comp[root] = id;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &pred[v] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components.sort_by_key(|c| c[0]);
    components
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a closed class: gcd of `level(a) + 1 - level(b)` over the
/// edges `a → b` inside it, with BFS levels from its first state.
fn period(chain: &FiniteMarkovChain, class: &[usize]) -> usize {
    let mut level = vec![usize::MAX; chain.len()];
    level[class[0]] = 0;
    let mut queue = std::collections::VecDeque::from([class[0]]);
    while let Some(a) = queue.pop_front() {
        for (b, _) in chain.row(a) {
            if level[*b] == usize::MAX {
                level[*b] = level[a] + 1;
                queue.push_back(*b);
            }
        }
    }
    let mut g = 0;
    for &a in class {
        for (b, _) in chain.row(a) {
            g = gcd(g, (level[a] + 1).abs_diff(level[*b]));
        }
    }
    g
}

fn is_closed(chain: &FiniteMarkovChain, class: &[usize]) -> bool {
    class
        .iter()
        .all(|&a| chain.row(a).iter().all(|(b, _)| class.binary_search(b).is_ok()))
}

pub fn structure_checks(chain: &FiniteMarkovChain) -> StructureReport {
    let components = strongly_connected_components(chain);
    let irreducible = components.len() == 1;
    let closed_classes: Vec<Vec<usize>> = components.iter().filter(|c| is_closed(chain, c)).cloned().collect();
    let transient = (0..chain.len())
        .filter(|a| !closed_classes.iter().any(|c| c.binary_search(a).is_ok()))
        .collect();
    let ergodic = closed_classes.len() == 1 && period(chain, &closed_classes[0]) == 1;
    let period = irreducible.then(|| period(chain, &components[0]));
    let has_positive_diagonal = (0..chain.len()).any(|a| chain.row(a).iter().any(|(b, _)| *b == a));
    StructureReport {
        irreducible,
        primitive: period == Some(1),
        period,
        has_positive_diagonal,
        components,
        closed_classes,
        transient,
        ergodic,
    }
}
