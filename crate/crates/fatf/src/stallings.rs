//! Subgroup calculus in free groups via folded labeled graphs.
//!
//! A subgroup of `F_n` is represented by its core graph: a connected,
//! deterministically labeled graph with a basepoint in which every vertex
//! other than the basepoint has degree at least two. Membership is path
//! tracing, free bases come from spanning trees, and intersections come from
//! the product (pullback) graph. Abelianization preimages are built directly
//! as coset automata over a finite quotient, which yields a folded graph by
//! construction.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::intlin::{
    lattice_index, left_kernel, quotient_structure, smith_normal_form, IntMatrix, Lattice,
    LatticeIndex,
};
use crate::words::Word;
use crate::Result;

/// Folded core graph of a finitely generated subgroup of `F_n`.
///
/// Vertices are renumbered breadth-first from the basepoint (always vertex
/// 0), so two runs on the same input produce identical graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreGraph {
    alphabet: usize,
    /// `adj[v][slot(l)]` is the endpoint of the `l`-labeled edge at `v`.
    adj: Vec<Vec<Option<usize>>>,
}

fn slot(alphabet: usize, letter: i32) -> usize {
    debug_assert!(letter != 0 && letter.unsigned_abs() as usize <= alphabet);
    2 * (letter.unsigned_abs() as usize - 1) + usize::from(letter < 0)
}

/// Letters in deterministic slot order: 1, -1, 2, -2, ...
fn letter_order(alphabet: usize) -> impl Iterator<Item = i32> {
    (1..=alphabet as i32).flat_map(|i| [i, -i])
}

impl CoreGraph {
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn basepoint(&self) -> usize {
        0
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        let slots: usize = self
            .adj
            .iter()
            .map(|v| v.iter().filter(|s| s.is_some()).count())
            .sum();
        slots / 2
    }

    /// First Betti number `E - V + 1`; the rank of the subgroup.
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    pub fn step(&self, v: usize, letter: i32) -> Option<usize> {
        self.adj[v][slot(self.alphabet, letter)]
    }

    /// Endpoint of the path spelled by `w` from the basepoint.
    pub fn trace(&self, w: &Word) -> Option<usize> {
        let mut cur = 0;
        for &l in w.letters() {
            cur = self.step(cur, l)?;
        }
        Some(cur)
    }

    pub fn contains(&self, w: &Word) -> bool {
        assert_eq!(w.alphabet(), self.alphabet, "alphabet mismatch");
        self.trace(w) == Some(0)
    }

    /// Product graph at the basepoint pair; recognizes the intersection.
    pub fn pullback(&self, other: &CoreGraph) -> CoreGraph {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch");
        let n = self.alphabet;
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pairs = vec![(0usize, 0usize)];
        index.insert((0, 0), 0);
        let mut adj: Vec<Vec<Option<usize>>> = vec![vec![None; 2 * n]];
        let mut head = 0;
        while head < pairs.len() {
            let (a, b) = pairs[head];
            for l in letter_order(n) {
                if let (Some(ta), Some(tb)) = (self.step(a, l), other.step(b, l)) {
                    let key = (ta, tb);
                    let idx = *index.entry(key).or_insert_with(|| {
                        pairs.push(key);
                        adj.push(vec![None; 2 * n]);
                        pairs.len() - 1
                    });
                    adj[head][slot(n, l)] = Some(idx);
                }
            }
            head += 1;
        }
        finish_graph(n, adj)
    }
}

/// Trims spurs and renumbers breadth-first from vertex 0 (the basepoint).
fn finish_graph(alphabet: usize, mut adj: Vec<Vec<Option<usize>>>) -> CoreGraph {
    let n = alphabet;
    let degree =
        |adj: &Vec<Vec<Option<usize>>>, v: usize| adj[v].iter().filter(|s| s.is_some()).count();
    // iteratively remove non-basepoint vertices of degree <= 1
    let mut alive = vec![true; adj.len()];
    let mut queue: VecDeque<usize> = (1..adj.len()).collect();
    while let Some(v) = queue.pop_front() {
        if v == 0 || !alive[v] || degree(&adj, v) > 1 {
            continue;
        }
        alive[v] = false;
        for s in 0..2 * n {
            if let Some(w) = adj[v][s] {
                adj[v][s] = None;
                let back = s ^ 1; // slot of the inverse letter
                if adj[w][back] == Some(v) {
                    adj[w][back] = None;
                }
                if w != v {
                    queue.push_back(w);
                }
            }
        }
    }
    // canonical breadth-first renumbering of the basepoint component
    let mut order = vec![usize::MAX; adj.len()];
    let mut bfs = vec![0usize];
    order[0] = 0;
    let mut head = 0;
    while head < bfs.len() {
        let v = bfs[head];
        for l in letter_order(n) {
            if let Some(w) = adj[v][slot(n, l)] {
                if alive[w] && order[w] == usize::MAX {
                    order[w] = bfs.len();
                    bfs.push(w);
                }
            }
        }
        head += 1;
    }
    let mut out = vec![vec![None; 2 * n]; bfs.len()];
    for (new_v, &old_v) in bfs.iter().enumerate() {
        for s in 0..2 * n {
            if let Some(w) = adj[old_v][s] {
                if order[w] != usize::MAX {
                    out[new_v][s] = Some(order[w]);
                }
            }
        }
    }
    CoreGraph {
        alphabet: n,
        adj: out,
    }
}

/// Folds an edge list into a deterministic graph (vertex 0 is the basepoint).
fn fold(alphabet: usize, vertex_count: usize, edges: Vec<(usize, i32, usize)>) -> CoreGraph {
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut parent: Vec<usize> = (0..vertex_count).collect();
    let mut adj: Vec<BTreeMap<i32, usize>> = vec![BTreeMap::new(); vertex_count];

    enum Op {
        Edge(usize, i32, usize),
        Merge(usize, usize),
    }
    let mut ops: Vec<Op> = Vec::new();
    for (a, l, b) in edges {
        ops.push(Op::Edge(a, l, b));
        ops.push(Op::Edge(b, -l, a));
    }
    while let Some(op) = ops.pop() {
        match op {
            Op::Edge(a, l, b) => {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                match adj[ra].get(&l) {
                    None => {
                        adj[ra].insert(l, rb);
                    }
                    Some(&c) => {
                        let rc = find(&mut parent, c);
                        if rc != rb {
                            ops.push(Op::Merge(rc, rb));
                        }
                    }
                }
            }
            Op::Merge(x, y) => {
                let rx = find(&mut parent, x);
                let ry = find(&mut parent, y);
                if rx == ry {
                    continue;
                }
                let (keep, dead) = if ry == find(&mut parent, 0) {
                    (ry, rx)
                } else {
                    (rx, ry)
                };
                parent[dead] = keep;
                let moved = std::mem::take(&mut adj[dead]);
                for (l, w) in moved {
                    ops.push(Op::Edge(keep, l, w));
                }
            }
        }
    }

    // materialize surviving classes
    let root0 = find(&mut parent, 0);
    let mut class_index: HashMap<usize, usize> = HashMap::new();
    class_index.insert(root0, 0);
    let mut raw: Vec<Vec<Option<usize>>> = vec![vec![None; 2 * alphabet]];
    for v in 0..vertex_count {
        let r = find(&mut parent, v);
        class_index.entry(r).or_insert_with(|| {
            raw.push(vec![None; 2 * alphabet]);
            raw.len() - 1
        });
    }
    for v in 0..vertex_count {
        if find(&mut parent, v) != v {
            continue;
        }
        let vi = class_index[&v];
        let slots = std::mem::take(&mut adj[v]);
        for (l, w) in slots {
            let wi = class_index[&find(&mut parent, w)];
            raw[vi][slot(alphabet, l)] = Some(wi);
        }
    }
    finish_graph(alphabet, raw)
}

/// Builds the folded core graph of the subgroup generated by `words`.
fn core_graph(alphabet: usize, words: &[Word]) -> CoreGraph {
    let mut edges = Vec::new();
    let mut next = 1usize;
    for w in words {
        assert_eq!(w.alphabet(), alphabet, "alphabet mismatch");
        if w.is_identity() {
            continue;
        }
        let ls = w.letters();
        let mut cur = 0usize;
        for (i, &l) in ls.iter().enumerate() {
            let tgt = if i + 1 == ls.len() {
                0
            } else {
                next += 1;
                next - 1
            };
            edges.push((cur, l, tgt));
            cur = tgt;
        }
    }
    fold(alphabet, next, edges)
}

/// A free basis of a subgroup together with the data needed to rewrite
/// members in terms of it: the core graph, its breadth-first spanning tree,
/// and the indexed non-tree edges.
#[derive(Clone, Debug)]
pub struct FreeBasis {
    words: Vec<Word>,
    graph: CoreGraph,
    /// `parent[v] = (u, l)`: tree edge `u --l--> v`; `None` at the basepoint.
    parent: Vec<Option<(usize, i32)>>,
    nontree_index: HashMap<(usize, i32), usize>,
}

impl FreeBasis {
    fn from_graph(graph: CoreGraph) -> FreeBasis {
        let n = graph.alphabet;
        let vcount = graph.vertex_count();
        let mut parent: Vec<Option<(usize, i32)>> = vec![None; vcount];
        let mut seen = vec![false; vcount];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for l in letter_order(n) {
                if let Some(w) = graph.step(v, l) {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some((v, l));
                        queue.push_back(w);
                    }
                }
            }
        }
        let is_tree =
            |u: usize, l: i32, w: usize| parent[w] == Some((u, l)) || parent[u] == Some((w, -l));
        let mut nontree = Vec::new();
        let mut nontree_index = HashMap::new();
        for u in 0..vcount {
            for i in 1..=n as i32 {
                if let Some(w) = graph.step(u, i) {
                    if !is_tree(u, i, w) {
                        nontree_index.insert((u, i), nontree.len());
                        nontree.push((u, i, w));
                    }
                }
            }
        }
        let path_from_base = |v: usize| -> Vec<i32> {
            let mut letters = Vec::new();
            let mut cur = v;
            while let Some((p, l)) = parent[cur] {
                letters.push(l);
                cur = p;
            }
            letters.reverse();
            letters
        };
        let words = nontree
            .iter()
            .map(|&(u, l, w)| {
                let mut letters = path_from_base(u);
                letters.push(l);
                letters.extend(path_from_base(w).iter().rev().map(|x| -x));
                Word::new(n, letters)
            })
            .collect();
        FreeBasis {
            words,
            graph,
            parent,
            nontree_index,
        }
    }

    pub fn rank(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn graph(&self) -> &CoreGraph {
        &self.graph
    }

    pub fn ambient_alphabet(&self) -> usize {
        self.graph.alphabet
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.graph.contains(w)
    }

    /// Rewrites a member as a word over the basis (letter `j` stands for the
    /// `j`-th basis element); `None` for non-members.
    pub fn express(&self, w: &Word) -> Option<Word> {
        assert_eq!(w.alphabet(), self.graph.alphabet, "alphabet mismatch");
        let mut cur = 0usize;
        let mut out: Vec<i32> = Vec::new();
        for &l in w.letters() {
            let nxt = self.graph.step(cur, l)?;
            let is_tree = self.parent[nxt] == Some((cur, l)) || self.parent[cur] == Some((nxt, -l));
            if !is_tree {
                let (key, sign) = if l > 0 {
                    ((cur, l), 1)
                } else {
                    ((nxt, -l), -1)
                };
                let idx = self.nontree_index[&key] as i32;
                out.push(sign * (idx + 1));
            }
            cur = nxt;
        }
        if cur == 0 {
            Some(Word::new(self.rank(), out))
        } else {
            None
        }
    }
}

/// Folded core graph and spanning-tree basis of the subgroup generated by
/// the given words.
pub fn build(alphabet: usize, generators: &[Word]) -> FreeBasis {
    FreeBasis::from_graph(core_graph(alphabet, generators))
}

/// Free basis of the intersection of two subgroups.
pub fn intersect(a: &FreeBasis, b: &FreeBasis) -> FreeBasis {
    FreeBasis::from_graph(a.graph.pullback(&b.graph))
}

/// Fixed subgroup of conjugation by `g`: the cyclic group on the primitive
/// root of `g`. Rejects the identity.
pub fn centralizer_basis(g: &Word) -> Result<FreeBasis> {
    let root = g.primitive_root()?.root;
    Ok(build(g.alphabet(), &[root]))
}

/// Result of an abelianization-preimage computation.
#[derive(Clone, Debug)]
pub enum AbelianPreimage {
    FinitelyGenerated(FreeBasis),
    /// A primitive coordinate direction of infinite order in `Z^r / M`.
    NotFinitelyGenerated {
        witness: Vec<BigInt>,
    },
}

/// The subgroup `{ u in <B> : coords(u) * t in l }`, where `coords` is the
/// exponent-sum vector of `u` over the rank-`r` basis `B`.
///
/// Writing `M = { x : x t in l } <= Z^r`, the subgroup is finitely generated
/// iff `r <= 1` or `M` has finite index `d` in `Z^r`; in that case the coset
/// automaton on `Z^r / M` (states are cosets, the letter-`j` edge adds the
/// class of `e_j`) is a folded graph recognizing it exactly, and the
/// returned basis of rank `1 + d(r-1)` is read off its spanning tree and
/// mapped back into the ambient free group.
pub fn abelian_preimage(basis: &FreeBasis, t: &IntMatrix, l: &Lattice) -> AbelianPreimage {
    let r = basis.rank();
    assert_eq!(t.rows(), r, "one matrix row per basis element");
    assert_eq!(
        t.cols(),
        l.ambient_dim(),
        "matrix must map into the lattice ambient"
    );
    let n = basis.ambient_alphabet();

    // M = { x : x t in l }: left kernel of [t ; basis(l)], first r coordinates.
    let m = {
        let stacked = IntMatrix::vstack(&[t, l.basis()]);
        let ker = left_kernel(&stacked);
        let rows: Vec<Vec<BigInt>> = ker
            .basis_rows()
            .iter()
            .map(|row| row[..r].to_vec())
            .collect();
        Lattice::from_rows(r, rows)
    };

    if r == 0 {
        return AbelianPreimage::FinitelyGenerated(build(n, &[]));
    }
    if r == 1 {
        // subgroup of Z: M = kZ
        return AbelianPreimage::FinitelyGenerated(match m.basis_rows().first() {
            None => build(n, &[]),
            Some(row) => {
                let k = i64::try_from(&row[0]).expect("cyclic index fits in i64");
                build(n, &[basis.words()[0].pow(k)])
            }
        });
    }

    match lattice_index(&m) {
        LatticeIndex::Infinite => {
            // a direction with infinite order in the quotient: the Smith
            // completion row just past the rank
            let witness = if m.is_trivial() {
                let mut e = vec![BigInt::zero(); r];
                e[0] = BigInt::from(1);
                e
            } else {
                let snf = smith_normal_form(m.basis());
                snf.v_inv().row(snf.rank())
            };
            AbelianPreimage::NotFinitelyGenerated { witness }
        }
        LatticeIndex::Finite(index) => {
            let q = quotient_structure(&m).expect("index is finite");
            let orders: Vec<u64> = q
                .orders()
                .iter()
                .map(|o| u64::try_from(o).expect("coset automaton order fits in u64"))
                .collect();
            let state_count = usize::try_from(&index).expect("coset automaton fits in memory");
            // mixed-radix encoding of tuples in the product of cyclic groups
            let encode = |label: &[u64]| -> usize {
                let mut idx = 0usize;
                for (x, &o) in label.iter().zip(&orders) {
                    idx = idx * o as usize + *x as usize;
                }
                idx
            };
            let decode = |mut idx: usize| -> Vec<u64> {
                let mut out = vec![0u64; orders.len()];
                for (i, &o) in orders.iter().enumerate().rev() {
                    out[i] = (idx % o as usize) as u64;
                    idx /= o as usize;
                }
                out
            };
            let steps: Vec<Vec<u64>> = (0..r)
                .map(|j| {
                    let mut e = vec![BigInt::zero(); r];
                    e[j] = BigInt::from(1);
                    q.label(&e)
                        .iter()
                        .map(|x| u64::try_from(x).expect("canonical residue"))
                        .collect()
                })
                .collect();
            let mut adj: Vec<Vec<Option<usize>>> = vec![vec![None; 2 * r]; state_count];
            for s in 0..state_count {
                let tuple = decode(s);
                for (j, step) in steps.iter().enumerate() {
                    let nxt: Vec<u64> = tuple
                        .iter()
                        .zip(step)
                        .zip(&orders)
                        .map(|((a, b), &o)| (a + b) % o)
                        .collect();
                    let tgt = encode(&nxt);
                    adj[s][slot(r, (j + 1) as i32)] = Some(tgt);
                    adj[tgt][slot(r, -((j + 1) as i32))] = Some(s);
                }
            }
            let automaton = finish_graph(r, adj);
            debug_assert_eq!(automaton.vertex_count(), state_count);
            let coset_basis = FreeBasis::from_graph(automaton);
            debug_assert_eq!(coset_basis.rank(), 1 + state_count * (r - 1));
            let substituted: Vec<Word> = coset_basis
                .words()
                .iter()
                .map(|w| w.substitute(basis.words()))
                .collect();
            let out = build(n, &substituted);
            assert_eq!(
                out.rank(),
                coset_basis.rank(),
                "substituted basis words stay independent"
            );
            AbelianPreimage::FinitelyGenerated(out)
        }
    }
}

/// For words `c_1..c_k` generating the FULL group `F_rank`, returns for each
/// letter `j` a word over `{x_1..x_k}` whose substitution `x_i -> c_i`
/// equals that letter.
///
/// Implemented by folding the wedge of `c_i`-labeled loops while carrying a
/// decoration word in `F_k` on every edge. The decoration of any basepoint
/// loop substitutes to the loop's label, so the petals of the final rose
/// carry the wanted preimages.
pub(crate) fn generator_preimages(rank: usize, coord_words: &[Word]) -> Vec<Word> {
    let k = coord_words.len();
    if rank == 0 {
        return Vec::new();
    }

    // redirect[v] = (replacement, corr): dec measured from the replacement
    // equals corr * (dec measured from v)
    let mut redirect: Vec<Option<(usize, Word)>> = vec![None];
    let mut adj: Vec<BTreeMap<i32, (usize, Word)>> = vec![BTreeMap::new()];

    fn resolve(redirect: &mut [Option<(usize, Word)>], k: usize, v: usize) -> (usize, Word) {
        match redirect[v].clone() {
            None => (v, Word::identity(k)),
            Some((p, c)) => {
                let mut root = p;
                let mut corr = c;
                while let Some((p2, c2)) = redirect[root].clone() {
                    corr = c2.mul(&corr);
                    root = p2;
                }
                redirect[v] = Some((root, corr.clone()));
                (root, corr)
            }
        }
    }

    // pending directed edges: (src, letter, dst, decoration-from-src)
    let mut ops: Vec<(usize, i32, usize, Word)> = Vec::new();
    for (gi, cw) in coord_words.iter().enumerate() {
        assert_eq!(
            cw.alphabet(),
            rank,
            "coordinate words live over the basis alphabet"
        );
        if cw.is_identity() {
            continue;
        }
        let ls = cw.letters();
        let mut cur = 0usize;
        for (i, &l) in ls.iter().enumerate() {
            let dst = if i + 1 == ls.len() {
                0
            } else {
                redirect.push(None);
                adj.push(BTreeMap::new());
                redirect.len() - 1
            };
            let dec = if i == 0 {
                Word::new(k, [gi as i32 + 1])
            } else {
                Word::identity(k)
            };
            ops.push((cur, l, dst, dec.clone()));
            ops.push((dst, -l, cur, dec.inverse()));
            cur = dst;
        }
    }

    while let Some((a, l, b, d)) = ops.pop() {
        let (ra, ca) = resolve(&mut redirect, k, a);
        let (rb, cb) = resolve(&mut redirect, k, b);
        let dnew = ca.mul(&d).mul(&cb.inverse());
        let existing = adj[ra].get(&l).cloned();
        match existing {
            None => {
                adj[ra].insert(l, (rb, dnew));
            }
            Some((b0, d0)) => {
                let (rb0, cb0) = resolve(&mut redirect, k, b0);
                let d1 = d0.mul(&cb0.inverse());
                if rb0 == rb {
                    // parallel edge: drop it (only a relation among the
                    // generators is lost, not any preimage)
                    continue;
                }
                let (rbase, _) = resolve(&mut redirect, k, 0);
                if rb == rbase {
                    // keep the basepoint class: adopt the new edge, retire rb0
                    adj[ra].insert(l, (rb, dnew.clone()));
                    let corr = dnew.inverse().mul(&d1);
                    redirect[rb0] = Some((rb, corr));
                    let moved = std::mem::take(&mut adj[rb0]);
                    for (l2, (w2, d2)) in moved {
                        ops.push((rb0, l2, w2, d2));
                    }
                } else {
                    let corr = d1.inverse().mul(&dnew);
                    redirect[rb] = Some((rb0, corr));
                    let moved = std::mem::take(&mut adj[rb]);
                    for (l2, (w2, d2)) in moved {
                        ops.push((rb, l2, w2, d2));
                    }
                }
            }
        }
    }

    // normalize endpoints and decorations onto surviving classes
    let vcount = redirect.len();
    let mut final_adj: Vec<BTreeMap<i32, (usize, Word)>> = vec![BTreeMap::new(); vcount];
    for v in 0..vcount {
        if redirect[v].is_some() {
            continue;
        }
        let slots = std::mem::take(&mut adj[v]);
        for (l, (w, d)) in slots {
            let (rw, cw) = resolve(&mut redirect, k, w);
            final_adj[v].insert(l, (rw, d.mul(&cw.inverse())));
        }
    }
    let (root, _) = resolve(&mut redirect, k, 0);

    // trim spurs (decorations go with their edges; loops are untouched)
    loop {
        let mut removed = false;
        for v in 0..vcount {
            if v == root || redirect[v].is_some() || final_adj[v].len() != 1 {
                continue;
            }
            let (l, (w, _)) = {
                let (l, t) = final_adj[v].iter().next().unwrap();
                (*l, t.clone())
            };
            final_adj[v].clear();
            final_adj[w].remove(&-l);
            redirect[v] = Some((root, Word::identity(k))); // mark dead
            removed = true;
        }
        if !removed {
            break;
        }
    }

    // the generators span the full group, so the core is the rose
    let live: Vec<usize> = (0..vcount)
        .filter(|&v| redirect[v].is_none() && !final_adj[v].is_empty())
        .collect();
    let rose_ok = live.iter().all(|&v| v == root) && final_adj[root].len() == 2 * rank;
    assert!(
        rose_ok,
        "coordinate words must generate the full free group"
    );

    (1..=rank as i32)
        .map(|j| {
            let (w, d) = final_adj[root]
                .get(&j)
                .expect("rose has every petal")
                .clone();
            debug_assert_eq!(w, root);
            assert_eq!(
                d.substitute(coord_words),
                Word::generator(rank, j as usize),
                "petal decoration maps to its letter"
            );
            d
        })
        .collect()
}
