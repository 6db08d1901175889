//! Batched swapping in six phases per run.
//!
//! Every swap owns two slots `2i` (edge `a`) and `2i + 1` (edge `b`). When
//! several slots of a run name the same edge id they form a chain in slot
//! order: only the first slot reads the edge from the list, later slots
//! receive it from their predecessor. Likewise, all swaps that may read or
//! change the multiplicity of an edge value form an existence chain along
//! which the current multiplicity is handed forward. Both kinds of
//! forwarding go through priority queues keyed by the recipient, so every
//! phase is a sequential pass.
//!
//! 1. request nodes: `(edge id, slot)` pairs are sorted by edge id;
//! 2. load nodes: one scan of the edge list answers the first request per
//!    id and links later ones as successors;
//! 3. simulate swaps: every slot learns the set of states its edge may be in
//!    and requests existence information for all edges the swap may create
//!    or destroy;
//! 4. load existence: one scan of the edge list counts multiplicities for
//!    the first swap of each existence chain;
//! 5. perform swaps: the actual states and multiplicities are forwarded
//!    along the chains while swaps are decided in order;
//! 6. update graph: the surviving edges are merged with the rewritten ones.
//!
//! A run longer than `max(m / 4, 8)` swaps is processed in batches that
//! keep edge ids fixed: intermediate batches rewrite edges in place and
//! answer existence queries from a sorted copy, and only the last batch
//! re-sorts. Results are identical to one batch per run, but dependency
//! chains (and the number of simulated states) stay short.

use super::{check_ids, shape_legal, swapped_edges, RunConfig, SwapDescriptor, SwapStats};
use crate::em::{BitStream, EmConfig, MinPq, SequenceStore, Sorter};
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeList, MultiEdgeList};

/// Applies `swaps` to a simple graph; equal to the sequential oracle.
pub fn run_swaps(
    edges: &EdgeList,
    swaps: &[SwapDescriptor],
    cfg: &RunConfig,
    em: &EmConfig,
) -> Result<(EdgeList, SwapStats)> {
    let (out, stats) = run_store(edges.as_slice(), swaps, cfg, em)?;
    Ok((EdgeList::from_vec_unchecked(out), stats))
}

/// Applies `swaps` to a multigraph; a swap is skipped if a result is a loop,
/// both results coincide, or a result edge is already present.
pub fn run_swaps_multigraph(
    edges: &MultiEdgeList,
    swaps: &[SwapDescriptor],
    cfg: &RunConfig,
    em: &EmConfig,
) -> Result<(MultiEdgeList, SwapStats)> {
    let (out, stats) = run_store(edges.as_slice(), swaps, cfg, em)?;
    Ok((MultiEdgeList::from_sorted(out)?, stats))
}

/// Normalized histogram `(configurations, fraction of swaps)`.
pub fn dependency_stats(
    edges: &EdgeList,
    swaps: &[SwapDescriptor],
    cfg: &RunConfig,
    em: &EmConfig,
) -> Result<Vec<(u64, f64)>> {
    Ok(run_swaps(edges, swaps, cfg, em)?.1.configuration_histogram())
}

fn run_store(
    edges: &[Edge],
    swaps: &[SwapDescriptor],
    cfg: &RunConfig,
    em: &EmConfig,
) -> Result<(Vec<Edge>, SwapStats)> {
    check_ids(swaps, edges.len() as u64)?;
    let em = em.share(10);
    let mut list = SequenceStore::from_iter_with(&em, edges.iter().copied())?;
    let mut stats = SwapStats::default();
    let batch = (edges.len() / BATCH_DIVISOR).max(MIN_BATCH);
    for run in swaps.chunks(cfg.run_size.max(1)) {
        let parts = run.chunks(batch).count();
        for (j, part) in run.chunks(batch).enumerate() {
            let pass = Pass {
                sorted: j == 0,
                last: j + 1 == parts,
            };
            list = Run::new(&em, part).execute(&mut list, pass, &mut stats)?;
        }
        stats.runs += 1;
    }
    stats.touched.sort_unstable();
    stats.touched.dedup();
    Ok((list.to_vec()?, stats))
}

const BATCH_DIVISOR: usize = 4;
const MIN_BATCH: usize = 8;

/// Position of a batch within its run.
#[derive(Clone, Copy)]
struct Pass {
    // the list is in sorted order (first batch)
    sorted: bool,
    // re-sort afterwards (last batch)
    last: bool,
}

struct Run<'a> {
    em: &'a EmConfig,
    swaps: &'a [SwapDescriptor],
    // first request per edge id: (slot, edge)
    edge_msg: Sorter<(u64, Edge)>,
    // later requests: (slot, successor slot)
    id_succ: Sorter<(u64, u64)>,
    invalid: BitStream,
    // (edge, swap, is a target query)
    exist_req: Sorter<(Edge, u64, bool)>,
    // (swap, edge, multiplicity) for the head of each existence chain
    exist_msg: Sorter<(u64, Edge, u64)>,
    // (swap, edge, successor swap)
    exist_succ: Sorter<(u64, Edge, u64)>,
}

fn missing(what: &str, at: u64) -> Error {
    Error::Usage(format!("swap pipeline lost the {what} for slot {at}"))
}

impl<'a> Run<'a> {
    fn new(em: &'a EmConfig, swaps: &'a [SwapDescriptor]) -> Self {
        Run {
            em,
            swaps,
            edge_msg: Sorter::new(em),
            id_succ: Sorter::new(em),
            invalid: BitStream::new(),
            exist_req: Sorter::new(em),
            exist_msg: Sorter::new(em),
            exist_succ: Sorter::new(em),
        }
    }

    fn execute(
        mut self,
        list: &mut SequenceStore<Edge>,
        pass: Pass,
        stats: &mut SwapStats,
    ) -> Result<SequenceStore<Edge>> {
        let requests = self.request_nodes()?;
        self.load_nodes(list, requests)?;
        self.simulate(stats)?;
        if pass.sorted {
            let mut reader = list.reader()?;
            self.load_existence(|| reader.next_item())?;
        } else {
            let mut copy = Sorter::new(self.em);
            let mut reader = list.reader()?;
            while let Some(e) = reader.next_item()? {
                copy.push(e)?;
            }
            copy.finish()?;
            self.load_existence(|| copy.next())?;
            stats.edge_scans += 1;
        }
        let updates = self.perform(stats)?;
        let out = match (pass.sorted, pass.last) {
            (true, true) => {
                let mut by_value = Sorter::new(self.em);
                let mut updates = updates;
                while let Some((_, e)) = updates.next()? {
                    by_value.push(e)?;
                }
                by_value.finish()?;
                self.merge_updates(list, by_value, stats)?
            }
            (_, false) => self.replace_updates(list, updates, stats)?,
            (false, true) => {
                let mut replaced = self.replace_updates(list, updates, stats)?;
                let mut all = Sorter::new(self.em);
                let mut reader = replaced.reader()?;
                while let Some(e) = reader.next_item()? {
                    all.push(e)?;
                }
                all.finish()?;
                let mut out = SequenceStore::new(self.em);
                while let Some(e) = all.next()? {
                    out.push(e)?;
                }
                stats.edge_scans += 1;
                out
            }
        };
        stats.edge_scans += 3;
        Ok(out)
    }

    fn request_nodes(&self) -> Result<Sorter<(u64, u64)>> {
        let mut req = Sorter::new(self.em);
        for (i, s) in self.swaps.iter().enumerate() {
            let slot = 2 * i as u64;
            req.push((s.a, slot))?;
            req.push((s.b, slot + 1))?;
        }
        req.finish()?;
        Ok(req)
    }

    fn load_nodes(
        &mut self,
        list: &mut SequenceStore<Edge>,
        mut req: Sorter<(u64, u64)>,
    ) -> Result<()> {
        let mut reader = list.reader()?;
        let mut next = req.next()?;
        let mut id = 0u64;
        while let Some(e) = reader.next_item()? {
            let mut last: Option<u64> = None;
            while let Some((_, slot)) = next.filter(|r| r.0 == id) {
                match last {
                    None => self.edge_msg.push((slot, e))?,
                    Some(prev) => self.id_succ.push((prev, slot))?,
                }
                last = Some(slot);
                next = req.next()?;
            }
            self.invalid.push(last.is_some());
            id += 1;
        }
        self.edge_msg.finish()?;
        self.id_succ.finish()?;
        Ok(())
    }

    fn successor(&mut self, slot: u64) -> Result<Option<u64>> {
        match self.id_succ.peek()? {
            Some((s, succ)) if s == slot => {
                self.id_succ.next()?;
                Ok(Some(succ))
            }
            _ => Ok(None),
        }
    }

    fn first_request(&mut self, slot: u64) -> Result<Option<Edge>> {
        match self.edge_msg.peek()? {
            Some((s, e)) if s == slot => {
                self.edge_msg.next()?;
                Ok(Some(e))
            }
            _ => Ok(None),
        }
    }

    fn simulate(&mut self, stats: &mut SwapStats) -> Result<()> {
        let mut pq: MinPq<u64, Edge> = MinPq::new(self.em);
        let mut states: [Vec<Edge>; 2] = Default::default();
        let mut post: [Vec<Edge>; 2] = Default::default();
        for (i, s) in self.swaps.iter().enumerate() {
            let i = i as u64;
            for p in 0..2 {
                let slot = 2 * i + p as u64;
                let st = &mut states[p];
                st.clear();
                if let Some(e) = self.first_request(slot)? {
                    st.push(e);
                }
                while pq.peek_key() == Some(slot) {
                    st.push(pq.pop()?.expect("peeked").1);
                }
                if st.is_empty() {
                    return Err(missing("edge state", slot));
                }
                st.sort_unstable();
                st.dedup();
                post[p].clone_from(st);
            }
            let combos = (states[0].len() * states[1].len()) as u64;
            *stats.configurations.entry(combos).or_insert(0) += 1;
            for &ea in &states[0] {
                for &eb in &states[1] {
                    let (t1, t2) = swapped_edges(ea, eb, s.d);
                    if shape_legal(t1, t2) {
                        self.exist_req.push((t1, i, true))?;
                        self.exist_req.push((t2, i, true))?;
                        post[0].push(t1);
                        post[1].push(t2);
                    }
                }
            }
            for st in &states {
                for &e in st {
                    self.exist_req.push((e, i, false))?;
                }
            }
            for p in 0..2 {
                if let Some(succ) = self.successor(2 * i + p as u64)? {
                    let ps = &mut post[p];
                    ps.sort_unstable();
                    ps.dedup();
                    for &e in ps.iter() {
                        pq.push(succ, e)?;
                    }
                }
            }
        }
        debug_assert!(pq.is_empty());
        self.id_succ.rewind()?;
        self.edge_msg.rewind()?;
        self.exist_req.finish()?;
        Ok(())
    }

    /// `next` yields the current edges in sorted order.
    fn load_existence(&mut self, mut next: impl FnMut() -> Result<Option<Edge>>) -> Result<()> {
        let mut cur = next()?;
        let mut chain: Vec<(u64, bool)> = Vec::new();
        while let Some((e, _, _)) = self.exist_req.peek()? {
            chain.clear();
            while let Some((_, swap, query)) = self.exist_req.peek()?.filter(|r| r.0 == e) {
                self.exist_req.next()?;
                match chain.last_mut() {
                    Some(last) if last.0 == swap => last.1 |= query,
                    _ => chain.push((swap, query)),
                }
            }
            while cur.is_some_and(|c| c < e) {
                cur = next()?;
            }
            let mut count = 0u64;
            while cur == Some(e) {
                count += 1;
                cur = next()?;
            }
            // nobody reads the multiplicity after the last query
            while chain.last().is_some_and(|x| !x.1) {
                chain.pop();
            }
            let Some(&(head, _)) = chain.first() else {
                continue;
            };
            if count > 0 {
                self.exist_msg.push((head, e, count))?;
            }
            for w in chain.windows(2) {
                self.exist_succ.push((w[0].0, e, w[1].0))?;
            }
        }
        self.exist_msg.finish()?;
        self.exist_succ.finish()?;
        Ok(())
    }

    /// Returns the final edge of every rewritten id as `(id, edge)`.
    fn perform(&mut self, stats: &mut SwapStats) -> Result<Sorter<(u64, Edge)>> {
        let mut states: MinPq<u64, Edge> = MinPq::new(self.em);
        let mut counts: MinPq<u64, (Edge, u64)> = MinPq::new(self.em);
        let mut updates = Sorter::new(self.em);
        let mut known: Vec<(Edge, u64)> = Vec::new();
        for (i, s) in self.swaps.iter().enumerate() {
            let i = i as u64;
            let mut src = [Edge::default(); 2];
            for (p, e) in src.iter_mut().enumerate() {
                let slot = 2 * i + p as u64;
                *e = match self.first_request(slot)? {
                    Some(e) => e,
                    None => match states.pop()? {
                        Some((k, e)) if k == slot => e,
                        _ => return Err(missing("forwarded edge", slot)),
                    },
                };
            }

            known.clear();
            while let Some((_, e, c)) = self.exist_msg.peek()?.filter(|m| m.0 == i) {
                self.exist_msg.next()?;
                known.push((e, c));
            }
            while counts.peek_key() == Some(i) {
                known.push(counts.pop()?.expect("peeked").1);
            }
            let count_of = |e: Edge| known.iter().find(|k| k.0 == e).map_or(0, |k| k.1);

            let (t1, t2) = swapped_edges(src[0], src[1], s.d);
            let legal = shape_legal(t1, t2) && count_of(t1) == 0 && count_of(t2) == 0;
            if legal {
                stats.executed += 1;
            } else {
                stats.skipped += 1;
            }

            while let Some((_, e, succ)) = self.exist_succ.peek()?.filter(|m| m.0 == i) {
                self.exist_succ.next()?;
                let mut c = count_of(e) as i64;
                if legal {
                    c += (e == t1) as i64 + (e == t2) as i64;
                    c -= (e == src[0]) as i64 + (e == src[1]) as i64;
                }
                debug_assert!(c >= 0);
                if c > 0 {
                    counts.push(succ, (e, c as u64))?;
                }
            }

            let result = if legal { [t1, t2] } else { src };
            for (p, e) in result.into_iter().enumerate() {
                match self.successor(2 * i + p as u64)? {
                    Some(succ) => states.push(succ, e)?,
                    None => updates.push((if p == 0 { s.a } else { s.b }, e))?,
                }
            }
        }
        updates.finish()?;
        Ok(updates)
    }

    fn replace_updates(
        &mut self,
        list: &mut SequenceStore<Edge>,
        mut updates: Sorter<(u64, Edge)>,
        stats: &mut SwapStats,
    ) -> Result<SequenceStore<Edge>> {
        let mut out = SequenceStore::new(self.em);
        let mut reader = list.reader()?;
        let mut invalid = self.invalid.reader();
        while let Some(e) = reader.next_item()? {
            if invalid.next().expect("one bit per edge") {
                let (_, u) = updates.next()?.ok_or_else(|| missing("update", 0))?;
                out.push(u)?;
                stats.touched.push(u);
            } else {
                out.push(e)?;
            }
        }
        Ok(out)
    }

    fn merge_updates(
        &mut self,
        list: &mut SequenceStore<Edge>,
        mut updates: Sorter<Edge>,
        stats: &mut SwapStats,
    ) -> Result<SequenceStore<Edge>> {
        let mut out = SequenceStore::new(self.em);
        let mut reader = list.reader()?;
        let mut invalid = self.invalid.reader();
        let mut upd = updates.next()?;
        while let Some(e) = reader.next_item()? {
            if invalid.next().expect("one bit per edge") {
                continue;
            }
            while let Some(u) = upd.filter(|u| *u <= e) {
                out.push(u)?;
                stats.touched.push(u);
                upd = updates.next()?;
            }
            out.push(e)?;
        }
        while let Some(u) = upd {
            out.push(u)?;
            stats.touched.push(u);
            upd = updates.next()?;
        }
        Ok(out)
    }
}
