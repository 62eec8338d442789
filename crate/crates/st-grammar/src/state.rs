//! Stepwise molecule construction with per-token legality.
//!
//! The state mirrors a depth-first SMILES walk: a focus atom, a branch
//! return stack, reserved ring anchors and an optional pending bond order.
//! `apply` enforces the rules that keep any completed sequence a valid
//! molecule (syntax shape, valence budgets, ring size at closure, exact
//! hydrogen pins, aromatic atoms ending on aromatic cycles). `legal_mask`
//! additionally applies lookahead rules that steer sampling away from
//! states that cannot finish, so masked sampling rarely dead-ends.

use crate::token::{AtomDesc, Token};
use crate::vocab::{Vocab, MAX_OPEN_ANCHORS};
use crate::GrammarError;
use mol_core::constraint::ConstraintConfig;
use mol_core::element::{Element, ValenceTable};
use mol_core::graph::{
    bridges_of, derive_hydrogens, hydrogens_consistent, Bond, BondLoad, BondOrder, MolGraph,
};

const NO_ISLAND: u32 = u32::MAX;
const UNREACHED: u32 = u32::MAX;

/// Aromatic growth is masked unless an anchor of the same ring system sits
/// within this graph distance of the focus, so every aromatic chain stays
/// closable into rings of allowed size.
const AROMATIC_WINDOW: u32 = 4;

/// Smallest ring an aromatic closure may form.
const MIN_AROMATIC_RING: u32 = 5;

/// Open anchors allowed on a single atom.
const MAX_ANCHORS_PER_ATOM: u32 = 2;

#[derive(Debug, Clone)]
struct AtomNode {
    desc: AtomDesc,
    load: BondLoad,
    anchors: u32,
    doubles: u32,
}

/// Sampling strictness knobs, applied in `legal_mask` only. They bound how
/// many unfinished obligations a sampled sequence may pile up, which keeps
/// random rollouts from wedging; `unbounded` admits every valid molecule.
#[derive(Debug, Clone)]
pub struct Discipline {
    /// Open ring anchors allowed at once.
    pub max_open_anchors: usize,
    /// Aromatic ring systems that may be incomplete at once.
    pub max_pending_islands: usize,
    /// Finish each aromatic ring before anything else: while the focus sits
    /// on an incomplete ring system, only ring-building tokens are offered,
    /// and starting such a system reserves the atoms and the anchor slot the
    /// ring will need. Keeps blind sampling out of states it cannot finish.
    pub focused_rings: bool,
}

impl Default for Discipline {
    fn default() -> Discipline {
        Discipline {
            max_open_anchors: 4,
            max_pending_islands: 1,
            focused_rings: true,
        }
    }
}

impl Discipline {
    pub fn unbounded() -> Discipline {
        Discipline {
            max_open_anchors: usize::MAX,
            max_pending_islands: usize::MAX,
            focused_rings: false,
        }
    }

    /// Wide limits for model-guided sampling, where the model has learned
    /// realistic ring patterns and only needs guardrails, not supervision.
    pub fn loose() -> Discipline {
        Discipline {
            max_open_anchors: 12,
            max_pending_islands: 4,
            focused_rings: false,
        }
    }
}

/// Derived per-step facts about the aromatic part of the graph.
#[derive(Debug, Clone, Default)]
struct Analysis {
    /// Aromatic atom not yet on any cycle of aromatic bonds.
    pending: Vec<bool>,
    /// Connected component id over aromatic bonds; `NO_ISLAND` for
    /// non-aromatic atoms.
    island: Vec<u32>,
    island_anchors: Vec<u32>,
    island_pending: Vec<bool>,
}

impl Analysis {
    fn anchors_in(&self, isl: u32) -> u32 {
        self.island_anchors[isl as usize]
    }

    fn pending_in(&self, isl: u32) -> bool {
        self.island_pending[isl as usize]
    }
}

struct Ctx {
    /// BFS distance from the focus over all bonds; `UNREACHED` without one.
    dist: Vec<u32>,
    /// BFS distance to the nearest branch-stack atom (other than the focus)
    /// that can still take a bond. Only such atoms and the focus side can
    /// ever host or grow toward a ring closure, so anchors out of their
    /// range are stranded.
    cap_dist: Vec<u32>,
    /// The focus sits on the stack (it just opened a branch), so a step that
    /// consumes its capacity also shrinks the stack's reach.
    focus_on_stack: bool,
}

#[derive(Debug, Clone)]
pub struct GenState {
    cfg: ConstraintConfig,
    table: ValenceTable,
    discipline: Discipline,
    atoms: Vec<AtomNode>,
    bonds: Vec<(usize, usize, BondOrder)>,
    adj: Vec<Vec<(usize, BondOrder)>>,
    focus: Option<usize>,
    stack: Vec<usize>,
    branch_fresh: bool,
    /// The focus atom was just placed, so ring anchors may still open on it.
    arrival_fresh: bool,
    pending_bond: Option<BondOrder>,
    /// Open anchors in opening order; values are atom indices.
    anchors: Vec<usize>,
    started: bool,
    finished: bool,
    steps: usize,
    analysis: Analysis,
}

impl GenState {
    pub fn new(cfg: ConstraintConfig, table: ValenceTable) -> GenState {
        GenState::with_discipline(cfg, table, Discipline::default())
    }

    pub fn with_discipline(
        cfg: ConstraintConfig,
        table: ValenceTable,
        discipline: Discipline,
    ) -> GenState {
        GenState {
            cfg,
            table,
            discipline,
            atoms: Vec::new(),
            bonds: Vec::new(),
            adj: Vec::new(),
            focus: None,
            stack: Vec::new(),
            branch_fresh: false,
            arrival_fresh: false,
            pending_bond: None,
            anchors: Vec::new(),
            started: false,
            finished: false,
            steps: 0,
            analysis: Analysis::default(),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn finished(&self) -> bool {
        self.finished
    }

    pub fn open_anchors(&self) -> usize {
        self.anchors.len()
    }

    pub fn open_branches(&self) -> usize {
        self.stack.len()
    }

    pub fn has_pending_bond(&self) -> bool {
        self.pending_bond.is_some()
    }

    /// Apply one token, rejecting anything that breaks a structural rule.
    pub fn apply(&mut self, tok: Token) -> Result<(), GrammarError> {
        let ctx = self.context();
        if !self.hard_legal(tok, &ctx) {
            return Err(GrammarError::Illegal {
                position: self.steps,
                token: tok.to_string(),
            });
        }
        self.apply_unchecked(tok);
        Ok(())
    }

    /// Bit i set means vocabulary token i may come next. Combines the hard
    /// rules with the lookahead rules.
    pub fn legal_mask(&self, vocab: &Vocab) -> u64 {
        let ctx = self.context();
        let mut mask = 0u64;
        for (i, &t) in vocab.tokens().iter().enumerate() {
            if self.hard_legal(t, &ctx) && self.lookahead_ok(t, &ctx, vocab) {
                mask |= 1 << i;
            }
        }
        mask
    }

    pub fn is_legal(&self, vocab: &Vocab, tok: Token) -> bool {
        let ctx = self.context();
        self.hard_legal(tok, &ctx) && self.lookahead_ok(tok, &ctx, vocab)
    }

    #[doc(hidden)]
    pub fn debug_stats(&self, vocab: &Vocab) -> (usize, usize, usize, u32) {
        let ctx = self.context();
        let mut hard = 0u64;
        for (i, &t) in vocab.tokens().iter().enumerate() {
            if self.hard_legal(t, &ctx) {
                hard |= 1 << i;
            }
        }
        let pending_islands = self.analysis.island_pending.iter().filter(|&&p| p).count();
        (self.anchors.len(), pending_islands, self.stack.len(), hard.count_ones())
    }

    #[doc(hidden)]
    pub fn debug_dump(&self) -> String {
        use std::fmt::Write;
        let ctx = self.context();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "focus={:?} stack={:?} anchors={:?} fresh={} pending_bond={:?}",
            self.focus, self.stack, self.anchors, self.arrival_fresh, self.pending_bond
        );
        for (i, a) in self.atoms.iter().enumerate() {
            let _ = writeln!(
                s,
                "  atom {i}: {:?} ar={} load=(a{} u{}) anchors={} island={} pending={} dist={} cap_dist={}",
                a.desc.element,
                a.desc.aromatic,
                a.load.aromatic,
                a.load.units,
                a.anchors,
                self.analysis.island[i],
                self.analysis.island[i] != NO_ISLAND
                    && self.analysis.island_pending[self.analysis.island[i] as usize],
                ctx.dist[i],
                ctx.cap_dist[i],
            );
        }
        s
    }

    #[doc(hidden)]
    pub fn debug_hard_only(&self, vocab: &Vocab) -> Vec<Token> {
        let ctx = self.context();
        vocab
            .tokens()
            .iter()
            .copied()
            .filter(|&t| self.hard_legal(t, &ctx) && !self.lookahead_ok(t, &ctx, vocab))
            .collect()
    }

    /// Finish into a validated molecular graph.
    pub fn into_graph(self) -> Result<MolGraph, GrammarError> {
        if !self.finished {
            return Err(GrammarError::Incomplete);
        }
        self.preview_graph()
    }

    /// Validate the construction so far as if it were already complete.
    pub fn preview_graph(&self) -> Result<MolGraph, GrammarError> {
        let atoms = self.atoms.iter().map(|n| n.desc.to_atom()).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|&(a, b, order)| Bond { a, b, order })
            .collect();
        MolGraph::with_table(atoms, bonds, &self.table).map_err(Into::into)
    }

    fn context(&self) -> Ctx {
        let focus: &[usize] = match self.focus {
            Some(ref f) => std::slice::from_ref(f),
            None => &[],
        };
        let capable: Vec<usize> = self
            .stack
            .iter()
            .copied()
            .filter(|&v| Some(v) != self.focus && self.can_extend(v))
            .collect();
        Ctx {
            dist: self.multi_bfs(focus),
            cap_dist: self.multi_bfs(&capable),
            focus_on_stack: self.focus.is_some_and(|f| self.stack.contains(&f)),
        }
    }

    /// One more bond fits on this atom beyond its reserved closures.
    fn can_extend(&self, idx: usize) -> bool {
        let node = &self.atoms[idx];
        self.completable_ext(node.desc, node.load, node.anchors, 1)
    }

    /// Breadth-first distances that never step across a triple bond: triple
    /// bonds must stay outside rings, so no closure path runs through one.
    fn multi_bfs(&self, sources: &[usize]) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.atoms.len()];
        let mut queue = std::collections::VecDeque::new();
        for &s in sources {
            if dist[s] == UNREACHED {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &(v, o) in &self.adj[u] {
                if o != BondOrder::Triple && dist[v] == UNREACHED {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn hard_legal(&self, tok: Token, ctx: &Ctx) -> bool {
        if self.finished {
            return false;
        }
        if !self.started {
            return tok == Token::Bos;
        }
        match tok {
            Token::Bos => false,
            Token::Eos => self.eos_ok(),
            Token::Atom(d) => self.atom_ok(d, ctx),
            Token::Bond(o) => self.bond_ok(o),
            Token::RingOpen => self.ring_open_ok(ctx),
            Token::RingClose(k) => self.ring_close_with(k as usize, self.pending_bond, ctx),
            Token::BranchOpen => self.branch_open_ok(),
            Token::BranchClose => self.branch_close_ok(ctx),
        }
    }

    /// Sampling-only rules that keep a sequence finishable: aromatic growth
    /// stays near an open anchor of its ring system, a founding aromatic
    /// atom enters a ring while fresh, obligations stay under the discipline
    /// caps, and a bond token needs some legal continuation.
    fn lookahead_ok(&self, tok: Token, ctx: &Ctx, vocab: &Vocab) -> bool {
        if self.founding_atom_needs_anchor() {
            let rescue = match tok {
                Token::RingOpen => true,
                Token::RingClose(k) => {
                    (k as usize) < self.anchors.len()
                        && self.atoms[self.anchors[k as usize]].desc.aromatic
                        && self.pending_bond.is_none_or(|o| o == BondOrder::Aromatic)
                }
                _ => false,
            };
            if !rescue {
                return false;
            }
        }
        match tok {
            Token::Atom(d) => self.island_budget_ok(d, self.pending_bond, ctx),
            Token::Bond(o) => self.bond_continuable(o, ctx, vocab),
            Token::RingOpen => {
                if self.anchors.len() >= self.discipline.max_open_anchors {
                    return false;
                }
                if let Some(isl) = self.focused_pending() {
                    if self.analysis.anchors_in(isl) > 0 {
                        return false;
                    }
                }
                let mut probe = self.clone();
                probe.apply_unchecked(Token::RingOpen);
                let probe_ctx = probe.context();
                vocab.tokens().iter().any(|&t| {
                    t != Token::RingOpen
                        && probe.hard_legal(t, &probe_ctx)
                        && probe.lookahead_ok(t, &probe_ctx, vocab)
                })
            }
            Token::BranchOpen => {
                if self.focused_pending().is_some() {
                    return false;
                }
                let mut probe = self.clone();
                probe.apply_unchecked(Token::BranchOpen);
                let probe_ctx = probe.context();
                vocab.tokens().iter().any(|&t| match t {
                    Token::Bond(o) => {
                        probe.hard_legal(t, &probe_ctx)
                            && probe.bond_continuable(o, &probe_ctx, vocab)
                    }
                    _ => false,
                })
            }
            Token::BranchClose => self.focused_pending().is_none(),
            _ => true,
        }
    }

    /// The focus island while it is an unfinished ring under the focused
    /// policy; the only moves offered there build the ring out.
    fn focused_pending(&self) -> Option<u32> {
        if !self.discipline.focused_rings {
            return None;
        }
        let f = self.focus?;
        let isl = self.analysis.island[f];
        if isl != NO_ISLAND && self.analysis.pending_in(isl) {
            Some(isl)
        } else {
            None
        }
    }

    /// A bond token is only worth emitting when some arrival or closure can
    /// follow it.
    fn bond_continuable(&self, o: BondOrder, ctx: &Ctx, vocab: &Vocab) -> bool {
        let f = self.focus.expect("bond passed the hard rules");
        if let Some(isl) = self.focused_pending() {
            if o != BondOrder::Aromatic {
                return false;
            }
            // The walk may not outrun what the atom budget can still close.
            if let Some(d) = self
                .anchors
                .iter()
                .filter(|&&a| self.analysis.island[a] == isl)
                .map(|&a| ctx.dist[a])
                .min()
            {
                let needed = 1 + 3u32.saturating_sub(d) as usize;
                if self.atoms.len() + needed > self.cfg.max_atoms {
                    return false;
                }
            }
        }
        if o == BondOrder::Aromatic {
            let isl = self.analysis.island[f];
            let anchored = self
                .anchors
                .iter()
                .any(|&a| self.analysis.island[a] == isl && ctx.dist[a] <= AROMATIC_WINDOW);
            if !anchored {
                return false;
            }
        }
        let atom_possible = self.atoms.len() < self.cfg.max_atoms
            && self.handoff_ok(o)
            && vocab.atom_descs().any(|d| {
                self.pair_ok(f, d, o)
                    && self.island_budget_ok(d, Some(o), ctx)
                    && self.arrival_ok(d, Some(o))
                    && self.anchors_witnessed(ctx, &self.arrival_witnesses(d, o, ctx))
            });
        if atom_possible {
            return true;
        }
        (0..self.anchors.len()).any(|k| self.ring_close_with(k, Some(o), ctx))
    }

    /// The founding atom of an aromatic ring system must enter a ring while
    /// it is still fresh: open an anchor, or close into an aromatic one.
    /// Anchors only open on fresh atoms and growing the system needs an
    /// anchor in reach, so once freshness is spent an anchorless system can
    /// never close a ring.
    fn founding_atom_needs_anchor(&self) -> bool {
        if !self.arrival_fresh {
            return false;
        }
        let Some(f) = self.focus else {
            return false;
        };
        if !self.atoms[f].desc.aromatic {
            return false;
        }
        let isl = self.analysis.island[f];
        self.analysis.island_pending[isl as usize]
            && !self.anchors.iter().any(|&a| self.analysis.island[a] == isl)
    }

    /// An arriving aromatic atom opens a new unfinished ring system unless
    /// it extends the focus one through an aromatic bond. Under the focused
    /// policy that opening also reserves what the ring will consume: an
    /// anchor slot, enough of the atom budget to close at least a five-ring,
    /// and witnesses for every other anchor that hold up without the moving
    /// tip, since the tip will spend the whole ring walking away.
    fn island_budget_ok(&self, d: AtomDesc, o: Option<BondOrder>, ctx: &Ctx) -> bool {
        if !d.aromatic || o == Some(BondOrder::Aromatic) {
            return true;
        }
        let open = self.analysis.island_pending.iter().filter(|&&p| p).count();
        if open >= self.discipline.max_pending_islands {
            return false;
        }
        if self.discipline.focused_rings {
            if self.anchors.len() >= self.discipline.max_open_anchors.min(MAX_OPEN_ANCHORS) {
                return false;
            }
            if self.atoms.len() + 5 > self.cfg.max_atoms {
                return false;
            }
            if !self.anchors_witnessed(ctx, &[]) {
                return false;
            }
        }
        true
    }

    /// Bond-order chemistry from the focus side, checked when the bond is
    /// emitted: aromatic orders need an aromatic focus, double and triple
    /// orders a non-aromatic one, triples start from carbon or nitrogen,
    /// and the focus must have its double slot free.
    fn order_from_ok(&self, f: usize, o: BondOrder) -> bool {
        let node = &self.atoms[f];
        match o {
            BondOrder::Single => true,
            BondOrder::Aromatic => node.desc.aromatic,
            BondOrder::Double => !node.desc.aromatic && self.double_slot_free(f),
            BondOrder::Triple => {
                !node.desc.aromatic && matches!(node.desc.element, Element::C | Element::N)
            }
        }
    }

    /// Bond-order chemistry across both endpoints as an atom arrives:
    /// double bonds touching sulfur pair with oxygen, triple bonds are
    /// alkyne or nitrile shaped, multiple orders never reach an aromatic
    /// arrival.
    fn pair_ok(&self, f: usize, d: AtomDesc, o: BondOrder) -> bool {
        let fe = self.atoms[f].desc.element;
        match o {
            BondOrder::Single | BondOrder::Aromatic => true,
            BondOrder::Double => {
                !d.aromatic
                    && (fe != Element::S || d.element == Element::O)
                    && (d.element != Element::S || fe == Element::O)
            }
            BondOrder::Triple => {
                !d.aromatic
                    && matches!(
                        (fe, d.element),
                        (Element::C, Element::C) | (Element::C, Element::N) | (Element::N, Element::C)
                    )
            }
        }
    }

    /// Carbon and nitrogen hold one double bond at most; sulfur takes more
    /// (sulfones), oxygen is capped by valence anyway.
    fn double_slot_free(&self, idx: usize) -> bool {
        let node = &self.atoms[idx];
        !matches!(node.desc.element, Element::C | Element::N) || node.doubles == 0
    }

    /// Triple bonds stay acyclic. A placed triple is a cut edge until some
    /// closure bridges around it, so the closure is rejected when every
    /// path between its endpoints runs through a triple.
    fn closure_encircles_triple(&self, f: usize, b: usize) -> bool {
        self.bonds
            .iter()
            .filter(|&&(_, _, o)| o == BondOrder::Triple)
            .any(|&(u, v, _)| !self.reachable_avoiding(f, b, u, v))
    }

    /// Is `to` reachable from `from` without crossing the edge `(u, v)`.
    fn reachable_avoiding(&self, from: usize, to: usize, u: usize, v: usize) -> bool {
        let mut seen = vec![false; self.atoms.len()];
        let mut queue = std::collections::VecDeque::from([from]);
        seen[from] = true;
        while let Some(x) = queue.pop_front() {
            if x == to {
                return true;
            }
            for &(y, _) in &self.adj[x] {
                let banned = (x == u && y == v) || (x == v && y == u);
                if !banned && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        false
    }

    /// Ring closures carry single or aromatic orders, or a double order
    /// between non-sulfur plain atoms with free double slots. A closing
    /// triple would put it inside the ring.
    fn closure_order_ok(&self, f: usize, b: usize, o: BondOrder) -> bool {
        match o {
            BondOrder::Single | BondOrder::Aromatic => true,
            BondOrder::Triple => false,
            BondOrder::Double => [f, b].iter().all(|&i| {
                let node = &self.atoms[i];
                !node.desc.aromatic
                    && node.desc.element != Element::S
                    && self.double_slot_free(i)
            }),
        }
    }

    fn eos_ok(&self) -> bool {
        if self.atoms.is_empty()
            || !self.stack.is_empty()
            || self.pending_bond.is_some()
            || !self.anchors.is_empty()
        {
            return false;
        }
        if self.analysis.pending.iter().any(|&p| p) {
            return false;
        }
        self.atoms.iter().all(|node| {
            let atom = node.desc.to_atom();
            match node.desc.explicit_h {
                None => derive_hydrogens(&atom, node.load, &self.table).is_some(),
                Some(h) => hydrogens_consistent(&atom, node.load, h, &self.table),
            }
        })
    }

    fn atom_ok(&self, d: AtomDesc, ctx: &Ctx) -> bool {
        if self.atoms.len() >= self.cfg.max_atoms {
            return false;
        }
        if self.atoms.is_empty() {
            return self.arrival_ok(d, None);
        }
        let Some(o) = self.pending_bond else {
            return false;
        };
        let f = self.focus.expect("pending bond implies focus");
        self.pair_ok(f, d, o)
            && self.arrival_ok(d, Some(o))
            && self.handoff_ok(o)
            && self.anchors_witnessed(ctx, &self.arrival_witnesses(d, o, ctx))
    }

    /// Focus-side witnesses after an arrival: the new atom one step out, and
    /// the old focus where it stays on the stack, priced at its new load.
    fn arrival_witnesses(&self, d: AtomDesc, o: BondOrder, ctx: &Ctx) -> [(bool, u32); 2] {
        let mut load = BondLoad::default();
        load.add(o);
        // An atom arriving over a triple bond sits behind a wall no closure
        // path may cross, so it cannot vouch for anything.
        let arriving = o != BondOrder::Triple && self.completable_ext(d, load, 0, 1);
        let old_focus = ctx.focus_on_stack && {
            let f = self.focus.expect("on-stack focus exists");
            let node = &self.atoms[f];
            let mut fl = node.load;
            fl.add(o);
            self.completable_ext(node.desc, fl, node.anchors, 1)
        };
        [(arriving, 1), (old_focus, 0)]
    }

    /// Every open anchor needs a witness it can close against: an atom with
    /// spare bond capacity within ring range, either on the focus side or on
    /// the branch stack. Each focus-side witness is given as its capacity
    /// flag plus its distance beyond the current focus.
    fn anchors_witnessed(&self, ctx: &Ctx, witnesses: &[(bool, u32)]) -> bool {
        let limit = (self.cfg.max_ring_size - 1) as u32;
        self.anchors.iter().all(|&a| {
            ctx.cap_dist[a] <= limit
                || witnesses.iter().any(|&(cap, off)| {
                    cap && ctx.dist[a].saturating_add(off) <= limit
                })
        })
    }

    /// Can an atom of this template join via the given bond and still reach
    /// a finished state.
    fn arrival_ok(&self, d: AtomDesc, o: Option<BondOrder>) -> bool {
        if d.aromatic && !d.element.aromatic_capable() {
            return false;
        }
        if self.table.allowed(d.element, d.charge).is_none() {
            return false;
        }
        if o == Some(BondOrder::Aromatic) && !d.aromatic {
            return false;
        }
        let mut load = BondLoad::default();
        if let Some(o) = o {
            load.add(o);
        }
        self.completable(d, load, 0)
    }

    /// Checks on the focus atom when it hands the focus to a new neighbor.
    fn handoff_ok(&self, o: BondOrder) -> bool {
        let f = self.focus.expect("handoff requires a focus");
        let mut fload = self.atoms[f].load;
        fload.add(o);
        if !self.stack.contains(&f) && !self.left_behind_ok(f, fload) {
            return false;
        }
        // Moving the focus out of an unfinished ring system is only allowed
        // while the system keeps an anchor or a return point.
        if o != BondOrder::Aromatic && self.atoms[f].desc.aromatic {
            let isl = self.analysis.island[f];
            if self.analysis.pending_in(isl)
                && self.analysis.anchors_in(isl) == 0
                && !self.stack.iter().any(|&s| self.analysis.island[s] == isl)
            {
                return false;
            }
        }
        true
    }

    fn bond_ok(&self, o: BondOrder) -> bool {
        let Some(f) = self.focus else {
            return false;
        };
        if self.pending_bond.is_some() || !self.order_from_ok(f, o) {
            return false;
        }
        let mut load = self.atoms[f].load;
        load.add(o);
        self.completable(self.atoms[f].desc, load, self.atoms[f].anchors)
    }

    fn ring_open_ok(&self, ctx: &Ctx) -> bool {
        let Some(f) = self.focus else {
            return false;
        };
        // Anchors open only while the focus atom is fresh; the canonical
        // writer emits every ring open right after its atom, and a stale
        // atom re-anchoring would hide the obligation from the analysis
        // that already ran on it.
        if self.pending_bond.is_some()
            || !self.arrival_fresh
            || self.anchors.len() >= MAX_OPEN_ANCHORS
        {
            return false;
        }
        let node = &self.atoms[f];
        if node.anchors >= MAX_ANCHORS_PER_ATOM {
            return false;
        }
        if !self.completable_ext(node.desc, node.load, node.anchors + 1, 0) {
            return false;
        }
        // Reserving the slot may eat the focus capacity other anchors were
        // counting on, and the fresh anchor needs a witness of its own.
        let cap_after = self.completable_ext(node.desc, node.load, node.anchors + 1, 1);
        if !self.anchors_witnessed(ctx, &[(cap_after, 0)]) {
            return false;
        }
        let limit = (self.cfg.max_ring_size - 1) as u32;
        cap_after || ctx.cap_dist[f] <= limit
    }

    fn ring_close_with(&self, k: usize, forced: Option<BondOrder>, ctx: &Ctx) -> bool {
        if self.branch_fresh || k >= self.anchors.len() {
            return false;
        }
        let Some(f) = self.focus else {
            return false;
        };
        let b = self.anchors[k];
        if b == f || self.adj[f].iter().any(|&(n, _)| n == b) {
            return false;
        }
        let fa = self.atoms[f].desc.aromatic;
        let ba = self.atoms[b].desc.aromatic;
        let o = forced.unwrap_or(if fa && ba {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        });
        if o == BondOrder::Aromatic && !(fa && ba) {
            return false;
        }
        if !self.closure_order_ok(f, b, o) {
            return false;
        }
        if self.closure_encircles_triple(f, b) {
            return false;
        }
        let d = ctx.dist[b];
        if d < 2 || d == UNREACHED || (d + 1) as usize > self.cfg.max_ring_size {
            return false;
        }
        if o == BondOrder::Aromatic && d + 1 < MIN_AROMATIC_RING {
            return false;
        }
        let mut fl = self.atoms[f].load;
        fl.add(o);
        if !self.completable(self.atoms[f].desc, fl, self.atoms[f].anchors) {
            return false;
        }
        let mut bl = self.atoms[b].load;
        bl.add(o);
        let b_anchors = self.atoms[b].anchors - 1;
        if !self.completable(self.atoms[b].desc, bl, b_anchors) {
            return false;
        }
        if !self.stack.contains(&b) {
            let ok = if b_anchors == 0 {
                self.seal_ok(b, bl)
            } else {
                !self.atoms[b].desc.aromatic || bl.aromatic + b_anchors >= 2
            };
            if !ok {
                return false;
            }
        }
        // Post-closure state checks on a probe: no pending ring system may
        // be left without an anchor (stale atoms cannot re-anchor, so it
        // could never finish), and the remaining anchors must keep their
        // witnesses under the shifted distances.
        {
            let mut probe = self.clone();
            probe.pending_bond = Some(o);
            probe.apply_unchecked(Token::RingClose(k as u8));
            let orphaned = probe
                .analysis
                .island_pending
                .iter()
                .zip(&probe.analysis.island_anchors)
                .any(|(&p, &a)| p && a == 0);
            if orphaned {
                return false;
            }
            if self.anchors.len() > 1 {
                let pctx = probe.context();
                let pf = probe.focus.expect("closure keeps the focus");
                if !probe.anchors_witnessed(&pctx, &[(probe.can_extend(pf), 0)]) {
                    return false;
                }
            }
        }
        true
    }

    fn branch_open_ok(&self) -> bool {
        let Some(f) = self.focus else {
            return false;
        };
        if self.pending_bond.is_some() || self.branch_fresh {
            return false;
        }
        if self.atoms.len() >= self.cfg.max_atoms {
            return false;
        }
        let mut load = self.atoms[f].load;
        load.units += 1;
        self.completable(self.atoms[f].desc, load, self.atoms[f].anchors)
    }

    fn branch_close_ok(&self, ctx: &Ctx) -> bool {
        if self.stack.is_empty() || self.pending_bond.is_some() || self.branch_fresh {
            return false;
        }
        // The focus retreats to the stack; every anchor must keep a stack
        // witness, because the closed-off branch can no longer grow.
        if !self.anchors_witnessed(ctx, &[]) {
            return false;
        }
        let f = self.focus.expect("open branch implies focus");
        let rest = &self.stack[..self.stack.len() - 1];
        if !rest.contains(&f) && !self.left_behind_ok(f, self.atoms[f].load) {
            return false;
        }
        if self.atoms[f].desc.aromatic {
            let isl = self.analysis.island[f];
            let ret = *self.stack.last().expect("checked nonempty");
            let alive = self.analysis.anchors_in(isl) > 0
                || self.analysis.island[ret] == isl
                || rest.iter().any(|&s| self.analysis.island[s] == isl);
            if self.analysis.pending_in(isl) && !alive {
                return false;
            }
        }
        true
    }

    /// Feasibility with future obligations priced in: an aromatic atom still
    /// owes aromatic bonds up to two, and each open anchor owes a closure.
    /// Obligations overlap where an anchor closure can be one of the owed
    /// aromatic bonds.
    fn completable(&self, d: AtomDesc, load: BondLoad, anchors_after: u32) -> bool {
        self.completable_ext(d, load, anchors_after, 0)
    }

    /// As `completable`, reserving `extra_bonds` further bonds that may also
    /// overlap the owed aromatic bonds.
    fn completable_ext(
        &self,
        d: AtomDesc,
        load: BondLoad,
        anchors_after: u32,
        extra_bonds: u32,
    ) -> bool {
        let need_arom = if d.aromatic {
            2u32.saturating_sub(load.aromatic)
        } else {
            0
        };
        let extra = (anchors_after + extra_bonds).saturating_sub(need_arom);
        let probe = BondLoad {
            aromatic: load.aromatic + need_arom,
            units: load.units + extra,
        };
        let atom = d.to_atom();
        match d.explicit_h {
            None => derive_hydrogens(&atom, probe, &self.table).is_some(),
            Some(h) => {
                let Some(allowed) = self.table.allowed(d.element, d.charge) else {
                    return false;
                };
                let mut totals = vec![probe.pi_total()];
                if d.aromatic && d.charge == 0 && d.element.lone_pair_donor() && probe.aromatic > 0
                {
                    totals.push(probe.donor_total());
                }
                allowed
                    .iter()
                    .any(|&t| totals.iter().any(|&tot| tot + u32::from(h) <= u32::from(t)))
            }
        }
    }

    /// Leaving an atom behind (off focus and off the stack) freezes it: no
    /// bonds can arrive beyond its own anchor closures. With no anchors it
    /// must seal exactly; an aromatic atom with anchors must still be able
    /// to reach two aromatic bonds through closures alone.
    fn left_behind_ok(&self, idx: usize, load: BondLoad) -> bool {
        let anchors = self.atoms[idx].anchors;
        if anchors == 0 {
            return self.seal_ok(idx, load);
        }
        !self.atoms[idx].desc.aromatic || load.aromatic + anchors >= 2
    }

    /// Final consistency for an atom that can no longer gain bonds.
    fn seal_ok(&self, idx: usize, load: BondLoad) -> bool {
        let node = &self.atoms[idx];
        if node.desc.aromatic && load.aromatic < 2 {
            return false;
        }
        let atom = node.desc.to_atom();
        match node.desc.explicit_h {
            None => derive_hydrogens(&atom, load, &self.table).is_some(),
            Some(h) => hydrogens_consistent(&atom, load, h, &self.table),
        }
    }

    fn apply_unchecked(&mut self, tok: Token) {
        match tok {
            Token::Bos => self.started = true,
            Token::Eos => self.finished = true,
            Token::Atom(d) => {
                let idx = self.atoms.len();
                self.atoms.push(AtomNode {
                    desc: d,
                    load: BondLoad::default(),
                    anchors: 0,
                    doubles: 0,
                });
                self.adj.push(Vec::new());
                if let Some(o) = self.pending_bond.take() {
                    let f = self.focus.expect("pending bond implies focus");
                    self.add_bond(f, idx, o);
                }
                self.focus = Some(idx);
                self.branch_fresh = false;
            }
            Token::Bond(o) => self.pending_bond = Some(o),
            Token::RingOpen => {
                let f = self.focus.expect("checked by legality");
                self.anchors.push(f);
                self.atoms[f].anchors += 1;
            }
            Token::RingClose(k) => {
                let f = self.focus.expect("checked by legality");
                let b = self.anchors.remove(k as usize);
                let o = self.pending_bond.take().unwrap_or({
                    if self.atoms[f].desc.aromatic && self.atoms[b].desc.aromatic {
                        BondOrder::Aromatic
                    } else {
                        BondOrder::Single
                    }
                });
                self.add_bond(f, b, o);
                self.atoms[b].anchors -= 1;
            }
            Token::BranchOpen => {
                self.stack.push(self.focus.expect("checked by legality"));
                self.branch_fresh = true;
            }
            Token::BranchClose => {
                self.focus = self.stack.pop();
            }
        }
        self.arrival_fresh = match tok {
            Token::Atom(_) => true,
            Token::RingOpen => self.arrival_fresh,
            _ => false,
        };
        self.steps += 1;
        self.refresh();
    }

    fn add_bond(&mut self, a: usize, b: usize, o: BondOrder) {
        self.bonds.push((a, b, o));
        self.adj[a].push((b, o));
        self.adj[b].push((a, o));
        self.atoms[a].load.add(o);
        self.atoms[b].load.add(o);
        if o == BondOrder::Double {
            self.atoms[a].doubles += 1;
            self.atoms[b].doubles += 1;
        }
    }

    fn refresh(&mut self) {
        let n = self.atoms.len();
        let mut arom_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut arom_edges = 0usize;
        for &(a, b, o) in &self.bonds {
            if o == BondOrder::Aromatic {
                arom_adj[a].push((b, arom_edges));
                arom_adj[b].push((a, arom_edges));
                arom_edges += 1;
            }
        }
        let bridge = bridges_of(&arom_adj, arom_edges);
        let mut pending = vec![false; n];
        for i in 0..n {
            if self.atoms[i].desc.aromatic {
                pending[i] = arom_adj[i].iter().all(|&(_, e)| bridge[e]);
            }
        }
        let mut island = vec![NO_ISLAND; n];
        let mut count = 0u32;
        for start in 0..n {
            if !self.atoms[start].desc.aromatic || island[start] != NO_ISLAND {
                continue;
            }
            let id = count;
            count += 1;
            let mut work = vec![start];
            island[start] = id;
            while let Some(u) = work.pop() {
                for &(v, _) in &arom_adj[u] {
                    if island[v] == NO_ISLAND {
                        island[v] = id;
                        work.push(v);
                    }
                }
            }
        }
        let mut island_anchors = vec![0u32; count as usize];
        for &a in &self.anchors {
            if island[a] != NO_ISLAND {
                island_anchors[island[a] as usize] += 1;
            }
        }
        let mut island_pending = vec![false; count as usize];
        for i in 0..n {
            if pending[i] {
                island_pending[island[i] as usize] = true;
            }
        }
        self.analysis = Analysis {
            pending,
            island,
            island_anchors,
            island_pending,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::Vocab;
    use mol_core::parse::parse_smiles;
    use mol_core::write::canonical_smiles;

    fn state() -> GenState {
        GenState::new(ConstraintConfig::default(), ValenceTable::default())
    }

    fn walk(st: &mut GenState, script: &str) {
        for text in script.split_whitespace() {
            let tok: Token = text.parse().expect("token text");
            st.apply(tok).unwrap_or_else(|e| panic!("applying {text}: {e}"));
        }
    }

    fn test_vocab() -> Vocab {
        let mols: Vec<_> = ["c1ccccc1", "c1cc[nH]c1", "CC(=O)O", "FC(F)F", "C#N", "CS(=O)(=O)C"]
            .iter()
            .map(|s| parse_smiles(s).expect("fixture"))
            .collect();
        Vocab::from_molecules(&mols).expect("vocabulary fits")
    }

    fn tok(text: &str) -> Token {
        text.parse().expect("token text")
    }

    #[test]
    fn benzene_walk_completes() {
        let mut st = state();
        walk(&mut st, "<bos> c <ring> : c : c : c : c : c <join0> <eos>");
        assert!(st.finished());
        let mol = st.into_graph().expect("valid aromatic ring");
        assert_eq!(
            canonical_smiles(&mol),
            canonical_smiles(&parse_smiles("c1ccccc1").expect("reference"))
        );
    }

    #[test]
    fn aromatic_growth_requires_nearby_anchor() {
        let vocab = test_vocab();
        let mut st = state();
        walk(&mut st, "<bos> c");
        assert!(!st.is_legal(&vocab, tok(":")));
        walk(&mut st, "<ring>");
        assert!(st.is_legal(&vocab, tok(":")));
    }

    #[test]
    fn finishing_waits_for_open_structure() {
        let vocab = test_vocab();
        let mut st = state();
        walk(&mut st, "<bos> c <ring> : c : c : c : c : c");
        assert!(!st.is_legal(&vocab, tok("<eos>")));
        walk(&mut st, "<join0>");
        assert!(st.is_legal(&vocab, tok("<eos>")));
    }

    #[test]
    fn ring_size_window_at_closure() {
        let vocab = test_vocab();
        let mut st = state();
        walk(&mut st, "<bos> C <ring> - C");
        assert!(!st.is_legal(&vocab, tok("<join0>")), "two-membered ring");
        walk(&mut st, "- C");
        assert!(st.is_legal(&vocab, tok("<join0>")), "cyclopropane closes");
        walk(&mut st, "- C - C - C -");
        // At six ring atoms the closure is still allowed, but growing the
        // chain any further would strand the anchor past the ring limit.
        assert!(st.is_legal(&vocab, tok("<join0>")));
        assert!(
            !st.is_legal(&vocab, tok("C")),
            "chain growth that strands the anchor"
        );
    }

    #[test]
    fn pinned_hydrogen_blocks_mismatched_arrivals() {
        let vocab = test_vocab();
        let mut st = state();
        walk(&mut st, "<bos> c <ring> : c : c :");
        assert!(st.is_legal(&vocab, tok("[nH]")));
        let mut st2 = state();
        walk(&mut st2, "<bos> C -");
        assert!(
            !st2.is_legal(&vocab, tok("[nH]")),
            "a pinned aromatic nitrogen cannot arrive on a chain"
        );
    }

    #[test]
    fn pyrrole_walk_completes() {
        let mut st = state();
        walk(&mut st, "<bos> c <ring> : c : c : [nH] : c <join0> <eos>");
        let mol = st.into_graph().expect("valid five-ring");
        assert_eq!(
            canonical_smiles(&mol),
            canonical_smiles(&parse_smiles("c1cc[nH]c1").expect("reference"))
        );
    }

    #[test]
    fn bonds_are_always_explicit() {
        let vocab = test_vocab();
        let mut st = state();
        walk(&mut st, "<bos> C");
        assert!(!st.is_legal(&vocab, tok("C")), "no implicit chain bonds");
        walk(&mut st, "-");
        assert!(st.is_legal(&vocab, tok("C")));
    }

    #[test]
    fn branch_shape_rules() {
        let vocab = test_vocab();
        let mut st = state();
        assert!(!st.is_legal(&vocab, tok("(")), "branch before any atom");
        walk(&mut st, "<bos> C (");
        assert!(!st.is_legal(&vocab, tok(")")), "empty branch");
        assert!(!st.is_legal(&vocab, tok("(")), "nested open without content");
        walk(&mut st, "= O )");
        walk(&mut st, "- O <eos>");
        assert!(st.into_graph().is_ok(), "formic acid shape");
    }

    #[test]
    fn valence_budget_masks_bonds() {
        let vocab = test_vocab();
        let mut st = state();
        walk(&mut st, "<bos> C - F");
        assert!(!st.is_legal(&vocab, tok("-")), "fluorine is saturated");
        let mut st2 = state();
        walk(&mut st2, "<bos> C = C");
        assert!(st2.is_legal(&vocab, tok("-")), "two spare units remain");
        assert!(!st2.is_legal(&vocab, tok("#")), "five bond units do not fit");
    }

    #[test]
    fn bond_chemistry_is_enforced() {
        let vocab = test_vocab();
        let mut st = state();
        walk(&mut st, "<bos> C = C");
        assert!(!st.is_legal(&vocab, tok("=")), "cumulated double masked");
        assert!(st.apply(tok("=")).is_err(), "cumulated double rejected");
        let mut st2 = state();
        walk(&mut st2, "<bos> C - S");
        assert!(st2.apply(tok("#")).is_err(), "sulfur never triples");
        let mut st3 = state();
        walk(&mut st3, "<bos> C - S =");
        assert!(
            !st3.is_legal(&vocab, tok("C")),
            "sulfur doubles bind oxygen only"
        );
        assert!(st3.apply(tok("O")).is_ok(), "sulfoxide arm accepted");
    }

    #[test]
    fn explicit_closure_bond_order() {
        let mut st = state();
        walk(&mut st, "<bos> C <ring> - C - C - C - C - C = <join0> <eos>");
        let mol = st.into_graph().expect("cyclohexene");
        assert_eq!(
            canonical_smiles(&mol),
            canonical_smiles(&parse_smiles("C1=CCCCC1").expect("reference"))
        );
    }

    #[test]
    fn closure_order_is_inferred_from_endpoints() {
        let mut st = state();
        walk(&mut st, "<bos> C <ring> - C - C - C - C - C <join0> <eos>");
        let mol = st.into_graph().expect("cyclohexane");
        assert_eq!(
            canonical_smiles(&mol),
            canonical_smiles(&parse_smiles("C1CCCCC1").expect("reference"))
        );
    }

    #[test]
    fn illegal_tokens_report_position() {
        let mut st = state();
        walk(&mut st, "<bos> C");
        let err = st.apply(tok("C")).expect_err("implicit bond");
        match err {
            GrammarError::Illegal { position, token } => {
                assert_eq!(position, 2);
                assert_eq!(token, "C");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unfinished_state_does_not_build() {
        let mut st = state();
        walk(&mut st, "<bos> C");
        assert!(matches!(
            st.into_graph(),
            Err(GrammarError::Incomplete)
        ));
    }

    #[test]
    fn leaving_an_unfinished_ring_system_is_masked() {
        let vocab = test_vocab();
        let mut st = state();
        walk(&mut st, "<bos> c <ring> : c : c : c : c : c <join0> -");
        // The ring is complete, so a single bond out is fine.
        assert!(st.is_legal(&vocab, tok("C")));
        let mut st2 = state();
        walk(&mut st2, "<bos> c <ring> : c : c");
        // Mid-ring the only anchor belongs to the same system; stepping off
        // through a plain chain bond would orphan it.
        assert!(!st2.is_legal(&vocab, tok("-")));
    }
}
