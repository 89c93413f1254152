//! The prove and disprove drivers.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Candidate, Engine, EngineError, FailedFinal, Frontier, Node, Reason, Strategy, Triple, Verdict, Witness};
use crate::constraint::ConstraintSet;
use crate::solver::SatStatus;
use crate::symbolic::AnyMem;

/// Every final configuration of a triple, without checking the
/// postcondition.
#[derive(Clone, Debug)]
pub struct Exploration {
    pub init: AnyMem,
    pub init_cs: ConstraintSet,
    pub finals: Vec<Node>,
    pub reasons: Vec<Reason>,
}

impl Engine<'_> {
    fn root(&mut self, t: &Triple, top: bool) -> Result<(AnyMem, Node), EngineError> {
        let (mem, cs) = self.abstract_memory(t, top)?;
        let node = Node { mem: mem.clone(), cmd: t.body.clone(), cs, sites: Vec::new(), tainted: false };
        Ok((mem, node))
    }

    /// Runs the frontier until it is empty or the run must stop, handing
    /// final configurations to `on_final`; stops early when it returns a
    /// verdict.
    fn drive(
        &mut self,
        f: &mut Frontier,
        on_final: &mut dyn FnMut(&mut Self, Node, &mut Frontier) -> Result<Option<Verdict>, EngineError>,
    ) -> Result<Option<Verdict>, EngineError> {
        loop {
            for n in core::mem::take(&mut f.finals) {
                self.metrics.finals += 1;
                if let Some(v) = on_final(self, n, f)? {
                    return Ok(Some(v));
                }
            }
            if f.pending.is_empty() {
                return Ok(None);
            }
            if let Some(r) = self.stop_reason() {
                f.note(r);
                return Ok(None);
            }
            self.collect_step(f)?;
        }
    }

    /// Explores a triple to completion and returns its final
    /// configurations.
    pub fn explore(&mut self, t: &Triple) -> Result<Exploration, EngineError> {
        let (init, root) = self.root(t, true)?;
        let init_cs = root.cs.clone();
        let mut f = Frontier::new(root, Strategy::Bfs, t.ghost);
        let mut finals = Vec::new();
        self.drive(&mut f, &mut |_, n, _| {
            finals.push(n);
            Ok(None)
        })?;
        Ok(Exploration { init, init_cs, finals, reasons: f.reasons })
    }

    /// Tries to establish `⊨ {pre} c {post}`: every reachable final
    /// configuration must entail the postcondition.
    pub fn prove(&mut self, t: &Triple) -> Result<Verdict, EngineError> {
        self.prove_at(t, true)
    }

    fn prove_at(&mut self, t: &Triple, top: bool) -> Result<Verdict, EngineError> {
        let (_, root) = self.root(t, top)?;
        let strategy = self.config.prove_strategy.unwrap_or(Strategy::Dfs);
        let mut f = Frontier::new(root, strategy, t.ghost);
        let mut failures = Vec::new();
        self.drive(&mut f, &mut |eng, n, f| {
            let post = eng.translate(&n.mem.env(), &t.post)?;
            let mut fs = n.cs.to_vec();
            fs.extend(post.negated());
            match eng.sat(&fs)? {
                SatStatus::Unsat => {}
                SatStatus::Sat => failures.push(FailedFinal { mem: n.mem, constraints: n.cs }),
                SatStatus::Unknown(r) => f.note(Reason::SolverUnknown(r)),
            }
            Ok(None)
        })?;
        Ok(if !failures.is_empty() {
            Verdict::NotProved(failures)
        } else if !f.reasons.is_empty() {
            Verdict::Inconclusive { reasons: f.reasons, candidate: None }
        } else {
            Verdict::Proved
        })
    }

    /// Proves the triple of a loop body (cached). `Err` carries why the
    /// proof failed.
    pub(crate) fn prove_body(&mut self, t: &Triple) -> Result<Result<(), String>, EngineError> {
        if let Some(r) = self.body_cache.get(t) {
            return Ok(r.clone());
        }
        self.depth += 1;
        let v = self.prove_at(t, false);
        self.depth -= 1;
        let (res, cacheable) = match v? {
            Verdict::Proved => (Ok(()), true),
            Verdict::NotProved(fs) => (Err(format!("{} final configuration(s) of the body violate it", fs.len())), true),
            Verdict::Inconclusive { reasons, .. } => {
                let transient = reasons.iter().any(|r| matches!(r, Reason::Budget | Reason::Interrupted));
                let text: Vec<String> = reasons.iter().map(|r| format!("{r}")).collect();
                (Err(text.join("; ")), !transient)
            }
            other => (Err(format!("unexpected verdict {}", other.name())), false),
        };
        if cacheable {
            self.body_cache.insert(t.clone(), res.clone());
        }
        Ok(res)
    }

    /// Searches for a concrete counterexample to `{pre} c {post}`.
    pub fn disprove(&mut self, t: &Triple) -> Result<Verdict, EngineError> {
        let (init, root) = self.root(t, true)?;
        let strategy = self.config.disprove_strategy.unwrap_or(Strategy::Bfs);
        let mut f = Frontier::new(root, strategy, t.ghost);
        let mut candidate: Option<Box<Candidate>> = None;
        let found = self.drive(&mut f, &mut |eng, n, f| eng.examine(t, &init, n, f, &mut candidate))?;
        if let Some(v) = found {
            return Ok(v);
        }
        Ok(if f.reasons.is_empty() && candidate.is_none() {
            Verdict::NoCounterexampleFound
        } else {
            Verdict::Inconclusive { reasons: f.reasons, candidate }
        })
    }

    /// Checks one final configuration for a counterexample.
    fn examine(
        &mut self,
        t: &Triple,
        init: &AnyMem,
        n: Node,
        f: &mut Frontier,
        candidate: &mut Option<Box<Candidate>>,
    ) -> Result<Option<Verdict>, EngineError> {
        let post = self.translate(&n.mem.env(), &t.post)?;
        let mut fs = n.cs.to_vec();
        fs.extend(post.negated());
        match self.sat(&fs)? {
            SatStatus::Unsat => return Ok(None),
            SatStatus::Unknown(r) => {
                f.note(Reason::SolverUnknown(r));
                return Ok(None);
            }
            SatStatus::Sat => {}
        }
        let mut weak = Vec::new();
        for (id, site) in &n.sites {
            match self.site_strength(*id, site)? {
                super::Strength::Strong => {}
                super::Strength::Weak => weak.push(site.counter.clone()),
                super::Strength::Unknown(detail) => {
                    f.note(Reason::StrengthUnknown { counter: site.counter.clone(), detail });
                    return Ok(None);
                }
            }
        }
        let Some(sigma) = self.extract(&fs, init, &[&n.mem])? else {
            f.note(Reason::WitnessTooLarge);
            return Ok(None);
        };
        let transcript = self.replay(t, init, &sigma)?;
        let witness = Witness { sigma, transcript };
        if !weak.is_empty() {
            for w in &weak {
                f.note(Reason::WeakInvariant(w.clone()));
            }
            if candidate.is_none() {
                *candidate = Some(Box::new(Candidate { witness, weak_loops: weak }));
            }
            return Ok(None);
        }
        if witness.transcript.confirms() {
            return Ok(Some(Verdict::Refuted(Box::new(witness))));
        }
        let summary = witness.transcript.summary();
        if n.tainted || witness.transcript.resource_failure() {
            f.note(Reason::ReplayFailed(summary));
            return Ok(None);
        }
        Err(EngineError::ReplayMismatch(summary))
    }
}
