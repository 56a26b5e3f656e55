"""Plan simulation: traces, atomicity, and state-based filtering."""
from maintgen.kb.io import snapshot
from maintgen.kb.model import FillerAssertion, FillerAtom, Query
from maintgen.plans import ExpandedConditional
from maintgen.simulate import (
    ResolvedConditional,
    condition_status,
    filter_relevant_steps,
    simulate,
)


def ask_filler(kb, instance, role, value) -> bool:
    return bool(kb.ask(Query(atoms=(FillerAtom(instance, role, value),))))


class TestSimulate:
    def test_unknown_condition_skips_branch(self, pipeline):
        trace = simulate("check-oil-level", pipeline.kb)
        statuses = [(e.action, e.status) for e in trace.entries]
        assert statuses == [
            ("a-open-hood", "executed"),
            ("p-pull-1", "executed"),
            ("p-wipe", "executed"),
            ("p-reinsert", "executed"),
            ("p-pull-2", "executed"),
            ("p-read", "executed"),
            ("a-add-oil", "skipped-by-condition"),
        ]
        assert not trace.blocked

    def test_true_condition_executes_branch(self, pipeline):
        kb = pipeline.kb
        kb.tell(FillerAssertion("oil-level-1", "level-state", "low"))
        working = kb.copy()
        trace = simulate("check-oil-level", working, live=True)
        assert [e.status for e in trace.entries] == ["executed"] * 7
        # postcondition of the executed add-oil step holds afterwards
        assert ask_filler(working, "oil-level-1", "level-state", "ok")

    def test_simulation_does_not_mutate_caller_kb(self, pipeline):
        before = snapshot(pipeline.kb)
        simulate("check-oil-level", pipeline.kb)
        assert snapshot(pipeline.kb) == before

    def test_precondition_block_halts(self, pipeline):
        kb = pipeline.kb
        # spark plugs start tight; loosen them so s-loosen's precondition fails
        kb.tell(FillerAssertion("spark-plug-1", "connection-state", "loose"))
        trace = simulate("replace-spark-plugs", kb)
        assert trace.blocked
        # the walk stops at the block: one entry, nothing after it ran
        assert [(e.action, e.status) for e in trace.entries] == [
            ("s-loosen", "blocked"),
        ]
        failed = [q for q, ok in trace.entries[0].precondition_results if not ok]
        assert failed

    def test_blocked_action_applies_nothing(self, pipeline):
        kb = pipeline.kb
        kb.tell(FillerAssertion("spark-plug-1", "connection-state", "loose"))
        before = snapshot(kb)
        working = kb.copy()
        simulate("replace-spark-plugs", working, live=True)
        # blocked at the first action: no postcondition leaked
        assert snapshot(working) == before

    def test_sequential_state_threading(self, pipeline):
        kb = pipeline.kb.copy()
        trace = simulate("replace-spark-plugs", kb, live=True)
        assert [e.status for e in trace.entries] == ["executed"] * 3
        assert ask_filler(kb, "spark-plug-1", "connection-state", "disconnected")
        assert ask_filler(kb, "spark-plug-2", "connection-state", "tight")

    def test_resolved_conditionals_in_trace(self, pipeline):
        kb = pipeline.kb
        kb.tell(FillerAssertion("oil-level-1", "level-state", "low"))
        trace = simulate("check-oil-level", kb)
        conds = [s for s in trace.resolved_steps
                 if isinstance(s, ResolvedConditional)]
        assert len(conds) == 1 and conds[0].result is True


class TestConditionStatus:
    def test_three_valued(self, pipeline):
        kb = pipeline.kb
        q = Query(atoms=(FillerAtom("oil-level-1", "level-state", "low"),))
        assert condition_status(q, kb) == "unknown"
        kb.tell(FillerAssertion("oil-level-1", "level-state", "low"))
        assert condition_status(q, kb) == "true"
        kb.tell(FillerAssertion("oil-level-1", "level-state", "ok"))
        assert condition_status(q, kb) == "false"


class TestStateFiltering:
    def test_unknown_condition_kept(self, pipeline):
        filtered = filter_relevant_steps("check-oil-level", pipeline.kb)
        conds = [s for s in filtered.steps if isinstance(s, ExpandedConditional)]
        assert len(conds) == 1

    def test_falsified_condition_pruned(self, pipeline):
        kb = pipeline.kb
        kb.tell(FillerAssertion("oil-level-1", "level-state", "ok"))
        filtered = filter_relevant_steps("check-oil-level", kb)
        conds = [s for s in filtered.steps if isinstance(s, ExpandedConditional)]
        assert conds == []

    def test_true_condition_inlined(self, pipeline):
        kb = pipeline.kb
        kb.tell(FillerAssertion("oil-level-1", "level-state", "low"))
        filtered = filter_relevant_steps("check-oil-level", kb)
        conds = [s for s in filtered.steps if isinstance(s, ExpandedConditional)]
        # a decided-true condition stops being conditional; the branch stays
        assert conds == []
        assert [a.id for a in filtered.leaves()][-1] == "a-add-oil"

    def test_false_prune_drops_leaf(self, pipeline):
        kb = pipeline.kb
        kb.tell(FillerAssertion("oil-level-1", "level-state", "ok"))
        filtered = filter_relevant_steps("check-oil-level", kb)
        assert "a-add-oil" not in [a.id for a in filtered.leaves()]
