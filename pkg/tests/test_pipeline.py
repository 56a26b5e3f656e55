"""Pipeline wiring: modes, digests, and fixture loading."""
import pytest

from maintgen.kb.io import snapshot
from maintgen.kb.model import FillerAssertion, KbError, UnknownIdError
from maintgen.pipeline import Pipeline


class TestModes:
    def test_static_and_filtered_agree_without_data(self, base_pipeline):
        static = base_pipeline.generate("check-oil-level", languages=["en"])
        filtered = base_pipeline.generate("check-oil-level", languages=["en"],
                                          mode="state-filtered")
        assert static.digest == filtered.digest
        assert static.documents["en"].body == filtered.documents["en"].body

    def test_simulate_differs_when_condition_unknown(self, base_pipeline):
        static = base_pipeline.generate("check-oil-level", languages=["en"])
        simulated = base_pipeline.generate("check-oil-level", languages=["en"],
                                           mode="simulate")
        # the untestable branch drops out of the simulated reading
        assert simulated.digest != static.digest
        assert simulated.trace is not None and static.trace is None

    def test_state_filtered_prunes_on_data(self, pipeline):
        pipeline.kb.tell(FillerAssertion("oil-level-1", "level-state", "ok"))
        result = pipeline.generate("check-oil-level", languages=["en"],
                                   mode="state-filtered")
        assert "add engine oil" not in result.documents["en"].text

    def test_simulate_keeps_taken_branch(self, pipeline):
        pipeline.kb.tell(FillerAssertion("oil-level-1", "level-state", "low"))
        result = pipeline.generate("check-oil-level", languages=["en"],
                                   mode="simulate")
        assert "add engine oil" in result.documents["en"].text

    def test_generation_never_mutates_kb(self, base_pipeline):
        before = snapshot(base_pipeline.kb)
        for mode in ("static", "simulate", "state-filtered"):
            base_pipeline.generate("check-oil-level", languages=["en"],
                                   mode=mode)
        assert snapshot(base_pipeline.kb) == before

    def test_digest_language_independent(self, base_pipeline):
        result = base_pipeline.generate("check-oil-level",
                                        languages=["en", "de", "fr"])
        digests = {base_pipeline.alignment(result).digest, result.digest}
        assert len(digests) == 1

    def test_annotated_always_produced(self, base_pipeline):
        result = base_pipeline.generate("check-oil-level",
                                        languages=["de"], format="latex")
        assert result.documents["de"].format == "latex"
        assert result.annotated["de"].format == "annotated-json"


class TestErrors:
    def test_unknown_plan(self, base_pipeline):
        with pytest.raises(UnknownIdError):
            base_pipeline.generate("polish-the-flux-capacitor")

    def test_unknown_language(self, base_pipeline):
        with pytest.raises(KbError):
            base_pipeline.generate("check-oil-level", languages=["eo"])

    def test_unknown_mode(self, base_pipeline):
        with pytest.raises(KbError):
            base_pipeline.generate("check-oil-level", mode="interactive")

    def test_no_languages(self, base_pipeline):
        with pytest.raises(KbError):
            base_pipeline.generate("check-oil-level", languages=[])


class TestLoading:
    def test_fixture_dir_skips_lexicon_and_morphology(self, fixture_dir):
        pipeline = Pipeline.from_fixture_dir(fixture_dir)
        # lexicon/morph files are not KB documents; instances prove the
        # KB files themselves all loaded
        assert "car-1" in pipeline.kb.instances
        assert "aircraft-1" in pipeline.kb.instances
        assert "oil-tank-1" in pipeline.kb.instances

    def test_validate_reports_fixture_health(self, base_pipeline):
        errors = [d for d in base_pipeline.validate()
                  if d.severity == "error"]
        assert errors == []

    def test_load_time_rules_reach_fixpoint(self, base_pipeline):
        # washer fluid ships low, so the refill flag must hold on load
        inst = base_pipeline.kb.instances["washer-reservoir-1"]
        assert "needs-refill" in inst.derived_types
