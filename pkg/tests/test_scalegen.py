"""Synthetic large-KB generator used by the load benchmark."""
import json

from maintgen.kb.io import load_kb
from maintgen.scalegen import ScaleConfig, build_scale_document, sample_queries


class TestScaleDocument:
    def test_deterministic(self):
        a = build_scale_document(ScaleConfig(seed=7))
        b = build_scale_document(ScaleConfig(seed=7))
        assert a == b
        c = build_scale_document(ScaleConfig(seed=8))
        assert c != a

    def test_object_count(self):
        config = ScaleConfig()
        doc = build_scale_document(config)
        total = len(doc["concepts"]) + len(doc["instances"])
        assert total == config.total_objects
        assert total >= 1000

    def test_loads_and_classifies(self):
        config = ScaleConfig(primitive_concepts=120, filler_defined=12,
                             link_defined=6, instances=120)
        doc = build_scale_document(config)
        kb = load_kb(json.dumps(doc), "scale")
        derived = sum(1 for inst in kb.instances.values()
                      for t in inst.derived_types
                      if t.startswith(("scale-d", "scale-l")))
        # defined concepts actually classify instances, so the benchmark
        # exercises subsumption rather than just storage
        assert derived > 0

    def test_sample_queries_mix(self):
        config = ScaleConfig(primitive_concepts=120, filler_defined=12,
                             link_defined=6, instances=120)
        kb = load_kb(json.dumps(build_scale_document(config)), "scale")
        queries = sample_queries(kb, n=100, seed=11)
        assert len(queries) == 100
        assert queries == sample_queries(kb, n=100, seed=11)
        open_queries = [q for q in queries
                        if any(str(getattr(a, "x", "")).startswith("?")
                               or str(getattr(a, "y", "")).startswith("?")
                               for a in q.atoms)]
        assert open_queries and len(open_queries) < 100
        for q in queries:
            kb.ask(q)
