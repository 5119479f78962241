import itertools
import json

import numpy as np
import pytest

from pocbounds.bounds import Interval
from pocbounds.errors import SoundnessViolation
from pocbounds.harness import (
    InstanceRecord,
    SweepConfig,
    diagonal_query,
    emit_plot_data,
    make_instance,
    parse_instances_csv,
    plot_path_for,
    random_substituted_query,
    render_summary_csv,
    run_sweep,
    summary_path_for,
    verify_soundness,
    verify_tightness,
)
from pocbounds.query import Family, Query, render_query


class TestQueryConstruction:
    def test_diagonal_queries(self):
        q = diagonal_query(Family.PNS, 4, 3)
        assert render_query(q) == "P(y1_x1,y2_x2,y3_x3)"
        q = diagonal_query(Family.PN, 4, 3)
        assert q.x_evidence == 4 and q.y_evidence == 1
        with pytest.raises(ValueError):
            diagonal_query(Family.PSUB, 3, 3)  # no free treatment

    def test_random_queries_always_valid(self):
        rng = np.random.default_rng(1)
        for n, family in itertools.product((2, 3, 5), Family):
            for _ in range(50):
                q = random_substituted_query(family, n, rng)
                assert isinstance(q, Query)
                assert len({a.treatment for a in q.atoms}) == len(q.atoms)
                if family in (Family.PSUB, Family.PN):
                    assert q.x_evidence is not None
                if family in (Family.PREP, Family.PN):
                    assert q.y_evidence is not None


class TestMakeInstance:
    def test_auto_generator_switches(self):
        _, g3, label3 = make_instance(3, seed=1)
        assert label3 == "joint" and g3 is not None
        _, g8, label8 = make_instance(8, seed=1)
        assert label8 == "latent" and g8 is not None
        ds, g, label = make_instance(4, seed=2, generator="rejection")
        assert label == "rejection" and g is None


class TestSweep:
    def cfg(self, tmp_path, **kw):
        defaults = dict(
            n_min=3, n_max=4, k=3, instances=8, base_seed=99,
            output_path=str(tmp_path / "out.csv"),
        )
        defaults.update(kw)
        return SweepConfig(**defaults)

    def test_deterministic_bytes(self, tmp_path):
        cfg = self.cfg(tmp_path, oracle=True, plot_top=5)
        run_sweep(cfg)
        first = {
            p: open(p, "rb").read()
            for p in (
                cfg.output_path,
                summary_path_for(cfg.output_path),
                plot_path_for(cfg.output_path),
            )
        }
        run_sweep(cfg)
        for p, blob in first.items():
            assert open(p, "rb").read() == blob

    def test_summary_recomputable_from_instances(self, tmp_path):
        cfg = self.cfg(tmp_path)
        result = run_sweep(cfg)
        text = open(cfg.output_path).read()
        recomputed = render_summary_csv(parse_instances_csv(text), result.records)
        assert recomputed == open(summary_path_for(cfg.output_path)).read()

    def test_csv_columns_and_values(self, tmp_path):
        cfg = self.cfg(tmp_path, oracle=True)
        run_sweep(cfg)
        rows = open(cfg.output_path).read().splitlines()
        assert rows[0] == (
            "n,k,index,seed,family,query,cf_lb,cf_ub,base_lb,base_ub,"
            "lp_lb,lp_ub,true_value,active_lb,active_ub"
        )
        # 8 instances x 2 sides x 1 family
        assert len(rows) == 1 + 16

    def test_multi_family(self, tmp_path):
        cfg = self.cfg(
            tmp_path, n_min=4, n_max=4, k=3,
            families=(Family.PNS, Family.PSUB, Family.PREP, Family.PN),
            instances=4,
        )
        result = run_sweep(cfg)
        assert len(result.records) == 16
        summary = open(summary_path_for(cfg.output_path)).read().splitlines()
        assert len(summary) == 1 + 4

    def test_config_validation(self, tmp_path):
        with pytest.raises(ValueError):
            self.cfg(tmp_path, k=5).validate()
        with pytest.raises(ValueError):
            self.cfg(tmp_path, n_min=5, n_max=4, k=3).validate()
        with pytest.raises(ValueError):
            self.cfg(tmp_path, n_min=3, k=3, families=(Family.PSUB,)).validate()
        with pytest.raises(ValueError):
            run_sweep(self.cfg(tmp_path, instances=0))

    def test_rejection_generator_has_no_truth(self, tmp_path):
        cfg = self.cfg(tmp_path, generator="rejection", instances=3, n_max=3)
        result = run_sweep(cfg)
        assert all(r.true_value is None for r in result.records)
        assert ",rejection," in open(summary_path_for(cfg.output_path)).read()


class TestContainmentEnforcement:
    def make_record(self, cf, base, lp=None, tv=None):
        return InstanceRecord(
            n=3, k=3, index=0, seed=1, family=Family.PNS, query="P(y1_x1)",
            cf=Interval(*cf), base=Interval(*base),
            lp=Interval(*lp) if lp else None, true_value=tv,
            active_lb="L0", active_ub="U0", generator="joint",
        )

    def test_violations_raise(self):
        with pytest.raises(SoundnessViolation):
            self.make_record((0.1, 0.5), (0.2, 0.4)).check()
        with pytest.raises(SoundnessViolation):
            self.make_record((0.2, 0.4), (0.1, 0.5), lp=(0.1, 0.3)).check()
        with pytest.raises(SoundnessViolation):
            self.make_record((0.2, 0.4), (0.1, 0.5), tv=0.45).check()
        self.make_record((0.2, 0.4), (0.1, 0.5), lp=(0.25, 0.35), tv=0.3).check()


class TestPlotData:
    def records(self):
        out = []
        for i in range(10):
            base = Interval(0.0, 0.5 + 0.05 * i)
            cf = Interval(0.1, 0.5 + 0.04 * i - 0.02 * (i % 3))
            out.append(
                InstanceRecord(
                    n=3, k=3, index=i, seed=i, family=Family.PNS, query="q",
                    cf=cf, base=base, lp=None, true_value=None,
                    active_lb="L1", active_ub="U0", generator="joint",
                )
            )
        return out

    def test_selection_maximizes_reduction(self):
        recs = self.records()
        text = emit_plot_data(recs, top_n=4)
        rows = text.splitlines()[1:]
        chosen = {int(r.split(",")[3]) for r in rows}
        reductions = sorted(
            recs, key=lambda r: (r.cf.width - r.base.width, r.index)
        )[:4]
        assert chosen == {r.index for r in reductions}

    def test_sorted_by_cf_bounds(self):
        text = emit_plot_data(self.records(), top_n=6)
        rows = [r.split(",") for r in text.splitlines()[1:]]
        lbs = [(float(r[4]), float(r[5])) for r in rows]
        assert lbs == sorted(lbs)

    def test_json_format(self):
        doc = json.loads(emit_plot_data(self.records(), top_n=3, fmt="json"))
        assert len(doc) == 3
        assert {"cf_lb", "base_ub"} <= set(doc[0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            emit_plot_data([], top_n=1)


class TestVerify:
    def test_binary_exact(self):
        report = verify_tightness(n=2, instances=25, tol=1e-12, base_seed=5)
        assert report.ok
        for fs in report.families.values():
            assert fs.soundness_violations == 0
            assert fs.diagonal_mismatches == 0

    def test_n3_diagonal_tight(self):
        report = verify_tightness(n=3, instances=25, tol=1e-6, base_seed=6)
        assert report.ok
        assert report.families["PNS"].diagonal_mismatches == 0
        doc = report.to_json_dict()
        assert doc["soundness_violations"] == 0
        assert doc["families"]["PNS"]["queries"] == 100

    def test_cap_enforced(self):
        from pocbounds.errors import DimensionCapExceeded

        with pytest.raises(DimensionCapExceeded):
            verify_tightness(n=5, instances=1, tol=1e-6, base_seed=0)

    def test_soundness_report(self):
        report = verify_soundness(n=3, instances=40, base_seed=7)
        assert report.ok
        assert report.queries == 40 * 4 * 3
        assert report.min_lower_margin >= -1e-9
        assert report.min_upper_margin >= -1e-9
