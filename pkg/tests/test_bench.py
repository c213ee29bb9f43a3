import json

import pytest

from tuplechain.baselines import LinearClassifier, TssClassifier
from tuplechain.bench import (ALGOS, BenchConfig, BenchError, MetricsReport,
                              make_classifier, run_audit, run_bench,
                              run_equiv)
from tuplechain.classifier import TupleChainClassifier
from tuplechain.cli import main
from tuplechain.etc import EtcClassifier
from tuplechain.model import FieldSchema
from tuplechain.workload import (TupleProfile, gen_rules, gen_trace,
                                 gen_updates)

S = FieldSchema((16, 16))
PROFILE = TupleProfile(num_masks=12, num_chains=4)


@pytest.fixture(scope="module")
def workload():
    rs = gen_rules(11, 300, S, PROFILE)
    trace = gen_trace(rs.rules, 12, 2000, 0.7, S)
    ups = gen_updates(rs.rules, 13, 400, 0.5, S)
    return rs, trace, ups


def short_config(workload, algo="tc", **kw):
    rs, trace, ups = workload
    defaults = dict(algo=algo, ruleset=rs, trace=trace, updates=ups,
                    tx_rate=2e5, update_rate=0.0, duration=0.25)
    defaults.update(kw)
    return BenchConfig(**defaults)


class TestFactory:
    def test_each_algo_builds_the_right_type(self, workload):
        rs, _, _ = workload
        types = {"tc": TupleChainClassifier, "etc": EtcClassifier,
                 "tss": TssClassifier, "linear": LinearClassifier}
        for algo in ALGOS:
            assert isinstance(make_classifier(algo, rs), types[algo])

    def test_unknown_algo_rejected(self, workload):
        rs, _, _ = workload
        with pytest.raises(BenchError):
            make_classifier("cuckoo", rs)


class TestRunBench:
    def test_config_validation(self, workload):
        with pytest.raises(BenchError):
            run_bench(short_config(workload, algo="nope"))
        with pytest.raises(BenchError):
            run_bench(short_config(workload, tx_rate=0))
        with pytest.raises(BenchError):
            run_bench(short_config(workload, update_rate=-1))

    def test_lookup_only_run(self, workload):
        rep = run_bench(short_config(workload))
        assert rep.lookups > 0 and rep.updates == 0
        assert rep.bound_violations == 0
        assert 0 < rep.avg_probes <= rep.max_probes
        assert rep.rx_rate_mpps == pytest.approx(
            rep.lookups / rep.wall_time / 1e6)
        assert rep.memory_bytes > 0

    def test_probes_stay_within_static_bound(self, workload):
        rs, _, _ = workload
        clf = make_classifier("tc", rs)
        rep = run_bench(short_config(workload))
        assert rep.max_probes <= clf.probe_bound()

    def test_concurrent_updates_run(self, workload):
        rep = run_bench(short_config(workload, update_rate=500.0,
                                     duration=0.4))
        assert rep.updates > 0
        assert rep.bound_violations == 0

    def test_offline_replay_matches_direct_loop(self, workload):
        # the executor applies updates then lookups; replaying the same
        # operations synchronously must land on the same final rule set
        rs, trace, ups = workload
        clf = make_classifier("tc", rs)
        for op, r in ups.ops:
            (clf.insert if op == "insert" else clf.remove)(r)
        assert clf.audit() == []
        rep = run_bench(short_config(workload, update_rate=1e7,
                                     duration=0.4))
        assert rep.updates == len(ups.ops)   # stream fully drained

    @pytest.mark.parametrize("algo", ALGOS)
    def test_all_algos_complete(self, workload, algo):
        rep = run_bench(short_config(workload, algo=algo, duration=0.15,
                                     tx_rate=5e4))
        assert rep.algo == algo and rep.lookups > 0


class TestReports:
    def test_json_keys_are_stable(self, workload):
        rep = run_bench(short_config(workload, duration=0.1, tx_rate=1e4))
        d = json.loads(rep.to_json())
        assert set(d) == {
            "algo", "rule_count", "lookups", "updates", "wall_time",
            "rx_rate_mpps", "update_rate_ops", "avg_probes", "max_probes",
            "bound_violations", "lookup_drops", "update_drops",
            "memory_bytes"}
        assert list(d) == sorted(d)

    def test_text_report_mentions_the_essentials(self):
        rep = MetricsReport("tc", 1, 2, 3, 0.5, 0.004, 6.0, 1.5, 4, 0,
                            0, 0, 1234)
        txt = rep.to_text()
        for needle in ("algo", "avg probes", "bound violations",
                       "memory estimate"):
            assert needle in txt


class TestAuditDriver:
    def test_clean_build_passes(self, workload):
        for algo in ("tc", "etc"):
            rep = run_audit(short_config(workload, algo=algo))
            assert rep.ok and rep.violations == []
            assert rep.to_text() == "audit: clean"

    def test_fault_injection_is_caught(self, workload):
        def corrupt(clf):
            t = clf.chains[0].tuples[0]
            for e in t.table.values():
                if e.rule is not None:
                    e.hint = None
                    return

        rep = run_audit(short_config(workload), corrupt_hook=corrupt)
        assert not rep.ok
        assert "FAILED" in rep.to_text()

    def test_linear_has_nothing_to_audit(self, workload):
        assert run_audit(short_config(workload, algo="linear")).ok


class TestEquivDriver:
    def test_all_algorithms_agree(self, workload):
        rep = run_equiv(short_config(workload))
        assert rep.ok
        assert rep.checked == len(workload[1])
        assert "no divergence" in rep.to_text()


class TestCli:
    @pytest.fixture()
    def files(self, tmp_path):
        rules = tmp_path / "r.rules"
        trace = tmp_path / "t.trace"
        ups = tmp_path / "u.updates"
        rc = main(["gen", "--rules", str(rules), "--trace", str(trace),
                   "--updates", str(ups), "--seed", "3", "--count", "200",
                   "--widths", "16", "16", "--masks", "10", "--chains", "4",
                   "--trace-count", "300", "--update-count", "100"])
        assert rc == 0
        return rules, trace, ups

    def test_build_json_report(self, files, tmp_path, capsys):
        rules, _, _ = files
        out = tmp_path / "build.json"
        rc = main(["build", "--rules", str(rules), "--algo", "tc",
                   "--report", "json", "--out", str(out)])
        assert rc == 0
        d = json.loads(out.read_text())
        assert d["rules"] == 200 and d["audit_violations"] == 0

    def test_audit_exit_zero(self, files, capsys):
        rules, _, _ = files
        assert main(["audit", "--rules", str(rules), "--algo", "etc",
                     "--min-head-bits", "2"]) == 0
        assert "clean" in capsys.readouterr().out

    def test_equiv_exit_zero(self, files, capsys):
        rules, trace, _ = files
        assert main(["equiv", "--rules", str(rules),
                     "--trace", str(trace)]) == 0

    def test_bench_smoke(self, files, capsys):
        rules, trace, ups = files
        rc = main(["bench", "--rules", str(rules), "--trace", str(trace),
                   "--updates", str(ups), "--algo", "tc",
                   "--tx-rate", "20000", "--update-rate", "100",
                   "--duration", "0.2", "--report", "json"])
        assert rc == 0
        d = json.loads(capsys.readouterr().out)
        assert d["bound_violations"] == 0 and d["lookups"] > 0

    def test_missing_trace_fails(self, files):
        rules, _, _ = files
        with pytest.raises(SystemExit):
            main(["equiv", "--rules", str(rules)])
