import json
import math
import os

import numpy as np
import pytest

from lazy_sliding.bench import (
    cut_polytope_vertices,
    gen_instance,
    hamiltonian_cycle_vertices,
    layered_dag_edges,
    load_instance,
    parse_seeds,
    run_experiment,
    summarize,
    write_json,
)
from lazy_sliding.cli import main
from lazy_sliding.errors import ConfigError
from lazy_sliding.trace import TRACE_HEADER, read_trace_csv

SIMPLEX_SPEC = {
    "region": {"kind": "simplex", "n": 6},
    "objective": {"type": "least_squares", "m": 40, "density": 1.0},
    "seed": 5,
}


def _write_instance(tmp_path, spec=None):
    inst = gen_instance(spec or SIMPLEX_SPEC)
    path = tmp_path / "instance.json"
    write_json(str(path), inst)
    return str(path), inst


def _experiment(tmp_path, solvers, seeds=(0,), outer=40):
    inst_path, _ = _write_instance(tmp_path)
    return {
        "instance": inst_path,
        "seeds": list(seeds),
        "budgets": {"outer": outer},
        "solvers": solvers,
    }


def test_gen_is_deterministic_and_byte_identical(tmp_path):
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    write_json(str(p1), gen_instance(SIMPLEX_SPEC))
    write_json(str(p2), gen_instance(dict(SIMPLEX_SPEC)))
    assert p1.read_bytes() == p2.read_bytes()
    # a different seed must produce different data
    other = gen_instance(dict(SIMPLEX_SPEC, seed=6))
    assert other["objective"]["b"] != gen_instance(SIMPLEX_SPEC)["objective"]["b"]


def test_generated_instance_has_zero_optimum(tmp_path):
    path, inst = _write_instance(tmp_path)
    region, objective, inst2 = load_instance(path)
    x_star = np.asarray(inst2["objective"]["x_star"])
    assert region.contains(x_star, tol=1e-9)
    m = len(inst2["objective"]["b"])
    assert objective.value(x_star) <= 1e-18 * m


def test_gen_density_validation_and_formats():
    with pytest.raises(ConfigError):
        gen_instance(dict(SIMPLEX_SPEC, objective={"m": 10, "density": 0.0}))
    with pytest.raises(ConfigError):
        gen_instance(dict(SIMPLEX_SPEC, objective={"m": 10, "density": 1.5}))
    dense = gen_instance(SIMPLEX_SPEC)
    assert dense["objective"]["A"]["format"] == "dense"
    A = np.asarray(dense["objective"]["A"]["data"])
    assert np.count_nonzero(A) == A.size  # density 1.0 keeps every entry
    big = gen_instance({
        "region": {"kind": "simplex", "n": 60},
        "objective": {"m": 300, "density": 0.1},
        "seed": 1,
    })
    assert big["objective"]["A"]["format"] == "csr"
    region, objective, _ = load_instance(big)
    x_star = np.asarray(big["objective"]["x_star"])
    assert objective.value(x_star) <= 1e-18 * 300


def test_hamiltonian_cycle_vertices():
    V5 = hamiltonian_cycle_vertices(5)
    assert V5.shape == (12, 10)  # (5-1)!/2 cycles over C(5,2) edge coords
    assert np.all(V5.sum(axis=1) == 5.0)  # every cycle uses 5 edges
    assert len({tuple(r) for r in V5}) == 12
    V7 = hamiltonian_cycle_vertices(7)
    assert V7.shape == (360, 21)
    assert np.all(V7.sum(axis=1) == 7.0)


def test_cut_polytope_vertices():
    V = cut_polytope_vertices(3)
    assert V.shape == (4, 3)
    assert any(np.all(r == 0.0) for r in V)  # the empty cut
    assert len({tuple(r) for r in V}) == 4


def test_layered_dag_edges():
    edges = layered_dag_edges(2, 2)
    assert len(edges) == 8  # source->2, 2x2 crossing, 2->sink
    nodes = {u for u, _ in edges} | {v for _, v in edges}
    indeg = {n: 0 for n in nodes}
    outdeg = {n: 0 for n in nodes}
    for u, v in edges:
        outdeg[u] += 1
        indeg[v] += 1
    assert sum(1 for n in nodes if indeg[n] == 0) == 1  # single source
    assert sum(1 for n in nodes if outdeg[n] == 0) == 1  # single sink


def test_parse_seeds():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("7") == [7]
    assert parse_seeds([1, 2]) == [1, 2]


def test_empty_solver_list_exits_zero(tmp_path):
    config = _experiment(tmp_path, [])
    out = tmp_path / "runs"
    summary, code = run_experiment(config, out_dir=str(out))
    assert code == 0
    assert summary["solvers"] == {}
    assert (out / "summary.json").exists()


CALGD_ENTRY = {
    "name": "calgd",
    "variant": "calgd",
    "schedule": {"tag": "smooth_deterministic"},
    "outer": 60,
}


def test_calgd_threshold_table_monotone(tmp_path):
    config = _experiment(tmp_path, [CALGD_ENTRY], seeds=(0,), outer=60)
    out = tmp_path / "runs"
    summary, code = run_experiment(config, out_dir=str(out))
    assert code == 0
    table = summary["solvers"]["calgd"]["thresholds"]
    reached = [(thr, cell) for thr, cell in table.items() if cell["reached"]]
    assert len(reached) >= 2  # the run crosses at least 1e-1 and 1e-2
    ks = [cell["outer_k"] for _, cell in reached]
    sfos = [cell["sfo_calls"] for _, cell in reached]
    lmos = [cell["exact_lmo_calls"] for _, cell in reached]
    assert ks == sorted(ks)
    assert sfos == sorted(sfos) and lmos == sorted(lmos)


def _paired_entries(batch=4, outer=40):
    common = {
        "schedule": {"tag": "smooth_stochastic_fixed_n"},
        "batch": batch,
        "outer": outer,
        "alpha": 1.0,
    }
    lazy = dict(common, name="lazy", variant="calsgd", cache_capacity=512)
    scgs = dict(common, name="scgs", variant="scgs", cache_capacity=0)
    return [lazy, scgs]


def test_paired_runs_share_sfo_and_differ_in_lmo(tmp_path):
    config = _experiment(tmp_path, _paired_entries(), seeds=(0, 1), outer=40)
    out = tmp_path / "runs"
    _, code = run_experiment(config, out_dir=str(out))
    assert code == 0
    for seed in (0, 1):
        lazy = read_trace_csv(str(out / ("lazy__s%d.csv" % seed)))
        scgs = read_trace_csv(str(out / ("scgs__s%d.csv" % seed)))
        assert [r["sfo_calls"] for r in lazy] == [r["sfo_calls"] for r in scgs]
        assert [r["f_value"] for r in lazy] != [r["f_value"] for r in scgs] or \
            lazy[-1]["exact_lmo_calls"] != scgs[-1]["exact_lmo_calls"]
        assert lazy[-1]["exact_lmo_calls"] < scgs[-1]["exact_lmo_calls"]
        assert lazy[-1]["cache_hits"] > 0 and scgs[-1]["cache_hits"] == 0


def _csv_modulo_wall(path):
    # textual compare sidesteps nan != nan in parsed rows (scgs has no phi)
    lines = path.read_text().splitlines()
    return [",".join(f for i, f in enumerate(ln.split(",")) if i != 1)
            for ln in lines]


def test_reproducible_across_runs_modulo_wall(tmp_path):
    config = _experiment(tmp_path, _paired_entries(), seeds=(0,), outer=25)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    run_experiment(config, out_dir=str(out1))
    run_experiment(config, out_dir=str(out2))
    for name in ("lazy__s0.csv", "scgs__s0.csv"):
        assert _csv_modulo_wall(out1 / name) == _csv_modulo_wall(out2 / name)
    ma = json.loads((out1 / "lazy__s0.meta.json").read_text())
    mb = json.loads((out2 / "lazy__s0.meta.json").read_text())
    assert ma["config_hash"] == mb["config_hash"]


def test_summary_recomputable_from_traces(tmp_path):
    config = _experiment(tmp_path, _paired_entries(), seeds=(0, 1), outer=25)
    out = tmp_path / "runs"
    run_experiment(config, out_dir=str(out))
    written = json.loads((out / "summary.json").read_text())
    written.pop("runs")
    recomputed = summarize(str(out))
    assert recomputed == written


def test_csv_header_exact_and_roundtrip(tmp_path):
    config = _experiment(tmp_path, [dict(CALGD_ENTRY, outer=10)], seeds=(3,), outer=10)
    out = tmp_path / "runs"
    run_experiment(config, out_dir=str(out))
    path = out / "calgd__s3.csv"
    first = path.read_text().splitlines()[0]
    assert first == TRACE_HEADER == (
        "outer_k,wall_ms,f_value,sfo_calls,fo_calls,exact_lmo_calls,"
        "weak_sep_calls,cache_hits,inner_iters,phi_final,cert_gap")
    rows = read_trace_csv(str(path))
    assert [r["outer_k"] for r in rows] == list(range(1, 11))
    assert all(isinstance(r["f_value"], float) for r in rows)
    assert all(isinstance(r["exact_lmo_calls"], int) for r in rows)
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope,header\n1,2\n")
        read_trace_csv(str(bad))


def test_jobs_parallel_matches_sequential(tmp_path):
    config = _experiment(tmp_path, _paired_entries(), seeds=(0,), outer=20)
    seq, par = tmp_path / "seq", tmp_path / "par"
    run_experiment(config, out_dir=str(seq), jobs=1)
    run_experiment(config, out_dir=str(par), jobs=2)
    for name in ("lazy__s0.csv", "scgs__s0.csv"):
        assert _csv_modulo_wall(seq / name) == _csv_modulo_wall(par / name)


def test_deterministic_env_forces_sequential(tmp_path, monkeypatch):
    monkeypatch.setenv("LAZY_SLIDING_DETERMINISTIC", "1")
    config = _experiment(tmp_path, _paired_entries(), seeds=(0,), outer=10)
    out = tmp_path / "runs"
    _, code = run_experiment(config, out_dir=str(out), jobs=8)
    assert code == 0
    assert (out / "lazy__s0.csv").exists() and (out / "scgs__s0.csv").exists()


def test_cli_gen_run_summarize(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(SIMPLEX_SPEC))
    inst_path = tmp_path / "instance.json"
    assert main(["gen", "--config", str(spec_path), "--out", str(inst_path)]) == 0
    assert inst_path.exists()
    out = capsys.readouterr().out
    assert "region=simplex" in out

    config = {
        "instance": str(inst_path),
        "seeds": [0],
        "budgets": {"outer": 30},
        "solvers": [CALGD_ENTRY],
    }
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(config))
    run_dir = tmp_path / "runs"
    assert main(["run", "--config", str(cfg_path), "--out", str(run_dir),
                 "--seeds", "0..1", "--jobs", "1"]) == 0
    assert (run_dir / "calgd__s0.csv").exists()
    assert (run_dir / "calgd__s1.csv").exists()  # --seeds override took effect
    out = capsys.readouterr().out
    assert "calgd" in out and "reached" in out

    assert main(["summarize", "--out", str(run_dir)]) == 0
    assert (run_dir / "summary.json").exists()


def test_cli_gen_seed_override(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(SIMPLEX_SPEC))
    p1, p2 = tmp_path / "i1.json", tmp_path / "i2.json"
    main(["gen", "--config", str(spec_path), "--out", str(p1)])
    main(["gen", "--config", str(spec_path), "--out", str(p2), "--seed", "9"])
    a = json.loads(p1.read_text())
    b = json.loads(p2.read_text())
    assert a["generator"]["seed"] == 5 and b["generator"]["seed"] == 9
    assert a["objective"]["b"] != b["objective"]["b"]


def test_cli_verify_runs_pytest_target(tmp_path):
    target = tmp_path / "test_tiny_ok.py"
    target.write_text("def test_ok():\n    assert True\n")
    assert main(["verify", "--tests", str(target)]) == 0


def test_enumerated_instance_round_trip(tmp_path):
    spec = {
        "region": {"kind": "hamiltonian_cycles", "nodes": 5},
        "objective": {"m": 30, "density": 0.8},
        "seed": 2,
    }
    path = tmp_path / "ham.json"
    write_json(str(path), gen_instance(spec))
    region, objective, inst = load_instance(str(path))
    assert region.kind == "enumerated" and region.dim == 10
    assert region.diameter() > 0
    x_star = np.asarray(inst["objective"]["x_star"])
    assert objective.value(x_star) <= 1e-18 * 30
    assert math.isclose(float(x_star.sum()), 5.0, rel_tol=1e-12)
