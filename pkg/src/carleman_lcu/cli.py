"""Command-line entry point: ``carleman-lcu <verb> [options]``.

Verbs: build, decompose, encode, resources, solve, compare.
Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .basis import DimensionCapError
from .block_encoding import (
    VERIFY_WIDTH_CAP,
    CostModel,
    aggregate,
    block_encode,
    resource_rows,
    scaling_sweep,
    verify_encoding,
)
from .burgers import ConfigError, GridConfig, build_carleman_system, classical_solve, initial_state
from .decomposition import (
    LITERATURE_COUNT_442,
    PAULI_CAP_QUBITS,
    class_counts,
    decompose_full,
    pauli_decompose,
    reconstruct,
    term_count,
    terms_to_json,
)
from .embedding import build_embedded_from_u0, extract_solution
from .vqls import AnsatzConfig, TermOperator, compare_solutions, optimize, prepare_b

log = logging.getLogger("carleman_lcu")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2
SCHEMA = "carleman-lcu/1"

DEFAULTS = {
    "grid": {"n_x": 4, "n_t": 4, "dt": 0.25, "nu": 1.0, "alpha": 2, "L_x": 2 * math.pi},
    "initial": {"sigma": 0.5, "mu": math.pi},
    "vqls": {"ansatz": "ry_cz_ring", "layers": 3, "seed": 1234, "tolerance": 1e-3,
             "max_iter": 2000, "fd_step": 1e-4},
    "cost": {"mcx_clifford": 32, "mcx_t": 28, "toffoli_clifford": 8, "toffoli_t": 7,
             "swap": 3, "negative_control": 2},
    "output": {"dir": "out"},
}


# --- configuration ----------------------------------------------------------

def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> dict:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, value = assignment.split("=", 1)
    parts = key.strip().split(".")
    if len(parts) == 1:  # bare grid keys are accepted as a shorthand
        section = next((s for s, d in DEFAULTS.items() if parts[0] in d), None)
        if section is None:
            raise ConfigError(f"unknown key {key!r}")
        parts = [section, parts[0]]
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = _parse_value(value.strip())
    return cfg


def load_config(path: str | None, overrides: list[str]) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        try:
            with open(path, "rb") as fh:
                cfg = _merge(cfg, tomllib.load(fh))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for o in overrides:
        apply_override(cfg, o)
    for section, keys in cfg.items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(keys) - set(DEFAULTS[section])
        if unknown:
            raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    return cfg


def grid_from_config(cfg: dict) -> GridConfig:
    g = cfg["grid"]
    for key in ("n_x", "n_t", "alpha"):
        v = g[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1 or v & (v - 1):
            raise ConfigError(f"grid.{key} must be a positive power of two, got {v!r}")
    return GridConfig(n_x=g["n_x"], n_t=g["n_t"], dt=float(g["dt"]), nu=float(g["nu"]),
                      alpha=g["alpha"], L_x=float(g["L_x"]))


def cost_model_from_config(cfg: dict) -> CostModel:
    return CostModel(**{k: int(v) for k, v in cfg["cost"].items()})


# --- output helpers ---------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _write_json(path: Path, obj) -> Path:
    return _write(path, json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _write_manifest(out: Path, command: str, cfg: dict, artifacts: list[Path], extra: dict) -> Path:
    manifest = {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "config": cfg,
        "artifacts": {p.name: _sha256(p) for p in sorted(artifacts)},
        **extra,
    }
    return _write_json(out / f"manifest_{command}.json", manifest)


def _system(cfg: dict):
    grid = grid_from_config(cfg)
    u0 = initial_state(grid, cfg["initial"]["sigma"], cfg["initial"]["mu"])
    return grid, u0


# --- commands ---------------------------------------------------------------

def cmd_build(cfg: dict, args) -> int:
    grid, u0 = _system(cfg)
    sysm = build_carleman_system(grid, u0)
    emb = build_embedded_from_u0(grid, u0)
    out = Path(args.out)
    info = {
        "carleman": {"dim": sysm.L.shape[0], "nnz_L": int(sysm.L.nnz), "nnz_A": int(sysm.A.nnz)},
        "embedded": {"dim": emb.dim, "qubits": emb.qubit_count, "nnz_L_e": int(emb.L_e.nnz),
                     "nnz_A_e": int(emb.A_e.nnz), "norm_B_e": float(np.linalg.norm(emb.B_e))},
    }
    artifacts = [_write_json(out / "system.json", info)]
    if args.dump:
        import scipy.sparse as sp

        path = out / "L_e.npz"
        sp.save_npz(path, emb.L_e.tocsr(), compressed=False)
        np.save(out / "B_e.npy", emb.B_e)
        artifacts += [path, out / "B_e.npy"]
    _write_manifest(out, "build", cfg, artifacts, {})
    print(f"dim={emb.dim}, qubits={emb.qubit_count}, nnz(L^(e))={emb.L_e.nnz}, "
          f"carleman dim={sysm.L.shape[0]}, nnz(L)={sysm.L.nnz}")
    return EXIT_OK


def cmd_decompose(cfg: dict, args) -> int:
    grid, u0 = _system(cfg)
    terms = decompose_full(grid)
    out = Path(args.out)
    report = {
        "enumerated": len(terms),
        "formula": term_count(grid),
        "class_counts": {c: sum(t.term_class == c for t in terms) for c in ("L1", "L2a", "L2b")},
        "class_counts_formula": class_counts(grid),
    }
    if (grid.n_x, grid.n_t, grid.alpha) == (4, 4, 2):
        report["literature_count"] = LITERATURE_COUNT_442
        report["note"] = "closed form and enumeration give 49; a count of 73 is quoted for this configuration elsewhere"
    emb = build_embedded_from_u0(grid, u0)
    if emb.qubit_count <= PAULI_CAP_QUBITS:
        report["pauli"] = len(pauli_decompose(emb.L_e))
    status = EXIT_OK
    if args.verify:
        err = float(abs(reconstruct(terms) - emb.L_e).max())
        report["max_abs_err"] = err
        report["verified"] = err <= 1e-12
        if err > 1e-12:
            status = EXIT_VERIFY
    if report["enumerated"] != report["formula"]:
        status = EXIT_VERIFY
    artifacts = [_write(out / "terms.json", terms_to_json(grid, terms) + "\n"),
                 _write_json(out / "decompose_report.json", report)]
    _write_manifest(out, "decompose", cfg, artifacts, {"report": report})
    line = f"enumerated={report['enumerated']}, formula={report['formula']}"
    if "pauli" in report:
        line += f", pauli={report['pauli']}"
    if "literature_count" in report:
        line += f", literature={report['literature_count']} (documented discrepancy)"
    if args.verify:
        line += f", max_abs_err={report['max_abs_err']:.3e}"
    print(line)
    return status


def cmd_encode(cfg: dict, args) -> int:
    grid, _ = _system(cfg)
    terms = decompose_full(grid)
    ids = range(len(terms)) if args.term is None else [args.term]
    if args.term is not None and not 0 <= args.term < len(terms):
        raise ConfigError(f"--term must be in [0, {len(terms) - 1}], got {args.term}")
    out = Path(args.out)
    entries, failures, skipped = [], 0, False
    for k in ids:
        term = terms[k]
        enc = block_encode(term)
        entry = {"term_id": k, "class": term.term_class, "j": term.j, "l": term.l,
                 "coeff": [term.coefficient.real, term.coefficient.imag], **enc.to_dict()}
        if args.verify:
            if enc.width > VERIFY_WIDTH_CAP:
                skipped = True
            else:
                rep = verify_encoding(enc, term)
                entry["verified"] = rep.ok
                if not rep.ok:
                    failures += 1
                    entry["mismatch"] = rep.mismatch
        entries.append(entry)
    if skipped:
        log.warning("verification skipped: width %d exceeds cap %d", terms[0].width + 1, VERIFY_WIDTH_CAP)
    artifacts = [_write_json(out / "circuits.json", {"schema": SCHEMA, "encodings": entries})]
    summary = {"encoded": len(entries), "verification_failures": failures, "verification_skipped": skipped}
    _write_manifest(out, "encode", cfg, artifacts, {"summary": summary})
    msg = f"encoded={len(entries)}"
    if args.verify:
        msg += " verification=skipped" if skipped else f" verified={len(entries) - failures}/{len(entries)}"
    print(msg)
    return EXIT_VERIFY if failures else EXIT_OK


def _parse_sweep(spec: str) -> dict:
    """'n_x=4,8,16;alpha=2' -> {'n_x': [4, 8, 16], 'alpha': [2]}."""
    out = {}
    for part in filter(None, (p.strip() for p in spec.split(";"))):
        if "=" not in part:
            raise ConfigError(f"bad --sweep item {part!r}; expected key=v1,v2,...")
        key, vals = part.split("=", 1)
        key = key.strip()
        if key not in ("n_x", "n_t", "alpha"):
            raise ConfigError(f"--sweep supports n_x, n_t and alpha, got {key!r}")
        try:
            out[key] = [int(v) for v in vals.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"--sweep values must be integers: {vals!r}") from exc
    return out


def cmd_resources(cfg: dict, args) -> int:
    grid, _ = _system(cfg)
    model = cost_model_from_config(cfg)
    out = Path(args.out)
    rows = resource_rows(grid, model)
    table = out / "resources.csv"
    table.parent.mkdir(parents=True, exist_ok=True)
    with open(table, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["term_id", "class", "j", "l", "q", "clifford", "t"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    agg = aggregate(rows, grid)
    artifacts = [table, _write_json(out / "resources.json", agg)]
    extra = {"aggregate": agg}
    if args.sweep:
        spec = _parse_sweep(args.sweep)
        sweep_out = {}
        alphas = spec.get("alpha", [grid.alpha])
        nxs = spec.get("n_x", [grid.n_x])
        nts = spec.get("n_t", [None])
        for a in alphas:
            for nt in nts:
                key = f"alpha={a},n_t={'n_x' if nt is None else nt}"
                sweep_out[key] = scaling_sweep(nxs, alpha=a, n_t=nt, dt=grid.dt, model=model)
                if "alpha" in spec:
                    sweep_out[key]["class_counts"] = class_counts(GridConfig(grid.n_x, grid.n_t, grid.dt, alpha=a))
        artifacts.append(_write_json(out / "sweep.json", sweep_out))
        extra["sweep"] = sweep_out
        for key, res in sweep_out.items():
            f = res["clifford_fit"]
            print(f"sweep {key}: worst L2b clifford={res['worst_l2b_clifford']} "
                  f"c={f['c']:.3f} rel_residual={f['relative_residual']:.3f} loglog_slope={f['loglog_slope']:.2f}")
    _write_manifest(out, "resources", cfg, artifacts, extra)
    counts = {c: v["terms"] for c, v in agg["classes"].items()}
    print(f"qubits={agg['qubits']} terms={agg['total_terms']} class_counts={counts}")
    return EXIT_OK


def _write_trajectory(path: Path, grid: GridConfig, u_classical, u_vqls=None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "x_index", "u_classical", "u_vqls"])
        for t in range(grid.n_t):
            for x in range(grid.n_x):
                uq = "" if u_vqls is None else repr(float(np.real(u_vqls[t, x])))
                w.writerow([repr(t * grid.dt), x, repr(float(np.real(u_classical[t, x]))), uq])
    return path


def _ansatz(cfg: dict, qubits: int, seed: int | None) -> AnsatzConfig:
    v = cfg["vqls"]
    return AnsatzConfig(qubits=qubits, layers=int(v["layers"]), kind=v["ansatz"],
                        seed=int(v["seed"] if seed is None else seed))


def cmd_solve(cfg: dict, args) -> int:
    grid, u0 = _system(cfg)
    emb = build_embedded_from_u0(grid, u0)
    Y = classical_solve(emb.L_e, emb.B_e)
    classical = extract_solution(Y, grid)
    out = Path(args.out)
    extra = {"classical": {"z_max": classical.z_max}}
    if args.classical_only:
        artifacts = [_write_trajectory(out / "trajectory.csv", grid, classical.u)]
        _write_manifest(out, "solve", cfg, artifacts, extra)
        print(f"classical solve done (dim={emb.dim}); VQLS skipped")
        return EXIT_OK
    v = cfg["vqls"]
    ans = _ansatz(cfg, emb.qubit_count, None)
    op = TermOperator(decompose_full(grid))
    res = optimize(op, prepare_b(emb.B_e), ans, tol=float(v["tolerance"]), max_iter=int(v["max_iter"]),
                   h=float(v["fd_step"]), reference=Y)
    rep = compare_solutions(res.state, Y, grid)
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "vqls_state.npy", res.state)
    artifacts = [out / "vqls_state.npy", _write_trajectory(out / "trajectory.csv", grid, rep.u_classical, rep.u_vqls)]
    extra["vqls"] = {
        "ansatz": ans.kind, "layers": ans.layers, "params": ans.num_params, "seed": ans.seed,
        "iterations": res.iterations, "converged": res.converged, "final_cost": res.cost,
        "fidelity": rep.fidelity, "max_rel_l2_per_step": rep.max_rel_l2,
        "rel_l2_per_step": [float(x) for x in rep.rel_l2_per_step],
    }
    _write_manifest(out, "solve", cfg, artifacts, extra)
    print(f"cost={res.cost:.3e} iterations={res.iterations} converged={res.converged} "
          f"fidelity={rep.fidelity:.4f} max_rel_l2={rep.max_rel_l2:.4f}")
    return EXIT_OK


def cmd_compare(cfg: dict, args) -> int:
    grid, u0 = _system(cfg)
    out = Path(args.out)
    state_path = Path(args.state) if args.state else out / "vqls_state.npy"
    if not state_path.exists():
        raise ConfigError(f"no VQLS state at {state_path}; run 'solve' first or pass --state")
    state = np.load(state_path)
    emb = build_embedded_from_u0(grid, u0)
    if state.shape != emb.B_e.shape:
        raise ConfigError(f"state has shape {state.shape}, expected {emb.B_e.shape}")
    Y = classical_solve(emb.L_e, emb.B_e)
    rep = compare_solutions(state, Y, grid)
    summary = {"fidelity": rep.fidelity, "max_rel_l2_per_step": rep.max_rel_l2,
               "rel_l2_per_step": [float(x) for x in rep.rel_l2_per_step],
               "max_abs_deviation": rep.max_abs_deviation}
    artifacts = [_write_json(out / "comparison.json", summary),
                 _write_trajectory(out / "comparison_trajectory.csv", grid, rep.u_classical, rep.u_vqls)]
    _write_manifest(out, "compare", cfg, artifacts, {"comparison": summary})
    print(f"fidelity={rep.fidelity:.4f} max_rel_l2={rep.max_rel_l2:.4f}")
    return EXIT_OK


COMMANDS = {"build": cmd_build, "decompose": cmd_decompose, "encode": cmd_encode,
            "resources": cmd_resources, "solve": cmd_solve, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="carleman-lcu", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="TOML config file (defaults: configs/reference.toml values)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. grid.n_x=8 (repeatable)")
    p.add_argument("--out", help="output directory (default: output.dir from config)")
    p.add_argument("--verify", action="store_true", help="run dense verification where applicable")
    p.add_argument("--sweep", help="resources: sweep spec like 'n_x=4,8,16,32,64;alpha=2'")
    p.add_argument("--seed", type=int, help="solve: override vqls.seed")
    p.add_argument("--term", type=int, help="encode: only this term id")
    p.add_argument("--state", help="compare: path to a saved VQLS state (.npy)")
    p.add_argument("--classical-only", action="store_true", help="solve: skip VQLS")
    p.add_argument("--dump", action="store_true", help="build: also write L_e.npz and B_e.npy")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides)
        if args.seed is not None:
            cfg["vqls"]["seed"] = args.seed
        args.out = args.out or cfg["output"]["dir"]
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, DimensionCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
