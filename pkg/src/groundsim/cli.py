"""Command-line surface: map | fci | vqe | ipea | compile.

Configuration comes from an optional flat key=value file plus command-line
flags (flags win).  Results are written as schema-versioned JSON (sorted
keys, no timestamps) and CSV so identical configs and seeds produce
byte-identical files.

Exit codes: 0 success, 1 usage/config error, 2 numerical or validation
failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import DuccAnsatz, HeAnsatz, build_ducc_circuit, build_he_circuit
from .compiler import circuit_to_text, gate_counts, make_controlled
from .fermion import (
    HermiticityError,
    IntegralsFormatError,
    enumerate_determinants,
    fci_eigenvalues,
    load_integrals,
    reference_energy,
    reorder_odd_before_even,
    symmetry_qubits,
)
from .ipea import DEFAULT_DELTA_E, IpeaConfig, run_ipea, trotter_cycle
from .pauli import (
    SymmetryViolationError,
    map_hamiltonian,
    sector_from_reference,
    taper,
    taper_reference_bits,
)
from .simulator import exact_ground_energy
from .vqe import OptimizerSpec, run_he_campaign, run_vqe

FORMAT_VERSION = 1

_SCHEMA: dict[str, tuple] = {
    # key: (type, default, allowed values or None)
    "integrals": (str, None, None),
    "output": (str, "results", None),
    "seed": (int, 0, None),
    "threads": (int, 1, None),
    "taper": (bool, True, None),
    "ansatz": (str, "ducc-sd", ("ducc-sd", "he")),
    "ducc.strategy": (str, "three-step", ("greedy", "three-step")),
    "he.layers": (int, 5, None),
    "he.layout": (str, "splitted", ("merged", "splitted")),
    "he.rotation": (str, "zyz", ("zx", "zyz")),
    "optimizer": (str, "adam", ("adam", "qng")),
    "adam.eta": (float, 0.05, None),
    "adam.epsilon": (float, 1e-8, None),
    "adam.beta1": (float, 0.9, None),
    "adam.beta2": (float, 0.999, None),
    "qng.eta": (float, 0.05, None),
    "qng.lambda_grid": (str, "1e-8,1e2,25", None),
    "max_iters": (int, 1000, None),
    "tol_e": (float, 1e-9, None),
    "ipea.nbits": (int, 20, None),
    "ipea.nt": (int, 10, None),
    "ipea.delta_e": (float, DEFAULT_DELTA_E, None),
    "ipea.eprime": (float, None, None),
    "ipea.exact_evolution": (bool, False, None),
    "ipea.shots": (int, 0, None),
    "compile.target": (str, "ducc", ("ducc", "he", "trotter-step")),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    task: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def echo(self) -> dict:
        out = {"task": self.task}
        for k, v in sorted(self.values.items()):
            out[k] = v
        return out


def _coerce(key: str, raw, kind):
    if raw is None:
        return None
    if kind is bool:
        if isinstance(raw, bool):
            return raw
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"key {key!r}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r}: expected {kind.__name__}, got {raw!r}") from None


THREADS_ENV_VAR = "GROUNDSIM_THREADS"


def parse_config(task: str, path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge file values and overrides onto defaults, validating every key."""
    values = {k: default for k, (_, default, _) in _SCHEMA.items()}
    merged: dict = {}
    if os.environ.get(THREADS_ENV_VAR):
        merged["threads"] = os.environ[THREADS_ENV_VAR]
    if path is not None:
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            merged[key.strip()] = val.strip()
    for key, val in (overrides or {}).items():
        if val is not None:
            merged[key] = val
    for key, raw in merged.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        kind, _, allowed = _SCHEMA[key]
        val = _coerce(key, raw, kind)
        if allowed is not None and val not in allowed:
            raise ConfigError(
                f"key {key!r}: invalid value {val!r} (valid: {', '.join(allowed)})"
            )
        values[key] = val
    return RunConfig(task=task, values=values)


def _lambda_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, count = spec.split(",")
        return np.logspace(math.log10(float(lo)), math.log10(float(hi)), int(count))
    except ValueError:
        raise ConfigError(
            f"qng.lambda_grid must be 'min,max,count', got {spec!r}"
        ) from None


def _optimizer_spec(config: RunConfig) -> OptimizerSpec:
    if config["optimizer"] == "adam":
        return OptimizerSpec(
            kind="adam", eta=config["adam.eta"], epsilon=config["adam.epsilon"],
            beta1=config["adam.beta1"], beta2=config["adam.beta2"],
        )
    return OptimizerSpec(
        kind="qng", eta=config["qng.eta"],
        lambda_grid=_lambda_grid(config["qng.lambda_grid"]),
    )


def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def write_json(path: Path, payload: dict):
    payload = {"format_version": FORMAT_VERSION, **payload}
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n",
        encoding="utf-8",
    )


def write_trajectories(path: Path, runs):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_id", "iteration", "energy", "grad_norm"])
        for run_id, run in enumerate(runs):
            for iteration, energy, grad_norm in run.trajectory:
                writer.writerow([run_id, iteration, repr(float(energy)), repr(float(grad_norm))])


def _load_problem(config: RunConfig):
    """Load integrals, reorder odd-before-even, map, and optionally taper."""
    if not config["integrals"]:
        raise ConfigError("an integrals file is required (--integrals)")
    basis, fham, ref = load_integrals(config["integrals"])
    basis, fham, ref, perm = reorder_odd_before_even(basis, fham, ref)
    qham = map_hamiltonian(fham)
    info = {
        "n_orbitals": basis.n_orbs,
        "n_electrons": ref.n_electrons,
        "permutation": list(perm),
        "reference_energy": reference_energy(fham, ref),
        "n_terms_untapered": len(qham),
    }
    if config["taper"]:
        pq, lq = symmetry_qubits(basis)
        sector = sector_from_reference(ref.occupations, pq, lq)
        qham = taper(qham, sector, pq, lq)
        ref_bits = taper_reference_bits(ref.occupations, pq, lq)
        info.update({
            "tapered": True,
            "parity_qubit": pq,
            "last_qubit": lq,
            "sector": {
                "whole_system_parity": sector.whole_system_parity,
                "particle_parity": sector.particle_parity,
            },
        })
    else:
        from .pauli import parity_encode_bits

        ref_bits = parity_encode_bits(ref.occupations)
        info["tapered"] = False
    info["n_qubits"] = qham.n_qubits
    return basis, fham, ref, qham, ref_bits, info


def _task_map(config: RunConfig, out_dir: Path) -> dict:
    basis, fham, ref, qham, ref_bits, info = _load_problem(config)
    (out_dir / "hamiltonian.txt").write_text(qham.to_text(), encoding="utf-8")
    return {**info, "reference_bits": list(ref_bits), "n_terms": len(qham)}


_SECTOR_DET_LIMIT = 200_000


def _sector_fci(basis, fham, ref) -> float | None:
    """Exact energy in the reference's (N, 2m, parity) sector, when affordable."""
    dets = enumerate_determinants(
        basis.n_orbs, ref.n_electrons, basis,
        total_two_m=ref.total_two_m(basis), total_parity=ref.total_parity(basis),
    )
    if not dets or len(dets) > _SECTOR_DET_LIMIT:
        return None
    return float(np.min(fci_eigenvalues(fham, dets)))


def _task_fci(config: RunConfig, out_dir: Path) -> dict:
    basis, fham, ref, qham, ref_bits, info = _load_problem(config)
    energy, _ = exact_ground_energy(qham)
    payload = {**info, "ground_energy": energy}
    sector = _sector_fci(basis, fham, ref)
    if sector is not None:
        payload["sector_ground_energy"] = sector
    return payload


def _make_ansatz(config: RunConfig, basis, ref, qham):
    if config["ansatz"] == "ducc-sd":
        ansatz = DuccAnsatz.build(basis, ref, tapered=config["taper"])
        if ansatz.n_qubits != qham.n_qubits:
            raise ConfigError("ansatz register does not match the Hamiltonian")
        return ansatz
    return HeAnsatz(
        n_qubits=qham.n_qubits, layers=config["he.layers"],
        layout=config["he.layout"], rotation=config["he.rotation"],
    )


def _task_vqe(config: RunConfig, out_dir: Path) -> dict:
    basis, fham, ref, qham, ref_bits, info = _load_problem(config)
    ansatz = _make_ansatz(config, basis, ref, qham)
    optimizer = _optimizer_spec(config)
    fci_energy = None
    if qham.n_qubits <= 12:
        fci_energy, _ = exact_ground_energy(qham)
    if isinstance(ansatz, HeAnsatz):
        campaign = run_he_campaign(
            qham, ansatz, optimizer, master_seed=config["seed"],
            max_iters=config["max_iters"], tol_e=config["tol_e"],
        )
        runs = campaign.runs
        best = campaign.best
        payload = {
            **info,
            "runs": [
                {
                    "seed": r.seed,
                    "final_energy": None if r.error else r.final_energy,
                    "iterations": r.iterations,
                    "converged": r.converged,
                    "error": r.error,
                    "theta": None if r.error else [float(x) for x in r.final_theta],
                }
                for r in runs
            ],
            "best_run": campaign.best_index,
            "final_energy": best.final_energy,
        }
    else:
        result = run_vqe(
            qham, ansatz, optimizer, seed=config["seed"],
            max_iters=config["max_iters"], tol_e=config["tol_e"],
            fci_energy=fci_energy,
        )
        runs = [result]
        payload = {
            **info,
            "final_energy": result.final_energy,
            "iterations": result.iterations,
            "converged": result.converged,
            "theta": [float(x) for x in result.final_theta],
            "excitations": [
                {"occupied": list(e.occupied), "virtual": list(e.virtual)}
                for e in ansatz.excitations
            ],
        }
    if fci_energy is not None:
        payload["fci_energy"] = fci_energy
    sector = _sector_fci(basis, fham, ref)
    if sector is not None:
        payload["sector_fci_energy"] = sector
    write_trajectories(out_dir / "trajectory.csv", runs)
    return payload


def _task_ipea(config: RunConfig, out_dir: Path) -> dict:
    basis, fham, ref, qham, ref_bits, info = _load_problem(config)
    e_prime = config["ipea.eprime"]
    if e_prime is None:
        e_prime = info["reference_energy"]
    shots = config["ipea.shots"]
    ipea_config = IpeaConfig(
        delta_e=config["ipea.delta_e"],
        e_prime=float(e_prime),
        n_bits=config["ipea.nbits"],
        n_t=config["ipea.nt"],
        initial_bits=tuple(ref_bits),
        measurement="sampled" if shots > 0 else "argmax",
        shots=shots if shots > 0 else 1024,
        seed=config["seed"],
        exact_evolution=config["ipea.exact_evolution"],
        strategy=config["ducc.strategy"],
    )
    result = run_ipea(qham, ipea_config)
    payload = {
        **info,
        "energy": result.energy,
        "e_prime": float(e_prime),
        "delta_e": config["ipea.delta_e"],
        "bits": [
            {"k": r.k, "bit": r.bit, "prob_one": r.prob_one, "delta": r.delta}
            for r in result.records
        ],
        "controlled_step_applications": result.controlled_step_applications,
    }
    sector = _sector_fci(basis, fham, ref)
    if sector is not None:
        payload["sector_fci_energy"] = sector
    if result.controlled_step_counts is not None:
        payload["controlled_step_gate_counts"] = {
            "single_qubit": result.controlled_step_counts.single_qubit,
            "cnot": result.controlled_step_counts.cnot,
        }
    return payload


def _task_compile(config: RunConfig, out_dir: Path) -> dict:
    basis, fham, ref, qham, ref_bits, info = _load_problem(config)
    target = config["compile.target"]
    if target == "ducc":
        ansatz = DuccAnsatz.build(basis, ref, tapered=config["taper"])
        circuit = build_ducc_circuit(
            ansatz, np.zeros(ansatz.n_params), strategy=config["ducc.strategy"]
        )
    elif target == "he":
        he = HeAnsatz(qham.n_qubits, config["he.layers"], config["he.layout"],
                      config["he.rotation"])
        circuit = build_he_circuit(he, np.zeros(he.n_params))
    else:  # trotter-step
        tau = (2.0 * math.pi / config["ipea.delta_e"]) / config["ipea.nt"]
        circuit = trotter_cycle(qham, tau, config["ducc.strategy"])
    counts = gate_counts(circuit)
    controlled_counts = gate_counts(make_controlled(circuit))
    (out_dir / "circuit.txt").write_text(circuit_to_text(circuit), encoding="utf-8")
    counts_payload = {
        "single_qubit": counts.single_qubit,
        "cnot": counts.cnot,
        "controlled": {
            "single_qubit": controlled_counts.single_qubit,
            "cnot": controlled_counts.cnot,
        },
    }
    write_json(out_dir / "gate_counts.json", {"config": config.echo(), **counts_payload})
    return {**info, "target": target, "gate_counts": counts_payload}


_TASKS = {
    "map": _task_map,
    "fci": _task_fci,
    "vqe": _task_vqe,
    "ipea": _task_ipea,
    "compile": _task_compile,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groundsim",
        description="Ground-state energies of small fermionic systems by "
                    "simulated quantum algorithms.",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task in _TASKS:
        p = sub.add_parser(task)
        p.add_argument("--integrals", help="integrals file path")
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--out", help="output directory (default: results)")
        p.add_argument("--seed", type=int, help="master random seed")
        p.add_argument("--threads", type=int, help="internal parallelism cap")
        p.add_argument("--no-taper", action="store_true",
                       help="keep the two symmetry qubits")
        if task == "vqe":
            p.add_argument("--ansatz", choices=("ducc-sd", "he"))
            p.add_argument("--optimizer", choices=("adam", "qng"))
            p.add_argument("--max-iters", type=int)
            p.add_argument("--strategy", choices=("greedy", "three-step"))
            p.add_argument("--he-layers", type=int)
            p.add_argument("--he-layout", choices=("merged", "splitted"))
            p.add_argument("--he-rotation", choices=("zx", "zyz"))
        if task == "ipea":
            p.add_argument("--nbits", type=int)
            p.add_argument("--nt", type=int)
            p.add_argument("--delta-e", type=float)
            p.add_argument("--eprime", type=float)
            p.add_argument("--exact-evolution", action="store_true")
            p.add_argument("--shots", type=int)
        if task == "compile":
            p.add_argument("--target", choices=("ducc", "he", "trotter-step"))
            p.add_argument("--strategy", choices=("greedy", "three-step"))
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    mapping = {
        "integrals": "integrals",
        "out": "output",
        "seed": "seed",
        "threads": "threads",
        "ansatz": "ansatz",
        "optimizer": "optimizer",
        "max_iters": "max_iters",
        "strategy": "ducc.strategy",
        "he_layers": "he.layers",
        "he_layout": "he.layout",
        "he_rotation": "he.rotation",
        "nbits": "ipea.nbits",
        "nt": "ipea.nt",
        "delta_e": "ipea.delta_e",
        "eprime": "ipea.eprime",
        "shots": "ipea.shots",
        "target": "compile.target",
    }
    overrides = {}
    for attr, key in mapping.items():
        if hasattr(args, attr) and getattr(args, attr) is not None:
            overrides[key] = getattr(args, attr)
    if getattr(args, "no_taper", False):
        overrides["taper"] = False
    if getattr(args, "exact_evolution", False):
        overrides["ipea.exact_evolution"] = True
    return overrides


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        config = parse_config(args.task, args.config, _overrides_from_args(args))
        out_dir = Path(config["output"])
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = _TASKS[args.task](config, out_dir)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegralsFormatError, HermiticityError, SymmetryViolationError,
            ValueError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_json(out_dir / "result.json", {"config": config.echo(), **payload})
    print(json.dumps({"task": args.task, "output": str(out_dir)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
