"""Command-line front end.

Subcommands: verify, matrix, simulate, mixing, coupon, sweep.  Every data
file is written atomically (temp file, then rename) and accompanied by a
manifest recording the resolved configuration, seed and output digests, so
published numbers are traceable.  Flags override an optional JSON config
file (--config), which overrides built-in defaults.

Exit codes: 0 success, 1 validation or configuration error, 2 invariant
failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    coupon_expectation,
    estimate_correlators,
    evaluate_inequality,
    noisy_inequality_value,
    sweep_noise,
    sweep_to_csv_text,
)
from .chain import (
    PERFECT_ENTRY_NUMERATORS,
    build_error_chain,
    build_perfect_chain,
    matrix_to_csv_text,
    mixing_time_bound,
    mixing_time_bound_general,
    spectrum,
    stationary,
    tv_distance,
    worst_case_distance,
)
from .errors import (
    AlgebraViolation,
    ConfigError,
    DomainError,
    InsufficientData,
    PMSquareError,
)
from .experiment import (
    DEFAULT_BURN_IN,
    ExperimentConfig,
    coupon_time,
    run,
    substream,
)
from .operators import (
    N_CONTEXTS,
    N_STATES,
    all_triple_states,
    build_square,
    reduced_purity,
    triple_eigenbasis,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; keep that lane for
    # invariant failures and use 1 for anything the user typed wrong.
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def verification_checks(square=None, noise_samples=(0.0, 0.25, 0.5, 5.0 / 6.0, 0.9, 1.0)):
    """Run the full algebraic and spectral invariant suite.

    Accepts a prebuilt (possibly corrupted) square so tests can exercise
    the failure paths; by default it builds and checks the real one.
    """
    results: list[CheckResult] = []

    def record(name, passed, detail):
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail))

    if square is None:
        try:
            square = build_square()
        except AlgebraViolation as exc:
            record("square-construction", False, str(exc))
            return results

    eye = np.eye(4)
    worst = max(
        float(np.abs(square.observable(k) @ square.observable(k) - eye).max())
        for k in range(1, 10)
    )
    record("observable-involutions", worst < 1e-12, f"max |A^2 - 1| = {worst:.3e}")

    worst = 0.0
    for j in range(1, N_CONTEXTS + 1):
        ka, kb, kc = square.contexts[j - 1]
        for p, q in ((ka, kb), (ka, kc), (kb, kc)):
            worst = max(worst, float(np.abs(square.commutator(p, q)).max()))
    record("context-commutation", worst < 1e-12, f"max commutator entry = {worst:.3e}")

    worst = max(
        float(np.abs(square.product(j) - square.sign(j) * eye).max())
        for j in range(1, N_CONTEXTS + 1)
    )
    record("context-products", worst < 1e-12, f"max |product - sign*1| = {worst:.3e}")

    try:
        states = []
        for j in range(1, N_CONTEXTS + 1):
            states.extend(triple_eigenbasis(square, j))
    except AlgebraViolation as exc:
        record("eigenbasis-construction", False, str(exc))
        return results

    worst = 0.0
    for j in range(1, N_CONTEXTS + 1):
        block = states[4 * (j - 1) : 4 * j]
        total = sum(s.projector for s in block)
        worst = max(worst, float(np.abs(total - eye).max()))
    record("eigenbasis-completeness", worst < 1e-12, f"max |sum P - 1| = {worst:.3e}")

    worst = 0.0
    for state in states:
        for obs, val in zip(square.context_observables(state.context), state.outcomes):
            worst = max(worst, float(np.abs(obs @ state.vector - val * state.vector).max()))
    record("eigenvalue-relations", worst < 1e-12, f"max |A b - s b| = {worst:.3e}")

    purities = [reduced_purity(s.vector) for s in states]
    n_product = sum(1 for p in purities if abs(p - 1.0) < 1e-10)
    n_entangled = sum(1 for p in purities if abs(p - 0.5) < 1e-10)
    record(
        "product-entangled-split",
        n_product == 16 and n_entangled == 8,
        f"{n_product} product / {n_entangled} maximally entangled",
    )

    projectors = np.array([s.projector for s in states])
    overlaps = np.einsum("aij,bji->ab", projectors, projectors).real
    cross = []
    for a in range(N_STATES):
        for b in range(N_STATES):
            if a // 4 != b // 4:
                cross.append(overlaps[a, b])
    cross = np.asarray(cross)
    dist = np.minimum(np.abs(cross), np.minimum(np.abs(cross - 0.25), np.abs(cross - 0.5)))
    record(
        "cross-context-overlaps",
        float(dist.max()) < 1e-12,
        f"values within {dist.max():.3e} of {{0, 1/4, 1/2}}",
    )

    perfect = build_perfect_chain(square)
    asym = float(np.abs(perfect.entries - perfect.entries.T).max())
    record("chain-symmetry", asym < 1e-12, f"max |T - T^t| = {asym:.3e}")

    col_drift = float(np.abs(perfect.entries.sum(axis=0) - 1.0).max())
    row_drift = float(np.abs(perfect.entries.sum(axis=1) - 1.0).max())
    record(
        "chain-double-stochasticity",
        max(col_drift, row_drift) < 1e-12,
        f"max column/row sum drift = {max(col_drift, row_drift):.3e}",
    )

    scaled = 24.0 * perfect.entries
    nearest = np.rint(scaled)
    ok = (
        float(np.abs(scaled - nearest).max()) < 1e-12
        and set(np.unique(nearest.astype(int))) <= set(PERFECT_ENTRY_NUMERATORS)
    )
    record("chain-entry-values", ok, "entries in {0, 1/24, 1/12, 1/6}")

    summary = spectrum(perfect)
    ok = (
        summary.multiplicity(1.0) == 1
        and summary.multiplicity(1.0 / 3.0) == 9
        and summary.multiplicity(0.0) == 14
        and abs(summary.second_largest - 1.0 / 3.0) <= 1e-9
    )
    record(
        "chain-spectrum",
        ok,
        "multiplicities {1: %d, 1/3: %d, 0: %d}"
        % (summary.multiplicity(1.0), summary.multiplicity(1.0 / 3.0), summary.multiplicity(0.0)),
    )

    pi = stationary(perfect)
    drift = float(np.abs(pi - 1.0 / N_STATES).max())
    record("stationary-uniform", drift < 1e-12, f"max |pi - 1/24| = {drift:.3e}")

    worst_col = 0.0
    worst_pi = 0.0
    for p in noise_samples:
        noisy = build_error_chain(perfect, p)
        worst_col = max(worst_col, float(np.abs(noisy.entries.sum(axis=0) - 1.0).max()))
        target = np.concatenate(
            [np.full(N_STATES, p / N_STATES), np.full(N_STATES, (1.0 - p) / N_STATES)]
        )
        worst_pi = max(worst_pi, float(np.abs(stationary(noisy) - target).max()))
    record("error-chain-columns", worst_col < 1e-12, f"max column drift = {worst_col:.3e}")
    record(
        "error-chain-stationary",
        worst_pi < 1e-12,
        f"max |pi - (p/24, (1-p)/24)| = {worst_pi:.3e}",
    )

    return results


# ---------------------------------------------------------------------------
# output plumbing


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pmsquare-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class OutputSet:
    """Collects output files so a failed command leaves nothing behind."""

    def __init__(self):
        self.entries: list[dict] = []

    def write(self, path, text: str) -> None:
        data = text.encode("ascii")
        _atomic_write(str(path), data)
        self.entries.append(
            {"path": str(path), "sha256": _sha256_bytes(data), "bytes": len(data)}
        )

    def render(self, render_fn, path) -> None:
        """Render a figure atomically: draw to a sibling temp file, then rename."""
        path = str(path)
        directory = os.path.dirname(os.path.abspath(path)) or "."
        suffix = os.path.splitext(path)[1]
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pmsquare-", suffix=suffix)
        os.close(fd)
        try:
            render_fn(tmp)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        with open(path, "rb") as fh:
            data = fh.read()
        self.entries.append(
            {"path": path, "sha256": _sha256_bytes(data), "bytes": len(data)}
        )

    def discard_all(self) -> None:
        for entry in self.entries:
            try:
                os.unlink(entry["path"])
            except OSError:
                pass
        self.entries.clear()


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written alongside every file-producing command."""

    subcommand: str
    config: dict
    seed: int | None
    outputs: list

    def to_json_dict(self) -> dict:
        return {
            "tool": "pmsquare",
            "version": __version__,
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": self.seed,
            "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "outputs": self.outputs,
        }


def _write_manifest(outputs: OutputSet, base_path: str, subcommand: str, config: dict, seed=None):
    manifest = RunManifest(
        subcommand=subcommand, config=config, seed=seed, outputs=list(outputs.entries)
    )
    path = f"{base_path}.manifest.json"
    data = json.dumps(manifest.to_json_dict(), indent=2) + "\n"
    _atomic_write(path, data.encode("ascii"))
    return path


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------------------
# argument handling


def parse_grid(spec: str) -> list[float]:
    """Parse a sweep grid: either "start:step:stop" (inclusive) or a
    comma-separated list of probabilities."""
    spec = spec.strip()
    if not spec:
        raise DomainError("empty grid specification")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid range must be start:step:stop, got {spec!r}")
        try:
            start, step_size, stop = (float(x) for x in parts)
        except ValueError:
            raise DomainError(f"grid range values must be numbers, got {spec!r}") from None
        if step_size <= 0:
            raise DomainError(f"grid step must be positive, got {step_size}")
        if stop < start:
            raise DomainError(f"grid stop {stop} is below start {start}")
        count = int(round((stop - start) / step_size)) + 1
        values = [start + k * step_size for k in range(count)]
        values = [v for v in values if v <= stop + 1e-12]
    else:
        try:
            values = [float(x) for x in spec.split(",") if x.strip()]
        except ValueError:
            raise DomainError(f"grid values must be numbers, got {spec!r}") from None
        if not values:
            raise DomainError(f"no grid values in {spec!r}")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"grid value {v} outside [0, 1]")
    return values


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(loaded, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return loaded


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge CLI flags over the --config file over built-in defaults."""
    file_values = _load_config_file(getattr(args, "config", None))
    resolved = {}
    for key, default in defaults.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            resolved[key] = cli_value
        elif key in file_values:
            resolved[key] = file_values[key]
        else:
            resolved[key] = default
    return resolved


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--json", action="store_true", help="machine-readable stdout")
    sub.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub.add_argument("--out", help="output path (or path prefix for simulate)")
    sub.add_argument("--plot", action="store_true",
                     help="also render figures next to the written output")


def _say(resolved_quiet: bool, text: str) -> None:
    if not resolved_quiet:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args) -> int:
    resolved = _resolve(args, {"json": False, "quiet": False, "out": None})
    results = verification_checks()
    all_passed = all(r.passed for r in results)
    if resolved["json"]:
        payload = {
            "passed": all_passed,
            "checks": [
                {"name": r.name, "passed": r.passed, "detail": r.detail} for r in results
            ],
        }
        text = _json_text(payload)
        print(text, end="")
        if resolved["out"]:
            outputs = OutputSet()
            outputs.write(resolved["out"], text)
    else:
        width = max(len(r.name) for r in results)
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"{r.name:<{width}}  {status}  {r.detail}")
        print(f"{'overall':<{width}}  {'PASS' if all_passed else 'FAIL'}")
    return EXIT_OK if all_passed else EXIT_INVARIANT


def cmd_matrix(args) -> int:
    resolved = _resolve(
        args,
        {"noise": None, "format": "csv", "out": None, "quiet": False, "plot": False},
    )
    if resolved["out"] is None:
        raise ConfigError("matrix requires --out")
    if resolved["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {resolved['format']!r}")
    perfect = build_perfect_chain()
    if resolved["noise"] is None:
        matrix = perfect
    else:
        matrix = build_error_chain(perfect, float(resolved["noise"]))
    outputs = OutputSet()
    try:
        if resolved["format"] == "csv":
            outputs.write(resolved["out"], matrix_to_csv_text(matrix))
        else:
            outputs.write(resolved["out"], _json_text(matrix.to_json_dict()))
        if resolved["plot"]:
            from .plotting import save_matrix_heatmap

            figure_path = f"{os.path.splitext(resolved['out'])[0]}.png"
            outputs.render(lambda p: save_matrix_heatmap(matrix, p), figure_path)
        _write_manifest(outputs, resolved["out"], "matrix", resolved)
    except BaseException:
        outputs.discard_all()
        raise
    drift = float(np.abs(matrix.entries.sum(axis=0) - 1.0).max())
    _say(resolved["quiet"], f"wrote {matrix.n}x{matrix.n} matrix to {resolved['out']}")
    _say(resolved["quiet"], f"column sum check: max |sum - 1| = {drift:.3e}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    resolved = _resolve(
        args,
        {
            "rounds": 100000,
            "noise": 1.0,
            "seed": 0,
            "burn_in": DEFAULT_BURN_IN,
            "mode": "chain",
            "out": None,
            "quiet": False,
            "plot": False,
        },
    )
    if resolved["out"] is None:
        raise ConfigError("simulate requires --out (used as a path prefix)")
    square = build_square()
    matrix = build_error_chain(build_perfect_chain(square), float(resolved["noise"]))
    config = ExperimentConfig(
        rounds=int(resolved["rounds"]),
        burn_in=int(resolved["burn_in"]),
        alignment_p=float(resolved["noise"]),
        seed=int(resolved["seed"]),
        mode=resolved["mode"],
    )
    trajectory = run(config, square, matrix)
    report = evaluate_inequality(estimate_correlators(trajectory))

    prefix = resolved["out"]
    outputs = OutputSet()
    try:
        outputs.write(f"{prefix}.trajectory.csv", trajectory.to_csv_text())
        outputs.write(f"{prefix}.report.json", _json_text(report.to_json_dict()))
        if resolved["plot"]:
            from .plotting import save_correlator_bars

            figure_path = f"{prefix}.correlators.png"
            outputs.render(lambda p: save_correlator_bars(report, p), figure_path)
        _write_manifest(outputs, prefix, "simulate", resolved, seed=config.seed)
    except BaseException:
        outputs.discard_all()
        raise
    _say(
        resolved["quiet"],
        f"inequality value {report.value:.6f} +- {report.std_error:.6f} "
        f"(bound 4, quantum 6, violated={report.violated})",
    )
    _say(resolved["quiet"], f"wrote {prefix}.trajectory.csv and {prefix}.report.json")
    return EXIT_OK


def cmd_mixing(args) -> int:
    resolved = _resolve(
        args,
        {"epsilon": None, "noise": None, "json": False, "quiet": False,
         "out": None, "plot": False},
    )
    if resolved["epsilon"] is None:
        raise ConfigError("mixing requires --epsilon")
    epsilon = float(resolved["epsilon"])
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    perfect = build_perfect_chain()
    if resolved["noise"] is None:
        matrix = perfect
        bound = mixing_time_bound(epsilon)
    else:
        p = float(resolved["noise"])
        matrix = build_error_chain(perfect, p)
        pi = stationary(matrix)
        support_min = float(pi[pi > 1e-15].min())
        lambda_star = spectrum(matrix).second_largest
        bound = mixing_time_bound_general(epsilon, support_min, lambda_star)
    steps = list(range(0, math.ceil(bound) + 6))
    distances = [worst_case_distance(matrix, t) for t in steps]
    crossing = next((t for t, d in zip(steps, distances) if d <= epsilon), None)

    payload = {
        "epsilon": epsilon,
        "noise": resolved["noise"],
        "bound": bound,
        "crossing": crossing,
        "rows": [{"t": t, "distance": d} for t, d in zip(steps, distances)],
    }
    if resolved["json"]:
        text = _json_text(payload)
        print(text, end="")
    else:
        print(f"analytic mixing-time bound: {bound:.2f} steps (epsilon = {epsilon:g})")
        print(f"{'t':>4}  {'worst-case distance':>22}")
        for t, d in zip(steps, distances):
            print(f"{t:>4}  {d:>22.17g}")
        print(f"first step with distance <= epsilon: {crossing}")

    if resolved["out"] or resolved["plot"]:
        if resolved["out"] is None:
            raise ConfigError("--plot requires --out to anchor the figure path")
        outputs = OutputSet()
        try:
            outputs.write(resolved["out"], _json_text(payload))
            if resolved["plot"]:
                from .plotting import save_mixing_decay

                figure_path = f"{os.path.splitext(resolved['out'])[0]}.png"
                outputs.render(
                    lambda p: save_mixing_decay(steps, distances, epsilon, bound, p),
                    figure_path,
                )
            _write_manifest(outputs, resolved["out"], "mixing", resolved)
        except BaseException:
            outputs.discard_all()
            raise
    return EXIT_OK


def cmd_coupon(args) -> int:
    resolved = _resolve(
        args,
        {
            "trials": None,
            "noise": 1.0,
            "seed": 0,
            "rounds": DEFAULT_BURN_IN + 800,
            "json": False,
            "quiet": False,
            "out": None,
            "plot": False,
        },
    )
    if resolved["trials"] is None:
        raise ConfigError("coupon requires --trials")
    trials = int(resolved["trials"])
    if trials < 1:
        raise ConfigError(f"trials must be at least 1, got {trials}")
    p = float(resolved["noise"])
    square = build_square()
    matrix = build_error_chain(build_perfect_chain(square), p)
    times = []
    incomplete = 0
    for trial in range(trials):
        trial_seed = int(substream(int(resolved["seed"]), trial).integers(2**63))
        config = ExperimentConfig(
            rounds=int(resolved["rounds"]),
            burn_in=DEFAULT_BURN_IN,
            alignment_p=p,
            seed=trial_seed,
            mode="chain",
        )
        t = coupon_time(run(config, square, matrix))
        if t is None:
            incomplete += 1
        else:
            times.append(t)
    times_arr = np.asarray(times, dtype=float)
    analytic = coupon_expectation(N_STATES, 1.0 - p)
    payload = {
        "trials": trials,
        "noise": p,
        "rounds_per_trial": int(resolved["rounds"]),
        "completed": int(times_arr.size),
        "incomplete": incomplete,
        "mean": float(times_arr.mean()) if times_arr.size else None,
        "variance": float(times_arr.var(ddof=1)) if times_arr.size > 1 else None,
        "std_error": (
            float(times_arr.std(ddof=1) / math.sqrt(times_arr.size))
            if times_arr.size > 1
            else None
        ),
        "independent_draw_expectation": analytic,
    }
    text = _json_text(payload)
    if resolved["json"] or not resolved["quiet"]:
        print(text, end="")
    if resolved["out"] or resolved["plot"]:
        if resolved["out"] is None:
            raise ConfigError("--plot requires --out to anchor the figure path")
        outputs = OutputSet()
        try:
            outputs.write(resolved["out"], text)
            if resolved["plot"] and times_arr.size:
                from .plotting import save_coupon_histogram

                figure_path = f"{os.path.splitext(resolved['out'])[0]}.png"
                outputs.render(
                    lambda p: save_coupon_histogram(times_arr, analytic, p), figure_path
                )
            _write_manifest(outputs, resolved["out"], "coupon", resolved,
                            seed=int(resolved["seed"]))
        except BaseException:
            outputs.discard_all()
            raise
    return EXIT_OK


def cmd_sweep(args) -> int:
    resolved = _resolve(
        args,
        {"grid": None, "rounds": 100000, "seed": 0, "out": None,
         "quiet": False, "plot": False},
    )
    if resolved["grid"] is None:
        raise ConfigError("sweep requires --grid")
    if resolved["out"] is None:
        raise ConfigError("sweep requires --out")
    grid = parse_grid(str(resolved["grid"]))
    square = build_square()
    points = sweep_noise(square, grid, int(resolved["rounds"]), int(resolved["seed"]))
    outputs = OutputSet()
    try:
        outputs.write(resolved["out"], sweep_to_csv_text(points))
        if resolved["plot"]:
            from .plotting import save_sweep_curve

            figure_path = f"{os.path.splitext(resolved['out'])[0]}.png"
            outputs.render(lambda p: save_sweep_curve(points, p), figure_path)
        _write_manifest(outputs, resolved["out"], "sweep", resolved,
                        seed=int(resolved["seed"]))
    except BaseException:
        outputs.discard_all()
        raise
    _say(resolved["quiet"], f"wrote {len(points)} sweep rows to {resolved['out']}")
    for pt in points:
        _say(
            resolved["quiet"],
            f"  p={pt.p:.4f}  empirical={pt.report.value:+.4f}  "
            f"analytic={pt.analytic:+.4f}  violated={pt.report.violated}",
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmsquare", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pmsquare {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("verify", parents=[], help="run the invariant suite")
    _common_flags(sub)
    sub.set_defaults(handler=cmd_verify)

    sub = subs.add_parser("matrix", help="export a transition matrix")
    sub.add_argument("--noise", type=float, help="alignment probability; 48-state chain")
    sub.add_argument("--format", choices=["csv", "json"], help="output format (default csv)")
    _common_flags(sub)
    sub.set_defaults(handler=cmd_matrix)

    sub = subs.add_parser("simulate", help="run one recycling experiment")
    sub.add_argument("--rounds", type=int, help="measurement rounds (default 100000)")
    sub.add_argument("--noise", type=float, help="alignment probability (default 1.0)")
    sub.add_argument("--seed", type=int, help="RNG seed (default 0)")
    sub.add_argument("--burn-in", dest="burn_in", type=int,
                     help=f"rounds to discard (default {DEFAULT_BURN_IN})")
    sub.add_argument("--mode", choices=["chain", "quantum"], help="sampling mode")
    _common_flags(sub)
    sub.set_defaults(handler=cmd_simulate)

    sub = subs.add_parser("mixing", help="mixing-time bound and empirical decay")
    sub.add_argument("--epsilon", type=float, help="target accuracy in (0, 1)")
    sub.add_argument("--noise", type=float, help="analyze the 48-state chain at this p")
    _common_flags(sub)
    sub.set_defaults(handler=cmd_mixing)

    sub = subs.add_parser("coupon", help="rounds needed to observe all 24 states")
    sub.add_argument("--trials", type=int, help="number of trajectories")
    sub.add_argument("--noise", type=float, help="alignment probability (default 1.0)")
    sub.add_argument("--seed", type=int, help="RNG seed (default 0)")
    sub.add_argument("--rounds", type=int, help="round cap per trajectory")
    _common_flags(sub)
    sub.set_defaults(handler=cmd_coupon)

    sub = subs.add_parser("sweep", help="inequality value across a noise grid")
    sub.add_argument("--grid", help='grid spec: "start:step:stop" or "p1,p2,..."')
    sub.add_argument("--rounds", type=int, help="rounds per grid point (default 100000)")
    sub.add_argument("--seed", type=int, help="RNG seed (default 0)")
    _common_flags(sub)
    sub.set_defaults(handler=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.handler(args)
    except (ConfigError, DomainError, InsufficientData) as exc:
        print(f"pmsquare: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AlgebraViolation as exc:
        print(f"pmsquare: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except PMSquareError as exc:
        print(f"pmsquare: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pmsquare: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
