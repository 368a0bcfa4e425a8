"""Command-line entry point: generate / fit / predict / evaluate / bench.

Every flag can also come from a plain-text config file of ``key = value``
lines (``--config``); explicit flags win over the file.  All randomness flows
from one 64-bit seed; trajectory i uses the subseed
``seed XOR splitmix(i + 1)``.  Exit codes: 0 success, 2 usage or
configuration error, 3 numerical failure.

Output files never embed timestamps (identical config + seed gives
bit-identical files); wall-clock info goes to a ``.log`` sidecar.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import kernels
from .encoders import encode_trajectory, get_encoder
from .errors import FitError, FormatError, QkmError
from .fitting import PhaseTrajectory, fit_system
from .metrics import energy_spectrum, pdf_estimate, relative_l2, scaling_exponents, structure_functions
from .model import KoopmanModel
from .systems import GrayScottParams, advection_trajectory, gray_scott_trajectory, torus_rotation_trajectory
from .trajio import TrajectoryDataset, read_trajectory, write_trajectory

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_SPLITMIX = 0x9E3779B97F4A7C15


def subseed(seed: int, index: int) -> int:
    """Per-trajectory subseed: seed XOR a splitmix-style hash of the index."""
    z = ((index + 1) * _SPLITMIX) & 0xFFFFFFFFFFFFFFFF
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z ^= z >> 27
    return (seed ^ z) & 0xFFFFFFFFFFFFFFFF


class UsageError(Exception):
    pass


def _read_config(path) -> dict:
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"bad config line (expected 'key = value'): {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args, defaults: dict):
    """Fill argparse None values from the config file, then from defaults."""
    config = _read_config(args.config) if getattr(args, "config", None) else {}
    for key, default in defaults.items():
        if getattr(args, key, None) is not None:
            continue
        if key in config:
            raw = config[key]
            if isinstance(default, bool):
                value = raw.lower() in ("1", "true", "yes", "on")
            elif default is None:
                value = raw
            else:
                value = type(default)(raw)
        else:
            value = default
        setattr(args, key, value)
    unknown = set(config) - set(defaults) - {"command"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return args


def _sidecar_log(out_path, message: str):
    Path(str(out_path) + ".log").write_text(
        f"{message}\nwall_clock {time.strftime('%Y-%m-%dT%H:%M:%S')}\n",
        encoding="utf-8",
    )


def _grayscott_initial(grid: int, rng):
    """Seeded maze-pattern starter: uniform A=1/B=0 plus a perturbed patch."""
    a = np.ones((grid, grid))
    b = np.zeros((grid, grid))
    lo, hi = grid // 2 - grid // 8, grid // 2 + grid // 8
    a[lo:hi, lo:hi] = 0.5
    b[lo:hi, lo:hi] = 0.25
    a += 0.02 * rng.random((grid, grid))
    b += 0.02 * rng.random((grid, grid))
    return a, b


def _bandlimited_field(d: int, rng):
    """Random real field occupying every mode below Nyquist (spectral decay 1/sqrt(1+k))."""
    x = np.linspace(0.0, 2.0 * np.pi, d, endpoint=False)
    u = np.zeros(d)
    for k in range(d // 2):
        u += rng.normal() / np.sqrt(1.0 + k) * np.cos(k * x + rng.uniform(0, 2 * np.pi))
    return u


GENERATE_DEFAULTS = {
    "system": "torus",
    "d": 8,
    "T": 60,
    "dt": 0.0,  # 0 -> per-system default
    "seed": 0,
    "index": 0,
    "c_wave": 1.0,
    "F": 0.029,
    "K": 0.057,
    "grid": 64,
    "omega_scale": 1.0,
    "omega_mode": "parity",
}

_SYSTEM_DT = {"torus": 0.1, "advection": 0.02, "grayscott": 10.0}


def cmd_generate(args) -> int:
    _resolve(args, GENERATE_DEFAULTS)
    if args.out is None:
        raise UsageError("generate requires --out")
    if args.system not in _SYSTEM_DT:
        raise UsageError(f"unknown system {args.system!r}")
    dt = args.dt if args.dt > 0 else _SYSTEM_DT[args.system]
    rng = np.random.default_rng(subseed(args.seed, args.index))
    if args.system == "torus":
        if args.omega_mode == "parity":
            # rates drawn from a diagonal-Hamiltonian eigenvalue table, so the
            # rotation is exactly representable by the evolution engine
            if args.d < 2 or args.d & (args.d - 1) != 0:
                raise UsageError(
                    f"--omega-mode parity needs a power-of-two d, got {args.d}"
                )
            n = args.d.bit_length() - 1
            alpha = rng.uniform(-args.omega_scale, args.omega_scale, n)
            omega = kernels.eigenvalue_table_numpy(alpha, n)
        elif args.omega_mode == "free":
            omega = rng.uniform(-args.omega_scale, args.omega_scale, args.d)
        else:
            raise UsageError(f"unknown omega mode {args.omega_mode!r}")
        phi0 = rng.uniform(-np.pi, np.pi, args.d)
        ds = torus_rotation_trajectory(omega, phi0, dt, args.T)
    elif args.system == "advection":
        u0 = _bandlimited_field(args.d, rng)
        ds = advection_trajectory(args.c_wave, u0, dt, args.T)
    else:
        params = GrayScottParams(feed=args.F, kill=args.K, nx=args.grid, ny=args.grid)
        y_a0, y_b0 = _grayscott_initial(args.grid, rng)
        ds = gray_scott_trajectory(params, y_a0, y_b0, dt, args.T)
    meta = dict(ds.metadata)
    meta["seed"] = str(args.seed)
    meta["trajectory_index"] = str(args.index)
    ds = TrajectoryDataset(snapshots=ds.snapshots, dt=ds.dt, metadata=meta, kind=ds.kind)
    write_trajectory(args.out, ds)
    _sidecar_log(args.out, f"generate system={args.system} seed={args.seed}")
    print(f"wrote {args.out}: {ds.steps + 1} snapshots of shape {ds.shape}, dt={ds.dt}")
    return EXIT_OK


FIT_DEFAULTS = {
    "encoder": "identity",
    "global_phase": False,
    "report": "",
}


def cmd_fit(args) -> int:
    _resolve(args, FIT_DEFAULTS)
    if args.input is None or args.out_model is None:
        raise UsageError("fit requires --input and --out-model")
    ds = read_trajectory(args.input)
    d = int(np.prod(ds.shape))
    encoder = get_encoder(args.encoder, d, field_shape=ds.shape)
    layout = encoder.layout
    r, phi = encode_trajectory(encoder, ds.snapshots)
    mask = encoder.modulus_mask(encoder.encode(ds.snapshots[0]))
    trajectories, masks = [], []
    for j in range(1, layout.subsystem_count + 1):
        sl = layout.block_slice(j)
        trajectories.append(PhaseTrajectory(dt=ds.dt, phases=phi[:, sl]))
        masks.append(mask[sl])
    hamiltonian, results, diagnostics = fit_system(
        trajectories, layout, ds.dt, include_global_phase=args.global_phase, masks=masks
    )
    global_rates = None
    if args.global_phase:
        global_rates = np.array([res.global_phase_rate / ds.dt for res in results])
    model = KoopmanModel(hamiltonian=hamiltonian, global_rates=global_rates)
    model.save(args.out_model)
    _sidecar_log(args.out_model, f"fit input={args.input} encoder={args.encoder}")
    report_lines = [res.report(j) for j, res in enumerate(results, start=1)]
    report_lines.append(
        "worst_index_residual "
        + " ".join(f"{v:.17g}" for v in diagnostics["worst_index_residual"])
        + "\n"
    )
    report = "".join(report_lines)
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8")
    else:
        sys.stdout.write(report)
    return EXIT_OK


PREDICT_DEFAULTS = {
    "encoder": "identity",
    "steps": "",
    "errors": "",
    "squared": False,
}


def _parse_steps(spec: str, default_hi: int):
    if not spec:
        return 0, default_hi
    if ".." in spec:
        lo_s, _, hi_s = spec.partition("..")
        lo, hi = int(lo_s), int(hi_s)
    else:
        lo, hi = 0, int(spec)
    if lo < 0 or hi < lo:
        raise UsageError(f"bad step range {spec!r}")
    return lo, hi


def cmd_predict(args) -> int:
    _resolve(args, PREDICT_DEFAULTS)
    if args.model is None or args.input is None or args.out is None:
        raise UsageError("predict requires --model, --input and --out")
    if not Path(args.model).exists():
        raise UsageError(f"model file not found: {args.model}")
    model = KoopmanModel.load(args.model)
    ds = read_trajectory(args.input)
    d = int(np.prod(ds.shape))
    encoder = get_encoder(args.encoder, d, field_shape=ds.shape)
    if encoder.layout.total != model.layout.total:
        raise FormatError(
            f"model layout total {model.layout.total} does not match encoder total "
            f"{encoder.layout.total}"
        )
    lo, hi = _parse_steps(args.steps, ds.steps)
    obs0 = encoder.encode(ds.snapshots[0])
    preds = []
    errors = []
    for k in range(lo, hi + 1):
        # one-shot: a single k-scaled evolution, never step-by-step
        pred = encoder.decode(model.evolve(obs0, k * ds.dt))
        preds.append(np.asarray(pred).reshape(ds.shape))
        if k <= ds.steps:
            errors.append(
                (k, encoder.prediction_error(preds[-1], ds.snapshots[k], squared=args.squared))
            )
    meta = {
        "source": str(args.input),
        "model": str(args.model),
        "first_step": str(lo),
        "predicted": "one-shot",
    }
    out_ds = TrajectoryDataset(snapshots=np.stack(preds), dt=ds.dt, metadata=meta)
    write_trajectory(args.out, out_ds)
    _sidecar_log(args.out, f"predict model={args.model} steps={lo}..{hi}")
    if args.errors:
        mode = "squared_relative_l2" if args.squared else "relative_l2"
        lines = [f"step,{mode}"]
        lines.extend(f"{k},{e:.17g}" for k, e in errors)
        Path(args.errors).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if errors:
        worst = max(e for _, e in errors)
        print(f"predicted steps {lo}..{hi}; max relative error {worst:.3e}")
    else:
        print(f"predicted steps {lo}..{hi}")
    return EXIT_OK


EVALUATE_DEFAULTS = {
    "bins": 50,
    "orders": "1,2,3,4",
}


def _stats_field(snapshot: np.ndarray):
    if snapshot.ndim == 2:
        return snapshot
    if snapshot.ndim == 3:
        return snapshot[0]
    return None


def cmd_evaluate(args) -> int:
    _resolve(args, EVALUATE_DEFAULTS)
    if args.pred is None or args.truth is None or args.out_dir is None:
        raise UsageError("evaluate requires --pred, --truth and --out-dir")
    pred = read_trajectory(args.pred)
    truth = read_trajectory(args.truth)
    if pred.shape != truth.shape:
        raise UsageError(
            f"shape mismatch between prediction {pred.shape} and truth {truth.shape}"
        )
    steps = min(pred.steps, truth.steps)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    errs = [
        relative_l2(pred.snapshots[k], truth.snapshots[k])
        for k in range(steps + 1)
    ]
    lines = ["step,relative_l2"]
    lines.extend(f"{k},{e:.17g}" for k, e in enumerate(errs))
    (out_dir / "errors.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    field_p = _stats_field(pred.snapshots[steps])
    field_t = _stats_field(truth.snapshots[steps])
    written = ["errors.csv"]
    if field_p is not None:
        for tag, field in (("pred", field_p), ("truth", field_t)):
            (out_dir / f"spectrum_{tag}.csv").write_text(
                energy_spectrum(field).to_csv(), encoding="utf-8"
            )
            written.append(f"spectrum_{tag}.csv")
        orders = [float(tok) for tok in str(args.orders).split(",") if tok]
        max_sep = max(2, min(field_p.shape) // 4)
        seps = sorted(set(np.unique(np.geomspace(1, max_sep, 12).astype(int))))
        sf_lines = ["p,r,s_p_pred,s_p_truth"]
        table_p = structure_functions(field_p, orders, seps)
        table_t = structure_functions(field_t, orders, seps)
        for pi, p in enumerate(orders):
            for ri, r in enumerate(seps):
                sf_lines.append(f"{p},{r},{table_p[pi, ri]:.17g},{table_t[pi, ri]:.17g}")
        (out_dir / "structure_functions.csv").write_text(
            "\n".join(sf_lines) + "\n", encoding="utf-8"
        )
        written.append("structure_functions.csv")
    for tag, ds in (("pred", pred), ("truth", truth)):
        edges, density = pdf_estimate(ds.snapshots[steps].ravel(), bins=args.bins)
        centers = 0.5 * (edges[:-1] + edges[1:])
        pdf_lines = ["bin_center,density"]
        pdf_lines.extend(f"{c:.17g},{v:.17g}" for c, v in zip(centers, density))
        (out_dir / f"pdf_{tag}.csv").write_text("\n".join(pdf_lines) + "\n", encoding="utf-8")
        written.append(f"pdf_{tag}.csv")

    summary = [
        f"steps_compared {steps + 1}",
        f"mean_relative_l2 {np.mean(errs):.17g}",
        f"max_relative_l2 {np.max(errs):.17g}",
        f"final_relative_l2 {errs[-1]:.17g}",
    ]
    (out_dir / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    written.append("summary.txt")

    gp = [
        "# gnuplot script stub for the evaluation bundle",
        "set datafile separator ','",
        "set logscale y",
        "plot 'errors.csv' using 1:2 with lines title 'relative L2 error'",
    ]
    if field_p is not None:
        gp.append(
            "# replot 'spectrum_pred.csv' using 1:2 with lines, "
            "'spectrum_truth.csv' using 1:2 with points"
        )
    (out_dir / "plot.gp").write_text("\n".join(gp) + "\n", encoding="utf-8")
    written.append("plot.gp")
    print(f"evaluation bundle in {out_dir}: {', '.join(written)}")
    return EXIT_OK


BENCH_DEFAULTS = {
    "n_min": 4,
    "n_max": 20,
    "reps": 5,
    "seed": 0,
}


def cmd_bench(args) -> int:
    _resolve(args, BENCH_DEFAULTS)
    if args.out is None:
        raise UsageError("bench requires --out")
    if args.n_min < 1 or args.n_max < args.n_min:
        raise UsageError(f"bad qubit range {args.n_min}..{args.n_max}")
    rows = bench_mod.run_bench(
        range(args.n_min, args.n_max + 1), reps=args.reps, seed=args.seed
    )
    Path(args.out).write_text(bench_mod.bench_csv(rows), encoding="utf-8")
    print(f"wrote {args.out}: {len(rows)} rows, n={args.n_min}..{args.n_max}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkm",
        description="Unitary Koopman evolution of modulus-phase observables",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a reference-system trajectory")
    p.add_argument("--config")
    p.add_argument("--system", choices=["torus", "advection", "grayscott"])
    p.add_argument("--out")
    p.add_argument("--d", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--index", type=int, help="trajectory index for subseeding")
    p.add_argument("--c-wave", dest="c_wave", type=float)
    p.add_argument("--F", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--omega-scale", dest="omega_scale", type=float)
    p.add_argument("--omega-mode", dest="omega_mode", choices=["parity", "free"])
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit R_z coefficients from a trajectory")
    p.add_argument("--config")
    p.add_argument("--input")
    p.add_argument("--encoder", choices=["identity", "fourier"])
    p.add_argument("--global-phase", dest="global_phase", action="store_const", const=True)
    p.add_argument("--out-model", dest="out_model")
    p.add_argument("--report")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="one-shot prediction from a fitted model")
    p.add_argument("--config")
    p.add_argument("--model")
    p.add_argument("--input")
    p.add_argument("--encoder", choices=["identity", "fourier"])
    p.add_argument("--steps", help="range 'A..B' or single upper bound")
    p.add_argument("--out")
    p.add_argument("--errors", help="per-step error CSV (needs ground truth in --input)")
    p.add_argument("--squared", action="store_const", const=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metric bundle for predicted vs truth")
    p.add_argument("--config")
    p.add_argument("--pred")
    p.add_argument("--truth")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--bins", type=int)
    p.add_argument("--orders")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="complexity/backend scaling table")
    p.add_argument("--config")
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QkmError as exc:
        # generate only fails on bad parameters, which is a config problem
        if args.command == "generate" and not isinstance(exc, FitError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
