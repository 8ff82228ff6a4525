"""Command-line driver for simulation, reconstruction, and analysis.

Subcommands: ``simulate``, ``reconstruct``, ``svd``, ``compare``,
``metrics``.  Every command takes ``--config PATH`` (a JSON object);
explicit flags override config fields, and the effective values are
echoed into ``manifest.json`` in the output directory.  The default
output root may also come from the ``ACMRI_OUT`` environment variable.
All artifact writes go through a temp-file-plus-rename so concurrent
runs never observe partial files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .baselines import BaselineSpec, reconstruct_baseline
from .coilstack import CoilStack
from .geometry import SamplingMask, make_accelerated_mask, make_random_mask
from .metrics import default_roi, rel_error, ssim_mean
from .simulation import CoilModel, PhantomSpec, make_coil_maps, make_phantom, simulate_kspace
from .solver import ReconResult, SolverOptions, TvParams, reconstruct
from .svd_analysis import DEFAULT_THRESHOLD, SweepConfig, stability_sweep
from .geometry import Grid

OUT_ENV = "ACMRI_OUT"
RECON_METHODS = ("ac", "zero_fill", "tikhonov", "tv2d")


# ---------------------------------------------------------------- I/O helpers


def _atomic_bytes(path: str, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, doc) -> None:
    _atomic_bytes(path, (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode())


def _fmt(value) -> str:
    """Full round-trip decimal formatting for CSV cells."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return str(float(value))
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(cell) for cell in row])
    _atomic_bytes(path, buf.getvalue().encode())


def write_png(path: str, image: np.ndarray, peak=None) -> None:
    """8-bit grayscale PNG of ``|image|`` scaled by ``peak`` (its own
    max if not given) and clamped to [0, 1]."""
    from PIL import Image

    arr = np.abs(np.asarray(image, dtype=float))
    scale = float(arr.max() if peak is None else peak)
    if scale <= 0:
        scale = 1.0
    gray = np.clip(arr / scale, 0.0, 1.0)
    img = Image.fromarray(np.round(gray * 255).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    _atomic_bytes(path, buf.getvalue())


# ------------------------------------------------------- config/flag plumbing


class Settings:
    """Flag/config resolution: explicit flags beat config fields beat
    defaults.  Every resolved value is recorded for the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = {}
        if getattr(args, "config", None):
            with open(args.config) as fh:
                self.config = json.load(fh)
            if not isinstance(self.config, dict):
                raise ValueError("config must be a JSON object")
        self.effective = {}

    def get(self, key: str, default=None):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.config.get(key, default)
        self.effective[key] = value
        return value

    def require(self, key: str, hint: str):
        value = self.get(key)
        if value is None:
            raise ValueError(f"missing required setting {hint}")
        return value

    def out_dir(self) -> str:
        out = getattr(self.args, "out", None) or self.config.get("out") or os.environ.get(OUT_ENV)
        if not out:
            raise ValueError("no output directory: pass --out, set config 'out', or set " + OUT_ENV)
        os.makedirs(out, exist_ok=True)
        self.effective["out"] = out
        return out

    def int_list(self, key: str, default=None):
        value = self.get(key, default)
        if value is None:
            return None
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        return [int(v) for v in value]

    def float_list(self, key: str, default=None):
        value = self.get(key, default)
        if value is None:
            return None
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        return [float(v) for v in value]

    def str_list(self, key: str, default=None):
        value = self.get(key, default)
        if value is None:
            return None
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        return [str(v) for v in value]


def _manifest(out: str, command: str, settings: Settings, outputs) -> dict:
    doc = {
        "command": command,
        "version": __version__,
        "settings": settings.effective,
        "outputs": sorted(outputs),
    }
    _write_json(os.path.join(out, "manifest.json"), doc)
    return doc


def _build_mask(settings: Settings, n: int, seed: int) -> SamplingMask:
    scheme = settings.get("scheme", "accel")
    acs = int(settings.get("acs", 16))
    if scheme == "accel":
        rate = int(settings.get("rate", 2))
        return make_accelerated_mask(n, rate, acs)
    if scheme == "random":
        scan_time = settings.get("scan_time")
        if scan_time is None:
            raise ValueError("random scheme needs --scan-time")
        return make_random_mask(n, float(scan_time), acs, seed)
    raise ValueError("scheme must be 'accel' or 'random'")


def _phantom_spec(settings: Settings, n: int, m: int) -> PhantomSpec:
    doc = settings.get("phantom")
    if isinstance(doc, str):
        return PhantomSpec.from_json(doc)
    if isinstance(doc, dict):
        doc = dict(doc)
        doc.setdefault("n", n)
        doc.setdefault("m", m)
        if doc.get("phase_ramp") is not None:
            doc["phase_ramp"] = tuple(doc["phase_ramp"])
        if "disks" in doc:
            doc["disks"] = [tuple(d) for d in doc["disks"]]
        return PhantomSpec(**doc)
    kind = settings.get("phantom_kind", "shepp_logan")
    return PhantomSpec(kind=kind, n=n, m=m, path=settings.get("phantom_file"))


def _coil_model(settings: Settings) -> CoilModel:
    doc = settings.get("coil_model")
    if isinstance(doc, str):
        return CoilModel.from_json(doc)
    if isinstance(doc, dict):
        return CoilModel(**doc)
    return CoilModel(
        coils=int(settings.get("coils", 8)),
        uniform=bool(settings.get("uniform_coils", False)),
    )


# ------------------------------------------------------------------ commands


def cmd_simulate(args) -> int:
    settings = Settings(args)
    out = settings.out_dir()
    n = int(settings.get("n", 64))
    m = int(settings.get("m", 64))
    seed = int(settings.get("seed", 0))
    noise = float(settings.get("noise", 0.0))

    phantom = make_phantom(_phantom_spec(settings, n, m))
    sens = make_coil_maps(_coil_model(settings), Grid(n=n, m=m))
    if (sens.n, sens.m) != phantom.shape:
        raise ValueError("coil maps and phantom disagree on grid size")
    mask = _build_mask(settings, n, seed)
    kspace = simulate_kspace(phantom, sens, mask, noise_sigma=noise, seed=seed)

    outputs = []
    for name, stack in (
        ("phantom.cstack", CoilStack.from_images(phantom[None], kind="image")),
        ("maps.cstack", sens),
        ("kspace.cstack", kspace),
    ):
        stack.save(os.path.join(out, name))
        outputs.append(name)
    mask.save(os.path.join(out, "mask.json"))
    outputs.append("mask.json")
    doc = _manifest(out, "simulate", settings, outputs + ["manifest.json"])
    print(json.dumps(doc, sort_keys=True))
    return 0


def _load_truth(path):
    stack = CoilStack.load(path)
    if stack.coils != 1 or stack.maps != 1:
        raise ValueError("truth image must be a single-coil, single-map stack")
    return np.abs(stack.data[0, 0])


def _run_method(method, kspace, sens, mask, settings) -> ReconResult:
    alpha = float(settings.get("alpha", 1e-3))
    beta = float(settings.get("beta", 0.01))
    max_iter = int(settings.get("max_iter", 500))
    tol = float(settings.get("tol", 1e-8))
    if method == "ac":
        params = TvParams(alpha=alpha, beta=beta, chain=settings.get("tv_chain", "per_map"))
        opts = SolverOptions(max_iter=max_iter, grad_tol=tol)
        threads = int(settings.get("threads", 1))
        return reconstruct(kspace, sens, mask, params, opts, threads=threads)
    spec = BaselineSpec(method=method, alpha=alpha, beta=beta, max_iter=max_iter, tolerance=tol)
    return reconstruct_baseline(kspace, sens, mask, spec)


def _metric_row(result, truth, roi, mask, method, seed):
    peak = truth.max()
    eps = rel_error(truth / peak, result.magnitude / peak, roi)
    ssim = ssim_mean(truth / peak, result.magnitude / peak, roi)
    return [method, mask.scan_time, seed, eps, ssim, "ok"]


def cmd_reconstruct(args) -> int:
    settings = Settings(args)
    out = settings.out_dir()
    kspace = CoilStack.load(settings.require("data", "--data (kspace stack)"))
    sens = CoilStack.load(settings.require("sens", "--sens (sensitivity stack)"))
    mask = SamplingMask.load(settings.require("mask", "--mask (mask JSON)"))
    num_maps = settings.get("maps")
    if num_maps is not None:
        sens = sens.take_maps(int(num_maps))
    methods = settings.str_list("methods", "ac")
    unknown = [m for m in methods if m not in RECON_METHODS]
    if unknown:
        raise ValueError(f"unknown methods: {unknown}; choose from {RECON_METHODS}")
    seed = int(settings.get("seed", 0))

    truth = roi = None
    truth_path = settings.get("truth")
    if truth_path:
        truth = _load_truth(truth_path)
        roi = default_roi(truth)

    outputs = []
    metric_rows = []
    failures = []
    for method in methods:
        try:
            result = _run_method(method, kspace, sens, mask, settings)
        except Exception as exc:  # isolate methods from each other
            failures.append(method)
            print(f"error: method {method} failed: {exc}", file=sys.stderr)
            if truth is not None:
                metric_rows.append([method, mask.scan_time, seed, "", "", f"failed: {exc}"])
            continue
        stack = CoilStack.from_images(result.magnitude[None].astype(np.complex128), kind="image")
        stack.save(os.path.join(out, f"recon_{method}.cstack"))
        outputs.append(f"recon_{method}.cstack")
        if result.map_images is not None:
            CoilStack(data=result.map_images[None], kind="image").save(
                os.path.join(out, f"recon_{method}_maps.cstack")
            )
            outputs.append(f"recon_{method}_maps.cstack")
        peak = truth.max() if truth is not None else None
        write_png(os.path.join(out, f"recon_{method}.png"), result.magnitude, peak=peak)
        outputs.append(f"recon_{method}.png")
        _write_json(
            os.path.join(out, f"diagnostics_{method}.json"),
            {
                "method": method,
                "failed_columns": list(result.failed_columns),
                "diagnostics": [
                    {k: (v if not isinstance(v, float) or np.isfinite(v) else None) for k, v in d.items()}
                    for d in result.diagnostics
                ],
            },
        )
        outputs.append(f"diagnostics_{method}.json")
        if truth is not None:
            metric_rows.append(_metric_row(result, truth, roi, mask, method, seed))
    if truth is not None:
        _write_csv(
            os.path.join(out, "metrics.csv"),
            ["method", "scan_time", "seed", "epsilon", "ssim_mu", "status"],
            metric_rows,
        )
        outputs.append("metrics.csv")
    _manifest(out, "reconstruct", settings, outputs + ["manifest.json"])
    return 1 if failures else 0


def cmd_svd(args) -> int:
    settings = Settings(args)
    out = settings.out_dir()
    sens = CoilStack.load(settings.require("sens", "--sens (sensitivity stack)"))
    num_maps = int(settings.get("maps", 1))
    threshold = float(settings.get("threshold", DEFAULT_THRESHOLD))
    threads = int(settings.get("threads", 1))
    acs = int(settings.get("acs", 16))
    seed = int(settings.get("seed", 0))
    subsets = settings.int_list("subsets", [sens.coils]) or [sens.coils]
    scheme = settings.get("scheme", "accel")

    configs = []
    if scheme == "accel":
        rates = settings.int_list("rates")
        if rates is None:
            rates = [int(settings.get("rate", 2))]
        for k in subsets:
            for rate in rates:
                mask = make_accelerated_mask(sens.n, rate, acs)
                configs.append(
                    SweepConfig(
                        label=f"K{k}_R{rate}",
                        mask=mask,
                        coil_indices=tuple(range(k)),
                        num_maps=num_maps,
                    )
                )
    elif scheme == "random":
        times = settings.float_list("scan_times")
        if times is None:
            scan_time = settings.get("scan_time")
            if scan_time is None:
                raise ValueError("random scheme needs --scan-time or scan_times")
            times = [float(scan_time)]
        seeds = settings.int_list("seeds", [seed]) or [seed]
        for k in subsets:
            for st in times:
                for sd in seeds:
                    mask = make_random_mask(sens.n, st, acs, sd)
                    configs.append(
                        SweepConfig(
                            label=f"K{k}_T{st}_s{sd}",
                            mask=mask,
                            coil_indices=tuple(range(k)),
                            num_maps=num_maps,
                        )
                    )
    else:
        raise ValueError("scheme must be 'accel' or 'random'")

    rows, reports = stability_sweep(
        configs, sens, t=threshold, threads=threads, keep_reports=True
    )
    outputs = []
    for cfg, report in zip(configs, reports):
        _write_csv(
            os.path.join(out, f"sigma_{cfg.label}.csv"),
            ["index", "sigma"],
            [(i, sv) for i, sv in enumerate(report.sigma)],
        )
        outputs.append(f"sigma_{cfg.label}.csv")
        p = cfg.num_maps
        rsv_maps = report.rsv.reshape(p, sens.n, sens.m, order="C")
        CoilStack(data=rsv_maps[None], kind="image").save(
            os.path.join(out, f"rsv_{cfg.label}.cstack")
        )
        outputs.append(f"rsv_{cfg.label}.cstack")
        write_png(
            os.path.join(out, f"rsv_{cfg.label}.png"),
            np.abs(rsv_maps).reshape(p * sens.n, sens.m),
        )
        outputs.append(f"rsv_{cfg.label}.png")
    _write_csv(
        os.path.join(out, "summary.csv"),
        ["label", "kappa", "null_dim", "t", "scan_time"],
        [(r.label, r.kappa, r.null_dim, r.t, r.scan_time) for r in rows],
    )
    outputs.append("summary.csv")
    _manifest(out, "svd", settings, outputs + ["manifest.json"])
    return 0


def cmd_compare(args) -> int:
    settings = Settings(args)
    out = settings.out_dir()
    n = int(settings.get("n", 64))
    m = int(settings.get("m", 64))
    acs = int(settings.get("acs", 16))
    noise = float(settings.get("noise", 0.0))
    methods = settings.str_list("methods", "ac,zero_fill")
    unknown = [mname for mname in methods if mname not in RECON_METHODS]
    if unknown:
        raise ValueError(f"unknown methods: {unknown}; choose from {RECON_METHODS}")
    seeds = settings.int_list("seeds", [0]) or [0]
    scheme = settings.get("scheme", "random")
    threads = int(settings.get("threads", 1))

    phantom = make_phantom(_phantom_spec(settings, n, m))
    sens = make_coil_maps(_coil_model(settings), Grid(n=n, m=m))
    truth = np.abs(phantom)
    roi = default_roi(truth)

    if scheme == "random":
        times = settings.float_list("scan_times", "0.37,0.445,0.58")
        points = [("random", st, sd) for st in times for sd in seeds]
    elif scheme == "accel":
        rates = settings.int_list("rates", "2,3,4")
        points = [("accel", r, sd) for r in rates for sd in seeds]
    else:
        raise ValueError("scheme must be 'accel' or 'random'")

    def run_point(point):
        kind, knob, sd = point
        rows = []
        try:
            if kind == "random":
                mask = make_random_mask(n, knob, acs, sd)
            else:
                mask = make_accelerated_mask(n, knob, acs)
            kspace = simulate_kspace(phantom, sens, mask, noise_sigma=noise, seed=sd)
        except Exception as exc:
            return [[mname, knob, sd, "", "", f"failed: {exc}"] for mname in methods]
        for mname in methods:
            try:
                result = _run_method(mname, kspace, sens, mask, settings)
                rows.append(_metric_row(result, truth, roi, mask, mname, sd))
            except Exception as exc:
                rows.append([mname, mask.scan_time, sd, "", "", f"failed: {exc}"])
        return rows

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_point = list(pool.map(run_point, points))
    else:
        per_point = [run_point(pt) for pt in points]
    rows = [row for chunk in per_point for row in chunk]

    header = ["method", "scan_time", "seed", "epsilon", "ssim_mu", "status"]
    _write_csv(os.path.join(out, "metrics.csv"), header, rows)

    aggregates = []
    agg_series = {mname: ([], [], []) for mname in methods}
    seen_times = sorted({row[1] for row in rows if row[5] == "ok"})
    for mname in methods:
        for st in seen_times:
            eps = [row[3] for row in rows if row[0] == mname and row[1] == st and row[5] == "ok"]
            ssim = [row[4] for row in rows if row[0] == mname and row[1] == st and row[5] == "ok"]
            if not eps:
                continue
            aggregates.append([mname, st, float(np.mean(eps)), float(np.mean(ssim)), len(eps)])
            agg_series[mname][0].append(st)
            agg_series[mname][1].append(float(np.mean(eps)))
            agg_series[mname][2].append(float(np.mean(ssim)))
    _write_csv(
        os.path.join(out, "aggregate.csv"),
        ["method", "scan_time", "epsilon_mean", "ssim_mu_mean", "seeds"],
        aggregates,
    )

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for fname, series_idx, ylabel in (
        ("epsilon_vs_scan_time.png", 1, "relative error"),
        ("ssim_vs_scan_time.png", 2, "mean SSIM"),
    ):
        fig, ax = plt.subplots(figsize=(5, 4))
        for mname in methods:
            xs, *series = agg_series[mname]
            if xs:
                ax.plot(xs, series[series_idx - 1], marker="o", label=mname)
        ax.set_xlabel("scan time")
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        buf = io.BytesIO()
        fig.savefig(buf, format="png")
        plt.close(fig)
        _atomic_bytes(os.path.join(out, fname), buf.getvalue())

    outputs = ["metrics.csv", "aggregate.csv", "epsilon_vs_scan_time.png", "ssim_vs_scan_time.png"]
    _manifest(out, "compare", settings, outputs + ["manifest.json"])
    failed = any(row[5] != "ok" for row in rows)
    return 1 if failed else 0


def cmd_metrics(args) -> int:
    settings = Settings(args)
    truth = _load_truth(settings.require("truth", "--truth (image stack)"))
    est_paths = settings.str_list("est")
    if not est_paths:
        raise ValueError("missing required setting --est (image stack paths)")
    fraction = float(settings.get("roi_fraction", 0.05))
    roi = default_roi(truth, fraction=fraction)
    peak = truth.max()

    rows = []
    for path in est_paths:
        stack = CoilStack.load(path)
        est = np.abs(stack.data[0, 0])
        if est.shape != truth.shape:
            raise ValueError(f"{path}: shape does not match the truth image")
        label = os.path.splitext(os.path.basename(path))[0]
        eps = rel_error(truth / peak, est / peak, roi)
        ssim = ssim_mean(truth / peak, est / peak, roi)
        rows.append([label, "", "", eps, ssim, "ok"])
        print(f"{label}: epsilon={eps!r} ssim_mu={ssim!r}")
    if getattr(args, "out", None) or settings.config.get("out") or os.environ.get(OUT_ENV):
        out = settings.out_dir()
        _write_csv(
            os.path.join(out, "metrics.csv"),
            ["method", "scan_time", "seed", "epsilon", "ssim_mu", "status"],
            rows,
        )
        _manifest(out, "metrics", settings, ["metrics.csv", "manifest.json"])
    return 0


# ------------------------------------------------------------------- parsing


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its fields")
    common.add_argument("--out", help=f"output directory (or set ${OUT_ENV})")
    common.add_argument("--seed", type=int, help="base RNG seed")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--alpha", type=float, help="regularization weight")
    common.add_argument("--beta", type=float, help="TV smoothing constant")
    common.add_argument("--maps", type=int, help="sensitivity maps per coil to use")
    common.add_argument("--threshold", type=float, help="singular-value threshold t")
    common.add_argument("--scheme", choices=("accel", "random"), help="sampling scheme")
    common.add_argument("--rate", type=int, help="acceleration factor R")
    common.add_argument("--scan-time", dest="scan_time", type=float, help="acquired-line fraction")
    common.add_argument("--acs", type=int, help="auto-calibration line count")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acmri",
        description="Column-wise analytic-continuation MRI reconstruction toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_flags()
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate phantom, maps, mask, k-space")
    p.add_argument("--n", type=int, help="grid rows (undersampled axis)")
    p.add_argument("--m", type=int, help="grid columns")
    p.add_argument("--coils", type=int, help="number of simulated coils")
    p.add_argument("--noise", type=float, help="complex noise std per acquired sample")
    p.add_argument("--phantom-kind", dest="phantom_kind", choices=("shepp_logan", "disks", "file"))
    p.add_argument("--phantom-file", dest="phantom_file", help="image stack for --phantom-kind file")
    p.add_argument("--uniform-coils", dest="uniform_coils", action="store_const", const=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct from stored k-space")
    p.add_argument("--data", help="measured k-space stack")
    p.add_argument("--sens", help="sensitivity stack")
    p.add_argument("--mask", help="sampling mask JSON")
    p.add_argument("--truth", help="reference image stack for metrics")
    p.add_argument("--methods", help="comma list from: " + ",".join(RECON_METHODS))
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--tol", type=float, help="solver gradient/residual tolerance")
    p.add_argument("--tv-chain", dest="tv_chain", choices=("per_map", "joint"))
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("svd", parents=[common], help="stability analysis over masks and coil subsets")
    p.add_argument("--sens", help="sensitivity stack")
    p.add_argument("--subsets", help="comma list of coil-subset sizes")
    p.add_argument("--rates", help="comma list of acceleration factors")
    p.add_argument("--scan-times", dest="scan_times", help="comma list of scan times (random scheme)")
    p.add_argument("--seeds", help="comma list of RNG seeds (random scheme)")
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("compare", parents=[common], help="sweep scan times x seeds x methods")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--coils", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--methods", help="comma list from: " + ",".join(RECON_METHODS))
    p.add_argument("--scan-times", dest="scan_times", help="comma list of scan times")
    p.add_argument("--rates", help="comma list of rates (accel scheme)")
    p.add_argument("--seeds", help="comma list of seeds")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--tv-chain", dest="tv_chain", choices=("per_map", "joint"))
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("metrics", parents=[common], help="metrics of stored images against a truth")
    p.add_argument("--truth", help="reference image stack")
    p.add_argument("--est", help="comma list of image stacks to score")
    p.add_argument("--roi-fraction", dest="roi_fraction", type=float)
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
