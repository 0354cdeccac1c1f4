"""Benchmark harness: run planners over scene datasets and report.

Per scene each method runs ``reps`` times; the reported wall time is the
median and the counters come from the first repetition (they are
deterministic, so re-running a report reproduces every counter exactly;
only times vary).  Mean/std statistics aggregate per-scene medians over
solved scenes.  Improvement ratios (baseline time / reference time) are
computed only on scenes both methods solved and are binned into a [0, 50]
histogram with an overflow bucket.

The primary comparison metric is the exact-point-check count; wall time is
reported alongside because absolute milliseconds depend on the machine.
"""

from __future__ import annotations

import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor

from .baselines import baseline_plan_full, baseline_plan_lazy
from .config import PlannerConfig
from .jsonio import digest
from .roadmap import Roadmap
from .scenes import SceneDataset
from .search import plan

REPORT_FORMAT_VERSION = 1
HISTOGRAM_LIMIT = 50.0
HISTOGRAM_BIN_WIDTH = 2.0

_METHOD_FNS = {
    "hiro": plan,
    "lazy": baseline_plan_lazy,
    "full": baseline_plan_full,
}

_COUNTER_KEYS = (
    "iterations",
    "fuzzy_edge_checks",
    "exact_point_checks",
    "heuristic_updates",
    "corrections",
)

_worker_state: dict = {}


def _run_scene(args):
    """Run all methods on one scene (worker-safe)."""
    scene_dict, methods, reps = args
    from .scenes import PlanningScene

    scene = PlanningScene.from_dict(scene_dict)
    cfg: PlannerConfig = _worker_state["config"]
    roadmap: Roadmap = _worker_state["roadmap"]
    out = {"scene": scene.seed}
    for method in methods:
        fn = _METHOD_FNS[method]
        times = []
        first = None
        for _ in range(reps):
            t0 = time.perf_counter()
            res = fn(
                roadmap,
                cfg.model,
                cfg.static_obstacles,
                list(scene.obstacles),
                scene.start_q,
                scene.goal_q,
                cfg.plan_options,
            )
            times.append((time.perf_counter() - t0) * 1e3)
            if first is None:
                first = res
        entry = {
            "status": first.status,
            "cost": first.cost,
            "wall_ms": float(statistics.median(times)),
        }
        for key in _COUNTER_KEYS:
            entry[key] = first.stats.get(key, 0)
        out[method] = entry
    return out


def _init_worker(config: PlannerConfig, roadmap: Roadmap) -> None:
    _worker_state["config"] = config
    _worker_state["roadmap"] = roadmap


def improvement_histogram(ratios: list[float]) -> dict:
    """Fig.-style histogram: bins over [0, 50], ratios beyond 50 overflow."""
    n_bins = int(HISTOGRAM_LIMIT / HISTOGRAM_BIN_WIDTH)
    counts = [0] * n_bins
    overflow = 0
    for r in ratios:
        if r >= HISTOGRAM_LIMIT:
            overflow += 1
        else:
            counts[int(r / HISTOGRAM_BIN_WIDTH)] += 1
    return {
        "bin_width": HISTOGRAM_BIN_WIDTH,
        "bin_edges": [i * HISTOGRAM_BIN_WIDTH for i in range(n_bins + 1)],
        "counts": counts,
        "overflow": overflow,
    }


def _summary(per_scene: list[dict], method: str) -> dict:
    solved = [s[method] for s in per_scene if s[method]["status"] == "solved"]
    out = {
        "scenes": len(per_scene),
        "solved": len(solved),
    }
    if solved:
        times = [e["wall_ms"] for e in solved]
        out["wall_ms_mean"] = float(statistics.fmean(times))
        out["wall_ms_std"] = float(statistics.pstdev(times))
        for key in _COUNTER_KEYS:
            out[f"{key}_mean"] = float(statistics.fmean(e[key] for e in solved))
        out["cost_mean"] = float(statistics.fmean(e["cost"] for e in solved))
    return out


def _improvement(per_scene: list[dict], baseline: str, reference: str) -> dict:
    both = [
        s
        for s in per_scene
        if s[baseline]["status"] == "solved" and s[reference]["status"] == "solved"
    ]
    time_ratios = [
        s[baseline]["wall_ms"] / s[reference]["wall_ms"]
        for s in both
        if s[reference]["wall_ms"] > 0
    ]
    check_wins = [
        s
        for s in both
        if s[reference]["exact_point_checks"] < s[baseline]["exact_point_checks"]
    ]
    out = {
        "scenes_both_solved": len(both),
        "time_ratio_mean": float(statistics.fmean(time_ratios)) if time_ratios else None,
        "histogram": improvement_histogram(time_ratios),
        "exact_check_win_fraction": (len(check_wins) / len(both)) if both else None,
    }
    if both:
        ref_mean = statistics.fmean(s[reference]["exact_point_checks"] for s in both)
        base_mean = statistics.fmean(s[baseline]["exact_point_checks"] for s in both)
        out["exact_check_mean_reference"] = float(ref_mean)
        out["exact_check_mean_baseline"] = float(base_mean)
        out["exact_check_mean_ratio"] = (
            float(base_mean / ref_mean) if ref_mean > 0 else None
        )
    return out


def run_benchmark(
    config: PlannerConfig,
    roadmap: Roadmap,
    datasets: list[SceneDataset],
    methods: tuple[str, ...] | None = None,
    reps: int | None = None,
    jobs: int = 1,
) -> dict:
    methods = tuple(methods or config.bench_methods)
    for m in methods:
        if m not in _METHOD_FNS:
            raise ValueError(f"unknown method {m!r}")
    reps = reps or config.bench_reps
    report = {
        "version": REPORT_FORMAT_VERSION,
        "config_digest": config.content_digest(),
        "roadmap_digest": roadmap.content_digest(),
        "methods": list(methods),
        "reps": reps,
        "datasets": [],
    }
    for dataset in datasets:
        tasks = [(s.to_dict(), methods, reps) for s in dataset.scenes]
        if jobs > 1:
            with ProcessPoolExecutor(
                max_workers=jobs, initializer=_init_worker, initargs=(config, roadmap)
            ) as pool:
                per_scene = list(pool.map(_run_scene, tasks))
        else:
            _init_worker(config, roadmap)
            per_scene = [_run_scene(t) for t in tasks]
        per_scene.sort(key=lambda s: s["scene"])
        block = {
            "obstacle_count": dataset.obstacle_count,
            "dataset_digest": digest(dataset.to_dict()),
            "scenes": per_scene,
            "summary": {m: _summary(per_scene, m) for m in methods},
        }
        if "hiro" in methods:
            block["improvement_vs_hiro"] = {
                m: _improvement(per_scene, m, "hiro") for m in methods if m != "hiro"
            }
        report["datasets"].append(block)
    return report


def summarize(report: dict) -> str:
    """Text table: one row per method, (mean, std) columns per dataset."""
    methods = report["methods"]
    blocks = report["datasets"]
    header = ["method"] + [
        f"{b['obstacle_count']} obstacles (mean/std ms)" for b in blocks
    ]
    rows = []
    for m in methods:
        row = [m]
        for b in blocks:
            s = b["summary"][m]
            if s.get("wall_ms_mean") is None:
                row.append("-")
            else:
                row.append(
                    f"{s['wall_ms_mean']:.3f} / {s['wall_ms_std']:.3f}"
                    f"  ({s['solved']}/{s['scenes']})"
                )
        rows.append(row)
    widths = [
        max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))
    ]
    lines = []
    for r in [header] + rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines)


def histogram_svg(histogram: dict, title: str = "") -> str:
    """Minimal SVG bar chart of an improvement histogram."""
    import xml.etree.ElementTree as ET

    counts = list(histogram["counts"]) + [histogram["overflow"]]
    labels = [
        f"{int(e)}" for e in histogram["bin_edges"][:-1]
    ] + [f">{int(HISTOGRAM_LIMIT)}"]
    width, height, pad = 640, 320, 36
    root = ET.Element(
        "svg", xmlns="http://www.w3.org/2000/svg",
        width=str(width), height=str(height),
    )
    ET.SubElement(root, "rect", x="0", y="0", width=str(width), height=str(height),
                  fill="white")
    if title:
        t = ET.SubElement(root, "text", x=str(width // 2), y="18",
                          **{"text-anchor": "middle", "font-size": "13"})
        t.text = title
    peak = max(max(counts), 1)
    bar_w = (width - 2 * pad) / len(counts)
    for i, c in enumerate(counts):
        h = (height - 2 * pad) * c / peak
        x = pad + i * bar_w
        ET.SubElement(
            root, "rect", x=f"{x:.1f}", y=f"{height - pad - h:.1f}",
            width=f"{bar_w * 0.85:.1f}", height=f"{h:.1f}", fill="#3070d0",
        )
        if i % 5 == 0 or i == len(counts) - 1:
            t = ET.SubElement(root, "text", x=f"{x + bar_w * 0.4:.1f}",
                              y=str(height - pad + 14),
                              **{"text-anchor": "middle", "font-size": "9"})
            t.text = labels[i]
    return ET.tostring(root, encoding="unicode")
