"""Dataset ingestion, end-to-end pipeline, experiment sweeps and result files."""
from __future__ import annotations

import configparser
import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .core import Dataset, HyperclustError, HyperParams, InvalidParameterError
from .evaluation import CorruptionSpec, accuracy, corrupt, nmi
from .fusion import FusionWeights, ablation_config, fuse
from .knn import knn_similarity
from .overclustering import METHODS, build_communities, classic_spectral, overclustering_similarity
from .pairwise import default_sigma, pairwise_similarity, sigma_grid
from .partitioning import cluster

log = logging.getLogger(__name__)


class ParseError(HyperclustError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


# ---------------------------------------------------------------------------
# data


def load_csv(path) -> Dataset:
    """Read a comma-separated feature file.

    A header row is detected by a non-numeric first cell.  When the header's
    last column is ``label`` that column holds class names (any strings),
    mapped to indices in order of first appearance.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")

    header = None
    first = rows[0][1]
    try:
        float(first[0])
    except ValueError:
        header = [c.strip() for c in first]
        rows = rows[1:]
    if not rows:
        raise ParseError(f"{path}: no data rows")

    labelled = header is not None and header[-1].lower() == "label"
    width = len(header) if header is not None else len(rows[0][1])
    feats, raw_labels = [], []
    for line, row in rows:
        if len(row) != width:
            raise ParseError(f"expected {width} fields, got {len(row)}", line)
        cells = row[:-1] if labelled else row
        try:
            feats.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"non-numeric feature ({exc})", line) from None
        if labelled:
            raw_labels.append(row[-1].strip())

    labels = names = None
    if labelled:
        names = list(dict.fromkeys(raw_labels))
        index = {n: i for i, n in enumerate(names)}
        labels = np.array([index[n] for n in raw_labels], dtype=np.int64)
    X = np.array(feats, dtype=float)
    if not np.all(np.isfinite(X)):
        bad = int(np.argwhere(~np.isfinite(X))[0, 0])
        raise ParseError("non-finite feature value", rows[bad][0])
    return Dataset(X, labels, label_names=names)


def write_csv(dataset: Dataset, path) -> None:
    d = dataset.n_features
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [f"f{j}" for j in range(d)]
        if dataset.labels is not None:
            header.append("label")
        w.writerow(header)
        for i, row in enumerate(dataset.features):
            out = [_fmt(v) for v in row]
            if dataset.labels is not None:
                names = dataset.label_names
                lab = int(dataset.labels[i])
                out.append(names[lab] if names else str(lab))
            w.writerow(out)


def synth_blobs(kappa: int, per_cluster: int, dim: int = 2, separation: float = 6.0, seed: int = 0) -> Dataset:
    """Isotropic unit-variance Gaussian blobs with centers ``separation`` apart."""
    if kappa < 1 or per_cluster < 1 or dim < 1 or separation < 0:
        raise InvalidParameterError("blob parameters must be positive")
    if kappa * per_cluster < 2:
        raise InvalidParameterError("need at least two samples")
    rng = np.random.default_rng(seed)
    # vertices of a regular simplex with edge length ``separation``
    simplex = np.eye(kappa) * separation / math.sqrt(2.0)
    simplex -= simplex.mean(axis=0)
    _, _, Vt = np.linalg.svd(simplex)
    coords = simplex @ Vt[: kappa - 1].T
    if dim >= kappa - 1:
        centers = np.zeros((kappa, dim))
        centers[:, : kappa - 1] = coords
    else:
        basis, _ = np.linalg.qr(rng.standard_normal((kappa - 1, dim)))
        centers = coords @ basis
        gap = min(np.linalg.norm(centers[i] - centers[j]) for i in range(kappa) for j in range(i))
        centers *= separation / max(gap, 1e-12)
    X = np.concatenate([centers[c] + rng.standard_normal((per_cluster, dim)) for c in range(kappa)])
    y = np.repeat(np.arange(kappa), per_cluster)
    return Dataset(X, y)


# ---------------------------------------------------------------------------
# pipeline


def similarity_matrices(dataset: Dataset, params: HyperParams, *, need_knn=True, need_over=True):
    """Pairwise, kNN and over-clustering similarities for one dataset."""
    params.check_against(dataset.n_samples)
    sigma = params.sigma if params.sigma is not None else default_sigma(dataset)
    A = pairwise_similarity(dataset, sigma)
    B = knn_similarity(A, params.k) if need_knn else None
    C = None
    if need_over:
        comms = build_communities(A, params.n_communities, params.seed, METHODS)
        C = overclustering_similarity(A, comms, params.neighbor_set_size)
    return A, B, C


def hypergraph_similarity(dataset: Dataset, params: HyperParams, weights: Optional[FusionWeights] = None):
    if weights is None:
        weights = FusionWeights(params.alpha, params.beta)
    A, B, C = similarity_matrices(
        dataset, params, need_knn=weights.beta > 0, need_over=weights.gamma > 0
    )
    return fuse(A, A if B is None else B, A if C is None else C, weights)


@dataclass
class RunOutcome:
    labels: np.ndarray
    objective: float
    iterations: int
    converged: bool


def run_method(dataset: Dataset, params: HyperParams, method: str = "PKO", criterion: str = "dhpc") -> RunOutcome:
    """One clustering run; ``method`` is an ablation name or ``CSC``."""
    if method.upper() == "CSC":
        sigma = params.sigma if params.sigma is not None else default_sigma(dataset)
        A = pairwise_similarity(dataset, sigma)
        part = classic_spectral(A, params.kappa, params.seed)
        return RunOutcome(part.labels, float("nan"), 0, True)
    w = ablation_config(method, params.alpha, params.beta)
    S = hypergraph_similarity(dataset, params, w)
    res = cluster(S, params.kappa, criterion=criterion, epsilon=params.epsilon, seed=params.seed)
    return RunOutcome(res.labels, res.objective, res.iterations, res.converged)


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentConfig:
    data: Optional[str] = None  # CSV path; None means synthetic blobs
    blobs: int = 3
    per_cluster: int = 50
    dim: int = 2
    separation: float = 6.0
    data_seed: int = 0
    kappa: Optional[int] = None  # None: number of ground-truth classes
    sigma: Optional[float] = None
    sigma_grid: bool = False
    k: int = 3
    alpha: float = 0.4
    beta: float = 0.4
    method: str = "PKO"
    criterion: str = "dhpc"
    communities_per_method: Optional[int] = None
    neighbor_set_size: int = 3
    epsilon: float = 1e-6
    corruption: str = "noise"
    levels: tuple = (0.0,)
    noise_scale: str = "std"
    zeroing: str = "element"
    seeds: tuple = tuple(range(10))
    workers: int = 1

    def __post_init__(self):
        self.levels = tuple(float(v) for v in self.levels)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise InvalidParameterError("at least one seed is required")
        if self.data is not None and not Path(self.data).is_file():
            raise InvalidParameterError(f"data file {self.data} does not exist")
        if self.criterion not in ("dhpc", "nc"):
            raise InvalidParameterError(f"unknown criterion {self.criterion!r}")
        if self.method.upper() != "CSC":
            ablation_config(self.method, self.alpha, self.beta)

    def fingerprint(self) -> str:
        d = asdict(self)
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def dataset(self) -> Dataset:
        if self.data is not None:
            return load_csv(self.data)
        return synth_blobs(self.blobs, self.per_cluster, self.dim, self.separation, self.data_seed)

    def params(self, dataset: Dataset, seed: int, sigma: Optional[float] = None) -> HyperParams:
        kappa = self.kappa or dataset.n_classes
        if kappa is None:
            raise InvalidParameterError("kappa is required for unlabelled data")
        return HyperParams(
            kappa=kappa,
            sigma=self.sigma if sigma is None else sigma,
            k=self.k,
            alpha=self.alpha,
            beta=self.beta,
            communities_per_method=self.communities_per_method,
            neighbor_set_size=self.neighbor_set_size,
            epsilon=self.epsilon,
            seed=seed,
        )


_CONFIG_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    kind = _CONFIG_TYPES[key]
    if raw.lower() in ("", "none", "null"):
        return None
    if key in ("levels", "seeds"):
        items = [s for s in raw.replace(",", " ").split() if s]
        if key == "seeds" and len(items) == 1 and ".." in items[0]:
            lo, hi = items[0].split("..")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(float(s) if key == "levels" else int(s) for s in items)
    if "bool" in kind:
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def load_config(path) -> ExperimentConfig:
    """Flat ``key = value`` file; ``#`` starts a comment.  Relative data paths resolve against the file."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + path.read_text(encoding="utf-8"))
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from None
    values = {}
    for key, raw in parser["experiment"].items():
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ParseError(f"{path}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ParseError(f"{path}: bad value for {key}: {exc}") from None
    if values.get("data"):
        data = Path(values["data"])
        if not data.is_absolute():
            values["data"] = str((path.parent / data).resolve())
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ParseError(f"{path}: {exc}") from None


@dataclass
class ResultRecord:
    fingerprint: str
    method: str
    criterion: str
    corruption: str
    level: float
    seed: int
    sigma: float
    nmi: float
    accuracy: float
    objective: float
    iterations: int
    converged: bool
    error: str = ""
    seconds: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return not self.error


RESULT_COLUMNS = [f.name for f in fields(ResultRecord) if f.name != "seconds"]


def select_sigma(config: ExperimentConfig, dataset: Dataset) -> float:
    """Grid value with the best mean NMI over the configured seeds on clean data."""
    if dataset.labels is None:
        raise InvalidParameterError("sigma grid search needs ground-truth labels")
    best, best_score = None, -np.inf
    for sigma in sigma_grid(dataset):
        scores = []
        for seed in config.seeds:
            try:
                out = run_method(dataset, config.params(dataset, seed, float(sigma)), config.method, config.criterion)
                scores.append(nmi(out.labels, dataset.labels))
            except HyperclustError:
                scores.append(0.0)
        if np.mean(scores) > best_score:
            best, best_score = float(sigma), float(np.mean(scores))
    return best


def _run_cell(config, dataset, fingerprint, sigma, level, seed) -> ResultRecord:
    t0 = time.perf_counter()
    base = dict(
        fingerprint=fingerprint,
        method=config.method.upper(),
        criterion=config.criterion,
        corruption=config.corruption,
        level=level,
        seed=seed,
        sigma=float("nan") if sigma is None else sigma,
    )
    try:
        spec = CorruptionSpec(config.corruption, level, seed, config.noise_scale, config.zeroing)
        data = corrupt(dataset, spec)
        params = config.params(data, seed, sigma)
        if params.sigma is None:
            params = replace(params, sigma=default_sigma(data))
        base["sigma"] = params.sigma
        out = run_method(data, params, config.method, config.criterion)
        if data.labels is not None:
            score_nmi, score_acc = nmi(out.labels, data.labels), accuracy(out.labels, data.labels)
        else:
            score_nmi = score_acc = float("nan")
        rec = ResultRecord(
            **base,
            nmi=score_nmi,
            accuracy=score_acc,
            objective=out.objective,
            iterations=out.iterations,
            converged=out.converged,
        )
    except HyperclustError as exc:
        log.warning("run failed (level=%s, seed=%s): %s", level, seed, exc)
        rec = ResultRecord(
            **base, nmi=float("nan"), accuracy=float("nan"), objective=float("nan"),
            iterations=0, converged=False, error=f"{type(exc).__name__}: {exc}",
        )
    rec.seconds = time.perf_counter() - t0
    return rec


def iter_pipeline(config: ExperimentConfig) -> Iterator[ResultRecord]:
    """Yield one record per (corruption level, seed) cell in sweep order."""
    dataset = config.dataset()
    fp = config.fingerprint()
    sigma = config.sigma
    if sigma is None and config.sigma_grid:
        sigma = select_sigma(config, dataset)
        log.info("sigma grid search picked %.6g", sigma)
    cells = [(level, seed) for level in config.levels for seed in config.seeds]
    if config.workers <= 1:
        for level, seed in cells:
            yield _run_cell(config, dataset, fp, sigma, level, seed)
        return
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(_run_cell, config, dataset, fp, sigma, lv, sd) for lv, sd in cells]
        for fut in futures:
            yield fut.result()


def run_pipeline(config: ExperimentConfig) -> list:
    return list(iter_pipeline(config))


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def summarize(records: Sequence[ResultRecord]) -> list:
    """Mean and population std of the metrics per (fingerprint, method, criterion, corruption, level)."""
    groups: dict = {}
    for r in records:
        key = (r.fingerprint, r.method, r.criterion, r.corruption, r.level)
        groups.setdefault(key, []).append(r)
    out = []
    for key, recs in groups.items():
        good = [r for r in recs if r.ok]
        nm = np.array([r.nmi for r in good], dtype=float)
        ac = np.array([r.accuracy for r in good], dtype=float)
        stat = lambda a, f: float(f(a)) if a.size else float("nan")  # noqa: E731
        out.append(
            (*key, len(recs), len(recs) - len(good),
             stat(nm, np.mean), stat(nm, np.std), stat(ac, np.mean), stat(ac, np.std))
        )
    return out


SUMMARY_COLUMNS = [
    "fingerprint", "method", "criterion", "corruption", "level",
    "runs", "failures", "nmi_mean", "nmi_std", "accuracy_mean", "accuracy_std",
]


def emit_results(records: Sequence[ResultRecord], out_dir) -> dict:
    """Write results.csv, timings.csv, summary.csv and one series file per level."""
    if not records:
        raise InvalidParameterError("no records to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"results": out / "results.csv", "timings": out / "timings.csv", "summary": out / "summary.csv"}
    _write_rows(paths["results"], RESULT_COLUMNS, ([getattr(r, c) for c in RESULT_COLUMNS] for r in records))
    _write_rows(paths["timings"], ["fingerprint", "level", "seed", "seconds"],
                ((r.fingerprint, r.level, r.seed, r.seconds) for r in records))
    summary = summarize(records)
    _write_rows(paths["summary"], SUMMARY_COLUMNS, summary)
    series_dir = out / "series"
    series_dir.mkdir(exist_ok=True)
    for level in sorted({r.level for r in records}):
        tag = repr(float(level))  # shortest round-trip form
        p = series_dir / f"level_{tag}.csv"
        _write_rows(p, ["seed", "method", "nmi", "accuracy"],
                    ((r.seed, r.method, r.nmi, r.accuracy) for r in records if r.level == level))
        paths[f"series_{tag}"] = p
    return paths


def _coerce(name: str, raw: str):
    kind = ResultRecord.__dataclass_fields__[name].type
    if "bool" in kind:
        return raw == "true"
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def load_results(out_dir) -> list:
    """Read results.csv (and timings.csv when present) back into records."""
    out = Path(out_dir)
    with (out / "results.csv").open(newline="", encoding="utf-8") as fh:
        records = [ResultRecord(**{k: _coerce(k, v) for k, v in row.items()}) for row in csv.DictReader(fh)]
    tpath = out / "timings.csv"
    if tpath.exists():
        with tpath.open(newline="", encoding="utf-8") as fh:
            for rec, row in zip(records, csv.DictReader(fh)):
                rec.seconds = float(row["seconds"])
    return records
