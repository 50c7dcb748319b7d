"""Experiment configuration: parsing with line tracking, validation, schedule building.

A config is a JSON document (any YAML 1.1 mapping is also accepted; JSON is
a subset).  Validation collects every problem it can find instead of stopping
at the first one, and each diagnostic carries the line of the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, RankOneError
from .recipes import (
    NabParams,
    NsParams,
    OrnsteinParams,
    _rational,
    build_nab_schedule,
    build_ns_schedule,
    build_ornstein_schedule,
    build_staircase_schedule,
)
from .tower import LevelSet, SpacerSchedule, append_stage, empty_schedule

RECIPES = ("explicit", "ornstein", "staircase", "lemma1", "nab")
ANALYSES = ("correlate", "fit", "mixing", "tensor", "probe")
PAIR_FAMILIES = ("single_levels", "partition", "explicit")
TOP_KEYS = {"recipe", "depth", "truncate_at", "seed", "analyses", "output"}

RECIPE_KEYS = {
    "explicit": {"type", "h1", "stages", "markers"},
    "ornstein": {"type", "h1", "H_j", "r_j", "H_from_height"},
    "staircase": {"type", "h1", "r_j"},
    "lemma1": {"type", "h1", "N", "s", "L_j", "H_j", "epsilon", "H_from_height"},
    "nab": {"type", "h1", "n", "a", "b", "r_j", "H_j", "lead", "staircase_cuts", "relative"},
}
ANALYSIS_KEYS = {
    "correlate": {"type", "stages", "multiples", "ms", "pairs"},
    "fit": {"type", "stages", "multiples", "ms", "pairs", "K_max"},
    "mixing": {"type", "stages", "multiples", "ms", "pairs"},
    "tensor": {"type", "stages", "multiples", "ms", "exponents", "pairs", "set"},
    "probe": {"type", "exponents", "set", "M", "step"},
}


@dataclass(frozen=True)
class Diagnostic:
    path: str
    line: int | None
    message: str
    source: str = "<config>"

    def __str__(self) -> str:
        where = f"{self.source}:{self.line}" if self.line is not None else self.source
        return f"{where}: {self.path}: {self.message}" if self.path else f"{where}: {self.message}"


# ---------------------------------------------------------------------------
# parsing


class _Lines:
    """Line numbers (1-based) for every key path of a composed document."""

    def __init__(self, node):
        self.lines: dict[tuple, int] = {}
        if node is not None:
            self._walk(node, ())

    def _walk(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = k.value
                self.lines[path + (key,)] = k.start_mark.line + 1
                self._walk(v, path + (key,))
                self.lines[path + (key,)] = k.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                self._walk(v, path + (i,))

    def __call__(self, path: tuple) -> int | None:
        path = tuple(path)
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path)


@dataclass
class LoadedConfig:
    data: dict
    lines: _Lines
    source: str

    def diag(self, path: tuple, message: str) -> Diagnostic:
        return Diagnostic(_dotted(path), self.lines(path), message, self.source)


def _dotted(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def parse_config(text: str, source: str = "<config>") -> LoadedConfig:
    """Parse ``text``; raises :class:`ConfigError` with a located diagnostic on syntax errors."""
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        data = loader.construct_document(node) if node is not None else None
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line = mark.line + 1 if mark is not None else None
        d = Diagnostic("", line, f"parse error: {e.problem or e}", source)
        raise ConfigError(str(d), [d]) from None
    finally:
        loader.dispose()
    if not isinstance(data, dict):
        d = Diagnostic("", 1, "config must be a mapping of fields", source)
        raise ConfigError(str(d), [d])
    return LoadedConfig(data, _Lines(node), source)


def load_config(path: str | Path) -> LoadedConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        d = Diagnostic("", None, f"cannot read config: {e.strerror}", str(p))
        raise ConfigError(str(d), [d]) from None
    return parse_config(text, str(p))


# ---------------------------------------------------------------------------
# field checks


class _Checker:
    def __init__(self, cfg: LoadedConfig):
        self.cfg = cfg
        self.out: list[Diagnostic] = []

    def err(self, path, message):
        self.out.append(self.cfg.diag(tuple(path), message))

    def int_(self, obj: dict, key: str, path, lo: int | None = None, hi: int | None = None, required=True, default=None):
        if key not in obj:
            if required:
                self.err(path, f"missing required field '{key}'")
            return default
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.err(path + (key,), f"must be an integer, got {v!r}")
            return default
        if lo is not None and v < lo:
            self.err(path + (key,), f"must be >= {lo}, got {v}")
            return default
        if hi is not None and v > hi:
            self.err(path + (key,), f"must be <= {hi}, got {v}")
            return default
        return v

    def int_list(self, obj, key, path, lo=None, required=True):
        if key not in obj:
            if required:
                self.err(path, f"missing required field '{key}'")
            return None
        v = obj[key]
        if not isinstance(v, list) or not v:
            self.err(path + (key,), "must be a non-empty list of integers")
            return None
        ok = []
        for i, x in enumerate(v):
            if isinstance(x, bool) or not isinstance(x, int) or (lo is not None and x < lo):
                self.err(path + (key, i), f"must be an integer{f' >= {lo}' if lo is not None else ''}, got {x!r}")
                return None
            ok.append(x)
        return ok

    def rational(self, obj, key, path, required=True, default=None):
        if key not in obj:
            if required:
                self.err(path, f"missing required field '{key}'")
            return default
        v = obj[key]
        try:
            if isinstance(v, bool):
                raise ValueError
            return _rational(v, key)
        except (RankOneError, ValueError, ZeroDivisionError):
            self.err(path + (key,), f"must be a rational number (e.g. 0.3 or \"3/10\"), got {v!r}")
            return default

    def bool_(self, obj, key, path, default):
        v = obj.get(key, default)
        if not isinstance(v, bool):
            self.err(path + (key,), f"must be true or false, got {v!r}")
            return default
        return v

    def unknown(self, obj: dict, allowed: set, path):
        for k in obj:
            if k not in allowed:
                self.err(path + (k,), f"unknown field (allowed: {', '.join(sorted(allowed))})")


# ---------------------------------------------------------------------------
# recipes


def _recipe(ch: _Checker, rec: Any, depth: int | None, seed: int) -> SpacerSchedule | None:
    path = ("recipe",)
    if not isinstance(rec, dict):
        ch.err(path, "must be a mapping with a 'type' field")
        return None
    kind = rec.get("type")
    if kind not in RECIPES:
        ch.err(path + ("type",), f"must be one of {', '.join(RECIPES)}, got {kind!r}")
        return None
    ch.unknown(rec, RECIPE_KEYS[kind], path)
    n_before = len(ch.out)
    h1 = ch.int_(rec, "h1", path, lo=1 if kind == "nab" else 0, required=False, default=1 if kind == "nab" else 0)

    try:
        if kind == "explicit":
            return _explicit(ch, rec, path, h1, depth)
        if kind == "ornstein":
            H = ch.int_(rec, "H_j", path, lo=1)
            r = ch.int_(rec, "r_j", path, lo=2)
            grow = ch.bool_(rec, "H_from_height", path, False)
            if len(ch.out) > n_before or depth is None:
                return None
            OrnsteinParams(H, r, seed)
            return build_ornstein_schedule(H, r, depth, seed=seed, h1=h1, H_from_height=grow)
        if kind == "staircase":
            r = rec.get("r_j")
            if isinstance(r, list):
                rs = ch.int_list(rec, "r_j", path, lo=2)
                if rs is not None and depth is not None and len(rs) != depth:
                    ch.err(path + ("r_j",), f"has {len(rs)} entries but depth is {depth}")
            else:
                rs = ch.int_(rec, "r_j", path, lo=2)
            if len(ch.out) > n_before or depth is None:
                return None
            return build_staircase_schedule(rs, depth, h1=h1)
        if kind == "lemma1":
            N = ch.int_(rec, "N", path, lo=2)
            s = ch.int_(rec, "s", path, lo=1)
            L = ch.int_(rec, "L_j", path, lo=1)
            H = ch.int_(rec, "H_j", path, lo=1, required=False, default=1)
            eps = ch.rational(rec, "epsilon", path, required=False, default=Fraction(1, 2))
            grow = ch.bool_(rec, "H_from_height", path, True)
            if N is not None and s is not None and not 1 <= s <= N:
                ch.err(path + ("s",), f"(N, s) recipe requires 1 <= s <= N, got s={s}, N={N}")
            if eps is not None and not 0 < eps < 1:
                ch.err(path + ("epsilon",), f"(N, s) recipe requires 0 < epsilon < 1, got {eps}")
            if len(ch.out) > n_before or depth is None:
                return None
            p = NsParams(N, s, L, H, eps, seed)
            return build_ns_schedule(p, depth, h1=h1, H_from_height=grow)
        if kind == "nab":
            n = ch.int_(rec, "n", path, lo=2)
            a = ch.rational(rec, "a", path)
            b = ch.rational(rec, "b", path)
            r = ch.int_(rec, "r_j", path, lo=2)
            lead = ch.int_(rec, "lead", path, lo=1, required=False, default=1)
            relative = ch.bool_(rec, "relative", path, False)
            cuts = rec.get("staircase_cuts")
            if isinstance(cuts, list):
                cuts = ch.int_list(rec, "staircase_cuts", path, lo=2)
            elif cuts is not None:
                cuts = ch.int_(rec, "staircase_cuts", path, lo=2)
            if "H_j" in rec:
                ch.err(path + ("H_j",), "is derived from the tower heights for this recipe and cannot be set")
            if a is not None and b is not None:
                if a <= 0 or b <= 0:
                    ch.err(path + ("a" if a <= 0 else "b",), "a and b must be positive")
                elif a + b >= 1:
                    ch.err(path + ("b",), f"a + b must be < 1, got {a + b}")
            if len(ch.out) > n_before or depth is None:
                return None
            p = NabParams(n, a, b, r)
            if depth < lead + 1:
                ch.err(("depth",), f"nab recipe with lead={lead} needs depth >= {lead + 1}")
                return None
            p.boundaries()
            return build_nab_schedule(p, depth, h1=h1, staircase_cuts=cuts, lead=lead, relative=relative)
    except RankOneError as e:
        ch.err(path, str(e))
        return None
    return None


def _explicit(ch: _Checker, rec: dict, path, h1, depth) -> SpacerSchedule | None:
    stages = rec.get("stages")
    if not isinstance(stages, list) or not stages:
        ch.err(path + ("stages",), "must be a non-empty list of {cuts, spacers} entries")
        return None
    if depth is not None and depth > len(stages):
        ch.err(("depth",), f"explicit recipe lists {len(stages)} stages, fewer than depth {depth}")
        return None
    n_before = len(ch.out)
    parsed = []
    for i, st in enumerate(stages[: depth or len(stages)]):
        sp = path + ("stages", i)
        if not isinstance(st, dict):
            ch.err(sp, "must be a mapping with 'cuts' and 'spacers'")
            continue
        ch.unknown(st, {"cuts", "spacers"}, sp)
        cuts = ch.int_(st, "cuts", sp, lo=1)
        spacers = ch.int_list(st, "spacers", sp, lo=0)
        if cuts is not None and spacers is not None and len(spacers) != cuts:
            ch.err(sp + ("spacers",), f"has {len(spacers)} entries for cuts = {cuts}")
        parsed.append((cuts, spacers))
    markers = rec.get("markers", {})
    if not isinstance(markers, dict):
        ch.err(path + ("markers",), "must map stage numbers to marker times")
        markers = {}
    if len(ch.out) > n_before or h1 is None:
        return None
    sched = empty_schedule(h1)
    for i, (cuts, spacers) in enumerate(parsed, start=1):
        m = markers.get(str(i), markers.get(i))
        if m is not None and (isinstance(m, bool) or not isinstance(m, int) or m < 1):
            ch.err(path + ("markers", str(i)), f"marker must be a positive integer, got {m!r}")
            m = None
        sched = append_stage(sched, cuts, spacers, marker=m)
    for k in markers:
        if not str(k).isdigit() or not 1 <= int(k) <= len(parsed):
            ch.err(path + ("markers", k), f"no stage {k} in 1..{len(parsed)}")
    return sched


# ---------------------------------------------------------------------------
# analyses


def _set(ch: _Checker, spec, path, sched: SpacerSchedule | None, J: int | None) -> LevelSet | None:
    if not isinstance(spec, dict):
        ch.err(path, "a level set is a mapping with 'stage' and one of 'levels', 'interval', 'full'")
        return None
    ch.unknown(spec, {"stage", "levels", "interval", "full"}, path)
    f = ch.int_(spec, "stage", path, lo=1)
    kinds = [k for k in ("levels", "interval", "full") if k in spec]
    if len(kinds) != 1:
        ch.err(path, "exactly one of 'levels', 'interval', 'full' is required")
        return None
    if f is None:
        return None
    if J is not None and f > J:
        ch.err(path + ("stage",), f"stage {f} is above the truncation stage {J}")
        return None
    try:
        if kinds[0] == "levels":
            lv = ch.int_list(spec, "levels", path, lo=0)
            A = LevelSet(f, tuple(lv)) if lv is not None else None
        elif kinds[0] == "interval":
            iv = spec["interval"]
            if not (isinstance(iv, list) and len(iv) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in iv)):
                ch.err(path + ("interval",), "must be [lo, hi] with integers")
                return None
            A = LevelSet.interval(f, iv[0], iv[1])
        else:
            if spec["full"] is not True:
                ch.err(path + ("full",), "must be true")
                return None
            A = LevelSet.full(sched, f) if sched is not None else None
        if A is not None and not A.levels:
            ch.err(path, "level set is empty")
            return None
        if A is not None and sched is not None:
            A.check(sched)
        return A
    except RankOneError as e:
        ch.err(path, str(e))
        return None


def _pairs(ch: _Checker, spec, path, sched, J, seed):
    if not isinstance(spec, dict):
        ch.err(path, f"must be a mapping with 'family' in {', '.join(PAIR_FAMILIES)}")
        return None
    fam = spec.get("family")
    if fam not in PAIR_FAMILIES:
        ch.err(path + ("family",), f"must be one of {', '.join(PAIR_FAMILIES)}, got {fam!r}")
        return None
    if fam == "explicit":
        ch.unknown(spec, {"family", "pairs"}, path)
        raw = spec.get("pairs")
        if not isinstance(raw, list) or not raw:
            ch.err(path + ("pairs",), "must be a non-empty list of [set, set]")
            return None
        out = []
        for i, pr in enumerate(raw):
            if not isinstance(pr, list) or len(pr) != 2:
                ch.err(path + ("pairs", i), "must be a two-element list [A, B]")
                continue
            A = _set(ch, pr[0], path + ("pairs", i, 0), sched, J)
            B = _set(ch, pr[1], path + ("pairs", i, 1), sched, J)
            out.append((A, B))
        return out
    keys = {"family", "stage", "cap"} if fam == "single_levels" else {"family", "stage", "parts"}
    ch.unknown(spec, keys, path)
    f = ch.int_(spec, "stage", path, lo=1)
    if f is None or sched is None:
        return None
    if J is not None and f > J:
        ch.err(path + ("stage",), f"stage {f} is above the truncation stage {J}")
        return None
    from .lab import single_level_pairs

    h = sched.height(f)
    if fam == "single_levels":
        cap = ch.int_(spec, "cap", path, lo=1, required=False, default=4096)
        return single_level_pairs(sched, f, cap=cap, seed=seed) if cap is not None else None
    parts = ch.int_(spec, "parts", path, lo=1, hi=h + 1)
    if parts is None:
        return None
    sets = partition_sets(h, f, parts)
    return [(A, B) for A in sets for B in sets]


def partition_sets(h: int, stage: int, parts: int) -> list[LevelSet]:
    """Split the ``h + 1`` levels of a tower into ``parts`` consecutive runs of near-equal size."""
    edges = [(i * (h + 1)) // parts for i in range(parts + 1)]
    return [LevelSet.interval(stage, edges[i], edges[i + 1] - 1) for i in range(parts)]


@dataclass(frozen=True)
class TimeSpec:
    """One lag ``m`` with the marker stage ``j`` it came from (``None`` for raw lags)."""

    j: int | None
    m: int


def _times(ch: _Checker, a: dict, path, sched: SpacerSchedule | None, hJ: int | None, reach: int = 1) -> list[TimeSpec] | None:
    """Lags from ``ms`` and/or ``stages`` x ``multiples``; ``reach`` scales the window check."""
    out: list[TimeSpec] = []
    if "ms" not in a and "stages" not in a:
        ch.err(path, "needs 'ms' or 'stages' (with optional 'multiples')")
        return None
    if "ms" in a:
        raw = a["ms"]
        if not isinstance(raw, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in raw):
            ch.err(path + ("ms",), "must be a list of integers")
            return None
        out.extend(TimeSpec(None, m) for m in raw)
    if "stages" in a:
        js = ch.int_list(a, "stages", path, lo=1)
        ks = ch.int_list(a, "multiples", path, required=False) or [1]
        if js is None:
            return None
        if sched is not None:
            for i, j in enumerate(js):
                if j not in sched.marker_stages:
                    have = ", ".join(map(str, sched.marker_stages)) or "none"
                    ch.err(path + ("stages", i), f"stage {j} carries no marker (marker stages: {have})")
                    return None
        if sched is not None:
            out.extend(TimeSpec(j, k * sched.marker(j)) for j in js for k in ks)
        else:
            return None
    if hJ is not None:
        for t in out:
            if abs(t.m) * reach > hJ:
                what = f"m = {t.m}" + (f" from stage {t.j}" if t.j is not None else "")
                ch.err(path, f"{what} leaves the window: |m| * {reach} > h_J = {hJ}")
                return None
    return out


@dataclass
class Analysis:
    index: int
    kind: str
    spec: dict
    times: list[TimeSpec]
    pairs: list[tuple[LevelSet, LevelSet]]
    options: dict


def _analysis(ch: _Checker, i: int, a, sched, J, hJ, seed) -> Analysis | None:
    path = ("analyses", i)
    if not isinstance(a, dict):
        ch.err(path, "must be a mapping with a 'type' field")
        return None
    kind = a.get("type")
    if kind not in ANALYSES:
        ch.err(path + ("type",), f"must be one of {', '.join(ANALYSES)}, got {kind!r}")
        return None
    ch.unknown(a, ANALYSIS_KEYS[kind], path)
    n_before = len(ch.out)
    opts: dict = {}
    pairs: list = []
    times: list[TimeSpec] = []
    if kind in ("correlate", "fit", "mixing"):
        times = _times(ch, a, path, sched, hJ)
        pairs = _pairs(ch, a.get("pairs"), path + ("pairs",), sched, J, seed) if "pairs" in a else None
        if "pairs" not in a:
            ch.err(path, "missing required field 'pairs'")
        if kind == "fit":
            K = ch.int_(a, "K_max", path, lo=0, required=False, default=2)
            opts["K_max"] = K
            if pairs is not None and K is not None and len(pairs) < 2 * K + 2:
                ch.err(path + ("pairs",), f"{len(pairs)} pairs cannot determine {2 * K + 2} coefficients")
    elif kind == "tensor":
        ks = ch.int_list(a, "exponents", path, lo=1)
        if ks is not None and len(set(ks)) != len(ks):
            ch.err(path + ("exponents",), "exponents must be distinct")
        reach = max(ks) if ks else 1
        times = _times(ch, a, path, sched, hJ, reach=reach)
        opts["exponents"] = ks
        if "set" in a and "pairs" in a:
            ch.err(path, "give either 'set' or 'pairs', not both")
        elif "set" in a:
            A = _set(ch, a["set"], path + ("set",), sched, J)
            pairs = [(A, A)] * len(ks or [])
        elif "pairs" in a:
            raw = a["pairs"]
            if not isinstance(raw, list) or (ks is not None and len(raw) != len(ks)):
                ch.err(path + ("pairs",), "must list one [A, B] pair per exponent")
            else:
                pairs = []
                for q, pr in enumerate(raw):
                    if not isinstance(pr, list) or len(pr) != 2:
                        ch.err(path + ("pairs", q), "must be a two-element list [A, B]")
                        continue
                    pairs.append((_set(ch, pr[0], path + ("pairs", q, 0), sched, J), _set(ch, pr[1], path + ("pairs", q, 1), sched, J)))
        else:
            ch.err(path, "needs 'set' or 'pairs'")
    elif kind == "probe":
        ks = ch.int_list(a, "exponents", path, lo=1)
        M = ch.int_(a, "M", path, lo=1)
        A = _set(ch, a.get("set"), path + ("set",), sched, J) if "set" in a else None
        if "set" not in a:
            ch.err(path, "missing required field 'set'")
        step_raw = a.get("step")
        step = None
        if isinstance(step_raw, dict):
            ch.unknown(step_raw, {"marker"}, path + ("step",))
            j = ch.int_(step_raw, "marker", path + ("step",), lo=1)
            if j is not None and sched is not None:
                if j not in sched.marker_stages:
                    ch.err(path + ("step", "marker"), f"stage {j} carries no marker")
                else:
                    step = sched.marker(j)
                    opts["step_stage"] = j
        else:
            step = ch.int_(a, "step", path, lo=1)
        if None not in (ks, M, step, hJ) and (M - 1) * step * max(ks) > hJ:
            ch.err(path, f"probe reaches {(M - 1) * step * max(ks)} > h_J = {hJ}")
        opts.update(exponents=ks, M=M, step=step)
        pairs = [(A, A)]
    if len(ch.out) > n_before or sched is None:
        return None
    return Analysis(i, kind, a, times or [], list(pairs or []), opts)


# ---------------------------------------------------------------------------
# entry points


@dataclass
class Experiment:
    config: dict
    schedule: SpacerSchedule
    J: int
    seed: int
    analyses: list[Analysis]
    output: str | None
    source: str


def check(cfg: LoadedConfig, seed_override: int | None = None) -> tuple[Experiment | None, list[Diagnostic]]:
    """Validate ``cfg`` and, if clean, return the built experiment."""
    ch = _Checker(cfg)
    d = cfg.data
    ch.unknown(d, TOP_KEYS, ())
    depth = ch.int_(d, "depth", (), lo=1)
    J = ch.int_(d, "truncate_at", (), lo=1)
    seed = ch.int_(d, "seed", (), lo=0, hi=2**64 - 1, required=False, default=0)
    if seed_override is not None:
        if not 0 <= seed_override < 2**64:
            ch.err(("seed",), f"--seed must be an unsigned 64-bit integer, got {seed_override}")
        seed = seed_override
    if "output" in d and not isinstance(d["output"], str):
        ch.err(("output",), "must be a directory path string")
    if depth is not None and J is not None and J > depth:
        ch.err(("truncate_at",), f"truncate_at = {J} exceeds depth = {depth}")
        J = None
    if "recipe" not in d:
        ch.err((), "missing required field 'recipe'")
        sched = None
    else:
        sched = _recipe(ch, d["recipe"], depth, seed if seed is not None else 0)
    hJ = None
    if sched is not None and J is not None:
        hJ = sched.height(J)
    analyses = []
    raw = d.get("analyses", [])
    if not isinstance(raw, list):
        ch.err(("analyses",), "must be a list of analysis blocks")
        raw = []
    for i, a in enumerate(raw):
        an = _analysis(ch, i, a, sched, J, hJ, seed if seed is not None else 0)
        if an is not None:
            analyses.append(an)
    if ch.out or sched is None or J is None:
        return None, ch.out
    return Experiment(d, sched, J, seed, analyses, d.get("output"), cfg.source), []


def validate(config: str | Path | dict) -> list[Diagnostic]:
    """All diagnostics for a config file path, JSON/YAML text, or already-parsed mapping."""
    try:
        if isinstance(config, dict):
            cfg = LoadedConfig(config, _Lines(None), "<config>")
        elif isinstance(config, Path) or (isinstance(config, str) and "\n" not in config and Path(config).exists()):
            cfg = load_config(config)
        else:
            cfg = parse_config(str(config))
    except ConfigError as e:
        return list(e.diagnostics)
    return check(cfg)[1]


def build_experiment(config: str | Path | LoadedConfig, seed_override: int | None = None) -> Experiment:
    cfg = config if isinstance(config, LoadedConfig) else load_config(config)
    exp, diags = check(cfg, seed_override)
    if diags:
        raise ConfigError("\n".join(map(str, diags)), diags)
    return exp
