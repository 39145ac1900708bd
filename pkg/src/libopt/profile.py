"""Performance profiles: result selection, ratio computation, plot-data emission.

Given a results store and a specification file, this module compares a
set of solvers over the problems they all have results for. For solver s
and problem p, the raw performance tau(p, s) is the value of the chosen
performance token when the run succeeded. The relative performance is

    rho(p, s) = tau(p, s) / min over s' of tau(p, s')

so rho >= 1, with 1 marking the best solver on that problem. Failures
are parked on a plateau value rho_bar strictly above every finite ratio,
and a solver fails p exactly when rho(p, s) = rho_bar. The profile of s
is the nondecreasing step function

    t in [1, rho_bar] -> fraction of problems with rho(p, s) <= t

whose value at 1 is the fraction of problems where s is best, and whose
value just below rho_bar is the fraction of problems s solves at all.
"""
from __future__ import annotations

import math
import operator
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import LiboptError
from .hierarchy import read_list
from .record import INFO_TOKEN, TokenConfig, check_name, split_solver_field
from .store import Selection, Store

SPEC_FILENAME = "perfopt.spc"
DEFAULT_OUTPUT_BASE = "perf"

RELATIONS: dict[str, Callable[[float, float], bool]] = {
    "<": operator.lt,
    "<=": operator.le,
    "=": operator.eq,
    "!=": operator.ne,
    ">=": operator.ge,
    ">": operator.gt,
}

WarnFn = Callable[[str], None]

# (collection, problem) pair identifying one problem across collections
ProblemId = tuple[str, str]


class SpecError(LiboptError):
    """A problem with the specification file or its CLI merge."""


class ProfileError(LiboptError):
    """A problem with the selected data or the ratio computation."""


@dataclass(frozen=True)
class ProblemFilter:
    token: str
    relation: str
    threshold: float

    def accepts(self, value: float) -> bool:
        return RELATIONS[self.relation](value, self.threshold)


@dataclass(frozen=True)
class ProfileSpec:
    solvers: tuple[str, ...]
    collections: tuple[tuple[str, str | None], ...]
    performance_token: str
    problem_filters: tuple[ProblemFilter, ...] = ()
    rho_bar_override: float | None = None
    log_scale: bool = False
    output_base: str = DEFAULT_OUTPUT_BASE


def parse_spec(
    text: str,
    *,
    cli_ptok: str | None = None,
    cli_log: bool = False,
    cli_output: str | None = None,
    config: TokenConfig | None = None,
    warn: WarnFn | None = None,
) -> ProfileSpec:
    """Parse specification directives and merge the command-line settings.

    ``solver``, ``collection`` and ``problem`` directives accumulate over
    repeated lines; the single-valued ones may appear once. The command
    line wins for the performance token and the output base.
    """
    solvers: list[str] = []
    collections: list[tuple[str, str | None]] = []
    filters: list[ProblemFilter] = []
    single: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        directive, args = fields[0], fields[1:]
        where = f"{SPEC_FILENAME}:{lineno}"
        if directive == "solver":
            if not args:
                raise SpecError(f"{where}: solver directive needs at least one name")
            for name in args:
                split_solver_field(name)
                if name in solvers:
                    if warn is not None:
                        warn(f"{where}: solver {name!r} listed twice")
                    continue
                solvers.append(name)
        elif directive == "collection":
            if not args:
                raise SpecError(f"{where}: collection directive needs at least one name")
            for field in args:
                coll, sep, subc = field.partition(".")
                check_name(coll, "collection")
                pair = (coll, check_name(subc, "subcollection") if sep else None)
                if pair in collections:
                    if warn is not None:
                        warn(f"{where}: collection {field!r} listed twice")
                    continue
                collections.append(pair)
        elif directive == "problem":
            if len(args) != 3 or args[1] not in RELATIONS:
                raise SpecError(
                    f"{where}: expected 'problem token relation number' with relation"
                    f" among {sorted(RELATIONS)}"
                )
            try:
                threshold = float(args[2])
            except ValueError as exc:
                raise SpecError(f"{where}: bad threshold {args[2]!r}") from exc
            filters.append(ProblemFilter(check_name(args[0], "token"), args[1], threshold))
        elif directive in ("performance", "rho_max", "output"):
            if directive in single:
                raise SpecError(f"{where}: duplicate directive {directive!r}")
            if len(args) != 1:
                raise SpecError(f"{where}: {directive} takes exactly one value")
            single[directive] = args[0]
        else:
            raise SpecError(f"{where}: unknown directive {directive!r}")

    if len(solvers) < 2:
        raise SpecError("at least two distinct solvers must be selected")
    ptok = cli_ptok if cli_ptok is not None else single.get("performance")
    if ptok is None:
        raise SpecError(
            "no performance token: give one with -p or a 'performance' directive"
        )
    check_name(ptok, "performance token")
    if config is not None and config.performance_tokens is not None:
        if ptok not in config.performance_tokens:
            raise SpecError(f"{ptok!r} is not a configured performance token")
    rho_bar_override = None
    if "rho_max" in single:
        try:
            rho_bar_override = float(single["rho_max"])
        except ValueError as exc:
            raise SpecError(f"bad rho_max value {single['rho_max']!r}") from exc
        if rho_bar_override <= 1.0:
            raise SpecError("rho_max must be greater than 1")
    output_base = cli_output if cli_output is not None else single.get("output", DEFAULT_OUTPUT_BASE)
    return ProfileSpec(
        solvers=tuple(solvers),
        collections=tuple(collections),
        performance_token=ptok,
        problem_filters=tuple(filters),
        rho_bar_override=rho_bar_override,
        log_scale=cli_log,
        output_base=output_base,
    )


def gather_candidate_problems(
    spec: ProfileSpec,
    working_dir: Path,
    root: Path | None = None,
    warn: WarnFn | None = None,
) -> list[ProblemId] | None:
    """Resolve the collection directives to qualified problem names.

    Returns None when no collection was named (meaning: no restriction).
    A named list that resolves nowhere is an error, since the user asked
    for it explicitly.
    """
    if not spec.collections:
        return None
    ordered: list[ProblemId] = []
    seen: set[ProblemId] = set()
    for coll, subc in spec.collections:
        sub = subc if subc is not None else "all"
        candidates = [Path(working_dir) / f"{coll}.{sub}.lst"]
        if root is not None:
            candidates.append(Path(root) / "collections" / coll / f"{sub}.lst")
        path = next((p for p in candidates if p.is_file()), None)
        if path is None:
            raise ProfileError(f"no list file found for collection {coll}.{sub}")
        for name in read_list(path, warn=warn).names:
            pair = (coll, name)
            if pair not in seen:
                seen.add(pair)
                ordered.append(pair)
    return ordered


@dataclass
class ResultTable:
    """Per (problem, solver) token maps for the comparable problems."""

    problems: list[ProblemId]
    solvers: list[str]
    values: dict[tuple[ProblemId, str], dict[str, float]]


def select(
    spec: ProfileSpec,
    store: Store,
    candidates: list[ProblemId] | None = None,
    warn: WarnFn | None = None,
) -> ResultTable:
    """Pick the problems on which the selected solvers can be compared.

    A problem qualifies when every solver has a stored result for it that
    carries the performance token, it lies in the candidate set (when one
    was given), and it passes every problem filter. Filter values are
    read from the first solver's record; problems lacking the filtered
    token are discarded.
    """
    per_solver: dict[str, dict[ProblemId, dict[str, float]]] = {
        s: {} for s in spec.solvers
    }
    for key, pairs in store.query(Selection()):
        if key.solver_with_tag in per_solver:
            per_solver[key.solver_with_tag][(key.collection, key.problem)] = {
                p.token: p.value for p in pairs
            }
    if candidates is not None:
        pool = list(candidates)
    else:
        common = set.intersection(*(set(d) for d in per_solver.values()))
        pool = sorted(common)

    ptok = spec.performance_token
    eligible: list[ProblemId] = []
    values: dict[tuple[ProblemId, str], dict[str, float]] = {}
    for problem in pool:
        if any(problem not in per_solver[s] for s in spec.solvers):
            continue
        if any(ptok not in per_solver[s][problem] for s in spec.solvers):
            continue
        first = per_solver[spec.solvers[0]][problem]
        keep = True
        for filt in spec.problem_filters:
            if filt.token not in first or not filt.accepts(first[filt.token]):
                keep = False
                break
            for other in spec.solvers[1:]:
                other_value = per_solver[other][problem].get(filt.token)
                if other_value is not None and other_value != first[filt.token]:
                    if warn is not None:
                        warn(
                            f"token {filt.token!r} disagrees across solvers on"
                            f" {problem[0]}/{problem[1]}"
                        )
        if not keep:
            continue
        eligible.append(problem)
        for s in spec.solvers:
            values[(problem, s)] = per_solver[s][problem]
    return ResultTable(eligible, list(spec.solvers), values)


@dataclass
class RatioMatrix:
    problems: list[ProblemId]
    solvers: list[str]
    tau: dict[tuple[ProblemId, str], float | None]
    rho: dict[tuple[ProblemId, str], float]
    rho_bar: float


def compute_ratios(
    table: ResultTable,
    ptok: str,
    rho_bar_override: float | None = None,
) -> RatioMatrix:
    """Turn raw performance values into per-problem relative ratios.

    tau is absent for a failed run. Every problem with at least one
    success is normalized by its best tau, so its minimum finite ratio
    is 1; failures (and whole all-fail rows) sit at rho_bar. Without an
    override, rho_bar is twice the largest finite ratio, floored at 2.
    """
    if not table.problems:
        raise ProfileError("no eligible problems")
    tau: dict[tuple[ProblemId, str], float | None] = {}
    for problem in table.problems:
        for s in table.solvers:
            values = table.values[(problem, s)]
            if values[INFO_TOKEN] == 0.0:
                raw = values[ptok]
                if raw <= 0.0:
                    raise ProfileError(
                        f"nonpositive performance value {format_ratio(raw)} for {s}"
                        f" on {problem[0]}/{problem[1]}"
                    )
                tau[(problem, s)] = raw
            else:
                tau[(problem, s)] = None

    finite: dict[tuple[ProblemId, str], float] = {}
    max_finite = None
    for problem in table.problems:
        successes = [
            tau[(problem, s)] for s in table.solvers if tau[(problem, s)] is not None
        ]
        if not successes:
            continue
        best = min(successes)
        for s in table.solvers:
            value = tau[(problem, s)]
            if value is None:
                continue
            ratio = value / best
            finite[(problem, s)] = ratio
            if max_finite is None or ratio > max_finite:
                max_finite = ratio

    if rho_bar_override is not None:
        if rho_bar_override <= 1.0:
            raise ProfileError("rho_max must be greater than 1")
        if max_finite is not None and rho_bar_override <= max_finite:
            raise ProfileError(
                f"rho_max {format_ratio(rho_bar_override)} does not exceed the"
                f" largest finite ratio {format_ratio(max_finite)}"
            )
        rho_bar = rho_bar_override
    else:
        rho_bar = max(2.0, 2.0 * max_finite) if max_finite is not None else 2.0

    rho = {
        (problem, s): finite.get((problem, s), rho_bar)
        for problem in table.problems
        for s in table.solvers
    }
    return RatioMatrix(list(table.problems), list(table.solvers), tau, rho, rho_bar)


@dataclass(frozen=True)
class StepFunction:
    """One solver's profile: nondecreasing steps over [1, rho_bar]."""

    solver: str
    breakpoints: tuple[tuple[float, float], ...]
    solve_fraction: float

    def value_at(self, t: float) -> float:
        out = 0.0
        for point, value in self.breakpoints:
            if point <= t:
                out = value
        return out


def compute_profiles(matrix: RatioMatrix) -> list[StepFunction]:
    """Evaluate each solver's step function on the shared breakpoint grid."""
    count = len(matrix.problems)
    finite = {r for r in matrix.rho.values() if r < matrix.rho_bar}
    grid = sorted({1.0, *finite}) + [matrix.rho_bar]
    profiles = []
    for s in matrix.solvers:
        ratios = sorted(matrix.rho[(p, s)] for p in matrix.problems)
        breakpoints = tuple((t, bisect_right(ratios, t) / count) for t in grid)
        solved = sum(1 for p in matrix.problems if matrix.tau[(p, s)] is not None)
        profiles.append(StepFunction(s, breakpoints, solved / count))
    return profiles


def format_ratio(x: float) -> str:
    return f"{x:.6g}"


def _x_of(t: float, log_scale: bool) -> float:
    return math.log2(t) if log_scale else t


def _staircase_rows(profile: StepFunction, log_scale: bool) -> list[str]:
    # repeat the previous value at each jump so steps render as horizontal segments
    rows: list[str] = []
    prev_value = None
    for t, value in profile.breakpoints:
        x = format_ratio(_x_of(t, log_scale))
        if prev_value is not None and value != prev_value:
            rows.append(f"{x} {format_ratio(prev_value)}")
        rows.append(f"{x} {format_ratio(value)}")
        prev_value = value
    return rows


def emit_gnuplot(profiles: list[StepFunction], log_scale: bool = False) -> str:
    """Gnuplot data file: one block per solver, two blank lines between blocks."""
    x_label = "log2(performance ratio)" if log_scale else "performance ratio"
    header = [
        "# performance profile data",
        f"# x: {x_label}, y: fraction of problems",
    ]
    if not profiles:
        return "\n".join(header) + "\n"
    blocks = [
        "\n".join([f"# solver {p.solver}"] + _staircase_rows(p, log_scale))
        for p in profiles
    ]
    return "\n".join(header) + "\n\n" + "\n\n\n".join(blocks) + "\n"


def emit_matlab(profiles: list[StepFunction], log_scale: bool = False) -> str:
    """Matlab script: one breakpoint matrix per solver plus staircase plots."""
    x_label = "log2(performance ratio)" if log_scale else "performance ratio"
    lines = ["% performance profile data"]
    if not profiles:
        lines.append("error('no eligible problems: nothing to plot');")
        return "\n".join(lines) + "\n"
    for i, profile in enumerate(profiles, 1):
        lines.append(f"data{i} = [")
        for t, value in profile.breakpoints:
            lines.append(f"  {format_ratio(_x_of(t, log_scale))} {format_ratio(value)}")
        lines.append("];")
    lines.append("figure;")
    lines.append("hold on;")
    for i in range(1, len(profiles) + 1):
        lines.append(f"stairs(data{i}(:,1), data{i}(:,2));")
    lines.append("hold off;")
    names = ", ".join("'" + p.solver.replace("'", "''") + "'" for p in profiles)
    lines.append(f"legend({names}, 'Location', 'SouthEast');")
    lines.append(f"xlabel('{x_label}');")
    lines.append("ylabel('fraction of problems');")
    first = profiles[0].breakpoints
    lines.append(
        f"axis([{format_ratio(_x_of(first[0][0], log_scale))}"
        f" {format_ratio(_x_of(first[-1][0], log_scale))} 0 1]);"
    )
    return "\n".join(lines) + "\n"


def write_outputs(
    profiles: list[StepFunction],
    log_scale: bool,
    base: Path | str,
) -> tuple[Path, Path]:
    """Write the <base>.gnu and <base>.m plot-data files."""
    gnu_path = Path(str(base) + ".gnu")
    m_path = Path(str(base) + ".m")
    gnu_path.write_text(emit_gnuplot(profiles, log_scale))
    m_path.write_text(emit_matlab(profiles, log_scale))
    return gnu_path, m_path
