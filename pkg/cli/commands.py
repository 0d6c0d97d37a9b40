import functools
import sys
from fractions import Fraction

import click
import mpmath as mp
from loguru import logger
from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from config.settings import settings
from core.basis import BasisExpander, BasisSystem, SparseVec, format_vector, norm_l1, summarize_vector
from core.errors import OrbitError
from core.operator import OperatorColumns
from core.scalar import format_int
from core.schedule import Schedule
from models.reports import CheckReport, CheckStatus, OutputFormat, RunConfig
from models.schedule import Region, RegionCase, parse_entry
from models.witness import WitnessMode
from services.suite_service import default_upto

console = Console()

_STATUS_STYLE = {
    CheckStatus.PASS: "green",
    CheckStatus.FAIL: "bold red",
    CheckStatus.SKIP: "yellow",
    CheckStatus.INFO: "cyan",
}

# vectors whose indices fit this many bits are printed exactly
_EXACT_BITS = 64


def banner():
    console.print(f"[bold blue]{settings.APP_NAME}[/bold blue]  v{settings.VERSION}  "
                  f"[dim]({settings.APP_ENV})[/dim]")
    for w in settings.validate():
        console.print(f"  [yellow]⚠  {w}[/yellow]")


def guarded(fn):
    """Maps library errors to exit status 2."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (OrbitError, ValueError) as e:
            logger.error(f"{type(e).__name__}: {e}")
            console.print(f"[red]✘ {type(e).__name__}:[/red] {e}")
            sys.exit(2)
    return wrapper


class IndexType(click.ParamType):
    """Nonnegative index, decimal or 2^k."""
    name = "index"

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            return value
        try:
            return parse_entry(value)
        except ValueError as e:
            self.fail(str(e), param, ctx)


INDEX = IndexType()


def schedule_option(fn):
    return click.option(
        "--schedule", "schedule_path", default=settings.SCHEDULE_PATH, show_default=True,
        help="Schedule descriptor path, or a shipped name such as 'fixture' or 'naive'",
    )(fn)


def run_options(fn):
    fn = click.option("--precision", type=int, default=None,
                      help="Working precision in bits (minimum 64)")(fn)
    fn = click.option("--seed", type=int, default=settings.SEED, show_default=True)(fn)
    fn = click.option("--out", "out_dir", default=None,
                      help="Write the report bundle under this directory")(fn)
    fn = click.option("--format", "output_format", default=OutputFormat.BOTH.value,
                      type=click.Choice([f.value for f in OutputFormat]), show_default=True)(fn)
    return schedule_option(fn)


def _config(schedule_path, precision=None, seed=None, out_dir=None,
            output_format=OutputFormat.BOTH.value) -> RunConfig:
    return RunConfig(
        schedule_path=settings.resolve_schedule(schedule_path),
        precision_bits=settings.precision(precision),
        seed=settings.SEED if seed is None else seed,
        out_dir=out_dir or settings.OUT_DIR,
        output_format=OutputFormat(output_format),
    )


def _schedule(schedule_path) -> Schedule:
    return Schedule.from_file(settings.resolve_schedule(schedule_path))


def _region_text(region: Region) -> str:
    if region.case == RegionCase.ZERO:
        return "Zero"
    parts = [f"n={region.n}"]
    if region.r is not None:
        parts.append(f"r={region.r}")
    if region.h is not None:
        h = region.h
        text = format_int(h.numerator)
        parts.append(f"h={text}" if h.denominator == 1 else f"h={text}/{h.denominator}")
    return f"{region.case.value}({', '.join(parts)})"


def _vector_text(x: SparseVec, precision_bits: int) -> str:
    if x.is_zero or x.max_support.bit_length() <= _EXACT_BITS:
        return format_vector(x)
    return summarize_vector(x, precision_bits)


def _fraction_text(q: Fraction) -> str:
    if q.denominator == 1:
        return format_int(q.numerator)
    return f"{format_int(q.numerator)}/{format_int(q.denominator)}"


def _emit(report: CheckReport, config: RunConfig, write: bool, folder: str) -> int:
    tbl = Table(box=box.SIMPLE_HEAVY, header_style="bold cyan", title=report.name)
    tbl.add_column("ID", width=9)
    tbl.add_column("Status", width=6)
    tbl.add_column("Check")
    tbl.add_column("Detail")
    for r in report.results:
        style = _STATUS_STYLE[r.status]
        tbl.add_row(r.id, f"[{style}]{r.status.value.upper()}[/{style}]", r.name, r.detail)
    console.print(tbl)
    for note in report.notes:
        console.print(f"  [dim]{note}[/dim]")
    status = 0 if report.passed else 1
    if write:
        from reporting.report_writer import ReportWriter
        files = ReportWriter(config).write(folder, status, [report])
        console.print(f"[green]✔ Report written:[/green] {len(files)} files under {config.out_dir}/{folder}")
    if status:
        console.print(f"[red]✘ {len(report.failures)} check(s) failed[/red]")
    return status


def _finish(status: int):
    if status:
        sys.exit(status)


@click.group()
def cli():
    """Exact finite sections of an orbit-prescribed operator and its witness vector."""
    banner()


@cli.command("status")
@schedule_option
@guarded
def check_status(schedule_path):
    """Show resolved settings and the schedule fingerprint."""
    config = _config(schedule_path)
    tbl = Table(box=box.ROUNDED, header_style="bold cyan")
    tbl.add_column("Setting", style="bold")
    tbl.add_column("Value")
    tbl.add_row("Schedule", config.schedule_path.as_posix())
    if config.schedule_path.exists():
        tbl.add_row("Schedule sha256", config.fingerprint())
        tbl.add_row("Schedule name", _schedule(schedule_path).name)
    else:
        tbl.add_row("Schedule sha256", "[red]NOT FOUND[/red]")
    tbl.add_row("Precision bits", str(config.precision_bits))
    tbl.add_row("Seed", str(config.seed))
    tbl.add_row("Output directory", str(config.out_dir))
    tbl.add_row("Log level", settings.LOG_LEVEL)
    tbl.add_row("Log file", str(settings.LOG_FILE))
    tbl.add_row("Basis cache size", str(settings.BASIS_CACHE_SIZE))
    tbl.add_row("Max power steps", str(settings.MAX_POWER_STEPS))
    tbl.add_row("LAD max family", str(settings.LAD_MAX_FAMILY))
    console.print(tbl)


@cli.command("validate-schedule")
@schedule_option
@click.option("--horizon", type=int, default=None, help="Check generations 1..horizon")
@guarded
def validate_schedule(schedule_path, horizon):
    """Check the growth conditions of a schedule descriptor."""
    schedule = _schedule(schedule_path)
    result = schedule.validate(horizon)
    tbl = Table(box=box.SIMPLE_HEAVY, header_style="bold cyan",
                title=f"{result.schedule} (n <= {result.horizon})")
    tbl.add_column("n", justify="right")
    tbl.add_column("Check")
    tbl.add_column("Result")
    tbl.add_column("Detail")
    for c in result.checks:
        mark = "[green]PASS[/green]" if c.passed else "[bold red]FAIL[/bold red]"
        tbl.add_row(str(c.witness_n or ""), c.name, mark, c.detail)
    console.print(tbl)
    _finish(0 if result.passed else 1)


@cli.command("classify")
@click.argument("index", type=INDEX)
@schedule_option
@click.option("--layout", is_flag=True, default=False, help="Also print the generation layout")
@guarded
def classify_index(index, schedule_path, layout):
    """Print the region of an index."""
    schedule = _schedule(schedule_path)
    region = schedule.classify(index)
    console.print(_region_text(region))
    if index > 0 and region.case in (RegionCase.B, RegionCase.D):
        console.print(f"  weight d_i = {_fraction_text(schedule.d_weight(index))}")
    if layout and region.case != RegionCase.ZERO:
        tbl = Table(box=box.SIMPLE, header_style="bold cyan", title=f"generation {region.n}")
        tbl.add_column("Region")
        tbl.add_column("First", justify="right")
        tbl.add_column("Last", justify="right")
        for label, first, last in schedule.describe(region.n):
            tbl.add_row(label, format_int(first), format_int(last))
        console.print(tbl)


@cli.group("basis")
def basis_group():
    """Conversions between the f-, e- and ê-systems."""


@basis_group.command("expand")
@click.option("--system", type=click.Choice([b.value for b in BasisSystem]), required=True)
@click.option("--index", "index", type=INDEX, required=True)
@schedule_option
@click.option("--precision", type=int, default=None)
@guarded
def basis_expand(system, index, schedule_path, precision):
    """Expand one basis vector: e_i and ê_i over f, f_i over e and ê."""
    prec = settings.precision(precision)
    expander = BasisExpander(_schedule(schedule_path))
    system = BasisSystem(system)
    if system == BasisSystem.F:
        console.print(f"f_{format_int(index)} = {_vector_text(expander.f_in_e(index), prec)}")
        console.print(f"f_{format_int(index)} = {_vector_text(expander.f_in_ehat(index), prec)}")
        return
    x = expander.ehat_in_f(index) if system == BasisSystem.EHAT else expander.e_in_f(index)
    label = "ê" if system == BasisSystem.EHAT else "e"
    console.print(f"{label}_{format_int(index)} = {_vector_text(x, prec)}")
    console.print(f"  l1 norm = {norm_l1(x, prec)}")


@cli.group("matrix")
def matrix_group():
    """Columns of S = D^-1 T D."""


@matrix_group.command("s-column")
@click.argument("index", type=INDEX)
@click.option("--method", type=click.Choice(["formula", "direct"]), default="formula",
              show_default=True)
@schedule_option
@click.option("--precision", type=int, default=None)
@guarded
def s_column(index, method, schedule_path, precision):
    """Print column i of S in the f-basis."""
    prec = settings.precision(precision)
    columns = OperatorColumns(_schedule(schedule_path))
    col = columns.s_column_formula(index) if method == "formula" else columns.s_column_direct(index)
    console.print(f"S f_{format_int(index)} = {_vector_text(col, prec)}")
    console.print(f"  l1 norm = {norm_l1(col, prec)}")
    eps = columns.epsilons(index)
    if eps is not None:
        console.print(f"  epsilon_1 = {eps[0]}, epsilon_2 = {eps[1]}")


@cli.group("verify")
def verify_group():
    """Exact identity checks."""


@verify_group.command("conjugation")
@click.option("--upto", type=int, default=None, help="Last column (default: v_2)")
@click.option("--from", "lo", type=int, default=0, show_default=True)
@run_options
@guarded
def verify_conjugation(upto, lo, schedule_path, precision, seed, out_dir, output_format):
    """Check the closed-form columns of S against D^-1 T D."""
    from analyzers.operator_analyzer import OperatorAnalyzer
    config = _config(schedule_path, precision, seed, out_dir, output_format)
    schedule = _schedule(schedule_path)
    hi = default_upto(schedule) if upto is None else upto
    with Progress(SpinnerColumn(), TextColumn("{task.description}"), console=console) as p:
        p.add_task(f"Comparing columns {lo}..{hi}...", total=None)
        report = OperatorAnalyzer(schedule, precision_bits=config.precision_bits,
                                  seed=config.seed).verify_conjugation(lo, hi)
    _finish(_emit(report, config, out_dir is not None, "verify"))


@cli.group("report")
def report_group():
    """Norm, row and residual tables."""


@report_group.command("column-norms")
@click.option("--upto", type=int, default=None, help="Last column (default: v_2)")
@run_options
@guarded
def report_column_norms(upto, schedule_path, precision, seed, out_dir, output_format):
    """l1 norms of the columns of S and the bound ||S|| <= 2."""
    from analyzers.operator_analyzer import OperatorAnalyzer
    config = _config(schedule_path, precision, seed, out_dir, output_format)
    schedule = _schedule(schedule_path)
    hi = default_upto(schedule) if upto is None else upto
    report = OperatorAnalyzer(schedule, precision_bits=config.precision_bits,
                              seed=config.seed).column_norms(0, hi)
    _finish(_emit(report, config, out_dir is not None, "report"))


@report_group.command("rows")
@click.option("--row", "row", type=int, default=0, show_default=True)
@click.option("--upto", type=int, default=None, help="Last column (default: v_2)")
@run_options
@guarded
def report_rows(row, upto, schedule_path, precision, seed, out_dir, output_format):
    """Entries of one row of S across generations."""
    from analyzers.operator_analyzer import OperatorAnalyzer
    config = _config(schedule_path, precision, seed, out_dir, output_format)
    schedule = _schedule(schedule_path)
    hi = default_upto(schedule) if upto is None else upto
    report = OperatorAnalyzer(schedule, precision_bits=config.precision_bits,
                              seed=config.seed).row_entries(row, 0, hi)
    _finish(_emit(report, config, out_dir is not None, "report"))


@report_group.command("nonadjoint")
@click.option("--s-max", type=int, default=1, show_default=True)
@click.option("--n-max", type=int, default=3, show_default=True)
@run_options
@guarded
def report_nonadjoint(s_max, n_max, schedule_path, precision, seed, out_dir, output_format):
    """Residual norms showing T is not an adjoint."""
    from analyzers.nonadjoint_analyzer import NonAdjointAnalyzer
    config = _config(schedule_path, precision, seed, out_dir, output_format)
    report = NonAdjointAnalyzer(_schedule(schedule_path),
                                precision_bits=config.precision_bits).nonadjoint_report(s_max, n_max)
    tbl = Table(box=box.SIMPLE_HEAVY, header_style="bold cyan")
    for col in ("s", "n", "delta", "log2 delta", "limit norm"):
        tbl.add_column(col, justify="right")
    for row in report.rows:
        tbl.add_row(str(row["s"]), str(row["n"]), row["delta"], row["log2_delta"][:24],
                    str(row["limit_norm"]))
    console.print(tbl)
    _finish(_emit(report, config, out_dir is not None, "report"))


@cli.group("witness")
def witness_group():
    """The witness vector x_inf and its separation from e_0."""


def witness_options(fn):
    fn = click.option("--m0", type=int, default=2, show_default=True)(fn)
    fn = click.option("--mode", type=click.Choice([m.value for m in WitnessMode]),
                      default=WitnessMode.STRICT.value, show_default=True)(fn)
    fn = click.option("--depth", type=int, default=1, show_default=True)(fn)
    fn = click.option("--toy-r", type=int, default=2, show_default=True)(fn)
    fn = click.option("--j0", type=INDEX, default=None, help="Admissible j_0 (default r_0 a(m_0))")(fn)
    return fn


def _witness(schedule_path, precision, seed, m0, mode, depth, toy_r, j0):
    from analyzers.witness_analyzer import WitnessAnalyzer
    from core.witness import WitnessBuilder
    prec = settings.precision(precision)
    builder = WitnessBuilder(_schedule(schedule_path), precision_bits=prec)
    w = builder.choose_params(m0, mode, depth, toy_r=toy_r, j0=j0)
    return builder, WitnessAnalyzer(builder, prec, seed), w


@witness_group.command("build")
@witness_options
@run_options
@guarded
def witness_build(m0, mode, depth, toy_r, j0, schedule_path, precision, seed, out_dir, output_format):
    """Construct the level data and the truncated x_inf."""
    builder, _, w = _witness(schedule_path, precision, seed, m0, mode, depth, toy_r, j0)
    tbl = Table(box=box.SIMPLE_HEAVY, header_style="bold cyan", title=f"{w.mode.value} witness")
    for col in ("level", "m", "r", "j", "p"):
        tbl.add_column(col, justify="right")
    for i in range(w.depth + 1):
        p = _fraction_text(w.p[i]) if i < len(w.p) else "-"
        tbl.add_row(str(i), str(w.m[i]), str(w.r[i]), format_int(w.j[i]), p)
    console.print(tbl)
    if w.max_norm is not None:
        console.print(f"  max ||ê_l|| = {w.max_norm} at l = {w.max_norm_index}")
    x, bound = builder.x_infinity_truncation(w.depth, w)
    console.print(Panel(
        f"[bold]x_{w.depth}:[/bold] {_vector_text(x, builder.precision_bits)}\n"
        f"[bold]tail bound:[/bold] 2^({bound.bound.log2_str(20)})"
        f"{'' if bound.complete else ' [yellow](incomplete)[/yellow]'}\n"
        f"[dim]{bound.note}[/dim]",
        title="[bold blue]Truncated witness[/bold blue]",
    ))


@witness_group.command("check-prop22")
@witness_options
@click.option("--samples", type=int, default=20, show_default=True)
@run_options
@guarded
def witness_check(m0, mode, depth, toy_r, j0, samples, schedule_path, precision, seed,
                  out_dir, output_format):
    """Verify the recurrences, support intervals and shift properties."""
    _, analyzer, w = _witness(schedule_path, precision, seed, m0, mode, depth, toy_r, j0)
    config = _config(schedule_path, precision, seed, out_dir, output_format)
    report = analyzer.check_prop22(w, sample_budget=samples)
    _finish(_emit(report, config, out_dir is not None, "witness"))


@witness_group.command("separation")
@witness_options
@click.option("--N", "n_max", type=int, default=100, show_default=True)
@click.option("--samples", type=int, default=20, show_default=True)
@run_options
@guarded
def witness_separation(m0, mode, depth, toy_r, j0, n_max, samples, schedule_path, precision,
                       seed, out_dir, output_format):
    """Distance from e_0 of random combinations of the S-orbit of x_inf."""
    _, analyzer, w = _witness(schedule_path, precision, seed, m0, mode, depth, toy_r, j0)
    config = _config(schedule_path, precision, seed, out_dir, output_format)
    with Progress(SpinnerColumn(), TextColumn("{task.description}"), console=console) as p:
        p.add_task("Solving for C and sampling the orbit...", total=None)
        report = analyzer.separation_check(w, n_max, samples)
    _finish(_emit(report, config, out_dir is not None, "witness"))


@witness_group.command("constant-c")
@witness_options
@run_options
@guarded
def witness_constant_c(m0, mode, depth, toy_r, j0, schedule_path, precision, seed,
                       out_dir, output_format):
    """The separation constant C from the least absolute deviations problem."""
    _, analyzer, w = _witness(schedule_path, precision, seed, m0, mode, depth, toy_r, j0)
    config = _config(schedule_path, precision, seed, out_dir, output_format)
    solution, report = analyzer.constant_c(w)
    nonzero = [(w.j[0] + k, g) for k, g in enumerate(solution.coefficients) if g]
    console.print(Panel(
        f"[bold]C:[/bold] {mp.nstr(solution.approx, 30)}\n"
        f"[bold]duality gap:[/bold] {mp.nstr(solution.certificate.gap, 5)}\n"
        f"[bold]attaining coefficients:[/bold] {len(nonzero)} nonzero\n"
        + "\n".join(f"  ê_{j}: {mp.nstr(g, 15)}" for j, g in nonzero[:8]),
        title="[bold blue]Separation constant[/bold blue]",
    ))
    _finish(_emit(report, config, out_dir is not None, "witness"))


@cli.group("suite")
def suite_group():
    """Named check suites with a written report bundle."""


@suite_group.command("run")
@click.argument("name")
@run_options
@guarded
def suite_run(name, schedule_path, precision, seed, out_dir, output_format):
    """Run a suite: conjugation, norms, rows, witness, separation, nonadjoint or all."""
    from services.suite_service import run_suite
    config = _config(schedule_path, precision, seed, out_dir, output_format)
    with Progress(SpinnerColumn(), TextColumn("{task.description}"), console=console) as p:
        p.add_task(f"Running suite '{name}'...", total=None)
        result = run_suite(name, config)
    tbl = Table(box=box.SIMPLE_HEAVY, header_style="bold cyan", title=f"suite {name}")
    tbl.add_column("Report")
    tbl.add_column("Checks", justify="right")
    tbl.add_column("Failed", justify="right")
    tbl.add_column("Skipped", justify="right")
    for r in result.reports:
        failed = f"[red]{len(r.failures)}[/red]" if r.failures else "0"
        tbl.add_row(r.name, str(len(r.results)), failed, str(len(r.skipped)))
    console.print(tbl)
    for f in result.failures:
        console.print(f"  [red]✘ {f.id}[/red] {f.name}: {f.detail}")
    console.print(f"\n[green]✔ Bundle:[/green] {config.out_dir}/{name} ({len(result.files)} files)")
    _finish(result.status)
