"""
Command-line surface. Every command reads the text formats of group_core, writes JSON or
the same text formats, and reports errors through run_cli's exit codes: 0 on success, 1
for malformed input, exceeded caps and failed checks, 2 when a step the argument
guarantees did not go through.
"""
import json
import sys
from typing import List, Optional

import click

from src.constants import EXIT_DOMAIN_ERROR, EXIT_FALSIFIED, EXIT_OK
from src.constructions import (
    ConstructionRecord,
    a0_record,
    is_free,
    max_free_search,
    moser_record,
    product_record,
    random_set,
)
from src.counting import METHODS, density_function, lambda_family, lambda_report
from src.engine import DRIVERS, replay_trace, run_driver
from src.engine_config import EngineConfig
from src.exceptions import InternalConsistencyError, SetFileError, TheoremFalsificationError
from src.group_core import (
    Family,
    Z2Set,
    Z4Set,
    format_family,
    format_set,
    parse_set_text,
    parse_z2,
    read_input_file,
    write_text_file,
)
from src.harmonic import RealFn2, dft4, wht
from src.increment import density_fn_increment, fibre_increment
from src.regularize import bsg_oracle, uniformize
from src.utils import jsonable, to_fraction

INCREMENT_STEPS = {"fibre": fibre_increment, "density": density_fn_increment}


def _dump(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True)


def _emit(text: str, out: Optional[str]):
    if out:
        write_text_file(out, text)
    else:
        click.echo(text, nl=False)


def _load(path: str, *kinds):
    obj = read_input_file(path)
    if kinds and not isinstance(obj, kinds):
        names = " or ".join(k.__name__ for k in kinds)
        raise SetFileError(f"{path} holds a {type(obj).__name__}, expected {names}.")
    return obj


def _rational(value: str):
    try:
        return to_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise click.BadParameter(f"'{value}' is not a rational: {e}")


@click.group()
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True, help="Seed for random inputs.")
@click.pass_context
def cli(ctx, seed):
    """Exact progression counts and density-increment runs in Z_4^n."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed


@cli.command()
@click.argument("setfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(METHODS + ("all",)), default="all", show_default=True)
def count(setfile, method):
    """Lambda and the raw progression count of a set (or of a family with --method fibre)."""
    obj = _load(setfile, Z4Set, Family)
    if isinstance(obj, Family):
        if method not in ("fibre", "all"):
            raise click.UsageError("Families can only be counted with --method fibre.")
        reports = [lambda_family(obj)]
    else:
        methods = METHODS if method == "all" else (method,)
        reports = [lambda_report(obj, m) for m in methods]
    for r in reports:
        click.echo(f"{r.method}: lambda = {r.lambda_value}, raw = {r.raw_count}, normalizer = {r.normalizer}")
    if len({r.raw_count for r in reports}) > 1:
        raise InternalConsistencyError("Counting methods disagree.")
    if len(reports) > 1:
        click.echo("agree: true")


@cli.command()
@click.argument("setfile", type=click.Path(exists=True, dir_okay=False))
def spectrum(setfile):
    """Exact Fourier coefficients as JSON [numerator, denominator] pairs."""
    obj = _load(setfile)
    if isinstance(obj, Z4Set):
        data = dft4(obj).to_json_dict()
    elif isinstance(obj, Z2Set):
        data = wht(RealFn2.indicator(obj)).to_json_dict()
    else:
        data = wht(density_function(obj)).to_json_dict()
    click.echo(_dump(data))


@cli.command()
@click.argument("familyfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--step", "step_name", type=click.Choice(sorted(INCREMENT_STEPS)), required=True,
              help="fibre: simultaneous fibre increment; density: density-function increment.")
@click.option("--gamma", required=True, help="Character as a bit string, first coordinate first.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the new family here.")
def increment(familyfile, step_name, gamma, out):
    """One density increment along gamma, with its certificate."""
    F = _load(familyfile, Family)
    try:
        g = parse_z2(gamma, F.ambient_m)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--gamma")
    new_family, certificate = INCREMENT_STEPS[step_name](F, g)
    certificate.verify(F, new_family)
    if out:
        write_text_file(out, format_family(new_family))
    click.echo(_dump({"family": new_family.to_dict(), "certificate": certificate.to_dict()}))


@cli.command()
@click.argument("setfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--c", "c_value", required=True, help="Target: the coset must have density >= c/2.")
@click.option("--epsilon", required=True, help="Uniformity level for the refinement loop.")
@click.option("--min-density", default="0", show_default=True, help="Smallest subgroup density searched.")
def regularize(setfile, c_value, epsilon, min_density):
    """Dense coset of a set in Z_2^m, refined until it is epsilon-uniform."""
    B = _load(setfile, Z2Set)
    inner = bsg_oracle(B, _rational(c_value), _rational(min_density))
    if inner is None:
        click.echo(_dump({"result": None, "reason": "no coset reaches density c/2"}))
        return
    click.echo(_dump(uniformize(B, _rational(epsilon), inner)))


@cli.command()
@click.argument("setfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--driver", type=click.Choice(DRIVERS), default="weighted", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="EngineConfig JSON.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), help="Write the trace here instead of stdout.")
@click.option("--verbose", is_flag=True, help="Print progress; combine with --trace to keep stdout clean.")
@click.option("--workers", type=click.IntRange(1), help="Worker threads; the trace does not depend on it.")
def run(setfile, driver, config_path, trace_path, verbose, workers):
    """Run a driver; the JSON-lines trace goes to stdout or --trace, the floor to stderr."""
    A = _load(setfile, Z4Set)
    cfg = EngineConfig.from_json_file(config_path) if config_path else EngineConfig()
    if workers is not None:
        cfg.workers = workers
    if verbose:
        cfg.verbose = True
        cfg.print_config()
    result, lines = run_driver(driver, A, cfg)
    _emit("\n".join(lines) + "\n", trace_path)
    click.echo(
        f"certified floor: {result.certified_floor} ({result.terminal_branch}, {result.steps} steps)",
        err=True,
    )


def _construct(spec: str, seed: int) -> ConstructionRecord:
    name, _, arg = spec.partition(":")
    if name == "a0" and not arg:
        return a0_record()
    if name == "moser":
        return moser_record(int(arg))
    if name == "product":
        left, sep, right = arg.partition(",")
        if not sep:
            raise click.BadParameter("product needs two files: product:<f1>,<f2>")
        return product_record(_load(left, Z4Set), _load(right, Z4Set))
    if name == "random":
        n, sep, size = arg.partition(":")
        if not sep:
            raise click.BadParameter("random needs random:<n>:<size>")
        return ConstructionRecord.of(random_set(int(n), int(size), seed), "search")
    raise click.BadParameter(f"Unknown construction '{spec}' (a0, moser:<n>, product:<f1>,<f2>, random:<n>:<size>).")


@cli.command()
@click.argument("spec")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
def construct(ctx, spec, out):
    """Emit a0, moser:<n>, product:<f1>,<f2> or random:<n>:<size> as a set file."""
    record = _construct(spec, ctx.obj["seed"])
    _emit(format_set(record.set), out)
    click.echo(f"free: {str(record.verified_free).lower()}, size {record.size}", err=True)


@cli.command()
@click.argument("n", type=int)
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--workers", type=click.IntRange(1), help="Worker threads.")
def search(n, out, workers):
    """Largest proper-progression-free set in Z_4^n."""
    record = max_free_search(n, workers=workers)
    _emit(format_set(record.set), out)
    click.echo(
        f"size {record.size}, proven maximum: {str(record.proven_maximum).lower()}, "
        f"free: {str(record.verified_free).lower()}",
        err=True,
    )


@cli.command("verify-free")
@click.argument("setfile", type=click.File("r"), default="-")
def verify_free(setfile):
    """Check a set (file or stdin) for proper three-term progressions."""
    A = parse_set_text(setfile.read())
    if not isinstance(A, Z4Set):
        raise SetFileError("verify-free needs a set in Z_4^n.")
    click.echo(f"free: {str(is_free(A)).lower()}, size {A.size}")


@cli.command()
@click.argument("tracefile", type=click.Path(exists=True, dir_okay=False))
def verify(tracefile):
    """Replay a trace and re-check its certificates and digest."""
    with open(tracefile, "r", encoding="utf-8") as f:
        report = replay_trace(f.read())
    click.echo(f"ok: {report.driver}, {report.events} events, certified floor {report.certified_floor}")


@cli.command()
@click.option("--max-n", type=click.IntRange(1, 6), default=3, show_default=True)
@click.option("--repeats", type=click.IntRange(2), default=5, show_default=True)
@click.option("--svg", type=click.Path(dir_okay=False), help="Also draw the timings to this SVG.")
@click.pass_context
def bench(ctx, max_n, repeats, svg):
    """Time the transform and counting kernels."""
    from src.bench import format_table, plot_bench, run_bench

    df = run_bench(max_n=max_n, repeats=repeats, seed=ctx.obj["seed"])
    click.echo(format_table(df))
    if svg:
        plot_bench(df, svg)


def run_cli(argv: Optional[List[str]] = None) -> int:
    try:
        result = cli.main(args=argv, prog_name="z4roth", standalone_mode=False)
    except TheoremFalsificationError as e:
        click.echo(f"theorem falsification: {e}", err=True)
        try:
            click.echo(_dump(e.state), err=True)
        except TypeError:
            click.echo(repr(e.state), err=True)
        return EXIT_FALSIFIED
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return EXIT_DOMAIN_ERROR
    except click.ClickException as e:
        e.show()
        return EXIT_DOMAIN_ERROR
    except (ValueError, InternalConsistencyError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_DOMAIN_ERROR
    return result if isinstance(result, int) else EXIT_OK


def main():
    sys.exit(run_cli())
