"""Command-line entry points: select, simulate, evaluate, serve.

Exit codes: 0 success, 2 invalid input or flags, 1 runtime failure.  Every
output file carries a metadata header (tool version, parameters, seeds) so a
run can be reproduced from its own output; selection files keep their strict
one-record-per-line schema and get a ``<out>.meta.json`` sidecar instead.

Set IDSEL_LOG=debug|info|warning to control logging verbosity.
"""

from __future__ import annotations

import functools
import json
import logging
import os
import pathlib

import click

from idsel import __version__, annotation, fewshot, kernels, reports
from idsel.clustering import ClusterParams
from idsel.corpus import load_corpus, save_selection
from idsel.errors import FormatError, IdselError, ValidationError
from idsel.geometry import load_embeddings
from idsel.lexical import LexicalParams
from idsel.selectors import (
    DEFAULT_BETA,
    METHODS,
    STOCHASTIC_METHODS,
    build_order,
    lls_order,
    random_order,
)

LLS_MODE_FLAGS = {"previous": "previous_only", "all": "all_kept"}

log = logging.getLogger("idsel.cli")


def _guard(func):
    """Map library errors onto the 0/1/2 exit-code convention."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ValidationError, FormatError) as exc:
            raise click.UsageError(str(exc)) from exc
        except (IdselError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _parse_n_shots(value: str) -> tuple[int, ...]:
    try:
        grid = tuple(sorted({int(part) for part in value.split(",") if part.strip()}))
    except ValueError:
        raise click.UsageError(f"--n-shots must be a comma list of integers: {value!r}")
    if not grid or any(n < 1 for n in grid):
        raise click.UsageError(f"--n-shots values must be >= 1: {value!r}")
    return grid


def _cluster_params(min_cluster_size: int | None, min_samples: int | None):
    if min_cluster_size is None and min_samples is None:
        return None
    return ClusterParams(
        min_cluster_size=min_cluster_size if min_cluster_size is not None else 5,
        min_samples=min_samples if min_samples is not None else 5,
    )


def _load_inputs(corpus_path: str, embeddings_path: str | None):
    corpus = load_corpus(corpus_path)
    emb = load_embeddings(embeddings_path) if embeddings_path else None
    if emb is not None:
        missing = [i for i in corpus.ids() if i not in emb]
        if missing:
            raise ValidationError(
                f"{len(missing)} corpus ids missing from embeddings, "
                f"first: {missing[:3]}"
            )
    return corpus, emb


def _providers(
    methods: tuple[str, ...],
    corpus,
    emb,
    beta: float,
    lls_mode: str,
    lexical_params: LexicalParams,
    cluster_params,
    threads: int,
):
    """seed -> SelectionOrder factories; deterministic orders built once."""
    providers: dict[str, annotation.OrderProvider] = {}
    for method in methods:
        if method == "random":
            providers[method] = functools.partial(random_order, corpus)
        elif method == "lls":
            providers[method] = functools.partial(
                lls_order, corpus, beta, lexical_params, mode=lls_mode
            )
        else:
            order = build_order(
                method,
                corpus,
                emb=emb,
                cluster_params=cluster_params,
                threads=threads,
            )
            providers[method] = lambda seed, _order=order: _order
    return providers


def _resolve_methods(
    methods: tuple[str, ...], emb, context: str
) -> tuple[str, ...]:
    if methods:
        needs_emb = [m for m in methods if m in ("rss", "oc")]
        if needs_emb and emb is None:
            raise ValidationError(
                f"methods {needs_emb} require --embeddings for {context}"
            )
        return methods
    if emb is None:
        return tuple(m for m in METHODS if m in STOCHASTIC_METHODS)
    return METHODS


@click.group()
@click.version_option(version=__version__, prog_name="idsel")
def main() -> None:
    """Informed data selection for few-shot annotation."""
    level = os.environ.get("IDSEL_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


@main.command("select")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("--beta", type=float, default=DEFAULT_BETA, show_default=True)
@click.option("--lls-mode", type=click.Choice(sorted(LLS_MODE_FLAGS)), default="previous", show_default=True)
@click.option("--max-ngram", type=int, default=4, show_default=True)
@click.option("--min-cluster-size", type=int, default=None)
@click.option("--min-samples", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_guard
def cmd_select(
    corpus_path,
    embeddings_path,
    method,
    beta,
    lls_mode,
    max_ngram,
    min_cluster_size,
    min_samples,
    seed,
    threads,
    out_path,
):
    """Write a ranked selection of the corpus to OUT as JSON lines."""
    if method in ("rss", "oc") and embeddings_path is None:
        raise ValidationError(f"method {method} requires --embeddings")
    corpus, emb = _load_inputs(corpus_path, embeddings_path)
    order = build_order(
        method,
        corpus,
        emb=emb,
        seed=seed,
        beta=beta,
        lexical_params=LexicalParams(max_ngram=max_ngram),
        lls_mode=LLS_MODE_FLAGS[lls_mode],
        cluster_params=_cluster_params(min_cluster_size, min_samples),
        threads=threads,
    )
    save_selection(list(order.ranked_ids), out_path)
    log.info("select ran on the %s backend with %d threads", kernels.backend(), threads)
    # Execution details (backend, thread count) stay out of output files:
    # results are a pure function of the experiment parameters.
    meta = {
        "tool": "idsel",
        "version": __version__,
        "command": "select",
        "corpus": str(corpus_path),
        "embeddings": str(embeddings_path) if embeddings_path else None,
        "method": method,
        "params_fingerprint": order.params_fingerprint,
        "seed": seed,
        "n_ranked": len(order.ranked_ids),
        "truncated": order.truncated,
    }
    meta_path = f"{out_path}.meta.json"
    with open(meta_path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    click.echo(
        f"method={method} ranked={len(order.ranked_ids)} "
        f"truncated={order.truncated} out={out_path}"
    )


def _common_sweep_options(func):
    options = [
        click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False)),
        click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False)),
        click.option("--method", "methods", type=click.Choice(METHODS), multiple=True,
                     help="Repeatable; defaults to every applicable method."),
        click.option("--beta", type=float, default=DEFAULT_BETA, show_default=True),
        click.option("--lls-mode", type=click.Choice(sorted(LLS_MODE_FLAGS)), default="previous", show_default=True),
        click.option("--max-ngram", type=int, default=4, show_default=True),
        click.option("--min-cluster-size", type=int, default=None),
        click.option("--min-samples", type=int, default=None),
        click.option("--n-shots", "n_shots_text", default="8,16,32,64", show_default=True),
        click.option("--repeats", type=int, default=annotation.DEFAULT_REPEATS, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--threads", type=int, default=1, show_default=True),
        click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False)),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@main.command("simulate")
@_common_sweep_options
@_guard
def cmd_simulate(
    corpus_path,
    embeddings_path,
    methods,
    beta,
    lls_mode,
    max_ngram,
    min_cluster_size,
    min_samples,
    n_shots_text,
    repeats,
    seed,
    threads,
    out_path,
):
    """Sweep overannotation rate over methods and the n-shots grid."""
    grid = _parse_n_shots(n_shots_text)
    corpus, emb = _load_inputs(corpus_path, embeddings_path)
    methods = _resolve_methods(methods, emb, "simulate")
    mode = LLS_MODE_FLAGS[lls_mode]
    lex = LexicalParams(max_ngram=max_ngram)
    providers = _providers(
        methods, corpus, emb, beta, mode, lex,
        _cluster_params(min_cluster_size, min_samples), threads,
    )
    rows = annotation.sweep(
        corpus, providers, n_shots_grid=grid, repeats=repeats, base_seed=seed
    )
    meta = _sweep_meta(
        "simulate", corpus_path, embeddings_path, methods, grid, repeats, seed,
        beta, lls_mode, max_ngram, min_cluster_size, min_samples, threads,
    )
    reports.write_report(out_path, meta, rows)
    click.echo(reports.format_table(rows))
    click.echo(f"report written to {out_path}")


@main.command("evaluate")
@_common_sweep_options
@click.option("--test-file", "test_path", required=True, type=click.Path(exists=True, dir_okay=False))
@_guard
def cmd_evaluate(
    corpus_path,
    embeddings_path,
    methods,
    beta,
    lls_mode,
    max_ngram,
    min_cluster_size,
    min_samples,
    n_shots_text,
    repeats,
    seed,
    threads,
    out_path,
    test_path,
):
    """Train on simulated annotations, score accuracy/macro-F1 on a test set."""
    grid = _parse_n_shots(n_shots_text)
    if embeddings_path is None:
        raise ValidationError("evaluate requires --embeddings")
    corpus, emb = _load_inputs(corpus_path, embeddings_path)
    test = load_corpus(test_path)
    missing = [i for i in test.ids() if i not in emb]
    if missing:
        raise ValidationError(
            f"{len(missing)} test ids missing from embeddings, first: {missing[:3]}"
        )
    methods = _resolve_methods(methods, emb, "evaluate")
    mode = LLS_MODE_FLAGS[lls_mode]
    lex = LexicalParams(max_ngram=max_ngram)
    providers = _providers(
        methods, corpus, emb, beta, mode, lex,
        _cluster_params(min_cluster_size, min_samples), threads,
    )
    rows = fewshot.rq2_experiment(
        corpus, emb, providers, test,
        n_shots_grid=grid, repeats=repeats, base_seed=seed,
    )
    meta = _sweep_meta(
        "evaluate", corpus_path, embeddings_path, methods, grid, repeats, seed,
        beta, lls_mode, max_ngram, min_cluster_size, min_samples, threads,
        test_file=str(test_path),
    )
    reports.write_report(out_path, meta, rows)
    click.echo(reports.format_table(rows))
    click.echo(f"report written to {out_path}")


def _sweep_meta(
    command,
    corpus_path,
    embeddings_path,
    methods,
    grid,
    repeats,
    seed,
    beta,
    lls_mode,
    max_ngram,
    min_cluster_size,
    min_samples,
    threads,
    **extra,
):
    log.info("%s ran on the %s backend with %d threads", command, kernels.backend(), threads)
    meta = {
        "tool": "idsel",
        "version": __version__,
        "command": command,
        "corpus": str(corpus_path),
        "embeddings": str(embeddings_path) if embeddings_path else None,
        "methods": list(methods),
        "n_shots_grid": list(grid),
        "repeats": repeats,
        "base_seed": seed,
        "per_repeat_seeds": f"{seed}..{seed + repeats - 1} (stochastic methods)",
        "beta": beta,
        "lls_mode": lls_mode,
        "max_ngram": max_ngram,
        "min_cluster_size": min_cluster_size,
        "min_samples": min_samples,
    }
    meta.update(extra)
    return meta


@main.command("serve")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--journal-dir", type=click.Path(file_okay=False), default=None,
              help="Enable persistence: append-only session journals live here.")
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Serve a built UI bundle at /; defaults to ./frontend/dist when present.")
@click.option("--sync-threshold", type=int, default=2000, show_default=True,
              help="Corpora larger than this compute their order on a background worker.")
@_guard
def cmd_serve(
    corpus_path,
    embeddings_path,
    port,
    host,
    journal_dir,
    ui_dir,
    sync_threshold,
):
    """Run the annotation HTTP service (and UI if a bundle is available)."""
    import uvicorn

    from idsel.service import create_app

    corpus, emb = _load_inputs(corpus_path, embeddings_path)
    if ui_dir is None:
        candidate = pathlib.Path("frontend") / "dist"
        ui_dir = str(candidate) if candidate.is_dir() else None
    app = create_app(
        {"default": (corpus, emb)},
        journal_dir=journal_dir,
        sync_threshold=sync_threshold,
        ui_dir=ui_dir,
    )
    click.echo(f"serving corpus={corpus_path} on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
