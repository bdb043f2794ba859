"""Command-line entry point: embed a corpus file into the binary format."""

from __future__ import annotations

import click

from idsel.errors import FormatError, IdselError, ValidationError

from embed_export import ExportConfig, export_embeddings, manifest_path_for
from embed_export.backends import DEFAULT_MODEL


@click.command(name="embed-export")
@click.option("--corpus", required=True, type=click.Path(), help="JSONL corpus to embed.")
@click.option("--out", required=True, type=click.Path(), help="Binary embedding file to write.")
@click.option("--model", default=DEFAULT_MODEL, show_default=True,
              help="Model identifier; hash://<dim> selects the offline encoder.")
@click.option("--batch-size", default=32, show_default=True, type=int)
@click.option("--normalize/--no-normalize", default=True, show_default=True,
              help="L2-normalize vectors at export time.")
def main(corpus, out, model, batch_size, normalize) -> None:
    """Embed a JSONL corpus and write <out> plus <out>.manifest.json."""
    try:
        manifest = export_embeddings(
            ExportConfig(
                corpus=corpus,
                out=out,
                model=model,
                batch_size=batch_size,
                normalize=normalize,
            )
        )
    except (ValidationError, FormatError) as exc:
        raise click.UsageError(str(exc)) from exc
    except (IdselError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc
    if manifest["skipped_ids"]:
        click.echo(
            f"warning: skipped {len(manifest['skipped_ids'])} empty-text rows "
            f"(listed in {manifest_path_for(out)})",
            err=True,
        )
    click.echo(
        f"wrote {manifest['count']} embeddings (dim {manifest['dim']}) to {out}"
    )


if __name__ == "__main__":
    main()
