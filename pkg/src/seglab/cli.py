"""Command-line front door: ingest, build, compare, serve.

The workspace directory comes from --workspace or the SEGLAB_WORKSPACE
environment variable (default ./seglab-workspace).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pipeline
from .errors import SeglabError
from .store import BuildConfig, Workspace, compare_versions, version_to_doc

WORKSPACE_ENVVAR = "SEGLAB_WORKSPACE"


def _workspace(path: str | None) -> Workspace:
    return Workspace(path or "./seglab-workspace")


workspace_option = click.option(
    "--workspace",
    envvar=WORKSPACE_ENVVAR,
    default=None,
    help="Workspace directory (default: $SEGLAB_WORKSPACE or ./seglab-workspace).",
)


@click.group()
def main():
    """Customer segmentation workbench."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--name", default=None, help="Display name for the dataset.")
@workspace_option
def ingest(file, name, workspace):
    """Register a transaction CSV in the workspace and report a summary."""
    ws = _workspace(workspace)
    content = Path(file).read_bytes()
    try:
        record = ws.register_dataset(content, name=name or Path(file).name)
    except SeglabError as exc:
        raise click.ClickException(str(exc))
    summary = ws.dataset_summary(record["dataset_id"])
    parsed = ws.load_dataset(record["dataset_id"])
    click.echo(json.dumps({**summary, "sha256": record["sha256"]}, indent=2))
    if parsed.rejects:
        click.echo(f"{len(parsed.rejects)} row(s) rejected:", err=True)
        for reject in parsed.rejects[:20]:
            click.echo(f"  row {reject.row_number}: {reject.reason}", err=True)
        if len(parsed.rejects) > 20:
            click.echo(f"  ... and {len(parsed.rejects) - 20} more", err=True)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@workspace_option
def build(config_path, workspace):
    """Build a segmentation model version from a JSON config file."""
    ws = _workspace(workspace)
    doc = json.loads(Path(config_path).read_text())
    dataset_path = doc.pop("dataset_path", None)
    if dataset_path is not None and "dataset_id" not in doc:
        record = ws.register_dataset(
            Path(dataset_path).read_bytes(), name=Path(dataset_path).name
        )
        doc["dataset_id"] = record["dataset_id"]
        click.echo(f"registered dataset {record['dataset_id']}", err=True)
    try:
        config = BuildConfig.from_doc(doc)
    except (KeyError, ValueError, SeglabError) as exc:
        raise click.ClickException(f"bad config: {exc}")
    errors = pipeline.validate_config(ws, config)
    if errors:
        for error in errors:
            click.echo(f"{error['field']}: {error['message']}", err=True)
        raise click.ClickException("build request failed validation")
    try:
        version = pipeline.build_and_save(
            ws, config, progress=lambda note: click.echo(f"... {note}", err=True)
        )
    except SeglabError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(version_to_doc(version), indent=2))
    click.echo(f"saved version {version.version_id}", err=True)


@main.command()
@click.argument("a", type=int)
@click.argument("b", type=int)
@workspace_option
def compare(a, b, workspace):
    """Compare two stored model versions."""
    ws = _workspace(workspace)
    try:
        report = compare_versions(ws, a, b)
    except SeglabError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(report.to_doc(), indent=2))


@main.command()
@click.option("--port", default=8000, type=int, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--ui-dir",
    default=None,
    type=click.Path(file_okay=False),
    help="Serve a built frontend from this directory (optional).",
)
@workspace_option
def serve(port, host, ui_dir, workspace):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(workspace or "./seglab-workspace", ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
