"""HTTP service: the /api/v1 contract surface the operator UI consumes."""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse

from .. import pipeline
from ..errors import (
    NotFoundError,
    SchemaError,
    SourceHashMismatchError,
    UndefinedMetricError,
    ValidationError,
)
from ..explain import DEFAULT_RULE_THRESHOLD, ExplainConfig, characterize_cluster, explain_instance
from ..features import FeatureMatrix
from ..ingest import customer_history, filter_spec_from_doc
from ..label import (
    UNSEGMENTED,
    LabelSpec,
    OverrideScope,
    cluster_level_labels,
    known_label_names,
    make_override,
    relabel_cluster,
)
from ..store import BuildConfig, ModelVersion, Workspace, compare_versions, version_to_doc
from .jobs import JobQueue
from .schemas import BuildRequestBody, LabelsUpdateBody, OverrideBody

MAX_REJECTS_REPORTED = 100


def create_app(workspace_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="seglab", version="0.1.0")
    workspace = Workspace(workspace_dir)
    jobs = JobQueue()
    matrices: dict[int, FeatureMatrix] = {}
    matrix_lock = threading.Lock()
    idempotency: dict[tuple[str, str], JSONResponse] = {}
    idempotency_lock = threading.Lock()

    app.state.workspace = workspace
    app.state.jobs = jobs

    # -- error mapping ---------------------------------------------------

    @app.exception_handler(ValidationError)
    async def _validation(request: Request, exc: ValidationError):
        return JSONResponse(
            status_code=400, content={"detail": str(exc), "field": exc.field}
        )

    @app.exception_handler(SchemaError)
    async def _schema(request: Request, exc: SchemaError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(UndefinedMetricError)
    async def _undefined(request: Request, exc: UndefinedMetricError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(SourceHashMismatchError)
    async def _hash_mismatch(request: Request, exc: SourceHashMismatchError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    # -- helpers -----------------------------------------------------------

    def version_matrix(version: ModelVersion) -> FeatureMatrix:
        """Feature matrices are not persisted inside versions; rebuild them
        deterministically from the stored config (and cache per version)."""
        with matrix_lock:
            cached = matrices.get(version.version_id)
        if cached is not None:
            return cached
        matrix = pipeline.build_matrix(workspace, version.config)
        if matrix.customer_ids != version.model.customer_ids:
            raise SourceHashMismatchError(
                f"rebuilt matrix does not match version {version.version_id} assignments"
            )
        with matrix_lock:
            matrices[version.version_id] = matrix
        return matrix

    def version_detail(version: ModelVersion) -> dict:
        doc = version_to_doc(version)
        doc["effective_labels"] = version.effective_labels()
        return doc

    def replay_cached(request: Request, key: str | None):
        if key is None:
            return None
        with idempotency_lock:
            return idempotency.get((request.url.path, key))

    def cache_response(request: Request, key: str | None, response: JSONResponse) -> JSONResponse:
        if key is not None:
            with idempotency_lock:
                idempotency[(request.url.path, key)] = response
        return response

    # -- datasets ----------------------------------------------------------

    @app.post("/api/v1/datasets")
    async def upload_dataset(request: Request, name: str | None = None):
        content = await request.body()
        if not content:
            raise ValidationError("empty upload", field="body")
        record = workspace.register_dataset(content, name=name)
        parsed = workspace.load_dataset(record["dataset_id"])
        rejects = [
            {"row_number": r.row_number, "reason": r.reason}
            for r in parsed.rejects[:MAX_REJECTS_REPORTED]
        ]
        return {
            **record,
            "rejects": rejects,
            "rejects_truncated": len(parsed.rejects) > MAX_REJECTS_REPORTED,
            "summary": workspace.dataset_summary(record["dataset_id"]),
        }

    @app.get("/api/v1/datasets/{dataset_id}/summary")
    def get_dataset_summary(dataset_id: str):
        return workspace.dataset_summary(dataset_id)

    # -- builds ------------------------------------------------------------

    def _to_config(body: BuildRequestBody) -> tuple[BuildConfig | None, list[dict]]:
        try:
            spec_filter = filter_spec_from_doc(body.filter.model_dump())
        except (ValidationError, ValueError) as exc:
            return None, [{"field": "filter", "message": str(exc)}]
        try:
            specs = (
                [LabelSpec(s.label_name, s.levels) for s in body.label_specs]
                if body.label_specs is not None
                else None
            )
        except ValidationError as exc:
            return None, [{"field": "label_specs", "message": str(exc)}]
        config = BuildConfig(
            dataset_id=body.dataset_id,
            filter=spec_filter,
            features=list(body.features),
            algorithm=body.algorithm,
            params=dict(body.params),
            label_specs=specs,
        )
        return config, pipeline.validate_config(workspace, config)

    @app.post("/api/v1/models")
    def submit_build(
        request: Request,
        body: BuildRequestBody,
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        cached = replay_cached(request, idempotency_key)
        if cached is not None:
            return cached
        config, errors = _to_config(body)
        if errors:
            job = jobs.create_failed(
                {"message": "build request failed validation", "fields": errors}
            )
        else:

            def work(job) -> int:
                version = pipeline.build_and_save(
                    workspace,
                    config,
                    progress=lambda note: setattr(job, "progress", note),
                )
                return version.version_id

            job = jobs.submit(work)
        response = JSONResponse(status_code=202, content=job.to_doc())
        return cache_response(request, idempotency_key, response)

    @app.get("/api/v1/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job {job_id!r}")
        return job.to_doc()

    # -- model reads ---------------------------------------------------------

    @app.get("/api/v1/models/{version_id}")
    def get_model(version_id: int):
        return version_detail(workspace.load_version(version_id))

    @app.get("/api/v1/models/{version_id}/clusters")
    def get_clusters(version_id: int, rule_threshold: float = DEFAULT_RULE_THRESHOLD):
        version = workspace.load_version(version_id)
        current = cluster_level_labels(
            version.labels, version.model.n_clusters, version.overrides
        )
        rules = characterize_cluster(version.model, version.stats, rule_threshold)
        clusters = []
        for entry in version.stats.clusters:
            clusters.append(
                {
                    "cluster": entry.cluster,
                    "label": current[entry.cluster],
                    "size": entry.size,
                    "feature_stats": entry.feature_stats,
                    "centroid_z": entry.centroid_z,
                    "profit_share": entry.profit_share,
                    "volume_share": entry.volume_share,
                    "rules": [r.to_doc() for r in rules.rules[entry.cluster]],
                }
            )
        return {
            "version_id": version.version_id,
            "rule_threshold": rule_threshold,
            "clusters": clusters,
            "noise_size": version.stats.noise_size,
            "noise_label": UNSEGMENTED,
        }

    @app.get("/api/v1/models/{version_id}/scatter")
    def get_scatter(
        version_id: int,
        x: str,
        y: str,
        z: str | None = None,
        space: str = "standardized",
    ):
        version = workspace.load_version(version_id)
        axes = [x, y] + ([z] if z else [])
        if len(set(axes)) != len(axes):
            raise ValidationError("scatter axes must be distinct", field="axes")
        for axis in axes:
            if axis not in version.model.feature_ids:
                raise ValidationError(
                    f"axis {axis!r} is not a model feature", field="axes"
                )
        if space not in ("raw", "standardized"):
            raise ValidationError("space must be 'raw' or 'standardized'", field="space")
        matrix = version_matrix(version)
        grid = matrix.raw if space == "raw" else matrix.require_standardized()
        cols = [matrix.feature_index(a) for a in axes]
        effective = version.effective_labels()
        points = [
            {
                "customer_id": cid,
                "values": [float(grid[i, j]) for j in cols],
                "cluster": int(version.model.labels[i]),
                "label": effective[cid],
            }
            for i, cid in enumerate(matrix.customer_ids)
        ]
        return {
            "version_id": version.version_id,
            "axes": axes,
            "space": space,
            "points": points,
        }

    # -- labeling and overrides ---------------------------------------------

    @app.post("/api/v1/models/{version_id}/labels")
    def post_labels(
        version_id: int,
        body: LabelsUpdateBody,
        request: Request,
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        cached = replay_cached(request, idempotency_key)
        if cached is not None:
            return cached
        if (body.label_specs is None) == (body.relabel is None):
            raise ValidationError(
                "provide exactly one of 'label_specs' (post-discovery labeling) "
                "or 'relabel' (rename one cluster)",
                field="body",
            )
        if body.label_specs is not None:
            specs = [LabelSpec(s.label_name, s.levels) for s in body.label_specs]
            version = pipeline.complete_labels(workspace, version_id, specs)
        else:
            version = workspace.load_version(version_id)
            relabel = body.relabel
            if "cluster" not in relabel or "new_name" not in relabel:
                raise ValidationError(
                    "relabel needs {'cluster': int, 'new_name': str}", field="relabel"
                )
            record = relabel_cluster(
                version.overrides,
                version.labels,
                version.model.n_clusters,
                int(relabel["cluster"]),
                str(relabel["new_name"]),
                author=body.author,
            )
            version = workspace.append_override(version_id, record)
        response = JSONResponse(status_code=200, content=version_detail(version))
        return cache_response(request, idempotency_key, response)

    @app.post("/api/v1/models/{version_id}/overrides")
    def post_override(
        version_id: int,
        body: OverrideBody,
        request: Request,
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        cached = replay_cached(request, idempotency_key)
        if cached is not None:
            return cached
        version = workspace.load_version(version_id)
        scope = OverrideScope.from_doc(body.scope)
        record = make_override(
            scope=scope,
            target_label=body.target_label,
            known_customers=version.model.customer_ids,
            known_labels=known_label_names(
                version.labels,
                version.model.n_clusters,
                version.overrides,
                has_noise=version.model.algorithm == "dbscan",
            ),
            n_clusters=version.model.n_clusters,
            author=body.author,
        )
        version = workspace.append_override(version_id, record)
        response = JSONResponse(status_code=200, content=version_detail(version))
        return cache_response(request, idempotency_key, response)

    # -- explanations, history, comparison ------------------------------------

    @app.get("/api/v1/models/{version_id}/explain/{customer_id}")
    def get_explanation(
        version_id: int,
        customer_id: str,
        n_samples: int = Query(default=1000, ge=2),
        kernel_width: float | None = Query(default=None, gt=0),
        seed: int = 0,
    ):
        version = workspace.load_version(version_id)
        matrix = version_matrix(version)
        explanation = explain_instance(
            version.model,
            matrix,
            customer_id,
            ExplainConfig(n_samples=n_samples, kernel_width=kernel_width, seed=seed),
        )
        return explanation.to_doc()

    @app.get("/api/v1/customers/{customer_id}/history")
    def get_history(customer_id: str, dataset: str):
        parsed = workspace.load_dataset(dataset)
        history = customer_history(parsed.transactions, customer_id)
        if not history.transactions:
            raise NotFoundError(
                f"customer {customer_id!r} has no transactions in dataset {dataset!r}"
            )
        return {
            "customer_id": customer_id,
            "dataset_id": dataset,
            "transactions": [
                {
                    "customer_id": t.customer_id,
                    "order_date": t.order_date.isoformat(),
                    "revenue": t.revenue,
                    "cost": t.cost,
                    "volume_tons": t.volume_tons,
                    "product_group": t.product_group,
                    "region": t.region,
                }
                for t in history.transactions
            ],
            "monthly": [
                {
                    "month": m.month,
                    "revenue": m.revenue,
                    "profit": m.profit,
                    "volume_tons": m.volume_tons,
                }
                for m in history.monthly
            ],
        }

    @app.get("/api/v1/compare")
    def get_comparison(a: int, b: int):
        return compare_versions(workspace, a, b).to_doc()

    # -- optional static UI ---------------------------------------------------

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
