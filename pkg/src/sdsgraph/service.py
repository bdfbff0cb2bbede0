"""HTTP JSON API: ingestion, catalog search, cart sessions, cover
sheets, and the hazard network export.

Single logical writer: mutations go through the store's lock; reads use
immutable snapshots. Carts are in-memory sessions with a TTL, not domain
data, and are not persisted.
"""

from __future__ import annotations

import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from sdsgraph.coversheet import (
    CoverSheet,
    ProductSelection,
    UnknownSdsIdError,
    build_cover_sheet,
    compound_hazards_query,
    export_network,
    render_html,
    render_markdown,
    sheet_to_dict,
)
from sdsgraph.rdfio import RdfSyntaxError
from sdsgraph.sds import SchemaViolation, SdsError
from sdsgraph.sparql import evaluate_query
from sdsgraph.store import Assets, Store
from sdsgraph.vocab import DATA

DEFAULT_CART_TTL_SECONDS = 24 * 3600


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8021"
    data_dir: str | None = None
    hgen_dir: str | None = None
    cart_ttl_seconds: int = DEFAULT_CART_TTL_SECONDS
    shared_secret: str | None = None
    webui_dir: str | None = None

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


class ConfigError(ValueError):
    pass


def load_config(path: str | Path | None = None) -> ServiceConfig:
    """Key=value config file, overridden by SDSGRAPH_* environment vars."""
    config = ServiceConfig()
    if path is not None:
        for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            _apply_config(config, key.strip(), value.strip(), f"{path}:{line_no}")
    for key in ("listen", "data_dir", "hgen_dir", "cart_ttl_seconds", "shared_secret", "webui_dir"):
        env = os.environ.get("SDSGRAPH_" + key.upper())
        if env is not None:
            _apply_config(config, key, env, "environment")
    return config


def _apply_config(config: ServiceConfig, key: str, value: str, where: str) -> None:
    if key == "listen":
        config.listen = value
    elif key == "data_dir":
        config.data_dir = value or None
    elif key == "hgen_dir":
        config.hgen_dir = value or None
    elif key == "cart_ttl_seconds":
        try:
            config.cart_ttl_seconds = int(value)
        except ValueError:
            raise ConfigError(f"{where}: cart_ttl_seconds must be an integer") from None
    elif key == "shared_secret":
        config.shared_secret = value or None
    elif key == "webui_dir":
        config.webui_dir = value or None
    else:
        raise ConfigError(f"{where}: unknown config key {key!r}")


@dataclass
class CartSession:
    cart_id: str
    items: list[str] = field(default_factory=list)
    created_at: str = ""
    touched: float = 0.0

    def to_dict(self) -> dict:
        return {"cartId": self.cart_id, "items": list(self.items), "createdAt": self.created_at}


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=status)


def create_app(store: Store, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="sdsgraph", version="0.1.0")
    carts: dict[str, CartSession] = {}
    sheets: dict[str, CoverSheet] = {}

    def prune_carts() -> None:
        cutoff = time.time() - config.cart_ttl_seconds
        for cart_id in [cid for cid, c in carts.items() if c.touched < cutoff]:
            del carts[cart_id]

    def get_cart(cart_id: str) -> CartSession | None:
        prune_carts()
        cart = carts.get(cart_id)
        if cart is not None:
            cart.touched = time.time()
        return cart

    if config.shared_secret:
        @app.middleware("http")
        async def check_secret(request: Request, call_next):
            if request.headers.get("x-auth-token") != config.shared_secret:
                return JSONResponse({"error": "unauthorized"}, status_code=401)
            return await call_next(request)

    # -- ingestion ---------------------------------------------------------

    @app.post("/sds")
    async def upload_sds(request: Request):
        content_type = request.headers.get("content-type", "application/json")
        body = (await request.body()).decode("utf-8", errors="replace")
        kind = "text" if content_type.startswith("text/plain") else "json"
        try:
            result = store.ingest(body, content_type=kind)
        except SchemaViolation as exc:
            return _error(400, "schema-violation", field=exc.field, reason=exc.reason)
        except (SdsError, RdfSyntaxError) as exc:
            return _error(400, "schema-violation", reason=str(exc))
        payload = {
            "sdsId": result.sds_id,
            "status": result.status,
            "annotationMisses": result.annotation_misses,
        }
        if result.report is not None:
            payload["validation"] = {
                "conforms": result.report.conforms,
                "violations": [
                    {
                        "focusNode": getattr(r.focus_node, "value", str(r.focus_node)),
                        "path": r.path,
                        "constraintComponent": r.constraint_component,
                        "message": r.message,
                    }
                    for r in result.report.violations
                ],
            }
        if result.status == "quarantined":
            return JSONResponse(payload, status_code=422)
        payload["inference"] = {"addedTriples": result.inference_added}
        return JSONResponse(payload, status_code=201 if result.status == "created" else 200)

    # -- catalog -----------------------------------------------------------

    @app.get("/sds")
    def catalog(filter: str = "", limit: int | None = None):
        entries = store.search(filter, limit=limit)
        return {"entries": [e.to_dict() for e in entries]}

    # -- carts ---------------------------------------------------------------

    @app.post("/carts", status_code=201)
    def create_cart():
        prune_carts()
        cart = CartSession(
            cart_id=uuid.uuid4().hex[:12],
            created_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            touched=time.time(),
        )
        carts[cart.cart_id] = cart
        return cart.to_dict()

    @app.get("/carts/{cart_id}")
    def show_cart(cart_id: str):
        cart = get_cart(cart_id)
        if cart is None:
            return _error(404, "unknown cart")
        return cart.to_dict()

    @app.put("/carts/{cart_id}/items")
    async def update_cart(cart_id: str, request: Request):
        cart = get_cart(cart_id)
        if cart is None:
            return _error(404, "unknown cart")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "invalid JSON body")
        if not isinstance(body, dict) or ("add" in body) == ("remove" in body):
            return _error(400, "body must contain exactly one of 'add' or 'remove'")
        if "add" in body:
            sds_id = body["add"]
            if sds_id not in store.records:
                return _error(409, "unknown sdsId", sdsId=sds_id)
            if sds_id not in cart.items:
                cart.items.append(sds_id)
        else:
            sds_id = body["remove"]
            if sds_id in cart.items:
                cart.items.remove(sds_id)
        return cart.to_dict()

    # -- cover sheets ---------------------------------------------------------

    @app.post("/carts/{cart_id}/coversheet")
    async def generate_coversheet(cart_id: str, request: Request):
        cart = get_cart(cart_id)
        if cart is None:
            return _error(404, "unknown cart")
        if not cart.items:
            return _error(409, "cart is empty")
        try:
            body = await request.json()
        except Exception:
            body = {}
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        product_name = body.get("productName") or "Unnamed Product"
        hgen_name = body.get("hgenList") or "ghs-rev10"
        hgen = store.assets.hgen_lists.get(hgen_name)
        if hgen is None:
            return _error(404, "unknown hgen list", name=hgen_name)
        latest_only = bool(body.get("latestOnly", False))
        selection = ProductSelection(product_name, tuple(cart.items))
        try:
            sheet = build_cover_sheet(
                selection, store.snapshot(), hgen, latest_only=latest_only
            )
        except UnknownSdsIdError as exc:
            return _error(409, "unknown sdsId", missing=exc.missing)
        sheet_id = uuid.uuid4().hex[:12]
        sheets[sheet_id] = sheet
        payload = sheet_to_dict(sheet)
        payload["links"] = {
            "json": f"/coversheets/{sheet_id}",
            "markdown": f"/coversheets/{sheet_id}.md",
            "html": f"/coversheets/{sheet_id}.html",
        }
        return JSONResponse(
            payload, status_code=201, headers={"Location": f"/coversheets/{sheet_id}"}
        )

    @app.get("/coversheets/{sheet_id}")
    def coversheet_json(sheet_id: str):
        if sheet_id.endswith(".md"):
            return coversheet_markdown(sheet_id.removesuffix(".md"))
        if sheet_id.endswith(".html"):
            return coversheet_html(sheet_id.removesuffix(".html"))
        sheet = sheets.get(sheet_id)
        if sheet is None:
            return _error(404, "unknown cover sheet")
        return sheet_to_dict(sheet)

    def coversheet_markdown(sheet_id: str):
        sheet = sheets.get(sheet_id)
        if sheet is None:
            return _error(404, "unknown cover sheet")
        return PlainTextResponse(render_markdown(sheet), media_type="text/markdown")

    def coversheet_html(sheet_id: str):
        sheet = sheets.get(sheet_id)
        if sheet is None:
            return _error(404, "unknown cover sheet")
        return HTMLResponse(render_html(sheet))

    # -- compound hazards (the per-compound display query) ---------------------

    @app.get("/compounds/{compound_id}/hazards")
    def compound_hazards(compound_id: str, lang: str = "en"):
        compound_iri = DATA + "compound/" + compound_id
        known = {record.compound_id for record in store.records.values()}
        if compound_iri not in known:
            return _error(404, "unknown compound")
        rows = evaluate_query(
            store.snapshot().graph, compound_hazards_query(compound_iri, lang=lang)
        )
        return {
            "rows": [
                {
                    "hazard": row["hazard"].value,
                    "prefLabel": row["prefLabel"].lexical,
                    "labelDisplay": row["labelDisplay"].lexical,
                }
                for row in rows
            ]
        }

    # -- network ----------------------------------------------------------------

    @app.get("/network")
    def network(cart: str = ""):
        session = get_cart(cart)
        if session is None:
            return _error(404, "unknown cart")
        if not session.items:
            return _error(409, "cart is empty")
        selection = ProductSelection("cart " + session.cart_id, tuple(session.items))
        try:
            return export_network(selection, store.snapshot())
        except UnknownSdsIdError as exc:
            return _error(409, "unknown sdsId", missing=exc.missing)

    if config.webui_dir and Path(config.webui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.webui_dir, html=True), name="webui")

    return app


def build_store(config: ServiceConfig) -> Store:
    assets = Assets.bundled(hgen_dir=Path(config.hgen_dir) if config.hgen_dir else None)
    return Store(assets, data_dir=config.data_dir)


def run(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(build_store(config), config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
