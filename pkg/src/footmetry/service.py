"""HTTP surface over the measurement engine.

Single process, in-memory state: uploaded images, computed masks, a
versioned session config with compare-and-set updates, and a small job
registry for threshold searches that exceed the synchronous budget. The
endpoints call exactly the same functions the CLI does.
"""

import base64
import binascii
import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout

from fastapi import Body, FastAPI, HTTPException, Response

from . import calibration
from .classical import MethodId, classical_threshold
from .errors import FootmetryError
from .imaging import GrayImage, Mask, histogram, load_gray, mask_to_png
from .measure import MeasureParams, measure_foot
from .soit import SearchConfig, binarize, soit_search

_SEARCH_FIELDS = ("lo", "hi", "step", "min_frac", "max_frac", "edge_weight", "polarity", "literal_divisor")
_MEASURE_FIELDS = ("background", "delta", "curve_fraction", "bias_correction_cm", "split_row")


def _default_config() -> dict:
    cfg = SearchConfig()
    return {
        "version": 1,
        "background": None,
        "delta": 50,
        "curve_fraction": 0.5,
        "bias_correction_cm": 0.0,
        "split_row": None,
        "search": {f: getattr(cfg, f) for f in _SEARCH_FIELDS},
        "profile_path": None,
        "refresh_plots": True,
    }


class _State:
    def __init__(self, sync_budget_s: float):
        self.lock = threading.Lock()
        self.images: dict[str, GrayImage] = {}
        self.masks: dict[str, Mask] = {}
        self.jobs: dict[str, dict] = {}
        self.profile: calibration.CalibrationProfile | None = None
        self.config = _default_config()
        self.sync_budget_s = sync_budget_s
        self.executor = ThreadPoolExecutor(max_workers=2)
        self._counter = itertools.count(1)

    def next_id(self, prefix: str) -> str:
        return f"{prefix}-{next(self._counter)}"


def _bad(detail: str, code: int = 400):
    raise HTTPException(status_code=code, detail=detail)


def _get_image(state: _State, payload: dict) -> GrayImage:
    image_id = payload.get("image_id")
    if not isinstance(image_id, str):
        _bad("image_id (string) is required")
    with state.lock:
        img = state.images.get(image_id)
    if img is None:
        _bad(f"unknown image_id {image_id!r}", 404)
    return img


def _search_config(fields: dict) -> SearchConfig:
    try:
        return SearchConfig(**fields)
    except (TypeError, ValueError) as e:
        _bad(f"invalid search parameters: {e}")


def _merged_search(state: _State, payload: dict) -> SearchConfig:
    with state.lock:
        fields = dict(state.config["search"])
    for f in _SEARCH_FIELDS:
        if f in payload:
            fields[f] = payload[f]
    return _search_config(fields)


def _run_threshold(state: _State, img: GrayImage, payload: dict, progress=None) -> dict:
    method = payload.get("method", "soit")
    include_curve = bool(payload.get("include_curve", True))
    total = img.height * img.width

    if method == "soit":
        cfg = _merged_search(state, payload)
        result = soit_search(img, cfg, progress=progress)
        mask = result.mask
        out = {
            "method": "soit",
            "threshold": result.best.threshold,
            "z": result.best.z,
            "nac_fraction": result.best.nac / total,
            "feasible": result.best.feasible,
        }
        if include_curve:
            out["curve"] = [
                {
                    "threshold": rep.threshold,
                    "z": rep.z,
                    "nac_fraction": rep.nac / total,
                    "feasible": rep.feasible,
                }
                for rep in result.curve
            ]
    else:
        params = {}
        if "fraction" in payload:
            params["fraction"] = payload["fraction"]
        if "alpha" in payload:
            params["alpha"] = payload["alpha"]
        if "variant" in payload:
            params["variant"] = payload["variant"]
        try:
            t = classical_threshold(histogram(img), method, **params)
        except (ValueError, TypeError) as e:
            _bad(str(e))
        polarity = payload.get("polarity", "dark")
        mask = binarize(img, t, polarity)
        out = {
            "method": MethodId(method).value,
            "threshold": t,
            "nac_fraction": mask.count() / total,
        }

    mask_id = state.next_id("mask")
    with state.lock:
        state.masks[mask_id] = mask
    out["mask_id"] = mask_id
    out["mask_url"] = f"/masks/{mask_id}"
    return out


def _measure_params(state: _State, payload: dict) -> MeasureParams:
    with state.lock:
        cfg = {k: state.config[k] for k in _MEASURE_FIELDS}
    for f in _MEASURE_FIELDS:
        if f in payload:
            cfg[f] = payload[f]
    try:
        return MeasureParams(search=_merged_search(state, payload), **cfg)
    except (TypeError, ValueError) as e:
        _bad(f"invalid measure parameters: {e}")


def _measurement_payload(m, include_curve: bool = True) -> dict:
    diagnostics = dict(m.diagnostics)
    if not include_curve:
        diagnostics.pop("curve", None)
    return {
        "length_side_cm": m.length_side_cm,
        "length_under_cm": m.length_under_cm,
        "height_cm": m.height_cm,
        "width_cm": m.width_cm,
        "distance_to_background_px": m.distance_to_background_px,
        "upper_curve": [[c, r] for c, r in m.upper_curve],
        "diagnostics": diagnostics,
    }


def _validate_config_fields(doc: dict) -> None:
    bg = doc.get("background")
    if bg is not None and (not isinstance(bg, int) or not 0 <= bg <= 255):
        _bad(f"background must be null or an integer in [0, 255], got {bg!r}")
    if not 0 < doc.get("delta", 50) < 255:
        _bad(f"delta must be in (0, 255), got {doc.get('delta')!r}")
    cf = doc.get("curve_fraction", 0.5)
    if not isinstance(cf, (int, float)) or not 0.0 < cf <= 1.0:
        _bad(f"curve_fraction must be in (0, 1], got {cf!r}")
    sr = doc.get("split_row")
    if sr is not None and (not isinstance(sr, int) or sr < 1):
        _bad(f"split_row must be null or a positive integer, got {sr!r}")
    if not isinstance(doc.get("refresh_plots", True), bool):
        _bad("refresh_plots must be a boolean")
    pp = doc.get("profile_path")
    if pp is not None and not isinstance(pp, str):
        _bad(f"profile_path must be null or a string, got {pp!r}")
    _search_config(doc.get("search", {}))


def create_app(sync_budget_s: float = 1.0) -> FastAPI:
    app = FastAPI(title="footmetry", version="0.1.0")
    state = _State(sync_budget_s=sync_budget_s)
    app.state.engine = state

    try:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
        )
    except ImportError:
        pass

    @app.post("/images", status_code=201)
    def upload_image(payload: dict = Body(...)):
        data64 = payload.get("data_base64")
        if not isinstance(data64, str):
            _bad("data_base64 (string) is required")
        try:
            raw = base64.b64decode(data64, validate=True)
        except (binascii.Error, ValueError):
            _bad("data_base64 is not valid base64")
        try:
            img = load_gray(raw)
        except FootmetryError as e:
            _bad(str(e))
        image_id = state.next_id("img")
        with state.lock:
            state.images[image_id] = img
        return {"image_id": image_id, "width": img.width, "height": img.height}

    @app.post("/threshold")
    def threshold(payload: dict = Body(...)):
        img = _get_image(state, payload)
        method = payload.get("method", "soit")
        if method != "soit":
            try:
                MethodId(method)
            except ValueError:
                _bad(f"unknown method {method!r}")

        job_id = state.next_id("job")
        rec = {"status": "running", "progress": 0.0, "result": None, "error": None}

        def work():
            try:
                rec["result"] = _run_threshold(
                    state, img, payload, progress=lambda f: rec.__setitem__("progress", f)
                )
                rec["status"] = "done"
                rec["progress"] = 1.0
            except HTTPException as e:
                rec["status"] = "error"
                rec["error"] = e.detail
            except FootmetryError as e:
                rec["status"] = "error"
                rec["error"] = str(e)

        fut = state.executor.submit(work)
        try:
            fut.result(timeout=state.sync_budget_s)
        except FutureTimeout:
            with state.lock:
                state.jobs[job_id] = rec
            return Response(
                content=f'{{"job_id": "{job_id}", "status_url": "/jobs/{job_id}"}}',
                status_code=202,
                media_type="application/json",
            )
        if rec["status"] == "error":
            _bad(rec["error"])
        return rec["result"]

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        with state.lock:
            rec = state.jobs.get(job_id)
        if rec is None:
            _bad(f"unknown job {job_id!r}", 404)
        return {
            "status": rec["status"],
            "progress": rec["progress"],
            "result": rec["result"],
            "error": rec["error"],
        }

    @app.get("/masks/{mask_id}")
    def get_mask(mask_id: str):
        with state.lock:
            mask = state.masks.get(mask_id)
        if mask is None:
            _bad(f"unknown mask {mask_id!r}", 404)
        return Response(content=mask_to_png(mask), media_type="image/png")

    @app.post("/calibrate")
    def calibrate(payload: dict = Body(...)):
        obs = payload.get("observations")
        if not isinstance(obs, list) or not obs:
            _bad("observations (non-empty list) is required")
        by_view: dict[str, list[calibration.ScaleObservation]] = {}
        for i, o in enumerate(obs):
            try:
                view = o["view"]
                item = calibration.ScaleObservation(float(o["distance_px"]), float(o["px_per_cm"]))
            except (KeyError, TypeError, ValueError):
                _bad(f"observation {i} needs view, distance_px, px_per_cm")
            by_view.setdefault(view, []).append(item)
        try:
            profile = calibration.build_profile(by_view)
        except (FootmetryError, ValueError) as e:
            _bad(str(e))
        with state.lock:
            state.profile = profile
        return {
            "views": {
                v: {"slope": fn.slope, "intercept": fn.intercept}
                for v, fn in profile.functions.items()
            },
            "profile": calibration.dumps(profile),
        }

    def _measure_one(img: GrayImage, payload: dict, include_curve: bool = True) -> dict:
        with state.lock:
            profile = state.profile
        if profile is None:
            _bad("no calibration profile loaded; POST /calibrate first or set profile_path")
        params = _measure_params(state, payload)
        try:
            m = measure_foot(img, profile, params)
        except FootmetryError as e:
            _bad(str(e))
        return _measurement_payload(m, include_curve=include_curve)

    @app.post("/measure")
    def measure(payload: dict = Body(...)):
        img = _get_image(state, payload)
        return _measure_one(img, payload)

    @app.post("/batch")
    def batch(payload: dict = Body(...)):
        ids = payload.get("image_ids")
        if not isinstance(ids, list) or not ids:
            _bad("image_ids (non-empty list) is required")
        with state.lock:
            include_curve = bool(state.config["refresh_plots"])
        results = []
        for image_id in ids:
            with state.lock:
                img = state.images.get(image_id) if isinstance(image_id, str) else None
            if img is None:
                results.append({"image_id": image_id, "ok": False, "error": f"unknown image_id {image_id!r}"})
                continue
            try:
                row = _measure_one(img, payload, include_curve=include_curve)
            except HTTPException as e:
                results.append({"image_id": image_id, "ok": False, "error": e.detail})
                continue
            results.append({"image_id": image_id, "ok": True, "measurements": row})
        return {"results": results}

    @app.get("/config")
    def get_config():
        with state.lock:
            return dict(state.config)

    @app.put("/config")
    def put_config(payload: dict = Body(...)):
        if "version" not in payload:
            _bad("version is required for compare-and-set updates")
        version = payload["version"]
        fields = {k: v for k, v in payload.items() if k != "version"}
        unknown = set(fields) - set(_default_config())
        if unknown:
            _bad(f"unknown config field(s): {', '.join(sorted(unknown))}")
        with state.lock:
            if version != state.config["version"]:
                raise HTTPException(
                    status_code=409,
                    detail=f"version conflict: config is at {state.config['version']}, update sent {version}",
                )
            merged = dict(state.config)
            for k, v in fields.items():
                if k == "search":
                    if not isinstance(v, dict):
                        _bad("search must be an object")
                    merged["search"] = {**merged["search"], **v}
                else:
                    merged[k] = v
            _validate_config_fields(merged)
            if "profile_path" in fields:
                if fields["profile_path"] is None:
                    state.profile = None
                else:
                    try:
                        state.profile = calibration.load(fields["profile_path"])
                    except (OSError, ValueError) as e:
                        _bad(f"cannot load calibration profile: {e}")
            merged["version"] = state.config["version"] + 1
            state.config = merged
            return dict(merged)

    return app


app = create_app()
