"""HTTP facade over a built pipeline.

Read-mostly JSON API consumed by the web UI:

* GET  /api/frames            frame metadata + thumbnail URLs
* GET  /api/graph             summary, or ?neighbors_of=i for one node's edges
* POST /api/resequence        run a walk, register it, return the record
* GET  /api/sequence/{id}     a stored run
* GET  /api/evaluate/{id}     stability/overlap report for a stored run
* GET  /thumb/{index}         PNG thumbnail (max side 128)

Walks are cheap after the first one (shared motion-distance cache), and
the sequence registry is in-memory and append-only: restart clears it.
"""

from __future__ import annotations

import math
import secrets
import threading

import cv2
import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import pipeline
from .errors import VideoReseqError

THUMB_MAX_SIDE = 128


class ResequenceRequest(BaseModel):
    start: int
    seed: int | None = None
    temperature: float = 1.0
    disable_cd: bool = False
    disable_ct: bool = False
    max_length: int | None = None


def _thumbnail_png(frame: np.ndarray) -> bytes:
    h, w = frame.shape[:2]
    scale = THUMB_MAX_SIDE / max(h, w)
    if scale < 1.0:
        frame = cv2.resize(frame, (max(1, round(w * scale)), max(1, round(h * scale))),
                           interpolation=cv2.INTER_AREA)
    bgr = cv2.cvtColor((np.round(frame * 255.0)).astype(np.uint8), cv2.COLOR_RGB2BGR)
    ok, buf = cv2.imencode(".png", bgr)
    if not ok:
        raise RuntimeError("thumbnail encoding failed")
    return bytes(buf)


def create_app(
    artifacts: pipeline.PipelineArtifacts | None = None,
    ui_dir: str | None = None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    app = FastAPI(title="videoreseq")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = app.state
    state.artifacts = artifacts
    state.sequences: dict[str, dict] = {}
    state.lock = threading.Lock()
    state.thumbs: list[bytes] = []
    if artifacts is not None:
        state.thumbs = [_thumbnail_png(f) for f in artifacts.frame_set.frames]

    def need_artifacts() -> pipeline.PipelineArtifacts:
        if state.artifacts is None:
            raise HTTPException(status_code=409, detail="no dataset loaded")
        return state.artifacts

    @app.get("/api/frames")
    def list_frames():
        a = need_artifacts()
        out = []
        for i in range(a.frame_set.n):
            t = a.ctx.tendencies[i]
            out.append({
                "index": i,
                "thumbnail_url": f"/thumb/{i}",
                "is_lms": bool(a.ctx.lms.is_lms[i]),
                "tendency_deg": math.degrees(t.angle) if t.valid else None,
            })
        return {"frames": out, "fps": a.manifest.fps, "n": a.frame_set.n}

    @app.get("/api/graph")
    def graph_info(neighbors_of: int | None = None):
        from .graph import content_candidates, graph_summary

        a = need_artifacts()
        if neighbors_of is None:
            return graph_summary(a.graph)
        i = neighbors_of
        if not 0 <= i < a.graph.n:
            raise HTTPException(status_code=400,
                                detail=f"node {i} not in [0, {a.graph.n})")
        s1 = set(content_candidates(a.graph, i, set()).indices)
        neighbors = [
            {
                "index": j,
                "weight": float(a.graph.weights[i, j]),
                "in_s1": j in s1,
            }
            for j in range(a.graph.n)
            if j != i
        ]
        return {"eta": a.graph.eta, "node": i, "neighbors": neighbors}

    @app.post("/api/resequence")
    def resequence(req: ResequenceRequest):
        a = need_artifacts()
        if not 0 <= req.start < a.frame_set.n:
            raise HTTPException(
                status_code=400,
                detail=f"start {req.start} not in [0, {a.frame_set.n})",
            )
        if req.temperature <= 0:
            raise HTTPException(status_code=400, detail="temperature must be positive")
        if req.max_length is not None and req.max_length < 1:
            raise HTTPException(status_code=400, detail="max_length must be >= 1")
        seed = req.seed if req.seed is not None else secrets.randbelow(2**31)
        overrides = {
            "seed": seed,
            "softmax_temperature": req.temperature,
            "disable_cd": req.disable_cd,
            "disable_ct": req.disable_ct,
            "max_length": req.max_length,
        }
        try:
            seq = pipeline.run_walk(a, req.start, overrides)
        except VideoReseqError as e:
            raise HTTPException(status_code=400, detail=str(e))
        import dataclasses as _dc

        record = pipeline.sequence_record(
            a, seq, _dc.replace(a.config.sdpf, **overrides)
        )
        with state.lock:
            seq_id = f"seq-{len(state.sequences) + 1:04d}"
            record["sequence_id"] = seq_id
            state.sequences[seq_id] = record
        return {
            "sequence_id": seq_id,
            "indices": record["indices"],
            "seed": seed,
            "stop_reason": record["stop_reason"],
            "diagnostics": record["steps"],
        }

    @app.get("/api/sequence/{seq_id}")
    def get_sequence(seq_id: str):
        need_artifacts()
        record = state.sequences.get(seq_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown sequence {seq_id}")
        return record

    @app.get("/api/evaluate/{seq_id}")
    def evaluate_sequence(seq_id: str, strategy: str = "runs"):
        a = need_artifacts()
        record = state.sequences.get(seq_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown sequence {seq_id}")
        if strategy not in ("runs", "lcs"):
            raise HTTPException(status_code=400, detail=f"unknown strategy {strategy}")
        return pipeline.evaluate_record(a, record, strategy)

    @app.get("/thumb/{index}")
    def thumbnail(index: int):
        a = need_artifacts()
        if not 0 <= index < a.frame_set.n:
            raise HTTPException(status_code=400,
                                detail=f"index {index} not in [0, {a.frame_set.n})")
        return Response(content=state.thumbs[index], media_type="image/png")

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
