"""HTTP service exposing the core operations.

Every endpoint is stateless: it takes the system source text (the same DSL
the CLI reads) plus options, runs the corresponding library call, and
returns the same report payloads the CLI emits as JSON.  Run with
`uvicorn conglab.service:app`.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .budgets import BudgetError
from .deduction import classify_system, deducible_decreasing_pairs
from .digraph import build_digraph, check_claim1, check_claim2, check_claim3
from .partitions import build_group_partition, verify_group_partition
from .sphere import certify_ball_freeness, standard_generators
from .simulator import check_invariants, init, snapshot, step
from .systems import DslError, mask_indices, parse_system
from .transform import (
    generate_partition_system,
    reduce_inconsistent,
    transform_to_weak_plus_selfcomp,
)
from .words import IDENTITY, Presentation, format_word, parse_word

app = FastAPI(
    title="conglab",
    description="congruence-system classification, digraph claim checks, "
                "free-product partitions, and the stage-wise open-set construction",
)


class SystemRequest(BaseModel):
    source: str = Field(description="system in the `sets/cong` DSL")


class ClassifyRequest(SystemRequest):
    pairs: bool = False


class GenerateRequest(BaseModel):
    n: int = Field(ge=3, le=7)


class GraphRequest(SystemRequest):
    variant: str = "s2"
    claims: tuple[int, ...] = (1, 2, 3)
    path_bound: int | None = None


class PartitionRequest(SystemRequest):
    w: str = ""
    verify_depth: int = 6


class CertifyRequest(BaseModel):
    m: int = Field(ge=1, le=8)
    mbar: int = Field(ge=0)
    depth: int = Field(default=6, ge=0, le=10)


class SimulateRequest(SystemRequest):
    steps: int = Field(ge=0, le=50)
    variant: str = "s2"
    include_snapshot: bool = False


def _parse(source: str):
    try:
        return parse_system(source)
    except DslError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _guard(fn):
    try:
        return fn()
    except BudgetError as exc:
        raise HTTPException(status_code=422, detail=f"budget exceeded: {exc}") from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/classify")
def classify(req: ClassifyRequest) -> dict:
    system = _parse(req.source)

    def go():
        payload = classify_system(system).to_dict()
        if req.pairs:
            payload["decreasing_pairs"] = [
                [list(mask_indices(a)), list(mask_indices(b))]
                for a, b in deducible_decreasing_pairs(system)
            ]
        return payload

    return _guard(go)


@app.post("/reduce")
def reduce(req: SystemRequest) -> dict:
    system = _parse(req.source)
    return _guard(lambda: reduce_inconsistent(system).to_dict())


@app.post("/transform")
def transform(req: SystemRequest) -> dict:
    system = _parse(req.source)
    return _guard(lambda: transform_to_weak_plus_selfcomp(system).to_dict())


@app.post("/generate")
def generate(req: GenerateRequest) -> dict:
    def go():
        system, table = generate_partition_system(req.n)
        return {
            "r": system.r,
            "m": system.m,
            "sequences": [list(s) for s in table],
            "congruences": [[list(mask_indices(a)), list(mask_indices(b))]
                            for a, b in system.congruences],
        }

    return _guard(go)


@app.post("/graph")
def graph(req: GraphRequest) -> dict:
    system = _parse(req.source)

    def go():
        m_bar = None
        sys_ = system
        if req.variant == "s4":
            result = transform_to_weak_plus_selfcomp(system)
            sys_, m_bar = result.system, result.m_bar
        g = build_digraph(sys_, req.variant, m_bar)
        payload = {"variant": g.variant, "vertices": len(g.vertices), "edges": len(g.edges)}
        checkers = {1: check_claim1, 2: check_claim2,
                    3: lambda gr: check_claim3(gr, req.path_bound)}
        for claim in req.claims:
            if claim not in checkers:
                raise ValueError(f"unknown claim {claim}")
            payload[f"claim{claim}"] = checkers[claim](g).to_dict()
        return payload

    return _guard(go)


@app.post("/partition")
def partition(req: PartitionRequest) -> dict:
    system = _parse(req.source)

    def go():
        result = transform_to_weak_plus_selfcomp(system)
        pres = Presentation(result.system.m, result.m_bar)
        anchor = parse_word(req.w, pres) if req.w else IDENTITY
        part = build_group_partition(result.system, result.m_bar, pres, anchor)
        report = verify_group_partition(part, req.verify_depth)
        return {
            "m_bar": result.m_bar,
            "anchor": format_word(anchor, pres),
            "anchor_piece": part.assign(anchor),
            "identity_piece": part.assign(IDENTITY),
            "verified": report.to_dict(),
        }

    return _guard(go)


@app.post("/certify")
def certify(req: CertifyRequest) -> dict:
    def go():
        pres = Presentation(req.m, req.mbar)
        real = standard_generators(pres)
        result = certify_ball_freeness(real, req.depth)
        return {
            "certified": result.certified,
            "depth": req.depth,
            "words_checked": result.words_checked,
            "counterexample": None if result.counterexample is None
            else format_word(result.counterexample, pres),
        }

    return _guard(go)


@app.post("/simulate")
def simulate(req: SimulateRequest) -> dict:
    system = _parse(req.source)

    def go():
        sys_, m_bar = system, system.m
        if req.variant == "s4":
            result = transform_to_weak_plus_selfcomp(system)
            sys_, m_bar = result.system, result.m_bar
        pres = Presentation(sys_.m, m_bar)
        real = standard_generators(pres)
        certify_ball_freeness(real, 4)
        state = init(sys_, m_bar, real, req.variant)
        for n in range(req.steps):
            step(state)
            report = check_invariants(state, since_stage=n)
            if not report.ok:
                return {"ok": False, "stage": n, "failures": report.failures}
        final = check_invariants(state)
        payload = {
            "ok": final.ok,
            "stages": state.stage,
            "link_radius": state.link_radius,
            "patches": state.patch_count(),
            "tracked": len(state.tracked),
            "invariants": final.to_dict(),
        }
        if req.include_snapshot:
            payload["snapshot"] = snapshot(state)
        return payload

    return _guard(go)
