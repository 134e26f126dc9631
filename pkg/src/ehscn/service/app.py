"""HTTP service exposing the simulators and solvers.

The CLI drives these endpoints in-process by default; `uvicorn
ehscn.service.app:app` serves them over the network.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..deployment import deployment_cost_per_m2, simulate, sweep
from ..errors import EhscnError
from ..operation import (
    SolveReport,
    baseline_distance,
    baseline_snr_greedy,
    distributed_bf_bound,
    greedy_transmit,
    grid_optimality_oracle,
    maxmin_bisection,
    save_transmit,
    solve_all,
)
from ..profiles import complementarity, load_trace, normalize_peak, resample_average
from . import schemas

SOLVERS = {
    "bisection": lambda sc, tol: maxmin_bisection(sc, tolerance=tol),
    "distance": lambda sc, tol: baseline_distance(sc),
    "snr-greedy": lambda sc, tol: baseline_snr_greedy(sc),
    "bf-bound": lambda sc, tol: distributed_bf_bound(sc),
    "save": lambda sc, tol: save_transmit(sc),
    "greedy": lambda sc, tol: greedy_transmit(sc),
    "oracle": lambda sc, tol: grid_optimality_oracle(sc),
}

app = FastAPI(title="ehscn", version=__version__)


@app.exception_handler(EhscnError)
def _domain_error(request: Request, exc: EhscnError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.exception_handler(ValueError)
def _value_error(request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"error": "ValueError", "detail": str(exc)},
    )


@app.get("/health", response_model=schemas.HealthOut)
def health() -> schemas.HealthOut:
    return schemas.HealthOut()


@app.post("/profile", response_model=schemas.ProfileResponse)
def profile(req: schemas.ProfileRequest) -> schemas.ProfileResponse:
    series = []
    traces = []
    for tr in req.traces:
        trace, clamped = load_trace(
            tr.text,
            timestamp_column=tr.timestamp_column,
            value_column=tr.value_column,
            header=tr.header,
        )
        if req.window_s is not None:
            trace = resample_average(trace, req.window_s)
        if req.normalize:
            trace = normalize_peak(trace)
        traces.append(trace)
        series.append(
            schemas.SeriesOut(
                name=tr.name,
                start_time=trace.start_time.isoformat(),
                resolution_s=trace.resolution_s,
                samples=[float(s) for s in trace.samples],
                clamped_count=clamped,
            )
        )
    corr = None
    if len(traces) == 2:
        corr = complementarity(traces[0], traces[1])
    return schemas.ProfileResponse(series=series, complementarity=corr)


def _point_out(value: float, res) -> schemas.CurvePointOut:
    return schemas.CurvePointOut(
        value=value,
        outage_probability=res.outage_probability,
        outage_ci=res.outage_ci,
        grid_w_per_scbs=res.grid_w_per_scbs,
        grid_w_per_m2=res.grid_w_per_m2,
        grid_ci=res.grid_ci,
        trials=res.trials,
        user_slots=res.user_slots,
    )


@app.post("/deploy", response_model=schemas.DeployResponse)
def deploy(req: schemas.DeployRequest) -> schemas.DeployResponse:
    config = req.to_config()
    threads = req.deployment.threads
    resolved = req.model_dump(mode="json")
    if req.sweep is None:
        res = simulate(config, threads=threads)
        return schemas.DeployResponse(
            parameter=None,
            points=[_point_out(config.scbs_density, res)],
            resolved_config=resolved,
        )
    curve = sweep(config, req.sweep.parameter, req.sweep.values, threads=threads)
    points = [
        schemas.CurvePointOut(
            value=p.value,
            outage_probability=p.outage_probability,
            outage_ci=p.outage_ci,
            grid_w_per_scbs=p.grid_w_per_scbs,
            grid_w_per_m2=p.grid_w_per_m2,
            grid_ci=p.grid_ci,
            trials=p.trials,
            user_slots=p.user_slots,
        )
        for p in curve.points
    ]
    economics = None
    opt_density = None
    opt_cost = None
    if curve.parameter == "scbs_density":
        economics = [
            schemas.EconomicsOut(
                value=p.value,
                cost_per_m2=deployment_cost_per_m2(p.value, p.grid_w_per_scbs),
            )
            for p in curve.points
        ]
        best = min(economics, key=lambda e: e.cost_per_m2)
        opt_density, opt_cost = best.value, best.cost_per_m2
    return schemas.DeployResponse(
        parameter=curve.parameter,
        points=points,
        economics=economics,
        optimal_density=opt_density,
        optimal_cost_per_m2=opt_cost,
        resolved_config=resolved,
    )


def _report_out(r: SolveReport) -> schemas.ReportOut:
    schedule = None
    if r.schedule is not None:
        schedule = schemas.ScheduleOut(
            serving=[[int(v) for v in row] for row in r.schedule.serving],
            power_w=[[float(v) for v in row] for row in r.schedule.power_w],
        )
    return schemas.ReportOut(
        solver=r.solver,
        objective=r.objective,
        iterations=r.iterations,
        interval_width=r.interval_width,
        grid_energy_j=r.grid_energy_j,
        switch_slot=r.switch_slot,
        notes=r.notes,
        schedule=schedule,
    )


@app.post("/operate", response_model=schemas.OperateResponse)
def operate(req: schemas.OperateRequest) -> schemas.OperateResponse:
    scenario = req.scenario.to_core()
    if req.solvers is None:
        reports = solve_all(
            scenario, tolerance=req.tolerance, include_oracles=req.include_oracles
        )
    else:
        reports = []
        for name in req.solvers:
            if name not in SOLVERS:
                raise ValueError(
                    f"unknown solver {name!r}; choices: {sorted(SOLVERS)}"
                )
            reports.append(SOLVERS[name](scenario, req.tolerance))
    return schemas.OperateResponse(
        reports=[_report_out(r) for r in reports],
        resolved_config=req.model_dump(mode="json"),
    )


@app.post("/oracle", response_model=schemas.OperateResponse)
def oracle(req: schemas.OperateRequest) -> schemas.OperateResponse:
    scenario = req.scenario.to_core()
    report = grid_optimality_oracle(scenario)
    return schemas.OperateResponse(
        reports=[_report_out(report)],
        resolved_config=req.model_dump(mode="json"),
    )
