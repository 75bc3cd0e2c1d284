# solver/riccati_spectrum/cli/commands/chain.py

from pathlib import Path
from typing import Any, Dict, Optional

from ...core.exceptions import InvalidRunConfig
from ...schemas.run_config import RunConfig
from ...services.chain_service import chain_time_from, compute_chain
from ...utils.io import write_csv, write_json
from .. import options
from ..deps import build_config, emit, load_system, tracked


def run_chain(cfg: RunConfig) -> Dict[str, Any]:
    if cfg.lam is None:
        raise InvalidRunConfig("chain needs --lambda.")
    c = load_system(cfg)
    chain = compute_chain(c, cfg.lam, opts=cfg.chain_options())
    payload = chain.model_dump(by_alias=True)
    if cfg.j is not None:
        payload["t_j"] = chain_time_from(chain, cfg.j, raw=True)
        payload["j"] = cfg.j

    if cfg.out is not None:
        if cfg.format == "json":
            write_json(cfg.out, payload)
        else:
            rows = (
                (index + 1, t, value, rep, segment.equation)
                for index, segment in enumerate(chain.segments)
                for t, value, rep in segment.samples()
            )
            write_csv(cfg.out, ("segment", "t", "value", "repr", "equation"), rows)
    return payload


@tracked("chain")
def chain_command(
    config: Optional[Path] = options.CONFIG,
    system: Optional[str] = options.SYSTEM,
    lam: Optional[float] = options.LAMBDA,
    j: Optional[int] = options.J,
    rtol: Optional[float] = options.RTOL,
    atol: Optional[float] = options.ATOL,
    switch_threshold: Optional[float] = options.SWITCH,
    floor: Optional[float] = options.FLOOR,
    out: Optional[Path] = options.OUT,
    format: str = options.FORMAT,
):
    """Prints the blow-up chain at lambda; --out writes the segment trajectories."""
    cfg = build_config(
        command="chain",
        config_path=config,
        system=system,
        lam=lam,
        j=j,
        rtol=rtol,
        atol=atol,
        switch_threshold=switch_threshold,
        floor=floor,
        out=out,
        format=format,
    )
    payload = run_chain(cfg)
    emit(payload)
    return cfg.system_label, {"lambda": cfg.lam, "termination": payload["termination"]["kind"]}
