# sdk/energy/network.py

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from sdk.config.settings import logger
from sdk.core.exceptions import NetworkError
from sdk.core.problem_io import read_json, validation_message


class Line(BaseModel):
    from_bus: int = Field(..., alias="from", description="Sending bus index")
    to_bus: int = Field(..., alias="to", description="Receiving bus index")
    susceptance: float = Field(..., description="Series susceptance (p.u.)")
    capacity: float = Field(..., description="Thermal limit F̄ (MW)")

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @field_validator("susceptance")
    def check_susceptance(cls, v):
        if v <= 0:
            raise ValueError("susceptance must be positive")
        return v

    @field_validator("capacity")
    def check_capacity(cls, v):
        if v < 0:
            raise ValueError("capacity must be nonnegative")
        return v


class Generator(BaseModel):
    bus: int
    p_min: float = Field(0.0, description="Minimum output P̲ (MW)")
    p_max: float = Field(..., description="Maximum output P̄ (MW)")
    ramp_up: float = Field(..., description="Ramp-up limit R^up (MW/period)")
    ramp_dn: float = Field(..., description="Ramp-down limit R^dn (MW/period)")
    cost: float = Field(..., description="Energy cost c ($/MWh)")
    cost_up: float = Field(0.0, description="Up-reserve cost c^up ($/MW)")
    cost_dn: float = Field(0.0, description="Down-reserve cost c^dn ($/MW)")

    model_config = ConfigDict(frozen=True)

    @field_validator("p_min", "p_max", "ramp_up", "ramp_dn", "cost_up", "cost_dn")
    def check_nonnegative(cls, v, info):
        if v < 0:
            raise ValueError(f"{info.field_name} must be nonnegative")
        return v

    @model_validator(mode="after")
    def check_limits(self):
        if self.p_min > self.p_max:
            raise ValueError(f"p_min {self.p_min} exceeds p_max {self.p_max}")
        return self


class Renewable(BaseModel):
    bus: int
    name: Optional[str] = None

    model_config = ConfigDict(frozen=True)


class NetworkInstance(BaseModel):
    """
    DC network with generators, renewable units and a demand profile.

    `demand` is periods × buses and `expected_output` (ȳ) periods × renewables.
    Missing penalty prices default to 10× the largest and 0.5× the smallest
    generator energy cost.
    """

    buses: int = Field(..., description="Number of buses n_b")
    lines: List[Line] = Field(default_factory=list)
    generators: List[Generator]
    renewables: List[Renewable] = Field(default_factory=list)
    demand: List[List[float]]
    expected_output: List[List[float]] = Field(default_factory=list)
    shed_penalty: Optional[float] = Field(None, description="M⁻ ($/MWh)")
    spill_penalty: Optional[float] = Field(None, description="M⁺ ($/MWh)")
    reference_bus: int = 0

    model_config = ConfigDict(frozen=True)

    @field_validator("buses")
    def check_buses(cls, v):
        if v < 1:
            raise ValueError("a network needs at least one bus")
        return v

    @field_validator("generators")
    def check_generators(cls, v):
        if not v:
            raise ValueError("a network needs at least one generator")
        return v

    @model_validator(mode="after")
    def check_network(self):
        n_b = self.buses
        for kind, items in (("lines", self.lines), ("generators", self.generators), ("renewables", self.renewables)):
            for k, item in enumerate(items):
                buses = (item.from_bus, item.to_bus) if kind == "lines" else (item.bus,)
                for b in buses:
                    if not 0 <= b < n_b:
                        raise ValueError(f"{kind}[{k}] refers to bus {b}, valid range 0..{n_b - 1}")
        if not 0 <= self.reference_bus < n_b:
            raise ValueError(f"reference_bus {self.reference_bus} out of range")
        if not self.demand:
            raise ValueError("demand needs at least one period")
        for t, row in enumerate(self.demand):
            if len(row) != n_b:
                raise ValueError(f"demand[{t}] has {len(row)} entries, expected {n_b}")
            if min(row) < 0:
                raise ValueError(f"demand[{t}] has a negative entry")
        n_r = len(self.renewables)
        ybar = self.expected_output or [[0.0] * n_r for _ in self.demand]
        if len(ybar) != len(self.demand):
            raise ValueError(f"expected_output has {len(ybar)} periods, demand has {len(self.demand)}")
        for t, row in enumerate(ybar):
            if len(row) != n_r:
                raise ValueError(f"expected_output[{t}] has {len(row)} entries, expected {n_r}")
            if n_r and min(row) < 0:
                raise ValueError(f"expected_output[{t}] has a negative entry")
        if self.shed_penalty is not None and self.shed_penalty <= max(g.cost for g in self.generators):
            raise ValueError("shed_penalty must exceed every generator cost")
        if self.spill_penalty is not None and self.spill_penalty < 0:
            raise ValueError("spill_penalty must be nonnegative")
        components = self.components()
        if len(components) > 1:
            raise NetworkError(
                f"disconnected graph: {len(components)} components {components}",
                {"components": components},
            )
        return self

    def components(self) -> List[List[int]]:
        """Connected components of the bus graph, by union-find over the lines."""
        parent = list(range(self.buses))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for line in self.lines:
            a, b = find(line.from_bus), find(line.to_bus)
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups: Dict[int, List[int]] = {}
        for i in range(self.buses):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    # ------------------------------------------------------------------
    # Dimensions and matrices
    # ------------------------------------------------------------------
    @property
    def n_periods(self) -> int:
        return len(self.demand)

    @property
    def n_gen(self) -> int:
        return len(self.generators)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def n_ren(self) -> int:
        return len(self.renewables)

    @property
    def M_shed(self) -> float:
        if self.shed_penalty is not None:
            return self.shed_penalty
        return 10.0 * max(g.cost for g in self.generators)

    @property
    def M_spill(self) -> float:
        if self.spill_penalty is not None:
            return self.spill_penalty
        return 0.5 * min(g.cost for g in self.generators)

    def incidence(self) -> np.ndarray:
        """Bus × line matrix with −1 at the sending and +1 at the receiving bus."""
        A = np.zeros((self.buses, self.n_lines))
        for l, line in enumerate(self.lines):
            A[line.from_bus, l] = -1.0
            A[line.to_bus, l] = 1.0
        return A

    def gen_map(self) -> np.ndarray:
        G = np.zeros((self.buses, self.n_gen))
        for k, g in enumerate(self.generators):
            G[g.bus, k] = 1.0
        return G

    def ren_map(self) -> np.ndarray:
        E = np.zeros((self.buses, self.n_ren))
        for k, r in enumerate(self.renewables):
            E[r.bus, k] = 1.0
        return E

    def demand_at(self, t: int) -> np.ndarray:
        return np.asarray(self.demand[t], dtype=float)

    def expected_at(self, t: int) -> np.ndarray:
        if not self.expected_output:
            return np.zeros(self.n_ren)
        return np.asarray(self.expected_output[t], dtype=float)

    def gen_array(self, name: str) -> np.ndarray:
        return np.array([getattr(g, name) for g in self.generators], dtype=float)


def network_to_dict(net: NetworkInstance) -> dict:
    return net.model_dump(by_alias=True)


def load_network(path: str) -> NetworkInstance:
    """
    Read and check a network file.

    Raises:
        NotFoundError: If the file does not exist.
        NetworkError: On schema violations (with field paths) or a disconnected graph.
    """
    data = read_json(path)
    if not isinstance(data, dict):
        raise NetworkError(f"{path}: network file must hold a JSON object")
    try:
        net = NetworkInstance(**data)
    except ValidationError as exc:
        raise NetworkError(f"invalid network: {validation_message(exc)}", {"path": str(path)}) from None
    logger.debug(f"[load_network] {path}: buses={net.buses} lines={net.n_lines} gens={net.n_gen} renewables={net.n_ren}")
    return net
