"""Fitted evolution model: block Hamiltonian plus optional global phase rates.

The R_z span only produces zero-sum diagonal phase patterns; systems such as
spectral advection also need a uniform per-subsystem drift.  That drift is
physically invisible on the quantum state but matters classically at decode,
so it lives here as an explicit scalar per subsystem, never as a gate.

Serialized `.qkham` text format:
    layout <d> <c> <h>
    global_phase <value...|none>     (one value per subsystem, radians/time)
    alpha <j> <k> <value>
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import FormatError
from .layout import ObservableState, SubsystemLayout, build_layout
from .unitary import DiagonalHamiltonian, block_evolve

__all__ = ["KoopmanModel"]


@dataclass(frozen=True)
class KoopmanModel:
    hamiltonian: DiagonalHamiltonian
    global_rates: Optional[np.ndarray] = None  # radians per unit time, per subsystem

    def __post_init__(self):
        if self.global_rates is not None:
            g = np.asarray(self.global_rates, dtype=np.float64)
            if g.shape != (self.layout.subsystem_count,):
                raise FormatError(
                    f"need one global rate per subsystem, got shape {g.shape}"
                )
            g = g.copy()
            g.setflags(write=False)
            object.__setattr__(self, "global_rates", g)

    @property
    def layout(self) -> SubsystemLayout:
        return self.hamiltonian.layout

    def evolve(self, state: ObservableState, t: float) -> ObservableState:
        out = block_evolve(state, self.hamiltonian, t)
        if self.global_rates is None:
            return out
        phi = out.phase.copy()
        for j in range(1, self.layout.subsystem_count + 1):
            phi[self.layout.block_slice(j)] += self.global_rates[j - 1] * t
        return ObservableState(layout=self.layout, modulus=out.modulus, phase=phi)

    def serialize(self) -> str:
        lo = self.layout
        lines = [f"layout {lo.state_dim} {lo.channels} {lo.subsystem_count}"]
        if self.global_rates is None:
            lines.append("global_phase none")
        else:
            vals = " ".join(f"{g:.17g}" for g in self.global_rates)
            lines.append(f"global_phase {vals}")
        for j in range(1, lo.subsystem_count + 1):
            for k, a in enumerate(self.hamiltonian.block(j), start=1):
                lines.append(f"alpha {j} {k} {a:.17g}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.serialize())

    @classmethod
    def parse(cls, text: str) -> "KoopmanModel":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) < 2 or not lines[0].startswith("layout "):
            raise FormatError("model file must start with a 'layout <d> <c> <h>' line")
        try:
            d, c, h = (int(tok) for tok in lines[0].split()[1:4])
        except ValueError as exc:
            raise FormatError(f"bad layout line: {lines[0]!r}") from exc
        layout = build_layout(d, c, h)
        gp_tokens = lines[1].split()
        if gp_tokens[0] != "global_phase":
            raise FormatError("second line must be 'global_phase <value...|none>'")
        if gp_tokens[1] == "none":
            global_rates = None
        else:
            vals = [float(tok) for tok in gp_tokens[1:]]
            if len(vals) == 1 and h > 1:
                vals = vals * h
            global_rates = np.asarray(vals)
        blocks = [np.zeros(nj) for nj in layout.qubits]
        for ln in lines[2:]:
            tokens = ln.split()
            if tokens[0] != "alpha" or len(tokens) != 4:
                raise FormatError(f"bad alpha line: {ln!r}")
            j, k = int(tokens[1]), int(tokens[2])
            if not (1 <= j <= h and 1 <= k <= layout.qubits[j - 1]):
                raise FormatError(f"alpha indices out of range: {ln!r}")
            blocks[j - 1][k - 1] = float(tokens[3])
        hamiltonian = DiagonalHamiltonian(layout=layout, alphas=tuple(blocks))
        return cls(hamiltonian=hamiltonian, global_rates=global_rates)

    @classmethod
    def load(cls, path) -> "KoopmanModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())
