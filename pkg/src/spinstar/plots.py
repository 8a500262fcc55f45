"""Matplotlib figure rendering for CLI outputs.

Figures are written next to the delimited data files; nothing is ever shown
interactively, so the Agg backend is forced before pyplot is imported.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .witness import EntanglementTrace, TransitionCell  # noqa: E402

_ENGINE_STYLE = {
    "fast": dict(color="tab:blue", ls="-"),
    "oracle": dict(color="tab:red", ls="--"),
    "closed_form": dict(color="tab:green", ls=":"),
}


def render_trace_figure(traces: list[EntanglementTrace], path: str,
                        title: str = "") -> str:
    fig, (ax_e, ax_l) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for trace in traces:
        style = _ENGINE_STYLE.get(trace.engine, {})
        ax_e.plot(trace.times, trace.entanglement, label=trace.engine,
                  lw=1.6, **style)
        ax_l.plot(trace.times, trace.lambda_min, lw=1.2, **style)
    ax_e.set_ylabel("entanglement E(t)")
    ax_e.set_ylim(-0.02, 0.52)
    ax_e.grid(alpha=0.3)
    ax_e.legend(loc="best", fontsize=9)
    if title:
        ax_e.set_title(title, fontsize=10)
    ax_l.axhline(0.0, color="gray", lw=0.8)
    ax_l.set_xlabel("time t (units of 1/alpha)")
    ax_l.set_ylabel("min PT eigenvalue")
    ax_l.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_transition_figure(cells: list[TransitionCell], path: str,
                             parameter: str = "gamma1") -> str:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    by_p: dict[float, list[TransitionCell]] = {}
    for cell in cells:
        by_p.setdefault(cell.p, []).append(cell)
    for p, group in sorted(by_p.items()):
        good = [c for c in group if c.result is not None]
        good.sort(key=lambda c: c.n)
        if good:
            ax.plot([c.n for c in good], [c.result.value for c in good],
                    marker="o", lw=1.5, label=f"p = {p:g}")
    ax.set_xlabel("environment qubits N")
    ax.set_ylabel(f"transition value {parameter}*")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sweep_figure(labeled_traces: list[tuple[str, EntanglementTrace]],
                        path: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, trace in labeled_traces:
        ax.plot(trace.times, trace.entanglement, lw=1.4, label=label)
    ax.set_xlabel("time t (units of 1/alpha)")
    ax.set_ylabel("entanglement E(t)")
    ax.set_ylim(-0.02, 0.52)
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
