"""Figures for sweep output.  matplotlib is only imported here."""
import math


def plot_data(rows):
    """(log10 x, log10 |S(x)|, pred_exponent * log10 x) per sweep row."""
    out = []
    for r in rows:
        lx = math.log10(r["x"])
        la = math.log10(r["abs_sum"]) if r["abs_sum"] > 0 else -math.inf
        out.append({"log10_x": lx, "log10_abs": la, "pred_line": r["pred_exponent"] * lx})
    return out


def render_sweep(rows, path, title=None):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pts = plot_data(rows)
    lx = [p["log10_x"] for p in pts]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(lx, [p["log10_abs"] for p in pts], "o-", label=r"$\log_{10}|S(x)|$")
    ax.plot(lx, [p["pred_line"] for p in pts], "--", label="predicted exponent bound")
    ax.plot(lx, [0.5 * v for v in lx], ":", color="grey", label="square-root line")
    ax.set_xlabel(r"$\log_{10} x$")
    ax.set_ylabel(r"$\log_{10}$ magnitude")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
    plt.close(fig)
