"""Figure rendering for run and comparison reports.

Figures are written next to the delimited output; the CSVs remain the
machine-readable contract.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_run(records, path, metric_label):
    """Loss, learning rate, and metric curves for one run."""
    epochs = [r.epoch for r in records]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    axes[0].semilogy(epochs, [r.train_loss for r in records])
    axes[0].set_xlabel("epoch")
    axes[0].set_ylabel("train loss")
    axes[1].semilogy(epochs, [r.alpha for r in records])
    axes[1].set_xlabel("epoch")
    axes[1].set_ylabel("learning rate")
    axes[2].plot(epochs, [r.metric for r in records])
    axes[2].set_xlabel("epoch")
    axes[2].set_ylabel(metric_label)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_field(x, predicted, true, path):
    """Predicted vs analytic field profile."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(x, true, label="analytic", lw=2)
    ax.plot(x, predicted, "--", label="predicted")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("field")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_compare(groups, path, metric_label):
    """Overlay loss and metric curves for several schedulers."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for name, records in groups.items():
        epochs = [r.epoch for r in records]
        axes[0].semilogy(epochs, [r.train_loss for r in records], label=name)
        axes[1].plot(epochs, [r.metric for r in records], label=name)
    axes[0].set_xlabel("epoch")
    axes[0].set_ylabel("train loss")
    axes[1].set_xlabel("epoch")
    axes[1].set_ylabel(metric_label)
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
