"""Download MNIST, CIFAR-10 and STL-10 into a hebbnet dataset root.

Layout produced under the root:

    train-images-idx3-ubyte.gz ...      MNIST (read directly, gzip or plain)
    cifar-10-batches-bin/               CIFAR-10 binary batches
    stl10_binary/                       STL-10 binary files

Usage:
    python scripts/fetch_datasets.py mnist cifar10 --root ~/data
"""

import logging
import tarfile
from pathlib import Path

import click
import httpx
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, DownloadColumn, Progress, TextColumn, TransferSpeedColumn

logger = logging.getLogger("fetch_datasets")

MNIST_BASE = "https://ossci-datasets.s3.amazonaws.com/mnist/"
MNIST_FILES = [
    "train-images-idx3-ubyte.gz",
    "train-labels-idx1-ubyte.gz",
    "t10k-images-idx3-ubyte.gz",
    "t10k-labels-idx1-ubyte.gz",
]
ARCHIVES = {
    "cifar10": ("https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz", "cifar-10-batches-bin"),
    "stl10": ("http://ai.stanford.edu/~acoates/stl10/stl10_binary.tar.gz", "stl10_binary"),
}
TIMEOUT = httpx.Timeout(30.0, read=300.0)


def download(client: httpx.Client, url: str, target: Path, progress: Progress) -> Path:
    """Stream ``url`` to ``target`` via a temporary ``.part`` file."""
    partial = target.with_name(target.name + ".part")
    with client.stream("GET", url) as response:
        response.raise_for_status()
        total = int(response.headers.get("content-length", 0)) or None
        task = progress.add_task(target.name, total=total)
        with open(partial, "wb") as f:
            for chunk in response.iter_bytes(chunk_size=1 << 16):
                f.write(chunk)
                progress.advance(task, len(chunk))
    partial.replace(target)
    return target


def extract(archive: Path, root: Path) -> None:
    with tarfile.open(archive, "r:gz") as tar:
        tar.extractall(root, filter="data")


@click.command()
@click.argument("datasets", nargs=-1, type=click.Choice(["mnist", "cifar10", "stl10"]))
@click.option(
    "--root",
    type=click.Path(file_okay=False, path_type=Path),
    envvar="HEBBNET_DATA_DIR",
    default=Path("data"),
    show_default=True,
    help="Dataset root",
)
@click.option("--keep-archives", is_flag=True, help="Keep downloaded .tar.gz files")
def main(datasets: tuple[str, ...], root: Path, keep_archives: bool) -> None:
    """Fetch DATASETS (default: mnist and cifar10)."""
    console = Console()
    logging.basicConfig(level=logging.INFO, format="%(message)s", handlers=[RichHandler()])
    root.mkdir(parents=True, exist_ok=True)
    wanted = datasets or ("mnist", "cifar10")

    progress = Progress(
        TextColumn("{task.description}"),
        BarColumn(),
        DownloadColumn(),
        TransferSpeedColumn(),
        console=console,
    )
    try:
        with httpx.Client(timeout=TIMEOUT, follow_redirects=True) as client, progress:
            for name in wanted:
                if name == "mnist":
                    for file in MNIST_FILES:
                        target = root / file
                        if target.exists():
                            logger.info(f"{file} already present")
                            continue
                        download(client, MNIST_BASE + file, target, progress)
                    continue
                url, folder = ARCHIVES[name]
                if (root / folder).is_dir():
                    logger.info(f"{folder} already present")
                    continue
                archive = download(client, url, root / url.rsplit("/", 1)[-1], progress)
                extract(archive, root)
                if not keep_archives:
                    archive.unlink()
    except httpx.HTTPStatusError as e:
        console.print(f"[red]✗[/red] HTTP {e.response.status_code} for {e.request.url}")
        raise SystemExit(5) from e
    except httpx.RequestError as e:
        console.print(f"[red]✗[/red] Request failed: {e}")
        raise SystemExit(5) from e
    console.print(f"[green]✓[/green] Datasets ready in {root}")


if __name__ == "__main__":
    main()
