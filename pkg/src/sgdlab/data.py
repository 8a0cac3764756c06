"""Dataset construction: Gaussian toy data, random relabeling, the
randomly-labeled pretraining corpus, augmentation transforms, and CIFAR-10
binary ingestion."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractError, CorruptRecordError, MalformedFileError
from .net import Batch

CIFAR_RECORD_BYTES = 3073  # 1 label byte + 32*32*3 channel-major pixels
CIFAR_PIXELS = 3072


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    kind: str = "tabular"  # "tabular" or "image"
    image_dims: tuple[int, int, int] | None = None  # (h, w, c) when kind == "image"
    name: str = ""

    def __post_init__(self):
        n, d = self.features.shape
        if n < 1:
            raise ContractError("dataset must contain at least one example")
        if self.labels.shape != (n,):
            raise ContractError(f"labels shape {self.labels.shape} != ({n},)")
        if np.any(self.labels < 0) or np.any(self.labels >= self.n_classes):
            raise ContractError("labels out of range")
        if not np.all(np.isfinite(self.features)):
            raise ContractError("features contain non-finite values")
        if self.kind == "image":
            if self.image_dims is None:
                raise ContractError("image dataset needs image_dims")
            h, w, c = self.image_dims
            if h * w * c != d:
                raise ContractError(f"image dims {self.image_dims} do not match d={d}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class GaussianSpec:
    n_per_class: int = 50
    mean_0: tuple[float, float] = (-2.0, 0.0)
    mean_1: tuple[float, float] = (2.0, 0.0)
    sigma: float = 0.5
    seed: int = 0
    # Extra pure-noise coordinates (class mean 0, same sigma) appended after
    # the two informative ones; raises the input dimension to 2 + noise_dims.
    noise_dims: int = 0

    def __post_init__(self):
        if self.n_per_class < 1:
            raise ContractError("n_per_class must be positive")
        if self.sigma <= 0:
            raise ContractError("sigma must be positive")
        if self.noise_dims < 0:
            raise ContractError("noise_dims must be nonnegative")
        sep = math.dist(self.mean_0, self.mean_1)
        if sep <= 0:
            raise ContractError("class means must be distinct")


@dataclass(frozen=True)
class AdvCorpusConfig:
    R: int = 5
    N: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.R < 1:
            raise ContractError("replication factor R must be positive")
        if not 0.0 <= self.N <= 100.0:
            raise ContractError("zero-out factor N must be a percentage in [0, 100]")


def gen_two_gaussians(g: GaussianSpec) -> Dataset:
    rng = np.random.default_rng(g.seed)
    d = 2 + g.noise_dims
    mean_0 = np.concatenate([g.mean_0, np.zeros(g.noise_dims)])
    mean_1 = np.concatenate([g.mean_1, np.zeros(g.noise_dims)])
    pts0 = rng.normal(loc=mean_0, scale=g.sigma, size=(g.n_per_class, d))
    pts1 = rng.normal(loc=mean_1, scale=g.sigma, size=(g.n_per_class, d))
    features = np.vstack([pts0, pts1])
    labels = np.concatenate([np.zeros(g.n_per_class, dtype=np.int64),
                             np.ones(g.n_per_class, dtype=np.int64)])
    return Dataset(features, labels, n_classes=2, name="toy-gaussians")


def randomize_labels(ds: Dataset, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, ds.n_classes, size=ds.n, dtype=np.int64)
    return replace(ds, labels=labels, name=f"{ds.name}/random-labels")


def zero_out_count(n_percent: float, dim: int) -> int:
    """Round-half-up of n_percent/100 * dim."""
    return int(math.floor(n_percent / 100.0 * dim + 0.5))


def build_adversarial_corpus(ds: Dataset, cfg: AdvCorpusConfig) -> Dataset:
    """R randomly-labeled copies of every example, each with a fresh random
    subset of coordinates zeroed out."""
    rng = np.random.default_rng(cfg.seed)
    k = zero_out_count(cfg.N, ds.dim)
    features = np.repeat(ds.features, cfg.R, axis=0).astype(np.float64)
    for row in range(features.shape[0]):
        if k > 0:
            idx = rng.choice(ds.dim, size=k, replace=False)
            features[row, idx] = 0.0
    labels = rng.integers(0, ds.n_classes, size=features.shape[0], dtype=np.int64)
    return Dataset(features, labels, ds.n_classes, kind=ds.kind,
                   image_dims=ds.image_dims, name=f"{ds.name}/adv-corpus")


def augment_gaussian_replicate(ds: Dataset, copies: int, sigma: float, seed: int) -> Dataset:
    """Originals plus `copies` noisy versions of each point, labels preserved."""
    if copies < 1:
        raise ContractError("copies must be >= 1")
    if sigma <= 0:
        raise ContractError("sigma must be positive")
    rng = np.random.default_rng(seed)
    noisy = np.repeat(ds.features, copies, axis=0)
    noisy = noisy + rng.normal(0.0, sigma, size=noisy.shape)
    features = np.vstack([ds.features, noisy])
    labels = np.concatenate([ds.labels, np.repeat(ds.labels, copies)])
    return Dataset(features, labels, ds.n_classes, kind=ds.kind,
                   image_dims=ds.image_dims, name=f"{ds.name}/gaussian-replicate")


def augment_crop_flip(batch: Batch, image_dims: tuple[int, int, int], pad: int,
                      rng: np.random.Generator) -> Batch:
    """Reflect-pad, random crop back to (h, w), horizontal flip with prob 1/2."""
    if pad < 0:
        raise ContractError("pad must be nonnegative")
    h, w, c = image_dims
    n = batch.features.shape[0]
    if batch.features.shape[1] != h * w * c:
        raise ContractError("batch features do not match the stated image dims")
    imgs = batch.features.reshape(n, h, w, c)
    out = np.empty_like(imgs)
    for i in range(n):
        img = imgs[i]
        if pad > 0:
            padded = np.pad(img, ((pad, pad), (pad, pad), (0, 0)), mode="reflect")
            r = rng.integers(0, 2 * pad + 1)
            s = rng.integers(0, 2 * pad + 1)
            img = padded[r:r + h, s:s + w, :]
        if rng.integers(0, 2) == 1:
            img = img[:, ::-1, :]
        out[i] = img
    return Batch(out.reshape(n, h * w * c), batch.labels)


def read_cifar_batch(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse one CIFAR-10 binary batch file into raw (labels, pixels) uint8
    arrays; pixels keep the file's channel-major layout."""
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0 or raw.size % CIFAR_RECORD_BYTES != 0:
        raise MalformedFileError(
            f"{path}: size {raw.size} is not a positive multiple of {CIFAR_RECORD_BYTES}")
    records = raw.reshape(-1, CIFAR_RECORD_BYTES)
    labels = records[:, 0]
    bad = np.nonzero(labels >= 10)[0]
    if bad.size:
        raise CorruptRecordError(
            f"{path}: record {bad[0]} has label byte {labels[bad[0]]}",
            record_index=int(bad[0]))
    return labels.copy(), records[:, 1:].copy()


def write_cifar_batch(path: str, labels: np.ndarray, pixels: np.ndarray) -> None:
    """Inverse of read_cifar_batch; byte-exact round trip."""
    records = np.hstack([labels.reshape(-1, 1), pixels]).astype(np.uint8)
    records.tofile(path)


def load_cifar10(path: str) -> tuple[Dataset, Dataset]:
    """Load the standard binary batches: pixels scaled to [0,1] then
    standardized per channel with train-set statistics."""
    train_files = [os.path.join(path, f"data_batch_{i}.bin") for i in range(1, 6)]
    test_file = os.path.join(path, "test_batch.bin")
    labels_parts, pixel_parts = [], []
    for f in train_files:
        lab, pix = read_cifar_batch(f)
        labels_parts.append(lab)
        pixel_parts.append(pix)
    train_labels = np.concatenate(labels_parts).astype(np.int64)
    train_pixels = np.vstack(pixel_parts).astype(np.float64) / 255.0
    test_labels_u8, test_pixels_u8 = read_cifar_batch(test_file)
    test_labels = test_labels_u8.astype(np.int64)
    test_pixels = test_pixels_u8.astype(np.float64) / 255.0

    # Channel-major layout: 1024 red, 1024 green, 1024 blue per record.
    chan = train_pixels.reshape(-1, 3, 1024)
    mean = chan.mean(axis=(0, 2))
    std = chan.std(axis=(0, 2))
    std = np.where(std == 0, 1.0, std)

    def standardize(pix):
        x = pix.reshape(-1, 3, 1024)
        x = (x - mean[None, :, None]) / std[None, :, None]
        return x.reshape(-1, CIFAR_PIXELS)

    dims = (32, 32, 3)
    train = Dataset(standardize(train_pixels), train_labels, 10, kind="image",
                    image_dims=dims, name="cifar10-train")
    test = Dataset(standardize(test_pixels), test_labels, 10, kind="image",
                   image_dims=dims, name="cifar10-test")
    return train, test


def subset(ds: Dataset, n: int, balanced: bool, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    if n > ds.n:
        raise ContractError(f"requested {n} examples from a dataset of {ds.n}")
    if balanced:
        if n % ds.n_classes != 0:
            raise ContractError(f"balanced subset size {n} not divisible by K={ds.n_classes}")
        per = n // ds.n_classes
        picked = []
        for k in range(ds.n_classes):
            pool = np.nonzero(ds.labels == k)[0]
            if pool.size < per:
                raise ContractError(f"class {k} has only {pool.size} examples, need {per}")
            picked.append(rng.choice(pool, size=per, replace=False))
        idx = np.concatenate(picked)
    else:
        idx = rng.choice(ds.n, size=n, replace=False)
    return Dataset(ds.features[idx].copy(), ds.labels[idx].copy(), ds.n_classes,
                   kind=ds.kind, image_dims=ds.image_dims, name=f"{ds.name}/subset{n}")
