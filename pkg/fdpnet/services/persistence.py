import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from trex_toolkit.exceptions import CorruptModelError, ModelFileError, ModelVersionError

from .mlp import MlpParams

logger = logging.getLogger(__name__)


class ModelStore:
    """
    Versioned model files.

    Layout: one JSON header line, then the payload: for every layer, the
    weight matrix in row-major order followed by its bias vector, all as
    little-endian float64. The header records the payload size and its
    SHA-256 so truncation and corruption are caught on load.
    """

    FORMAT = 'trex-fdp-mlp'
    VERSION = 1
    DTYPE = np.dtype('<f8')

    @classmethod
    def _payload(cls, params: MlpParams) -> bytes:
        return b''.join(np.ascontiguousarray(a, dtype=cls.DTYPE).tobytes(order='C') for a in params.arrays())

    @classmethod
    def save(cls, params: MlpParams, path) -> None:
        params.validate()
        payload = cls._payload(params)
        training = params.training or {}
        header = {
            'format': cls.FORMAT,
            'version': cls.VERSION,
            'layer_dims': params.layer_dims,
            'p_max': params.p_max,
            'T_max_norm': params.T_max_norm,
            'w': params.loss_weight,
            'epochs': training.get('epochs'),
            'lr': training.get('lr'),
            'seed': training.get('seed'),
            'training': training,
            'payload_bytes': len(payload),
            'checksum': hashlib.sha256(payload).hexdigest(),
        }
        with open(path, 'wb') as f:
            f.write(json.dumps(header, sort_keys=True).encode('utf-8'))
            f.write(b'\n')
            f.write(payload)
        logger.info(f"Saved model {params.layer_dims} to {path}")

    @classmethod
    def checksum(cls, path):
        """Payload SHA-256 from the header line alone; None when the header is unreadable."""
        try:
            with open(path, 'rb') as f:
                header = json.loads(f.readline().decode('utf-8'))
        except (OSError, TypeError, UnicodeDecodeError, json.JSONDecodeError):
            return None
        return header.get('checksum') if isinstance(header, dict) else None

    @classmethod
    def load(cls, path) -> MlpParams:
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise ModelFileError(f"Cannot read model file {path}: {e}") from e

        head, sep, payload = raw.partition(b'\n')
        if not sep:
            raise CorruptModelError(f"{path}: missing model header")
        try:
            header = json.loads(head.decode('utf-8'))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CorruptModelError(f"{path}: unreadable model header ({e})") from e
        if not isinstance(header, dict) or header.get('format') != cls.FORMAT:
            raise CorruptModelError(f"{path}: not a {cls.FORMAT} file")
        if header.get('version') != cls.VERSION:
            raise ModelVersionError(f"{path}: unsupported model version {header.get('version')!r} "
                                    f"(expected {cls.VERSION})")

        try:
            dims = [int(d) for d in header['layer_dims']]
            p_max = int(header['p_max'])
            expected_bytes = int(header['payload_bytes'])
        except (KeyError, TypeError, ValueError) as e:
            raise CorruptModelError(f"{path}: incomplete model header ({e})") from e

        if len(payload) != expected_bytes:
            raise CorruptModelError(f"{path}: payload has {len(payload)} bytes, header declares {expected_bytes}")
        if hashlib.sha256(payload).hexdigest() != header.get('checksum'):
            raise CorruptModelError(f"{path}: payload checksum mismatch")
        if len(dims) < 2 or dims[0] != p_max + 3 or dims[-1] != 1:
            raise CorruptModelError(f"{path}: layer dims {dims} inconsistent with p_max={p_max}")

        n_values = sum(a * b + b for a, b in zip(dims[:-1], dims[1:]))
        if n_values * cls.DTYPE.itemsize != expected_bytes:
            raise CorruptModelError(f"{path}: layer dims {dims} need {n_values} values, payload differs")

        values = np.frombuffer(payload, dtype=cls.DTYPE)
        weights, biases = [], []
        offset = 0
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            weights.append(values[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out).astype(float))
            offset += fan_in * fan_out
            biases.append(values[offset:offset + fan_out].astype(float))
            offset += fan_out

        params = MlpParams(
            weights=weights,
            biases=biases,
            p_max=p_max,
            T_max_norm=float(header['T_max_norm']),
            loss_weight=float(header['w']),
            training=dict(header.get('training') or {}),
        )
        params.validate()
        return params


def save_model(params: MlpParams, path) -> None:
    ModelStore.save(params, path)


def load_model(path) -> MlpParams:
    return ModelStore.load(path)


def model_checksum(path):
    return ModelStore.checksum(path)
