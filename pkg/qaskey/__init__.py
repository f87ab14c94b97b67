"""qaskey: q-series kernels, q/q^-1-symmetric Askey-Wilson subfamilies and their numerical verification."""

VERSION = "0.1.0"
