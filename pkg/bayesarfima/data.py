import csv
import json
import warnings

import numpy as np

from bayesarfima.errors import ConfigError, DataError


def read_series(path):
    """
    :param path: CSV file with the observations in its first column; a first
                 line that is not a number is taken as a header.
    :return: Float array with the observations.
    :raises DataError: If the file is unreadable, empty, or holds missing or
                       non-numeric values.
    """
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            values = np.atleast_1d(np.genfromtxt(path, delimiter=",", usecols=0, dtype=float))
    except (OSError, ValueError) as err:
        raise DataError("Cannot read {}: {}".format(path, err))
    if values.size and np.isnan(values[0]):
        values = values[1:]
    if not values.size:
        raise DataError("{} contains no observations".format(path))
    if not np.all(np.isfinite(values)):
        raise DataError("{} contains missing, non-numeric or non-finite values".format(path))
    return values


def write_series(path, x, header=True):
    """
    Writes one value per line with full precision.
    """
    try:
        np.savetxt(path, np.asarray(x, dtype=float), fmt="%.17g", header="x" if header else "", comments="")
    except OSError as err:
        raise DataError("Cannot write {}: {}".format(path, err))


def write_samples(path, samples):
    """
    Writes a :class:`SampleMatrix`; NaN entries (absent PACF components) are
    written as empty fields and the integer columns without decimals.
    """
    integer = {"iter", "p", "q"}
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(samples.columns)
            for row in samples.values:
                writer.writerow(["" if np.isnan(v) else (int(v) if name in integer else repr(float(v)))
                                 for name, v in zip(samples.columns, row)])
    except OSError as err:
        raise DataError("Cannot write {}: {}".format(path, err))


def write_records(path, records):
    """
    Writes a list of flat dictionaries (study replicates) as CSV with the union
    of their keys as header.
    """
    columns = []
    for record in records:
        columns.extend(k for k in record if k not in columns)
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, columns, restval="")
            writer.writeheader()
            writer.writerows(records)
    except OSError as err:
        raise DataError("Cannot write {}: {}".format(path, err))


def to_jsonable(value):
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if not np.isfinite(value) else float(value)
    return value


def write_json(path, payload):
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True)
    if path is None or path == "-":
        print(text)
        return
    try:
        with open(path, "w") as handle:
            handle.write(text + "\n")
    except OSError as err:
        raise DataError("Cannot write {}: {}".format(path, err))


def read_config(path):
    """
    :param path: JSON file with a flat object of option values.
    :return: Dictionary with the options.
    :raises ConfigError: If the file cannot be parsed or is not an object.
    """
    try:
        with open(path) as handle:
            config = json.load(handle)
    except (OSError, ValueError) as err:
        raise ConfigError("Cannot read configuration {}: {}".format(path, err))
    if not isinstance(config, dict):
        raise ConfigError("Configuration {} must hold a JSON object".format(path))
    return config
