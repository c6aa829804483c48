import csv
import json
from pathlib import Path
from typing import Union, Sequence, List, Tuple

import yaml


def fmt_path(fp: Union[str, Path]) -> Path:
    return Path(fp).expanduser().absolute()


def save_json(fp, obj):
    with open(fmt_path(fp), 'w') as f:
        json.dump(obj, f, indent=2)


def read_yaml(fp):
    with open(fmt_path(fp)) as f:
        return yaml.safe_load(f)


def save_yaml(fp, obj):
    with open(fmt_path(fp), 'w') as f:
        yaml.safe_dump(obj, f, default_flow_style=None, sort_keys=False)


def write_csv(fp, header: Sequence[str], rows):
    # floats go through repr so that reading them back is exact
    fp = fmt_path(fp)
    fp.parent.mkdir(parents=True, exist_ok=True)
    with open(fp, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    return fp


def read_csv(fp) -> Tuple[List[str], List[List[str]]]:
    with open(fmt_path(fp), newline='') as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [row for row in reader]
    return header, rows
