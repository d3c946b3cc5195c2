"""Dataset file handling and per-record view materialization.

Dataset lines are `psmiles<TAB>prop1=value;prop2=value` (properties
optional). A record's four views are the token sequence, the heavy-atom
graph with terminus substitution applied, a 3D conformer, and a circular
fingerprint at the encoder's configured width.
"""

from dataclasses import dataclass, field

from .canonical import canonical_key
from .conformer import Conformer, embed_conformer
from .errors import ChemError
from .fingerprint import Fingerprint, compute_ecfp
from .graph import PolymerGraph, substitute_terminus
from .psmiles import parse_psmiles
from .tokenizer import TokenSeq, TokenVocabulary, tokenize


@dataclass
class PolymerRecord:
    psmiles: str
    properties: dict = field(default_factory=dict)
    graph: PolymerGraph = None
    tokens: TokenSeq = None
    conformer: Conformer = None
    fingerprint: Fingerprint = None
    key: str = None

    def has_all_views(self):
        return all(v is not None for v in
                   (self.graph, self.tokens, self.conformer,
                    self.fingerprint))


class DatasetFormatError(ValueError):
    def __init__(self, message, line_no):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_dataset_line(line, line_no):
    parts = line.rstrip("\n").split("\t")
    psmiles = parts[0].strip()
    if not psmiles:
        raise DatasetFormatError("empty polymer field", line_no)
    props = {}
    if len(parts) > 1 and parts[1].strip():
        for item in parts[1].split(";"):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise DatasetFormatError(
                    f"property entry {item!r} is not name=value", line_no)
            name, value = item.split("=", 1)
            try:
                props[name.strip()] = float(value)
            except ValueError:
                raise DatasetFormatError(
                    f"property {name.strip()!r} has non-numeric value "
                    f"{value!r}", line_no) from None
    if len(parts) > 2:
        raise DatasetFormatError("too many tab-separated fields", line_no)
    return PolymerRecord(psmiles=psmiles, properties=props)


def load_dataset(path):
    records = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            records.append(parse_dataset_line(line, line_no))
    return records


def save_dataset(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            props = ";".join(f"{k}={v!r}" for k, v in
                             sorted(rec.properties.items()))
            f.write(f"{rec.psmiles}\t{props}\n" if props
                    else f"{rec.psmiles}\n")


def validate_dataset(path):
    """Parse every line and polymer; returns a list of (line_no, message)."""
    errors = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            try:
                rec = parse_dataset_line(line, line_no)
                parse_psmiles(rec.psmiles)
            except DatasetFormatError as exc:
                errors.append((line_no, str(exc)))
            except ChemError as exc:
                errors.append((line_no, f"line {line_no}: {exc}"))
    return errors


def featurize_record(record, vocab=None, fp_bits=256, fp_radius=3,
                     conformer=None, seed=0):
    """Materialize all four views in place and return the record."""
    if vocab is None:
        vocab = TokenVocabulary.default()
    parsed = parse_psmiles(record.psmiles)
    record.tokens = tokenize(record.psmiles, vocab)
    record.graph = substitute_terminus(parsed)
    record.key = canonical_key(parsed)
    if conformer is not None:
        if len(conformer.coords) != len(record.graph.atoms):
            raise ChemError(
                f"sidecar conformer has {len(conformer.coords)} atoms, "
                f"graph has {len(record.graph.atoms)}")
        record.conformer = conformer
    else:
        record.conformer = embed_conformer(record.graph, seed=seed)
    record.fingerprint = compute_ecfp(record.graph, radius=fp_radius,
                                      nbits=fp_bits)
    return record


def featurize_dataset(records, vocab=None, fp_bits=256, fp_radius=3,
                      conformers=None, seed=0):
    if vocab is None:
        vocab = TokenVocabulary.default()
    for i, rec in enumerate(records):
        side = conformers.get(i) if conformers else None
        featurize_record(rec, vocab=vocab, fp_bits=fp_bits,
                         fp_radius=fp_radius, conformer=side,
                         seed=seed + i)
    return records
