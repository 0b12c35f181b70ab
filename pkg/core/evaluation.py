"""Edit-distance alignment, phoneme error rates and the seen/unseen breakdown.

All rates are pooled over the corpus: total edits over total reference
length, times 100.
"""

import hashlib
from collections import Counter, OrderedDict, namedtuple

import numpy as np

from core.errors import EmptyReference, MismatchedTestSet

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"
OP_KINDS = (MATCH, SUBSTITUTE, DELETE, INSERT)

NOT_APPLICABLE = "N/A"

AlignOp = namedtuple("AlignOp", "kind ref hyp")


class Alignment:
    def __init__(self, ops):
        self.ops = tuple(ops)

    @property
    def distance(self):
        return sum(1 for op in self.ops if op.kind != MATCH)

    def counts(self):
        counts = Counter({kind: 0 for kind in OP_KINDS})
        counts.update(op.kind for op in self.ops)
        return counts

    def reference(self):
        return [op.ref for op in self.ops if op.kind != INSERT]

    def hypothesis(self):
        return [op.hyp for op in self.ops if op.kind != DELETE]

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)


def _distance_table(ref, hyp):
    n, m = len(ref), len(hyp)
    D = np.zeros((n + 1, m + 1), dtype=np.int64)
    D[:, 0] = np.arange(n + 1)
    D[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            D[i, j] = min(
                D[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]),
                D[i - 1, j] + 1,
                D[i, j - 1] + 1,
            )
    return D


def align(ref, hyp):
    """Minimum edit alignment; backtrace prefers match, substitute, delete, insert."""
    ref, hyp = list(ref), list(hyp)
    D = _distance_table(ref, hyp)
    ops = []
    i, j = len(ref), len(hyp)
    while i or j:
        here = D[i, j]
        if i and j and ref[i - 1] == hyp[j - 1] and here == D[i - 1, j - 1]:
            ops.append(AlignOp(MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i and j and here == D[i - 1, j - 1] + 1:
            ops.append(AlignOp(SUBSTITUTE, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i and here == D[i - 1, j] + 1:
            ops.append(AlignOp(DELETE, ref[i - 1], None))
            i -= 1
        else:
            ops.append(AlignOp(INSERT, None, hyp[j - 1]))
            j -= 1
    return Alignment(reversed(ops))


def _digest(references):
    h = hashlib.sha1()
    for ref in references:
        h.update(" ".join(ref).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


class ErrorReport:
    """Pooled edit counts and the rates derived from them."""

    def __init__(self, ref_len, substitutions, deletions, insertions, matches=0, utterances=0, digest=None):
        self.ref_len = ref_len
        self.substitutions = substitutions
        self.deletions = deletions
        self.insertions = insertions
        self.matches = matches
        self.utterances = utterances
        self.digest = digest

    def _rate(self, count):
        return 100.0 * count / self.ref_len

    @property
    def substitution_rate(self):
        return self._rate(self.substitutions)

    @property
    def deletion_rate(self):
        return self._rate(self.deletions)

    @property
    def insertion_rate(self):
        return self._rate(self.insertions)

    @property
    def per(self):
        return self._rate(self.substitutions + self.deletions + self.insertions)

    def metrics(self):
        return OrderedDict(
            [
                ("per", self.per),
                ("substitution_rate", self.substitution_rate),
                ("deletion_rate", self.deletion_rate),
                ("insertion_rate", self.insertion_rate),
                ("ref_len", self.ref_len),
                ("substitutions", self.substitutions),
                ("deletions", self.deletions),
                ("insertions", self.insertions),
            ]
        )

    def __repr__(self):
        return f"ErrorReport(per={self.per:.2f}, ref_len={self.ref_len})"


def error_report(pairs):
    pairs = [(list(ref), list(hyp)) for ref, hyp in pairs]
    totals = Counter()
    for ref, hyp in pairs:
        totals.update(align(ref, hyp).counts())
    ref_len = sum(len(ref) for ref, _ in pairs)
    if ref_len == 0:
        raise EmptyReference("every reference transcript is empty")
    return ErrorReport(
        ref_len,
        totals[SUBSTITUTE],
        totals[DELETE],
        totals[INSERT],
        matches=totals[MATCH],
        utterances=len(pairs),
        digest=_digest(ref for ref, _ in pairs),
    )


def _pooled_error(stats, phonemes):
    occurrences = sum(stats[p][0] for p in phonemes)
    if occurrences == 0:
        return None
    correct = sum(stats[p][1] for p in phonemes)
    return 100.0 * (occurrences - correct) / occurrences


class SeenUnseenReport:
    """Per-phoneme correction rates split by whether training ever saw the phoneme.

    Error figures are None where a group has no reference occurrences.
    """

    def __init__(self, stats, seen, unseen):
        self.stats = stats
        self.seen = tuple(seen)
        self.unseen = tuple(unseen)

    def occurrences(self, phoneme):
        return self.stats[phoneme][0]

    def correction_rate(self, phoneme):
        occurrences, correct = self.stats[phoneme]
        if occurrences == 0:
            return None
        return 100.0 * correct / occurrences

    def phoneme_error(self, phoneme):
        rate = self.correction_rate(phoneme)
        return None if rate is None else 100.0 - rate

    @property
    def seen_per(self):
        return _pooled_error(self.stats, self.seen)

    @property
    def unseen_per(self):
        return _pooled_error(self.stats, self.unseen)

    @property
    def overall_per(self):
        return _pooled_error(self.stats, self.seen + self.unseen)


def seen_unseen_split(pairs, test_inventory, train_union):
    phonemes = list(getattr(test_inventory, "phonemes", test_inventory))
    train_union = set(train_union)

    occurrences = Counter()
    correct = Counter()
    for ref, hyp in pairs:
        for op in align(ref, hyp):
            if op.kind == INSERT:
                continue
            occurrences[op.ref] += 1
            if op.kind == MATCH:
                correct[op.ref] += 1

    # Reference phonemes missing from the inventory still get scored.
    extra = sorted(p for p in occurrences if p not in set(phonemes))
    stats = OrderedDict((p, (occurrences[p], correct[p])) for p in phonemes + extra)
    seen = [p for p in stats if p in train_union]
    unseen = [p for p in stats if p not in train_union]
    return SeenUnseenReport(stats, seen, unseen)


class ModelComparison:
    """Deltas are baseline minus attribute model, so positive means the attribute model wins."""

    def __init__(self, upm_report, baseline_report, language=None):
        self.upm = upm_report
        self.baseline = baseline_report
        self.language = language

    def deltas(self):
        upm = self.upm.metrics()
        base = self.baseline.metrics()
        return OrderedDict(
            (key, base[key] - upm[key])
            for key in ("per", "substitution_rate", "deletion_rate", "insertion_rate")
        )


def compare_models(upm_report, baseline_report, language=None):
    if upm_report.ref_len != baseline_report.ref_len or (
        upm_report.digest is not None
        and baseline_report.digest is not None
        and upm_report.digest != baseline_report.digest
    ):
        raise MismatchedTestSet("the two reports were not computed on the same reference transcripts")
    return ModelComparison(upm_report, baseline_report, language)


def _fmt(value):
    if value is None:
        return NOT_APPLICABLE
    if isinstance(value, (int, np.integer)):
        return str(value)
    return f"{value:.2f}"


def report_to_tsv(report):
    return "".join(f"{key}\t{_fmt(value)}\n" for key, value in report.metrics().items())


def seen_unseen_to_tsv(report):
    rows = [
        ("seen_per", report.seen_per),
        ("unseen_per", report.unseen_per),
        ("overall_per", report.overall_per),
        ("seen_phonemes", len(report.seen)),
        ("unseen_phonemes", len(report.unseen)),
    ]
    for p in report.stats:
        group = "unseen" if p in report.unseen else "seen"
        rows.append((f"correction[{group}]:{p}", report.correction_rate(p)))
    return "".join(f"{key}\t{_fmt(value)}\n" for key, value in rows)


def comparison_to_tsv(comparisons):
    lines = ["language\tbaseline_per\tupm_per\tbaseline_sub\tupm_sub"]
    for c in comparisons:
        lines.append(
            "\t".join(
                [
                    c.language or "-",
                    _fmt(c.baseline.per),
                    _fmt(c.upm.per),
                    _fmt(c.baseline.substitution_rate),
                    _fmt(c.upm.substitution_rate),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def pair_transcripts(references, hypotheses):
    """Join {utt_id: ref} and {utt_id: hyp} into (ref, hyp) pairs in reference order."""
    missing = [u for u in references if u not in hypotheses]
    extra = [u for u in hypotheses if u not in references]
    if missing or extra:
        detail = []
        if missing:
            detail.append(f"no hypothesis for {', '.join(missing[:5])}")
        if extra:
            detail.append(f"unknown utterances {', '.join(extra[:5])}")
        raise MismatchedTestSet("; ".join(detail))
    return [(references[u], hypotheses[u]) for u in references]
