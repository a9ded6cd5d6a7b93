"""Corpus ingestion, occurrence masking, context windows, splits and batches.

Input corpora are pre-tokenized. Two file formats are read:

plain   one space-tokenized sentence per line; a blank line separates
        documents.
tagged  one ``surface<TAB>pos`` pair per line; a blank line ends a sentence,
        a double blank line ends a document.

Each occurrence of "die"/"dat" (matched case-insensitively) is replaced, one
occurrence at a time, by the reserved PREDICT token; the replaced surface
form gives the binary target (0 = dat, 1 = die) and, where the token carries
one of the three recognized tags, the ternary POS target (0 = subordinating
conjunction, 1 = relative pronoun, 2 = demonstrative pronoun).
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from diedat.errors import ConfigError, ParseError
from diedat.tensor import make_rng

PREDICT_TOKEN = "PREDICT"

TARGET_LABELS = {"dat": 0, "die": 1}
TARGET_NAMES = ("dat", "die")

POS_LABELS = {
    "subordinating_conjunction": 0,
    "relative_pronoun": 1,
    "demonstrative_pronoun": 2,
}
POS_NAMES = ("sc", "rp", "dp")

WINDOW_MODES = ("full", "windowed", "windowed_no_boundaries")


@dataclass
class Token:
    surface: str
    pos: str | None = None


@dataclass
class Sentence:
    tokens: list[Token]

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


@dataclass
class Document:
    sentences: list[Sentence]
    source_id: str = ""


@dataclass
class MaskedSample:
    """One die/dat occurrence, masked and windowed."""

    window_tokens: list[str]
    target_label: int
    pos_label: int | None = None
    provenance: tuple[str, int, int] | None = None


@dataclass
class DatasetSplit:
    train: list[MaskedSample]
    validation: list[MaskedSample]
    test: list[MaskedSample]
    split_seed: int = 0


# ---------------------------------------------------------------------------
# ingestion


def ingest(path, format: str = "plain") -> list[Document]:
    """Read a corpus file into Documents; see the module docstring for formats."""
    if format not in ("plain", "tagged"):
        raise ConfigError(f"unknown corpus format {format!r}")
    path = Path(path)
    stem = path.name
    docs: list[Document] = []
    sentences: list[Sentence] = []
    tokens: list[Token] = []

    def flush_sentence():
        nonlocal tokens
        if tokens:
            sentences.append(Sentence(tokens))
            tokens = []

    def flush_document():
        nonlocal sentences
        flush_sentence()
        if sentences:
            docs.append(Document(sentences, source_id=f"{stem}:{len(docs)}"))
            sentences = []

    blanks = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            stripped = line.strip()
            if format == "plain":
                if not stripped:
                    flush_document()
                else:
                    tokens = [Token(s) for s in stripped.split()]
                    flush_sentence()
            else:
                if not stripped:
                    blanks += 1
                    if blanks == 1:
                        flush_sentence()
                    elif blanks == 2:
                        flush_document()
                        blanks = 0
                    continue
                blanks = 0
                parts = stripped.split("\t")
                if len(parts) != 2:
                    raise ParseError(
                        f"{path}:{line_no}: expected 'surface<TAB>pos', got {len(parts)} field(s)"
                    )
                tokens.append(Token(parts[0], parts[1]))
    flush_document()
    return docs


# ---------------------------------------------------------------------------
# masking and windows


def _occurrence_sites(doc: Document):
    for s_i, sent in enumerate(doc.sentences):
        for t_i, tok in enumerate(sent.tokens):
            lower = tok.surface.lower()
            if lower in TARGET_LABELS:
                yield s_i, t_i, lower, tok.pos


def window(doc: Document, sent_idx: int, tok_idx: int, mode: str = "windowed",
           radius: int = 5) -> list[str]:
    """Token window around one masked site, with the site shown as PREDICT.

    full: the whole sentence. windowed: up to `radius` tokens before and
    after the site within its sentence. windowed_no_boundaries: the same
    span over the document token stream, crossing sentence boundaries but
    never document boundaries.
    """
    if radius < 1:
        raise ConfigError(f"window radius must be >= 1, got {radius}")
    if mode not in WINDOW_MODES:
        raise ConfigError(f"unknown window mode {mode!r}")

    if mode == "full":
        out = doc.sentences[sent_idx].surfaces()
        out[tok_idx] = PREDICT_TOKEN
        return out
    if mode == "windowed":
        surfaces = doc.sentences[sent_idx].surfaces()
        surfaces[tok_idx] = PREDICT_TOKEN
        lo = max(0, tok_idx - radius)
        return surfaces[lo:tok_idx + radius + 1]
    # windowed_no_boundaries: flatten the document
    stream: list[str] = []
    site = -1
    for s_i, sent in enumerate(doc.sentences):
        for t_i, tok in enumerate(sent.tokens):
            if s_i == sent_idx and t_i == tok_idx:
                site = len(stream)
                stream.append(PREDICT_TOKEN)
            else:
                stream.append(tok.surface)
    lo = max(0, site - radius)
    return stream[lo:site + radius + 1]


def mask_occurrences(doc: Document, mode: str = "full", radius: int = 5) -> list[MaskedSample]:
    """One MaskedSample per die/dat occurrence; only that occurrence is replaced."""
    samples = []
    for s_i, t_i, lower, pos in _occurrence_sites(doc):
        samples.append(MaskedSample(
            window_tokens=window(doc, s_i, t_i, mode, radius),
            target_label=TARGET_LABELS[lower],
            pos_label=POS_LABELS.get(pos) if pos is not None else None,
            provenance=(doc.source_id, s_i, t_i),
        ))
    return samples


# ---------------------------------------------------------------------------
# splits and batches


def split(samples: list[MaskedSample], seed: int) -> DatasetSplit:
    """Seeded shuffle, then 70% train / 15% validation / rest test."""
    n = len(samples)
    perm = make_rng(seed).permutation(n)
    shuffled = [samples[i] for i in perm]
    n_train = (70 * n) // 100
    n_val = (15 * n) // 100
    return DatasetSplit(
        train=shuffled[:n_train],
        validation=shuffled[n_train:n_train + n_val],
        test=shuffled[n_train + n_val:],
        split_seed=seed,
    )


def batches(samples: list[MaskedSample], batch_size: int, epoch: int,
            base_seed: int) -> list[list[MaskedSample]]:
    """Reshuffled batches, deterministic per (base_seed, epoch)."""
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([base_seed, epoch])))
    perm = rng.permutation(len(samples))
    shuffled = [samples[i] for i in perm]
    return [shuffled[i:i + batch_size] for i in range(0, len(shuffled), batch_size)]


@dataclass
class SampleStats:
    n: int = 0
    dat: int = 0
    die: int = 0
    sc: int = 0
    rp: int = 0
    dp: int = 0
    pos_missing: int = 0


def stats(samples: list[MaskedSample]) -> SampleStats:
    s = SampleStats()
    for sample in samples:
        s.n += 1
        if sample.target_label == 0:
            s.dat += 1
        else:
            s.die += 1
        if sample.pos_label is None:
            s.pos_missing += 1
        elif sample.pos_label == 0:
            s.sc += 1
        elif sample.pos_label == 1:
            s.rp += 1
        else:
            s.dp += 1
    return s


def format_stats(s: SampleStats) -> str:
    lines = [f"samples: {s.n}", f"dat: {s.dat}", f"die: {s.die}",
             f"sc: {s.sc}", f"rp: {s.rp}", f"dp: {s.dp}",
             f"pos_missing: {s.pos_missing}"]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# dataset TSV


def write_dataset_tsv(samples: list[MaskedSample], path) -> None:
    """One sample per line: target<TAB>pos-or-dash<TAB>space-joined tokens."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            pos = "-" if s.pos_label is None else str(s.pos_label)
            fh.write(f"{s.target_label}\t{pos}\t{' '.join(s.window_tokens)}\n")


def read_dataset_tsv(path) -> list[MaskedSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}:{line_no}: expected 3 tab-separated fields")
            target, pos, toks = parts
            if target not in ("0", "1"):
                raise ParseError(f"{path}:{line_no}: target label must be 0 or 1")
            if pos not in ("-", "0", "1", "2"):
                raise ParseError(f"{path}:{line_no}: pos label must be -, 0, 1 or 2")
            tokens = toks.split()
            if tokens.count(PREDICT_TOKEN) != 1:
                raise ParseError(f"{path}:{line_no}: window must contain exactly one {PREDICT_TOKEN}")
            samples.append(MaskedSample(
                window_tokens=tokens,
                target_label=int(target),
                pos_label=None if pos == "-" else int(pos),
                provenance=(str(path), line_no, tokens.index(PREDICT_TOKEN)),
            ))
    return samples


# ---------------------------------------------------------------------------
# corpus writers


def write_plain(docs: list[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, doc in enumerate(docs):
            if i:
                fh.write("\n")
            for sent in doc.sentences:
                fh.write(" ".join(sent.surfaces()) + "\n")


def write_tagged(docs: list[Document], path) -> None:
    # one blank line ends a sentence, a second consecutive one ends the document
    with open(path, "w", encoding="utf-8") as fh:
        for i, doc in enumerate(docs):
            if i:
                fh.write("\n\n")
            for j, sent in enumerate(doc.sentences):
                if j:
                    fh.write("\n")
                for tok in sent.tokens:
                    fh.write(f"{tok.surface}\t{tok.pos or 'x'}\n")


# ---------------------------------------------------------------------------
# synthetic corpus

_GRAMMAR_NOTE = """Pronoun choice by antecedent:
singular masculine noun -> die; singular neuter noun -> dat; plural -> die;
a clause introduced after a verb of saying -> dat (subordinating conjunction).
"""


@dataclass
class Noun:
    surface: str
    gender: str  # masculine | neuter
    number: str  # singular | plural


@dataclass
class Lexicon:
    nouns: list[Noun]
    verbs_sg: list[str]
    verbs_pl: list[str]
    say_verbs: list[str]
    subjects: list[str]
    fillers: list[str]
    tails: list[list[str]]

    def validate(self) -> None:
        if not self.nouns or not self.verbs_sg or not self.verbs_pl:
            raise ConfigError("lexicon must provide nouns and verbs")
        if not self.say_verbs or not self.subjects or not self.fillers or not self.tails:
            raise ConfigError("lexicon must provide say_verbs, subjects, fillers and tails")
        singular = [n for n in self.nouns if n.number == "singular"]
        if not any(n.gender == "masculine" for n in singular) or \
           not any(n.gender == "neuter" for n in singular):
            raise ConfigError("lexicon needs singular nouns of both genders")
        for word in self._all_words():
            if word.lower() in TARGET_LABELS or word in (PREDICT_TOKEN, "UNK"):
                raise ConfigError(f"lexicon word {word!r} is reserved")
        for n in self.nouns:
            if n.gender not in ("masculine", "neuter") or n.number not in ("singular", "plural"):
                raise ConfigError(f"noun {n.surface!r} has invalid gender/number")

    def _all_words(self):
        for n in self.nouns:
            yield n.surface
        yield from self.verbs_sg
        yield from self.verbs_pl
        yield from self.say_verbs
        yield from self.subjects
        yield from self.fillers
        for tail in self.tails:
            yield from tail

    @classmethod
    def from_json(cls, path) -> "Lexicon":
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}: invalid lexicon JSON: {e}") from e
        try:
            lex = cls(
                nouns=[Noun(**n) for n in raw["nouns"]],
                verbs_sg=list(raw["verbs_sg"]),
                verbs_pl=list(raw["verbs_pl"]),
                say_verbs=list(raw["say_verbs"]),
                subjects=list(raw["subjects"]),
                fillers=list(raw["fillers"]),
                tails=[list(t) for t in raw["tails"]],
            )
        except (KeyError, TypeError) as e:
            raise ParseError(f"{path}: lexicon is missing fields: {e}") from e
        lex.validate()
        return lex


DEFAULT_LEXICON = Lexicon(
    nouns=[
        Noun("man", "masculine", "singular"),
        Noun("hond", "masculine", "singular"),
        Noun("stoel", "masculine", "singular"),
        Noun("boom", "masculine", "singular"),
        Noun("vogel", "masculine", "singular"),
        Noun("huis", "neuter", "singular"),
        Noun("kind", "neuter", "singular"),
        Noun("boek", "neuter", "singular"),
        Noun("paard", "neuter", "singular"),
        Noun("raam", "neuter", "singular"),
        Noun("mannen", "masculine", "plural"),
        Noun("honden", "masculine", "plural"),
        Noun("huizen", "neuter", "plural"),
        Noun("boeken", "neuter", "plural"),
    ],
    verbs_sg=["loopt", "slaapt", "valt", "werkt", "wacht"],
    verbs_pl=["lopen", "slapen", "vallen", "werken", "wachten"],
    say_verbs=["zei", "dacht", "hoorde", "wist", "zag"],
    subjects=["ik", "jij", "hij", "zij", "iedereen"],
    fillers=["daar", "hier", "vandaag", "gisteren", "snel", "rustig"],
    tails=[
        ["je", "gek", "bent"],
        ["het", "regent"],
        ["de", "zon", "schijnt"],
        ["we", "laat", "zijn"],
        ["alles", "goed", "komt"],
    ],
)


@dataclass
class SyntheticSite:
    """Generator-side record of one emitted die/dat site."""

    doc_idx: int
    sent_idx: int
    tok_idx: int
    surface: str
    pos_tag: str
    antecedent_gender: str | None
    antecedent_number: str | None


def _determiner(noun: Noun) -> str:
    return "het" if noun.gender == "neuter" and noun.number == "singular" else "de"


def _pronoun(noun: Noun) -> str:
    # singular neuter -> dat; masculine singular and all plurals -> die
    return "dat" if noun.gender == "neuter" and noun.number == "singular" else "die"


def _verb(lex: Lexicon, noun: Noun, rng) -> str:
    pool = lex.verbs_sg if noun.number == "singular" else lex.verbs_pl
    return pool[rng.integers(len(pool))]


def synthesize(n_sentences: int, seed: int, lexicon: Lexicon | None = None,
               p_cross: float = 0.25) -> tuple[list[Document], list[SyntheticSite]]:
    """Generate documents plus the per-site record used by the invariants.

    Four sentence patterns are drawn: relative pronoun ("de man die daar
    loopt"), dependent demonstrative ("die man loopt daar"), subordinating
    conjunction ("ik zei dat ..."), and - with probability p_cross - a
    two-sentence document whose second sentence opens with an independent
    demonstrative referring to a noun in the first ("de man loopt . die was
    daar"). In the last pattern the pronoun's own sentence carries no gender
    cue, so the label is only recoverable from the preceding sentence.
    """
    lex = lexicon if lexicon is not None else DEFAULT_LEXICON
    lex.validate()
    if n_sentences < 0:
        raise ConfigError(f"n_sentences must be >= 0, got {n_sentences}")
    if not 0.0 <= p_cross <= 1.0:
        raise ConfigError(f"p_cross must be in [0, 1], got {p_cross}")
    rng = make_rng(seed)
    singular_nouns = [n for n in lex.nouns if n.number == "singular"]

    docs: list[Document] = []
    sites: list[SyntheticSite] = []
    total = 0
    while total < n_sentences:
        doc_idx = len(docs)
        u = rng.random()
        if u < p_cross:
            # two sentences; the pronoun refers back across the boundary
            noun = singular_nouns[rng.integers(len(singular_nouns))]
            first = [Token(_determiner(noun), "det"), Token(noun.surface, "noun"),
                     Token(_verb(lex, noun, rng), "verb")]
            for _ in range(rng.integers(0, 3)):
                first.append(Token(lex.fillers[rng.integers(len(lex.fillers))], "adv"))
            pron = _pronoun(noun)
            second = [Token(pron, "demonstrative_pronoun"), Token("was", "verb"),
                      Token(lex.fillers[rng.integers(len(lex.fillers))], "adv"),
                      Token(lex.fillers[rng.integers(len(lex.fillers))], "adv")]
            docs.append(Document([Sentence(first), Sentence(second)],
                                 source_id=f"synth:{doc_idx}"))
            sites.append(SyntheticSite(doc_idx, 1, 0, pron, "demonstrative_pronoun",
                                       noun.gender, noun.number))
            total += 2
            continue
        kind = rng.integers(3)
        if kind == 0:
            # relative clause: det noun PRON adv verb
            noun = lex.nouns[rng.integers(len(lex.nouns))]
            pron = _pronoun(noun)
            toks = [Token(_determiner(noun), "det"), Token(noun.surface, "noun"),
                    Token(pron, "relative_pronoun"),
                    Token(lex.fillers[rng.integers(len(lex.fillers))], "adv"),
                    Token(_verb(lex, noun, rng), "verb")]
            sites.append(SyntheticSite(doc_idx, 0, 2, pron, "relative_pronoun",
                                       noun.gender, noun.number))
        elif kind == 1:
            # dependent demonstrative: PRON noun verb adv
            noun = lex.nouns[rng.integers(len(lex.nouns))]
            pron = _pronoun(noun)
            toks = [Token(pron, "demonstrative_pronoun"), Token(noun.surface, "noun"),
                    Token(_verb(lex, noun, rng), "verb"),
                    Token(lex.fillers[rng.integers(len(lex.fillers))], "adv")]
            sites.append(SyntheticSite(doc_idx, 0, 0, pron, "demonstrative_pronoun",
                                       noun.gender, noun.number))
        else:
            # subordinating clause: subject say-verb dat tail...
            subj = lex.subjects[rng.integers(len(lex.subjects))]
            say = lex.say_verbs[rng.integers(len(lex.say_verbs))]
            tail = lex.tails[rng.integers(len(lex.tails))]
            toks = [Token(subj, "pron"), Token(say, "verb"),
                    Token("dat", "subordinating_conjunction")]
            toks += [Token(w, "x") for w in tail]
            sites.append(SyntheticSite(doc_idx, 0, 2, "dat", "subordinating_conjunction",
                                       None, None))
        docs.append(Document([Sentence(toks)], source_id=f"synth:{doc_idx}"))
        total += 1
    return docs, sites


def generate_synthetic(n_sentences: int, seed: int, lexicon: Lexicon | None = None,
                       p_cross: float = 0.25) -> list[Document]:
    """Deterministic synthetic corpus with gold die/dat labels and POS tags."""
    docs, _ = synthesize(n_sentences, seed, lexicon, p_cross)
    return docs
