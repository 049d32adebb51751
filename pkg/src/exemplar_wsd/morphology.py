"""Morphological forms and a rule-based fallback lemmatizer for English."""

from enum import Enum
from typing import Dict, FrozenSet, Optional, Tuple


class MorphForm(Enum):
    """Morphological form of a target word."""
    SINGULAR = "singular"
    PLURAL = "plural"
    INFINITIVE = "infinitive"
    PRESENT_3SG = "present-3sg"
    PAST = "past"
    PRESENT_PARTICIPLE = "present-participle"
    PAST_PARTICIPLE = "past-participle"

    @classmethod
    def for_pos(cls, coarse_pos: str) -> FrozenSet["MorphForm"]:
        """Return the forms a target of the given coarse POS (N or V) may take."""
        if coarse_pos == "N":
            return NOUN_FORMS
        if coarse_pos == "V":
            return VERB_FORMS
        return frozenset()


NOUN_FORMS = frozenset({MorphForm.SINGULAR, MorphForm.PLURAL})
VERB_FORMS = frozenset({
    MorphForm.INFINITIVE,
    MorphForm.PRESENT_3SG,
    MorphForm.PAST,
    MorphForm.PRESENT_PARTICIPLE,
    MorphForm.PAST_PARTICIPLE,
})

VOWELS = frozenset("aeiou")

# surface -> (lemma, form); forms shared by past and participle resolve to past
IRREGULAR_VERBS: Dict[str, Tuple[str, MorphForm]] = {
    "am": ("be", MorphForm.PRESENT_3SG),
    "is": ("be", MorphForm.PRESENT_3SG),
    "are": ("be", MorphForm.INFINITIVE),
    "was": ("be", MorphForm.PAST),
    "were": ("be", MorphForm.PAST),
    "been": ("be", MorphForm.PAST_PARTICIPLE),
    "being": ("be", MorphForm.PRESENT_PARTICIPLE),
    "has": ("have", MorphForm.PRESENT_3SG),
    "had": ("have", MorphForm.PAST),
    "having": ("have", MorphForm.PRESENT_PARTICIPLE),
    "does": ("do", MorphForm.PRESENT_3SG),
    "did": ("do", MorphForm.PAST),
    "done": ("do", MorphForm.PAST_PARTICIPLE),
    "goes": ("go", MorphForm.PRESENT_3SG),
    "went": ("go", MorphForm.PAST),
    "gone": ("go", MorphForm.PAST_PARTICIPLE),
    "became": ("become", MorphForm.PAST),
    "brought": ("bring", MorphForm.PAST),
    "built": ("build", MorphForm.PAST),
    "came": ("come", MorphForm.PAST),
    "drew": ("draw", MorphForm.PAST),
    "drawn": ("draw", MorphForm.PAST_PARTICIPLE),
    "fell": ("fall", MorphForm.PAST),
    "fallen": ("fall", MorphForm.PAST_PARTICIPLE),
    "gave": ("give", MorphForm.PAST),
    "given": ("give", MorphForm.PAST_PARTICIPLE),
    "grew": ("grow", MorphForm.PAST),
    "grown": ("grow", MorphForm.PAST_PARTICIPLE),
    "held": ("hold", MorphForm.PAST),
    "kept": ("keep", MorphForm.PAST),
    "knew": ("know", MorphForm.PAST),
    "known": ("know", MorphForm.PAST_PARTICIPLE),
    "led": ("lead", MorphForm.PAST),
    "left": ("leave", MorphForm.PAST),
    "lay": ("lie", MorphForm.PAST),
    "lain": ("lie", MorphForm.PAST_PARTICIPLE),
    "lies": ("lie", MorphForm.PRESENT_3SG),
    "lying": ("lie", MorphForm.PRESENT_PARTICIPLE),
    "lost": ("lose", MorphForm.PAST),
    "meant": ("mean", MorphForm.PAST),
    "met": ("meet", MorphForm.PAST),
    "paid": ("pay", MorphForm.PAST),
    "rose": ("rise", MorphForm.PAST),
    "risen": ("rise", MorphForm.PAST_PARTICIPLE),
    "ran": ("run", MorphForm.PAST),
    "saw": ("see", MorphForm.PAST),
    "seen": ("see", MorphForm.PAST_PARTICIPLE),
    "sent": ("send", MorphForm.PAST),
    "shown": ("show", MorphForm.PAST_PARTICIPLE),
    "sat": ("sit", MorphForm.PAST),
    "spoke": ("speak", MorphForm.PAST),
    "spoken": ("speak", MorphForm.PAST_PARTICIPLE),
    "stood": ("stand", MorphForm.PAST),
    "struck": ("strike", MorphForm.PAST),
    "stricken": ("strike", MorphForm.PAST_PARTICIPLE),
    "took": ("take", MorphForm.PAST),
    "taken": ("take", MorphForm.PAST_PARTICIPLE),
    "told": ("tell", MorphForm.PAST),
    "thought": ("think", MorphForm.PAST),
    "wrote": ("write", MorphForm.PAST),
    "written": ("write", MorphForm.PAST_PARTICIPLE),
}

# The frequent, highly ambiguous verbs of the large sense-tagged corpus
KNOWN_VERB_LEMMAS = frozenset("""
    add appear ask become believe bring build call carry change come consider create
    continue determine develop draw expect fall give go grow happen help hold
    indicate involve keep know lead leave lie like live look lose mean meet
    move need open pay raise read receive remember require return rise run see
    seem send set show sit speak stand start stop strike take talk tell think
    turn wait walk want work write be have do
""".split())

IRREGULAR_PLURALS: Dict[str, str] = {
    "men": "man",
    "women": "woman",
    "children": "child",
    "people": "person",
    "feet": "foot",
    "teeth": "tooth",
    "mice": "mouse",
    "geese": "goose",
    "data": "datum",
    "criteria": "criterion",
}

# Verbs and nouns whose base form ends in -use; other -uses words drop "es"
USE_LEMMAS = frozenset("""
    use abuse accuse amuse confuse diffuse excuse fuse infuse misuse muse
    peruse recluse refuse reuse ruse
""".split())

# Doubled final consonants that belong to the stem ("passing", "buzzing")
KEEP_DOUBLED = frozenset("sfz")


def coarse_pos(tag: str) -> Optional[str]:
    """Map an opaque POS tag to N or V by its first letter, else None."""
    if not tag:
        return None
    head = tag[0].upper()
    if head in ("N", "V"):
        return head
    return None


def lemmatize_fallback(surface: str, pos: str) -> Tuple[str, Optional[MorphForm]]:
    """
    Derive a lemma and morphological form from a surface word.

    Only tokens whose corpus line omits the lemma column go through here.
    Nouns and verbs (tags starting with N or V) get a form; everything else
    is lowercased and returned with no form.

    Args:
        surface: Word as it appears in text
        pos: Opaque POS tag of the word

    Returns:
        Tuple of (lemma, morphological form or None)
    """
    word = surface.lower()
    category = coarse_pos(pos)
    if category == "N":
        return _noun_lemma(word)
    if category == "V":
        return _verb_lemma(word, pos)
    return word, None


def _noun_lemma(word: str) -> Tuple[str, MorphForm]:
    if word in IRREGULAR_PLURALS:
        return IRREGULAR_PLURALS[word], MorphForm.PLURAL
    if len(word) > 4 and word.endswith("ies"):
        return word[:-3] + "y", MorphForm.PLURAL
    if word.endswith("uses"):
        return _strip_uses(word), MorphForm.PLURAL
    if word.endswith(("sses", "shes", "ches", "xes", "zzes")):
        return word[:-2], MorphForm.PLURAL
    if word.endswith(("ss", "us", "is")) or len(word) <= 2:
        return word, MorphForm.SINGULAR
    if word.endswith("s"):
        return word[:-1], MorphForm.PLURAL
    return word, MorphForm.SINGULAR


def _verb_lemma(word: str, tag: str) -> Tuple[str, MorphForm]:
    participle_tag = tag.upper() == "VBN"

    if word in IRREGULAR_VERBS:
        lemma, form = IRREGULAR_VERBS[word]
        if form is MorphForm.PAST and participle_tag:
            form = MorphForm.PAST_PARTICIPLE
        return lemma, form
    if word in KNOWN_VERB_LEMMAS:
        return word, MorphForm.INFINITIVE

    if len(word) > 4 and word.endswith("ing") and _has_vowel(word[:-3]):
        stem = word[:-3]
        # dying, tying, vying
        if len(stem) == 2 and stem.endswith("y"):
            return stem[0] + "ie", MorphForm.PRESENT_PARTICIPLE
        return _restore_stem(stem), MorphForm.PRESENT_PARTICIPLE

    if len(word) > 3 and word.endswith("ed") and _has_vowel(word[:-2]):
        form = MorphForm.PAST_PARTICIPLE if participle_tag else MorphForm.PAST
        if word.endswith("ied"):
            return _y_stem(word[:-3]), form
        return _restore_stem(word[:-2]), form

    if len(word) > 4 and word.endswith("en"):
        stem = _known_stem(word[:-2])
        if stem is not None:
            return stem, MorphForm.PAST_PARTICIPLE

    if len(word) > 3 and word.endswith("s") and not word.endswith("ss"):
        if word.endswith("ies"):
            return _y_stem(word[:-3]), MorphForm.PRESENT_3SG
        if word.endswith("uses"):
            return _strip_uses(word), MorphForm.PRESENT_3SG
        if word.endswith(("sses", "shes", "ches", "xes", "zzes", "oes")):
            return word[:-2], MorphForm.PRESENT_3SG
        return word[:-1], MorphForm.PRESENT_3SG

    return word, MorphForm.INFINITIVE


def _y_stem(stem: str) -> str:
    """Base form behind -ied/-ies: d(ie), t(ie) but tr(y), carr(y)."""
    if len(stem) == 1:
        return stem + "ie"
    return stem + "y"


def _strip_uses(word: str) -> str:
    base = word[:-1]
    # caus(e), hous(e), paus(e)
    if base in USE_LEMMAS or (len(base) > 3 and base[-4] in VOWELS):
        return base
    return base[:-1]


def _has_vowel(stem: str) -> bool:
    return any(ch in VOWELS or ch == "y" for ch in stem)


def _syllables(stem: str) -> int:
    count = 0
    previous = False
    for ch in stem:
        vowel = ch in VOWELS or ch == "y"
        if vowel and not previous:
            count += 1
        previous = vowel
    return count


def _stem_candidates(stem: str):
    yield stem
    yield stem + "e"
    if _ends_doubled(stem):
        yield stem[:-1]
        yield stem[:-1] + "e"


def _known_stem(stem: str) -> Optional[str]:
    for candidate in _stem_candidates(stem):
        if candidate in KNOWN_VERB_LEMMAS:
            return candidate
    return None


def _ends_doubled(stem: str) -> bool:
    return len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in VOWELS


def _keeps_double_l(stem: str) -> bool:
    """True for fill, spell, install; False for control, compel, travel."""
    if stem.endswith(("all", "ill")):
        return True
    if any(stem.endswith(lemma) for lemma in KNOWN_VERB_LEMMAS if lemma.endswith("ll")):
        return True
    return _syllables(stem[:-1]) < 2


def _restore_stem(stem: str) -> str:
    """Undo consonant doubling and e-deletion left by -ing/-ed suffixes."""
    known = _known_stem(stem)
    if known is not None:
        return known
    if _ends_doubled(stem):
        if stem[-1] == "l":
            return stem if _keeps_double_l(stem) else stem[:-1]
        if stem[-1] in KEEP_DOUBLED:
            return stem
        return stem[:-1]
    if _needs_final_e(stem):
        return stem + "e"
    return stem


def _needs_final_e(stem: str) -> bool:
    if len(stem) < 2:
        return False
    # us(e), caus(e), accus(e) but focus, bus
    if stem.endswith("us"):
        return stem + "e" in USE_LEMMAS or (len(stem) > 2 and stem[-3] in VOWELS)
    # rat(e), creat(e) but treat, repeat, float
    if stem.endswith("at"):
        return len(stem) == 2 or stem[-3] not in VOWELS
    if stem.endswith(("v", "c", "u", "iz", "dg")):
        return True
    # handl(e), settl(e): consonant + l
    if stem[-1] == "l" and stem[-2] not in VOWELS and stem[-2] != "l":
        return True
    # short consonant-vowel-consonant stems: hop(e), mak(e)
    if len(stem) <= 3 and stem[-1] not in VOWELS and stem[-1] not in "wxy":
        return stem[-2] in VOWELS and (len(stem) == 2 or stem[-3] not in VOWELS)
    return False
