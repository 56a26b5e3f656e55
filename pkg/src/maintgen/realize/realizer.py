"""Surface realization: sentence plans to annotated sentences.

One syntactic template per process class (action, need, locate,
be-value), driven entirely by lexicon entries and morphology tables:

  * imperatives: EN bare verb first, DE "Sie"-imperative with separable
    particles clause-final, FR 2nd-plural with enclitic object pronouns;
  * conditions: fronted subordinate clause, verb-final in German;
  * NPs: determiner agreement by case and gender from closed tables,
    modifiers inflected (DE) or postposed (FR);
  * post-lexical cleanup: French elision (de + huile -> d'huile), German
    preposition-determiner contraction (in dem -> im), English a/an.

Every piece of the sentence becomes a token carrying its separator, KB
link, sentence-plan id and semantic role; concatenating sep + surface
over the tokens reconstructs the text exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..kb.core import KnowledgeBase
from ..kb.model import KbError
from ..sentences import ROLE_ORDER, FormatInstruction, SentencePlan
from .lexicon import LanguageEntry, LexicalGapError, Lexicon
from .morphology import Morphology

FR_VOWELS = "aeiouyàâäéèêëïîôöùûü"
FR_H_MUET = ("huile", "heure", "homme", "habitude", "hydraulique")
FR_ELIDABLE = {"le": "l'", "la": "l'", "de": "d'", "ne": "n'", "se": "s'",
               "de la": "de l'", "du": "de l'"}


@dataclass
class Piece:
    surface: str
    sep: str = " "
    kb: str | None = None
    plan: int | None = None
    role: str | None = None
    pronoun: bool = False


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int
    sep: str
    kb: str | None
    plan: int | None
    role: str | None
    pronoun: bool = False


@dataclass(frozen=True)
class AnnotatedSentence:
    language: str
    text: str
    tokens: tuple
    plan_id: int


@dataclass(frozen=True)
class RenderedItem:
    kind: str  # sentence | heading | paragraph-break | list-begin | list-item | list-end
    sentence: AnnotatedSentence | None = None
    text: str | None = None
    payload: str | None = None


class Realizer:
    def __init__(self, lexicon: Lexicon, morphologies: dict,
                 kb: KnowledgeBase):
        self.lexicon = lexicon
        self.morphologies = morphologies
        self.kb = kb

    def realize(self, plan: SentencePlan, language: str) -> AnnotatedSentence:
        morph = self.morphologies.get(language)
        if morph is None:
            raise KbError(f"no morphology loaded for language {language}")
        pieces: list[Piece] = []
        if plan.condition is not None:
            pieces.extend(self._condition_clause(plan.condition, language, morph))
        main = self._clause(plan, language, morph, subordinate=False)
        if pieces:
            main[0].sep = ", "
        pieces.extend(main)
        pieces = _postprocess(pieces, language, morph)
        _capitalize(pieces)
        pieces.append(Piece(surface=".", sep="", plan=plan.id))
        return _assemble(pieces, language, plan.id)

    # --- clause templates -------------------------------------------------

    def _condition_clause(self, plan: SentencePlan, language: str,
                          morph: Morphology) -> list[Piece]:
        conj = Piece(surface=morph.table("conjunction", "conditional"),
                     plan=plan.id)
        clause = self._clause(plan, language, morph, subordinate=True)
        return [conj] + clause

    def _clause(self, plan: SentencePlan, language: str, morph: Morphology,
                subordinate: bool) -> list[Piece]:
        verb_entry = self.lexicon.entry(plan.process, language)
        template = self.lexicon.template(plan.process)
        if template == "action":
            if plan.mood != "imperative":
                raise KbError(f"action process {plan.process} needs imperative mood")
            return self._action_clause(plan, verb_entry, language, morph)
        if template == "need":
            return self._need_clause(plan, verb_entry, language, morph)
        if template == "locate":
            return self._locate_clause(plan, verb_entry, language, morph)
        return self._value_clause(plan, verb_entry, language, morph, subordinate)

    def _action_clause(self, plan: SentencePlan, verb: LanguageEntry,
                       language: str, morph: Morphology) -> list[Piece]:
        finite_lemma = verb.lemma
        particle = verb.particle
        if language == "de" and particle:
            finite_lemma = verb.lemma[len(particle):]
        form = {"en": "imp", "de": "imp-formal", "fr": "imp-2pl"}[language]
        finite = morph.inflect(finite_lemma, verb.cls, {"form": form})
        pieces = [Piece(surface=finite, kb=plan.process, plan=plan.id,
                        role="process")]
        actee = plan.participants.get("actee")
        pronoun_actee = actee is not None and actee.form == "pronoun"
        if language == "de":
            pieces.append(Piece(surface="Sie", plan=plan.id))
        if language == "fr" and pronoun_actee:
            pieces.append(self._pronoun_piece(actee, "actee", "acc", language,
                                              morph, plan.id, sep="-"))
        elif language == "en":
            if pronoun_actee:
                pieces.append(self._pronoun_piece(actee, "actee", "acc",
                                                  language, morph, plan.id))
                if particle:
                    pieces.append(Piece(surface=particle, kb=plan.process,
                                        plan=plan.id, role="process"))
            else:
                if particle:
                    pieces.append(Piece(surface=particle, kb=plan.process,
                                        plan=plan.id, role="process"))
                if actee is not None:
                    pieces.extend(self._np(actee, "actee", "acc", language,
                                           morph, plan.id))
        if language in ("de", "fr") and actee is not None and not pronoun_actee:
            pieces.extend(self._np(actee, "actee", "acc", language, morph,
                                   plan.id))
        if language == "de" and pronoun_actee:
            pieces.insert(2, self._pronoun_piece(actee, "actee", "acc",
                                                 language, morph, plan.id))
        pieces.extend(self._oblique_pps(plan, verb, language, morph))
        if language == "de" and particle:
            pieces.append(Piece(surface=particle, kb=plan.process,
                                plan=plan.id, role="process"))
        return pieces

    def _need_clause(self, plan: SentencePlan, verb: LanguageEntry,
                     language: str, morph: Morphology) -> list[Piece]:
        form = {"en": "pres-2pl", "de": "pres-2pl-formal", "fr": "pres-2pl"}[language]
        finite = morph.inflect(verb.lemma, verb.cls, {"form": form})
        pieces = [Piece(surface=morph.table("addressee"), plan=plan.id),
                  Piece(surface=finite, kb=plan.process, plan=plan.id,
                        role="process")]
        actee = plan.participants.get("actee")
        if actee is not None:
            prep = verb.preps.get("actee")
            if prep:
                pieces.append(Piece(surface=prep["prep"], plan=plan.id))
                pieces.extend(self._np(actee, "actee", prep.get("case", "acc"),
                                       language, morph, plan.id,
                                       after_prep=prep["prep"]))
            else:
                pieces.extend(self._np(actee, "actee", "acc", language, morph,
                                       plan.id))
        return pieces

    def _locate_clause(self, plan: SentencePlan, verb: LanguageEntry,
                       language: str, morph: Morphology) -> list[Piece]:
        actee = plan.participants.get("actee")
        if actee is None:
            raise KbError(f"locate process {plan.process} needs an actee")
        pieces = self._np(actee, "actee", "nom", language, morph, plan.id)
        finite = morph.inflect(verb.lemma, verb.cls, {"form": "pres-3sg"})
        if verb.reflexive and language == "fr":
            pieces.append(Piece(surface="se", plan=plan.id))
        pieces.append(Piece(surface=finite, kb=plan.process, plan=plan.id,
                            role="process"))
        if verb.reflexive and language == "de":
            pieces.append(Piece(surface="sich", plan=plan.id))
        location = plan.participants.get("location")
        if location is not None:
            prep = verb.preps.get("location")
            if prep is None:
                raise KbError(f"{plan.process}: no location preposition for {language}")
            pieces.append(Piece(surface=prep["prep"], plan=plan.id))
            pieces.extend(self._np(location, "location", prep.get("case", "dat"),
                                   language, morph, plan.id,
                                   after_prep=prep["prep"]))
        return pieces

    def _value_clause(self, plan: SentencePlan, state: LanguageEntry,
                      language: str, morph: Morphology,
                      subordinate: bool) -> list[Piece]:
        actee = plan.participants.get("actee")
        if actee is None:
            raise KbError(f"state {plan.process} needs an actee")
        if not state.phrase:
            raise KbError(f"state {plan.process} has no {language} value phrase")
        pieces = self._np(actee, "actee", "nom", language, morph, plan.id)
        negative = plan.polarity == "negative"
        copula = morph.table("copula", "pres-3sg")
        phrase = Piece(surface=state.phrase, kb=plan.process, plan=plan.id,
                       role="value")
        if language == "de":
            # verb-final in the subordinate clause, verb-second otherwise
            if not subordinate:
                pieces.append(Piece(surface=copula, plan=plan.id))
            if negative:
                pieces.append(Piece(surface=morph.table("negation"), plan=plan.id))
            pieces.append(phrase)
            if subordinate:
                pieces.append(Piece(surface=copula, plan=plan.id))
            return pieces
        if language == "fr" and negative:
            pieces.append(Piece(surface=morph.table("copula", "pres-3sg-negative"),
                                plan=plan.id))
        else:
            pieces.append(Piece(surface=copula, plan=plan.id))
            if negative:
                pieces.append(Piece(surface=morph.table("negation"), plan=plan.id))
        pieces.append(phrase)
        return pieces

    def _oblique_pps(self, plan: SentencePlan, verb: LanguageEntry,
                     language: str, morph: Morphology) -> list[Piece]:
        pieces = []
        for role in ROLE_ORDER:
            if role == "actee":
                continue
            expr = plan.participants.get(role)
            if expr is None:
                continue
            prep = verb.preps.get(role)
            if prep is None:
                raise KbError(f"{plan.process}: no {role} preposition for {language}")
            pieces.append(Piece(surface=prep["prep"], plan=plan.id))
            pieces.extend(self._np(expr, role, prep.get("case", "dat"),
                                   language, morph, plan.id,
                                   after_prep=prep["prep"]))
        return pieces

    # --- noun phrases ---------------------------------------------------------

    def _np(self, expr, role: str, case: str, language: str,
            morph: Morphology, plan_id: int, after_prep: str | None = None) -> list[Piece]:
        if expr.form == "pronoun":
            return [self._pronoun_piece(expr, role, case, language, morph,
                                        plan_id)]
        key = self.lexicon.key_for_referent(expr.referent, self.kb, language)
        entry = self.lexicon.entry(key, language)
        det = self._determiner(expr.form, entry, case, language, morph,
                               after_prep)
        core = self._core_np(entry, expr.form, case, language, morph)
        pieces = []
        if det is not None:
            pieces.append(Piece(surface=det, plan=plan_id))
        pieces.append(Piece(surface=core, kb=expr.referent, plan=plan_id,
                            role=role))
        return pieces

    def _pronoun_piece(self, expr, role: str, case: str, language: str,
                       morph: Morphology, plan_id: int, sep: str = " ") -> Piece:
        key = self.lexicon.key_for_referent(expr.referent, self.kb, language)
        entry = self.lexicon.entry(key, language)
        if language == "en":
            surface = morph.table("pronoun", "object")
        elif language == "de":
            surface = morph.table("pronoun", entry.gender, case)
        else:
            surface = morph.table("pronoun", "object", entry.gender)
        return Piece(surface=surface, sep=sep, kb=expr.referent, plan=plan_id,
                     role=role, pronoun=True)

    def _determiner(self, form: str, entry: LanguageEntry, case: str,
                    language: str, morph: Morphology,
                    after_prep: str | None) -> str | None:
        if form == "bare":
            if language == "fr" and after_prep != "de":
                return morph.table("determiner", "partitive", entry.gender)
            return None
        kind = "definite" if form == "definite" else "indefinite"
        if language == "en":
            return morph.table("determiner", kind)
        if language == "de":
            return morph.table("determiner", kind, entry.gender, case)
        return morph.table("determiner", kind, entry.gender)

    def _core_np(self, entry: LanguageEntry, form: str, case: str,
                 language: str, morph: Morphology) -> str:
        if language == "de":
            noun = morph.inflect(entry.lemma, entry.cls,
                                 {"case": case, "number": "sg"})
        else:
            noun = morph.inflect(entry.lemma, entry.cls, {"number": "sg"})
        if not entry.modifier:
            return noun
        if language == "de":
            context = {"definite": "after-definite",
                       "indefinite": "after-indefinite"}.get(form, "bare")
            ending = morph.table("adjective", context, entry.gender, case)
            return f"{entry.modifier}{ending} {noun}"
        if entry.modifier_position == "post":
            return f"{noun} {entry.modifier}"
        return f"{entry.modifier} {noun}"

    # --- multi-sentence helpers ----------------------------------------------

    def realize_items(self, sequence: list, language: str) -> list[RenderedItem]:
        out = []
        for item in sequence:
            if isinstance(item, FormatInstruction):
                if item.kind == "heading":
                    out.append(RenderedItem(kind="heading",
                                            text=self.lexicon.heading(item.payload,
                                                                      language),
                                            payload=item.payload))
                else:
                    out.append(RenderedItem(kind=item.kind, payload=item.payload))
            else:
                out.append(RenderedItem(kind="sentence",
                                        sentence=self.realize(item, language)))
        return out


# --- post-lexical adjustment -------------------------------------------------------

def _postprocess(pieces: list[Piece], language: str,
                 morph: Morphology) -> list[Piece]:
    if language == "fr":
        return _elide_fr(pieces)
    if language == "de":
        return _contract_de(pieces, morph)
    if language == "en":
        for i, piece in enumerate(pieces[:-1]):
            if piece.kb is None and piece.surface == "a" \
                    and _starts_with_vowel_en(pieces[i + 1].surface):
                piece.surface = "an"
    return pieces


def _elide_fr(pieces: list[Piece]) -> list[Piece]:
    for i, piece in enumerate(pieces[:-1]):
        nxt = pieces[i + 1]
        if piece.kb is not None:
            continue
        elided = FR_ELIDABLE.get(piece.surface)
        if elided and _starts_with_vowel_fr(nxt.surface):
            piece.surface = elided
            nxt.sep = ""
    return pieces


def _starts_with_vowel_fr(surface: str) -> bool:
    word = surface.lower()
    return word[:1] in FR_VOWELS or word.split(" ")[0] in FR_H_MUET


def _starts_with_vowel_en(surface: str) -> bool:
    return surface[:1].lower() in "aeiou"


def _contract_de(pieces: list[Piece], morph: Morphology) -> list[Piece]:
    contractions = morph.tables.get("contractions", {})
    out: list[Piece] = []
    i = 0
    while i < len(pieces):
        piece = pieces[i]
        if (i + 1 < len(pieces) and piece.kb is None
                and pieces[i + 1].kb is None):
            merged = f"{piece.surface} {pieces[i + 1].surface}"
            if merged in contractions:
                out.append(Piece(surface=contractions[merged], sep=piece.sep,
                                 plan=piece.plan))
                i += 2
                continue
        out.append(piece)
        i += 1
    return out


def _capitalize(pieces: list[Piece]):
    if pieces:
        first = pieces[0].surface
        pieces[0].surface = first[:1].upper() + first[1:]


def _assemble(pieces: list[Piece], language: str, plan_id: int) -> AnnotatedSentence:
    text = []
    tokens = []
    offset = 0
    for i, piece in enumerate(pieces):
        sep = "" if i == 0 else piece.sep
        start = offset + len(sep)
        end = start + len(piece.surface)
        text.append(sep + piece.surface)
        tokens.append(Token(surface=piece.surface, start=start, end=end,
                            sep=sep, kb=piece.kb, plan=piece.plan,
                            role=piece.role, pronoun=piece.pronoun))
        offset = end
    return AnnotatedSentence(language=language, text="".join(text),
                             tokens=tuple(tokens), plan_id=plan_id)


def sentence_to_json(sentence: AnnotatedSentence) -> dict:
    return {
        "language": sentence.language,
        "plan": sentence.plan_id,
        "text": sentence.text,
        "tokens": [
            {"surface": t.surface, "start": t.start, "end": t.end,
             "sep": t.sep, "kb": t.kb, "plan": t.plan, "role": t.role,
             "pronoun": t.pronoun}
            for t in sentence.tokens
        ],
    }
