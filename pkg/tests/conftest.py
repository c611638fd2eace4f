import csv
import sys
from pathlib import Path

import pytest

from lexrule import conllu, lexicon

FIXTURES = Path(__file__).parent / "fixtures"

# expected rule verdicts on the parsed fixture set, keyed by sentence text:
# (v1 label, v1 failure reason, refined label)
RULE_EXPECTATIONS = {
    "Citizens must separate their recyclables.": (1, None, 1),
    "Citizens must separate their recyclables before disposing of trash, or else face a fine.": (1, None, 1),
    "It shall apply from 23 November 2016.": (0, "pronoun_attribute", 0),
    "This Decision shall enter into force on the date of its adoption.": (0, "unknown_agent_noun", 0),
    "It shall inform the Council of any difficulties.": (0, "pronoun_attribute", 0),
    "They shall keep the Head of the Union Delegation informed.": (0, "pronoun_attribute", 0),
    "The ISSB shall monitor and review the application of the standards.": (0, "unknown_agent_noun", 0),
    "An ARM shall continuously monitor in real-time the performance of its systems.": (0, "unknown_agent_noun", 0),
    "The data exchange shall comply with the FLUX Vessel Position Implementation Document adopted by NEAFC.": (0, "unknown_agent_noun", 0),
    "Recyclables must be separated by authorized operators.": (1, None, 1),
    "Recyclables must be separated for authorized operators.": (1, None, 0),
    "Member States shall ensure that operators comply with the obligations laid down in Annex II.": (1, None, 1),
    "The Commission shall adopt implementing acts laying down the format of the notification.": (1, None, 1),
    "Operators must keep records of all transactions for a period of five years.": (1, None, 1),
    "The application shall be submitted by the manufacturer to the competent authority.": (1, None, 1),
    "In this case, the privileges of the holder shall be limited by the competent authority to performing flight instruction.": (0, "unknown_agent_noun", 0),
    "It shall be reviewed by the Council before the end of the transitional period.": (1, None, 1),
    "Article 2 is replaced by the following:": (0, "no_deontic_verb", 0),
    "This Regulation shall be binding in its entirety and directly applicable in all Member States.": (0, "no_deontic_verb", 0),
    "Member States may lay down rules on penalties applicable to infringements.": (0, "no_deontic_verb", 0),
    "The notification referred to in paragraph 1 shall include the information specified in Annex III.": (0, "unknown_agent_noun", 0),
    "Each importer shall indicate their name and address on the packaging.": (1, None, 1),
    "Farmers must notify the competent authority of any change within thirty days.": (1, None, 1),
    "Where a Member State grants an authorisation, it shall inform the other Member States without delay.": (1, None, 1),
    "Such measures shall take account of the need to protect workers.": (0, "unknown_agent_noun", 0),
}


def stub_cmd(name: str, *args: str) -> list[str]:
    return [sys.executable, str(FIXTURES / name), *args]


@pytest.fixture(scope="session")
def agent_lexicon():
    return lexicon.load_lexicon(
        str(Path(__file__).parent.parent / "src" / "lexrule" / "data" / "agent_lexicon.txt")
    )


@pytest.fixture(scope="session")
def parsed_sentences():
    sentences = conllu.read_conllu_file(str(FIXTURES / "eu_sentences.conllu"), scheme="legacy_clear")
    return {s.text: s for s in sentences}


@pytest.fixture(scope="session")
def gold_rows():
    with open(FIXTURES / "eu_sentences_gold.csv", encoding="utf-8", newline="") as fh:
        return [(row["sentence"], int(row["label"])) for row in csv.DictReader(fh)]
