"""lexrule: regulatory-sentence classification for EU legislation.

Subpackages: corpus preparation, CoNLL-U ingestion, the dependency rule
classifier, evaluation metrics, and token-masking explanations. The ``lexrule``
command line wires them into end-to-end pipelines.
"""

__version__ = "0.1.0"

from .conllu import ParsedSentence, Token, read_conllu, read_conllu_file  # noqa: F401
from .lexicon import AgentLexicon, is_agent_noun, load_lexicon  # noqa: F401
from .ruleclf import (  # noqa: F401
    ClassificationOutcome,
    RuleProfile,
    classify_hybrid,
    classify_rule,
)
